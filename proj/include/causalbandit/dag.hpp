#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "causalbandit/node_set.hpp"

namespace causalbandit {

using Edge = std::pair<Node, Node>;

inline constexpr std::size_t kMaxNodes = std::size_t{1} << 16;

/// Directed acyclic graph over nodes 0..n-1 with precomputed reachability.
///
/// Every node is its own ancestor and descendant. The graph is immutable
/// after construction and safe to share across threads.
class Dag {
 public:
  Dag() = default;
  // Throws ParameterError on self loops, out-of-range endpoints, cycles or
  // n > kMaxNodes. Duplicate edges are collapsed.
  Dag(std::size_t n, std::vector<Edge> edges);

  std::size_t size() const noexcept { return n_; }
  const std::vector<Edge>& edges() const noexcept { return edges_; }
  std::size_t edge_count() const noexcept { return edges_.size(); }
  const std::vector<Node>& topo_order() const noexcept { return topo_; }
  // Position of each node in topo_order().
  const std::vector<std::size_t>& topo_rank() const noexcept { return rank_; }

  std::span<const Node> parents(Node v) const { return parents_[v]; }
  std::span<const Node> children(Node v) const { return children_[v]; }

  const NodeSet& ancestors(Node v) const { return anc_[v]; }
  const NodeSet& descendants(Node v) const { return desc_[v]; }
  bool has_edge(Node u, Node v) const;

  NodeSet all_nodes() const { return NodeSet::full(n_); }

  /// Subgraph induced by `keep`, relabelled to 0..|keep|-1 in increasing
  /// index order. `old_of_new` maps new labels back.
  Dag induced(const NodeSet& keep, std::vector<Node>* old_of_new = nullptr) const;

 private:
  std::size_t n_ = 0;
  std::vector<Edge> edges_;
  std::vector<Node> topo_;
  std::vector<std::size_t> rank_;
  std::vector<std::vector<Node>> parents_;
  std::vector<std::vector<Node>> children_;
  std::vector<NodeSet> anc_;
  std::vector<NodeSet> desc_;
};

/// Nodes of the graph that feed the reward node. An empty set encodes the
/// reward having no parent in the graph.
struct ParentSpec {
  NodeSet parents;

  static ParentSpec none(std::size_t n) { return ParentSpec{NodeSet(n)}; }
  static ParentSpec single(std::size_t n, Node p) { return ParentSpec{NodeSet(n, {p})}; }

  bool empty() const noexcept { return parents.empty(); }
  std::size_t count() const noexcept { return parents.size(); }
  // The unique parent; requires count() <= 1.
  std::optional<Node> single_parent() const;

  friend bool operator==(const ParentSpec&, const ParentSpec&) = default;
};

// Ancestor set of the parent spec: union of the parents' ancestors (empty
// for the no-parent case).
NodeSet parent_ancestors(const Dag& dag, const ParentSpec& p);

/// Ancestors of x within the subgraph induced by `candidates`, including x.
NodeSet ancestors_in(const Dag& dag, const NodeSet& candidates, Node x);

/// Descendants of x intersected with `candidates`. Equals the induced
/// subgraph descendants whenever `candidates` is a RAPS candidate set.
NodeSet descendants_in(const Dag& dag, const NodeSet& candidates, Node x);

/// Maximum node degree of the undirected skeleton.
std::size_t skeleton_max_degree(const Dag& dag);

/// True iff a collider-free path joins x and the single parent, i.e. they
/// share a common ancestor. False when the parent spec is empty.
bool has_trek(const Dag& dag, Node x, const ParentSpec& p);

// Edge-list text format:
//   n <count>
//   u v            (one edge per line)
//   parents u1 u2  (optional)
// Blank lines and lines starting with '#' are ignored.
struct GraphFile {
  Dag dag;
  ParentSpec parent;
};

GraphFile read_graph(std::istream& in);
GraphFile read_graph_file(const std::string& path);
void write_graph(std::ostream& out, const Dag& dag, const ParentSpec& parent);

}  // namespace causalbandit
