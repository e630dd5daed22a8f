#include "causalbandit/dag.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <queue>
#include <sstream>

#include "causalbandit/errors.hpp"

namespace causalbandit {

Dag::Dag(std::size_t n, std::vector<Edge> edges) : n_(n) {
  if (n > kMaxNodes) throw ParameterError("graph exceeds the node cap of 2^16");
  for (const auto& [u, v] : edges) {
    if (u >= n || v >= n) throw ParameterError("edge endpoint out of range");
    if (u == v) throw ParameterError("self loop " + std::to_string(u));
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  edges_ = std::move(edges);

  parents_.assign(n, {});
  children_.assign(n, {});
  for (const auto& [u, v] : edges_) {
    children_[u].push_back(v);
    parents_[v].push_back(u);
  }

  // Kahn with a min-heap so the order is canonical.
  std::vector<std::size_t> indeg(n);
  for (std::size_t v = 0; v < n; ++v) indeg[v] = parents_[v].size();
  std::priority_queue<Node, std::vector<Node>, std::greater<>> ready;
  for (std::size_t v = 0; v < n; ++v)
    if (indeg[v] == 0) ready.push(static_cast<Node>(v));
  topo_.reserve(n);
  while (!ready.empty()) {
    const Node u = ready.top();
    ready.pop();
    topo_.push_back(u);
    for (Node w : children_[u])
      if (--indeg[w] == 0) ready.push(w);
  }
  if (topo_.size() != n) throw ParameterError("edge relation contains a cycle");
  rank_.assign(n, 0);
  for (std::size_t i = 0; i < n; ++i) rank_[topo_[i]] = i;

  anc_.assign(n, NodeSet(n));
  desc_.assign(n, NodeSet(n));
  for (Node v : topo_) {
    anc_[v].insert(v);
    for (Node u : parents_[v]) anc_[v] |= anc_[u];
  }
  for (auto it = topo_.rbegin(); it != topo_.rend(); ++it) {
    const Node v = *it;
    desc_[v].insert(v);
    for (Node w : children_[v]) desc_[v] |= desc_[w];
  }
}

bool Dag::has_edge(Node u, Node v) const {
  const auto& ch = children_.at(u);
  return std::find(ch.begin(), ch.end(), v) != ch.end();
}

Dag Dag::induced(const NodeSet& keep, std::vector<Node>* old_of_new) const {
  std::vector<Node> old = keep.members();
  std::vector<Node> fresh(n_, 0);
  for (std::size_t i = 0; i < old.size(); ++i) fresh[old[i]] = static_cast<Node>(i);
  std::vector<Edge> e;
  for (const auto& [u, v] : edges_)
    if (keep.test(u) && keep.test(v)) e.emplace_back(fresh[u], fresh[v]);
  if (old_of_new) *old_of_new = old;
  return Dag(old.size(), std::move(e));
}

std::optional<Node> ParentSpec::single_parent() const {
  if (parents.size() > 1) throw DomainError("expected at most one parent");
  if (parents.empty()) return std::nullopt;
  return parents.nth(0);
}

NodeSet parent_ancestors(const Dag& dag, const ParentSpec& p) {
  NodeSet a(dag.size());
  p.parents.for_each([&](Node v) { a |= dag.ancestors(v); });
  return a;
}

NodeSet ancestors_in(const Dag& dag, const NodeSet& candidates, Node x) {
  if (!candidates.contains(x)) throw DomainError("x is not in the candidate set");
  NodeSet seen(dag.size());
  seen.insert(x);
  std::vector<Node> stack{x};
  while (!stack.empty()) {
    const Node v = stack.back();
    stack.pop_back();
    for (Node u : dag.parents(v)) {
      if (candidates.test(u) && !seen.test(u)) {
        seen.insert(u);
        stack.push_back(u);
      }
    }
  }
  return seen;
}

NodeSet descendants_in(const Dag& dag, const NodeSet& candidates, Node x) {
  if (!candidates.contains(x)) throw DomainError("x is not in the candidate set");
  return dag.descendants(x) & candidates;
}

std::size_t skeleton_max_degree(const Dag& dag) {
  if (dag.size() == 0) throw DomainError("skeleton degree of an empty graph");
  std::size_t best = 0;
  for (Node v = 0; v < dag.size(); ++v) best = std::max(best, dag.parents(v).size() + dag.children(v).size());
  return best;
}

bool has_trek(const Dag& dag, Node x, const ParentSpec& p) {
  const auto parent = p.single_parent();
  if (!parent) return false;
  return dag.ancestors(x).intersects(dag.ancestors(*parent));
}

GraphFile read_graph(std::istream& in) {
  std::optional<std::size_t> n;
  std::vector<Edge> edges;
  std::vector<Node> parents;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ls(line);
    std::string head;
    if (!(ls >> head) || head[0] == '#') continue;
    auto fail = [&](const std::string& why) {
      return ParameterError("graph file line " + std::to_string(lineno) + ": " + why);
    };
    if (head == "n") {
      std::size_t count = 0;
      if (!(ls >> count)) throw fail("expected a node count");
      n = count;
    } else if (head == "parents") {
      long long v = 0;
      while (ls >> v) {
        if (v < 0) throw fail("negative node index");
        parents.push_back(static_cast<Node>(v));
      }
    } else {
      long long u = 0, v = 0;
      std::istringstream es(line);
      if (!(es >> u >> v) || u < 0 || v < 0) throw fail("expected 'u v'");
      edges.emplace_back(static_cast<Node>(u), static_cast<Node>(v));
    }
  }
  if (!n) throw ParameterError("graph file has no 'n <count>' header");
  GraphFile g{Dag(*n, std::move(edges)), ParentSpec::none(*n)};
  for (Node v : parents) {
    if (v >= *n) throw ParameterError("parent index out of range");
    g.parent.parents.insert(v);
  }
  return g;
}

GraphFile read_graph_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open graph file " + path);
  return read_graph(in);
}

void write_graph(std::ostream& out, const Dag& dag, const ParentSpec& parent) {
  out << "n " << dag.size() << '\n';
  for (const auto& [u, v] : dag.edges()) out << u << ' ' << v << '\n';
  out << "parents";
  parent.parents.for_each([&](Node v) { out << ' ' << v; });
  out << '\n';
}

}  // namespace causalbandit
