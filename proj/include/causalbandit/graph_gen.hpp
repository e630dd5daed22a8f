#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>

#include "causalbandit/dag.hpp"
#include "causalbandit/rng.hpp"

namespace causalbandit {

enum class GraphFamily { erdos_renyi, line, n_branch, collider_line, dary_tree, null, multiparent_chain };

// Where the single parent sits in a random graph.
enum class ParentPlacement { random, first_in_topo, last_in_topo, none };

// Where the parent sits in a perfect d-ary tree.
enum class TreeParentPlacement { leaf, root, none };

GraphFamily parse_family(std::string_view name);
std::string_view family_name(GraphFamily f);
ParentPlacement parse_placement(std::string_view name);
std::string_view placement_name(ParentPlacement p);

struct GraphFamilySpec {
  GraphFamily kind = GraphFamily::line;
  std::size_t n = 1;
  double p = 0.0;               // erdos_renyi, and the ambient graph of multiparent_chain
  std::size_t d = 2;            // dary_tree
  std::size_t num_parents = 1;  // multiparent_chain
  std::uint64_t seed = 0;
  ParentPlacement placement = ParentPlacement::random;
  TreeParentPlacement tree_placement = TreeParentPlacement::leaf;
};

/// Erdos-Renyi DAG: a uniform permutation pi, then each unordered pair
/// {i, j} joined independently with probability p and oriented i -> j
/// iff pi(i) < pi(j).
Dag gen_erdos_renyi(std::size_t n, double p, std::uint64_t seed);
Dag gen_erdos_renyi(std::size_t n, double p, Rng& rng);

ParentSpec place_parent(const Dag& dag, ParentPlacement placement, Rng& rng);

/// Named families with their designated parent spec. Node 0 is P for the
/// line, n_branch, collider_line and null families.
std::pair<Dag, ParentSpec> gen_named(const GraphFamilySpec& spec);

/// Maps node v to permutation[v].
std::pair<Dag, ParentSpec> relabel(const Dag& dag, const ParentSpec& p, std::span<const Node> permutation);

// Height h with (d^{h+1}-1)/(d-1) == n, or throws ParameterError.
std::size_t dary_tree_height(std::size_t n, std::size_t d);

}  // namespace causalbandit
