#include "causalbandit/graph_gen.hpp"

#include <algorithm>
#include <numeric>

#include "causalbandit/errors.hpp"

namespace causalbandit {

GraphFamily parse_family(std::string_view name) {
  if (name == "erdos_renyi" || name == "er") return GraphFamily::erdos_renyi;
  if (name == "line") return GraphFamily::line;
  if (name == "n_branch") return GraphFamily::n_branch;
  if (name == "collider_line") return GraphFamily::collider_line;
  if (name == "dary_tree") return GraphFamily::dary_tree;
  if (name == "null") return GraphFamily::null;
  if (name == "multiparent_chain") return GraphFamily::multiparent_chain;
  throw ParameterError("unknown graph family '" + std::string(name) + "'");
}

std::string_view family_name(GraphFamily f) {
  switch (f) {
    case GraphFamily::erdos_renyi: return "erdos_renyi";
    case GraphFamily::line: return "line";
    case GraphFamily::n_branch: return "n_branch";
    case GraphFamily::collider_line: return "collider_line";
    case GraphFamily::dary_tree: return "dary_tree";
    case GraphFamily::null: return "null";
    case GraphFamily::multiparent_chain: return "multiparent_chain";
  }
  return "?";
}

ParentPlacement parse_placement(std::string_view name) {
  if (name == "random") return ParentPlacement::random;
  if (name == "first-in-topo" || name == "first_in_topo") return ParentPlacement::first_in_topo;
  if (name == "last-in-topo" || name == "last_in_topo") return ParentPlacement::last_in_topo;
  if (name == "none") return ParentPlacement::none;
  throw ParameterError("unknown parent placement '" + std::string(name) + "'");
}

std::string_view placement_name(ParentPlacement p) {
  switch (p) {
    case ParentPlacement::random: return "random";
    case ParentPlacement::first_in_topo: return "first-in-topo";
    case ParentPlacement::last_in_topo: return "last-in-topo";
    case ParentPlacement::none: return "none";
  }
  return "?";
}

Dag gen_erdos_renyi(std::size_t n, double p, std::uint64_t seed) {
  Rng rng(seed);
  return gen_erdos_renyi(n, p, rng);
}

Dag gen_erdos_renyi(std::size_t n, double p, Rng& rng) {
  if (n < 1) throw DomainError("Erdos-Renyi graph needs n >= 1");
  if (!(p >= 0.0 && p <= 1.0)) throw DomainError("edge probability outside [0, 1]");
  std::vector<std::size_t> pi(n);
  std::iota(pi.begin(), pi.end(), 0);
  for (std::size_t i = n; i > 1; --i) std::swap(pi[i - 1], pi[rng.uniform_below(i)]);

  std::vector<Edge> edges;
  if (p > 0.0) edges.reserve(static_cast<std::size_t>(p * static_cast<double>(n) * static_cast<double>(n - 1) / 2 * 1.05) + 16);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (!rng.bernoulli(p)) continue;
      if (pi[i] < pi[j])
        edges.emplace_back(static_cast<Node>(i), static_cast<Node>(j));
      else
        edges.emplace_back(static_cast<Node>(j), static_cast<Node>(i));
    }
  }
  return Dag(n, std::move(edges));
}

ParentSpec place_parent(const Dag& dag, ParentPlacement placement, Rng& rng) {
  const std::size_t n = dag.size();
  if (n == 0 || placement == ParentPlacement::none) return ParentSpec::none(n);
  switch (placement) {
    case ParentPlacement::random: return ParentSpec::single(n, static_cast<Node>(rng.uniform_below(n)));
    case ParentPlacement::first_in_topo: return ParentSpec::single(n, dag.topo_order().front());
    case ParentPlacement::last_in_topo: return ParentSpec::single(n, dag.topo_order().back());
    case ParentPlacement::none: break;
  }
  return ParentSpec::none(n);
}

std::size_t dary_tree_height(std::size_t n, std::size_t d) {
  if (d < 2) throw ParameterError("tree arity must be at least 2");
  std::size_t total = 1, level = 1, h = 0;
  while (total < n) {
    level *= d;
    total += level;
    ++h;
  }
  if (total != n) throw ParameterError("no perfect " + std::to_string(d) + "-ary tree has " + std::to_string(n) + " nodes");
  return h;
}

namespace {

std::pair<Dag, ParentSpec> line_graph(std::size_t n) {
  std::vector<Edge> e;
  for (std::size_t i = 0; i + 1 < n; ++i) e.emplace_back(static_cast<Node>(i), static_cast<Node>(i + 1));
  return {Dag(n, std::move(e)), ParentSpec::single(n, 0)};
}

// P = 0 points at every X_i; X_1 -> ... -> X_half; X_half points at the rest.
std::pair<Dag, ParentSpec> n_branch_graph(std::size_t n) {
  std::vector<Edge> e;
  const std::size_t half = n / 2;
  for (std::size_t i = 1; i < n; ++i) e.emplace_back(0, static_cast<Node>(i));
  for (std::size_t i = 1; i < half; ++i) e.emplace_back(static_cast<Node>(i), static_cast<Node>(i + 1));
  for (std::size_t i = half + 1; i < n; ++i)
    if (half >= 1) e.emplace_back(static_cast<Node>(half), static_cast<Node>(i));
  return {Dag(n, std::move(e)), ParentSpec::single(n, 0)};
}

// X_0 = P -> X_1 <- X_2 -> X_3 <- X_4 -> ...
std::pair<Dag, ParentSpec> collider_line_graph(std::size_t n) {
  if (n % 2 != 0) throw ParameterError("collider_line requires an even node count");
  std::vector<Edge> e;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    if (i % 2 == 0)
      e.emplace_back(static_cast<Node>(i), static_cast<Node>(i + 1));
    else
      e.emplace_back(static_cast<Node>(i + 1), static_cast<Node>(i));
  }
  return {Dag(n, std::move(e)), ParentSpec::single(n, 0)};
}

// Heap layout: children of i are d*i+1 .. d*i+d.
std::pair<Dag, ParentSpec> dary_tree_graph(std::size_t n, std::size_t d, TreeParentPlacement placement) {
  dary_tree_height(n, d);
  std::vector<Edge> e;
  for (std::size_t v = 1; v < n; ++v) e.emplace_back(static_cast<Node>((v - 1) / d), static_cast<Node>(v));
  Dag dag(n, std::move(e));
  switch (placement) {
    case TreeParentPlacement::none: return {std::move(dag), ParentSpec::none(n)};
    case TreeParentPlacement::root: return {std::move(dag), ParentSpec::single(n, 0)};
    case TreeParentPlacement::leaf: break;
  }
  // Leftmost leaf below the root's first child.
  std::size_t v = 0;
  while (d * v + 1 < n) v = d * v + 1;
  return {std::move(dag), ParentSpec::single(n, static_cast<Node>(v))};
}

std::pair<Dag, ParentSpec> multiparent_graph(const GraphFamilySpec& spec) {
  const std::size_t m = spec.num_parents;
  if (m < 1) throw ParameterError("multiparent_chain needs at least one parent");
  if (spec.n < m) throw ParameterError("multiparent_chain needs n >= num_parents");
  if (spec.n == m) {
    std::vector<Edge> e;
    for (std::size_t i = 0; i + 1 < m; ++i) e.emplace_back(static_cast<Node>(i), static_cast<Node>(i + 1));
    Dag dag(m, std::move(e));
    return {std::move(dag), ParentSpec{NodeSet::full(m)}};
  }
  // Ambient Erdos-Renyi graph; the last m nodes in topological order are the
  // parents.
  Rng rng(spec.seed);
  Dag dag = gen_erdos_renyi(spec.n, spec.p, rng);
  ParentSpec ps = ParentSpec::none(spec.n);
  const auto& topo = dag.topo_order();
  for (std::size_t i = spec.n - m; i < spec.n; ++i) ps.parents.insert(topo[i]);
  return {std::move(dag), std::move(ps)};
}

}  // namespace

std::pair<Dag, ParentSpec> gen_named(const GraphFamilySpec& spec) {
  if (spec.kind != GraphFamily::multiparent_chain && spec.n < 1) throw ParameterError("graph needs n >= 1");
  switch (spec.kind) {
    case GraphFamily::erdos_renyi: {
      Rng rng(spec.seed);
      Dag dag = gen_erdos_renyi(spec.n, spec.p, rng);
      ParentSpec ps = place_parent(dag, spec.placement, rng);
      return {std::move(dag), std::move(ps)};
    }
    case GraphFamily::line: return line_graph(spec.n);
    case GraphFamily::n_branch: return n_branch_graph(spec.n);
    case GraphFamily::collider_line: return collider_line_graph(spec.n);
    case GraphFamily::dary_tree: return dary_tree_graph(spec.n, spec.d, spec.tree_placement);
    case GraphFamily::null: return {Dag(spec.n, {}), ParentSpec::single(spec.n, 0)};
    case GraphFamily::multiparent_chain: return multiparent_graph(spec);
  }
  throw ParameterError("unknown graph family");
}

std::pair<Dag, ParentSpec> relabel(const Dag& dag, const ParentSpec& p, std::span<const Node> permutation) {
  const std::size_t n = dag.size();
  if (permutation.size() != n) throw ParameterError("permutation length differs from node count");
  std::vector<bool> hit(n, false);
  for (Node v : permutation) {
    if (v >= n || hit[v]) throw ParameterError("permutation is not a bijection");
    hit[v] = true;
  }
  std::vector<Edge> e;
  e.reserve(dag.edge_count());
  for (const auto& [u, v] : dag.edges()) e.emplace_back(permutation[u], permutation[v]);
  ParentSpec q = ParentSpec::none(n);
  p.parents.for_each([&](Node v) { q.parents.insert(permutation[v]); });
  return {Dag(n, std::move(e)), std::move(q)};
}

}  // namespace causalbandit
