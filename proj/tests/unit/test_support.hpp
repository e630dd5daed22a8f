#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "causalbandit/dag.hpp"
#include "causalbandit/rng.hpp"

namespace causalbandit::fixtures {

// Labels of the four-node example graph: X1 -> P, X1 -> X2, P -> X2, X3 -> X2.
inline constexpr Node kP = 0, kX1 = 1, kX2 = 2, kX3 = 3;

inline Dag four_node_dag() { return Dag(4, {{kX1, kP}, {kX1, kX2}, {kP, kX2}, {kX3, kX2}}); }
inline ParentSpec four_node_parent() { return ParentSpec::single(4, kP); }

inline Dag line_dag(std::size_t n) {
  std::vector<Edge> e;
  for (Node v = 0; v + 1 < n; ++v) e.emplace_back(v, v + 1);
  return Dag(n, std::move(e));
}

// P -> X1 <- X2 -> X3 <- X4 ...
inline Dag collider_line_dag(std::size_t n) {
  std::vector<Edge> e;
  for (Node v = 0; v + 1 < n; ++v) {
    if (v % 2 == 0)
      e.emplace_back(v, v + 1);
    else
      e.emplace_back(v + 1, v);
  }
  return Dag(n, std::move(e));
}

// Every DAG on n nodes whose edges respect the order 0 < 1 < ... < n-1.
inline void for_each_ordered_dag(std::size_t n, const std::function<void(const Dag&)>& f) {
  std::vector<Edge> pairs;
  for (Node i = 0; i < n; ++i)
    for (Node j = i + 1; j < n; ++j) pairs.emplace_back(i, j);
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << pairs.size()); ++mask) {
    std::vector<Edge> e;
    for (std::size_t k = 0; k < pairs.size(); ++k)
      if ((mask >> k) & 1u) e.push_back(pairs[k]);
    f(Dag(n, std::move(e)));
  }
}

// Every parent placement: none, then each node.
inline std::vector<ParentSpec> all_placements(std::size_t n) {
  std::vector<ParentSpec> out{ParentSpec::none(n)};
  for (Node v = 0; v < n; ++v) out.push_back(ParentSpec::single(n, v));
  return out;
}

// Random DAG over a shuffled order with edge density p.
inline Dag random_dag(std::size_t n, double p, Rng& rng) {
  std::vector<Node> order(n);
  for (Node v = 0; v < n; ++v) order[v] = v;
  for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.uniform_below(i)]);
  std::vector<Edge> e;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (rng.bernoulli(p)) e.emplace_back(order[i], order[j]);
  return Dag(n, std::move(e));
}

// Plain DFS reachability inside `c`, following children (forward) or parents.
inline NodeSet reach_in(const Dag& dag, const NodeSet& c, Node x, bool forward) {
  NodeSet seen(dag.size());
  std::vector<Node> stack{x};
  seen.insert(x);
  while (!stack.empty()) {
    const Node v = stack.back();
    stack.pop_back();
    for (Node w : forward ? dag.children(v) : dag.parents(v))
      if (c.contains(w) && !seen.test(w)) {
        seen.insert(w);
        stack.push_back(w);
      }
  }
  return seen;
}

}  // namespace causalbandit::fixtures
