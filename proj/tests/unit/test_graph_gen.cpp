#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "causalbandit/errors.hpp"
#include "causalbandit/graph_gen.hpp"
#include "causalbandit/theory.hpp"
#include "test_support.hpp"

using namespace causalbandit;

namespace {

GraphFamilySpec named(GraphFamily kind, std::size_t n) {
  GraphFamilySpec s;
  s.kind = kind;
  s.n = n;
  return s;
}

std::vector<Edge> sorted_edges(const Dag& g) {
  auto e = g.edges();
  std::sort(e.begin(), e.end());
  return e;
}

}  // namespace

TEST(ErdosRenyi, ZeroAndOneProbability) {
  for (std::uint64_t seed : {0u, 1u, 99u}) {
    EXPECT_EQ(gen_erdos_renyi(5, 0.0, seed).edge_count(), 0u);
    const Dag full = gen_erdos_renyi(5, 1.0, seed);
    EXPECT_EQ(full.edge_count(), 10u);
    // A tournament consistent with one order has a unique topological order.
    const auto& topo = full.topo_order();
    for (std::size_t i = 0; i + 1 < topo.size(); ++i) EXPECT_TRUE(full.has_edge(topo[i], topo[i + 1]));
  }
}

TEST(ErdosRenyi, SameSeedSameGraph) {
  EXPECT_EQ(gen_erdos_renyi(40, 0.2, 7).edges(), gen_erdos_renyi(40, 0.2, 7).edges());
  EXPECT_NE(gen_erdos_renyi(40, 0.2, 7).edges(), gen_erdos_renyi(40, 0.2, 8).edges());
}

TEST(ErdosRenyi, MeanEdgeCount) {
  double sum = 0.0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) sum += static_cast<double>(gen_erdos_renyi(200, 0.3, seed).edge_count());
  const double sigma = std::sqrt(19900 * 0.3 * 0.7);
  // Mean of 100 draws: standard error is sigma / 10.
  EXPECT_NEAR(sum / 100.0, 5970.0, 3.0 * sigma / 10.0);
}

TEST(ErdosRenyi, PerPairMarginal) {
  const std::size_t n = 6, trials = 10000;
  const double p = 0.35;
  std::vector<std::size_t> hits(n * n, 0);
  for (std::uint64_t seed = 0; seed < trials; ++seed) {
    const Dag g = gen_erdos_renyi(n, p, seed);
    for (const auto& [u, v] : g.edges()) ++hits[std::min(u, v) * n + std::max(u, v)];
  }
  const double sigma = std::sqrt(p * (1 - p) / trials);
  for (Node i = 0; i < n; ++i)
    for (Node j = i + 1; j < n; ++j) EXPECT_NEAR(static_cast<double>(hits[i * n + j]) / trials, p, 3.5 * sigma);
}

TEST(ErdosRenyi, RejectsBadParameters) {
  EXPECT_THROW(gen_erdos_renyi(0, 0.5, 1), DomainError);
  EXPECT_THROW(gen_erdos_renyi(4, 1.5, 1), DomainError);
}

TEST(ErdosRenyi, DescendantsOfFirstNodeAtThreshold) {
  const double p = er_fast_threshold(64, 1, 0.5, ThresholdVariant::corollary);
  const int graphs = 500;
  double sum = 0.0, sq = 0.0;
  for (int s = 0; s < graphs; ++s) {
    const Dag g = gen_erdos_renyi(64, p, static_cast<std::uint64_t>(s));
    const double d = static_cast<double>(g.descendants(g.topo_order().front()).size());
    sum += d;
    sq += d * d;
  }
  const double mean = sum / graphs;
  const double sem = std::sqrt((sq / graphs - mean * mean) / graphs);
  EXPECT_GE(mean, 0.5 * 64 - 3.0 * sem);
}

TEST(Named, LineGraph) {
  const auto [g, p] = gen_named(named(GraphFamily::line, 4));
  EXPECT_EQ(sorted_edges(g), (std::vector<Edge>{{0, 1}, {1, 2}, {2, 3}}));
  EXPECT_EQ(p, ParentSpec::single(4, 0));
}

TEST(Named, ColliderLine) {
  const auto [g, p] = gen_named(named(GraphFamily::collider_line, 4));
  EXPECT_EQ(sorted_edges(g), (std::vector<Edge>{{0, 1}, {2, 1}, {2, 3}}));
  EXPECT_EQ(p, ParentSpec::single(4, 0));
  EXPECT_THROW(gen_named(named(GraphFamily::collider_line, 5)), ParameterError);
}

TEST(Named, MultiparentChainWithoutAmbient) {
  auto spec = named(GraphFamily::multiparent_chain, 2);
  spec.num_parents = 2;
  const auto [g, p] = gen_named(spec);
  EXPECT_EQ(sorted_edges(g), (std::vector<Edge>{{0, 1}}));
  EXPECT_EQ(p.parents, NodeSet(2, {0, 1}));
}

TEST(Named, MultiparentInAmbientGraphUsesLastTopologicalNodes) {
  auto spec = named(GraphFamily::multiparent_chain, 30);
  spec.num_parents = 3;
  spec.p = 0.2;
  spec.seed = 5;
  const auto [g, p] = gen_named(spec);
  ASSERT_EQ(p.count(), 3u);
  const auto& topo = g.topo_order();
  for (std::size_t i = 27; i < 30; ++i) EXPECT_TRUE(p.parents.test(topo[i]));
}

TEST(Named, NBranch) {
  const auto [g, p] = gen_named(named(GraphFamily::n_branch, 8));
  EXPECT_EQ(p, ParentSpec::single(8, 0));
  for (Node v = 1; v < 8; ++v) EXPECT_TRUE(g.has_edge(0, v));
  EXPECT_TRUE(g.has_edge(1, 2));
  EXPECT_TRUE(g.has_edge(3, 4));
  EXPECT_TRUE(g.has_edge(4, 7));
}

TEST(Named, DaryTree) {
  auto spec = named(GraphFamily::dary_tree, 15);
  const auto [g, p] = gen_named(spec);
  EXPECT_EQ(g.edge_count(), 14u);
  ASSERT_EQ(p.count(), 1u);
  const Node leaf = *p.single_parent();
  EXPECT_TRUE(g.children(leaf).empty());
  EXPECT_TRUE(g.ancestors(leaf).test(1));
  spec.n = 14;
  EXPECT_THROW(gen_named(spec), ParameterError);
  spec.n = 13;
  spec.d = 3;
  EXPECT_NO_THROW(gen_named(spec));
}

TEST(Named, NullGraph) {
  const auto [g, p] = gen_named(named(GraphFamily::null, 5));
  EXPECT_EQ(g.edge_count(), 0u);
  EXPECT_EQ(p, ParentSpec::single(5, 0));
}

TEST(Named, FamilyNamesRoundTrip) {
  for (auto f : {GraphFamily::erdos_renyi, GraphFamily::line, GraphFamily::n_branch, GraphFamily::collider_line,
                 GraphFamily::dary_tree, GraphFamily::null, GraphFamily::multiparent_chain})
    EXPECT_EQ(parse_family(family_name(f)), f);
  EXPECT_THROW(parse_family("scale_free"), ParameterError);
}

TEST(Placement, FirstAndLastInTopologicalOrder) {
  GraphFamilySpec s = named(GraphFamily::erdos_renyi, 20);
  s.p = 0.3;
  s.seed = 4;
  s.placement = ParentPlacement::first_in_topo;
  auto [g1, p1] = gen_named(s);
  EXPECT_EQ(*p1.single_parent(), g1.topo_order().front());
  s.placement = ParentPlacement::last_in_topo;
  auto [g2, p2] = gen_named(s);
  EXPECT_EQ(*p2.single_parent(), g2.topo_order().back());
  s.placement = ParentPlacement::none;
  EXPECT_TRUE(gen_named(s).second.empty());
}

TEST(Relabel, IdentityAndReversal) {
  const Dag line = fixtures::line_dag(3);
  const auto p = ParentSpec::single(3, 0);
  const std::vector<Node> id{0, 1, 2};
  const auto [g1, p1] = relabel(line, p, id);
  EXPECT_EQ(sorted_edges(g1), sorted_edges(line));
  EXPECT_EQ(p1, p);
  const std::vector<Node> rev{2, 1, 0};
  const auto [g2, p2] = relabel(line, p, rev);
  EXPECT_EQ(sorted_edges(g2), (std::vector<Edge>{{1, 0}, {2, 1}}));
  EXPECT_EQ(p2, ParentSpec::single(3, 2));
}

TEST(Relabel, RejectsNonBijection) {
  const Dag line = fixtures::line_dag(3);
  const std::vector<Node> bad{0, 0, 1};
  EXPECT_THROW(relabel(line, ParentSpec::single(3, 0), bad), ParameterError);
  const std::vector<Node> short_perm{0, 1};
  EXPECT_THROW(relabel(line, ParentSpec::single(3, 0), short_perm), ParameterError);
}

TEST(Generated, EveryFamilyIsAcyclic) {
  // Construction validates acyclicity; a cycle would throw.
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    GraphFamilySpec s = named(GraphFamily::erdos_renyi, 50);
    s.p = 0.1 + 0.01 * static_cast<double>(seed);
    s.seed = seed;
    const auto [g, p] = gen_named(s);
    EXPECT_EQ(g.topo_order().size(), 50u);
    for (const auto& [u, v] : g.edges()) EXPECT_LT(g.topo_rank()[u], g.topo_rank()[v]);
  }
}
