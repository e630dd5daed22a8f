#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include "causalbandit/errors.hpp"
#include "causalbandit/graph_gen.hpp"
#include "causalbandit/raps.hpp"
#include "causalbandit/theory.hpp"
#include "test_support.hpp"

using namespace causalbandit;
using namespace causalbandit::fixtures;

namespace {

// Picks nodes from a fixed list, in order.
NodePicker scripted(std::vector<Node> order) {
  auto pos = std::make_shared<std::size_t>(0);
  return [order = std::move(order), pos](const NodeSet& c) {
    const Node x = order.at((*pos)++);
    if (!c.contains(x)) throw std::logic_error("scripted node is not a candidate");
    return x;
  };
}

using SequenceDistribution = std::map<std::vector<Node>, Rational>;

// Exact distribution of intervened sequences under uniform draws, by
// walking the decision tree with scripted candidate indices.
void explore(const Dag& g, const ParentSpec& p, std::vector<std::size_t> script, SequenceDistribution& out) {
  std::size_t pos = 0;
  const auto trace = raps_oracle(g, p, [&](const NodeSet& c) {
    const std::size_t k = pos < script.size() ? script[pos] : 0;
    ++pos;
    return c.nth(k);
  });
  if (trace.steps.size() > script.size()) {
    const std::size_t width = trace.steps[script.size()].candidate_set_size;
    for (std::size_t k = 0; k < width; ++k) {
      auto next = script;
      next.push_back(k);
      explore(g, p, std::move(next), out);
    }
    return;
  }
  Rational prob = 1;
  for (const auto& s : trace.steps) prob /= static_cast<unsigned long>(s.candidate_set_size);
  out[trace.intervened_sequence()] += prob;
}

SequenceDistribution permutation_distribution(const Dag& g, const ParentSpec& p) {
  std::vector<Node> perm(g.size());
  std::iota(perm.begin(), perm.end(), 0);
  SequenceDistribution out;
  unsigned long count = 0;
  do {
    out[raps_permutation(g, p, perm).intervened_sequence()] += 1;
    ++count;
  } while (std::next_permutation(perm.begin(), perm.end()));
  for (auto& [seq, w] : out) {
    w /= count;
    w.canonicalize();
  }
  return out;
}

SequenceDistribution oracle_distribution(const Dag& g, const ParentSpec& p) {
  SequenceDistribution out;
  explore(g, p, {}, out);
  for (auto& [seq, w] : out) w.canonicalize();
  return out;
}

const Scm& four_node_scm() {
  static const Scm scm = build_scm(four_node_dag(), four_node_parent(), 2, 0.3, 0.3, 17).scm;
  return scm;
}

DetectorConfig lemma_config(std::size_t n) {
  DetectorConfig cfg;
  cfg.B = required_batch_size(n, 2, cfg.delta, cfg.Delta, cfg.eps);
  return cfg;
}

}  // namespace

TEST(RapsOracle, FourNodeScriptedDraws) {
  const auto trace = raps_oracle(four_node_dag(), four_node_parent(), scripted({kX3, kX1, kP}));
  EXPECT_EQ(trace.intervened_sequence(), (std::vector<Node>{kX3, kX1, kP}));
  EXPECT_EQ(trace.intervention_count, 3u);
  EXPECT_EQ(trace.result, four_node_parent());
  EXPECT_EQ(trace.steps[0].discovered_descendants, NodeSet(4, {kX3, kX2}));
  EXPECT_FALSE(trace.steps[0].was_ancestor);
  EXPECT_EQ(trace.steps[1].candidates, NodeSet(4, {kX1, kP}));
  EXPECT_TRUE(trace.steps[1].was_ancestor);
}

TEST(RapsOracle, SingleNode) {
  Rng rng(1);
  const auto trace = raps_oracle(Dag(1, {}), ParentSpec::single(1, 0), rng);
  EXPECT_EQ(trace.intervention_count, 1u);
  EXPECT_EQ(trace.result, ParentSpec::single(1, 0));
}

TEST(RapsOracle, NullGraphWithoutParentTestsEveryNode) {
  Rng rng(2);
  const auto trace = raps_oracle(Dag(5, {}), ParentSpec::none(5), rng);
  EXPECT_EQ(trace.intervention_count, 5u);
  EXPECT_TRUE(trace.result.empty());
}

TEST(RapsOracle, CorrectOnAllSmallDags) {
  for (std::size_t n = 1; n <= 4; ++n)
    for_each_ordered_dag(n, [&](const Dag& g) {
      for (const auto& p : all_placements(n))
        for (std::uint64_t seed = 0; seed < 10; ++seed) {
          Rng rng(seed);
          const auto trace = raps_oracle(g, p, rng);
          ASSERT_EQ(trace.result, p);
          ASSERT_EQ(trace.intervention_count, trace.steps.size());
        }
    });
}

TEST(RapsOracle, CorrectOnRandomDags) {
  Rng rng(3);
  for (int t = 0; t < 300; ++t) {
    const std::size_t n = 1 + rng.uniform_below(64);
    const Dag g = random_dag(n, rng.uniform01() * 0.3, rng);
    const auto p = t % 5 == 0 ? ParentSpec::none(n) : ParentSpec::single(n, static_cast<Node>(rng.uniform_below(n)));
    const auto trace = raps_oracle(g, p, rng);
    EXPECT_EQ(trace.result, p);
    for (std::size_t i = 1; i < trace.steps.size(); ++i)
      EXPECT_LT(trace.steps[i].candidate_set_size, trace.steps[i - 1].candidate_set_size);
  }
}

TEST(RapsOracle, MeanCountMatchesExpectation) {
  Rng graph_rng(4);
  for (std::size_t n : {8u, 30u, 64u}) {
    const Dag g = random_dag(n, 4.0 / static_cast<double>(n), graph_rng);
    const auto p = ParentSpec::single(n, static_cast<Node>(graph_rng.uniform_below(n)));
    const double expected = to_double(expected_interventions(g, p));
    Rng rng(n);
    const int runs = 10000;
    double sum = 0.0, sq = 0.0;
    for (int i = 0; i < runs; ++i) {
      const double c = static_cast<double>(raps_oracle(g, p, rng).intervention_count);
      sum += c;
      sq += c * c;
    }
    const double mean = sum / runs;
    const double sd = std::sqrt(std::max(0.0, sq / runs - mean * mean));
    EXPECT_NEAR(mean, expected, 3 * sd / std::sqrt(runs)) << n;
  }
}

TEST(RapsOracle, CandidateSetsBelongToTheFamily) {
  Rng rng(5);
  for (std::size_t n = 1; n <= 4; ++n)
    for_each_ordered_dag(n, [&](const Dag& g) {
      for (Node pn = 0; pn < n; ++pn) {
        const auto p = ParentSpec::single(n, pn);
        const auto fam = candidate_family(g, p);
        const std::set<NodeSet> family(fam.begin(), fam.end());
        for (int r = 0; r < 20; ++r)
          for (const auto& s : raps_oracle(g, p, rng).steps) ASSERT_TRUE(family.count(s.candidates));
      }
    });
}

TEST(RapsOracle, RecursionIsTheExactMeanOfUniformDraws) {
  for (std::size_t n = 1; n <= 4; ++n)
    for_each_ordered_dag(n, [&](const Dag& g) {
      for (const auto& p : all_placements(n)) {
        Rational mean = 0;
        for (const auto& [seq, w] : oracle_distribution(g, p)) mean += w * static_cast<unsigned long>(seq.size());
        mean.canonicalize();
        ASSERT_EQ(mean, expected_interventions_recursive(g, p));
      }
    });
}

TEST(RapsOracle, FourNodeAncestorBranchKeepsChildOfParent) {
  const auto trace = raps_oracle(four_node_dag(), four_node_parent(), scripted({kX1, kP, kX2}));
  EXPECT_EQ(trace.intervened_sequence(), (std::vector<Node>{kX1, kP, kX2}));
  EXPECT_EQ(trace.result, four_node_parent());
}

TEST(RapsPermutation, FourNodeExamples) {
  const Dag g = four_node_dag();
  const std::vector<Node> perm{kX3, kX2, kX1, kP};
  const auto trace = raps_permutation(g, four_node_parent(), perm);
  EXPECT_EQ(trace.intervened_sequence(), (std::vector<Node>{kX3, kX1, kP}));
  EXPECT_EQ(trace.result, four_node_parent());
  const std::vector<Node> a{kX3, kX1, kX2, kP}, b{kX3, kX1, kP, kX2};
  EXPECT_EQ(raps_permutation(g, four_node_parent(), a).intervened_sequence(),
            raps_permutation(g, four_node_parent(), b).intervened_sequence());
}

TEST(RapsPermutation, SingleNodeAndValidation) {
  const std::vector<Node> id{0};
  EXPECT_EQ(raps_permutation(Dag(1, {}), ParentSpec::single(1, 0), id).intervention_count, 1u);
  const std::vector<Node> bad{0, 0};
  EXPECT_THROW(raps_permutation(Dag(2, {}), ParentSpec::single(2, 0), bad), ParameterError);
}

TEST(RapsPermutation, SameSequenceDistributionAsUniformDraws) {
  for (std::size_t n = 1; n <= 5; ++n)
    for_each_ordered_dag(n, [&](const Dag& g) {
      for (const auto& p : all_placements(n)) ASSERT_EQ(oracle_distribution(g, p), permutation_distribution(g, p));
    });
}

TEST(RapsStatistical, SingleNodeFindsTheParent) {
  const Scm scm = build_scm(Dag(1, {}), ParentSpec::single(1, 0), 2, 0.3, 0.3, 1).scm;
  const auto cfg = lemma_config(1);
  int correct = 0;
  for (std::uint64_t t = 0; t < 200; ++t) {
    Rng rng(t);
    correct += raps_statistical(scm, cfg, rng).trace.result == scm.reward_parents();
  }
  EXPECT_GE(correct, 180);
}

TEST(RapsStatistical, FourNodeDescendantsOfX3) {
  const Scm& scm = four_node_scm();
  const auto cfg = lemma_config(4);
  int correct = 0;
  for (std::uint64_t t = 0; t < 200; ++t) {
    Rng rng(1000 + t);
    StatisticalOracle oracle(scm, cfg, rng);
    const auto r = oracle.query(NodeSet::full(4), kX3);
    correct += !r.is_ancestor && r.descendants == NodeSet(4, {kX3, kX2});
  }
  EXPECT_GE(correct, 180);
}

TEST(RapsStatistical, SampleAccounting) {
  const Scm& scm = four_node_scm();
  DetectorConfig cfg;
  for (std::uint64_t B : {1u, 7u}) {
    cfg.B = B;
    Rng rng(6);
    const auto res = raps_statistical(scm, cfg, rng);
    EXPECT_EQ(res.ledger.total(), B * (1 + 2 * res.trace.intervention_count));
    EXPECT_EQ(res.trace.samples_used, res.ledger.total());
    EXPECT_EQ(res.ledger.declarations.size(), res.trace.intervention_count);
  }
}

TEST(RapsStatistical, SinkSeesEverySample) {
  const Scm& scm = four_node_scm();
  DetectorConfig cfg;
  cfg.B = 50;
  Rng rng(7);
  std::uint64_t seen = 0;
  const auto res = raps_statistical(scm, cfg, rng, [&](const Intervention&, const Sample&) { ++seen; });
  EXPECT_EQ(seen, res.ledger.total());
}

TEST(RapsStatistical, RejectsZeroBatch) {
  DetectorConfig cfg;
  cfg.B = 0;
  Rng rng(1);
  EXPECT_THROW(raps_statistical(four_node_scm(), cfg, rng), ParameterError);
}

TEST(Multiparent, TwoParentChainDiscoversDownstreamFirst) {
  const Dag g = line_dag(2);
  const ParentSpec parents{NodeSet(2, {0, 1})};
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    const auto res = multiparent_search_oracle(g, parents, rng);
    EXPECT_EQ(res.discovery_order, (std::vector<Node>{1, 0}));
    EXPECT_EQ(res.parents, parents);
    ASSERT_EQ(res.traces.size(), 3u);
    EXPECT_TRUE(res.traces.back().result.empty());
  }
}

TEST(Multiparent, SingleParentMatchesRapsThenEmptyCall) {
  Rng grng(8);
  for (int t = 0; t < 30; ++t) {
    const Dag g = random_dag(12, 0.3, grng);
    const auto p = ParentSpec::single(12, static_cast<Node>(grng.uniform_below(12)));
    Rng a(t), b(t);
    const auto res = multiparent_search_oracle(g, p, a);
    const auto single = raps_oracle(g, p, b);
    ASSERT_EQ(res.traces.size(), 2u);
    EXPECT_EQ(res.traces[0].intervened_sequence(), single.intervened_sequence());
    EXPECT_EQ(res.parents, p);
    EXPECT_TRUE(res.traces[1].result.empty());
  }
}

TEST(Multiparent, ChainOrderIsReverseTopological) {
  GraphFamilySpec s;
  s.kind = GraphFamily::multiparent_chain;
  s.n = 3;
  s.num_parents = 3;
  const auto [g, parents] = gen_named(s);
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Rng rng(seed);
    const auto res = multiparent_search_oracle(g, parents, rng);
    EXPECT_EQ(res.discovery_order, (std::vector<Node>{2, 1, 0}));
    EXPECT_TRUE(is_reverse_topological(g, res.discovery_order));
  }
}

TEST(Multiparent, AmbientGraphsRecoverAllParents) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    GraphFamilySpec s;
    s.kind = GraphFamily::multiparent_chain;
    s.n = 40;
    s.num_parents = 1 + seed % 3;
    s.p = 0.1;
    s.seed = seed;
    const auto [g, parents] = gen_named(s);
    Rng rng(seed);
    const auto res = multiparent_search_oracle(g, parents, rng);
    EXPECT_EQ(res.parents, parents);
    EXPECT_TRUE(is_reverse_topological(g, res.discovery_order));
  }
}

TEST(Multiparent, StatisticalModeFlagsExtrapolation) {
  const Dag g = line_dag(3);
  const Scm scm = build_scm(g, ParentSpec{NodeSet(3, {1, 2})}, 2, 0.3, 0.3, 4).scm;
  DetectorConfig cfg = lemma_config(3);
  Rng rng(9);
  const auto res = multiparent_search_statistical(scm, cfg, rng);
  EXPECT_TRUE(res.ledger.thresholds_extrapolated);
  EXPECT_EQ(res.parents, scm.reward_parents());
}
