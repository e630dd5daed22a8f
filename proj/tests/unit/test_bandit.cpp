#include <gtest/gtest.h>

#include <cmath>

#include "causalbandit/bandit.hpp"
#include "causalbandit/errors.hpp"
#include "causalbandit/experiment.hpp"
#include "causalbandit/raps.hpp"
#include "test_support.hpp"

using namespace causalbandit;

namespace {

Scm two_arm_scm() { return Scm(Dag(1, {}), ParentSpec::single(1, 0), 2, {{0.5, 0.5}}, {0.9, 0.1}); }

Scm regret_line_scm() {
  const auto cfg = regret_config(0);
  ScmBuildOptions opt;
  opt.reward_low = cfg.reward_low;
  opt.reward_high = cfg.reward_high;
  opt.root_distribution = cfg.root_distribution;
  return build_scm(fixtures::line_dag(16), ParentSpec::single(16, 0), 2, cfg.eps_target, cfg.delta_target, 31, opt).scm;
}

double gap_sum(const RegretRecord& r, Phase phase) {
  double s = 0.0;
  for (std::size_t t = 0; t < r.arm_per_round.size(); ++t)
    if (r.phase_per_round[t] == phase) s += std::max(0.0, r.optimum - r.arm_means[r.arm_per_round[t]]);
  return s;
}

}  // namespace

TEST(Ucb1, PlaysUnplayedArmsFirstThenBestIndex) {
  Ucb1 u(3);
  EXPECT_EQ(u.select(1), 0u);
  u.update(0, 1.0);
  EXPECT_EQ(u.select(2), 1u);
  u.update(1, 0.0);
  EXPECT_EQ(u.select(3), 2u);
  u.update(2, 0.0);
  EXPECT_EQ(u.select(4), 0u);
  EXPECT_THROW(Ucb1(0), ParameterError);
}

TEST(UcbRun, SingleArmHasNoRegret) {
  const Scm scm(Dag(1, {}), ParentSpec::single(1, 0), 1, {{1.0}}, {0.4});
  Rng rng(1);
  const auto rec = ucb_run(scm, scm.reward_parents(), 1000, rng);
  EXPECT_EQ(rec.final_regret(), 0.0);
  Rng r2(2);
  auto copy = rec;
  EXPECT_EQ(simple_regret_recommend(copy, r2), Intervention::atomic(1, 0, 0));
}

TEST(UcbRun, RejectsShortHorizonAndEmptyArmSet) {
  Rng rng(1);
  EXPECT_THROW(ucb_run(two_arm_scm(), ParentSpec::single(1, 0), 1, rng), ParameterError);
  EXPECT_THROW(ucb_run(two_arm_scm(), ParentSpec::none(1), 100, rng), ParameterError);
}

TEST(UcbRun, TwoArmRegretAtTenThousand) {
  const Scm scm = two_arm_scm();
  double sum = 0.0;
  for (std::uint64_t s = 0; s < 20; ++s) {
    Rng rng(s);
    const auto rec = ucb_run(scm, scm.reward_parents(), 10000, rng);
    for (std::size_t t = 1; t < rec.cumulative_regret.size(); ++t)
      ASSERT_GE(rec.cumulative_regret[t], rec.cumulative_regret[t - 1]);
    sum += rec.final_regret();
  }
  EXPECT_LE(sum / 20, 250.0);
}

TEST(UcbRun, TwoArmAverageRegretVanishes) {
  const Scm scm = two_arm_scm();
  Rng rng(3);
  const auto rec = ucb_run(scm, scm.reward_parents(), 100000, rng);
  EXPECT_LT(rec.final_regret() / 100000.0, 0.05 * 0.8);
}

TEST(SimpleRegret, TwoArmRecommendationIsNearOptimal) {
  const Scm scm = two_arm_scm();
  Rng rng(4);
  auto rec = ucb_run(scm, scm.reward_parents(), 10000, rng);
  double sum = 0.0;
  for (int i = 0; i < 100; ++i) {
    simple_regret_recommend(rec, rng);
    ASSERT_TRUE(rec.simple_regret_set);
    sum += rec.simple_regret;
  }
  EXPECT_LE(sum / 100, 0.05 * 0.8);
}

TEST(SimpleRegret, FrequenciesMatchPlayCounts) {
  const Scm scm = two_arm_scm();
  Rng rng(5);
  auto rec = ucb_run(scm, scm.reward_parents(), 2000, rng);
  std::vector<double> expected(rec.arms.size(), 0.0);
  for (auto a : rec.arm_per_round) expected[a] += 1.0;
  const int draws = 10000;
  std::vector<double> observed(rec.arms.size(), 0.0);
  for (int i = 0; i < draws; ++i) {
    const auto iv = simple_regret_recommend(rec, rng);
    for (std::size_t a = 0; a < rec.arms.size(); ++a)
      if (rec.arms[a] == iv) observed[a] += 1.0;
  }
  double chi2 = 0.0;
  for (std::size_t a = 0; a < expected.size(); ++a) {
    const double e = expected[a] / static_cast<double>(rec.arm_per_round.size()) * draws;
    chi2 += (observed[a] - e) * (observed[a] - e) / e;
  }
  // One degree of freedom; 99.9% quantile.
  EXPECT_LT(chi2, 10.83);
}

TEST(SimpleRegret, ExpectationEqualsAverageUcbRegret) {
  const Scm scm = regret_line_scm();
  DetectorConfig cfg;
  Rng rng(6);
  const auto rec = end_to_end(scm, cfg, 50000, rng);
  std::uint64_t ucb_rounds = 0;
  for (auto ph : rec.phase_per_round) ucb_rounds += ph == Phase::ucb;
  ASSERT_GT(ucb_rounds, 0u);
  EXPECT_NEAR(expected_simple_regret(rec), gap_sum(rec, Phase::ucb) / static_cast<double>(ucb_rounds), 1e-12);
  // The Monte Carlo mean of the recommendation converges to the same value.
  auto copy = rec;
  Rng draw(7);
  double sum = 0.0;
  const int draws = 20000;
  for (int i = 0; i < draws; ++i) {
    simple_regret_recommend(copy, draw);
    sum += copy.simple_regret;
  }
  EXPECT_NEAR(sum / draws, expected_simple_regret(rec), 0.01);
}

TEST(SimpleRegret, EmptyHistoryIsAStateError) {
  RegretRecord rec;
  Rng rng(1);
  EXPECT_THROW(simple_regret_recommend(rec, rng), StateError);
}

TEST(EndToEnd, SingleNodeSplitsIntoDiscoveryAndUcb) {
  const Scm scm = two_arm_scm();
  DetectorConfig cfg;
  Rng rng(8);
  const auto rec = end_to_end(scm, cfg, 20000, rng);
  EXPECT_TRUE(rec.parent_correct);
  EXPECT_EQ(rec.cumulative_regret.size(), 20000u);
  const std::uint64_t B = required_batch_size(1, 2, default_delta(2, 20000), cfg.Delta, cfg.eps);
  EXPECT_EQ(rec.discovery_samples, B * (1 + 2 * rec.discovery_interventions));
  EXPECT_NEAR(rec.final_regret(), gap_sum(rec, Phase::discovery) + gap_sum(rec, Phase::ucb), 1e-6);
  std::uint64_t disc = 0;
  for (auto ph : rec.phase_per_round) disc += ph == Phase::discovery;
  EXPECT_EQ(disc, rec.discovery_samples);
}

TEST(EndToEnd, BudgetedModeRespectsTheHorizon) {
  const Scm scm = regret_line_scm();
  DetectorConfig cfg;
  Rng rng(9);
  const auto rec = end_to_end(scm, cfg, 5000, rng);
  EXPECT_EQ(rec.cumulative_regret.size(), 5000u);
  EXPECT_TRUE(rec.discovery_truncated);
  Rng rng2(9);
  EndToEndOptions unbudgeted;
  unbudgeted.budgeted = false;
  const auto full = end_to_end(scm, cfg, 5000, rng2, unbudgeted);
  EXPECT_EQ(full.cumulative_regret.size(), full.discovery_samples + 5000);
}

TEST(EndToEnd, DefaultDelta) {
  EXPECT_DOUBLE_EQ(default_delta(2, 100000), std::sqrt(2 * std::log(100000.0) / 100000));
  EXPECT_DOUBLE_EQ(default_delta(2, 3), std::sqrt(2 * std::log(3.0) / 3));
  EXPECT_DOUBLE_EQ(default_delta(2, 1), 1.0);
  EXPECT_DOUBLE_EQ(default_delta(8, 4), 1.0);
}

TEST(EndToEnd, LineGraphConditionalRegretBelowOnePercentOfLinear) {
  const Scm scm = regret_line_scm();
  DetectorConfig cfg;
  const std::uint64_t T = 100000;
  double sum = 0.0, max_gap = 0.0;
  int held = 0;
  for (std::uint64_t s = 0; s < 20; ++s) {
    Rng rng(100 + s);
    const auto rec = end_to_end(scm, cfg, T, rng);
    for (double m : rec.arm_means) max_gap = std::max(max_gap, rec.optimum - m);
    if (!rec.event_E_held) continue;
    ++held;
    sum += rec.final_regret();
  }
  ASSERT_GT(held, 0);
  EXPECT_LT(sum / held, 0.01 * static_cast<double>(T) * max_gap);
}

TEST(FlatUcb, PlaysEveryAtomicArm) {
  const Scm scm = regret_line_scm();
  Rng rng(10);
  const auto rec = flat_ucb_run(scm, 1000, rng);
  EXPECT_EQ(rec.arms.size(), 32u);
  for (auto ph : rec.phase_per_round) EXPECT_EQ(ph, Phase::flat);
  Rng r2(1);
  EXPECT_THROW(flat_ucb_run(scm, 10, r2), ParameterError);
}
