#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "causalbandit/raps.hpp"
#include "causalbandit/scm.hpp"

namespace causalbandit {

/// Index policy over a fixed arm set. Rounds are 1-based within a phase.
class BanditPolicy {
 public:
  virtual ~BanditPolicy() = default;
  virtual std::size_t select(std::uint64_t round) = 0;
  virtual void update(std::size_t arm, double reward) = 0;
};

/// UCB1: play every arm once, then argmax of mean + sqrt(2 ln t / count).
/// Ties go to the lowest index.
class Ucb1 final : public BanditPolicy {
 public:
  explicit Ucb1(std::size_t arms);
  std::size_t select(std::uint64_t round) override;
  void update(std::size_t arm, double reward) override;
  const std::vector<std::uint64_t>& counts() const noexcept { return counts_; }

 private:
  std::vector<std::uint64_t> counts_;
  std::vector<double> sums_;
};

enum class Phase : std::uint8_t { discovery, ucb, flat };
std::string_view phase_name(Phase p);

struct RegretRecord {
  std::uint64_t T = 0;
  std::uint64_t discovery_samples = 0;
  bool budgeted = true;
  bool discovery_truncated = false;

  // Distinct interventions played, with their true means.
  std::vector<Intervention> arms;
  std::vector<double> arm_means;
  double arm_means_half_width = 0.0;  // > 0 when means came from Monte Carlo

  std::vector<std::uint32_t> arm_per_round;
  std::vector<double> reward_per_round;
  std::vector<Phase> phase_per_round;
  std::vector<double> cumulative_regret;

  double optimum = 0.0;
  double simple_regret = 0.0;
  bool simple_regret_set = false;
  bool event_E_held = true;
  ParentSpec discovered;
  bool parent_correct = true;
  std::size_t discovery_interventions = 0;

  double final_regret() const { return cumulative_regret.empty() ? 0.0 : cumulative_regret.back(); }
  std::size_t add_arm(const Intervention& iv, double mean);
  void record_round(std::uint32_t arm, double reward, Phase phase);
};

// Best achievable mean: the maximum reward table entry.
double optimal_mean(const Scm& scm);

/// UCB1 over the K^{|arm_node|} interventions do(arm_node = v) for T rounds.
/// Throws ParameterError when arm_node is empty or T < K^{|arm_node|}.
RegretRecord ucb_run(const Scm& scm, const ParentSpec& arm_node, std::uint64_t T, Rng& rng);

/// Flat baseline: UCB1 over all n*K atomic interventions, ignoring structure.
RegretRecord flat_ucb_run(const Scm& scm, std::uint64_t T, Rng& rng);

struct EndToEndOptions {
  // Discovery samples consume the horizon when true; otherwise T counts
  // only post-discovery rounds.
  bool budgeted = true;
  // Failure probability; defaults to min{1, sqrt(K ln T / T)}.
  std::optional<double> delta;
  // Batch size; defaults to required_batch_size.
  std::optional<std::uint64_t> B;
};

double default_delta(int K, std::uint64_t T);

/// Statistical search for the parent, then UCB1 on the discovered parent.
/// Every discovery sample is charged its gap to the optimum.
RegretRecord end_to_end(const Scm& scm, const DetectorConfig& cfg, std::uint64_t T, Rng& rng,
                        const EndToEndOptions& options = {});

/// Draws a recommendation from the empirical play frequencies of the UCB
/// phase and stores its simple regret in the record. Throws StateError when
/// the record has no UCB round.
Intervention simple_regret_recommend(RegretRecord& record, Rng& rng);

// Expectation of the simple regret under the frequency rule.
double expected_simple_regret(const RegretRecord& record);

}  // namespace causalbandit
