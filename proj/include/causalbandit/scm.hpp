#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "causalbandit/dag.hpp"
#include "causalbandit/rng.hpp"

namespace causalbandit {

/// do(targets = values). An empty intervention is the observational arm.
struct Intervention {
  NodeSet targets;
  std::vector<int> values;  // one per target, in increasing node order

  static Intervention observational(std::size_t n) { return {NodeSet(n), {}}; }
  static Intervention atomic(std::size_t n, Node x, int value) { return {NodeSet(n, {x}), {value}}; }
  // do(nodes = values) with values aligned to `nodes` in increasing order.
  static Intervention on_set(const NodeSet& nodes, std::vector<int> values) { return {nodes, std::move(values)}; }

  bool empty() const noexcept { return targets.empty(); }
  std::string to_string() const;
  friend bool operator==(const Intervention&, const Intervention&) = default;
};

struct Sample {
  std::vector<int> assignment;
  double reward = 0.0;
};

// Additive reward noise: zero-mean Gaussian truncated to [-truncation,
// truncation], which is 1-subgaussian for sd <= 1.
struct RewardNoise {
  double sd = 0.1;
  double truncation = 1.0;
};

/// Categorical structural causal model with a reward node outside the graph.
///
/// Each node Y has K categories and a conditional table with one row per
/// joint value of its parents (sorted ascending, mixed radix with the first
/// parent most significant). The reward mean depends only on the values of
/// the reward parents.
class Scm {
 public:
  Scm(Dag dag, ParentSpec reward_parents, int K, std::vector<std::vector<double>> cpts,
      std::vector<double> reward_table, RewardNoise noise = {});

  const Dag& dag() const noexcept { return dag_; }
  const ParentSpec& reward_parents() const noexcept { return reward_parents_; }
  int K() const noexcept { return K_; }
  std::size_t size() const noexcept { return dag_.size(); }
  const std::vector<double>& cpt(Node v) const { return cpts_[v]; }
  const std::vector<std::vector<double>>& cpts() const noexcept { return cpts_; }
  const std::vector<double>& reward_table() const noexcept { return reward_table_; }
  const RewardNoise& noise() const noexcept { return noise_; }

  // Row index of node v's table for a full assignment.
  std::size_t row_index(Node v, std::span<const int> assignment) const;
  // Reward table index for a full assignment.
  std::size_t reward_index(std::span<const int> assignment) const;
  // Values of the reward parents encoded by a reward table index.
  std::vector<int> decode_reward_index(std::size_t index) const;

  /// Ancestral sampling with the targets of `iv` clamped.
  Sample sample(const Intervention& iv, Rng& rng) const;
  // Allocation-free variant; `forced[v]` is the clamped value or -1.
  double sample_into(std::span<const int> forced, Rng& rng, std::vector<int>& assignment) const;

  double max_reward_mean() const;

 private:
  Dag dag_;
  ParentSpec reward_parents_;
  std::vector<Node> reward_parent_list_;
  int K_;
  std::vector<std::vector<double>> cpts_;
  std::vector<double> reward_table_;
  RewardNoise noise_;
};

// Per-node clamp vector for an intervention (-1 = free).
std::vector<int> forced_values(std::size_t n, const Intervention& iv);

enum class MeanMode { exact, monte_carlo };

struct MeanEstimate {
  double value = 0.0;
  double half_width = 0.0;  // 0 for exact; otherwise a 3-sigma interval
  MeanMode mode = MeanMode::exact;
};

inline constexpr std::size_t kExactInferenceMaxNodes = 20;

/// E[R | do(iv)]. Exact mode enumerates the ancestral closure of the reward
/// parents in the mutilated graph and throws CapabilityError for n > 20.
double interventional_mean(const Scm& scm, const Intervention& iv);
MeanEstimate interventional_mean_mc(const Scm& scm, const Intervention& iv, std::size_t samples, Rng& rng);
// Exact when n <= 20, otherwise Monte Carlo with `mc_samples`.
MeanEstimate interventional_mean_auto(const Scm& scm, const Intervention& iv, Rng& rng,
                                      std::size_t mc_samples = 1'000'000);

/// Exact P(Y = y | do(iv)) for every node Y, as marginals[Y][y]. Enumerates
/// the joint; throws CapabilityError when K^n exceeds 2^22.
std::vector<std::vector<double>> interventional_marginals(const Scm& scm, const Intervention& iv);

struct IdentifiabilityReport {
  bool exact = true;
  // Smallest over ancestor pairs X in A(Y), X != Y, of max_{x,y}
  // |P(Y=y | do(X=x)) - P(Y=y)|. +inf when there are no such pairs.
  double eps_margin = 0.0;
  // Smallest over X in A(parents) of max_x |E[R] - E[R | do(X=x)]|.
  double delta_margin = 0.0;
  // Smallest per-edge row gap: for X -> Y, max over row pairs of Y that
  // differ only in X of the largest entry difference.
  double edge_gap = 0.0;
  // Monte Carlo only: half width subtracted from the estimates above, and the
  // per-estimate confidence it corresponds to.
  double mc_half_width = 0.0;
  double mc_confidence = 1.0;
  std::size_t mc_samples = 0;

  bool satisfies(double eps_target, double delta_target) const {
    return eps_margin > eps_target && delta_margin > delta_target && edge_gap > eps_target;
  }
  std::string failing_assumption(double eps_target, double delta_target) const;
};

// Exact when K^n <= 2^20, otherwise Monte Carlo with `mc_samples` per
// intervention and margins reduced by a Hoeffding half width.
IdentifiabilityReport verify_identifiability(const Scm& scm, Rng& rng, std::size_t mc_samples = 20000);

struct ScmBuildOptions {
  double dirichlet_alpha = 1.0;
  int max_attempts = 60;
  std::size_t mc_samples = 20000;
  // Reward means are spread monotonically over [reward_low, reward_high].
  double reward_low = 0.0;
  double reward_high = 1.0;
  // Fixed distribution for every root node instead of a Dirichlet draw.
  std::optional<std::vector<double>> root_distribution;
};

struct BuiltScm {
  Scm scm;
  IdentifiabilityReport report;
  int attempts = 0;
  double sharpness = 0.0;
};

/// Random SCM on `dag` certified to satisfy ancestral-effect identifiability
/// with margin > eps_target and reward identifiability with margin >
/// delta_target. Rows of non-root nodes mix a Dirichlet draw with a point
/// mass on the largest parent value; the point-mass weight rises across
/// retries. Throws ConstructionError when the retry budget runs out.
BuiltScm build_scm(const Dag& dag, const ParentSpec& parents, int K, double eps_target, double delta_target,
                   std::uint64_t seed, const ScmBuildOptions& options = {});

// JSON document: {"n", "edges", "K", "parents", "cpts", "reward_table", "noise"}.
std::string scm_to_json(const Scm& scm);
Scm scm_from_json(const std::string& text);
Scm read_scm_file(const std::string& path);

}  // namespace causalbandit
