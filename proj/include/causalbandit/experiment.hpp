#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "causalbandit/graph_gen.hpp"

namespace causalbandit {

enum class ExperimentKind { exact_vs_empirical, er_fast, er_slow, multiparent, regret_head2head };

ExperimentKind parse_experiment(std::string_view name);
std::string_view experiment_name(ExperimentKind k);

struct PRule {
  enum class Kind { explicit_value, corollary_threshold, ln_n_over_n, multiparent_threshold };
  Kind kind = Kind::explicit_value;
  double value = 0.0;  // explicit_value
  double c = 0.5;      // corollary_threshold; c0 for multiparent_threshold
  double c1 = 1.0;     // multiparent_threshold
  double k = 1.0;
  double base = 2.0;

  double evaluate(std::size_t n) const;
};

struct ExperimentConfig {
  ExperimentKind experiment = ExperimentKind::er_fast;
  std::vector<std::size_t> n_list;
  PRule p_rule;
  // exact_vs_empirical sweeps these instead of p_rule; defaults to 20
  // log-spaced values in [1e-3, 0.5].
  std::vector<double> p_list;
  std::vector<std::size_t> m_list{1};  // multiparent
  std::size_t runs_per_point = 20;
  std::uint64_t master_seed = 0;
  std::string output_path;
  ParentPlacement placement = ParentPlacement::random;
  std::size_t workers = 1;
  bool record_wall_time = false;

  // regret_head2head
  int K = 2;
  std::uint64_t T = 100000;
  double eps_target = 0.3;
  double delta_target = 0.3;
  double reward_low = 0.0;
  double reward_high = 1.0;
  std::vector<double> root_distribution;  // empty: Dirichlet roots

  void validate() const;
};

std::vector<double> log_spaced(double lo, double hi, std::size_t count);

ExperimentConfig config_from_json(const std::string& text);
ExperimentConfig load_config(const std::string& path);
std::string config_to_json(const ExperimentConfig& config);

struct RunRecord {
  std::string experiment;
  std::string family;
  std::size_t n = 0;
  double p = 0.0;
  std::size_t m = 0;
  std::uint64_t seed = 0;
  std::size_t interventions = 0;
  double expected = 0.0;
  bool parent_correct = true;
  double wall_time_ms = 0.0;
  std::string error;  // per-row algorithm error; empty on success
  bool reverse_topological = true;  // multiparent discovery order
  std::size_t point_index = 0;
  std::size_t run_index = 0;
};

inline constexpr std::string_view kRunRecordHeader =
    "experiment,family,n,p,m,seed,interventions,expected,parent_correct,wall_time_ms";

void write_csv_header(std::ostream& out);
void write_csv_row(std::ostream& out, const RunRecord& r);
std::vector<RunRecord> read_csv(std::istream& in);

// Regret head-to-head summary rows (seed, method, final regret, event E).
struct RegretSummary {
  std::uint64_t seed = 0;
  std::string method;
  double final_regret = 0.0;
  double regret_at_tenth = 0.0;  // cumulative regret at round T/10
  bool event_E_held = true;
  bool parent_correct = true;
};

inline constexpr std::string_view kRegretSummaryHeader =
    "seed,method,final_regret,regret_at_tenth,event_E_held,parent_correct";

void write_regret_header(std::ostream& out);
void write_regret_row(std::ostream& out, const RegretSummary& r);

struct ExperimentResult {
  std::vector<RunRecord> records;
  std::vector<RegretSummary> regret;
};

/// Runs the sweep deterministically from master_seed. Each run's stream is
/// derived from (master_seed, point_index, run_index) and rows are sorted by
/// (point_index, run_index), so the output does not depend on `workers`.
/// Writes the CSV when output_path is set.
ExperimentResult run_experiment(const ExperimentConfig& config);

// Default desk-scale configuration for each figure panel ("a".."d").
ExperimentConfig figure_config(std::string_view panel, std::uint64_t master_seed);

// Head-to-head instance: line graph n = 16, K = 2, T = 1e5, 20 seeds, root
// marginal (0.1, 0.9) and reward means in [0.25, 0.75].
ExperimentConfig regret_config(std::uint64_t master_seed);

}  // namespace causalbandit
