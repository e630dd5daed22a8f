#include "causalbandit/bandit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "causalbandit/errors.hpp"

namespace causalbandit {

Ucb1::Ucb1(std::size_t arms) : counts_(arms, 0), sums_(arms, 0.0) {
  if (arms == 0) throw ParameterError("UCB1 needs at least one arm");
}

std::size_t Ucb1::select(std::uint64_t round) {
  for (std::size_t a = 0; a < counts_.size(); ++a)
    if (counts_[a] == 0) return a;
  const double log_t = std::log(static_cast<double>(std::max<std::uint64_t>(round, 1)));
  std::size_t best = 0;
  double best_index = -std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < counts_.size(); ++a) {
    const double c = static_cast<double>(counts_[a]);
    const double index = sums_[a] / c + std::sqrt(2.0 * log_t / c);
    if (index > best_index) {
      best_index = index;
      best = a;
    }
  }
  return best;
}

void Ucb1::update(std::size_t arm, double reward) {
  ++counts_.at(arm);
  sums_[arm] += reward;
}

std::string_view phase_name(Phase p) {
  switch (p) {
    case Phase::discovery: return "discovery";
    case Phase::ucb: return "ucb";
    case Phase::flat: return "flat";
  }
  return "?";
}

std::size_t RegretRecord::add_arm(const Intervention& iv, double mean) {
  for (std::size_t i = 0; i < arms.size(); ++i)
    if (arms[i] == iv) return i;
  arms.push_back(iv);
  arm_means.push_back(mean);
  return arms.size() - 1;
}

void RegretRecord::record_round(std::uint32_t arm, double reward, Phase phase) {
  const double gap = std::max(0.0, optimum - arm_means.at(arm));
  arm_per_round.push_back(arm);
  reward_per_round.push_back(reward);
  phase_per_round.push_back(phase);
  cumulative_regret.push_back((cumulative_regret.empty() ? 0.0 : cumulative_regret.back()) + gap);
}

double optimal_mean(const Scm& scm) { return scm.max_reward_mean(); }

namespace {

// True mean of an intervention: exact when possible, otherwise Monte Carlo.
double true_mean(const Scm& scm, const Intervention& iv, Rng& rng, double& half_width) {
  const auto est = interventional_mean_auto(scm, iv, rng);
  half_width = std::max(half_width, est.half_width);
  return est.value;
}

std::vector<Intervention> arms_on(const NodeSet& nodes, int K) {
  const auto count = nodes.size();
  std::size_t total = 1;
  for (std::size_t i = 0; i < count; ++i) total *= static_cast<std::size_t>(K);
  std::vector<Intervention> out;
  out.reserve(total);
  for (std::size_t code = 0; code < total; ++code) {
    std::vector<int> vals(count);
    std::size_t c = code;
    for (std::size_t i = count; i-- > 0;) {
      vals[i] = static_cast<int>(c % K);
      c /= K;
    }
    out.push_back(Intervention::on_set(nodes, std::move(vals)));
  }
  return out;
}

// Runs UCB1 over `arms` for `rounds` rounds, appending to `rec`.
void play_ucb(const Scm& scm, const std::vector<std::size_t>& arms, std::uint64_t rounds, Rng& rng, RegretRecord& rec,
              Phase phase) {
  Ucb1 policy(arms.size());
  std::vector<std::vector<int>> forced;
  forced.reserve(arms.size());
  for (std::size_t a : arms) forced.push_back(forced_values(scm.size(), rec.arms[a]));
  std::vector<int> scratch;
  for (std::uint64_t t = 1; t <= rounds; ++t) {
    const std::size_t a = policy.select(t);
    const double r = scm.sample_into(forced[a], rng, scratch);
    policy.update(a, r);
    rec.record_round(static_cast<std::uint32_t>(arms[a]), r, phase);
  }
}

}  // namespace

RegretRecord ucb_run(const Scm& scm, const ParentSpec& arm_node, std::uint64_t T, Rng& rng) {
  if (arm_node.empty()) throw ParameterError("ucb_run needs at least one arm node");
  const auto ivs = arms_on(arm_node.parents, scm.K());
  if (T < ivs.size()) throw ParameterError("horizon is smaller than the number of arms");
  RegretRecord rec;
  rec.T = T;
  rec.budgeted = false;
  rec.optimum = optimal_mean(scm);
  rec.discovered = arm_node;
  rec.parent_correct = arm_node == scm.reward_parents();
  Rng mean_rng = rng.split(0x6d65616e);
  std::vector<std::size_t> idx;
  for (const auto& iv : ivs) idx.push_back(rec.add_arm(iv, true_mean(scm, iv, mean_rng, rec.arm_means_half_width)));
  play_ucb(scm, idx, T, rng, rec, Phase::ucb);
  return rec;
}

RegretRecord flat_ucb_run(const Scm& scm, std::uint64_t T, Rng& rng) {
  const std::size_t n = scm.size();
  const int K = scm.K();
  if (T < n * static_cast<std::size_t>(K)) throw ParameterError("horizon is smaller than the number of arms");
  RegretRecord rec;
  rec.T = T;
  rec.budgeted = false;
  rec.optimum = optimal_mean(scm);
  Rng mean_rng = rng.split(0x6d65616e);
  std::vector<std::size_t> idx;
  for (Node v = 0; v < n; ++v)
    for (int x = 0; x < K; ++x) {
      const auto iv = Intervention::atomic(n, v, x);
      idx.push_back(rec.add_arm(iv, true_mean(scm, iv, mean_rng, rec.arm_means_half_width)));
    }
  play_ucb(scm, idx, T, rng, rec, Phase::flat);
  return rec;
}

double default_delta(int K, std::uint64_t T) {
  if (T < 2) return 1.0;
  const double t = static_cast<double>(T);
  return std::min(1.0, std::sqrt(static_cast<double>(K) * std::log(t) / t));
}

RegretRecord end_to_end(const Scm& scm, const DetectorConfig& cfg, std::uint64_t T, Rng& rng,
                        const EndToEndOptions& options) {
  const std::size_t n = scm.size();
  if (scm.reward_parents().count() > 1) throw ParameterError("end_to_end expects at most one parent");
  DetectorConfig dc = cfg;
  dc.K = scm.K();
  dc.delta = options.delta.value_or(default_delta(dc.K, T));
  if (dc.delta >= 1.0) dc.delta = 1.0 - 1e-12;
  dc.B = options.B.value_or(required_batch_size(n, dc.K, dc.delta, dc.Delta, dc.eps));

  RegretRecord rec;
  rec.T = T;
  rec.budgeted = options.budgeted;
  rec.optimum = optimal_mean(scm);
  Rng mean_rng = rng.split(0x6d65616e);
  Rng search_rng = rng.split(0x7365617263);
  Rng ucb_rng = rng.split(0x756362);

  // Discovery rounds; in budgeted mode only the first T are kept.
  std::optional<Intervention> last_iv;
  std::size_t last_arm = 0;
  std::uint64_t drawn = 0;
  auto sink = [&](const Intervention& iv, const Sample& s) {
    ++drawn;
    if (rec.budgeted && drawn > T) {
      rec.discovery_truncated = true;
      return;
    }
    if (!last_iv || !(*last_iv == iv)) {
      last_arm = rec.add_arm(iv, true_mean(scm, iv, mean_rng, rec.arm_means_half_width));
      last_iv = iv;
    }
    rec.record_round(static_cast<std::uint32_t>(last_arm), s.reward, Phase::discovery);
  };
  auto result = raps_statistical(scm, dc, search_rng, sink);
  rec.discovery_samples = result.ledger.total();
  rec.discovery_interventions = result.trace.intervention_count;
  rec.event_E_held = result.ledger.all_correct();
  rec.discovered = result.trace.result;
  rec.parent_correct = rec.discovered == scm.reward_parents();

  std::uint64_t remaining = T;
  if (rec.budgeted) remaining = rec.discovery_samples >= T ? 0 : T - rec.discovery_samples;
  if (remaining == 0) return rec;

  // Exploitation arms: do(Phat = v), or the empty arm when nothing was found.
  std::vector<Intervention> ivs;
  if (rec.discovered.empty())
    ivs.push_back(Intervention::observational(n));
  else
    ivs = arms_on(rec.discovered.parents, scm.K());
  std::vector<std::size_t> idx;
  for (const auto& iv : ivs) idx.push_back(rec.add_arm(iv, true_mean(scm, iv, mean_rng, rec.arm_means_half_width)));
  play_ucb(scm, idx, remaining, ucb_rng, rec, Phase::ucb);
  return rec;
}

Intervention simple_regret_recommend(RegretRecord& record, Rng& rng) {
  std::vector<std::uint64_t> counts(record.arms.size(), 0);
  std::uint64_t total = 0;
  for (std::size_t t = 0; t < record.arm_per_round.size(); ++t) {
    if (record.phase_per_round[t] == Phase::discovery) continue;
    ++counts[record.arm_per_round[t]];
    ++total;
  }
  if (total == 0) throw StateError("no post-discovery round to recommend from");
  std::uint64_t u = rng.uniform_below(total);
  std::size_t arm = 0;
  for (; arm < counts.size(); ++arm) {
    if (u < counts[arm]) break;
    u -= counts[arm];
  }
  record.simple_regret = std::max(0.0, record.optimum - record.arm_means[arm]);
  record.simple_regret_set = true;
  return record.arms[arm];
}

double expected_simple_regret(const RegretRecord& record) {
  double sum = 0.0;
  std::uint64_t total = 0;
  for (std::size_t t = 0; t < record.arm_per_round.size(); ++t) {
    if (record.phase_per_round[t] == Phase::discovery) continue;
    sum += std::max(0.0, record.optimum - record.arm_means[record.arm_per_round[t]]);
    ++total;
  }
  if (total == 0) throw StateError("no post-discovery round");
  return sum / static_cast<double>(total);
}

}  // namespace causalbandit
