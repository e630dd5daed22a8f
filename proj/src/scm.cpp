#include "causalbandit/scm.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

#include "causalbandit/errors.hpp"
#include "json.hpp"

namespace causalbandit {

namespace {

std::size_t int_pow(std::size_t base, std::size_t exp) {
  std::size_t r = 1;
  for (std::size_t i = 0; i < exp; ++i) {
    if (r > std::numeric_limits<std::size_t>::max() / std::max<std::size_t>(base, 1))
      throw CapabilityError("table size overflows");
    r *= base;
  }
  return r;
}

int draw_categorical(const double* row, int K, Rng& rng) {
  double u = rng.uniform01();
  for (int k = 0; k + 1 < K; ++k) {
    if (u < row[k]) return k;
    u -= row[k];
  }
  return K - 1;
}

}  // namespace

std::string Intervention::to_string() const {
  std::ostringstream os;
  os << "do(";
  std::size_t i = 0;
  targets.for_each([&](Node v) {
    if (i) os << ',';
    os << v << '=' << values.at(i);
    ++i;
  });
  os << ')';
  return os.str();
}

Scm::Scm(Dag dag, ParentSpec reward_parents, int K, std::vector<std::vector<double>> cpts,
         std::vector<double> reward_table, RewardNoise noise)
    : dag_(std::move(dag)),
      reward_parents_(std::move(reward_parents)),
      K_(K),
      cpts_(std::move(cpts)),
      reward_table_(std::move(reward_table)),
      noise_(noise) {
  const std::size_t n = dag_.size();
  if (K_ < 1) throw ParameterError("K must be at least 1");
  if (reward_parents_.parents.width() != n) throw ParameterError("reward parent set has the wrong width");
  if (cpts_.size() != n) throw ParameterError("one conditional table per node is required");
  for (Node v = 0; v < n; ++v) {
    const std::size_t rows = int_pow(static_cast<std::size_t>(K_), dag_.parents(v).size());
    if (cpts_[v].size() != rows * static_cast<std::size_t>(K_))
      throw ParameterError("conditional table of node " + std::to_string(v) + " has the wrong size");
    for (std::size_t r = 0; r < rows; ++r) {
      double sum = 0.0;
      for (int k = 0; k < K_; ++k) {
        const double q = cpts_[v][r * K_ + k];
        if (!(q >= 0.0)) throw ParameterError("negative probability in node " + std::to_string(v));
        sum += q;
      }
      if (std::abs(sum - 1.0) > 1e-9) throw ParameterError("table row of node " + std::to_string(v) + " does not sum to 1");
    }
  }
  reward_parent_list_ = reward_parents_.parents.members();
  if (reward_table_.size() != int_pow(static_cast<std::size_t>(K_), reward_parent_list_.size()))
    throw ParameterError("reward table has the wrong size");
  for (double m : reward_table_)
    if (!(m >= 0.0 && m <= 1.0)) throw ParameterError("reward means must lie in [0, 1]");
  if (!(noise_.sd >= 0.0) || !(noise_.truncation > 0.0)) throw ParameterError("invalid reward noise");
}

std::size_t Scm::row_index(Node v, std::span<const int> assignment) const {
  std::size_t r = 0;
  for (Node u : dag_.parents(v)) r = r * K_ + static_cast<std::size_t>(assignment[u]);
  return r;
}

std::size_t Scm::reward_index(std::span<const int> assignment) const {
  std::size_t r = 0;
  for (Node u : reward_parent_list_) r = r * K_ + static_cast<std::size_t>(assignment[u]);
  return r;
}

std::vector<int> Scm::decode_reward_index(std::size_t index) const {
  std::vector<int> vals(reward_parent_list_.size());
  for (std::size_t i = vals.size(); i-- > 0;) {
    vals[i] = static_cast<int>(index % K_);
    index /= K_;
  }
  return vals;
}

std::vector<int> forced_values(std::size_t n, const Intervention& iv) {
  if (iv.targets.width() != n) throw ParameterError("intervention has the wrong width");
  if (iv.values.size() != iv.targets.size()) throw ParameterError("one value per intervention target is required");
  std::vector<int> forced(n, -1);
  std::size_t i = 0;
  iv.targets.for_each([&](Node v) { forced[v] = iv.values[i++]; });
  return forced;
}

double Scm::sample_into(std::span<const int> forced, Rng& rng, std::vector<int>& assignment) const {
  const std::size_t n = dag_.size();
  assignment.resize(n);
  for (Node v : dag_.topo_order()) {
    if (forced[v] >= 0) {
      assignment[v] = forced[v];
      continue;
    }
    const std::size_t r = row_index(v, assignment);
    assignment[v] = draw_categorical(cpts_[v].data() + r * K_, K_, rng);
  }
  double reward = reward_table_[reward_index(assignment)];
  if (noise_.sd > 0.0) {
    std::normal_distribution<double> gauss(0.0, noise_.sd);
    double z = gauss(rng);
    while (std::abs(z) > noise_.truncation) z = gauss(rng);
    reward += z;
  }
  return reward;
}

Sample Scm::sample(const Intervention& iv, Rng& rng) const {
  const auto forced = forced_values(dag_.size(), iv);
  for (int x : forced)
    if (x >= K_) throw ParameterError("intervention value out of range");
  Sample s;
  s.reward = sample_into(forced, rng, s.assignment);
  return s;
}

double Scm::max_reward_mean() const { return *std::max_element(reward_table_.begin(), reward_table_.end()); }

namespace {

struct JointSummary {
  std::vector<std::vector<double>> marginals;
  double mean = 0.0;
};

// Depth-first enumeration of every joint state reachable under `forced`.
JointSummary enumerate_joint(const Scm& scm, std::span<const int> forced) {
  const Dag& dag = scm.dag();
  const std::size_t n = dag.size();
  const int K = scm.K();
  JointSummary out;
  out.marginals.assign(n, std::vector<double>(K, 0.0));
  std::vector<int> assignment(n, 0);
  const auto& topo = dag.topo_order();

  auto rec = [&](auto&& self, std::size_t depth, double prob) -> void {
    if (depth == n) {
      out.mean += prob * scm.reward_table()[scm.reward_index(assignment)];
      return;
    }
    const Node v = topo[depth];
    if (forced[v] >= 0) {
      assignment[v] = forced[v];
      out.marginals[v][forced[v]] += prob;
      self(self, depth + 1, prob);
      return;
    }
    const double* row = scm.cpt(v).data() + scm.row_index(v, assignment) * K;
    for (int k = 0; k < K; ++k) {
      if (row[k] == 0.0) continue;
      assignment[v] = k;
      const double q = prob * row[k];
      out.marginals[v][k] += q;
      self(self, depth + 1, q);
    }
  };
  rec(rec, 0, 1.0);
  return out;
}

void check_values(const Scm& scm, std::span<const int> forced) {
  for (int x : forced)
    if (x >= scm.K()) throw ParameterError("intervention value out of range");
}

}  // namespace

double interventional_mean(const Scm& scm, const Intervention& iv) {
  const Dag& dag = scm.dag();
  const std::size_t n = dag.size();
  if (n > kExactInferenceMaxNodes) throw CapabilityError("exact inference supports at most 20 nodes");
  const auto forced = forced_values(n, iv);
  check_values(scm, forced);

  // Ancestral closure of the reward parents in the mutilated graph.
  NodeSet relevant(n);
  std::vector<Node> stack = scm.reward_parents().parents.members();
  for (Node v : stack) relevant.insert(v);
  while (!stack.empty()) {
    const Node v = stack.back();
    stack.pop_back();
    if (forced[v] >= 0) continue;
    for (Node u : dag.parents(v)) {
      if (!relevant.test(u)) {
        relevant.insert(u);
        stack.push_back(u);
      }
    }
  }
  std::vector<Node> order = relevant.members();
  std::sort(order.begin(), order.end(), [&](Node a, Node b) { return dag.topo_rank()[a] < dag.topo_rank()[b]; });

  const int K = scm.K();
  std::vector<int> assignment(n, 0);
  double mean = 0.0;
  auto rec = [&](auto&& self, std::size_t depth, double prob) -> void {
    if (depth == order.size()) {
      mean += prob * scm.reward_table()[scm.reward_index(assignment)];
      return;
    }
    const Node v = order[depth];
    if (forced[v] >= 0) {
      assignment[v] = forced[v];
      self(self, depth + 1, prob);
      return;
    }
    const double* row = scm.cpt(v).data() + scm.row_index(v, assignment) * K;
    for (int k = 0; k < K; ++k) {
      if (row[k] == 0.0) continue;
      assignment[v] = k;
      self(self, depth + 1, prob * row[k]);
    }
  };
  rec(rec, 0, 1.0);
  return mean;
}

MeanEstimate interventional_mean_mc(const Scm& scm, const Intervention& iv, std::size_t samples, Rng& rng) {
  if (samples == 0) throw ParameterError("Monte Carlo needs at least one sample");
  const auto forced = forced_values(scm.size(), iv);
  check_values(scm, forced);
  std::vector<int> assignment;
  double sum = 0.0, sum_sq = 0.0;
  for (std::size_t i = 0; i < samples; ++i) {
    scm.sample_into(forced, rng, assignment);
    const double m = scm.reward_table()[scm.reward_index(assignment)];
    sum += m;
    sum_sq += m * m;
  }
  const double ns = static_cast<double>(samples);
  const double mean = sum / ns;
  const double var = std::max(0.0, sum_sq / ns - mean * mean);
  return {mean, 3.0 * std::sqrt(var / ns), MeanMode::monte_carlo};
}

MeanEstimate interventional_mean_auto(const Scm& scm, const Intervention& iv, Rng& rng, std::size_t mc_samples) {
  if (scm.size() <= kExactInferenceMaxNodes) {
    try {
      return {interventional_mean(scm, iv), 0.0, MeanMode::exact};
    } catch (const CapabilityError&) {
    }
  }
  return interventional_mean_mc(scm, iv, mc_samples, rng);
}

std::vector<std::vector<double>> interventional_marginals(const Scm& scm, const Intervention& iv) {
  const std::size_t n = scm.size();
  const double states = std::pow(static_cast<double>(scm.K()), static_cast<double>(n));
  if (states > static_cast<double>(1u << 22)) throw CapabilityError("joint state space exceeds 2^22");
  const auto forced = forced_values(n, iv);
  check_values(scm, forced);
  return enumerate_joint(scm, forced).marginals;
}

std::string IdentifiabilityReport::failing_assumption(double eps_target, double delta_target) const {
  if (!(eps_margin > eps_target)) return "ancestral-effect identifiability";
  if (!(delta_margin > delta_target)) return "reward identifiability";
  if (!(edge_gap > eps_target)) return "edge gap";
  return "";
}

namespace {

double edge_gap_of(const Scm& scm) {
  const Dag& dag = scm.dag();
  const int K = scm.K();
  double best_min = std::numeric_limits<double>::infinity();
  for (const auto& [x, y] : dag.edges()) {
    const auto pa = dag.parents(y);
    const std::size_t pos = static_cast<std::size_t>(std::find(pa.begin(), pa.end(), x) - pa.begin());
    std::size_t stride = 1;
    for (std::size_t j = pa.size(); j-- > pos + 1;) stride *= K;
    const std::size_t rows = int_pow(static_cast<std::size_t>(K), pa.size());
    const auto& cpt = scm.cpt(y);
    double gap = 0.0;
    for (std::size_t r = 0; r < rows; ++r) {
      if ((r / stride) % K != 0) continue;
      for (int a = 0; a < K; ++a)
        for (int b = a + 1; b < K; ++b) {
          const std::size_t ra = r + a * stride, rb = r + b * stride;
          for (int k = 0; k < K; ++k) gap = std::max(gap, std::abs(cpt[ra * K + k] - cpt[rb * K + k]));
        }
    }
    best_min = std::min(best_min, gap);
  }
  return best_min;
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

IdentifiabilityReport verify_identifiability(const Scm& scm, Rng& rng, std::size_t mc_samples) {
  const Dag& dag = scm.dag();
  const std::size_t n = dag.size();
  const int K = scm.K();
  IdentifiabilityReport rep;
  rep.edge_gap = edge_gap_of(scm);

  const double states = std::pow(static_cast<double>(K), static_cast<double>(n));
  rep.exact = states <= static_cast<double>(1u << 20);

  // marg[X][x] and mean[X][x] under do(X = x); index n is the observational arm.
  std::vector<std::vector<std::vector<std::vector<double>>>> marg(n + 1);
  std::vector<std::vector<double>> mean(n + 1);
  std::vector<int> forced(n, -1);

  auto estimate = [&](std::size_t slot) {
    if (rep.exact) {
      auto js = enumerate_joint(scm, forced);
      marg[slot].push_back(std::move(js.marginals));
      mean[slot].push_back(js.mean);
      return;
    }
    std::vector<std::vector<double>> freq(n, std::vector<double>(K, 0.0));
    std::vector<int> assignment;
    double sum = 0.0;
    for (std::size_t i = 0; i < mc_samples; ++i) {
      scm.sample_into(forced, rng, assignment);
      for (Node v = 0; v < n; ++v) freq[v][assignment[v]] += 1.0;
      sum += scm.reward_table()[scm.reward_index(assignment)];
    }
    for (auto& f : freq)
      for (auto& q : f) q /= static_cast<double>(mc_samples);
    marg[slot].push_back(std::move(freq));
    mean[slot].push_back(sum / static_cast<double>(mc_samples));
  };

  estimate(n);
  for (Node x = 0; x < n; ++x) {
    for (int v = 0; v < K; ++v) {
      forced[x] = v;
      estimate(x);
    }
    forced[x] = -1;
  }

  if (!rep.exact) {
    // Hoeffding width for a difference of two estimates, union bounded over
    // every estimated probability and mean.
    const double count = static_cast<double>(n * K + 1) * static_cast<double>(n * K + 1);
    const double alpha = 0.01;
    rep.mc_samples = mc_samples;
    rep.mc_confidence = 1.0 - alpha;
    rep.mc_half_width = 2.0 * std::sqrt(std::log(2.0 * count / alpha) / (2.0 * static_cast<double>(mc_samples)));
  }

  const auto& obs = marg[n][0];
  rep.eps_margin = std::numeric_limits<double>::infinity();
  for (Node x = 0; x < n; ++x) {
    dag.descendants(x).for_each([&](Node y) {
      if (y == x) return;
      double best = 0.0;
      for (int v = 0; v < K; ++v) best = std::max(best, max_abs_diff(marg[x][v][y], obs[y]));
      rep.eps_margin = std::min(rep.eps_margin, best - rep.mc_half_width);
    });
  }
  rep.delta_margin = std::numeric_limits<double>::infinity();
  parent_ancestors(dag, scm.reward_parents()).for_each([&](Node x) {
    double best = 0.0;
    for (int v = 0; v < K; ++v) best = std::max(best, std::abs(mean[x][v] - mean[n][0]));
    rep.delta_margin = std::min(rep.delta_margin, best - rep.mc_half_width);
  });
  return rep;
}

namespace {

std::vector<double> dirichlet(int K, double alpha, Rng& rng) {
  std::gamma_distribution<double> gamma(alpha, 1.0);
  std::vector<double> out(K);
  double sum = 0.0;
  for (auto& v : out) {
    v = gamma(rng);
    sum += v;
  }
  if (sum <= 0.0) {
    std::fill(out.begin(), out.end(), 1.0 / K);
    return out;
  }
  for (auto& v : out) v /= sum;
  return out;
}

void normalize(std::vector<double>& row) {
  double sum = 0.0;
  for (double v : row) sum += v;
  for (auto& v : row) v /= sum;
}

}  // namespace

BuiltScm build_scm(const Dag& dag, const ParentSpec& parents, int K, double eps_target, double delta_target,
                   std::uint64_t seed, const ScmBuildOptions& options) {
  const std::size_t n = dag.size();
  if (K < 2) throw ParameterError("build_scm needs K >= 2");
  if (n < 1) throw ParameterError("build_scm needs a non-empty graph");
  if (!(eps_target > 0.0 && eps_target < 1.0) || !(delta_target > 0.0 && delta_target < 1.0))
    throw ParameterError("targets must lie in (0, 1)");
  if (options.max_attempts < 1) throw ParameterError("max_attempts must be positive");
  if (!(options.reward_low >= 0.0 && options.reward_low < options.reward_high && options.reward_high <= 1.0))
    throw ParameterError("reward range must satisfy 0 <= low < high <= 1");
  if (options.root_distribution) {
    auto rd = *options.root_distribution;
    if (rd.size() != static_cast<std::size_t>(K)) throw ParameterError("root distribution needs K entries");
    for (double q : rd)
      if (!(q >= 0.0)) throw ParameterError("root distribution has a negative entry");
  }
  const auto parent_list = parents.parents.members();
  const std::size_t m = parent_list.size();
  const std::size_t reward_rows = int_pow(static_cast<std::size_t>(K), m);

  IdentifiabilityReport last;
  for (int attempt = 0; attempt < options.max_attempts; ++attempt) {
    const double t = options.max_attempts == 1 ? 0.0 : static_cast<double>(attempt) / (options.max_attempts - 1);
    const double sharp = 1.0 - 0.3 * std::pow(0.001 / 0.3, t);
    Rng rng = Rng::derive(seed, {static_cast<std::uint64_t>(attempt)});

    std::vector<std::vector<double>> cpts(n);
    for (Node v = 0; v < n; ++v) {
      const auto pa = dag.parents(v);
      if (pa.empty()) {
        cpts[v] = options.root_distribution ? *options.root_distribution : dirichlet(K, options.dirichlet_alpha, rng);
        normalize(cpts[v]);
        continue;
      }
      const std::size_t rows = int_pow(static_cast<std::size_t>(K), pa.size());
      cpts[v].reserve(rows * K);
      for (std::size_t r = 0; r < rows; ++r) {
        // Largest parent value encoded in the row index.
        std::size_t code = r;
        int top = 0;
        for (std::size_t j = 0; j < pa.size(); ++j) {
          top = std::max(top, static_cast<int>(code % K));
          code /= K;
        }
        auto row = dirichlet(K, options.dirichlet_alpha, rng);
        for (int k = 0; k < K; ++k) row[k] = (1.0 - sharp) * row[k] + (k == top ? sharp : 0.0);
        normalize(row);
        cpts[v].insert(cpts[v].end(), row.begin(), row.end());
      }
    }

    std::vector<double> table(reward_rows);
    const double span = options.reward_high - options.reward_low;
    for (std::size_t r = 0; r < reward_rows; ++r) {
      double level = 0.0;
      if (m == 0) {
        level = rng.uniform01();
      } else {
        std::size_t code = r, total = 0;
        for (std::size_t j = 0; j < m; ++j) {
          total += code % K;
          code /= K;
        }
        level = static_cast<double>(total) / static_cast<double>(m * (K - 1));
      }
      const double jitter = (rng.uniform01() - 0.5) * 0.02;
      table[r] = std::clamp(options.reward_low + span * (level + jitter), 0.0, 1.0);
    }

    Scm scm(dag, parents, K, std::move(cpts), std::move(table));
    Rng check = rng.split(1);
    last = verify_identifiability(scm, check, options.mc_samples);
    if (last.satisfies(eps_target, delta_target)) return BuiltScm{std::move(scm), last, attempt + 1, sharp};
  }
  const std::string which = last.failing_assumption(eps_target, delta_target);
  throw ConstructionError(which, "no SCM satisfying " + which + " found in " + std::to_string(options.max_attempts) +
                                     " attempts");
}

std::string scm_to_json(const Scm& scm) {
  using nlohmann::json;
  const Dag& dag = scm.dag();
  const int K = scm.K();
  json doc;
  doc["n"] = dag.size();
  doc["K"] = K;
  json edges = json::array();
  for (const auto& [u, v] : dag.edges()) edges.push_back({u, v});
  doc["edges"] = std::move(edges);
  doc["parents"] = scm.reward_parents().parents.members();
  json cpts = json::array();
  for (Node v = 0; v < dag.size(); ++v) {
    json rows = json::array();
    const auto& t = scm.cpt(v);
    for (std::size_t r = 0; r < t.size() / K; ++r) rows.push_back(std::vector<double>(t.begin() + r * K, t.begin() + (r + 1) * K));
    cpts.push_back(std::move(rows));
  }
  doc["cpts"] = std::move(cpts);
  doc["reward_table"] = scm.reward_table();
  doc["noise"] = {{"sd", scm.noise().sd}, {"truncation", scm.noise().truncation}};
  return doc.dump(2);
}

Scm scm_from_json(const std::string& text) {
  using nlohmann::json;
  json doc;
  try {
    doc = json::parse(text);
    const std::size_t n = doc.at("n").get<std::size_t>();
    const int K = doc.at("K").get<int>();
    std::vector<Edge> edges;
    for (const auto& e : doc.at("edges")) edges.emplace_back(e.at(0).get<Node>(), e.at(1).get<Node>());
    Dag dag(n, std::move(edges));
    ParentSpec ps = ParentSpec::none(n);
    for (const auto& p : doc.at("parents")) {
      const auto v = p.get<std::size_t>();
      if (v >= n) throw ParameterError("reward parent out of range");
      ps.parents.insert(static_cast<Node>(v));
    }
    std::vector<std::vector<double>> cpts;
    for (const auto& rows : doc.at("cpts")) {
      std::vector<double> flat;
      for (const auto& row : rows) {
        if (row.size() != static_cast<std::size_t>(K)) throw ParameterError("table row must have K entries");
        for (const auto& q : row) flat.push_back(q.get<double>());
      }
      cpts.push_back(std::move(flat));
    }
    auto table = doc.at("reward_table").get<std::vector<double>>();
    RewardNoise noise;
    if (doc.contains("noise")) {
      noise.sd = doc["noise"].value("sd", noise.sd);
      noise.truncation = doc["noise"].value("truncation", noise.truncation);
    }
    return Scm(std::move(dag), std::move(ps), K, std::move(cpts), std::move(table), noise);
  } catch (const json::exception& e) {
    throw ParameterError(std::string("malformed SCM document: ") + e.what());
  }
}

Scm read_scm_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open SCM file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return scm_from_json(ss.str());
}

}  // namespace causalbandit
