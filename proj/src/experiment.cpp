#include "causalbandit/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include "causalbandit/bandit.hpp"
#include "causalbandit/errors.hpp"
#include "causalbandit/raps.hpp"
#include "causalbandit/scm.hpp"
#include "causalbandit/theory.hpp"
#include "json.hpp"

namespace causalbandit {

ExperimentKind parse_experiment(std::string_view name) {
  if (name == "exact_vs_empirical") return ExperimentKind::exact_vs_empirical;
  if (name == "er_fast") return ExperimentKind::er_fast;
  if (name == "er_slow") return ExperimentKind::er_slow;
  if (name == "multiparent") return ExperimentKind::multiparent;
  if (name == "regret_head2head") return ExperimentKind::regret_head2head;
  throw ParameterError("unknown experiment '" + std::string(name) + "'");
}

std::string_view experiment_name(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::exact_vs_empirical: return "exact_vs_empirical";
    case ExperimentKind::er_fast: return "er_fast";
    case ExperimentKind::er_slow: return "er_slow";
    case ExperimentKind::multiparent: return "multiparent";
    case ExperimentKind::regret_head2head: return "regret_head2head";
  }
  return "?";
}

double PRule::evaluate(std::size_t n) const {
  const double nn = static_cast<double>(n);
  switch (kind) {
    case Kind::explicit_value: return value;
    case Kind::corollary_threshold: return er_fast_threshold(nn, k, c, ThresholdVariant::corollary, base);
    case Kind::ln_n_over_n: return std::min(1.0, std::log(nn) / nn);
    case Kind::multiparent_threshold: return er_multiparent_threshold(nn, k, c, c1, base);
  }
  return value;
}

void ExperimentConfig::validate() const {
  if (runs_per_point < 1) throw ParameterError("runs_per_point must be at least 1");
  if (n_list.empty()) throw ParameterError("n_list must not be empty");
  if (!std::is_sorted(n_list.begin(), n_list.end()) ||
      std::adjacent_find(n_list.begin(), n_list.end()) != n_list.end())
    throw ParameterError("n_list must be strictly ascending");
  if (n_list.front() < 1) throw ParameterError("n_list entries must be positive");
  if (workers < 1) throw ParameterError("workers must be at least 1");
  for (double p : p_list)
    if (!(p >= 0.0 && p <= 1.0)) throw ParameterError("p_list entries must lie in [0, 1]");
  if (p_rule.kind == PRule::Kind::explicit_value && !(p_rule.value >= 0.0 && p_rule.value <= 1.0))
    throw ParameterError("explicit p must lie in [0, 1]");
  if (experiment == ExperimentKind::multiparent) {
    if (m_list.empty()) throw ParameterError("m_list must not be empty");
    for (auto m : m_list)
      if (m < 1) throw ParameterError("m_list entries must be positive");
  }
  if (experiment == ExperimentKind::regret_head2head) {
    if (K < 2) throw ParameterError("K must be at least 2");
    if (T < 1) throw ParameterError("T must be positive");
  }
}

std::vector<double> log_spaced(double lo, double hi, std::size_t count) {
  if (!(lo > 0.0 && hi >= lo)) throw ParameterError("log_spaced needs 0 < lo <= hi");
  std::vector<double> out;
  if (count == 0) return out;
  if (count == 1) return {lo};
  const double a = std::log(lo), b = std::log(hi);
  for (std::size_t i = 0; i < count; ++i) out.push_back(std::exp(a + (b - a) * static_cast<double>(i) / (count - 1)));
  out.back() = hi;
  return out;
}

namespace {

using nlohmann::json;

PRule::Kind parse_p_kind(const std::string& s) {
  if (s == "explicit") return PRule::Kind::explicit_value;
  if (s == "corollary_threshold") return PRule::Kind::corollary_threshold;
  if (s == "ln_n_over_n") return PRule::Kind::ln_n_over_n;
  if (s == "multiparent_threshold") return PRule::Kind::multiparent_threshold;
  throw ParameterError("unknown p_rule kind '" + s + "'");
}

std::string p_kind_name(PRule::Kind k) {
  switch (k) {
    case PRule::Kind::explicit_value: return "explicit";
    case PRule::Kind::corollary_threshold: return "corollary_threshold";
    case PRule::Kind::ln_n_over_n: return "ln_n_over_n";
    case PRule::Kind::multiparent_threshold: return "multiparent_threshold";
  }
  return "explicit";
}

}  // namespace

ExperimentConfig config_from_json(const std::string& text) {
  ExperimentConfig cfg;
  try {
    const json doc = json::parse(text);
    for (const auto& [key, _] : doc.items()) {
      static const char* known[] = {"experiment", "n_list", "p_rule", "p_list", "m_list", "runs_per_point",
                                    "master_seed", "output_path", "placement", "workers", "record_wall_time",
                                    "K", "T", "eps_target", "delta_target", "reward_low", "reward_high",
                                    "root_distribution"};
      if (std::find_if(std::begin(known), std::end(known), [&](const char* k) { return key == k; }) == std::end(known))
        throw ParameterError("unknown config key '" + key + "'");
    }
    cfg.experiment = parse_experiment(doc.at("experiment").get<std::string>());
    cfg.n_list = doc.at("n_list").get<std::vector<std::size_t>>();
    if (doc.contains("p_rule")) {
      const auto& pr = doc["p_rule"];
      if (pr.is_number()) {
        cfg.p_rule.kind = PRule::Kind::explicit_value;
        cfg.p_rule.value = pr.get<double>();
      } else {
        cfg.p_rule.kind = parse_p_kind(pr.at("kind").get<std::string>());
        cfg.p_rule.value = pr.value("value", cfg.p_rule.value);
        cfg.p_rule.c = pr.value("c", cfg.p_rule.c);
        cfg.p_rule.c = pr.value("c0", cfg.p_rule.c);
        cfg.p_rule.c1 = pr.value("c1", cfg.p_rule.c1);
        cfg.p_rule.k = pr.value("k", cfg.p_rule.k);
        cfg.p_rule.base = pr.value("base", cfg.p_rule.base);
      }
    } else if (cfg.experiment == ExperimentKind::er_fast) {
      cfg.p_rule.kind = PRule::Kind::corollary_threshold;
    } else if (cfg.experiment == ExperimentKind::er_slow) {
      cfg.p_rule.kind = PRule::Kind::ln_n_over_n;
    } else if (cfg.experiment == ExperimentKind::multiparent) {
      cfg.p_rule.kind = PRule::Kind::multiparent_threshold;
    }
    if (doc.contains("p_list")) cfg.p_list = doc["p_list"].get<std::vector<double>>();
    if (doc.contains("m_list")) cfg.m_list = doc["m_list"].get<std::vector<std::size_t>>();
    cfg.runs_per_point = doc.value("runs_per_point", cfg.runs_per_point);
    cfg.master_seed = doc.value("master_seed", cfg.master_seed);
    cfg.output_path = doc.value("output_path", cfg.output_path);
    if (doc.contains("placement")) cfg.placement = parse_placement(doc["placement"].get<std::string>());
    cfg.workers = doc.value("workers", cfg.workers);
    cfg.record_wall_time = doc.value("record_wall_time", cfg.record_wall_time);
    cfg.K = doc.value("K", cfg.K);
    cfg.T = doc.value("T", cfg.T);
    cfg.eps_target = doc.value("eps_target", cfg.eps_target);
    cfg.delta_target = doc.value("delta_target", cfg.delta_target);
    cfg.reward_low = doc.value("reward_low", cfg.reward_low);
    cfg.reward_high = doc.value("reward_high", cfg.reward_high);
    if (doc.contains("root_distribution")) cfg.root_distribution = doc["root_distribution"].get<std::vector<double>>();
  } catch (const json::exception& e) {
    throw ParameterError(std::string("malformed config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return config_from_json(ss.str());
}

std::string config_to_json(const ExperimentConfig& c) {
  json doc;
  doc["experiment"] = std::string(experiment_name(c.experiment));
  doc["n_list"] = c.n_list;
  doc["p_rule"] = {{"kind", p_kind_name(c.p_rule.kind)}, {"value", c.p_rule.value}, {"c", c.p_rule.c},
                   {"c1", c.p_rule.c1}, {"k", c.p_rule.k}, {"base", c.p_rule.base}};
  if (!c.p_list.empty()) doc["p_list"] = c.p_list;
  doc["m_list"] = c.m_list;
  doc["runs_per_point"] = c.runs_per_point;
  doc["master_seed"] = c.master_seed;
  if (!c.output_path.empty()) doc["output_path"] = c.output_path;
  doc["placement"] = std::string(placement_name(c.placement));
  doc["workers"] = c.workers;
  doc["record_wall_time"] = c.record_wall_time;
  if (c.experiment == ExperimentKind::regret_head2head) {
    doc["K"] = c.K;
    doc["T"] = c.T;
    doc["eps_target"] = c.eps_target;
    doc["delta_target"] = c.delta_target;
    doc["reward_low"] = c.reward_low;
    doc["reward_high"] = c.reward_high;
    if (!c.root_distribution.empty()) doc["root_distribution"] = c.root_distribution;
  }
  return doc.dump(2);
}

namespace {

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

}  // namespace

void write_csv_header(std::ostream& out) { out << kRunRecordHeader << '\n'; }

void write_csv_row(std::ostream& out, const RunRecord& r) {
  out << r.experiment << ',' << r.family << ',' << r.n << ',' << fmt("%.10g", r.p) << ',' << r.m << ',' << r.seed << ','
      << r.interventions << ',' << fmt("%.10g", r.expected) << ',' << (r.parent_correct ? "true" : "false") << ','
      << fmt("%.3f", r.wall_time_ms) << '\n';
}

std::vector<RunRecord> read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ParameterError("empty CSV");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kRunRecordHeader) throw ParameterError("unexpected CSV header: " + line);
  std::vector<RunRecord> out;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (f.size() != 10) throw ParameterError("CSV line " + std::to_string(lineno) + " has " + std::to_string(f.size()) + " fields");
    try {
      RunRecord r;
      r.experiment = f[0];
      r.family = f[1];
      r.n = std::stoull(f[2]);
      r.p = std::stod(f[3]);
      r.m = std::stoull(f[4]);
      r.seed = std::stoull(f[5]);
      r.interventions = std::stoull(f[6]);
      r.expected = std::stod(f[7]);
      if (f[8] != "true" && f[8] != "false") throw std::invalid_argument("parent_correct");
      r.parent_correct = f[8] == "true";
      r.wall_time_ms = std::stod(f[9]);
      out.push_back(std::move(r));
    } catch (const std::logic_error&) {
      throw ParameterError("CSV line " + std::to_string(lineno) + " is malformed");
    }
  }
  return out;
}

void write_regret_header(std::ostream& out) { out << kRegretSummaryHeader << '\n'; }

void write_regret_row(std::ostream& out, const RegretSummary& r) {
  out << r.seed << ',' << r.method << ',' << fmt("%.6f", r.final_regret) << ',' << fmt("%.6f", r.regret_at_tenth) << ','
      << (r.event_E_held ? "true" : "false") << ',' << (r.parent_correct ? "true" : "false") << '\n';
}

namespace {

std::uint64_t run_seed(std::uint64_t master, std::size_t point, std::size_t run) {
  return Rng::derive(master, {point, run})();
}

struct Point {
  std::size_t n = 0;
  double p = 0.0;
  std::size_t m = 1;
};

std::vector<Point> sweep_points(const ExperimentConfig& c) {
  std::vector<Point> pts;
  switch (c.experiment) {
    case ExperimentKind::exact_vs_empirical: {
      const auto grid = c.p_list.empty() ? log_spaced(1e-3, 0.5, 20) : c.p_list;
      for (auto n : c.n_list)
        for (double p : grid) pts.push_back({n, p, 1});
      break;
    }
    case ExperimentKind::er_fast:
    case ExperimentKind::er_slow:
      for (auto n : c.n_list) pts.push_back({n, c.p_rule.evaluate(n), 1});
      break;
    case ExperimentKind::multiparent:
      for (auto m : c.m_list)
        for (auto n : c.n_list) pts.push_back({n, c.p_rule.evaluate(n), m});
      break;
    case ExperimentKind::regret_head2head:
      for (auto n : c.n_list) pts.push_back({n, 0.0, 1});
      break;
  }
  return pts;
}

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

// All runs of one sweep point.
std::vector<RunRecord> run_point(const ExperimentConfig& c, const Point& pt, std::size_t point_index) {
  std::vector<RunRecord> rows;
  const std::string exp(experiment_name(c.experiment));
  auto base = [&](std::size_t run) {
    RunRecord r;
    r.experiment = exp;
    r.family = c.experiment == ExperimentKind::multiparent ? "multiparent_chain" : "erdos_renyi";
    r.n = pt.n;
    r.p = pt.p;
    r.m = c.experiment == ExperimentKind::multiparent ? pt.m : (c.placement == ParentPlacement::none ? 0 : 1);
    r.seed = run_seed(c.master_seed, point_index, run);
    r.point_index = point_index;
    r.run_index = run;
    return r;
  };

  if (c.experiment == ExperimentKind::exact_vs_empirical) {
    // One graph per point, shared by its runs.
    Dag dag;
    ParentSpec parent;
    double expected = 0.0;
    std::string error;
    try {
      Rng g(Rng::derive(c.master_seed, {point_index})());
      dag = gen_erdos_renyi(pt.n, pt.p, g);
      parent = place_parent(dag, c.placement, g);
      expected = to_double(expected_interventions(dag, parent));
    } catch (const std::exception& e) {
      error = e.what();
    }
    for (std::size_t run = 0; run < c.runs_per_point; ++run) {
      RunRecord r = base(run);
      r.expected = expected;
      r.error = error;
      if (error.empty()) {
        const auto t0 = Clock::now();
        Rng rng(r.seed);
        const auto trace = raps_oracle(dag, parent, rng);
        r.interventions = trace.intervention_count;
        r.parent_correct = trace.result == parent;
        if (c.record_wall_time) r.wall_time_ms = elapsed_ms(t0);
      } else {
        r.parent_correct = false;
      }
      rows.push_back(std::move(r));
    }
    return rows;
  }

  for (std::size_t run = 0; run < c.runs_per_point; ++run) {
    RunRecord r = base(run);
    const auto t0 = Clock::now();
    try {
      Rng rng(r.seed);
      Rng graph_rng = rng.split(1);
      Rng search_rng = rng.split(2);
      if (c.experiment == ExperimentKind::multiparent) {
        GraphFamilySpec spec;
        spec.kind = GraphFamily::multiparent_chain;
        spec.n = pt.n;
        spec.p = pt.p;
        spec.num_parents = pt.m;
        spec.seed = graph_rng();
        auto [dag, parents] = gen_named(spec);
        const auto res = multiparent_search_oracle(dag, parents, search_rng);
        r.interventions = res.total_interventions;
        r.expected = to_double(multiparent_expected_interventions(dag, res.discovery_order));
        r.parent_correct = res.parents == parents;
        r.reverse_topological = is_reverse_topological(dag, res.discovery_order);
      } else {
        Dag dag = gen_erdos_renyi(pt.n, pt.p, graph_rng);
        ParentSpec parent = place_parent(dag, c.placement, graph_rng);
        r.expected = to_double(expected_interventions(dag, parent));
        const auto trace = raps_oracle(dag, parent, search_rng);
        r.interventions = trace.intervention_count;
        r.parent_correct = trace.result == parent;
      }
    } catch (const std::exception& e) {
      r.error = e.what();
      r.parent_correct = false;
    }
    if (c.record_wall_time) r.wall_time_ms = elapsed_ms(t0);
    rows.push_back(std::move(r));
  }
  return rows;
}

std::vector<RegretSummary> run_regret_point(const ExperimentConfig& c, const Point& pt, std::size_t point_index) {
  GraphFamilySpec spec;
  spec.kind = GraphFamily::line;
  spec.n = pt.n;
  auto [dag, parent] = gen_named(spec);
  ScmBuildOptions opt;
  opt.reward_low = c.reward_low;
  opt.reward_high = c.reward_high;
  if (!c.root_distribution.empty()) opt.root_distribution = c.root_distribution;
  const auto built = build_scm(dag, parent, c.K, c.eps_target, c.delta_target,
                               Rng::derive(c.master_seed, {point_index, 0x5c3})(), opt);
  DetectorConfig cfg;
  cfg.Delta = c.delta_target;
  cfg.eps = c.eps_target;
  cfg.K = c.K;

  std::vector<RegretSummary> out;
  const std::uint64_t tenth = std::max<std::uint64_t>(c.T / 10, 1);
  auto at = [&](const RegretRecord& rec, std::uint64_t t) {
    if (rec.cumulative_regret.empty()) return 0.0;
    return rec.cumulative_regret[std::min<std::size_t>(t, rec.cumulative_regret.size()) - 1];
  };
  for (std::size_t run = 0; run < c.runs_per_point; ++run) {
    const std::uint64_t seed = run_seed(c.master_seed, point_index, run);
    Rng rng(seed);
    Rng e2e_rng = rng.split(1);
    Rng flat_rng = rng.split(2);
    const auto e2e = end_to_end(built.scm, cfg, c.T, e2e_rng);
    out.push_back({seed, "end_to_end", e2e.final_regret(), at(e2e, tenth), e2e.event_E_held, e2e.parent_correct});
    const auto flat = flat_ucb_run(built.scm, c.T, flat_rng);
    out.push_back({seed, "flat_ucb", flat.final_regret(), at(flat, tenth), true, true});
  }
  return out;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& config) {
  config.validate();
  const auto points = sweep_points(config);

  std::ofstream file;
  if (!config.output_path.empty()) {
    file.open(config.output_path);
    if (!file) throw IoError("cannot write " + config.output_path);
  }

  std::vector<std::vector<RunRecord>> per_point(points.size());
  std::vector<std::vector<RegretSummary>> regret_per_point(points.size());
  std::vector<std::string> fatal(points.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < points.size(); i = next++) {
      try {
        if (config.experiment == ExperimentKind::regret_head2head)
          regret_per_point[i] = run_regret_point(config, points[i], i);
        else
          per_point[i] = run_point(config, points[i], i);
      } catch (const std::exception& e) {
        fatal[i] = e.what();
      }
    }
  };
  const std::size_t nthreads = std::min(config.workers, std::max<std::size_t>(points.size(), 1));
  if (nthreads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < nthreads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (std::size_t i = 0; i < points.size(); ++i)
    if (!fatal[i].empty()) throw std::runtime_error("sweep point " + std::to_string(i) + " failed: " + fatal[i]);

  ExperimentResult result;
  for (auto& rows : per_point)
    for (auto& r : rows) {
      if (!r.error.empty())
        std::cerr << "point " << r.point_index << " run " << r.run_index << ": " << r.error << '\n';
      result.records.push_back(std::move(r));
    }
  for (auto& rows : regret_per_point)
    for (auto& r : rows) result.regret.push_back(std::move(r));

  if (file.is_open()) {
    if (config.experiment == ExperimentKind::regret_head2head) {
      write_regret_header(file);
      for (const auto& r : result.regret) write_regret_row(file, r);
    } else {
      write_csv_header(file);
      for (const auto& r : result.records) write_csv_row(file, r);
    }
    if (!file) throw IoError("failed writing " + config.output_path);
  }
  return result;
}

ExperimentConfig figure_config(std::string_view panel, std::uint64_t master_seed) {
  ExperimentConfig c;
  c.master_seed = master_seed;
  c.runs_per_point = 20;
  auto pow2 = [](int lo, int hi) {
    std::vector<std::size_t> v;
    for (int e = lo; e <= hi; ++e) v.push_back(std::size_t{1} << e);
    return v;
  };
  if (panel == "a") {
    c.experiment = ExperimentKind::exact_vs_empirical;
    c.n_list = {300};
    c.p_list = log_spaced(1e-3, 0.5, 10);
  } else if (panel == "b") {
    c.experiment = ExperimentKind::er_fast;
    c.n_list = pow2(4, 12);
    c.p_rule.kind = PRule::Kind::corollary_threshold;
    c.p_rule.c = 0.5;
  } else if (panel == "c") {
    c.experiment = ExperimentKind::er_slow;
    c.n_list = pow2(6, 12);
    c.p_rule.kind = PRule::Kind::ln_n_over_n;
  } else if (panel == "d") {
    c.experiment = ExperimentKind::multiparent;
    c.n_list = pow2(6, 10);
    c.m_list = {1, 2, 3};
    c.p_rule.kind = PRule::Kind::multiparent_threshold;
    c.p_rule.c = 0.5;
    c.p_rule.c1 = 1.0;
  } else {
    throw ParameterError("unknown figure panel '" + std::string(panel) + "'");
  }
  return c;
}

ExperimentConfig regret_config(std::uint64_t master_seed) {
  ExperimentConfig c;
  c.experiment = ExperimentKind::regret_head2head;
  c.master_seed = master_seed;
  c.n_list = {16};
  c.runs_per_point = 20;
  c.K = 2;
  c.T = 100000;
  c.eps_target = 0.3;
  c.delta_target = 0.3;
  c.reward_low = 0.25;
  c.reward_high = 0.75;
  c.root_distribution = {0.1, 0.9};
  return c;
}

}  // namespace causalbandit
