#include "causalbandit/cli.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "causalbandit/bandit.hpp"
#include "causalbandit/errors.hpp"
#include "causalbandit/experiment.hpp"
#include "causalbandit/graph_gen.hpp"
#include "causalbandit/raps.hpp"
#include "causalbandit/scm.hpp"
#include "causalbandit/theory.hpp"

namespace causalbandit {

namespace {

const std::vector<std::string> kFamilies{"erdos_renyi", "line", "n_branch", "collider_line",
                                         "dary_tree", "null", "multiparent_chain"};

struct FamilyOpts {
  std::string family;
  std::size_t n = 4;
  double p = 0.0;
  std::size_t d = 2;
  std::size_t m = 1;
  std::uint64_t seed = 0;
  std::string placement = "random";
  std::string tree_placement = "leaf";

  void add(CLI::App* app) {
    app->add_option("--family", family, "Graph family")->check(CLI::IsMember(kFamilies));
    app->add_option("--n", n, "Node count")->capture_default_str();
    app->add_option("--p", p, "Edge probability (erdos_renyi, multiparent_chain)")->capture_default_str();
    app->add_option("--d", d, "Tree arity (dary_tree)")->capture_default_str();
    app->add_option("--m", m, "Parent count (multiparent_chain)")->capture_default_str();
    app->add_option("--graph-seed", seed, "Seed of the random graph")->capture_default_str();
    app->add_option("--placement", placement, "Parent placement in random graphs")
        ->check(CLI::IsMember({"random", "first-in-topo", "last-in-topo", "none"}))
        ->capture_default_str();
    app->add_option("--tree-placement", tree_placement, "Parent placement in trees")
        ->check(CLI::IsMember({"leaf", "root", "none"}))
        ->capture_default_str();
  }

  GraphFile build() const {
    GraphFamilySpec spec;
    spec.kind = parse_family(family);
    spec.n = n;
    spec.p = p;
    spec.d = d;
    spec.num_parents = m;
    spec.seed = seed;
    spec.placement = parse_placement(placement);
    spec.tree_placement = tree_placement == "root"   ? TreeParentPlacement::root
                          : tree_placement == "none" ? TreeParentPlacement::none
                                                     : TreeParentPlacement::leaf;
    auto [dag, parent] = gen_named(spec);
    return {std::move(dag), std::move(parent)};
  }
};

std::string decimal(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

// Writes to `path`, or stdout when empty.
template <typename F>
void with_output(const std::string& path, F&& f) {
  if (path.empty()) {
    f(std::cout);
    std::cout.flush();
    return;
  }
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  f(out);
  if (!out) throw IoError("failed writing " + path);
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(std::stod(cell));
  return out;
}

struct ScmOpts {
  std::string scm_path;
  int K = 2;
  double eps_target = 0.3;
  double delta_target = 0.3;
  std::uint64_t scm_seed = 0;
  double reward_low = 0.0;
  double reward_high = 1.0;
  std::string root_dist;

  void add(CLI::App* app) {
    app->add_option("--scm", scm_path, "SCM JSON file")->check(CLI::ExistingFile);
    app->add_option("--K", K, "Categories per variable for a generated SCM")->capture_default_str();
    app->add_option("--eps-target", eps_target, "Ancestral effect margin of a generated SCM")->capture_default_str();
    app->add_option("--delta-target", delta_target, "Reward effect margin of a generated SCM")->capture_default_str();
    app->add_option("--scm-seed", scm_seed, "Seed of the generated SCM")->capture_default_str();
    app->add_option("--reward-low", reward_low, "Smallest reward mean of a generated SCM")->capture_default_str();
    app->add_option("--reward-high", reward_high, "Largest reward mean of a generated SCM")->capture_default_str();
    app->add_option("--root-dist", root_dist, "Comma-separated distribution for root nodes");
  }

  Scm build(const FamilyOpts& fam) const {
    if (!scm_path.empty()) return read_scm_file(scm_path);
    if (fam.family.empty()) throw CLI::RequiredError("--scm or --family");
    const auto g = fam.build();
    ScmBuildOptions opt;
    opt.reward_low = reward_low;
    opt.reward_high = reward_high;
    if (!root_dist.empty()) opt.root_distribution = parse_list(root_dist);
    return build_scm(g.dag, g.parent, K, eps_target, delta_target, scm_seed, opt).scm;
  }
};

GraphFile load_graph(const std::string& path, const FamilyOpts& fam) {
  if (!path.empty()) return read_graph_file(path);
  if (fam.family.empty()) throw CLI::RequiredError("--graph or --family");
  return fam.build();
}

}  // namespace

int cli_main(int argc, char** argv) {
  CLI::App app{"Causal bandit simulator: parent search, exact calculators and regret experiments", "causalbandit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "causalbandit 0.1.0");

  // gen
  auto* gen = app.add_subcommand("gen", "Generate a graph in the edge-list format");
  FamilyOpts gen_fam;
  std::uint64_t gen_seed = 0;
  std::string gen_out;
  gen_fam.add(gen);
  gen->get_option("--family")->required();
  gen->add_option("--seed", gen_seed, "Graph seed (alias of --graph-seed)");
  gen->add_option("--out,-o", gen_out, "Output file (default stdout)");

  // exact
  auto* exact = app.add_subcommand("exact", "Exact expected number of interventions");
  FamilyOpts ex_fam;
  std::string ex_graph, ex_oracle = "eq1";
  ex_fam.add(exact);
  exact->add_option("--graph", ex_graph, "Graph file")->check(CLI::ExistingFile);
  exact->add_option("--oracle", ex_oracle, "Calculator")
      ->check(CLI::IsMember({"eq1", "recursion", "enumerate", "lower-bound"}))
      ->capture_default_str();

  // raps
  auto* raps = app.add_subcommand("raps", "Run the parent search and emit one CSV row per run");
  FamilyOpts ra_fam;
  ScmOpts ra_scm;
  std::string ra_graph, ra_mode = "oracle", ra_out;
  std::size_t ra_runs = 1;
  std::uint64_t ra_seed = 0;
  bool ra_timing = false;
  DetectorConfig ra_cfg;
  std::uint64_t ra_B = 0;
  ra_fam.add(raps);
  ra_scm.add(raps);
  raps->add_option("--graph", ra_graph, "Graph file")->check(CLI::ExistingFile);
  raps->add_option("--mode", ra_mode, "Query answers")->check(CLI::IsMember({"oracle", "statistical"}))->capture_default_str();
  raps->add_option("--runs", ra_runs, "Number of runs")->check(CLI::PositiveNumber)->capture_default_str();
  raps->add_option("--seed", ra_seed, "Master seed of the runs")->capture_default_str();
  raps->add_flag("--timing", ra_timing, "Fill wall_time_ms (breaks byte-identical output)");
  raps->add_option("--Delta", ra_cfg.Delta, "Reward gap of the detector")->capture_default_str();
  raps->add_option("--eps", ra_cfg.eps, "Ancestral effect gap of the detector")->capture_default_str();
  raps->add_option("--delta", ra_cfg.delta, "Failure probability of the detector")->capture_default_str();
  raps->add_option("--B", ra_B, "Batch size (default: from the concentration bound)");
  raps->add_option("--out,-o", ra_out, "Output CSV (default stdout)");

  // regret
  auto* regret = app.add_subcommand("regret", "Per-round cumulative regret as CSV (round,regret,phase)");
  FamilyOpts rg_fam;
  ScmOpts rg_scm;
  std::uint64_t rg_T = 100000, rg_seed = 0, rg_B = 0;
  std::string rg_delta = "auto", rg_baseline = "none", rg_out;
  bool rg_unbudgeted = false;
  DetectorConfig rg_cfg;
  rg_fam.add(regret);
  rg_scm.add(regret);
  regret->add_option("--T", rg_T, "Horizon")->check(CLI::PositiveNumber)->capture_default_str();
  regret->add_option("--delta", rg_delta, "Failure probability, or 'auto' for min(1, sqrt(K ln T / T))")->capture_default_str();
  regret->add_option("--baseline", rg_baseline, "Run a baseline instead of the causal learner")
      ->check(CLI::IsMember({"none", "flat-ucb"}))
      ->capture_default_str();
  regret->add_option("--seed", rg_seed, "Seed")->capture_default_str();
  regret->add_option("--Delta", rg_cfg.Delta, "Reward gap of the detector")->capture_default_str();
  regret->add_option("--eps", rg_cfg.eps, "Ancestral effect gap of the detector")->capture_default_str();
  regret->add_option("--B", rg_B, "Batch size (default: from the concentration bound)");
  regret->add_flag("--unbudgeted", rg_unbudgeted, "Do not charge discovery samples against T");
  regret->add_option("--out,-o", rg_out, "Output CSV (default stdout)");

  // sweep
  auto* sweep = app.add_subcommand("sweep", "Run an experiment sweep from a JSON config");
  std::string sw_config, sw_out;
  std::size_t sw_workers = 0;
  bool sw_timing = false;
  sweep->add_option("--config", sw_config, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
  sweep->add_option("--out,-o", sw_out, "Output CSV (overrides output_path)");
  sweep->add_option("--workers", sw_workers, "Worker threads (overrides the config)");
  sweep->add_flag("--timing", sw_timing, "Fill wall_time_ms");

  // figures-data
  auto* figs = app.add_subcommand("figures-data", "Write fig_a.csv .. fig_d.csv for the four panels");
  std::string fg_dir;
  std::uint64_t fg_seed = 2024;
  std::vector<std::string> fg_panels{"a", "b", "c", "d"};
  std::size_t fg_workers = 1, fg_runs = 0;
  figs->add_option("--out-dir", fg_dir, "Output directory")->required();
  figs->add_option("--seed", fg_seed, "Master seed")->capture_default_str();
  figs->add_option("--panels", fg_panels, "Panels to run")->check(CLI::IsMember({"a", "b", "c", "d"}))->delimiter(',');
  figs->add_option("--workers", fg_workers, "Worker threads")->capture_default_str();
  figs->add_option("--runs", fg_runs, "Runs per point (default 20)");

  // scm
  auto* scm_cmd = app.add_subcommand("scm", "Build a certified SCM and write it as JSON");
  FamilyOpts sc_fam;
  ScmOpts sc_scm;
  std::string sc_out;
  sc_fam.add(scm_cmd);
  sc_scm.add(scm_cmd);
  scm_cmd->get_option("--family")->required();
  scm_cmd->add_option("--out,-o", sc_out, "Output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (gen->parsed()) {
      if (gen->count("--seed")) gen_fam.seed = gen_seed;
      const auto g = gen_fam.build();
      with_output(gen_out, [&](std::ostream& os) { write_graph(os, g.dag, g.parent); });
    } else if (exact->parsed()) {
      const auto g = load_graph(ex_graph, ex_fam);
      Rational q;
      if (ex_oracle == "eq1")
        q = expected_interventions(g.dag, g.parent);
      else if (ex_oracle == "recursion")
        q = expected_interventions_recursive(g.dag, g.parent);
      else if (ex_oracle == "enumerate")
        q = enumerate_permutation_mean(g.dag, g.parent);
      else
        q = lower_bound(g.dag, g.parent);
      std::cout << to_string(q) << " ≈ " << decimal(to_double(q)) << '\n';
    } else if (raps->parsed()) {
      const bool statistical = ra_mode == "statistical";
      std::optional<Scm> scm;
      GraphFile g;
      if (statistical) {
        if (!ra_graph.empty()) {
          auto gf = read_graph_file(ra_graph);
          ScmBuildOptions opt;
          opt.reward_low = ra_scm.reward_low;
          opt.reward_high = ra_scm.reward_high;
          scm = build_scm(gf.dag, gf.parent, ra_scm.K, ra_scm.eps_target, ra_scm.delta_target, ra_scm.scm_seed, opt).scm;
        } else {
          scm = ra_scm.build(ra_fam);
        }
        g = GraphFile{scm->dag(), scm->reward_parents()};
      } else {
        g = load_graph(ra_graph, ra_fam);
      }
      const bool multi = g.parent.count() > 1;
      const std::string family = ra_fam.family.empty() ? "file" : ra_fam.family;
      const double expected = multi ? 0.0 : to_double(expected_interventions(g.dag, g.parent));
      std::vector<RunRecord> rows;
      for (std::size_t run = 0; run < ra_runs; ++run) {
        RunRecord r;
        r.experiment = std::string("raps_") + ra_mode;
        r.family = family;
        r.n = g.dag.size();
        r.p = ra_fam.p;
        r.m = g.parent.count();
        r.seed = Rng::derive(ra_seed, {0, run})();
        r.expected = expected;
        Rng rng(r.seed);
        const auto t0 = std::chrono::steady_clock::now();
        if (statistical) {
          DetectorConfig cfg = ra_cfg;
          cfg.K = scm->K();
          cfg.B = ra_B ? ra_B : required_batch_size(g.dag.size(), cfg.K, cfg.delta, cfg.Delta, cfg.eps);
          if (multi) {
            const auto res = multiparent_search_statistical(*scm, cfg, rng);
            r.interventions = res.total_interventions;
            r.parent_correct = res.parents == g.parent;
            r.expected = to_double(multiparent_expected_interventions(g.dag, res.discovery_order));
          } else {
            const auto res = raps_statistical(*scm, cfg, rng);
            r.interventions = res.trace.intervention_count;
            r.parent_correct = res.trace.result == g.parent;
          }
        } else if (multi) {
          const auto res = multiparent_search_oracle(g.dag, g.parent, rng);
          r.interventions = res.total_interventions;
          r.parent_correct = res.parents == g.parent;
          r.expected = to_double(multiparent_expected_interventions(g.dag, res.discovery_order));
        } else {
          const auto trace = raps_oracle(g.dag, g.parent, rng);
          r.interventions = trace.intervention_count;
          r.parent_correct = trace.result == g.parent;
        }
        if (ra_timing)
          r.wall_time_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
        rows.push_back(std::move(r));
      }
      with_output(ra_out, [&](std::ostream& os) {
        write_csv_header(os);
        for (const auto& r : rows) write_csv_row(os, r);
      });
    } else if (regret->parsed()) {
      const Scm scm = rg_scm.build(rg_fam);
      Rng rng(rg_seed);
      RegretRecord rec;
      if (rg_baseline == "flat-ucb") {
        rec = flat_ucb_run(scm, rg_T, rng);
      } else {
        EndToEndOptions opt;
        opt.budgeted = !rg_unbudgeted;
        if (rg_delta != "auto") opt.delta = std::stod(rg_delta);
        if (rg_B) opt.B = rg_B;
        rec = end_to_end(scm, rg_cfg, rg_T, rng, opt);
        std::cerr << "discovered " << rec.discovered.parents.to_string() << " (true "
                  << scm.reward_parents().parents.to_string() << "), discovery samples " << rec.discovery_samples
                  << ", event E " << (rec.event_E_held ? "held" : "failed") << '\n';
      }
      with_output(rg_out, [&](std::ostream& os) {
        os << "round,regret,phase\n";
        char buf[64];
        for (std::size_t t = 0; t < rec.cumulative_regret.size(); ++t) {
          std::snprintf(buf, sizeof buf, "%.6f", rec.cumulative_regret[t]);
          os << (t + 1) << ',' << buf << ',' << phase_name(rec.phase_per_round[t]) << '\n';
        }
      });
    } else if (sweep->parsed()) {
      ExperimentConfig cfg;
      try {
        cfg = load_config(sw_config);
      } catch (const ParameterError& e) {
        std::cerr << "invalid config: " << e.what() << '\n';
        return 1;
      }
      if (!sw_out.empty()) cfg.output_path = sw_out;
      if (sw_workers) cfg.workers = sw_workers;
      if (sw_timing) cfg.record_wall_time = true;
      const bool to_stdout = cfg.output_path.empty();
      const auto res = run_experiment(cfg);
      if (to_stdout) {
        if (cfg.experiment == ExperimentKind::regret_head2head) {
          write_regret_header(std::cout);
          for (const auto& r : res.regret) write_regret_row(std::cout, r);
        } else {
          write_csv_header(std::cout);
          for (const auto& r : res.records) write_csv_row(std::cout, r);
        }
      }
    } else if (figs->parsed()) {
      std::filesystem::create_directories(fg_dir);
      for (const auto& panel : fg_panels) {
        auto cfg = figure_config(panel, fg_seed);
        cfg.workers = fg_workers;
        if (fg_runs) cfg.runs_per_point = fg_runs;
        cfg.output_path = (std::filesystem::path(fg_dir) / ("fig_" + panel + ".csv")).string();
        run_experiment(cfg);
        std::cerr << "wrote " << cfg.output_path << '\n';
      }
    } else if (scm_cmd->parsed()) {
      const Scm scm = sc_scm.build(sc_fam);
      with_output(sc_out, [&](std::ostream& os) { os << scm_to_json(scm) << '\n'; });
    }
  } catch (const CLI::Error& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}

}  // namespace causalbandit
