#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <fstream>
#include <sstream>

#include "causalbandit/errors.hpp"
#include "causalbandit/experiment.hpp"
#include "causalbandit/graph_gen.hpp"
#include "causalbandit/raps.hpp"
#include "causalbandit/scm.hpp"
#include "causalbandit/theory.hpp"

namespace py = pybind11;
using namespace causalbandit;

namespace {

// A graph together with its reward parents.
struct PyGraph {
  Dag dag;
  ParentSpec parent;
};

PyGraph make_graph(std::size_t n, const std::vector<std::pair<Node, Node>>& edges, const std::vector<Node>& parents) {
  std::vector<Edge> es;
  for (const auto& [u, v] : edges) es.push_back({u, v});
  Dag dag(n, std::move(es));
  ParentSpec p = ParentSpec::none(n);
  for (Node v : parents) {
    if (v >= n) throw ParameterError("parent out of range");
    p.parents.insert(v);
  }
  return {std::move(dag), std::move(p)};
}

std::vector<Node> parent_list(const PyGraph& g) { return g.parent.parents.members(); }

py::tuple rational(const Rational& q) { return py::make_tuple(to_string(q), to_double(q)); }

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Causal bandit parent search and exact calculators";

  py::register_exception<ParameterError>(m, "ParameterError", PyExc_ValueError);
  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<CapabilityError>(m, "CapabilityError", PyExc_ValueError);
  py::register_exception<ConstructionError>(m, "ConstructionError", PyExc_RuntimeError);

  py::class_<PyGraph>(m, "Dag")
      .def(py::init(&make_graph), py::arg("n"), py::arg("edges"), py::arg("parents") = std::vector<Node>{})
      .def_property_readonly("n", [](const PyGraph& g) { return g.dag.size(); })
      .def_property_readonly("edges",
                             [](const PyGraph& g) {
                               std::vector<std::pair<Node, Node>> out;
                               for (const auto& [u, v] : g.dag.edges()) out.emplace_back(u, v);
                               return out;
                             })
      .def_property_readonly("parents", &parent_list)
      .def("ancestors", [](const PyGraph& g, Node v) { return g.dag.ancestors(v).members(); })
      .def("descendants", [](const PyGraph& g, Node v) { return g.dag.descendants(v).members(); })
      .def("to_text", [](const PyGraph& g) {
        std::ostringstream os;
        write_graph(os, g.dag, g.parent);
        return os.str();
      });

  m.def(
      "generate",
      [](const std::string& family, std::size_t n, double p, std::size_t d, std::size_t num_parents,
         std::uint64_t seed, const std::string& placement) {
        GraphFamilySpec spec;
        spec.kind = parse_family(family);
        spec.n = n;
        spec.p = p;
        spec.d = d;
        spec.num_parents = num_parents;
        spec.seed = seed;
        spec.placement = parse_placement(placement);
        auto [dag, parent] = gen_named(spec);
        return PyGraph{std::move(dag), std::move(parent)};
      },
      py::arg("family"), py::arg("n"), py::arg("p") = 0.0, py::arg("d") = 2, py::arg("num_parents") = 1,
      py::arg("seed") = 0, py::arg("placement") = "random");

  m.def("expected_interventions", [](const PyGraph& g) { return rational(expected_interventions(g.dag, g.parent)); },
        "Exact expected intervention count as (fraction string, float).");
  m.def("expected_interventions_recursive",
        [](const PyGraph& g) { return rational(expected_interventions_recursive(g.dag, g.parent)); });
  m.def("enumerate_permutation_mean",
        [](const PyGraph& g) { return rational(enumerate_permutation_mean(g.dag, g.parent)); });
  m.def("lower_bound", [](const PyGraph& g) { return rational(lower_bound(g.dag, g.parent)); });

  m.def(
      "raps_oracle",
      [](const PyGraph& g, std::uint64_t seed) {
        Rng rng(seed);
        if (g.parent.count() > 1) {
          const auto res = multiparent_search_oracle(g.dag, g.parent, rng);
          return py::make_tuple(res.parents.parents.members(), res.total_interventions);
        }
        const auto trace = raps_oracle(g.dag, g.parent, rng);
        return py::make_tuple(trace.result.parents.members(), trace.intervention_count);
      },
      py::arg("graph"), py::arg("seed") = 0, "Returns (parents found, intervention count).");

  m.def(
      "raps_statistical",
      [](const std::string& scm_json, double Delta, double eps, double delta, std::uint64_t B, std::uint64_t seed) {
        const Scm scm = scm_from_json(scm_json);
        DetectorConfig cfg{Delta, eps, delta, 0, scm.K()};
        cfg.B = B ? B : required_batch_size(scm.size(), cfg.K, delta, Delta, eps);
        Rng rng(seed);
        const auto res = raps_statistical(scm, cfg, rng);
        py::dict out;
        out["parents"] = res.trace.result.parents.members();
        out["interventions"] = res.trace.intervention_count;
        out["samples"] = res.ledger.total();
        out["event_E"] = res.ledger.all_correct();
        return out;
      },
      py::arg("scm_json"), py::arg("Delta") = 0.3, py::arg("eps") = 0.3, py::arg("delta") = 0.1, py::arg("B") = 0,
      py::arg("seed") = 0);

  m.def("required_batch_size", &required_batch_size, py::arg("n"), py::arg("K"), py::arg("delta"), py::arg("Delta"),
        py::arg("eps"));

  m.def(
      "er_fast_threshold",
      [](double n, double k, double c, const std::string& variant, double base) {
        if (variant != "corollary" && variant != "remark") throw ParameterError("variant must be corollary or remark");
        return er_fast_threshold(n, k, c, variant == "corollary" ? ThresholdVariant::corollary : ThresholdVariant::remark,
                                 base);
      },
      py::arg("n"), py::arg("k") = 1.0, py::arg("c") = 0.5, py::arg("variant") = "corollary", py::arg("base") = 2.0);
  m.def("er_multiparent_threshold", &er_multiparent_threshold, py::arg("n"), py::arg("k") = 1.0, py::arg("c0") = 0.5,
        py::arg("c1") = 1.0, py::arg("base") = 2.0);
  m.def("dary_tree_bound", &dary_tree_bound, py::arg("n"), py::arg("d"));

  m.def(
      "build_scm_json",
      [](const PyGraph& g, int K, double eps_target, double delta_target, std::uint64_t seed) {
        return scm_to_json(build_scm(g.dag, g.parent, K, eps_target, delta_target, seed).scm);
      },
      py::arg("graph"), py::arg("K") = 2, py::arg("eps_target") = 0.3, py::arg("delta_target") = 0.3,
      py::arg("seed") = 0);

  m.def(
      "run_experiment",
      [](const std::string& config_json) {
        const auto cfg = config_from_json(config_json);
        ExperimentResult res;
        {
          py::gil_scoped_release release;
          res = run_experiment(cfg);
        }
        std::ostringstream os;
        if (cfg.experiment == ExperimentKind::regret_head2head) {
          write_regret_header(os);
          for (const auto& r : res.regret) write_regret_row(os, r);
        } else {
          write_csv_header(os);
          for (const auto& r : res.records) write_csv_row(os, r);
        }
        return os.str();
      },
      py::arg("config_json"), "Runs a sweep from a JSON config and returns the CSV text.");

  m.def(
      "figure_config_json",
      [](const std::string& panel, std::uint64_t seed) { return config_to_json(figure_config(panel, seed)); },
      py::arg("panel"), py::arg("seed") = 2024);
}
