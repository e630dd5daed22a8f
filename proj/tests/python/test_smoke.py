import json

import pytest

import causalbandit as cb


def four_node():
    # X1 -> P, X1 -> X2, P -> X2, X3 -> X2 with P = 0.
    return cb.Dag(4, [(1, 0), (1, 2), (0, 2), (3, 2)], [0])


def test_exact_calculators():
    g = four_node()
    assert cb.expected_interventions(g)[0] == "7/3"
    assert cb.enumerate_permutation_mean(g)[0] == "7/3"
    assert cb.lower_bound(g) == cb.expected_interventions(g)
    # Uniform-draw search keeps X2 after discovering X1, hence the larger mean.
    assert cb.expected_interventions_recursive(g)[0] == "31/12"


def test_generate_line_graph():
    g = cb.generate("line", 4)
    assert g.edges == [(0, 1), (1, 2), (2, 3)]
    assert g.parents == [0]
    text, value = cb.expected_interventions(g)
    assert text == "17/6"
    assert value == pytest.approx(17 / 6)


def test_raps_oracle_finds_parent():
    g = cb.generate("erdos_renyi", 40, p=0.1, seed=3)
    parents, count = cb.raps_oracle(g, seed=1)
    assert parents == g.parents
    assert 1 <= count <= 40


def test_multiparent_chain():
    g = cb.generate("multiparent_chain", 2, num_parents=2)
    parents, _ = cb.raps_oracle(g, seed=0)
    assert sorted(parents) == [0, 1]


def test_thresholds_and_batch_size():
    assert cb.required_batch_size(10, 2, 0.1, 0.2, 0.2) == 5903
    assert cb.er_fast_threshold(1024, 1, 0.5) == pytest.approx(0.2747, abs=1e-4)
    assert cb.er_fast_threshold(4, 1, 0.3) == pytest.approx(0.3)
    assert cb.dary_tree_bound(15, 2) == pytest.approx(1.6)
    with pytest.raises(ValueError):
        cb.er_fast_threshold(2, 1, 0.5)


def test_statistical_search_on_built_scm():
    doc = cb.build_scm_json(four_node(), K=2, seed=17)
    assert json.loads(doc)["K"] == 2
    out = cb.raps_statistical(doc, seed=5)
    assert out["samples"] > 0
    assert set(out) == {"parents", "interventions", "samples", "event_E"}


def test_run_experiment_csv():
    csv = cb.run_experiment(json.dumps({"experiment": "er_slow", "n_list": [16, 32], "runs_per_point": 2}))
    lines = csv.strip().split("\n")
    assert lines[0] == "experiment,family,n,p,m,seed,interventions,expected,parent_correct,wall_time_ms"
    assert len(lines) == 5
    assert cb.run_experiment(json.dumps({"experiment": "er_slow", "n_list": [16, 32], "runs_per_point": 2})) == csv


def test_invalid_graph_raises():
    with pytest.raises(ValueError):
        cb.Dag(2, [(0, 1), (1, 0)])
