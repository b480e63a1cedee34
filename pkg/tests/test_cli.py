import json
import subprocess
import sys

import numpy as np
import pytest

from ncgame.cli import main
from ncgame.graph import complete_graph, load_coloring, load_graph, max_degree, save_coloring, save_graph


def run(*argv):
    return main([str(a) for a in argv])


@pytest.fixture
def instance(tmp_path):
    out = tmp_path / "inst"
    assert run("gen", "--n", 12, "--p", 0.3, "--q", 9, "--seed", 3, "--regenerate", "--out", out) == 0
    return out


def test_gen_outputs(instance):
    g = load_graph(instance / "graph.txt")
    assert g.n == 12
    assert 9 >= max_degree(g) + 2
    meta = json.loads((instance / "instance.json").read_text())
    assert list(meta)[0] == "meta"
    assert meta["meta"]["config"]["seed"] == 3
    for name in ("graph.txt", "prefs.csv", "coloring.txt"):
        assert (instance / name).read_text().startswith("# ncgame")


def test_gen_trivial_instance(tmp_path):
    assert run("gen", "--n", 1, "--p", 0, "--q", 1, "--out", tmp_path) == 0
    assert load_coloring(tmp_path / "coloring.txt").tolist() == [0]


def test_gen_small_q_without_regenerate_fails(tmp_path):
    assert run("gen", "--n", 20, "--p", 0.9, "--q", 5, "--out", tmp_path) == 1


def test_exact_k2(tmp_path):
    save_graph(complete_graph(2), tmp_path / "k2.txt")
    assert run("exact", "--graph", tmp_path / "k2.txt", "--q", 3, "--out", tmp_path) == 0
    doc = json.loads((tmp_path / "exact.json").read_text())
    mono = [s for s in doc["transient_states"] if s["colors"][0] == s["colors"][1]]
    assert len(mono) == 3
    assert all(s["expected_steps"] == pytest.approx(2.0) for s in mono)
    assert all(s["variance"] == pytest.approx(2.0) for s in mono)
    assert doc["limit_check"]["passed"]
    assert (tmp_path / "chain.csv").exists()


def test_sweep_size_one(tmp_path):
    assert run("sweep", "--sizes", 1, "--trials", 20, "--out", tmp_path) == 0
    rows = (tmp_path / "sweep.csv").read_text().splitlines()
    rows = [r for r in rows if not r.startswith("#")]
    assert rows[0] == "n,graph_id,trial_id,T,seed"
    assert {r.split(",")[3] for r in rows[1:]} == {"0"}


def test_play_and_refusal(tmp_path):
    save_graph(complete_graph(2), tmp_path / "k2.txt")
    assert run("play", "--graph", tmp_path / "k2.txt", "--q", 3, "--seed", 4, "--out", tmp_path) == 0
    assert (tmp_path / "trajectory.csv").exists()
    assert run("play", "--graph", tmp_path / "k2.txt", "--q", 2, "--out", tmp_path) == 1


def test_missing_input_is_validation_error(tmp_path):
    assert run("reduce", "--graph", tmp_path / "nope.txt", "--out", tmp_path) == 1


def test_improper_coloring_rejected(tmp_path, instance):
    g = load_graph(instance / "graph.txt")
    u, v = g.edges[0]
    bad = load_coloring(instance / "coloring.txt")
    bad[v] = bad[u]
    save_coloring(bad, tmp_path / "bad.txt")
    code = run("reduce", "--graph", instance / "graph.txt", "--prefs", instance / "prefs.csv",
               "--coloring", tmp_path / "bad.txt", "--out", tmp_path)
    assert code == 1


def test_invariant_violation_exit_code(tmp_path):
    # one color on an edge: with the palette check overridden, nobody can redraw
    save_graph(complete_graph(2), tmp_path / "g.txt")
    code = run("play", "--graph", tmp_path / "g.txt", "--q", 1, "--allow-small-q", "--out", tmp_path)
    assert code == 2


def test_config_file_and_flag_override(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# gen settings\nn = 8\np = 0.2\nq = 7\nseed = 5\nregenerate = true\n")
    assert run("gen", "--config", cfg, "--seed", 6, "--out", tmp_path) == 0
    meta = json.loads((tmp_path / "instance.json").read_text())["meta"]
    assert meta["config"]["n"] == 8 and meta["config"]["seed"] == 6


def test_composable_pipeline(tmp_path, instance):
    common = ["--graph", instance / "graph.txt", "--prefs", instance / "prefs.csv",
              "--coloring", instance / "coloring.txt", "--out", tmp_path]
    assert run("reduce", *common) == 0
    assert run("localopt", *common, "--steps", 100) == 0
    assert run("estimate", *common, "--trials", 5, "--steps", 100) == 0
    assert run("anneal", *common, "--steps", 2000) == 0
    doc = json.loads((tmp_path / "anneal.json").read_text())
    assert set(doc["schedules"]) == {"log1p", "linear", "quadratic"}
    for rec in doc["schedules"].values():
        assert rec["best_welfare"] <= doc["ceiling"]
    trace = np.loadtxt(tmp_path / "trace.csv", delimiter=",", comments="#", skiprows=5)
    assert np.all(np.diff(trace[:, 1]) >= 0)


def test_module_entry_point(tmp_path):
    res = subprocess.run([sys.executable, "-m", "ncgame", "--version"], capture_output=True, text=True)
    assert res.returncode == 0 and "ncgame" in res.stdout
