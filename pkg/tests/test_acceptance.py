"""Acceptance suite: one check per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v`` or directly with
``python tests/test_acceptance.py`` for the summary lines alone.
"""

import filecmp
import math
import sys
import time
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from oracles import occupancy_pvalue, single_site_kernel, thinning_for  # noqa: E402

from ncgame.absorbing import (  # noqa: E402
    analyze,
    build_chain,
    canonical_class,
    expected_absorption,
    fundamental_matrix,
    limit_distribution_check,
)
from ncgame.borda import (  # noqa: E402
    available_colors,
    estimate_expected_optimum,
    local_optimal_run,
    rank_matrix,
    reduce_network,
)
from ncgame.cli import main as cli_main  # noqa: E402
from ncgame.convergence import SweepConfig, prop3_tail_curve, run_sweep, scaling_report  # noqa: E402
from ncgame.game import satisfaction_lower_bound, simulate_batch  # noqa: E402
from ncgame.graph import Graph, complete_graph, empty_graph, max_degree, path_graph, star_graph  # noqa: E402
from ncgame.instances import borda_instance, reduction_example  # noqa: E402
from ncgame.rng import derive_seed  # noqa: E402
from ncgame.samplers import INCREASING_SCHEDULES, REFERENCE_RESULTS, TemperatureSchedule, mh_chain, sa_chain, sa_run  # noqa: E402

MASTER = 20240601


def emit(number, title, ok, detail, capsys=None):
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {title} -- {detail}"
    if capsys is not None:
        with capsys.disabled():
            print("\n" + line)
    else:
        print(line)
    return ok


# --- 1. exact oracle vs simulation ------------------------------------------


def criterion_1():
    t0 = time.perf_counter()
    trials = 100_000
    worst = 0.0
    lines = []
    ok = True
    for g, q, name in ((complete_graph(2), 3, "K2"), (path_graph(3), 4, "P3"), (complete_graph(3), 5, "K3")):
        ex = analyze(g, q)
        reps = {}
        for s in ex.space.states:
            reps.setdefault(canonical_class(s), s)
        for k, (cls, rep) in enumerate(sorted(reps.items())):
            mean, var = ex.for_state(rep)
            T = simulate_batch(g, q, np.tile(rep, (trials, 1)),
                               np.random.default_rng(derive_seed(MASTER, 1, g.n, q, k))).astype(float)
            mu, s2 = T.mean(), T.var(ddof=1)
            se_mean = math.sqrt(s2 / trials)
            se_var = math.sqrt(max(np.mean((T - mu) ** 4) - s2 ** 2, 0.0) / trials)
            if se_mean == 0.0:
                good = mu == mean and s2 == var
            else:
                z = max(abs(mu - mean) / se_mean, abs(s2 - var) / se_var)
                worst = max(worst, z)
                good = z < 3.0
                lines.append(f"{name}{cls}: E={mean:.4f}/{mu:.4f} Var={var:.4f}/{s2:.4f}")
            ok &= good
    base = analyze(complete_graph(2), 3).for_state((0, 0))
    ok &= np.allclose(base, (2.0, 2.0))
    elapsed = time.perf_counter() - t0
    ok &= elapsed < 60
    return ok, f"{len(lines)} transient classes, worst |z| = {worst:.2f} (< 3), K2 baseline {base}, {elapsed:.1f}s"


# --- 2. fundamental matrix identities --------------------------------------


TEST_CHAINS = (
    (complete_graph(2), 3), (path_graph(3), 4), (complete_graph(3), 5), (empty_graph(2), 2),
    (star_graph(3), 5), (Graph(4, ((0, 1), (1, 2), (2, 3), (0, 3))), 4), (path_graph(4), 4),
)


def criterion_2():
    ok = True
    worst_resid, worst_tail = 0.0, 0.0
    for g, q in TEST_CHAINS:
        _, chain = build_chain(g, q)
        N = fundamental_matrix(chain)
        if chain.t:
            worst_resid = max(worst_resid, float(np.abs(N @ (np.eye(chain.t) - chain.Q) - np.eye(chain.t)).max()))
        ok &= np.array_equal(expected_absorption(N), N.sum(axis=1))
        rep = limit_distribution_check(chain, t_max=200)
        worst_tail = max(worst_tail, rep.max_entry[-1])
        ok &= rep.passed
    ok &= worst_resid < 1e-10 and worst_tail < 1e-8
    return ok, f"{len(TEST_CHAINS)} chains, max |N(I-Q)-I| = {worst_resid:.1e}, max Q^200 entry = {worst_tail:.1e}"


# --- 3. scaling envelope -----------------------------------------------------


def criterion_3():
    t0 = time.perf_counter()
    cfg = SweepConfig(sizes=(8, 16, 32, 64, 128, 256), trials=500, seed=MASTER)
    samples = run_sweep(cfg)
    rep = scaling_report(samples, epsilon=0.05)
    tails = rep.tails
    at_least = dict(zip(tails.sizes, tails.p_at_least_n))
    growth = rep.mean[-1] / rep.mean[0]
    _, rows = prop3_tail_curve([s for s in samples if s.n == 128])
    qs = [r.quantile for r in rows]
    elapsed = time.perf_counter() - t0
    ok = (rep.mean_ratio_non_increasing and rep.var_ratio_non_increasing
          and at_least[128] == 0.0 and at_least[256] == 0.0
          and tails.p_above_M_log_n[-1] < 0.05
          and growth < math.log(256) / math.log(8) * 1.5
          and qs == sorted(qs) and elapsed < 600)
    detail = (f"mean/ln n {[round(x, 3) for x in rep.mean_ratio]}, var/ln^2 n {[round(x, 3) for x in rep.var_ratio]}, "
              f"M={tails.M:.2f}, P[T>M ln 256]={tails.p_above_M_log_n[-1]:.3f}, "
              f"P[T>=n] at 128/256 = {at_least[128]}/{at_least[256]}, mean growth {growth:.2f}, {elapsed:.0f}s")
    return ok, detail


# --- 4. one-round resolution bound -------------------------------------------


def criterion_4():
    ok = True
    parts = []
    for g, q, name in ((complete_graph(3), 5, "K3"), (star_graph(7), 9, "S7")):
        bound = satisfaction_lower_bound(q, max_degree(g))
        rng = np.random.default_rng(derive_seed(MASTER, 4, g.n))
        events = np.zeros(g.n, dtype=np.int64)
        resolved = np.zeros(g.n, dtype=np.int64)
        while events.min() < 100_000:
            start = np.zeros((50_000, g.n), dtype=np.int64)
            _, (e, r) = simulate_batch(g, q, start, rng, track_resolution=True)
            events += e
            resolved += r
        freq = resolved / events
        se = np.sqrt(bound * (1 - bound) / events)
        ok &= bool(np.all(freq >= bound - 3 * se))
        parts.append(f"{name}: min freq {freq.min():.4f} >= {bound:.4f} (min events {events.min()})")
    return ok, "; ".join(parts)


# --- 5. MH uniformity ----------------------------------------------------------


MH_INSTANCES = {
    "K2": (complete_graph(2), [[0, 1, 2]] * 2, [0, 1]),
    "K3": (complete_graph(3), [[0, 1, 2, 3]] * 3, [0, 1, 2]),
    "P3": (path_graph(3), [[0, 1, 2], [0, 1, 2, 3], [1, 2]], [0, 3, 1]),
    "C4": (Graph(4, ((0, 1), (1, 2), (2, 3), (0, 3))), [[0, 1, 2]] * 4, [0, 1, 0, 1]),
}


def criterion_5():
    ok = True
    parts = []
    for k, (name, (g, lists, L0)) in enumerate(MH_INSTANCES.items()):
        for mode in ("standard", "literal"):
            states, P = single_site_kernel(g.n, g.edges, lists, literal=mode == "literal")
            stride = thinning_for(P)
            _, samples = mh_chain(g, L0, lists, 10**6, mode=mode,
                                  seed=derive_seed(MASTER, 5, k, int(mode == "literal")), record_every=stride)
            p, _ = occupancy_pvalue(samples, states, np.full(len(states), 1 / len(states)))
            ok &= p > 0.01 and len(states) <= 50
            parts.append(f"{name}/{mode[0]} {len(states)}st p={p:.3f}")
    return ok, ", ".join(parts)


# --- 6. annealing kernel at fixed lambda --------------------------------------


def criterion_6():
    g = path_graph(3)
    q = 4
    X = np.array([np.roll(np.arange(q), -i) for i in range(3)])
    L0 = X[:, -1]                      # everybody at the bottom, so lists are full
    lists = available_colors(X, L0)
    ranks = rank_matrix(X)

    def h(x):
        return (q - 1) * g.n - sum(int(ranks[i, c]) for i, c in enumerate(x))

    ok = True
    parts = []
    for lam in (0.0, 0.5):
        states, P = single_site_kernel(g.n, g.edges, lists, weights=lambda x: lam * h(x))
        w = np.array([math.exp(lam * h(s)) for s in states])
        stride = thinning_for(P)
        _, samples = sa_chain(g, X, L0, q, 10**6, TemperatureSchedule("constant", lam0=lam),
                              seed=derive_seed(MASTER, 6, int(lam * 10)), record_every=stride)
        p, _ = occupancy_pvalue(samples, states, w / w.sum())
        ok &= p > 0.01
        parts.append(f"lambda={lam}: {len(states)} states, {len(samples)} samples, p={p:.3f}")
    return ok, "; ".join(parts)


# --- 7. Borda-phase reproduction -------------------------------------------------


def criterion_7():
    inst = borda_instance(n=20, p=0.3, q=13, seed=MASTER, regenerate=True)
    g, X, L, q = inst.graph, inst.prefs, inst.colors, inst.q
    t0 = time.perf_counter()
    est = estimate_expected_optimum(g, X, L, q, k=1000, seed=MASTER)
    elapsed = time.perf_counter() - t0
    monotone = True
    for r in range(1000):
        run = local_optimal_run(g, X, L, q, seed=derive_seed(MASTER, r))
        w = [x for _, x, _ in run.trace]
        monotone &= w == sorted(w)
        monotone &= run.total_welfare == est.samples[r]
    ceiling = (q - 1) * g.n
    sa = {name: sa_run(g, X, L, q, 200_000, name, seed=derive_seed(MASTER, 7)) for name in INCREASING_SCHEDULES}
    ok = (max_degree(g) <= 11 and elapsed < 300 and monotone
          and est.mean <= est.max <= ceiling
          and all(tr.best_welfare >= est.mean for tr in sa.values()))
    ours = ", ".join(f"{k} {tr.best_welfare}@{tr.reaching_time}" for k, tr in sa.items())
    ref = ", ".join(f"{k} {v[0]}@{v[1]}" for k, v in REFERENCE_RESULTS.items())
    return ok, (f"max degree {max_degree(g)}, k=1000 in {elapsed:.0f}s ({est.frozen_runs} ended frozen), "
                f"mean {est.mean:.3f} (ref 208.905), "
                f"max {est.max} (ref 216), ceiling {ceiling}; SA {ours} (ref {ref}; band 215-220)")


# --- 8. six-vertex reduction ----------------------------------------------------


def criterion_8():
    g, X, L, _ = reduction_example()
    out = reduce_network(g, X, L, available_colors(X, L))
    ok = (out.quitters == [4, 0, 2] and out.payoff_gained == 6
          and out.graph.n == 3 and out.graph.m == 2)
    return ok, f"quitters {out.quitters}, payoff {out.payoff_gained}, residual n={out.graph.n} m={out.graph.m}"


# --- 9. determinism ---------------------------------------------------------------


def _run_all(base: Path, inputs: Path):
    game = ["--graph", inputs / "graph.txt", "--prefs", inputs / "prefs.csv", "--coloring", inputs / "coloring.txt"]
    cmds = [
        ["gen", "--n", 20, "--p", 0.3, "--q", 13, "--seed", 5, "--regenerate"],
        ["play", "--graph", inputs / "graph.txt", "--q", 13, "--seed", 5],
        ["exact", "--graph", inputs / "k3.txt", "--q", 5],
        ["sweep", "--sizes", "8,16,32", "--trials", 100, "--seed", 5],
        ["reduce", *game],
        ["localopt", *game, "--seed", 5],
        ["estimate", *game, "--trials", 20, "--seed", 5],
        ["anneal", *game, "--steps", 20_000, "--seed", 5],
    ]
    codes = []
    for cmd in cmds:
        out = base / cmd[0]
        argv = [str(a) for a in cmd] + ["--out", str(out)]
        codes.append(cli_main(argv))
    return codes


def criterion_9(tmp: Path):
    from ncgame.graph import save_graph

    inputs = tmp / "inputs"
    assert cli_main(["gen", "--n", "20", "--p", "0.3", "--q", "13", "--seed", "5", "--regenerate",
                     "--out", str(inputs)]) == 0
    save_graph(complete_graph(3), inputs / "k3.txt")
    codes_a = _run_all(tmp / "a", inputs)
    codes_b = _run_all(tmp / "b", inputs)
    files = sorted(p.relative_to(tmp / "a") for p in (tmp / "a").rglob("*") if p.is_file())
    same = all(filecmp.cmp(tmp / "a" / f, tmp / "b" / f, shallow=False) for f in files)
    other = sorted(p.relative_to(tmp / "b") for p in (tmp / "b").rglob("*") if p.is_file())
    ok = codes_a == codes_b == [0] * 8 and same and files == other
    return ok, f"{len(files)} files across 8 commands, exit codes {codes_a}, byte-identical={same}"


# --- pytest wrappers ---------------------------------------------------------------


def _check(number, title, fn, capsys, *args):
    ok, detail = fn(*args)
    emit(number, title, ok, detail, capsys)
    assert ok, detail


def test_criterion_1_exact_oracle_agreement(capsys):
    _check(1, "exact oracle agreement", criterion_1, capsys)


def test_criterion_2_fundamental_matrix_identities(capsys):
    _check(2, "fundamental-matrix identities", criterion_2, capsys)


@pytest.mark.slow
def test_criterion_3_scaling_envelope(capsys):
    _check(3, "scaling envelope", criterion_3, capsys)


def test_criterion_4_one_round_resolution_bound(capsys):
    _check(4, "one-round resolution bound", criterion_4, capsys)


def test_criterion_5_mh_uniformity(capsys):
    _check(5, "MH uniformity", criterion_5, capsys)


def test_criterion_6_annealing_stationarity(capsys):
    _check(6, "annealing stationarity", criterion_6, capsys)


@pytest.mark.slow
def test_criterion_7_borda_reproduction(capsys):
    _check(7, "Borda-phase reproduction", criterion_7, capsys)


def test_criterion_8_reduction_regression(capsys):
    _check(8, "six-vertex reduction", criterion_8, capsys)


def test_criterion_9_determinism(capsys, tmp_path):
    _check(9, "determinism", criterion_9, capsys, tmp_path)


if __name__ == "__main__":
    import tempfile

    results = []
    for number, title, fn in (
        (1, "exact oracle agreement", criterion_1),
        (2, "fundamental-matrix identities", criterion_2),
        (3, "scaling envelope", criterion_3),
        (4, "one-round resolution bound", criterion_4),
        (5, "MH uniformity", criterion_5),
        (6, "annealing stationarity", criterion_6),
        (7, "Borda-phase reproduction", criterion_7),
        (8, "six-vertex reduction", criterion_8),
    ):
        ok, detail = fn()
        results.append(emit(number, title, ok, detail))
    with tempfile.TemporaryDirectory() as tmp:
        ok, detail = criterion_9(Path(tmp))
        results.append(emit(9, "determinism", ok, detail))
    print(f"{sum(results)}/{len(results)} criteria passed")
    sys.exit(0 if all(results) else 1)
