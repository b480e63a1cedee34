"""Command-line drivers.

Every command writes its data files under ``--out`` (default ``.``).  Each file
opens with ``#`` metadata lines (package version, command, resolved config,
seed), JSON files carry the same under ``"meta"``.  Nothing time-dependent is
written, so reruns with the same config are byte-identical.

Exit codes: 0 success, 1 invalid input, 2 internal invariant violation.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .absorbing import analyze, dump_chain_csv, limit_distribution_check, payoff_projection_monotone
from .borda import (
    available_colors,
    borda_welfare,
    estimate_expected_optimum,
    load_profile,
    local_optimal_run,
    reduce_network,
    save_profile,
    write_trace_csv,
)
from .convergence import (
    LEMMA2_C,
    SweepConfig,
    prop3_tail_curve,
    run_sweep,
    scaling_report,
    write_samples_csv,
)
from .errors import ConvergenceTimeout, InvariantViolation, ValidationError
from .game import play_to_convergence, write_trajectory_csv
from .graph import load_coloring, load_graph, max_degree, save_coloring, save_graph
from .instances import borda_instance
from .samplers import INCREASING_SCHEDULES, REFERENCE_RESULTS, TemperatureSchedule, sa_run

# Per-command defaults; a config file overrides these, flags override both.
DEFAULTS = {
    "gen": {"n": 20, "p": 0.3, "q": 13, "seed": 0, "regenerate": False},
    "play": {"seed": 0, "max_rounds": 10**6},
    "exact": {"t_max": 200, "dump_cap": 10_000},
    "sweep": {"sizes": "8,16,32,64,128,256", "degree": 6.0, "trials": 500, "seed": 0,
              "epsilon": 0.05, "max_rounds": 10**6},
    "reduce": {},
    "localopt": {"steps": 500, "seed": 0, "mode": "standard"},
    "estimate": {"steps": 500, "seed": 0, "mode": "standard", "trials": 1000},
    "anneal": {"steps": 200_000, "seed": 0, "mode": "standard", "schedule": "all"},
}

_INT_KEYS = {"n", "q", "seed", "trials", "steps", "max_rounds", "t_max", "dump_cap"}
_FLOAT_KEYS = {"p", "epsilon", "degree"}
_BOOL_KEYS = {"regenerate", "allow_small_q"}


def read_config(path) -> dict:
    """Flat ``key = value`` file; ``#`` starts a comment."""
    out = {}
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValidationError(f"{path}:{lineno}: expected key=value, got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key.replace("-", "_")] = value
    return out


def _coerce(key, value):
    if value is None:
        return None
    try:
        if key in _INT_KEYS:
            return int(value)
        if key in _FLOAT_KEYS:
            return float(value)
        if key in _BOOL_KEYS:
            if isinstance(value, bool):
                return value
            return str(value).lower() in ("1", "true", "yes", "on")
    except ValueError:
        raise ValidationError(f"bad value for {key}: {value!r}") from None
    return value


def resolve(args: argparse.Namespace) -> dict:
    cfg = dict(DEFAULTS.get(args.command, {}))
    if args.config:
        cfg.update(read_config(args.config))
    for key, value in vars(args).items():
        if key in ("command", "config", "func") or value is None:
            continue
        if key in _BOOL_KEYS and value is False:
            continue
        cfg[key] = value
    return {k: _coerce(k, v) for k, v in sorted(cfg.items())}


def _meta(command: str, cfg: dict) -> dict:
    # the output directory does not affect results, so it stays out of the record
    cfg = {k: v for k, v in cfg.items() if k != "out"}
    return {"package": "ncgame", "version": __version__, "command": command,
            "config": cfg, "seed": cfg.get("seed")}


def _header(command: str, cfg: dict) -> list[str]:
    meta = _meta(command, cfg)
    return [
        f"ncgame {meta['version']}",
        f"command: {command}",
        f"config: {json.dumps(meta['config'], sort_keys=True)}",
        f"seed: {meta['seed']}",
    ]


def _write_json(path: Path, command: str, cfg: dict, payload: dict) -> None:
    # metadata first, then the payload in sorted key order
    doc = {"meta": _meta(command, cfg), **dict(sorted(payload.items()))}
    path.write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")


def _out_dir(cfg) -> Path:
    out = Path(cfg.get("out") or ".")
    out.mkdir(parents=True, exist_ok=True)
    return out


def _need(cfg, *keys):
    missing = [k for k in keys if cfg.get(k) is None]
    if missing:
        raise ValidationError("missing required option(s): " + ", ".join("--" + k.replace("_", "-") for k in missing))


def _load_game(cfg, need_prefs=True):
    _need(cfg, "graph", "coloring", *(["prefs"] if need_prefs else []))
    g = load_graph(cfg["graph"])
    colors = load_coloring(cfg["coloring"])
    prefs = load_profile(cfg["prefs"], cfg.get("q")) if need_prefs else None
    q = cfg.get("q") or (prefs.shape[1] if prefs is not None else None)
    return g, prefs, colors, q


# --- commands ----------------------------------------------------------------


def cmd_gen(cfg):
    inst = borda_instance(cfg["n"], cfg["p"], cfg["q"], cfg["seed"], regenerate=cfg["regenerate"])
    out = _out_dir(cfg)
    head = _header("gen", cfg)
    save_graph(inst.graph, out / "graph.txt", header="\n".join(head))
    save_profile(inst.prefs, out / "prefs.csv", head)
    save_coloring(inst.colors, out / "coloring.txt", header="\n".join(head))
    _write_json(out / "instance.json", "gen", cfg, {
        "n": inst.graph.n, "edges": inst.graph.m, "max_degree": max_degree(inst.graph),
        "q": inst.q, "graph_attempts": inst.attempts,
        "initial_welfare": borda_welfare(inst.q, inst.prefs, inst.colors),
    })


def cmd_play(cfg):
    _need(cfg, "graph", "q")
    g = load_graph(cfg["graph"])
    res = play_to_convergence(g, cfg["q"], cfg["seed"], max_rounds=cfg["max_rounds"], record=True,
                              allow_small_q=bool(cfg.get("allow_small_q")))
    out = _out_dir(cfg)
    head = _header("play", cfg)
    write_trajectory_csv(res, out / "trajectory.csv", head)
    save_coloring(res.final.assignment, out / "coloring.txt", header="\n".join(head))
    _write_json(out / "play.json", "play", cfg, {
        "rounds": res.rounds, "initial": res.initial.tolist(), "final": res.final.assignment.tolist(),
    })


def cmd_exact(cfg):
    _need(cfg, "graph", "q")
    g = load_graph(cfg["graph"])
    a = analyze(g, cfg["q"], allow_small_q=bool(cfg.get("allow_small_q")))
    lim = limit_distribution_check(a.chain, t_max=cfg["t_max"])
    mean, var = a.uniform_start()
    states = []
    for row, s in enumerate(a.chain.transient):
        states.append({
            "state": int(s), "colors": a.space.states[s].tolist(),
            "expected_steps": float(a.summary.expected_steps[row]),
            "second_moment": float(a.summary.second_moment[row]),
            "variance": float(a.summary.variance[row]),
        })
    classes = [{"class": list(k), "expected_steps": v[0], "variance": v[1]} for k, v in sorted(a.by_class().items())]
    out = _out_dir(cfg)
    _write_json(out / "exact.json", "exact", cfg, {
        "n_states": len(a.space), "n_transient": a.chain.t, "n_absorbing": int(a.chain.absorbing.size),
        "transient_states": states, "classes": classes,
        "uniform_start": {"expected_steps": mean, "variance": var},
        "limit_check": {"steps": lim.steps, "max_entry": lim.max_entry,
                        "min_absorbed_mass": lim.min_absorbed_mass, "passed": lim.passed},
        "payoff_monotone": payoff_projection_monotone(g, a.space, a.chain),
    })
    if len(a.space) <= cfg["dump_cap"]:
        dump_chain_csv(a.space, a.chain, out / "chain.csv", max_states=cfg["dump_cap"],
                       header_lines=_header("exact", cfg))
    if not lim.passed:
        raise InvariantViolation(f"Q^t did not decay below 1e-8 by t={cfg['t_max']}")


def cmd_sweep(cfg):
    sizes = tuple(int(s) for s in str(cfg["sizes"]).split(","))
    if cfg.get("p") is not None:
        scfg = SweepConfig(sizes, cfg["trials"], cfg["seed"], family="er_p", param=cfg["p"],
                           q=cfg.get("q"), max_rounds=cfg["max_rounds"])
    else:
        scfg = SweepConfig(sizes, cfg["trials"], cfg["seed"], family="er_degree", param=cfg["degree"],
                           q=cfg.get("q"), max_rounds=cfg["max_rounds"])
    samples = run_sweep(scfg)
    out = _out_dir(cfg)
    write_samples_csv(samples, out / "sweep.csv", _header("sweep", cfg))
    payload = {"lemma2_c": LEMMA2_C}
    if len(sizes) >= 2 and cfg["trials"] >= 100:
        payload["scaling"] = scaling_report(samples, epsilon=cfg["epsilon"]).to_dict()
    largest = [s for s in samples if s.n == sizes[-1]]
    c_hat, rows = prop3_tail_curve(largest)
    payload["quantiles"] = {
        "n": sizes[-1], "c_hat": c_hat if np.isfinite(c_hat) else None,
        "rows": [r.__dict__ for r in rows],
    }
    _write_json(out / "report.json", "sweep", cfg, payload)


def cmd_reduce(cfg):
    g, prefs, colors, q = _load_game(cfg)
    res = reduce_network(g, prefs, colors, available_colors(prefs, colors))
    out = _out_dir(cfg)
    head = _header("reduce", cfg)
    if res.remaining:
        save_graph(res.graph, out / "reduced_graph.txt", header="\n".join(head))
    _write_json(out / "reduce.json", "reduce", cfg, {
        "quitters": res.quitters, "quit_colors": res.quit_colors, "payoff_gained": res.payoff_gained,
        "remaining_ids": res.ids.tolist(), "remaining_colors": res.colors.tolist(),
        "remaining_edges": res.graph.m, "available": res.avail,
    })


def cmd_localopt(cfg):
    g, prefs, colors, q = _load_game(cfg)
    run = local_optimal_run(g, prefs, colors, q, mh_steps=cfg["steps"], seed=cfg["seed"], mode=cfg["mode"])
    out = _out_dir(cfg)
    write_trace_csv(run, out / "trace.csv", _header("localopt", cfg))
    _write_json(out / "localopt.json", "localopt", cfg, {
        "total_welfare": run.total_welfare, "phases": len(run.trace) - 1,
        "final_colors": run.final_colors.tolist(), "departure_order": run.departure_order,
        "frozen": run.frozen, "reference": {"single_run_welfare": 209},
    })


def cmd_estimate(cfg):
    g, prefs, colors, q = _load_game(cfg)
    est = estimate_expected_optimum(g, prefs, colors, q, k=cfg["trials"], seed=cfg["seed"],
                                    mh_steps=cfg["steps"], mode=cfg["mode"])
    out = _out_dir(cfg)
    with open(out / "estimate.csv", "w", newline="", encoding="utf-8") as fh:
        for line in _header("estimate", cfg):
            fh.write(f"# {line}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["repetition", "welfare", "running_mean"])
        running = np.cumsum(est.samples) / np.arange(1, est.samples.size + 1)
        for r, (v, mu) in enumerate(zip(est.samples.tolist(), running.tolist())):
            w.writerow([r, v, repr(mu)])
    _write_json(out / "estimate.json", "estimate", cfg, {
        "k": int(est.samples.size), "mean": est.mean, "max": est.max, "min": int(est.samples.min()),
        "ceiling": (q - 1) * g.n, "frozen_runs": est.frozen_runs, "reference": {"mean": 208.905, "max": 216},
    })


def cmd_anneal(cfg):
    g, prefs, colors, q = _load_game(cfg)
    names = INCREASING_SCHEDULES if cfg["schedule"] == "all" else (cfg["schedule"],)
    out = _out_dir(cfg)
    head = _header("anneal", cfg)
    records = {}
    for name in names:
        tr = sa_run(g, prefs, colors, q, cfg["steps"], TemperatureSchedule(name), mode=cfg["mode"], seed=cfg["seed"])
        tr.write_csv(out / f"anneal_{name}.csv", head)
        records[name] = {
            "best_welfare": tr.best_welfare, "reaching_time": tr.reaching_time,
            "best_assignment": tr.best_assignment.tolist(),
            "reference": dict(zip(("best_welfare", "reaching_time"), REFERENCE_RESULTS.get(name, (None, None)))),
        }
    _write_json(out / "anneal.json", "anneal", cfg, {"schedules": records, "ceiling": (q - 1) * g.n})


COMMANDS = {
    "gen": cmd_gen, "play": cmd_play, "exact": cmd_exact, "sweep": cmd_sweep, "reduce": cmd_reduce,
    "localopt": cmd_localopt, "estimate": cmd_estimate, "anneal": cmd_anneal,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key=value file; flags override its values")
    common.add_argument("--out", help="output directory (default: current directory)")
    common.add_argument("--seed", type=int)
    common.add_argument("--q", type=int, help="palette size")

    game = argparse.ArgumentParser(add_help=False)
    game.add_argument("--graph", help="edge-list file")
    game.add_argument("--prefs", help="preference profile CSV")
    game.add_argument("--coloring", help="proper starting coloring, one color per line")

    mcmc = argparse.ArgumentParser(add_help=False)
    mcmc.add_argument("--steps", type=int, help="MH steps per phase (localopt/estimate) or annealing iterations")
    mcmc.add_argument("--mode", choices=["standard", "literal"])

    parser = argparse.ArgumentParser(prog="ncgame", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"ncgame {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", parents=[common], help="random instance: graph, preferences, proper coloring")
    p.add_argument("--n", type=int)
    p.add_argument("--p", type=float)
    p.add_argument("--regenerate", action="store_true", help="redraw the graph until q >= max degree + 2")

    p = sub.add_parser("play", parents=[common], help="greedy dynamics from a uniform random start")
    p.add_argument("--graph")
    p.add_argument("--max-rounds", dest="max_rounds", type=int)
    p.add_argument("--allow-small-q", dest="allow_small_q", action="store_true")

    p = sub.add_parser("exact", parents=[common], help="absorbing-chain analysis on a small graph")
    p.add_argument("--graph")
    p.add_argument("--t-max", dest="t_max", type=int)
    p.add_argument("--allow-small-q", dest="allow_small_q", action="store_true")

    p = sub.add_parser("sweep", parents=[common], help="convergence-time scaling sweep over G(n, p)")
    p.add_argument("--sizes", help="comma-separated, strictly increasing")
    p.add_argument("--degree", type=float, help="expected degree, p = degree / (n - 1)")
    p.add_argument("--p", type=float, help="fixed edge probability (overrides --degree)")
    p.add_argument("--trials", type=int)
    p.add_argument("--epsilon", type=float)
    p.add_argument("--max-rounds", dest="max_rounds", type=int)

    sub.add_parser("reduce", parents=[common, game], help="one network reduction")
    sub.add_parser("localopt", parents=[common, game, mcmc], help="alternate reduction and MH until empty")
    p = sub.add_parser("estimate", parents=[common, game, mcmc], help="repeat localopt, report mean and max")
    p.add_argument("--trials", type=int, help="number of repetitions k")
    p = sub.add_parser("anneal", parents=[common, game, mcmc], help="simulated annealing over welfare")
    p.add_argument("--schedule", choices=["log1p", "linear", "quadratic", "all"])
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve(args)
        COMMANDS[args.command](cfg)
    except (ValidationError, OSError) as exc:
        print(f"ncgame {args.command}: error: {exc}", file=sys.stderr)
        return 1
    except (InvariantViolation, ConvergenceTimeout) as exc:
        print(f"ncgame {args.command}: internal invariant violated: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
