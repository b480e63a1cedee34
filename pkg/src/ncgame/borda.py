"""Post-resolution Borda phase: welfare, available colors, network reduction.

A preference profile ``X`` is an ``(n, q)`` integer array; row ``i`` lists the
colors from most to least preferred.  The color at index ``k`` is worth
``q - 1 - k`` Borda points to player ``i``.

Once a proper coloring exists, each player may only move to colors it ranks at
least as high as its current one and not permanently claimed by a neighbor who
already left.  A player whose best remaining option is its current color leaves
the game and freezes that color.  Reduction and uniform proper resampling
alternate until nobody is left.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import InvariantViolation, ValidationError
from .graph import Graph, check_coloring, empty_network, is_proper
from .rng import derive_seed, make_rng


def check_profile(X, q: int | None = None) -> np.ndarray:
    """Validate that every row of ``X`` is a permutation of ``0..q-1``."""
    X = np.asarray(X, dtype=np.int64)
    if X.ndim != 2:
        raise ValidationError(f"preference profile must be 2-D, got shape {X.shape}")
    if q is None:
        q = X.shape[1]
    if X.shape[1] != q:
        raise ValidationError(f"preference rows have {X.shape[1]} entries, palette has {q}")
    target = np.arange(q)
    for i, row in enumerate(X):
        if not np.array_equal(np.sort(row), target):
            raise ValidationError(f"preferences of vertex {i} are not a permutation of 0..{q - 1}: {row.tolist()}")
    return X


def rank_matrix(X) -> np.ndarray:
    """``ranks[i, c]`` is the position of color ``c`` in row ``i`` of ``X``."""
    X = np.asarray(X, dtype=np.int64)
    ranks = np.empty_like(X)
    rows = np.arange(X.shape[0])[:, None]
    ranks[rows, X] = np.arange(X.shape[1])[None, :]
    return ranks


def borda_points(X, colors) -> np.ndarray:
    X = np.asarray(X)
    colors = np.asarray(colors, dtype=np.int64)
    q = X.shape[1]
    if colors.size == 0:
        return np.zeros(0, dtype=np.int64)
    return q - 1 - rank_matrix(X)[np.arange(colors.size), colors]


def borda_welfare(q: int, X, L) -> int:
    """h(L) = (q - 1) n - sum_k rank_k(L[k])."""
    X = check_profile(X, q)
    L = np.asarray(L, dtype=np.int64)
    if L.shape != (X.shape[0],):
        raise ValidationError(f"coloring length {L.size} does not match {X.shape[0]} preference rows")
    if L.size and (L.min() < 0 or L.max() >= q):
        raise ValidationError("coloring uses colors outside the palette")
    return int(borda_points(X, L).sum())


def available_colors(X, L) -> list[list[int]]:
    """Each player's preference prefix down to and including its current color."""
    X = np.asarray(X, dtype=np.int64)
    L = np.asarray(L, dtype=np.int64)
    if X.shape[0] != L.size:
        raise ValidationError(f"{X.shape[0]} preference rows for {L.size} players")
    out = []
    for i, (row, c) in enumerate(zip(X.tolist(), L.tolist())):
        try:
            k = row.index(c)
        except ValueError:
            raise ValidationError(f"color {c} of vertex {i} is not in its preference list") from None
        out.append(row[: k + 1])
    return out


def truncate_available(avail, L) -> list[list[int]]:
    """Cut each list just after the player's current color."""
    out = []
    for i, (lst, c) in enumerate(zip(avail, np.asarray(L).tolist())):
        try:
            k = lst.index(c)
        except ValueError:
            raise InvariantViolation(f"current color {c} of vertex {i} is missing from its available list") from None
        out.append(list(lst[: k + 1]))
    return out


@dataclass(frozen=True)
class ReductionOutcome:
    graph: Graph
    prefs: np.ndarray
    colors: np.ndarray
    avail: list[list[int]]
    payoff_gained: int
    quitters: list[int]       # original ids, in departure order
    ids: np.ndarray           # original id of each remaining vertex
    quit_colors: list[int]    # frozen color of each quitter

    @property
    def remaining(self) -> int:
        return int(self.ids.size)


def reduce_network(A: Graph, X, L, avail, ids=None) -> ReductionOutcome:
    """Remove every player whose best remaining option is its current color.

    Runs in passes: each pass finds all qualifying players (ascending index)
    against the lists as they stood at the start of the pass, then deletes
    their colors from the remaining neighbors' lists.  Repeats until a pass
    finds nobody.  Indices are compacted; ``ids`` maps back to the caller's
    numbering.
    """
    X = np.asarray(X, dtype=np.int64)
    n = A.n
    L = check_coloring(A, L) if n else np.zeros(0, dtype=np.int64)
    if X.shape[0] != n or len(avail) != n:
        raise ValidationError(f"inconsistent sizes: graph {n}, prefs {X.shape[0]}, lists {len(avail)}")
    if n and not is_proper(A, L):
        raise ValidationError("network reduction needs a proper coloring")
    ids = np.arange(n) if ids is None else np.asarray(ids, dtype=np.int64)
    if ids.size != n:
        raise ValidationError(f"{ids.size} ids for {n} vertices")
    q = X.shape[1] if X.ndim == 2 and X.shape[0] else 0
    lists = truncate_available(avail, L)
    ranks = rank_matrix(X) if n else X
    alive = np.ones(n, dtype=bool)
    colors = L.tolist()
    payoff = 0
    quitters, quit_colors = [], []
    while True:
        batch = []
        for i in range(n):
            if not alive[i]:
                continue
            if not lists[i]:
                raise InvariantViolation(f"vertex {int(ids[i])} has an empty available list")
            if lists[i][0] == colors[i]:
                batch.append(i)
        if not batch:
            break
        for i in batch:
            alive[i] = False
            payoff += q - 1 - int(ranks[i, colors[i]])
            quitters.append(int(ids[i]))
            quit_colors.append(colors[i])
        for i in batch:
            c = colors[i]
            for j in A.adjacency[i]:
                if alive[j] and c in lists[j]:
                    lists[j].remove(c)
    keep = np.flatnonzero(alive)
    graph = A.subgraph(keep) if keep.size else empty_network()
    return ReductionOutcome(
        graph=graph,
        prefs=X[keep] if n else X,
        colors=L[keep],
        avail=[lists[k] for k in keep],
        payoff_gained=payoff,
        quitters=quitters,
        ids=ids[keep],
        quit_colors=quit_colors,
    )


class PhaseCapExceeded(InvariantViolation):
    """The reduce/resample loop ran past its phase budget without emptying the network."""

    def __init__(self, message, trace):
        super().__init__(message)
        self.trace = trace


@dataclass(frozen=True)
class LocalRun:
    total_welfare: int
    trace: list[tuple[int, int, int]]   # (phase, welfare so far, vertices remaining)
    final_colors: np.ndarray
    departure_order: list[int]
    frozen: list[int] = field(default_factory=list)   # ids that left because nobody could move


def is_frozen(A: Graph, L, avail) -> bool:
    """True when no player can switch to any other color in its list.

    Every better color of every player is held by a neighbor, so the
    resampler can never move again and nobody will ever qualify to quit.
    """
    L = np.asarray(L).tolist()
    for i, lst in enumerate(avail):
        held = {L[j] for j in A.adjacency[i]}
        if any(c != L[i] and c not in held for c in lst):
            return False
    return True


def local_optimal_run(A0: Graph, X0, L0, q: int, mh_steps: int = 500, seed=0,
                      mode: str = "standard", phase_cap: int | None = None) -> LocalRun:
    """Alternate network reduction and uniform proper resampling until everyone has quit.

    The trace starts with the welfare of ``L0`` (phase 0) and then records
    quitter payoff plus the current points of the remaining players after
    every reduction.

    If the players left after a reduction are frozen (see :func:`is_frozen`),
    they keep their colors and leave together in one final phase; their ids
    are reported in ``frozen``.  The phase cap only guards the other case.
    """
    from .samplers import mh_run

    X0 = check_profile(X0, q)
    L0 = check_coloring(A0, L0, q)
    if X0.shape[0] != A0.n:
        raise ValidationError(f"{X0.shape[0]} preference rows for {A0.n} vertices")
    if not is_proper(A0, L0):
        raise ValidationError("the starting coloring must be proper")
    rng = make_rng(seed)
    cap = 10 * A0.n if phase_cap is None else phase_cap
    final = L0.copy()
    graph, prefs, colors, ids = A0, X0, L0.copy(), np.arange(A0.n)
    avail = available_colors(X0, L0)
    total = 0
    trace = [(0, int(borda_points(X0, L0).sum()), A0.n)]
    order: list[int] = []
    stuck: list[int] = []
    phase = 0
    while True:
        out = reduce_network(graph, prefs, colors, avail, ids)
        phase += 1
        total += out.payoff_gained
        order.extend(out.quitters)
        welfare = total + int(borda_points(out.prefs, out.colors).sum())
        if welfare < trace[-1][1]:
            raise InvariantViolation(f"welfare fell from {trace[-1][1]} to {welfare} in phase {phase}")
        trace.append((phase, welfare, out.remaining))
        if out.remaining == 0:
            break
        if is_frozen(out.graph, out.colors, out.avail):
            phase += 1
            stuck = out.ids.tolist()
            total += int(borda_points(out.prefs, out.colors).sum())
            order.extend(stuck)
            final[out.ids] = out.colors
            trace.append((phase, total, 0))
            break
        if phase >= cap:
            raise PhaseCapExceeded(
                f"{out.remaining} players still in the game after {phase} phases (cap {cap})", trace
            )
        colors = mh_run(out.graph, out.colors, out.avail, mh_steps, mode=mode, seed=rng)
        final[out.ids] = colors
        graph, prefs, ids, avail = out.graph, out.prefs, out.ids, out.avail
    expected = int(borda_points(X0, final).sum())
    if expected != total:
        raise InvariantViolation(f"quitter payoffs {total} disagree with final welfare {expected}")
    if not is_proper(A0, final):
        raise InvariantViolation("final coloring is not proper")
    return LocalRun(total, trace, final, order, stuck)


@dataclass(frozen=True)
class OptimumEstimate:
    mean: float
    max: int
    samples: np.ndarray
    frozen_runs: int = 0    # runs that ended with players unable to move


def estimate_expected_optimum(A0: Graph, X0, L0, q: int, k: int = 1000, seed=0,
                              mh_steps: int = 500, mode: str = "standard") -> OptimumEstimate:
    """Sample mean and max of ``k`` independent local runs (repetition r uses child seed r)."""
    if k < 1:
        raise ValidationError("k must be at least 1")
    runs = [local_optimal_run(A0, X0, L0, q, mh_steps=mh_steps, seed=derive_seed(seed, r), mode=mode)
            for r in range(k)]
    samples = np.array([r.total_welfare for r in runs], dtype=np.int64)
    return OptimumEstimate(float(samples.mean()), int(samples.max()), samples,
                           sum(1 for r in runs if r.frozen))


# --- files -----------------------------------------------------------------


def save_profile(X, path, header_lines=()) -> None:
    with open(Path(path), "w", newline="", encoding="utf-8") as fh:
        for line in header_lines:
            fh.write(f"# {line}\n")
        csv.writer(fh, lineterminator="\n").writerows(np.asarray(X).tolist())


def load_profile(path, q: int | None = None) -> np.ndarray:
    rows = []
    with open(Path(path), encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            try:
                rows.append([int(x) for x in line.split(",")])
            except ValueError:
                raise ValidationError(f"{path}:{lineno}: non-integer preference entry: {line!r}") from None
    if not rows or len({len(r) for r in rows}) != 1:
        raise ValidationError(f"{path}: preference rows are missing or ragged")
    return check_profile(np.array(rows, dtype=np.int64), q)


def write_trace_csv(run: LocalRun, path, header_lines=()) -> None:
    with open(Path(path), "w", newline="", encoding="utf-8") as fh:
        for line in header_lines:
            fh.write(f"# {line}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["phase", "welfare", "vertices_remaining"])
        w.writerows(run.trace)
