"""Greedy/selfish dynamics of the network coloring game.

Each round, every unsatisfied player redraws uniformly from the colors that no
neighbor held in the previous round; satisfied players keep their colors.  All
redraws in a round read the same snapshot.

Randomness layout: a round consumes exactly ``n`` uniforms from the generator,
the ``i``-th one belonging to vertex ``i`` (unused for satisfied vertices), so a
trial is a pure function of its seed.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConvergenceTimeout, InvariantViolation, ValidationError
from .graph import Graph, check_coloring, conflict_edges, max_degree
from .rng import make_rng


@dataclass(frozen=True)
class GameState:
    assignment: np.ndarray
    payoffs: np.ndarray
    round: int = 0

    @property
    def satisfied(self) -> int:
        return int(self.payoffs.sum())

    @property
    def converged(self) -> bool:
        return bool(self.payoffs.all())


@dataclass(frozen=True)
class ConvergenceResult:
    """Outcome of one play-out.  ``rounds`` is T, the number of update rounds."""

    rounds: int
    final: GameState
    initial: np.ndarray
    trajectory: list[tuple[int, int, int]] | None = field(default=None, repr=False)


def payoff_vector(g: Graph, colors) -> np.ndarray:
    """1 for players whose color differs from every neighbor, else 0."""
    colors = check_coloring(g, colors)
    out = np.ones(g.n, dtype=np.int8)
    bad = conflict_edges(g, colors)
    if bad.any():
        e = g.edge_array[bad]
        out[e[:, 0]] = 0
        out[e[:, 1]] = 0
    return out


def make_state(g: Graph, colors, q: int | None = None, round: int = 0) -> GameState:
    colors = check_coloring(g, colors, q).copy()
    colors.setflags(write=False)
    payoffs = payoff_vector(g, colors)
    payoffs.setflags(write=False)
    return GameState(colors, payoffs, round)


def require_palette(g: Graph, q: int, allow_small_q: bool = False) -> None:
    delta = max_degree(g)
    if q < 1:
        raise ValidationError(f"palette size must be positive, got q={q}")
    # an edgeless graph is proper under any palette
    if g.m and q < delta + 2 and not allow_small_q:
        raise ValidationError(
            f"q={q} is below max degree + 2 = {delta + 2}; the dynamics are only guaranteed "
            "to absorb when q >= max degree + 2 (pass allow_small_q=True to experiment anyway)"
        )


def _forbidden(g: Graph, colors: np.ndarray, q: int) -> np.ndarray:
    forb = np.zeros((g.n, q), dtype=bool)
    e = g.edge_array
    if len(e):
        forb[e[:, 0], colors[e[:, 1]]] = True
        forb[e[:, 1], colors[e[:, 0]]] = True
    return forb


def _pick(allowed: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Row-wise uniform pick among True entries of ``allowed`` using uniforms ``u``."""
    counts = allowed.sum(axis=1)
    k = np.minimum((u * counts).astype(np.int64), counts - 1)
    return np.argmax(np.cumsum(allowed, axis=1) > k[:, None], axis=1)


def round_update(g: Graph, state: GameState, q: int, rng, allow_small_q: bool = False) -> GameState:
    """Advance the game by one round.

    Satisfied players keep their colors.  Every unsatisfied player draws
    uniformly from the colors unused by its neighbors in ``state`` and the
    payoffs are recomputed on the result.
    """
    require_palette(g, q, allow_small_q)
    rng = make_rng(rng)
    colors = np.asarray(state.assignment)
    u = rng.random(g.n)
    unsat = np.flatnonzero(state.payoffs == 0)
    if unsat.size == 0:
        return state
    forb = _forbidden(g, colors, q)
    allowed = ~forb[unsat]
    if not allowed.any(axis=1).all():
        raise InvariantViolation("an unsatisfied vertex has no color left to draw (q too small)")
    new = colors.copy()
    new[unsat] = _pick(allowed, u[unsat])
    if forb[unsat, new[unsat]].any():
        raise InvariantViolation("drew a color held by a neighbor in the previous round")
    nxt = make_state(g, new, round=state.round + 1)
    if np.any((state.payoffs == 1) & (nxt.payoffs == 0)):
        raise InvariantViolation("a satisfied vertex became unsatisfied")
    return nxt


def play(g: Graph, q: int, initial, rng, max_rounds: int = 10**6,
         record: bool = False, allow_small_q: bool = False) -> ConvergenceResult:
    """Run the dynamics from a given assignment until every payoff is 1."""
    require_palette(g, q, allow_small_q)
    rng = make_rng(rng)
    state = make_state(g, initial, q)
    traj = [] if record else None

    def note(s):
        if traj is not None:
            traj.append((s.round, s.satisfied, int(conflict_edges(g, s.assignment).sum())))

    note(state)
    start = state.assignment
    while not state.converged:
        if state.round >= max_rounds:
            partial = ConvergenceResult(state.round, state, start, traj)
            raise ConvergenceTimeout(
                f"no proper coloring after {max_rounds} rounds ({state.satisfied}/{g.n} satisfied)",
                result=partial,
            )
        state = round_update(g, state, q, rng, allow_small_q=True)
        note(state)
    return ConvergenceResult(state.round, state, start, traj)


def random_assignment(n: int, q: int, rng) -> np.ndarray:
    return make_rng(rng).integers(0, q, size=n)


def play_to_convergence(g: Graph, q: int, seed, max_rounds: int = 10**6,
                        record: bool = False, allow_small_q: bool = False) -> ConvergenceResult:
    """Uniform random start, then greedy rounds until the coloring is proper.

    Raises
    ------
    ConvergenceTimeout
        If ``max_rounds`` rounds pass first.  The partial result (with its
        trajectory when ``record`` is set) is attached to the exception.
    """
    rng = make_rng(seed)
    require_palette(g, q, allow_small_q)
    start = random_assignment(g.n, q, rng)
    try:
        return play(g, q, start, rng, max_rounds=max_rounds, record=record, allow_small_q=allow_small_q)
    except ConvergenceTimeout as exc:
        exc.seed = seed if not isinstance(seed, np.random.Generator) else None
        raise


def satisfaction_lower_bound(q: int, delta: int) -> float:
    """Worst-case chance that an unsatisfied player is satisfied one round later.

    ``(1 - 1/(q - delta)) ** delta``, valid for ``q >= delta + 2``.
    """
    if delta < 0:
        raise ValidationError(f"max degree must be non-negative, got {delta}")
    if q < delta + 2:
        raise ValidationError(f"bound needs q >= delta + 2, got q={q}, delta={delta}")
    return (1.0 - 1.0 / (q - delta)) ** delta


# --- vectorised many-trial simulation on one small graph --------------------


def _batch_forbidden(g: Graph, colors: np.ndarray, q: int) -> np.ndarray:
    b, n = colors.shape
    forb = np.zeros((b, n, q), dtype=bool)
    e = g.edge_array
    rows = np.arange(b)[:, None]
    if len(e):
        forb[rows, e[None, :, 0], colors[:, e[:, 1]]] = True
        forb[rows, e[None, :, 1], colors[:, e[:, 0]]] = True
    return forb


def _batch_unsat(g: Graph, colors: np.ndarray) -> np.ndarray:
    unsat = np.zeros(colors.shape, dtype=bool)
    e = g.edge_array
    if len(e):
        clash = colors[:, e[:, 0]] == colors[:, e[:, 1]]
        for j, (u, v) in enumerate(g.edges):
            unsat[:, u] |= clash[:, j]
            unsat[:, v] |= clash[:, j]
    return unsat


def simulate_batch(g: Graph, q: int, initial, rng, max_rounds: int = 10**4,
                   allow_small_q: bool = False, track_resolution: bool = False):
    """Play many independent trials at once.

    ``initial`` is a ``(trials, n)`` array of starting assignments.  Returns the
    vector of convergence times T; with ``track_resolution`` also returns
    per-vertex counts ``(unsatisfied_rounds, resolved_next_round)``.
    """
    require_palette(g, q, allow_small_q)
    rng = make_rng(rng)
    colors = np.array(initial, dtype=np.int64, copy=True)
    if colors.ndim != 2 or colors.shape[1] != g.n:
        raise ValidationError(f"initial must have shape (trials, {g.n})")
    trials = colors.shape[0]
    T = np.zeros(trials, dtype=np.int64)
    events = np.zeros(g.n, dtype=np.int64)
    resolved = np.zeros(g.n, dtype=np.int64)
    unsat = _batch_unsat(g, colors)
    active = np.flatnonzero(unsat.any(axis=1))
    rounds = 0
    while active.size:
        if rounds >= max_rounds:
            raise ConvergenceTimeout(f"{active.size} trials still unresolved after {max_rounds} rounds")
        c = colors[active]
        un = unsat[active]
        forb = _batch_forbidden(g, c, q)
        u = rng.random(c.shape)
        bi, vi = np.nonzero(un)
        allowed = ~forb[bi, vi]
        picks = _pick(allowed, u[bi, vi])
        if forb[bi, vi, picks].any():
            raise InvariantViolation("drew a color held by a neighbor in the previous round")
        c[bi, vi] = picks
        new_un = _batch_unsat(g, c)
        if np.any(new_un & ~un):
            raise InvariantViolation("a satisfied vertex became unsatisfied")
        if track_resolution:
            events += un.sum(axis=0)
            resolved += (un & ~new_un).sum(axis=0)
        colors[active] = c
        unsat[active] = new_un
        T[active] += 1
        active = active[new_un.any(axis=1)]
        rounds += 1
    if track_resolution:
        return T, (events, resolved)
    return T


def write_trajectory_csv(result: ConvergenceResult, path, header_lines=()) -> None:
    if result.trajectory is None:
        raise ValidationError("result was produced without record=True")
    with open(Path(path), "w", newline="", encoding="utf-8") as fh:
        for line in header_lines:
            fh.write(f"# {line}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["round", "satisfied_count", "conflict_edge_count"])
        w.writerows(result.trajectory)
