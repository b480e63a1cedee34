r"""Exact absorbing Markov chain for the coloring game on small graphs.

The chain lives on all :math:`q^n` color configurations (the payoff vector
alone is not Markov, since redraw probabilities depend on actual colors).
Proper configurations are absorbing.  With the canonical blocks ``Q``
(transient -> transient) and ``R`` (transient -> absorbing):

* ``N = (I - Q)^{-1}`` is the fundamental matrix,
* ``n = N 1`` is the expected number of rounds to absorption,
* ``E[T^2] = (2N - I) n`` follows from first-step analysis, so
  ``Var[T] = (2N - I) n - n^2``.

Configurations are indexed lexicographically with vertex 0 as the most
significant digit: ``index = sum(c[i] * q**(n-1-i))``.
"""

from __future__ import annotations

import csv
import itertools
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.linalg

from .errors import InvariantViolation, ValidationError
from .game import require_palette
from .graph import Graph, conflict_edges

DEFAULT_STATE_CAP = 200_000
# Dense Q and R blocks; beyond this many matrix entries we refuse rather than swap.
DENSE_ENTRY_CAP = 50_000_000


@dataclass(frozen=True)
class StateSpace:
    n: int
    q: int
    states: np.ndarray          # (q**n, n) configurations
    absorbing_mask: np.ndarray  # True where the configuration is proper

    def __len__(self):
        return self.states.shape[0]

    def index(self, colors) -> int:
        idx = 0
        for c in colors:
            idx = idx * self.q + int(c)
        return idx


@dataclass(frozen=True)
class CanonicalChain:
    Q: np.ndarray
    R: np.ndarray
    transient: np.ndarray   # state ids of the rows/cols of Q
    absorbing: np.ndarray   # state ids of the columns of R

    @property
    def t(self) -> int:
        return self.Q.shape[0]

    def canonical_matrix(self) -> np.ndarray:
        t, a = self.R.shape
        P = np.zeros((t + a, t + a))
        P[:t, :t] = self.Q
        P[:t, t:] = self.R
        P[t:, t:] = np.eye(a)
        return P


@dataclass(frozen=True)
class AbsorptionSummary:
    expected_steps: np.ndarray
    second_moment: np.ndarray
    variance: np.ndarray


def enumerate_states(g: Graph, q: int, cap: int = DEFAULT_STATE_CAP) -> StateSpace:
    size = q ** g.n
    if size > cap:
        raise ValidationError(f"state space has q^n = {q}^{g.n} = {size} configurations, above cap {cap}")
    states = np.array(list(itertools.product(range(q), repeat=g.n)), dtype=np.int64).reshape(size, g.n)
    e = g.edge_array
    if len(e):
        mask = ~(states[:, e[:, 0]] == states[:, e[:, 1]]).any(axis=1)
    else:
        mask = np.ones(size, dtype=bool)
    states.setflags(write=False)
    mask.setflags(write=False)
    return StateSpace(g.n, q, states, mask)


def _row(g: Graph, q: int, colors: np.ndarray):
    """Yield ``(target_index, probability)`` for one transient configuration."""
    bad = conflict_edges(g, colors)
    unsat = sorted({int(v) for v in g.edge_array[bad].ravel()})
    options = []
    for i in unsat:
        used = {int(colors[j]) for j in g.adjacency[i]}
        options.append([c for c in range(q) if c not in used])
    weights = [q ** (g.n - 1 - i) for i in unsat]
    moving = set(unsat)
    base = sum(int(c) * q ** (g.n - 1 - i) for i, c in enumerate(colors) if i not in moving)
    prob = 1.0
    for opt in options:
        prob /= len(opt)
    for combo in itertools.product(*options):
        yield base + sum(w * c for w, c in zip(weights, combo)), prob


def build_chain(g: Graph, q: int, cap: int = DEFAULT_STATE_CAP,
                allow_small_q: bool = False) -> tuple[StateSpace, CanonicalChain]:
    """Enumerate configurations and assemble the canonical ``Q``/``R`` blocks."""
    require_palette(g, q, allow_small_q)
    space = enumerate_states(g, q, cap)
    transient = np.flatnonzero(~space.absorbing_mask)
    absorbing = np.flatnonzero(space.absorbing_mask)
    t, a = transient.size, absorbing.size
    if t * (t + a) > DENSE_ENTRY_CAP:
        raise ValidationError(f"{t} transient states need {t * (t + a)} dense entries, above {DENSE_ENTRY_CAP}")
    pos = np.full(len(space), -1, dtype=np.int64)
    pos[transient] = np.arange(t)
    pos[absorbing] = np.arange(a)
    Q = np.zeros((t, t))
    R = np.zeros((t, a))
    for row, s in enumerate(transient):
        for target, p in _row(g, q, space.states[s]):
            if space.absorbing_mask[target]:
                R[row, pos[target]] += p
            else:
                Q[row, pos[target]] += p
    if t:
        sums = Q.sum(axis=1) + R.sum(axis=1)
        if np.max(np.abs(sums - 1.0)) > 1e-12:
            raise InvariantViolation("transition rows do not sum to 1")
    for arr in (Q, R, transient, absorbing):
        arr.setflags(write=False)
    return space, CanonicalChain(Q, R, transient, absorbing)


def fundamental_matrix(chain: CanonicalChain, tol: float = 1e-10) -> np.ndarray:
    """``N = (I - Q)^{-1}`` by LU with partial pivoting; residual checked against ``tol``."""
    t = chain.t
    if t == 0:
        return np.zeros((0, 0))
    A = np.eye(t) - chain.Q
    try:
        N = scipy.linalg.solve(A, np.eye(t))
    except (scipy.linalg.LinAlgError, ValueError) as exc:
        raise InvariantViolation(f"I - Q is singular; the chain is not absorbing ({exc})") from exc
    resid = np.max(np.abs(N @ A - np.eye(t)))
    if not np.isfinite(resid) or resid > tol:
        raise InvariantViolation(f"I - Q is numerically singular (residual {resid:.3g})")
    if N.min() < -tol:
        raise InvariantViolation("fundamental matrix has negative entries")
    return np.clip(N, 0.0, None)


def expected_absorption(N: np.ndarray) -> np.ndarray:
    return np.asarray(N).sum(axis=1)


def absorption_variance(N: np.ndarray, n: np.ndarray, clamp: float = 1e-9) -> AbsorptionSummary:
    N = np.asarray(N, dtype=float)
    n = np.asarray(n, dtype=float)
    if N.ndim != 2 or N.shape[0] != N.shape[1] or n.shape != (N.shape[0],):
        raise ValidationError(f"shape mismatch: N {N.shape}, n {n.shape}")
    second = (2.0 * N - np.eye(N.shape[0])) @ n
    var = second - n ** 2
    if var.size and var.min() < -clamp:
        raise InvariantViolation(f"negative variance {var.min():.3g}")
    return AbsorptionSummary(n, second, np.maximum(var, 0.0))


@dataclass(frozen=True)
class LimitReport:
    steps: list[int]
    max_entry: list[float]
    min_absorbed_mass: list[float]
    passed: bool


def limit_distribution_check(chain: CanonicalChain, t_max: int = 200, tol: float = 1e-8) -> LimitReport:
    """Track ``max(Q^t)`` for t = 1, 2, 4, ... (and ``t_max``).

    Passes when the largest entry of ``Q^t`` falls below ``tol`` and every
    transient row has absorbed at least ``1 - tol`` of its mass.
    """
    if chain.t == 0:
        return LimitReport([0], [0.0], [1.0], True)
    steps, max_entry, mass = [], [], []
    power = chain.Q.copy()
    t = 1
    checkpoints = []
    while t <= t_max:
        checkpoints.append(t)
        t *= 2
    if checkpoints[-1] != t_max:
        checkpoints.append(t_max)
    current = 1
    for cp in checkpoints:
        if cp != current:
            # reach cp from current by squaring where possible, then one product
            while current * 2 <= cp:
                power = power @ power
                current *= 2
            if current != cp:
                power = power @ np.linalg.matrix_power(chain.Q, cp - current)
                current = cp
        steps.append(cp)
        max_entry.append(float(power.max()))
        mass.append(float(1.0 - power.sum(axis=1).max()))
    passed = max_entry[-1] < tol and mass[-1] >= 1.0 - tol
    return LimitReport(steps, max_entry, mass, passed)


def satisfied_mask(g: Graph, colors) -> int:
    """Bitmask of satisfied vertices (bit i for vertex i)."""
    colors = np.asarray(colors)
    unsat = set(g.edge_array[conflict_edges(g, colors)].ravel().tolist())
    return sum(1 << i for i in range(g.n) if i not in unsat)


def payoff_projection_monotone(g: Graph, space: StateSpace, chain: CanonicalChain) -> bool:
    """True iff no positive-probability transition loses a satisfied vertex."""
    masks = np.array([satisfied_mask(g, s) for s in space.states], dtype=object)
    for block, cols in ((chain.Q, chain.transient), (chain.R, chain.absorbing)):
        rows, targets = np.nonzero(block > 0)
        for r, c in zip(rows, targets):
            src = masks[chain.transient[r]]
            dst = masks[cols[c]]
            if src & ~dst:
                return False
    return True


def canonical_class(colors) -> tuple[int, ...]:
    """Relabel colors by order of first appearance; the dynamics are symmetric under relabelling."""
    seen: dict[int, int] = {}
    return tuple(seen.setdefault(int(c), len(seen)) for c in colors)


@dataclass(frozen=True)
class ExactAnalysis:
    space: StateSpace
    chain: CanonicalChain
    N: np.ndarray
    summary: AbsorptionSummary

    def for_state(self, colors) -> tuple[float, float]:
        """(E[T], Var[T]) when the game starts at ``colors``."""
        s = self.space.index(colors)
        if self.space.absorbing_mask[s]:
            return 0.0, 0.0
        row = int(np.searchsorted(self.chain.transient, s))
        return float(self.summary.expected_steps[row]), float(self.summary.variance[row])

    def uniform_start(self) -> tuple[float, float]:
        """(E[T], Var[T]) when the start is drawn uniformly over all q^n configurations."""
        total = len(self.space)
        mean = self.summary.expected_steps.sum() / total
        second = self.summary.second_moment.sum() / total
        return float(mean), float(second - mean ** 2)

    def by_class(self) -> dict[tuple[int, ...], tuple[float, float]]:
        out: dict[tuple[int, ...], tuple[float, float]] = {}
        for row, s in enumerate(self.chain.transient):
            key = canonical_class(self.space.states[s])
            val = (float(self.summary.expected_steps[row]), float(self.summary.variance[row]))
            prev = out.setdefault(key, val)
            if not np.allclose(prev, val, rtol=1e-9, atol=1e-9):
                raise InvariantViolation(f"class {key} mixes different absorption laws")
        return out


def analyze(g: Graph, q: int, cap: int = DEFAULT_STATE_CAP, allow_small_q: bool = False) -> ExactAnalysis:
    space, chain = build_chain(g, q, cap=cap, allow_small_q=allow_small_q)
    N = fundamental_matrix(chain)
    return ExactAnalysis(space, chain, N, absorption_variance(N, expected_absorption(N)))


def dump_chain_csv(space: StateSpace, chain: CanonicalChain, path, max_states: int = 10_000,
                   header_lines=()) -> None:
    """Write the full transition matrix as (from_state, to_state, probability) rows."""
    if len(space) > max_states:
        raise ValidationError(f"{len(space)} states exceed the dump cap {max_states}")
    with open(Path(path), "w", newline="", encoding="utf-8") as fh:
        for line in header_lines:
            fh.write(f"# {line}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["from_state", "to_state", "probability"])
        rows = [(int(s), int(s), 1.0) for s in chain.absorbing]
        for r, s in enumerate(chain.transient):
            rows += [(int(s), int(chain.transient[c]), chain.Q[r, c]) for c in np.flatnonzero(chain.Q[r])]
            rows += [(int(s), int(chain.absorbing[c]), chain.R[r, c]) for c in np.flatnonzero(chain.R[r])]
        for src, dst, p in sorted(rows):
            w.writerow([src, dst, repr(float(p))])
