"""Monte Carlo sweeps of the conflict-resolution time T over random graphs.

The asymptotic claims (mean O(log n), variance O((log n)^2), T = O_p(log n),
P[T >= n] -> 0) are turned into finite checks:

* envelope constants ``C = max_n mean_n / ln n`` and ``D = max_n var_n / (ln n)^2``,
* the ratios ``mean_n / ln n`` and ``var_n / (ln n)^2`` must be non-increasing
  once the two smallest sizes are dropped,
* the Chebyshev level ``M = sqrt(D / (2 eps)) + C`` bounds ``P[T > M ln n]``.

Natural logarithms throughout; envelopes use only sizes with ``ln n > 1``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

from .errors import ConvergenceTimeout, InvariantViolation, ValidationError
from .game import play_to_convergence
from .graph import generate_er, max_degree
from .rng import derive_seed

# Two-step resolution probability from the literature bound.  Displayed for
# contrast only; far too small to serve as a threshold.
LEMMA2_C = 1.0 / (1050.0 * math.exp(9.0))

_RTOL = 1e-12


@dataclass(frozen=True)
class SweepConfig:
    """Parameters of a scaling sweep.

    family is ``"er_degree"`` (p = param / (n - 1), capped at 1) or ``"er_p"``
    (p = param).  The palette is ``q`` when given, else ``max_degree + q_offset``
    for each generated graph.
    """

    sizes: tuple[int, ...]
    trials: int
    seed: int
    family: str = "er_degree"
    param: float = 6.0
    q: int | None = None
    q_offset: int = 2
    max_rounds: int = 10**6

    def __post_init__(self):
        sizes = tuple(int(s) for s in self.sizes)
        if not sizes or any(s < 1 for s in sizes):
            raise ValidationError(f"sizes must be positive, got {sizes}")
        if any(b <= a for a, b in zip(sizes, sizes[1:])):
            raise ValidationError(f"sizes must be strictly increasing, got {sizes}")
        if self.trials < 1:
            raise ValidationError("trials must be at least 1")
        if self.family not in ("er_degree", "er_p"):
            raise ValidationError(f"unknown graph family {self.family!r}")
        if self.q is None and self.q_offset < 2:
            raise ValidationError("q_offset below 2 breaks the q >= max degree + 2 requirement")
        object.__setattr__(self, "sizes", sizes)

    def edge_probability(self, n: int) -> float:
        if self.family == "er_p":
            return float(self.param)
        return 0.0 if n < 2 else min(1.0, self.param / (n - 1))


@dataclass(frozen=True)
class TrialSample:
    n: int
    graph_id: int
    trial_id: int
    T: int
    seed: int
    q: int = 0
    max_degree: int = 0


class SweepAborted(InvariantViolation):
    """A trial failed to converge; carries the offending seed."""

    def __init__(self, message, sample_seed):
        super().__init__(message)
        self.seed = sample_seed


def run_trial(cfg: SweepConfig, n: int, trial: int) -> TrialSample:
    tseed = derive_seed(cfg.seed, n, trial)
    g = generate_er(n, cfg.edge_probability(n), derive_seed(tseed, 0))
    delta = max_degree(g)
    q = cfg.q if cfg.q is not None else delta + cfg.q_offset
    if q < delta + 2:
        raise ValidationError(f"q={q} < max degree + 2 = {delta + 2} at n={n}, trial {trial}")
    try:
        res = play_to_convergence(g, q, derive_seed(tseed, 1), max_rounds=cfg.max_rounds)
    except ConvergenceTimeout as exc:
        raise SweepAborted(f"trial n={n} #{trial} (seed {tseed}) timed out: {exc}", tseed) from exc
    return TrialSample(n, trial, trial, res.rounds, tseed, q, delta)


def run_sweep(cfg: SweepConfig, progress=None) -> list[TrialSample]:
    """One fresh graph per trial; samples come back ordered by (n, trial)."""
    out = []
    for n in cfg.sizes:
        for trial in range(cfg.trials):
            out.append(run_trial(cfg, n, trial))
        if progress is not None:
            progress(n)
    return out


def _group(samples) -> dict[int, np.ndarray]:
    groups: dict[int, list[int]] = {}
    for s in samples:
        groups.setdefault(int(s.n), []).append(int(s.T))
    return {n: np.asarray(groups[n], dtype=float) for n in sorted(groups)}


def _non_increasing(values) -> bool:
    return all(b <= a + _RTOL * max(1.0, abs(a)) for a, b in zip(values, values[1:]))


@dataclass(frozen=True)
class TailReport:
    sizes: list[int]
    epsilon: float
    M: float
    p_above_M_log_n: list[float]
    p_at_least_n: list[float]
    below_epsilon_at_largest: bool
    at_least_n_non_increasing: bool
    at_least_n_zero_at_largest: bool


@dataclass(frozen=True)
class ScalingReport:
    sizes: list[int]
    trials: list[int]
    mean: list[float]
    variance: list[float]
    sd: list[float]
    se_mean: list[float]
    se_variance: list[float]
    envelope_sizes: list[int]
    mean_ratio: list[float]
    var_ratio: list[float]
    C: float
    D: float
    mean_ratio_non_increasing: bool
    var_ratio_non_increasing: bool
    tails: TailReport | None = None
    lemma2_c: float = field(default=LEMMA2_C)

    def to_dict(self) -> dict:
        return asdict(self)


def scaling_report(samples, min_trials: int = 100, epsilon: float | None = 0.05) -> ScalingReport:
    """Per-size moments, envelope constants and the ratio monotonicity verdicts."""
    groups = _group(samples)
    if len(groups) < 2:
        raise ValidationError(f"need at least 2 sizes, got {len(groups)}")
    short = {n: len(t) for n, t in groups.items() if len(t) < min_trials}
    if short:
        raise ValidationError(f"need >= {min_trials} trials per size, got {short}")
    sizes = list(groups)
    mean, var, sd, se_m, se_v = [], [], [], [], []
    for n in sizes:
        t = groups[n]
        k = t.size
        mu = float(t.mean())
        v = float(t.var(ddof=1))
        m4 = float(np.mean((t - mu) ** 4))
        mean.append(mu)
        var.append(v)
        sd.append(math.sqrt(v))
        se_m.append(math.sqrt(v / k))
        se_v.append(math.sqrt(max(m4 - v * v, 0.0) / k))
    env = [i for i, n in enumerate(sizes) if math.log(n) > 1.0]
    if not env:
        raise ValidationError("no size with ln n > 1; envelopes undefined")
    mr = [mean[i] / math.log(sizes[i]) for i in env]
    vr = [var[i] / math.log(sizes[i]) ** 2 for i in env]
    report = ScalingReport(
        sizes=sizes, trials=[int(groups[n].size) for n in sizes],
        mean=mean, variance=var, sd=sd, se_mean=se_m, se_variance=se_v,
        envelope_sizes=[sizes[i] for i in env], mean_ratio=mr, var_ratio=vr,
        C=max(mr), D=max(vr),
        mean_ratio_non_increasing=_non_increasing(mr[2:]),
        var_ratio_non_increasing=_non_increasing(vr[2:]),
    )
    if epsilon is not None and len(env) >= 1:
        report = replace(report, tails=tail_checks(samples, epsilon, report=report))
    return report


def chebyshev_level(C: float, D: float, epsilon: float) -> float:
    """M = sqrt(D / (2 eps)) + C."""
    if epsilon <= 0:
        raise ValidationError("epsilon must be positive")
    return math.sqrt(D / (2.0 * epsilon)) + C


def tail_checks(samples, epsilon: float = 0.05, M: float | None = None,
                report: ScalingReport | None = None) -> TailReport:
    """Empirical P[T > M ln n] and P[T >= n] per size.

    ``M`` defaults to the Chebyshev level built from the fitted ``C`` and ``D``
    (which needs a scaling report over at least three sizes).
    """
    groups = _group(samples)
    if M is None:
        if report is None:
            if len(groups) < 3:
                raise ValidationError("fitting M needs samples over at least 3 sizes")
            report = scaling_report(samples, epsilon=None)
        M = chebyshev_level(report.C, report.D, epsilon)
    sizes = list(groups)
    above = [float(np.mean(groups[n] > M * math.log(n))) if n > 1 else float(np.mean(groups[n] > 0))
             for n in sizes]
    at_least_n = [float(np.mean(groups[n] >= n)) for n in sizes]
    return TailReport(
        sizes=sizes, epsilon=float(epsilon), M=float(M),
        p_above_M_log_n=above, p_at_least_n=at_least_n,
        below_epsilon_at_largest=above[-1] < epsilon,
        at_least_n_non_increasing=_non_increasing(at_least_n),
        at_least_n_zero_at_largest=at_least_n[-1] == 0.0,
    )


@dataclass(frozen=True)
class QuantileRow:
    delta: float
    quantile: float
    fitted_bound: float
    lemma2_bound: float


def prop3_tail_curve(samples, deltas=(0.5, 0.1, 0.01)) -> tuple[float, list[QuantileRow]]:
    """Empirical (1 - delta)-quantiles of T against ``ln(n / delta) / c_hat``.

    ``c_hat`` is the largest constant whose curve still covers every reported
    quantile.  The literature constant gives ``2 ln(n / delta) / LEMMA2_C``
    (T <= 2 tau), shown alongside.
    """
    groups = _group(samples)
    if len(groups) != 1:
        raise ValidationError(f"prop3_tail_curve takes one size, got {sorted(groups)}")
    (n, t), = groups.items()
    deltas = sorted(float(d) for d in deltas)[::-1]
    if any(not 0 < d < 1 for d in deltas):
        raise ValidationError("deltas must lie in (0, 1)")
    qs = [float(np.quantile(t, 1.0 - d, method="inverted_cdf")) for d in deltas]
    logs = [math.log(n / d) for d in deltas]
    candidates = [lg / qv for lg, qv in zip(logs, qs) if qv > 0 and lg > 0]
    c_hat = min(candidates) if candidates else math.inf
    rows = [
        QuantileRow(d, qv, (lg / c_hat) if math.isfinite(c_hat) else 0.0, 2.0 * lg / LEMMA2_C)
        for d, qv, lg in zip(deltas, qs, logs)
    ]
    return c_hat, rows


def write_samples_csv(samples, path, header_lines=()) -> None:
    with open(Path(path), "w", newline="", encoding="utf-8") as fh:
        for line in header_lines:
            fh.write(f"# {line}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["n", "graph_id", "trial_id", "T", "seed"])
        for s in samples:
            w.writerow([s.n, s.graph_id, s.trial_id, s.T, s.seed])
