"""How T grows with n on sparse random graphs (expected degree 6, q = max degree + 2).

Run: python demos/02_scaling_sweep.py          (a few seconds with 200 trials per size)
"""

import math

from ncgame.convergence import SweepConfig, prop3_tail_curve, run_sweep, scaling_report

cfg = SweepConfig(sizes=(8, 16, 32, 64, 128, 256), trials=200, seed=11)
samples = run_sweep(cfg)
rep = scaling_report(samples, epsilon=0.05)

print("   n    mean     var   mean/ln n   var/ln^2 n")
for n, mu, v in zip(rep.sizes, rep.mean, rep.variance):
    print(f"{n:4d}  {mu:6.3f}  {v:6.3f}   {mu / math.log(n):8.3f}   {v / math.log(n) ** 2:9.4f}")

print(f"\nC = {rep.C:.3f}, D = {rep.D:.3f}")
print("ratios non-increasing beyond the two smallest sizes:",
      rep.mean_ratio_non_increasing, rep.var_ratio_non_increasing)

t = rep.tails
print(f"M = sqrt(D / 2eps) + C = {t.M:.3f}")
for n, above, big in zip(t.sizes, t.p_above_M_log_n, t.p_at_least_n):
    print(f"  n={n:4d}  P[T > M ln n] = {above:.3f}   P[T >= n] = {big:.3f}")

# %% quantiles at one size against ln(n / delta) / c_hat
c_hat, rows = prop3_tail_curve([s for s in samples if s.n == 128])
print(f"\nn=128, fitted c_hat = {c_hat:.3f}")
for r in rows:
    print(f"  delta={r.delta:<5}  quantile {r.quantile:4.0f}   fitted bound {r.fitted_bound:6.2f}   "
          f"literature bound {r.lemma2_bound:.3g}")
