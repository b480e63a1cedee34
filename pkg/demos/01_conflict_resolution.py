"""Greedy conflict resolution on a random graph, then the exact chain on a triangle.

Run: python demos/01_conflict_resolution.py
"""

import numpy as np

from ncgame import analyze, generate_er, max_degree, play_to_convergence, simulate_batch
from ncgame.graph import complete_graph

# %% play one game on G(40, 0.1) with the smallest palette the dynamics allow
g = generate_er(40, 0.1, seed=1)
q = max_degree(g) + 2
res = play_to_convergence(g, q, seed=7, record=True)
print(f"n={g.n} m={g.m} max degree={max_degree(g)} q={q}: proper after T={res.rounds} rounds")
for rnd, sat, clashes in res.trajectory:
    print(f"  round {rnd:2d}: {sat:2d} satisfied, {clashes:2d} conflicting edges")

# %% exact absorption time on K3 with 5 colors, one line per start class
ex = analyze(complete_graph(3), 5)
print("\nK3, q=5: exact E[T] and Var[T] by starting pattern")
for cls, (mean, var) in sorted(ex.by_class().items()):
    print(f"  {cls}: E[T]={mean:.4f}  Var[T]={var:.4f}")

# %% the same numbers from simulation, starting monochromatic
T = simulate_batch(complete_graph(3), 5, np.zeros((100_000, 3), dtype=int), np.random.default_rng(0))
mean, var = ex.for_state((0, 0, 0))
print(f"\nsimulated from (0,0,0): mean {T.mean():.4f} (exact {mean:.4f}), var {T.var(ddof=1):.4f} (exact {var:.4f})")

# uniform random start averages over all 125 configurations
print("uniform start: E[T]=%.4f Var[T]=%.4f" % ex.uniform_start())
