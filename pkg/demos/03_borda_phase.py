"""After the conflicts are gone: Borda welfare, network reduction, local runs, annealing.

Run: python demos/03_borda_phase.py
"""

from ncgame.borda import available_colors, borda_welfare, estimate_expected_optimum, local_optimal_run, reduce_network
from ncgame.instances import COLOR_NAMES, borda_instance, reduction_example
from ncgame.samplers import INCREASING_SCHEDULES, sa_run

# %% six players who all rank green > red > blue > yellow
g, X, L, q = reduction_example()
out = reduce_network(g, X, L, available_colors(X, L))
print("quitters (0-based):", out.quitters, "holding", [COLOR_NAMES[c] for c in out.quit_colors])
print("payoff gained:", out.payoff_gained)
print("left in the game:", out.ids.tolist(), "with lists",
      [[COLOR_NAMES[c] for c in lst] for lst in out.avail])

# %% a 20-player instance, 13 colors, random preferences
inst = borda_instance(n=20, p=0.3, q=13, seed=7)
g, X, L, q = inst.graph, inst.prefs, inst.colors, inst.q
print(f"\n20 players, {g.m} edges, starting welfare {borda_welfare(q, X, L)} of {(q - 1) * g.n}")

run = local_optimal_run(g, X, L, q, seed=0)
print("one local run, welfare by phase:", [w for _, w, _ in run.trace])

est = estimate_expected_optimum(g, X, L, q, k=200, seed=0)
print(f"200 local runs: mean {est.mean:.2f}, max {est.max}, {est.frozen_runs} ended with nobody able to move")

# %% annealing with the three increasing schedules
for name in INCREASING_SCHEDULES:
    tr = sa_run(g, X, L, q, 50_000, name, seed=0)
    print(f"annealing {name:9s}: best {tr.best_welfare} first reached at step {tr.reaching_time}")
