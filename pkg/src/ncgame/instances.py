"""Ready-made instances: the six-vertex reduction example and seeded 20-player games."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .game import play_to_convergence
from .graph import Graph, generate_er, max_degree
from .rng import derive_seed, make_rng

# Color ids used by the six-vertex example.
RED, GREEN, BLUE, YELLOW = 0, 1, 2, 3
COLOR_NAMES = {RED: "R", GREEN: "G", BLUE: "B", YELLOW: "Y"}


def reduction_example():
    """Six players, everybody ranks green > red > blue > yellow.

    Vertices 1..6 of the drawing are 0..5 here.  Returns ``(graph, prefs, colors, q)``.
    Players 4 (green), 0 (red) and 2 (blue) leave, in that order.
    """
    edges = [(2, 4), (2, 6), (1, 3), (1, 5), (3, 5), (1, 6)]
    g = Graph(6, tuple((u - 1, v - 1) for u, v in edges))
    colors = np.array([RED, RED, BLUE, BLUE, GREEN, YELLOW])
    prefs = np.tile([GREEN, RED, BLUE, YELLOW], (6, 1))
    return g, prefs, colors, 4


@dataclass(frozen=True)
class GameInstance:
    graph: Graph
    prefs: np.ndarray
    colors: np.ndarray
    q: int
    seed: int
    attempts: int


def random_profile(n: int, q: int, rng) -> np.ndarray:
    rng = make_rng(rng)
    return np.array([rng.permutation(q) for _ in range(n)], dtype=np.int64)


def borda_instance(n: int = 20, p: float = 0.3, q: int = 13, seed: int = 0,
                   max_attempts: int = 1000, regenerate: bool = True) -> GameInstance:
    """G(n, p) with q >= max degree + 2 (or no edges at all), random permutation preferences, and a
    proper starting coloring reached by the greedy dynamics.

    Graph attempt ``a`` uses child seed ``(seed, 0, a)``; when ``regenerate`` is
    False only attempt 0 is tried.
    """
    attempts = max_attempts if regenerate else 1
    for a in range(attempts):
        g = generate_er(n, p, derive_seed(seed, 0, a))
        if q >= max_degree(g) + 2 or g.m == 0:
            break
    else:
        raise ValidationError(
            f"no G({n}, {p}) draw with max degree <= {q - 2} in {attempts} attempt(s)"
        )
    prefs = random_profile(n, q, derive_seed(seed, 1))
    colors = play_to_convergence(g, q, derive_seed(seed, 2)).final.assignment.copy()
    return GameInstance(g, prefs, colors, q, seed, a + 1)
