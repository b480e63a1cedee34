"""Undirected simple graphs, Erdos-Renyi generation and the properness test.

Vertices are ``0..n-1``.  A coloring is a length-``n`` integer array; colors
are ``0..q-1``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ValidationError
from .rng import make_rng


@dataclass(frozen=True)
class Graph:
    """Immutable undirected simple graph.

    ``edges`` is stored canonically: each pair as ``(u, v)`` with ``u < v``,
    the whole tuple sorted.
    """

    n: int
    edges: tuple[tuple[int, int], ...]
    adjacency: tuple[tuple[int, ...], ...] = field(init=False, repr=False, compare=False)
    edge_array: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        n = int(self.n)
        if n < 1:
            raise ValidationError(f"graph must have at least one vertex, got n={self.n}")
        canon = set()
        for e in self.edges:
            u, v = (int(x) for x in e)
            if u == v:
                raise ValidationError(f"self-loop at vertex {u}")
            if not (0 <= u < n and 0 <= v < n):
                raise ValidationError(f"edge ({u}, {v}) references a vertex outside 0..{n - 1}")
            key = (u, v) if u < v else (v, u)
            if key in canon:
                raise ValidationError(f"duplicate edge {key}")
            canon.add(key)
        edges = tuple(sorted(canon))
        nbrs: list[list[int]] = [[] for _ in range(n)]
        for u, v in edges:
            nbrs[u].append(v)
            nbrs[v].append(u)
        arr = np.array(edges, dtype=np.int64).reshape(-1, 2)
        arr.setflags(write=False)
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "adjacency", tuple(tuple(sorted(a)) for a in nbrs))
        object.__setattr__(self, "edge_array", arr)

    @property
    def m(self) -> int:
        return len(self.edges)

    def degree(self, v: int) -> int:
        return len(self.adjacency[v])

    def degrees(self) -> np.ndarray:
        return np.array([len(a) for a in self.adjacency], dtype=np.int64)

    def has_edge(self, u: int, v: int) -> bool:
        return v in self.adjacency[u]

    def subgraph(self, keep) -> "Graph":
        """Induced subgraph on ``keep`` (old ids), relabelled ``0..len(keep)-1`` in that order."""
        keep = [int(k) for k in keep]
        pos = {old: new for new, old in enumerate(keep)}
        edges = [(pos[u], pos[v]) for u, v in self.edges if u in pos and v in pos]
        return Graph(max(len(keep), 1), tuple(edges)) if keep else _EMPTY

    @classmethod
    def from_adjacency(cls, adjacency) -> "Graph":
        """Build from per-vertex neighbor lists; the lists must be symmetric."""
        n = len(adjacency)
        edges = set()
        for u, nb in enumerate(adjacency):
            for v in nb:
                v = int(v)
                if not 0 <= v < n:
                    raise ValidationError(f"neighbor {v} of vertex {u} is outside 0..{n - 1}")
                if u not in adjacency[v]:
                    raise ValidationError(f"asymmetric adjacency: {v} in N({u}) but {u} not in N({v})")
                if u == v:
                    raise ValidationError(f"self-loop at vertex {u}")
                edges.add((min(u, v), max(u, v)))
        return cls(n, tuple(edges))

    @classmethod
    def from_matrix(cls, a) -> "Graph":
        a = np.asarray(a)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValidationError(f"adjacency matrix must be square, got shape {a.shape}")
        if not np.array_equal(a, a.T):
            raise ValidationError("adjacency matrix is not symmetric")
        if np.any(np.diag(a)):
            raise ValidationError("adjacency matrix has self-loops")
        u, v = np.nonzero(np.triu(a, 1))
        return cls(a.shape[0], tuple(zip(u.tolist(), v.tolist())))

    def to_matrix(self) -> np.ndarray:
        a = np.zeros((self.n, self.n), dtype=np.int64)
        if self.m:
            a[self.edge_array[:, 0], self.edge_array[:, 1]] = 1
            a[self.edge_array[:, 1], self.edge_array[:, 0]] = 1
        return a


# Sentinel for a fully reduced network; n=0 is not a valid Graph otherwise.
_EMPTY = object.__new__(Graph)
object.__setattr__(_EMPTY, "n", 0)
object.__setattr__(_EMPTY, "edges", ())
object.__setattr__(_EMPTY, "adjacency", ())
object.__setattr__(_EMPTY, "edge_array", np.zeros((0, 2), dtype=np.int64))


def empty_network() -> Graph:
    """The zero-vertex network left behind once every player has quit."""
    return _EMPTY


def empty_graph(n: int) -> Graph:
    return Graph(n, ())


def complete_graph(n: int) -> Graph:
    return Graph(n, tuple((u, v) for u in range(n) for v in range(u + 1, n)))


def path_graph(n: int) -> Graph:
    return Graph(n, tuple((i, i + 1) for i in range(n - 1)))


def star_graph(leaves: int) -> Graph:
    """Center 0 joined to leaves ``1..leaves``."""
    return Graph(leaves + 1, tuple((0, i) for i in range(1, leaves + 1)))


def generate_er(n: int, p: float, seed) -> Graph:
    """G(n, p) with one uniform draw per pair, pairs visited as (0,1), (0,2), ..., (n-2,n-1)."""
    if n < 1:
        raise ValidationError(f"invalid graph size n={n}")
    if not 0.0 <= p <= 1.0:
        raise ValidationError(f"edge probability must be in [0, 1], got {p}")
    rng = make_rng(seed)
    iu, iv = np.triu_indices(n, 1)
    coins = rng.random(iu.size)
    hit = coins < p
    return Graph(n, tuple(zip(iu[hit].tolist(), iv[hit].tolist())))


def max_degree(g: Graph) -> int:
    return max((len(a) for a in g.adjacency), default=0)


def check_coloring(g: Graph, colors, q: int | None = None) -> np.ndarray:
    """Validate a coloring against ``g`` (and palette size ``q``); return it as an int array."""
    arr = np.asarray(colors, dtype=np.int64).reshape(-1)
    if arr.size != g.n:
        raise ValidationError(f"coloring has length {arr.size}, graph has {g.n} vertices")
    if arr.size and arr.min() < 0:
        raise ValidationError("colors must be non-negative")
    if q is not None and arr.size and arr.max() >= q:
        raise ValidationError(f"color {int(arr.max())} outside palette 0..{q - 1}")
    return arr


def conflict_edges(g: Graph, colors) -> np.ndarray:
    """Boolean mask over ``g.edge_array``: True where both endpoints share a color."""
    colors = np.asarray(colors)
    e = g.edge_array
    return colors[e[:, 0]] == colors[e[:, 1]]


def is_proper(g: Graph, colors) -> bool:
    colors = check_coloring(g, colors)
    return not bool(conflict_edges(g, colors).any())


# --- edge-list text format -------------------------------------------------
#
#   # comment lines are ignored anywhere
#   n 6
#   0 1
#   1 2


def save_graph(g: Graph, path, header: str | None = None) -> None:
    lines = []
    if header:
        lines.extend(f"# {h}" if h else "#" for h in header.splitlines())
    lines.append(f"n {g.n}")
    lines.extend(f"{u} {v}" for u, v in g.edges)
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def parse_graph(text: str, source: str = "<string>") -> Graph:
    n = None
    edges = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if n is None:
            if len(parts) != 2 or parts[0] != "n":
                raise ValidationError(f"{source}:{lineno}: expected header 'n <count>', got {raw!r}")
            try:
                n = int(parts[1])
            except ValueError:
                raise ValidationError(f"{source}:{lineno}: vertex count is not an integer: {parts[1]!r}") from None
            if n < 1:
                raise ValidationError(f"{source}:{lineno}: invalid vertex count {n}")
            continue
        if len(parts) != 2:
            raise ValidationError(f"{source}:{lineno}: expected 'u v', got {raw!r}")
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError:
            raise ValidationError(f"{source}:{lineno}: vertex ids must be integers: {raw!r}") from None
        if u == v:
            raise ValidationError(f"{source}:{lineno}: self-loop ({u}, {v})")
        if not (0 <= u < n and 0 <= v < n):
            raise ValidationError(f"{source}:{lineno}: vertex id out of range 0..{n - 1}: {raw!r}")
        edges.append((u, v))
    if n is None:
        raise ValidationError(f"{source}: missing 'n <count>' header")
    try:
        return Graph(n, tuple(edges))
    except ValidationError as exc:
        raise ValidationError(f"{source}: {exc}") from None


def load_graph(path) -> Graph:
    path = Path(path)
    return parse_graph(path.read_text(encoding="utf-8"), source=str(path))


def save_coloring(colors, path, header: str | None = None) -> None:
    """One color per line."""
    lines = [f"# {h}" if h else "#" for h in (header or "").splitlines()]
    lines.extend(str(int(c)) for c in np.asarray(colors).reshape(-1))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_coloring(path) -> np.ndarray:
    out = []
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        try:
            out.append(int(line))
        except ValueError:
            raise ValidationError(f"{path}:{lineno}: expected one integer color, got {raw!r}") from None
    return np.array(out, dtype=np.int64)
