"""Erdős-Rényi comparison graphs."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ParameterError


@dataclass(frozen=True, eq=False)
class ComparisonGraph:
    """Undirected simple graph on objects ``0..n-1``.

    ``edges`` is an ``(m, 2)`` integer array with ``i < j`` in every row, in
    lexicographic order. ``neighbors[i]`` is the sorted neighbor array of ``i``.
    """

    n: int
    edges: np.ndarray
    neighbors: tuple[np.ndarray, ...] = field(repr=False)
    degree: np.ndarray = field(repr=False)

    @classmethod
    def from_edges(cls, n: int, edges) -> ComparisonGraph:
        if n < 1:
            raise ParameterError(f"n must be positive, got {n}")
        arr = np.asarray(list(edges) if not isinstance(edges, np.ndarray) else edges, dtype=np.int64)
        arr = arr.reshape(-1, 2)
        if arr.size and (arr.min() < 0 or arr.max() >= n):
            raise ParameterError("edge endpoint out of range")
        if np.any(arr[:, 0] == arr[:, 1]):
            raise ParameterError("self-loops are not allowed")
        arr = np.sort(arr, axis=1)
        arr = np.unique(arr, axis=0) if arr.size else arr
        adj: list[list[int]] = [[] for _ in range(n)]
        for i, j in arr.tolist():
            adj[i].append(j)
            adj[j].append(i)
        neighbors = tuple(np.array(sorted(a), dtype=np.int64) for a in adj)
        degree = np.array([len(a) for a in adj], dtype=np.int64)
        for a in neighbors:
            a.setflags(write=False)
        arr.setflags(write=False)
        degree.setflags(write=False)
        return cls(n=n, edges=arr, neighbors=neighbors, degree=degree)

    @classmethod
    def complete(cls, n: int) -> ComparisonGraph:
        i, j = np.triu_indices(n, k=1)
        return cls.from_edges(n, np.column_stack([i, j]))

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    @property
    def d_max(self) -> int:
        return int(self.degree.max()) if self.n else 0

    @property
    def d_min(self) -> int:
        return int(self.degree.min()) if self.n else 0

    def has_edge(self, i: int, j: int) -> bool:
        nb = self.neighbors[i]
        pos = np.searchsorted(nb, j)
        return bool(pos < len(nb) and nb[pos] == j)

    def relabel(self, perm) -> ComparisonGraph:
        """Graph with object ``i`` renamed to ``perm[i]``."""
        perm = np.asarray(perm)
        return ComparisonGraph.from_edges(self.n, perm[self.edges])

    def write_edge_list(self, path) -> None:
        lines = [f"{i} {j}" for i, j in self.edges.tolist()]
        Path(path).write_text("\n".join(lines) + ("\n" if lines else ""))


def read_edge_list(path, n: int) -> ComparisonGraph:
    pairs = []
    for line in Path(path).read_text().splitlines():
        line = line.strip()
        if line:
            a, b = line.split()
            pairs.append((int(a), int(b)))
    return ComparisonGraph.from_edges(n, np.array(pairs, dtype=np.int64).reshape(-1, 2))


def er_edge_probability(n: int, coef: float) -> float:
    """``coef * ln(n) / n``, clipped to 1."""
    return min(1.0, coef * np.log(n) / n)


def generate_er_graph(n: int, p: float, seed) -> ComparisonGraph:
    """Sample G(n, p): every unordered pair kept independently with probability p.

    Pairs are visited in ``np.triu_indices`` order with one uniform draw each,
    so the result is a pure function of ``(n, p, seed)``.
    """
    if n < 2:
        raise ParameterError(f"n must be >= 2, got {n}")
    if not 0.0 <= p <= 1.0:
        raise ParameterError(f"p must lie in [0, 1], got {p}")
    rng = np.random.default_rng(seed)
    i, j = np.triu_indices(n, k=1)
    keep = rng.random(len(i)) < p
    return ComparisonGraph.from_edges(n, np.column_stack([i[keep], j[keep]]))


def is_connected(g: ComparisonGraph) -> bool:
    if g.n == 0:
        return False
    seen = np.zeros(g.n, dtype=bool)
    seen[0] = True
    queue = deque([0])
    while queue:
        u = queue.popleft()
        for v in g.neighbors[u]:
            if not seen[v]:
                seen[v] = True
                queue.append(int(v))
    return bool(seen.all())
