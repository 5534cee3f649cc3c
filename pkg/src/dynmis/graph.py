"""Undirected dynamic graph on a fixed vertex universe."""

from __future__ import annotations

import heapq
from typing import Iterator


class GraphError(ValueError):
    """Base class for rejected graph mutations."""


class VertexRangeError(GraphError):
    pass


class SelfLoopError(GraphError):
    pass


class DuplicateEdgeError(GraphError):
    pass


class MissingEdgeError(GraphError):
    pass


class DynamicGraph:
    """Simple graph with ``n`` vertices ``0..n-1`` and hashed adjacency sets.

    The vertex set never changes after creation; only edges come and go.
    """

    __slots__ = ("n", "adj", "edge_count")

    def __init__(self, n: int) -> None:
        if n < 0:
            raise ValueError(f"vertex count must be non-negative, got {n}")
        self.n = n
        self.adj: list[set[int]] = [set() for _ in range(n)]
        self.edge_count = 0

    def _check(self, u: int, v: int) -> None:
        if not (0 <= u < self.n and 0 <= v < self.n):
            raise VertexRangeError(f"edge ({u}, {v}) out of range for n={self.n}")
        if u == v:
            raise SelfLoopError(f"self-loop at vertex {u}")

    def insert_edge(self, u: int, v: int) -> None:
        self._check(u, v)
        if v in self.adj[u]:
            raise DuplicateEdgeError(f"edge ({u}, {v}) already present")
        self.adj[u].add(v)
        self.adj[v].add(u)
        self.edge_count += 1

    def delete_edge(self, u: int, v: int) -> None:
        self._check(u, v)
        if v not in self.adj[u]:
            raise MissingEdgeError(f"edge ({u}, {v}) not present")
        self.adj[u].discard(v)
        self.adj[v].discard(u)
        self.edge_count -= 1

    def has_edge(self, u: int, v: int) -> bool:
        return 0 <= u < self.n and v in self.adj[u]

    def degree(self, v: int) -> int:
        return len(self.adj[v])

    def neighbors(self, v: int) -> set[int]:
        return self.adj[v]

    def edges(self) -> Iterator[tuple[int, int]]:
        """Yield every edge once as ``(u, v)`` with ``u < v``, in ascending order."""
        for u in range(self.n):
            for v in sorted(w for w in self.adj[u] if w > u):
                yield u, v

    def copy(self) -> "DynamicGraph":
        g = DynamicGraph(self.n)
        g.adj = [set(a) for a in self.adj]
        g.edge_count = self.edge_count
        return g

    @classmethod
    def from_edges(cls, n: int, edges) -> "DynamicGraph":
        g = cls(n)
        for u, v in edges:
            g.insert_edge(u, v)
        return g

    def __repr__(self) -> str:
        return f"DynamicGraph(n={self.n}, edges={self.edge_count})"


def new_graph(n: int) -> DynamicGraph:
    return DynamicGraph(n)


def degeneracy_estimate(g: DynamicGraph) -> int:
    """Degeneracy by repeated removal of a minimum-degree vertex.

    For a graph of arboricity ``lam`` the result lies in ``[lam, 2*lam - 1]``.
    """
    deg = [len(a) for a in g.adj]
    heap = [(d, v) for v, d in enumerate(deg)]
    heapq.heapify(heap)
    removed = [False] * g.n
    best = 0
    while heap:
        d, v = heapq.heappop(heap)
        if removed[v] or d != deg[v]:
            continue
        removed[v] = True
        best = max(best, d)
        for w in g.adj[v]:
            if not removed[w]:
                deg[w] -= 1
                heapq.heappush(heap, (deg[w], w))
    return best
