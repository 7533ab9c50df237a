"""Undirected simple graphs and neighborhood utilities.

Nodes are indexed ``0..n-1``. A :class:`Graph` is immutable once built.
"""

from __future__ import annotations

import hashlib
from collections import deque
from typing import Iterable

import numpy as np
import scipy.sparse as sp

from .errors import GraphError


class Graph:
    """Undirected simple graph.

    Attributes
    ----------
    n : int
        Number of nodes.
    edges : tuple of (int, int)
        Unordered edges stored as ``(i, j)`` with ``i < j``, sorted.
    degrees : ndarray of int
        Edge degree ``d_i`` of every node (no self-loops counted).
    adjacency : scipy.sparse.csr_matrix
        Symmetric 0/1 adjacency matrix ``A``.
    """

    __slots__ = ("n", "edges", "degrees", "adjacency", "_neighbors")

    def __init__(self, n: int, edges: Iterable[tuple[int, int]]):
        n = int(n)
        if n < 0:
            raise GraphError(f"node count must be non-negative, got {n}")
        canon = set()
        for i, j in edges:
            i, j = int(i), int(j)
            if not (0 <= i < n and 0 <= j < n):
                raise GraphError(f"edge ({i}, {j}) out of range for n={n}")
            if i == j:
                raise GraphError(f"self-loop at node {i}")
            canon.add((i, j) if i < j else (j, i))
        _set = object.__setattr__
        _set(self, "n", n)
        _set(self, "edges", tuple(sorted(canon)))
        if canon:
            e = np.asarray(self.edges, dtype=np.int64)
            rows = np.concatenate([e[:, 0], e[:, 1]])
            cols = np.concatenate([e[:, 1], e[:, 0]])
        else:
            rows = cols = np.zeros(0, dtype=np.int64)
        A = sp.csr_matrix((np.ones(rows.size), (rows, cols)), shape=(n, n))
        A.sort_indices()
        A.data.setflags(write=False)
        _set(self, "adjacency", A)
        deg = np.diff(A.indptr).astype(np.int64)
        deg.setflags(write=False)
        _set(self, "degrees", deg)
        _set(self, "_neighbors", tuple(A.indices[A.indptr[k]:A.indptr[k + 1]] for k in range(n)))

    def __setattr__(self, name, value):
        raise AttributeError("Graph is immutable")

    def neighbors(self, i: int) -> np.ndarray:
        """Sorted direct neighbors of ``i`` (excluding ``i``)."""
        _check_node(self, i)
        return self._neighbors[i]

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    def augmented(self) -> sp.csr_matrix:
        """``A + I``: the adjacency with a self-loop at every node."""
        return (self.adjacency + sp.identity(self.n, format="csr")).tocsr()

    def digest(self) -> str:
        """Stable content hash (sha256 of node count and sorted edges)."""
        h = hashlib.sha256(f"n {self.n}\n".encode())
        for i, j in self.edges:
            h.update(f"{i} {j}\n".encode())
        return h.hexdigest()

    def __eq__(self, other) -> bool:
        return isinstance(other, Graph) and self.n == other.n and self.edges == other.edges

    def __hash__(self) -> int:
        return hash((self.n, self.edges))

    def __repr__(self) -> str:
        return f"Graph(n={self.n}, edges={self.num_edges})"


def from_edge_list(pairs: Iterable[tuple[int, int]], n: int) -> Graph:
    """Build a graph from node pairs; duplicates and reversed pairs collapse."""
    return Graph(n, pairs)


def _check_node(g: Graph, i: int) -> None:
    if not 0 <= i < g.n:
        raise GraphError(f"node {i} out of range for n={g.n}")


def neighborhood(g: Graph, i: int, L: int) -> np.ndarray:
    """Nodes within ``L`` hops of ``i`` (``i`` included), sorted.

    ``L = 0`` gives ``[i]``.
    """
    _check_node(g, i)
    if L < 0:
        raise ValueError(f"depth must be >= 0, got {L}")
    seen = {i}
    frontier = [i]
    for _ in range(L):
        nxt = []
        for u in frontier:
            for v in g._neighbors[u]:
                v = int(v)
                if v not in seen:
                    seen.add(v)
                    nxt.append(v)
        if not nxt:
            break
        frontier = nxt
    return np.array(sorted(seen), dtype=np.int64)


def hop_distances(g: Graph, source: int) -> np.ndarray:
    """BFS hop distance from ``source``; unreachable nodes get -1."""
    _check_node(g, source)
    dist = np.full(g.n, -1, dtype=np.int64)
    dist[source] = 0
    queue = deque([source])
    while queue:
        u = queue.popleft()
        for v in g._neighbors[u]:
            if dist[v] < 0:
                dist[v] = dist[u] + 1
                queue.append(v)
    return dist


def reach_matrix(g: Graph, L: int) -> sp.csr_matrix:
    """0/1 sparse matrix whose row ``i`` is the indicator of ``N^L(i)``."""
    A1 = g.augmented()
    R = sp.identity(g.n, format="csr")
    for _ in range(L):
        R = (R @ A1).tocsr()
        R.data[:] = 1.0
    R.sort_indices()
    return R


def neighborhood_sizes(g: Graph, L: int) -> np.ndarray:
    """``|N^L(i)|`` for every node."""
    return np.diff(reach_matrix(g, L).indptr).astype(np.int64)


def is_connected(g: Graph) -> bool:
    if g.n == 0:
        raise GraphError("empty graph")
    return bool(np.all(hop_distances(g, 0) >= 0))


def is_tree(g: Graph) -> bool:
    return g.n >= 1 and g.num_edges == g.n - 1 and is_connected(g)


def induced_subgraph(g: Graph, nodes: Iterable[int]) -> Graph:
    """Subgraph on ``nodes``, relabelled ``0..k-1`` in sorted order."""
    nodes = sorted(int(v) for v in nodes)
    index = {v: k for k, v in enumerate(nodes)}
    pairs = [(index[i], index[j]) for i, j in g.edges if i in index and j in index]
    return Graph(len(nodes), pairs)
