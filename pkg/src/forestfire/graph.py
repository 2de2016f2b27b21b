"""Finite graphs with a distinguished origin, and occupied-cluster search.

Toruses get a fast path: clusters are labelled with `scipy.ndimage.label`
on the open grid and the labels touching across the periodic seams are
merged with a small union-find.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence, Tuple

import numpy as np
from scipy import ndimage


class UnionFind:
    """Disjoint sets over 0..n-1 with path halving and union by size."""

    def __init__(self, n: int):
        self.parent = list(range(n))
        self.size = [1] * n

    def find(self, a: int) -> int:
        parent = self.parent
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    def union(self, a: int, b: int) -> int:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return ra
        if self.size[ra] < self.size[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]
        return ra

    def roots(self) -> np.ndarray:
        return np.array([self.find(i) for i in range(len(self.parent))], dtype=np.intp)


@dataclass(frozen=True)
class GraphSpec:
    """Connected undirected graph with origin vertex `origin`.

    `adjacency[v]` lists the neighbours of v. `shape` is set only for
    toruses built by :meth:`torus`; vertex (r, c) has index r * cols + c.
    """

    adjacency: Tuple[Tuple[int, ...], ...]
    origin: int = 0
    shape: Optional[Tuple[int, int]] = None

    def __post_init__(self):
        n = len(self.adjacency)
        if n == 0:
            raise ValueError("graph needs at least one vertex")
        if not 0 <= self.origin < n:
            raise ValueError(f"origin {self.origin} not in range(0, {n})")
        for v, nbrs in enumerate(self.adjacency):
            for w in nbrs:
                if not 0 <= w < n:
                    raise ValueError(f"edge {v}-{w} leaves the vertex set")
                if v not in self.adjacency[w]:
                    raise ValueError(f"adjacency not symmetric at {v}-{w}")
        if len(self._reach(self.origin, None)) != n:
            raise ValueError("graph is not connected")

    @property
    def n_vertices(self) -> int:
        return len(self.adjacency)

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[Sequence[int]], origin: int = 0) -> "GraphSpec":
        nbrs = [set() for _ in range(n)]
        for a, b in edges:
            if a == b:
                continue
            nbrs[a].add(b)
            nbrs[b].add(a)
        return cls(tuple(tuple(sorted(s)) for s in nbrs), origin)

    @classmethod
    def path(cls, n: int) -> "GraphSpec":
        """Path 0-1-...-(n-1) with the origin at vertex 0."""
        return cls.from_edges(n, [(i, i + 1) for i in range(n - 1)], 0)

    @classmethod
    def torus(cls, rows: int, cols: Optional[int] = None) -> "GraphSpec":
        cols = rows if cols is None else cols
        if rows < 3 or cols < 3:
            raise ValueError("torus sides must be at least 3")
        adj = []
        for r in range(rows):
            for c in range(cols):
                adj.append(tuple(sorted({
                    ((r - 1) % rows) * cols + c,
                    ((r + 1) % rows) * cols + c,
                    r * cols + (c - 1) % cols,
                    r * cols + (c + 1) % cols,
                })))
        return cls(tuple(adj), 0, (rows, cols))

    def far_vertex(self) -> int:
        """A vertex at maximal graph distance from the origin."""
        if self.shape is not None:
            rows, cols = self.shape
            r0, c0 = divmod(self.origin, cols)
            return ((r0 + rows // 2) % rows) * cols + (c0 + cols // 2) % cols
        dist = self.distances(self.origin)
        return int(np.argmax(dist))

    def distances(self, source: int) -> np.ndarray:
        dist = np.full(self.n_vertices, -1, dtype=np.intp)
        dist[source] = 0
        queue = deque([source])
        while queue:
            v = queue.popleft()
            for w in self.adjacency[v]:
                if dist[w] < 0:
                    dist[w] = dist[v] + 1
                    queue.append(w)
        return dist

    def _reach(self, start: int, occupied) -> list:
        seen = {start}
        stack = [start]
        adj = self.adjacency
        while stack:
            v = stack.pop()
            for w in adj[v]:
                if w not in seen and (occupied is None or occupied[w]):
                    seen.add(w)
                    stack.append(w)
        return list(seen)

    def cluster_of(self, vertex: int, occupied: np.ndarray) -> np.ndarray:
        """Indices of the occupied cluster containing `vertex`.

        `vertex` is treated as occupied whatever `occupied[vertex]` says.
        """
        if self.shape is not None:
            mask = np.asarray(occupied, dtype=bool).copy()
            mask[vertex] = True
            labels = torus_labels(mask.reshape(self.shape)).ravel()
            return np.flatnonzero(labels == labels[vertex])
        occ = np.asarray(occupied, dtype=bool).tolist()
        return np.array(sorted(self._reach(vertex, occ)), dtype=np.intp)

    def labels(self, occupied: np.ndarray) -> np.ndarray:
        """Cluster label per vertex (0 for vacant, 1.. for clusters)."""
        occupied = np.asarray(occupied, dtype=bool)
        if self.shape is not None:
            return torus_labels(occupied.reshape(self.shape)).ravel()
        labels = np.zeros(self.n_vertices, dtype=np.intp)
        occ = occupied.tolist()
        nxt = 1
        for v in range(self.n_vertices):
            if occ[v] and labels[v] == 0:
                labels[self._reach(v, occ)] = nxt
                nxt += 1
        return labels


def torus_labels(mask: np.ndarray) -> np.ndarray:
    """Connected-component labels of a 2-d boolean grid with periodic edges.

    Vacant sites get 0; clusters are numbered 1..k in order of first
    appearance in row-major order.
    """
    labels, k = ndimage.label(mask)
    if k == 0:
        return labels
    uf = UnionFind(k + 1)
    for a, b in ((labels[0, :], labels[-1, :]), (labels[:, 0], labels[:, -1])):
        both = (a > 0) & (b > 0)
        for x, y in zip(a[both].tolist(), b[both].tolist()):
            if x != y:
                uf.union(x, y)
    roots = uf.roots()
    merged = roots[labels]
    merged[labels == 0] = 0
    _, first = np.unique(merged.ravel(), return_index=True)
    order = np.sort(first)
    remap = np.zeros(k + 1, dtype=labels.dtype)
    flat = merged.ravel()
    nz = order[flat[order] > 0]
    remap[flat[nz]] = np.arange(1, nz.size + 1)
    return remap[merged]


def spans(graph: GraphSpec, members: np.ndarray) -> bool:
    """Whether a cluster meets every row and every column of a torus.

    For graphs without a torus shape every cluster is reported as spanning,
    so callers fall back to the largest-cluster criterion alone.
    """
    if graph.shape is None:
        return True
    rows, cols = graph.shape
    r, c = np.divmod(np.asarray(members), cols)
    return np.unique(r).size == rows and np.unique(c).size == cols
