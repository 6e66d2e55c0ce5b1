"""Dense k-partite k-graphs.

A hypergraph stores one boolean per legal k-tuple in an array of shape
``(n,) * k``; entry ``adj[i_1, ..., i_k]`` says whether the tuple made of
local vertex ``i_c`` from every class ``c`` is an edge.  Vertices are
``(class, local)`` pairs.  Removing vertices keeps the array shape and
records per-class alive masks instead of reindexing.
"""

from __future__ import annotations

from itertools import combinations, product
from typing import Iterable, NamedTuple, Sequence

import numpy as np

Edge = tuple[int, ...]
Matching = list[Edge]


class Vertex(NamedTuple):
    cls: int
    idx: int


class InvalidLegalSet(ValueError):
    """Raised when a vertex set has two members in one class or is out of range."""


def as_vertex(v) -> Vertex:
    return v if isinstance(v, Vertex) else Vertex(int(v[0]), int(v[1]))


def edge_vertices(e: Sequence[int]) -> list[Vertex]:
    return [Vertex(c, int(i)) for c, i in enumerate(e)]


def membership_masks(k: int, n: int, vertices: Iterable) -> np.ndarray:
    """Boolean ``(k, n)`` array marking the given vertices."""
    masks = np.zeros((k, n), dtype=bool)
    for v in vertices:
        c, i = as_vertex(v)
        if not (0 <= c < k and 0 <= i < n):
            raise InvalidLegalSet(f"vertex {(c, i)} out of range for k={k}, n={n}")
        masks[c, i] = True
    return masks


def parity_tensor(masks: np.ndarray) -> np.ndarray:
    """``|e ∩ S| mod 2`` for every legal tuple e, where S is given by ``masks``."""
    k, n = masks.shape
    total = np.zeros((n,) * k, dtype=np.int8)
    for c in range(k):
        shape = [1] * k
        shape[c] = n
        total = total + masks[c].astype(np.int8).reshape(shape)
    return total % 2


class PartiteHypergraph:
    """A k-partite k-graph with ``n`` vertex slots per class.

    Instances are treated as immutable: the edge array is flagged
    read-only after construction.
    """

    def __init__(self, k: int, n: int, adj: np.ndarray | None = None,
                 alive: np.ndarray | None = None):
        if k < 2:
            raise ValueError("k must be at least 2")
        if n < 1:
            raise ValueError("n must be at least 1")
        self.k = int(k)
        self.n = int(n)
        if adj is None:
            adj = np.zeros((n,) * k, dtype=bool)
        adj = np.array(adj, dtype=bool, copy=True)
        if adj.shape != (n,) * k:
            raise ValueError(f"edge array has shape {adj.shape}, expected {(n,) * k}")
        if alive is None:
            alive = np.ones((k, n), dtype=bool)
        alive = np.array(alive, dtype=bool, copy=True)
        if alive.shape != (k, n):
            raise ValueError("alive mask must have shape (k, n)")
        for c in range(k):
            dead = np.flatnonzero(~alive[c])
            if dead.size:
                index = [slice(None)] * k
                index[c] = dead
                adj[tuple(index)] = False
        adj.setflags(write=False)
        alive.setflags(write=False)
        self.adj = adj
        self.alive = alive

    # -- construction -------------------------------------------------

    @classmethod
    def complete(cls, k: int, n: int) -> "PartiteHypergraph":
        return cls(k, n, np.ones((n,) * k, dtype=bool))

    @classmethod
    def empty(cls, k: int, n: int) -> "PartiteHypergraph":
        return cls(k, n)

    @classmethod
    def from_edges(cls, k: int, n: int, edges: Iterable[Sequence[int]]) -> "PartiteHypergraph":
        adj = np.zeros((n,) * k, dtype=bool)
        for e in edges:
            e = tuple(int(x) for x in e)
            if len(e) != k or not all(0 <= x < n for x in e):
                raise ValueError(f"illegal edge {e} for k={k}, n={n}")
            adj[e] = True
        return cls(k, n, adj)

    # -- basic queries ------------------------------------------------

    @property
    def num_edges(self) -> int:
        return int(self.adj.sum())

    @property
    def class_sizes(self) -> list[int]:
        return [int(s) for s in self.alive.sum(axis=1)]

    @property
    def balanced(self) -> bool:
        return len(set(self.class_sizes)) == 1

    def has_edge(self, e: Sequence[int]) -> bool:
        if len(e) != self.k or not all(0 <= x < self.n for x in e):
            return False
        return bool(self.adj[tuple(e)])

    __contains__ = has_edge

    def edges(self) -> list[Edge]:
        """All edges in lexicographic order."""
        return [tuple(int(x) for x in row) for row in np.argwhere(self.adj)]

    def vertices(self) -> list[Vertex]:
        return [Vertex(c, i) for c in range(self.k) for i in range(self.n) if self.alive[c, i]]

    def live(self, c: int) -> list[int]:
        return [int(i) for i in np.flatnonzero(self.alive[c])]

    def __eq__(self, other) -> bool:
        if not isinstance(other, PartiteHypergraph):
            return NotImplemented
        return (self.k == other.k and self.n == other.n
                and np.array_equal(self.alive, other.alive)
                and np.array_equal(self.adj, other.adj))

    def __hash__(self):
        return hash((self.k, self.n, self.adj.tobytes(), self.alive.tobytes()))

    def __repr__(self) -> str:
        return f"PartiteHypergraph(k={self.k}, n={self.n}, edges={self.num_edges})"

    # -- degrees ------------------------------------------------------

    def _legal_index(self, S: Iterable) -> tuple:
        index: list = [slice(None)] * self.k
        seen = set()
        for v in S:
            c, i = as_vertex(v)
            if not (0 <= c < self.k and 0 <= i < self.n):
                raise InvalidLegalSet(f"vertex {(c, i)} out of range")
            if c in seen:
                raise InvalidLegalSet(f"two vertices in class {c}")
            seen.add(c)
            index[c] = i
        if not seen:
            raise InvalidLegalSet("legal set must be non-empty")
        return tuple(index)

    def degree(self, S: Iterable) -> int:
        """Number of edges containing the legal set ``S``."""
        return int(self.adj[self._legal_index(S)].sum())

    def codegree_array(self, j: int) -> np.ndarray:
        """Degrees of all legal (k-1)-sets missing class ``j``, indexed by the other classes."""
        return self.adj.sum(axis=j)

    def min_codegree(self) -> int:
        """Minimum degree over all legal (k-1)-sets of live vertices (0 if none exist)."""
        best = None
        for j in range(self.k):
            others = [c for c in range(self.k) if c != j]
            if any(not self.alive[c].any() for c in others):
                continue
            cod = self.codegree_array(j)
            sub = cod[np.ix_(*[np.flatnonzero(self.alive[c]) for c in others])]
            m = int(sub.min())
            best = m if best is None else min(best, m)
        return 0 if best is None else best

    def parity_degree(self, v, S: Iterable, j: int) -> int:
        """Edges through ``v`` meeting ``S`` in a number of vertices congruent to ``j`` mod 2."""
        c, i = as_vertex(v)
        par = parity_tensor(membership_masks(self.k, self.n, S))
        index = [slice(None)] * self.k
        index[c] = i
        index = tuple(index)
        return int((self.adj[index] & (par[index] == (j % 2))).sum())

    def vertex_degrees(self) -> np.ndarray:
        """``(k, n)`` array of vertex degrees."""
        out = np.zeros((self.k, self.n), dtype=np.int64)
        for c in range(self.k):
            axes = tuple(a for a in range(self.k) if a != c)
            out[c] = self.adj.sum(axis=axes)
        return out

    # -- subgraphs ----------------------------------------------------

    def remove_vertices(self, T: Iterable) -> "PartiteHypergraph":
        """``H - T``: drop the vertices of ``T`` and every edge touching them."""
        dead = membership_masks(self.k, self.n, T)
        return PartiteHypergraph(self.k, self.n, self.adj, self.alive & ~dead)

    def with_edges(self, adj: np.ndarray) -> "PartiteHypergraph":
        return PartiteHypergraph(self.k, self.n, adj, self.alive)

    def induced_on(self, lists: Sequence[Sequence[int]]) -> np.ndarray:
        """Sub-array of the edge tensor restricted to the given per-class index lists."""
        return self.adj[np.ix_(*[np.asarray(lst, dtype=np.intp) for lst in lists])]


def all_legal_sets(k: int, n: int, size: int) -> Iterable[tuple[Vertex, ...]]:
    """Every legal set with ``size`` members, classes ascending."""
    for classes in combinations(range(k), size):
        for locs in product(range(n), repeat=size):
            yield tuple(Vertex(c, i) for c, i in zip(classes, locs))
