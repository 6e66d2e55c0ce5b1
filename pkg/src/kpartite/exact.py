"""Complete search for maximum and perfect matchings.

Every matching edge uses exactly one vertex of the smallest class, so the
search walks that class's vertices (fewest incident edges first) and, for
each one, either picks an incident edge disjoint from the current matching
or leaves the vertex uncovered.  Vertex sets are 64-bit masks.  A
transposition table keyed by the set of vertices already decided stores
upper bounds on what the remaining subproblem can still add, and a
counting bound (no class can contribute more edges than it has free
vertices) prunes the rest.

The kernel is compiled with numba and runs in bounded chunks so the
caller can enforce a wall-clock limit.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numba
import numpy as np

from .hypergraph import Matching, PartiteHypergraph

MAX_BITS = 63
TABLE_BITS = 20
CHUNK = 200_000

_EMPTY = np.uint64(0xFFFFFFFFFFFFFFFF)


@dataclass
class SearchStats:
    nodes_expanded: int = 0
    max_depth: int = 0
    elapsed: float = 0.0
    table_hits: int = 0

    def to_dict(self) -> dict:
        return {"nodes_expanded": self.nodes_expanded, "max_depth": self.max_depth,
                "elapsed": round(self.elapsed, 6), "table_hits": self.table_hits}


class SearchTimeout(RuntimeError):
    def __init__(self, stats: SearchStats, best: Matching | None = None):
        super().__init__(f"search timed out after {stats.elapsed:.2f}s "
                         f"({stats.nodes_expanded} nodes)")
        self.stats = stats
        self.best = best or []


@numba.njit(cache=True)
def _popcount(x):
    x = x - ((x >> np.uint64(1)) & np.uint64(0x5555555555555555))
    x = (x & np.uint64(0x3333333333333333)) + ((x >> np.uint64(2)) & np.uint64(0x3333333333333333))
    x = (x + (x >> np.uint64(4))) & np.uint64(0x0F0F0F0F0F0F0F0F)
    return np.int64((x * np.uint64(0x0101010101010101)) >> np.uint64(56))


@numba.njit(cache=True)
def _slot(key, shift):
    return np.int64((key * np.uint64(0x9E3779B97F4A7C15)) >> np.uint64(shift))


@numba.njit(cache=True)
def _kernel(em, vstart, vedges, prefix, classmask, L, target,
            used, sz, pos, chosen, entry_best, bestpath,
            keys, vals, st, budget):
    # st: depth, best, nodes, max_depth, hits, finished
    shift = 64 - TABLE_BITS
    d = st[0]
    best = st[1]
    steps = 0
    ncls = classmask.shape[0]
    while True:
        if d < 0:
            st[5] = 1
            break
        if pos[d] == -1:
            # fresh node
            if steps >= budget:
                break
            steps += 1
            st[2] += 1
            if d > st[3]:
                st[3] = d
            if sz[d] > best:
                best = sz[d]
                for t in range(d):
                    bestpath[t] = chosen[t]
                for t in range(d, L):
                    bestpath[t] = -1
                if best >= target:
                    st[5] = 1
                    break
            if d == L:
                d -= 1
                continue
            free = ~used[d]
            ub = L - d
            for c in range(ncls):
                cnt = _popcount(classmask[c] & free)
                if cnt < ub:
                    ub = cnt
            key = used[d] | prefix[d]
            h = _slot(key, shift)
            if keys[h] == key:
                st[4] += 1
                if vals[h] < ub:
                    ub = vals[h]
            if sz[d] + ub <= best:
                d -= 1
                continue
            entry_best[d] = best
            pos[d] = 0
        cnt_v = vstart[d + 1] - vstart[d]
        descended = False
        while pos[d] < cnt_v:
            e = vedges[vstart[d] + pos[d]]
            pos[d] += 1
            if em[e] & used[d] == 0:
                chosen[d] = e
                used[d + 1] = used[d] | em[e]
                sz[d + 1] = sz[d] + 1
                pos[d + 1] = -1
                d += 1
                descended = True
                break
        if descended:
            continue
        if pos[d] == cnt_v:
            pos[d] += 1
            chosen[d] = -1
            used[d + 1] = used[d]
            sz[d + 1] = sz[d]
            pos[d + 1] = -1
            d += 1
            continue
        # node exhausted
        key = used[d] | prefix[d]
        h = _slot(key, shift)
        keys[h] = key
        vals[h] = best - sz[d]
        d -= 1
    st[0] = d
    st[1] = best
    return steps


def _greedy(H: PartiteHypergraph) -> list[int]:
    """Indices (into ``H.edges()``) of a greedy maximal matching."""
    taken = np.zeros((H.k, H.n), dtype=bool)
    out = []
    for idx, e in enumerate(H.edges()):
        if not any(taken[c, i] for c, i in enumerate(e)):
            out.append(idx)
            for c, i in enumerate(e):
                taken[c, i] = True
    return out


class MatchingSearch:
    """One exact search over ``H``; ``stats`` is filled in as it runs."""

    def __init__(self, H: PartiteHypergraph, timeout: float | None = 60.0):
        if H.k * H.n > MAX_BITS:
            raise ValueError(f"exact search supports k*n <= {MAX_BITS}, got {H.k * H.n}")
        self.H = H
        self.timeout = timeout
        self.stats = SearchStats()

    def _run(self, perfect: bool) -> Matching | None:
        H = self.H
        k, n = H.k, H.n
        t0 = time.perf_counter()
        sizes = H.class_sizes
        if perfect and len(set(sizes)) != 1:
            return None
        edges = H.edges()
        branch = int(np.argmin(sizes))
        verts = H.live(branch)
        L = len(verts)
        if L == 0:
            self.stats.elapsed = time.perf_counter() - t0
            return []
        em = np.array([sum(1 << (c * n + i) for c, i in enumerate(e)) for e in edges], dtype=np.uint64)
        by_vertex: dict[int, list[int]] = {v: [] for v in verts}
        for idx, e in enumerate(edges):
            by_vertex[e[branch]].append(idx)
        verts.sort(key=lambda v: (len(by_vertex[v]), v))
        vstart = np.zeros(L + 1, dtype=np.int64)
        flat: list[int] = []
        for t, v in enumerate(verts):
            flat.extend(by_vertex[v])
            vstart[t + 1] = len(flat)
        vedges = np.array(flat, dtype=np.int64)
        prefix = np.zeros(L + 1, dtype=np.uint64)
        acc = 0
        for t, v in enumerate(verts):
            prefix[t] = acc
            acc |= 1 << (branch * n + v)
        prefix[L] = acc
        classmask = np.array([sum(1 << (c * n + i) for i in H.live(c))
                              for c in range(k) if c != branch], dtype=np.uint64)

        if perfect:
            target, best0, greedy = L, L - 1, []
        else:
            greedy = _greedy(H)
            target, best0 = L, len(greedy)
        used = np.zeros(L + 2, dtype=np.uint64)
        sz = np.zeros(L + 2, dtype=np.int64)
        pos = np.full(L + 2, -1, dtype=np.int64)
        chosen = np.full(L + 1, -1, dtype=np.int64)
        entry_best = np.zeros(L + 1, dtype=np.int64)
        bestpath = np.full(L + 1, -1, dtype=np.int64)
        keys = np.full(1 << TABLE_BITS, _EMPTY, dtype=np.uint64)
        vals = np.zeros(1 << TABLE_BITS, dtype=np.int64)
        st = np.array([0, best0, 0, 0, 0, 0], dtype=np.int64)
        improved = False
        while True:
            _kernel(em, vstart, vedges, prefix, classmask, L, target,
                    used, sz, pos, chosen, entry_best, bestpath, keys, vals, st, CHUNK)
            self.stats.nodes_expanded = int(st[2])
            self.stats.max_depth = int(st[3])
            self.stats.table_hits = int(st[4])
            self.stats.elapsed = time.perf_counter() - t0
            improved = st[1] > best0
            if st[5]:
                break
            if self.timeout is not None and self.stats.elapsed > self.timeout:
                partial = None
                if improved:
                    partial = [edges[int(i)] for i in bestpath if i >= 0]
                elif greedy:
                    partial = [edges[i] for i in greedy]
                raise SearchTimeout(self.stats, partial)
        if improved:
            return [edges[int(i)] for i in bestpath if i >= 0]
        if perfect:
            return None
        return [edges[i] for i in greedy]

    def perfect(self) -> Matching | None:
        return self._run(True)

    def maximum(self) -> Matching:
        return self._run(False)


def find_perfect_matching(H: PartiteHypergraph, timeout: float | None = 60.0) -> Matching | None:
    """A perfect matching of ``H`` or ``None``.  Raises ``SearchTimeout``."""
    return MatchingSearch(H, timeout).perfect()


def max_matching(H: PartiteHypergraph, timeout: float | None = 60.0) -> tuple[int, Matching]:
    M = MatchingSearch(H, timeout).maximum()
    return len(M), M


def verify_matching(H: PartiteHypergraph, M, require_perfect: bool = False) -> bool:
    seen = set()
    for e in M:
        e = tuple(int(x) for x in e)
        if not H.has_edge(e):
            return False
        for c, i in enumerate(e):
            if (c, i) in seen:
                return False
            seen.add((c, i))
    if require_perfect:
        return len(seen) == int(H.alive.sum())
    return True


def block_perfect_matching(H: PartiteHypergraph, lists) -> Matching | None:
    """Perfect matching of the subgraph induced on small per-class vertex lists.

    Plain recursion; meant for blocks of a few vertices per class.
    """
    lists = [sorted(int(i) for i in lst) for lst in lists]
    m = len(lists[0])
    if any(len(lst) != m for lst in lists):
        return None
    if m == 0:
        return []
    sub = H.induced_on(lists)
    k = H.k
    free = [list(range(m)) for _ in range(k)]

    def rec(depth: int) -> list | None:
        if depth == m:
            return []
        a = free[0][0]
        for rest in np.argwhere(sub[a]):
            if all(int(r) in free[c + 1] for c, r in enumerate(rest)):
                picked = (a,) + tuple(int(r) for r in rest)
                for c, x in enumerate(picked):
                    free[c].remove(x)
                got = rec(depth + 1)
                for c, x in enumerate(picked):
                    free[c].append(x)
                    free[c].sort()
                if got is not None:
                    return [picked] + got
        return None

    found = rec(0)
    if found is None:
        return None
    return [tuple(lists[c][x] for c, x in enumerate(e)) for e in found]


def block_perfect_matchings(H: PartiteHypergraph, lists):
    """Every perfect matching of a small induced block, as lists of edges."""
    lists = [sorted(int(i) for i in lst) for lst in lists]
    m = len(lists[0])
    if any(len(lst) != m for lst in lists):
        return
    sub = H.induced_on(lists)
    k = H.k
    free = [set(range(m)) for _ in range(k)]

    def rec(depth: int, acc: list):
        if depth == m:
            yield list(acc)
            return
        a = min(free[0])
        for rest in np.argwhere(sub[a]):
            picked = (a,) + tuple(int(r) for r in rest)
            if all(x in free[c] for c, x in enumerate(picked)):
                for c, x in enumerate(picked):
                    free[c].discard(x)
                acc.append(picked)
                yield from rec(depth + 1, acc)
                acc.pop()
                for c, x in enumerate(picked):
                    free[c].add(x)

    if m == 0:
        yield []
        return
    for pm in rec(0, []):
        yield [tuple(lists[c][x] for c, x in enumerate(e)) for e in pm]
