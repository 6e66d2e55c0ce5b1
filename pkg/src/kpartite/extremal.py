"""Parity-defined extremal graphs and distance to them.

``H0(d_1, ..., d_k; k, n)`` keeps exactly the legal k-tuples that meet the
distinguished set ``D = D_1 ∪ ... ∪ D_k`` (``|D_i| = d_i``) in an even number
of vertices.  ``H0(k, n)`` is the balanced case ``d_i = floor(n/2)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations, product
from typing import Sequence

import numpy as np

from .hypergraph import PartiteHypergraph, parity_tensor


@dataclass(frozen=True)
class H0Params:
    k: int
    n: int
    d: tuple[int, ...]
    D_choice: tuple[tuple[int, ...], ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "d", tuple(int(x) for x in self.d))
        if len(self.d) != self.k:
            raise ValueError(f"need {self.k} class sizes, got {len(self.d)}")
        if any(not 0 <= x <= self.n for x in self.d):
            raise ValueError(f"every d_i must lie in [0, {self.n}]")
        if self.D_choice is not None:
            D = tuple(tuple(sorted(int(i) for i in Di)) for Di in self.D_choice)
            if len(D) != self.k or any(len(Di) != di for Di, di in zip(D, self.d)):
                raise ValueError("D_choice sizes must match d")
            if any(len(set(Di)) != len(Di) or any(not 0 <= i < self.n for i in Di) for Di in D):
                raise ValueError("D_choice entries must be distinct local indices")
            object.__setattr__(self, "D_choice", D)

    @property
    def D(self) -> tuple[tuple[int, ...], ...]:
        if self.D_choice is not None:
            return self.D_choice
        return tuple(tuple(range(di)) for di in self.d)

    def masks(self) -> np.ndarray:
        m = np.zeros((self.k, self.n), dtype=bool)
        for c, Dc in enumerate(self.D):
            m[c, list(Dc)] = True
        return m

    def to_dict(self) -> dict:
        return {"k": self.k, "n": self.n, "d": list(self.d), "D": [list(x) for x in self.D]}


@dataclass
class ClosenessConfig:
    epsilon: float = 0.01
    search_mode: str = "auto"      # exact | local_search | auto
    max_iters: int = 200
    restarts: int = 8
    seed: int = 0
    exact_limit: int = 2_000_000   # largest C(n, n//2)^(k-1) handled by "auto" as exact

    def __post_init__(self):
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        if self.search_mode not in ("exact", "local_search", "auto"):
            raise ValueError(f"unknown search mode {self.search_mode!r}")


def build_h0(p: H0Params) -> PartiteHypergraph:
    par = parity_tensor(p.masks())
    return PartiteHypergraph(p.k, p.n, par == 0)


def h0(k: int, n: int, d: Sequence[int], D: Sequence[Sequence[int]] | None = None) -> PartiteHypergraph:
    return build_h0(H0Params(k, n, tuple(d), None if D is None else tuple(map(tuple, D))))


def build_h0_canonical(k: int, n: int) -> PartiteHypergraph:
    return build_h0(H0Params(k, n, (n // 2,) * k))


def build_remark_graph(k: int, n: int) -> PartiteHypergraph:
    """The graph J: all classes carry ``n/2`` distinguished vertices except the last, which carries ``n/2 + 1``."""
    if n % 2:
        raise ValueError("J needs even n")
    return build_h0(H0Params(k, n, (n // 2,) * (k - 1) + (n // 2 + 1,)))


def h0_edge_count(k: int, n: int, d: Sequence[int]) -> int:
    """Closed form: sum over even-size class subsets T of prod_{T} d_i * prod_{not T} (n - d_i)."""
    total = 0
    for size in range(0, k + 1, 2):
        for T in combinations(range(k), size):
            term = 1
            for i in range(k):
                term *= d[i] if i in T else n - d[i]
            total += term
    return total


def missing_edges(H: PartiteHypergraph, B: Sequence[Sequence[int]]) -> np.ndarray:
    """Boolean tensor of the edges of the H0 copy at ``B`` that ``H`` lacks."""
    p = H0Params(H.k, H.n, tuple(len(b) for b in B), tuple(map(tuple, B)))
    return (parity_tensor(p.masks()) == 0) & ~H.adj


def missing_per_vertex(H: PartiteHypergraph, B: Sequence[Sequence[int]]) -> np.ndarray:
    """``|N_{H0}(v) - N_H(v)|`` for every vertex, as a ``(k, n)`` array."""
    miss = missing_edges(H, B)
    out = np.zeros((H.k, H.n), dtype=np.int64)
    for c in range(H.k):
        out[c] = miss.sum(axis=tuple(a for a in range(H.k) if a != c))
    return out


def closeness_cost(H: PartiteHypergraph, B: Sequence[Sequence[int]]) -> int:
    return int(missing_edges(H, B).sum())


def _exact_closeness(H: PartiteHypergraph) -> tuple[int, list[list[int]]]:
    # Enumerate B for the first k-2 classes, vectorise over class k-2,
    # and pick the last class greedily: its cost splits per vertex.
    k, n = H.k, H.n
    m = n // 2
    miss = (~H.adj).astype(np.int64)
    combos = list(combinations(range(n), m))
    Y = np.zeros((len(combos), n), dtype=np.int64)
    for r, cmb in enumerate(combos):
        Y[r, list(cmb)] = 1
    best_cost, best_B = None, None
    for prefix in product(combos, repeat=k - 2):
        if k > 2:
            masks = np.zeros((k - 2, n), dtype=bool)
            for c, cmb in enumerate(prefix):
                masks[c, list(cmb)] = True
            P = parity_tensor(masks).astype(np.int64)
            R1 = np.tensordot(P, miss, axes=k - 2)
            R0 = np.tensordot(1 - P, miss, axes=k - 2)
        else:
            R0, R1 = miss, np.zeros_like(miss)
        cost_out = (1 - Y) @ R0 + Y @ R1
        cost_in = Y @ R0 + (1 - Y) @ R1
        delta = cost_in - cost_out
        order = np.argsort(delta, axis=1, kind="stable")[:, :m]
        totals = cost_out.sum(axis=1) + np.take_along_axis(delta, order, axis=1).sum(axis=1)
        r = int(np.argmin(totals))
        if best_cost is None or totals[r] < best_cost:
            best_cost = int(totals[r])
            best_B = [list(c) for c in prefix] + [list(combos[r]), sorted(int(x) for x in order[r])]
    return best_cost, best_B


def _local_closeness(H: PartiteHypergraph, cfg: ClosenessConfig) -> tuple[int, list[list[int]]]:
    k, n = H.k, H.n
    m = n // 2
    rng = np.random.default_rng(cfg.seed)
    best_cost, best_B = None, None
    starts = [[list(range(m)) for _ in range(k)]]
    for _ in range(max(cfg.restarts - 1, 0)):
        starts.append([sorted(int(x) for x in rng.choice(n, size=m, replace=False)) for _ in range(k)])
    for B in starts:
        cost = closeness_cost(H, B)
        for _ in range(cfg.max_iters):
            move = None
            for c in range(k):
                inside = B[c]
                outside = [x for x in range(n) if x not in inside]
                for u in inside:
                    for w in outside:
                        trial = [list(b) for b in B]
                        trial[c] = sorted([x for x in inside if x != u] + [w])
                        t = closeness_cost(H, trial)
                        if t < cost and (move is None or t < move[0]):
                            move = (t, trial)
            if move is None:
                break
            cost, B = move
        if best_cost is None or cost < best_cost:
            best_cost, best_B = cost, B
    return best_cost, best_B


def exact_closeness_size(k: int, n: int) -> int:
    return math.comb(n, n // 2) ** (k - 1)


def closeness(H: PartiteHypergraph, cfg: ClosenessConfig | None = None) -> tuple[int, H0Params]:
    """Minimum number of edges of a partition-structured copy of H0(k, n) missing from ``H``.

    Copies are parameterised by the choice of ``B_i ⊆ V_i`` with
    ``|B_i| = floor(n/2)``.  Exact mode is globally optimal; local search
    returns an upper bound.
    """
    cfg = cfg or ClosenessConfig()
    if not H.balanced or H.class_sizes[0] != H.n:
        raise ValueError("closeness needs all classes of full size n")
    mode = cfg.search_mode
    if mode == "auto":
        mode = "exact" if exact_closeness_size(H.k, H.n) <= cfg.exact_limit else "local_search"
    if mode == "exact":
        cost, B = _exact_closeness(H)
    else:
        cost, B = _local_closeness(H, cfg)
    return cost, H0Params(H.k, H.n, tuple(len(b) for b in B), tuple(map(tuple, B)))


def is_eps_close(H: PartiteHypergraph, cfg: ClosenessConfig | None = None) -> bool:
    cfg = cfg or ClosenessConfig()
    cost, _ = closeness(H, cfg)
    return cost < cfg.epsilon * H.n ** H.k
