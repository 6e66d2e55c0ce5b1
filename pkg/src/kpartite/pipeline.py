"""Constructive perfect matching for graphs close to the parity extremal graph.

The construction runs in stages.  Each stage either produces the object it
is responsible for or raises an error carrying a concrete witness:

1. bad vertices ``N`` (many missing extremal edges) and the switched split
   ``A'_i / B'_i``;
2. an edge ``e0`` fixing the parity of ``|B'|`` (or an obstruction);
3. ``M1`` covering ``N`` with edges meeting ``B'`` evenly;
4. ``M2`` equalising the leftover ``D_i`` through a perfect matching of an
   auxiliary complete multipartite graph;
5. for odd k, ``M3`` making the common ``|D_i|`` divisible by ``k - 1``;
6. typed matchings ``M^0 .. M^k`` and rotation exchanges that finish the
   job (for even k a rotation exchange inside ``C'`` and ``D'`` separately).

Large-n constants are soft: violations go to ``warnings`` and the stages
still run.  Every invariant a stage promises is checked and logged.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Sequence

import numpy as np

from .exact import block_perfect_matching, verify_matching
from .extremal import ClosenessConfig, closeness, missing_per_vertex
from .hypergraph import Edge, Matching, PartiteHypergraph, Vertex, parity_tensor
from .parity import ParityCertificate

ClassSets = list[set[int]]


class PipelineError(RuntimeError):
    stage = "pipeline"

    def __init__(self, message: str, **witnesses):
        super().__init__(message)
        self.witnesses = witnesses


class PreconditionError(PipelineError):
    stage = "precondition"


class ObstructionFound(PipelineError):
    stage = "e0"

    def __init__(self, certificate: ParityCertificate):
        super().__init__("every edge meets B' evenly and |B'| is odd",
                         certificate=certificate.to_dict())
        self.certificate = certificate


class GreedyStuck(PipelineError):
    def __init__(self, message: str, stage: str, **witnesses):
        super().__init__(message, **witnesses)
        self.stage = stage


class LiftFailed(PipelineError):
    def __init__(self, message: str, stage: str, **witnesses):
        super().__init__(message, **witnesses)
        self.stage = stage


class ExchangeExhausted(PipelineError):
    def __init__(self, message: str, stage: str, **witnesses):
        super().__init__(message, **witnesses)
        self.stage = stage


@dataclass
class PipelineConfig:
    alpha: float = 0.125
    epsilon: float = 0.01
    tau: float | None = None          # defaults to 1/(9k)
    strict_constants: bool = False
    exchange_cap: int = 1_000_000
    wide_exchange: bool = True        # final C* rotations may borrow any matching edge
    closeness_mode: str = "auto"
    seed: int = 0

    def __post_init__(self):
        if not 0 < self.alpha < 0.25:
            raise ValueError("alpha must lie in (0, 1/4)")
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")

    def tau_for(self, k: int) -> float:
        return self.tau if self.tau is not None else 1.0 / (9 * k)


@dataclass
class Check:
    stage: str
    name: str
    passed: bool
    detail: str = ""

    def to_dict(self) -> dict:
        return {"stage": self.stage, "name": self.name, "passed": self.passed, "detail": self.detail}


@dataclass
class PipelineState:
    k: int
    n: int
    template: list[list[int]] = field(default_factory=list)     # side B_i of the closest extremal copy
    bad_vertices: list[Vertex] = field(default_factory=list)
    a_side: list[list[int]] = field(default_factory=list)
    b_side: list[list[int]] = field(default_factory=list)
    parity_edge: Edge | None = None
    bad_cover: Matching = field(default_factory=list)
    d_balancing: Matching = field(default_factory=list)
    d_divisibility: Matching = field(default_factory=list)
    c_sides: dict[str, list[list[int]]] = field(default_factory=dict)
    d_sides: dict[str, list[list[int]]] = field(default_factory=dict)
    aux_sizes: list[int] = field(default_factory=list)
    balance_offset: int | None = None
    type_matchings: list[Matching] = field(default_factory=list)
    finish: Matching = field(default_factory=list)
    trace: list[Check] = field(default_factory=list)

    def check(self, stage: str, name: str, passed: bool, detail: str = "") -> bool:
        self.trace.append(Check(stage, name, bool(passed), detail))
        return bool(passed)

    def to_dict(self) -> dict:
        return {
            "template": self.template, "bad_vertices": [list(v) for v in self.bad_vertices],
            "a_side": self.a_side, "b_side": self.b_side,
            "parity_edge": list(self.parity_edge) if self.parity_edge else None,
            "bad_cover": [list(e) for e in self.bad_cover], "d_balancing": [list(e) for e in self.d_balancing],
            "d_divisibility": [list(e) for e in self.d_divisibility], "c_sides": self.c_sides,
            "d_sides": self.d_sides, "aux_sizes": self.aux_sizes, "balance_offset": self.balance_offset,
            "type_matchings": [[list(e) for e in M] for M in self.type_matchings],
        }


@dataclass
class PipelineReport:
    status: str                       # perfect_matching | failed
    matching: Matching | None
    failed_stage: str | None
    error: str | None
    witnesses: dict
    checks: list[Check]
    warnings: list[str]
    state: PipelineState

    @property
    def ok(self) -> bool:
        return self.status == "perfect_matching"

    def to_dict(self) -> dict:
        return {
            "status": self.status,
            "matching": None if self.matching is None else [list(e) for e in self.matching],
            "failed_stage": self.failed_stage, "error": self.error,
            "witnesses": _jsonable(self.witnesses),
            "checks": [c.to_dict() for c in self.checks],
            "warnings": self.warnings, "state": self.state.to_dict(),
        }


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple, set)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.integer,)):
        return int(x)
    return x


# -- small helpers ---------------------------------------------------------

def _sorted_sets(sets: Sequence[Iterable[int]]) -> list[list[int]]:
    return [sorted(int(i) for i in s) for s in sets]


def _edges_within(H: PartiteHypergraph, allowed: Sequence[Iterable[int]]) -> list[Edge]:
    """Edges of H with the class-c vertex drawn from ``allowed[c]``, lexicographic."""
    lists = _sorted_sets(allowed)
    if any(not lst for lst in lists):
        return []
    sub = H.induced_on(lists)
    return [tuple(lists[c][int(x)] for c, x in enumerate(row)) for row in np.argwhere(sub)]


def _first_edge(H, allowed, accept=None) -> Edge | None:
    for e in _edges_within(H, allowed):
        if accept is None or accept(e):
            return e
    return None


def _covered(M: Iterable[Edge], k: int) -> ClassSets:
    out: ClassSets = [set() for _ in range(k)]
    for e in M:
        for c, i in enumerate(e):
            out[c].add(int(i))
    return out


def _minus(sets: ClassSets, used: ClassSets) -> ClassSets:
    return [set(s) - u for s, u in zip(sets, used)]


def _meet(e: Edge, sets: Sequence[set[int]]) -> int:
    return sum(1 for c, i in enumerate(e) if i in sets[c])


def _disjoint(matchings: Sequence[Matching]) -> bool:
    seen = set()
    for M in matchings:
        for e in M:
            for c, i in enumerate(e):
                if (c, i) in seen:
                    return False
                seen.add((c, i))
    return True


# -- stage operations ------------------------------------------------------

def compute_bad_set(H: PartiteHypergraph, B: Sequence[Sequence[int]], epsilon: float) -> list[Vertex]:
    """Vertices missing at least ``sqrt(eps) * n^(k-1)`` edges of the extremal copy at ``B``."""
    miss = missing_per_vertex(H, B)
    thresh = math.sqrt(epsilon) * H.n ** (H.k - 1)
    return [Vertex(c, i) for c in range(H.k) for i in range(H.n)
            if H.alive[c, i] and miss[c, i] >= thresh]


def switch_classes(H: PartiteHypergraph, B: Sequence[Sequence[int]], N: Iterable
                   ) -> tuple[list[list[int]], list[list[int]]]:
    """Move bad vertices with few edges of even ``B``-parity to the other side."""
    k, n = H.k, H.n
    Bsets = [set(b) for b in B]
    A = [set(range(n)) - Bsets[c] for c in range(k)]
    Ap = [set(a) for a in A]
    Bp = [set(b) for b in Bsets]
    Bvert = [(c, i) for c in range(k) for i in Bsets[c]]
    par = parity_tensor(_mask(k, n, Bvert))
    thresh = n ** (k - 1) / 8
    for v in N:
        c, i = int(v[0]), int(v[1])
        index = [slice(None)] * k
        index[c] = i
        d0 = int((H.adj[tuple(index)] & (par[tuple(index)] == 0)).sum())
        if d0 < thresh:
            if i in Bsets[c]:
                Bp[c].discard(i)
                Ap[c].add(i)
            else:
                Ap[c].discard(i)
                Bp[c].add(i)
    return _sorted_sets(Ap), _sorted_sets(Bp)


def _mask(k: int, n: int, verts) -> np.ndarray:
    m = np.zeros((k, n), dtype=bool)
    for c, i in verts:
        m[c, i] = True
    return m


def find_e0(H: PartiteHypergraph, Bp: Sequence[Sequence[int]]) -> Edge | None:
    """``None`` if ``|B'|`` is even, else the first edge meeting ``B'`` oddly."""
    total = sum(len(b) for b in Bp)
    if total % 2 == 0:
        return None
    par = parity_tensor(_mask(H.k, H.n, [(c, i) for c, b in enumerate(Bp) for i in b]))
    hits = np.argwhere(H.adj & (par == 1))
    if len(hits) == 0:
        raise ObstructionFound(ParityCertificate(tuple(tuple(sorted(b)) for b in Bp)))
    return tuple(int(x) for x in hits[0])


def build_m1(H: PartiteHypergraph, e0: Edge | None, N: Iterable, Bp: Sequence[Sequence[int]]) -> Matching:
    """Greedy matching covering ``N - e0`` with edges meeting ``B' - e0`` evenly."""
    k, n = H.k, H.n
    used: ClassSets = [set() for _ in range(k)]
    if e0 is not None:
        for c, i in enumerate(e0):
            used[c].add(i)
    Bsets = [set(b) for b in Bp]
    bad = sorted((int(v[0]), int(v[1])) for v in N)
    bad_sets: ClassSets = [set() for _ in range(k)]
    for c, i in bad:
        bad_sets[c].add(i)
    M: Matching = []
    even = lambda e: _meet(e, Bsets) % 2 == 0
    for c, i in bad:
        if i in used[c]:
            continue
        free = [set(range(n)) - used[x] - ({j for j in range(n) if not H.alive[x, j]}) for x in range(k)]
        free[c] = {i}
        away = [free[x] - (bad_sets[x] if x != c else set()) for x in range(k)]
        away[c] = {i}
        e = _first_edge(H, away, even) or _first_edge(H, free, even)
        if e is None:
            raise GreedyStuck(f"no even edge left at bad vertex {(c, i)}", "M1", vertex=[c, i])
        M.append(e)
        for x, j in enumerate(e):
            used[x].add(j)
    return M


def multipartite_2graph_pm(sizes: Sequence[int]) -> list[tuple[tuple[int, int], tuple[int, int]]] | None:
    """Perfect matching of the complete multipartite graph with the given class sizes.

    Pairs are ``((class, index), (class, index))``.  Greedy: always pair the
    two classes with the most unmatched vertices (lowest class on ties).
    """
    sizes = [int(s) for s in sizes]
    total = sum(sizes)
    if any(s < 0 for s in sizes):
        raise ValueError("class sizes must be non-negative")
    if total % 2 or (sizes and max(sizes) > total // 2):
        return None
    left = list(sizes)
    nxt = [0] * len(sizes)
    pairs = []
    while sum(left):
        order = sorted(range(len(left)), key=lambda c: (-left[c], c))
        p, q = order[0], order[1]
        if left[q] == 0:
            return None
        pairs.append(((p, nxt[p]), (q, nxt[q])))
        nxt[p] += 1
        nxt[q] += 1
        left[p] -= 1
        left[q] -= 1
    return pairs


def m2_plan(D_sizes: Sequence[int]) -> tuple[list[int], int, list[int]]:
    """Class order (largest ``D_i`` first), the parity fix ``r`` and auxiliary sizes ``W_i``."""
    k = len(D_sizes)
    order = sorted(range(k), key=lambda c: (-D_sizes[c], c))
    top, bottom = D_sizes[order[0]], D_sizes[order[-1]]
    r = top % 2
    W = [0] * k
    if top != bottom:
        for c in range(k):
            W[c] = (D_sizes[c] - bottom) + (top + r) - bottom
    return order, r, W


def build_m2(H: PartiteHypergraph, C: Sequence[Iterable[int]], D: Sequence[Iterable[int]]) -> Matching:
    """Matching whose edges each take two ``D`` vertices and equalise ``|D_i|``."""
    k = H.k
    C = [set(x) for x in C]
    D = [set(x) for x in D]
    sizes = [len(x) for x in D]
    if sum(sizes) % 2:
        raise ValueError("build_m2 needs |D| even")
    order, r, W = m2_plan(sizes)
    if not any(W):
        return []
    if any(w > s for w, s in zip(W, sizes)):
        raise LiftFailed("auxiliary class larger than its D side", "M2", sizes=sizes, W=W)
    pairs = multipartite_2graph_pm(W)
    if pairs is None:
        raise LiftFailed("auxiliary graph has no perfect matching", "M2", W=W)
    freeC = [set(x) for x in C]
    freeD = [set(x) for x in D]
    M: Matching = []
    for (p, _), (q, _) in pairs:
        allowed = [freeC[c] if c not in (p, q) else freeD[c] for c in range(k)]
        e = _first_edge(H, allowed)
        if e is None:
            raise LiftFailed(f"no edge with D-vertices in classes {p}, {q} and C elsewhere",
                             "M2", pair=[p, q], matched=len(M))
        M.append(e)
        for c, i in enumerate(e):
            freeC[c].discard(i)
            freeD[c].discard(i)
    return M


def build_m3(H: PartiteHypergraph, C: Sequence[Iterable[int]], D: Sequence[Iterable[int]]) -> Matching:
    """Rounds of k edges, each round taking two ``D`` vertices from every class.

    Edge ``i`` of a round has its ``D`` vertices in classes ``i`` and ``i+1``
    (mod k) and ``C`` vertices elsewhere.
    """
    k = H.k
    if k % 2 == 0:
        raise ValueError("build_m3 is for odd k")
    D = [set(x) for x in D]
    C = [set(x) for x in C]
    sizes = [len(x) for x in D]
    if len(set(sizes)) != 1:
        raise ValueError("build_m3 needs equal |D_i|")
    s = sizes[0] % (k - 1)
    if s % 2:
        raise ValueError("|D'| must be even")
    M: Matching = []
    for rnd in range(s // 2):
        for i in range(k):
            nxt = (i + 1) % k
            allowed = [D[c] if c in (i, nxt) else C[c] for c in range(k)]
            e = _first_edge(H, allowed)
            if e is None:
                raise LiftFailed(f"round {rnd}: no edge with D-vertices in classes {i}, {nxt}",
                                 "M3", round=rnd, pair=[i, nxt])
            M.append(e)
            for c, x in enumerate(e):
                D[c].discard(x)
                C[c].discard(x)
    return M


def _rotation(lefts: Sequence[int], block: Sequence[Edge], j: int) -> Edge:
    """``{u_j, v_{1,j+1}, ..., v_{k-1,j+k-1}}`` for leftovers ``u`` and block edges ``v``."""
    k = len(lefts)
    e = [0] * k
    e[j] = lefts[j]
    for t, edge in enumerate(block):
        c = (j + t + 1) % k
        e[c] = edge[c]
    return tuple(e)


def _exchange(H: PartiteHypergraph, pool: Matching, lefts: Sequence[int], cap: int,
              stage: str) -> tuple[list[Edge], list[Edge]]:
    """Find up to ``k-1`` pool edges whose vertices plus the leftover set carry a perfect matching.

    Returns ``(removed, added)``; raises ``ExchangeExhausted`` with the
    missing rotation edges when nothing works within ``cap`` subsets.
    """
    k = H.k
    tried = 0
    missing: list[list[int]] = []
    for size in range(0, min(k - 1, len(pool)) + 1):
        for block in combinations(pool, size):
            tried += 1
            if tried > cap:
                break
            lists = [[lefts[c]] + [e[c] for e in block] for c in range(k)]
            pm = block_perfect_matching(H, lists)
            if pm is not None:
                return list(block), pm
            if size == k - 1 and len(missing) < 20:
                for j in range(k):
                    f = _rotation(lefts, block, j)
                    if not H.has_edge(f):
                        missing.append(list(f))
    raise ExchangeExhausted(f"{stage}: no exchange absorbs leftover {list(lefts)}", stage,
                            leftover=list(lefts), subsets_tried=min(tried, cap),
                            missing_rotation_edges=missing)


def _greedy_within(H: PartiteHypergraph, allowed: ClassSets) -> Matching:
    free = [set(a) for a in allowed]
    M: Matching = []
    for e in _edges_within(H, allowed):
        if all(i in free[c] for c, i in enumerate(e)):
            M.append(e)
            for c, i in enumerate(e):
                free[c].discard(i)
    return M


def _grow_perfect(H: PartiteHypergraph, allowed: Sequence[Iterable[int]], cap: int, stage: str) -> Matching:
    allowed = [set(a) for a in allowed]
    if len({len(a) for a in allowed}) != 1:
        raise ExchangeExhausted(f"{stage}: unequal sides", stage, sizes=[len(a) for a in allowed])
    M = _greedy_within(H, allowed)
    while True:
        left = _minus(allowed, _covered(M, H.k))
        if not left[0]:
            return M
        lefts = [min(s) for s in left]
        removed, added = _exchange(H, M, lefts, cap, stage)
        M = [e for e in M if e not in removed] + added


def finish_even_k(H: PartiteHypergraph, C: Sequence[Iterable[int]], D: Sequence[Iterable[int]],
                  cap: int = 1_000_000) -> Matching:
    """Perfect matchings inside ``D`` and inside ``C``, grown by rotation exchanges."""
    if H.k % 2:
        raise ValueError("finish_even_k is for even k")
    return _grow_perfect(H, D, cap, "even-D") + _grow_perfect(H, C, cap, "even-C")


def edge_type(e: Edge, C: Sequence[set[int]]) -> int | None:
    """0 if ``e`` lies inside ``C``; ``j + 1`` if its only ``C`` vertex is in class ``j``."""
    inC = [c for c, i in enumerate(e) if i in C[c]]
    if len(inC) == len(e):
        return 0
    if len(inC) == 1:
        return inC[0] + 1
    return None


def _typed_allowed(k: int, j: int, freeC: ClassSets, freeD: ClassSets) -> ClassSets:
    if j == 0:
        return freeC
    return [freeC[c] if c == j - 1 else freeD[c] for c in range(k)]


def build_type_matchings(H: PartiteHypergraph, C: Sequence[Iterable[int]], D: Sequence[Iterable[int]],
                         cfg: PipelineConfig | None = None) -> list[Matching]:
    """``floor(tau n)`` edges of each type 0..k, greedily and pairwise disjoint.

    Index ``j`` of the result holds type-``j`` edges, type ``j >= 1`` meaning
    the single ``C`` vertex sits in class ``j - 1``.
    """
    cfg = cfg or PipelineConfig()
    k, n = H.k, H.n
    m = int(math.floor(cfg.tau_for(k) * n))
    freeC = [set(x) for x in C]
    freeD = [set(x) for x in D]
    out: list[Matching] = []
    for j in range(k + 1):
        allowed = _typed_allowed(k, j, freeC, freeD)
        got: Matching = []
        for e in _edges_within(H, allowed):
            if len(got) == m:
                break
            if all(i in allowed[c] for c, i in enumerate(e)):
                got.append(e)
                for c, i in enumerate(e):
                    freeC[c].discard(i)
                    freeD[c].discard(i)
        if len(got) < m:
            if j == 0:
                cls = min(range(k), key=lambda c: (len(freeC[c]), c))
            else:
                cls = j - 1
            raise GreedyStuck(f"only {len(got)} of {m} type-{j} edges", "type-matchings",
                              type=j, cls=cls, found=len(got))
        out.append(got)
    return out


def finish_odd_k(H: PartiteHypergraph, C: Sequence[Iterable[int]], D: Sequence[Iterable[int]],
                 typed: list[Matching], cfg: PipelineConfig | None = None,
                 trace: list[Check] | None = None) -> Matching:
    """Grow the typed matchings to a perfect matching of the residual graph.

    Phase A adds one edge of every type 1..k at a time while that is
    possible, then fills type 0 greedily.  Phase B absorbs leftover ``D``
    vertices: for each class j, ``k - 1`` leftover ``D`` vertices and one
    ``C_j`` vertex are swapped into the type-j matching.  Phase C absorbs
    leftover ``C`` vertices through exchanges with type-0 edges.
    """
    cfg = cfg or PipelineConfig()
    trace = trace if trace is not None else []
    k = H.k
    Cs = [set(x) for x in C]
    Ds = [set(x) for x in D]
    T = [list(M) for M in typed]

    def free_sets():
        used = _covered([e for M in T for e in M], k)
        return _minus(Cs, used), _minus(Ds, used)

    # phase A
    while True:
        fC, fD = free_sets()
        batch = []
        for j in range(1, k + 1):
            e = _first_edge(H, _typed_allowed(k, j, fC, fD))
            if e is None:
                break
            batch.append(e)
            for c, i in enumerate(e):
                fC[c].discard(i)
                fD[c].discard(i)
        if len(batch) < k:
            break
        for j, e in enumerate(batch, start=1):
            T[j].append(e)
    fC, fD = free_sets()
    T[0].extend(_greedy_within(H, fC))
    trace.append(Check("finish-odd", "typed sizes equal after augmentation",
                       len({len(M) for M in T[1:]}) == 1, str([len(M) for M in T])))

    # phase B
    while True:
        fC, fD = free_sets()
        if not any(fD):
            break
        if any(len(s) < k - 1 for s in fD):
            raise ExchangeExhausted("leftover D sides too small for a rotation", "finish-odd-D",
                                    leftover_sizes=[len(s) for s in fD])
        s = [sorted(x)[:k - 1] for x in fD]
        donor = None
        if all(fC):
            w = [min(x) for x in fC]
        elif T[0]:
            donor = T[0][0]
            w = list(donor)
        else:
            raise ExchangeExhausted("no free C vertices and no type-0 edge to borrow",
                                    "finish-odd-D", leftover_D=[sorted(x) for x in fD])
        swaps = []
        for j in range(k):
            # S_j: w_j plus one leftover D vertex from every other class
            S = [0] * k
            S[j] = w[j]
            for i in range(k):
                if i != j:
                    S[i] = s[i][j] if j < k - 1 else s[i][i]
            removed, added = _exchange_typed(H, T[j + 1], S, cfg.exchange_cap, j)
            swaps.append((removed, added))
        if donor is not None:
            T[0].remove(donor)
        for j, (removed, added) in enumerate(swaps):
            T[j + 1] = [e for e in T[j + 1] if e not in removed] + added

    # phase C
    while True:
        fC, _ = free_sets()
        if not any(fC):
            break
        lefts = [min(x) for x in fC]
        try:
            removed, added = _exchange(H, T[0], lefts, cfg.exchange_cap, "finish-odd-C")
            T[0] = [e for e in T[0] if e not in removed] + added
        except ExchangeExhausted:
            if not cfg.wide_exchange:
                raise
            pool = [e for M in T for e in M]
            removed, added = _exchange(H, pool, lefts, cfg.exchange_cap, "finish-odd-C")
            trace.append(Check("finish-odd", "wide exchange used", True, str(removed)))
            for idx in range(len(T)):
                T[idx] = [e for e in T[idx] if e not in removed]
            T[0].extend(added)
    return [e for M in T for e in M]


def _exchange_typed(H, pool: Matching, S: Sequence[int], cap: int, j: int):
    return _exchange(H, pool, S, cap, f"finish-odd-D(type {j + 1})")


# -- driver ----------------------------------------------------------------

def _lists(sets) -> list[list[int]]:
    return _sorted_sets(sets)


def run_pipeline(H: PartiteHypergraph, cfg: PipelineConfig | None = None) -> PipelineReport:
    """Run every stage; returns a report (a verified perfect matching on success).

    ``ObstructionFound`` propagates; ``PreconditionError`` is raised when
    the co-degree floor fails.
    """
    cfg = cfg or PipelineConfig()
    k, n = H.k, H.n
    st = PipelineState(k, n)
    warnings: list[str] = []
    if k < 3:
        raise PreconditionError("the construction needs k >= 3", k=k)
    if not H.balanced or H.class_sizes[0] != n:
        raise PreconditionError("all classes must be complete", sizes=H.class_sizes)
    delta = H.min_codegree()
    floor = (0.5 - cfg.alpha) * n
    if delta < floor:
        raise PreconditionError(f"min co-degree {delta} below (1/2 - alpha) n = {floor:.2f}",
                                min_codegree=delta, floor=floor)
    root = math.sqrt(cfg.epsilon)
    if not root < min(1 / (100 * k * k), 1 / (k * (10 * k * k) ** (k - 1))):
        warnings.append(f"sqrt(eps) = {root:.4g} exceeds the large-n bound")
    if n <= 100 * k * k:
        if cfg.strict_constants:
            raise PreconditionError(f"n = {n} <= 100 k^2 under strict constants", n=n)
        warnings.append(f"n = {n} <= 100 k^2 = {100 * k * k}")

    def report(status, stage=None, err=None, witnesses=None, matching=None):
        return PipelineReport(status, matching, stage, err, witnesses or {}, st.trace, warnings, st)

    try:
        cost, params = closeness(H, ClosenessConfig(epsilon=cfg.epsilon, search_mode=cfg.closeness_mode,
                                                    seed=cfg.seed))
        st.template = [list(b) for b in params.D]
        close = cost < cfg.epsilon * n ** k
        if not close:
            warnings.append(f"closeness cost {cost} is not below eps n^k = {cfg.epsilon * n ** k:.2f}")

        st.bad_vertices = compute_bad_set(H, st.template, cfg.epsilon)
        if close:
            st.check("N", "|N| <= sqrt(eps) k n", len(st.bad_vertices) <= root * k * n, f"|N| = {len(st.bad_vertices)}")

        st.a_side, st.b_side = switch_classes(H, st.template, st.bad_vertices)
        st.check("switch", "A'_i, B'_i partition V_i",
                 all(set(a).isdisjoint(b) and set(a) | set(b) == set(range(n)) for a, b in zip(st.a_side, st.b_side)))

        st.parity_edge = find_e0(H, st.b_side)
        e0set = [set() if st.parity_edge is None else {st.parity_edge[c]} for c in range(k)]
        st.check("e0", "|B' - e0| even", sum(len(set(b) - e0set[c]) for c, b in enumerate(st.b_side)) % 2 == 0)

        st.bad_cover = build_m1(H, st.parity_edge, st.bad_vertices, st.b_side)
        cov1 = _covered(st.bad_cover, k)
        st.check("M1", "N - e0 covered", all(v[1] in cov1[v[0]] or v[1] in e0set[v[0]] for v in st.bad_vertices))
        Bp_less = [set(b) - e0set[c] for c, b in enumerate(st.b_side)]
        st.check("M1", "edges meet B' - e0 evenly", all(_meet(e, Bp_less) % 2 == 0 for e in st.bad_cover))
        st.check("M1", "disjoint from e0", _disjoint([st.bad_cover, [st.parity_edge] if st.parity_edge else []]))
        st.check("M1", "|M1| <= |N|", len(st.bad_cover) <= len(st.bad_vertices))

        gone = _covered(st.bad_cover + ([st.parity_edge] if st.parity_edge else []), k)
        C = _minus([set(a) for a in st.a_side], gone)
        D = _minus([set(b) for b in st.b_side], gone)
        st.c_sides["after_M1"], st.d_sides["after_M1"] = _lists(C), _lists(D)
        _, st.balance_offset, st.aux_sizes = m2_plan([len(x) for x in D])

        st.d_balancing = build_m2(H, C, D)
        gone2 = _covered(st.d_balancing, k)
        Dp = _minus(D, gone2)
        Cp = _minus(C, gone2)
        st.c_sides["after_M2"], st.d_sides["after_M2"] = _lists(Cp), _lists(Dp)
        st.check("M2", "|D_i - V(M2)| equal", len({len(x) for x in Dp}) == 1, str([len(x) for x in Dp]))
        st.check("M2", "|D - V(M2)| even", sum(len(x) for x in Dp) % 2 == 0)
        st.check("M2", "each edge has two D vertices", all(_meet(e, D) == 2 for e in st.d_balancing))
        st.check("M2", "residual D sides positive", len(Dp[0]) > 0, str(len(Dp[0])))

        if k % 2 == 0:
            st.finish = finish_even_k(H, Cp, Dp, cfg.exchange_cap)
        else:
            st.d_divisibility = build_m3(H, Cp, Dp)
            gone3 = _covered(st.d_divisibility, k)
            Ds = _minus(Dp, gone3)
            Cs = _minus(Cp, gone3)
            st.c_sides["after_M3"], st.d_sides["after_M3"] = _lists(Cs), _lists(Ds)
            sizes = {len(x) for x in Ds}
            st.check("M3", "|D_i - V(M3)| equal", len(sizes) == 1, str(sorted(sizes)))
            st.check("M3", "|D_i - V(M3)| divisible by k-1", all(s % (k - 1) == 0 for s in sizes))
            st.check("M3", "|M3| <= k^2/2", len(st.d_divisibility) <= k * k / 2)

            st.type_matchings = build_type_matchings(H, Cs, Ds, cfg)
            m = int(math.floor(cfg.tau_for(k) * n))
            st.check("types", "typed matchings pairwise disjoint", _disjoint(st.type_matchings))
            st.check("types", "edge types as labelled",
                     all(edge_type(e, Cs) == j for j, M in enumerate(st.type_matchings) for e in M))
            st.check("types", "sizes equal floor(tau n)", all(len(M) == m for M in st.type_matchings), f"m = {m}")

            st.finish = finish_odd_k(H, Cs, Ds, st.type_matchings, cfg, st.trace)
    except ObstructionFound:
        raise
    except PipelineError as err:
        return report("failed", err.stage, str(err), err.witnesses)

    total = ([st.parity_edge] if st.parity_edge else []) + st.bad_cover + st.d_balancing + st.d_divisibility + st.finish
    ok = verify_matching(H, total, require_perfect=True)
    st.check("final", "perfect matching verified", ok)
    if not ok:
        return report("failed", "final", "assembled edges are not a perfect matching",
                      {"matching": [list(e) for e in total]})
    if not all(c.passed for c in st.trace):
        bad = [c.to_dict() for c in st.trace if not c.passed]
        warnings.append(f"{len(bad)} stage checks failed")
    return report("perfect_matching", matching=sorted(total))
