"""Absorbing structures for graphs far from the parity extremal graph.

For a legal k-set ``S = {x_0, ..., x_{k-1}}`` (``x_c`` in class ``c``) a
k-matching ``e_0, ..., e_{k-1}`` is S-absorbing when swapping the class-c
vertex ``y_c`` of ``e_c`` for ``x_c`` keeps every ``e_c`` an edge and the
displaced ``y``'s form an edge ``f`` themselves.  The (k+1) variant adds an
extra edge ``e_x`` and routes the displaced vertex of a pivot class through
it (``f'`` and ``f''`` below).  Either way the matching plus ``S`` carries a
perfect matching, which is how leftover vertices get absorbed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations, permutations
from typing import Iterable, Sequence

import numpy as np

from .exact import block_perfect_matching, block_perfect_matchings, max_matching, verify_matching
from .hypergraph import Edge, Matching, PartiteHypergraph, Vertex

K_MATCHING = "k_matching"
K_PLUS_1 = "k_plus_1_matching"


class FamilyNotFound(RuntimeError):
    def __init__(self, message: str, deficits: dict):
        super().__init__(message)
        self.deficits = deficits


@dataclass
class AbsorbConfig:
    log_base: str = "e"                          # "e" or "2"
    sample_probability_override: float | None = None
    family_target_per_set: int | None = None     # defaults to k
    max_samples: int = 50_000                    # cap on sampled candidate blocks per round
    max_rounds: int = 64                         # probability doublings
    max_blocks: int | None = None
    family_attempts: int = 8
    exact_budget: int = 20_000                   # prefix enumerations for the dense-subset test
    mc_samples: int = 400
    timeout: float = 60.0
    seed: int = 0

    def __post_init__(self):
        if self.log_base not in ("e", "2"):
            raise ValueError("log_base must be 'e' or '2'")
        p = self.sample_probability_override
        if p is not None and not 0 < p <= 1:
            raise ValueError("probabilities must lie in (0, 1]")

    def log(self, x: float) -> float:
        return math.log(x) if self.log_base == "e" else math.log2(x)


# -- dense subsets and Lambda ---------------------------------------------

def edge_count_within(H: PartiteHypergraph, *N: Iterable[int]) -> int:
    """Edges of ``H`` with every vertex inside the given per-class sets."""
    if len(N) == 1 and len(N[0]) == H.k and not isinstance(next(iter(N[0]), 0), (int, np.integer)):
        N = tuple(N[0])
    lists = [sorted(int(i) for i in x) for x in N]
    if len(lists) != H.k:
        raise ValueError("need one vertex set per class")
    if any(not lst for lst in lists):
        return 0
    return int(H.induced_on(lists).sum())


def lambda_threshold(n: int, cfg: AbsorbConfig) -> float:
    return (0.5 + 2 / cfg.log(n)) * n


def lambda_set(H: PartiteHypergraph, j: int, cfg: AbsorbConfig | None = None) -> list[tuple[Vertex, ...]]:
    """Legal (k-1)-sets avoiding class ``j`` whose degree clears ``(1/2 + 2/log n) n``."""
    cfg = cfg or AbsorbConfig()
    if H.n < 2:
        raise ValueError("lambda_set needs n >= 2")
    thresh = lambda_threshold(H.n, cfg)
    cod = H.codegree_array(j)
    others = [c for c in range(H.k) if c != j]
    out = []
    for idx in np.argwhere(cod >= thresh):
        if all(H.alive[c, int(i)] for c, i in zip(others, idx)):
            out.append(tuple(Vertex(c, int(i)) for c, i in zip(others, idx)))
    return out


def lambda_size(H: PartiteHypergraph, j: int, cfg: AbsorbConfig) -> int:
    cod = H.codegree_array(j)
    return int((cod >= lambda_threshold(H.n, cfg)).sum())


@dataclass
class Dichotomy:
    kind: str                 # dense_subsets | big_lambda | both | neither
    subset_size: int
    dense_min: int
    dense_threshold: float
    dense_exhaustive: bool
    lambda_sizes: list[int]
    lambda_threshold: float
    samples: int = 0

    @property
    def dense(self) -> bool:
        return self.dense_min >= self.dense_threshold

    @property
    def big_lambda(self) -> bool:
        return max(self.lambda_sizes) >= self.lambda_threshold

    def to_dict(self) -> dict:
        return {"kind": self.kind, "subset_size": self.subset_size, "dense_min": self.dense_min,
                "dense_threshold": self.dense_threshold, "dense_exhaustive": self.dense_exhaustive,
                "lambda_sizes": self.lambda_sizes, "lambda_threshold": self.lambda_threshold,
                "samples": self.samples}


def _min_dense_exact(H: PartiteHypergraph, m: int) -> int:
    # enumerate classes 0..k-3, vectorise class k-2, take the m lightest of class k-1
    k, n = H.k, H.n
    A = H.adj.astype(np.int64)
    combos = list(combinations(range(n), m))
    Y = np.zeros((len(combos), n), dtype=np.int64)
    for r, cmb in enumerate(combos):
        Y[r, list(cmb)] = 1
    best = None
    for prefix in _product(combos, k - 2):
        R = A
        for cmb in prefix:
            R = R[list(cmb)].sum(axis=0)
        W = Y @ R                     # rows: class k-2 choice, cols: class k-1 vertex
        W.sort(axis=1)
        val = int(W[:, :m].sum(axis=1).min())
        best = val if best is None else min(best, val)
    return best


def _product(combos, r):
    if r == 0:
        yield ()
        return
    from itertools import product
    yield from product(combos, repeat=r)


def _min_dense_sampled(H: PartiteHypergraph, m: int, samples: int, rng) -> int:
    k, n = H.k, H.n
    best = None
    for _ in range(samples):
        sets = [sorted(rng.choice(n, size=m, replace=False).tolist()) for _ in range(k)]
        val = edge_count_within(H, sets)
        improved = True
        while improved:
            improved = False
            for c in range(k):
                for pos in range(m):
                    for w in range(n):
                        if w in sets[c]:
                            continue
                        trial = [list(s) for s in sets]
                        trial[c][pos] = w
                        t = edge_count_within(H, trial)
                        if t < val:
                            sets, val, improved = trial, t, True
                            break
        best = val if best is None else min(best, val)
    return best


def classify_dichotomy(H: PartiteHypergraph, cfg: AbsorbConfig | None = None) -> Dichotomy:
    """Evaluate both alternatives: dense large subsets, or a large Lambda_j."""
    cfg = cfg or AbsorbConfig()
    k, n = H.k, H.n
    if n < 2:
        raise ValueError("classify_dichotomy needs n >= 2")
    gamma = 1 / cfg.log(n)
    m = min(max(math.ceil((0.5 - gamma) * n - 1e-9), 0), n)
    dense_thr = n ** k / cfg.log(n) ** 3
    samples = 0
    if m == 0:
        dmin, exhaustive = 0, True
    elif math.comb(n, m) ** max(k - 2, 0) <= cfg.exact_budget:
        dmin, exhaustive = _min_dense_exact(H, m), True
    else:
        samples = cfg.mc_samples
        dmin = _min_dense_sampled(H, m, max(1, samples // 50), np.random.default_rng(cfg.seed))
        exhaustive = False
    lam_thr = n ** (k - 1) / cfg.log(n)
    sizes = [lambda_size(H, j, cfg) for j in range(k)]
    dense = dmin >= dense_thr
    big = max(sizes) >= lam_thr
    kind = "both" if dense and big else "dense_subsets" if dense else "big_lambda" if big else "neither"
    return Dichotomy(kind, m, dmin, dense_thr, exhaustive, sizes, lam_thr, samples)


# -- absorbing witnesses ---------------------------------------------------

@dataclass(frozen=True)
class AbsorbingWitness:
    kind: str
    S: tuple[int, ...]
    M_edges: tuple[Edge, ...]      # e_0..e_{k-1}, then the extra edge for the (k+1) kind
    replacement: tuple[Edge, ...]  # e'_0..e'_{k-1}, then f (or f', f'')
    pivot: int = 0

    def to_dict(self) -> dict:
        return {"kind": self.kind, "S": list(self.S), "pivot": self.pivot,
                "M_edges": [list(e) for e in self.M_edges],
                "replacement": [list(e) for e in self.replacement]}


def _verts(e: Edge) -> set[tuple[int, int]]:
    return {(c, int(i)) for c, i in enumerate(e)}


def verify_absorbing(H: PartiteHypergraph, w: AbsorbingWitness) -> bool:
    k = H.k
    S = tuple(int(x) for x in w.S)
    if len(S) != k:
        return False
    if w.kind == K_MATCHING:
        if len(w.M_edges) != k or len(w.replacement) != k + 1:
            return False
    elif w.kind == K_PLUS_1:
        if len(w.M_edges) != k + 1 or len(w.replacement) != k + 2 or not 0 <= w.pivot < k:
            return False
    else:
        return False
    edges = [tuple(int(x) for x in e) for e in w.M_edges]
    repl = [tuple(int(x) for x in e) for e in w.replacement]
    if any(len(e) != k or not H.has_edge(e) for e in edges + repl):
        return False
    if not verify_matching(H, edges) or not verify_matching(H, repl):
        return False
    Svert = {(c, x) for c, x in enumerate(S)}
    base = edges[:k]
    primed = repl[:k]
    y = [e[c] for c, e in enumerate(base)]
    for c in range(k):
        if _verts(primed[c]) - _verts(base[c]) != {(c, S[c])}:
            return False
        if _verts(base[c]) - _verts(primed[c]) != {(c, y[c])}:
            return False
    for i in range(k):
        for j, e in enumerate(edges):
            if i != j and _verts(primed[i]) & _verts(e):
                return False
    if w.kind == K_MATCHING:
        if repl[k] != tuple(y):
            return False
        named = [(c, S[c]) for c in range(k)] + [(c, y[c]) for c in range(k)]
    else:
        p = w.pivot
        e_x = edges[k]
        fp, fpp = repl[k], repl[k + 1]
        y0 = (p, e_x[p])
        if _verts(base[p]) & _verts(fp) != {(p, y[p])} or _verts(fp) - _verts(e_x) != {(p, y[p])}:
            return False
        if _verts(e_x) - _verts(fp) != {y0}:
            return False
        want = list(y)
        want[p] = e_x[p]
        if fpp != tuple(want):
            return False
        named = [(c, S[c]) for c in range(k)] + [(c, y[c]) for c in range(k)] + [("x", y0)]
        if y0 == (p, y[p]):
            return False
    flat = [v if v[0] != "x" else v[1] for v in named]
    if len(set(flat)) != len(flat):
        return False
    covered = set().union(*(_verts(e) for e in edges))
    if covered & Svert:
        return False
    return set().union(*(_verts(e) for e in repl)) == covered | Svert


def absorbing_witness_for(H: PartiteHypergraph, S: Sequence[int], M: Sequence[Edge],
                          kind: str | None = None) -> AbsorbingWitness | None:
    """Try every role assignment of the edges of ``M``; return a verified witness or ``None``."""
    k = H.k
    S = tuple(int(x) for x in S)
    M = [tuple(int(x) for x in e) for e in M]
    if kind is None:
        kind = K_MATCHING if len(M) == k else K_PLUS_1
    Sv = {(c, x) for c, x in enumerate(S)}
    if any(_verts(e) & Sv for e in M):
        return None
    if kind == K_MATCHING:
        if len(M) != k:
            return None
        for order in permutations(M):
            w = _k_witness(H, S, order)
            if w is not None:
                return w
        return None
    if len(M) != k + 1:
        return None
    for p in range(k):
        for order in permutations(M):
            base, e_x = order[:k], order[k]
            w = _k1_witness(H, S, base, e_x, p)
            if w is not None:
                return w
    return None


def _swap(e: Edge, c: int, v: int) -> Edge:
    out = list(e)
    out[c] = v
    return tuple(out)


def _k_witness(H, S, base) -> AbsorbingWitness | None:
    k = H.k
    primed = [_swap(e, c, S[c]) for c, e in enumerate(base)]
    f = tuple(e[c] for c, e in enumerate(base))
    if all(H.has_edge(e) for e in primed) and H.has_edge(f):
        w = AbsorbingWitness(K_MATCHING, tuple(S), tuple(base), tuple(primed) + (f,))
        return w if verify_absorbing(H, w) else None
    return None


def _k1_witness(H, S, base, e_x, p) -> AbsorbingWitness | None:
    primed = [_swap(e, c, S[c]) for c, e in enumerate(base)]
    y = [e[c] for c, e in enumerate(base)]
    fp = _swap(e_x, p, y[p])
    fpp = tuple(e_x[p] if c == p else y[c] for c in range(H.k))
    if all(H.has_edge(e) for e in primed) and H.has_edge(fp) and H.has_edge(fpp):
        w = AbsorbingWitness(K_PLUS_1, tuple(S), tuple(base) + (e_x,), tuple(primed) + (fp, fpp), p)
        return w if verify_absorbing(H, w) else None
    return None


def splice(M: Matching, w: AbsorbingWitness) -> Matching:
    """Replace the witness's edges inside ``M`` by its replacement edges."""
    drop = {tuple(e) for e in w.M_edges}
    if not drop <= {tuple(e) for e in M}:
        raise ValueError("the witness edges are not all in the matching")
    return [e for e in M if tuple(e) not in drop] + list(w.replacement)


def sample_absorbing_witness(H: PartiteHypergraph, S: Sequence[int], kind: str = K_MATCHING,
                             rng: np.random.Generator | None = None, tries: int = 200,
                             pivot: int = 0) -> AbsorbingWitness | None:
    """Random witness built the constructive way: pick ``B_c`` completing ``x_c``, then the ``y``'s."""
    rng = rng or np.random.default_rng()
    k, n = H.k, H.n
    S = tuple(int(x) for x in S)
    for _ in range(tries):
        used = [{S[c]} for c in range(k)]
        Bs = []
        ok = True
        for c in range(k):
            B = _random_completion(H, c, S[c], used, rng)
            if B is None:
                ok = False
                break
            Bs.append(B)
            for cc, v in enumerate(B):
                if cc != c:
                    used[cc].add(v)
        if not ok:
            continue
        nbr = [[v for v in range(n) if v not in used[c] and H.alive[c, v] and H.has_edge(_swap(Bs[c], c, v))]
               for c in range(k)]
        if kind == K_MATCHING:
            cand = [f for f in _edges_in(H, nbr)]
            if not cand:
                continue
            f = cand[int(rng.integers(len(cand)))]
            base = [_swap(Bs[c], c, f[c]) for c in range(k)]
            w = _k_witness(H, S, base)
        else:
            p = pivot
            y = [None] * k
            for c in range(k):
                if c == p:
                    continue
                if not nbr[c]:
                    ok = False
                    break
                y[c] = nbr[c][int(rng.integers(len(nbr[c])))]
                used[c].add(y[c])
            if not ok:
                continue
            T = _random_legal_avoiding(H, p, used, rng)
            if T is None:
                continue
            for c in range(k):
                if c != p:
                    used[c].add(T[c])
            y1s = [v for v in nbr[p] if H.has_edge(_swap(T, p, v))]
            rest = tuple(0 if c == p else y[c] for c in range(k))
            y0s = [v for v in range(n) if v not in used[p] and H.alive[p, v]
                   and H.has_edge(_swap(T, p, v)) and H.has_edge(_swap(rest, p, v))]
            pairs = [(a, b) for a in y1s for b in y0s if a != b]
            if not pairs:
                continue
            y1, y0 = pairs[int(rng.integers(len(pairs)))]
            base = [_swap(Bs[c], c, y1 if c == p else y[c]) for c in range(k)]
            w = _k1_witness(H, S, base, _swap(T, p, y0), p)
        if w is not None:
            return w
    return None


def _random_completion(H, c, x, used, rng):
    """Random edge through ``(c, x)`` avoiding ``used`` elsewhere; returned with ``x`` in place."""
    k, n = H.k, H.n
    index = [slice(None)] * k
    index[c] = x
    sub = H.adj[tuple(index)].copy()
    others = [cc for cc in range(k) if cc != c]
    for axis, cc in enumerate(others):
        bad = sorted(used[cc])
        if bad:
            idx = [slice(None)] * (k - 1)
            idx[axis] = bad
            sub[tuple(idx)] = False
    hits = np.argwhere(sub)
    if len(hits) == 0:
        return None
    row = hits[int(rng.integers(len(hits)))]
    e = [0] * k
    e[c] = x
    for cc, v in zip(others, row):
        e[cc] = int(v)
    return tuple(e)


def _random_legal_avoiding(H, p, used, rng):
    k, n = H.k, H.n
    e = [0] * k
    for c in range(k):
        if c == p:
            continue
        pool = [v for v in range(n) if v not in used[c] and H.alive[c, v]]
        if not pool:
            return None
        e[c] = pool[int(rng.integers(len(pool)))]
    return tuple(e)


def _edges_in(H, lists) -> list[Edge]:
    lists = [sorted(x) for x in lists]
    if any(not x for x in lists):
        return []
    sub = H.induced_on(lists)
    return [tuple(lists[c][int(i)] for c, i in enumerate(row)) for row in np.argwhere(sub)]


def count_absorbing(H: PartiteHypergraph, S: Sequence[int], kind: str = K_MATCHING,
                    budget: int = 2_000_000, rng: np.random.Generator | None = None,
                    samples: int = 20_000) -> tuple[int, bool]:
    """Number of S-absorbing matchings (as edge sets); exhaustive when small enough."""
    k = H.k
    S = tuple(int(x) for x in S)
    size = k if kind == K_MATCHING else k + 1
    pool = [e for e in H.edges() if all(e[c] != S[c] for c in range(k))]
    total = math.comb(len(pool), size)

    def good(M) -> bool:
        return verify_matching(H, M) and absorbing_witness_for(H, S, M, kind) is not None

    if total <= budget:
        count = 0
        for M in _matchings_of_size(pool, size):
            if absorbing_witness_for(H, S, M, kind) is not None:
                count += 1
        return count, True
    rng = rng or np.random.default_rng(0)
    hits = 0
    for _ in range(samples):
        idx = rng.choice(len(pool), size=size, replace=False)
        if good([pool[i] for i in idx]):
            hits += 1
    return int(round(hits / samples * total)), False


def _matchings_of_size(pool: list[Edge], size: int):
    """Vertex-disjoint ``size``-subsets of ``pool``, each once."""
    def rec(start, chosen, used):
        if len(chosen) == size:
            yield list(chosen)
            return
        for i in range(start, len(pool)):
            e = pool[i]
            vs = _verts(e)
            if vs & used:
                continue
            chosen.append(e)
            yield from rec(i + 1, chosen, used | vs)
            chosen.pop()
    yield from rec(0, [], set())


# -- families --------------------------------------------------------------

@dataclass
class Block:
    lists: tuple[tuple[int, ...], ...]
    matching: Matching

    def vertices(self) -> set[tuple[int, int]]:
        return {(c, i) for c, lst in enumerate(self.lists) for i in lst}


@dataclass
class AbsorbingFamily:
    kind: str
    blocks: list[Block]
    coverage: dict[tuple[int, ...], list[AbsorbingWitness]]
    probability: float
    rounds: int
    sampled: int = 0

    @property
    def combined_matching(self) -> Matching:
        return [e for b in self.blocks for e in b.matching]


def block_witness(H: PartiteHypergraph, block: Block, S: Sequence[int], kind: str) -> AbsorbingWitness | None:
    """An S-absorbing perfect matching of the block, if any of its perfect matchings is one."""
    Sv = {(c, int(x)) for c, x in enumerate(S)}
    if block.vertices() & Sv:
        return None
    for pm in block_perfect_matchings(H, block.lists):
        w = absorbing_witness_for(H, S, pm, kind)
        if w is not None:
            return w
    return None


def default_probability(n: int, k: int, width: int, cfg: AbsorbConfig) -> float:
    space = math.comb(n, width) ** k
    if space == 0 or n < 2:
        return 1.0
    return min(1.0, cfg.log(n) ** 5 / space)


def _sample_blocks(H: PartiteHypergraph, width: int, p: float, rng, cap: int,
                   batch: int = 4096) -> tuple[list[Block], int]:
    k, n = H.k, H.n
    space = math.comb(n, width) ** k
    count = int(rng.binomial(space, p)) if space < 2 ** 62 else int(rng.poisson(p * space))
    count = min(count, cap)
    kept: list[Block] = []
    taken = ~H.alive.copy()
    drawn = 0
    while drawn < count:
        m = min(batch, count - drawn)
        drawn += m
        # a uniform width-subset per class: the first columns of a random permutation
        picks = np.argsort(rng.random((m, k, n)), axis=2)[:, :, :width]
        for lists in picks:
            if taken[np.arange(k)[:, None], lists].any():
                continue
            lists = tuple(tuple(sorted(int(i) for i in row)) for row in lists)
            pm = block_perfect_matching(H, lists)
            if pm is None:
                continue
            kept.append(Block(lists, pm))
            for c, row in enumerate(lists):
                taken[c, list(row)] = True
        if (~taken).sum(axis=1).min() < width:
            break
    return kept, count


def build_absorbing_family(H: PartiteHypergraph, probes: Sequence[Sequence[int]],
                           cfg: AbsorbConfig | None = None, kind: str | None = None) -> AbsorbingFamily:
    """Random disjoint blocks with perfect matchings, checked against every probe.

    Blocks have ``k`` vertices per class for the k-matching kind and
    ``k + 1`` for the other.  Overlapping blocks are dropped in sampling
    order.  On a coverage deficit the sampling probability doubles.
    """
    cfg = cfg or AbsorbConfig()
    k, n = H.k, H.n
    if kind is None:
        d = classify_dichotomy(H, cfg)
        kind = K_PLUS_1 if d.kind == "big_lambda" else K_MATCHING
    width = k if kind == K_MATCHING else k + 1
    target = cfg.family_target_per_set or k
    p = cfg.sample_probability_override or default_probability(n, k, width, cfg)
    seeds = np.random.SeedSequence(cfg.seed).spawn(cfg.max_rounds)
    deficits: dict = {}
    sampled = saturated = 0
    for rnd in range(cfg.max_rounds):
        rng = np.random.default_rng(seeds[rnd])
        blocks, cnt = _sample_blocks(H, width, p, rng, cfg.max_samples)
        sampled += cnt
        if cfg.max_blocks is not None:
            blocks = blocks[:cfg.max_blocks]
        coverage = {}
        deficits = {}
        for S in probes:
            S = tuple(int(x) for x in S)
            found = []
            for b in blocks:
                w = block_witness(H, b, S, kind)
                if w is not None:
                    found.append(w)
                    if len(found) >= target:
                        break
            coverage[S] = found
            if len(found) < target:
                deficits[S] = target - len(found)
        if not deficits and (blocks or not probes):
            return AbsorbingFamily(kind, blocks, coverage, p, rnd + 1, sampled)
        if cnt >= cfg.max_samples or p >= 1.0:
            saturated += 1
            if saturated >= 8:
                break
        p = min(1.0, 2 * p)
    raise FamilyNotFound(f"no family covering every probe after {rnd + 1} rounds",
                         {" ".join(map(str, s)): d for s, d in deficits.items()})


# -- full algorithm --------------------------------------------------------

@dataclass
class AbsorptionReport:
    status: str                        # perfect_matching | failed
    matching: Matching | None
    failure: str | None = None
    family_size: int = 0
    blocks: int = 0
    leftovers: list[list[int]] = field(default_factory=list)
    witnesses: list[AbsorbingWitness] = field(default_factory=list)
    attempts: int = 0
    warnings: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.status == "perfect_matching"

    def to_dict(self) -> dict:
        return {"status": self.status,
                "matching": None if self.matching is None else [list(e) for e in self.matching],
                "failure": self.failure, "family_size": self.family_size, "blocks": self.blocks,
                "probes_covered": len(self.witnesses), "leftovers": self.leftovers,
                "witnesses": [w.to_dict() for w in self.witnesses], "attempts": self.attempts,
                "warnings": self.warnings}


def perfect_matching_via_absorption(H: PartiteHypergraph, cfg: AbsorbConfig | None = None,
                                    kind: str | None = None) -> AbsorptionReport:
    """Set aside absorbing blocks, match the rest, absorb the leftover k-sets.

    Leftovers are probed lazily: only the legal k-sets actually left over
    are checked against the blocks, one fresh block per leftover set.
    """
    cfg = cfg or AbsorbConfig()
    k, n = H.k, H.n
    warnings: list[str] = []
    if not H.balanced or H.class_sizes[0] != n:
        return AbsorptionReport("failed", None, "classes must be complete and equal")
    if n >= 2 and H.min_codegree() < (0.5 - 1 / cfg.log(n)) * n:
        warnings.append("min co-degree below (1/2 - 1/log n) n")
    if kind is None:
        kind = K_MATCHING
        if n >= 2 and classify_dichotomy(H, cfg).kind == "big_lambda":
            kind = K_PLUS_1
    seeds = np.random.SeedSequence(cfg.seed).spawn(cfg.family_attempts)
    last = "no attempt made"
    for attempt in range(cfg.family_attempts):
        # each retry expects twice as many sampled blocks as the last
        width = k if kind == K_MATCHING else k + 1
        space = math.comb(n, width) ** k
        p = cfg.sample_probability_override or max(default_probability(n, k, width, cfg),
                                                   min(1.0, 2 ** attempt / max(space, 1)))
        sub = AbsorbConfig(**{**cfg.__dict__, "seed": int(seeds[attempt].generate_state(1)[0]),
                              "sample_probability_override": p})
        try:
            fam = build_absorbing_family(H, [], sub, kind)
        except FamilyNotFound as err:
            last = str(err)
            continue
        Mp = fam.combined_matching
        rest = H.remove_vertices([v for b in fam.blocks for v in b.vertices()])
        _, M2 = max_matching(rest, timeout=cfg.timeout)
        covered = {(c, i) for e in M2 for c, i in enumerate(e)} | {v for b in fam.blocks for v in b.vertices()}
        left = [sorted(i for i in range(n) if (c, i) not in covered) for c in range(k)]
        sets = [tuple(left[c][t] for c in range(k)) for t in range(len(left[0]))]
        free_blocks = list(range(len(fam.blocks)))
        witnesses = []
        final = list(M2)
        used_blocks = set()
        ok = True
        for S in sets:
            hit = None
            for b in free_blocks:
                if b in used_blocks:
                    continue
                w = block_witness(H, fam.blocks[b], S, kind)
                if w is not None:
                    hit = (b, w)
                    break
            if hit is None:
                ok = False
                last = f"no block absorbs leftover {list(S)}"
                break
            used_blocks.add(hit[0])
            witnesses.append(hit[1])
        if not ok:
            continue
        for b, blk in enumerate(fam.blocks):
            if b not in used_blocks:
                final.extend(blk.matching)
        final.extend(e for w in witnesses for e in w.replacement)
        if verify_matching(H, final, require_perfect=True):
            return AbsorptionReport("perfect_matching", sorted(final), None, len(Mp), len(fam.blocks),
                                    [list(s) for s in sets], witnesses, attempt + 1, warnings)
        last = "assembled matching failed verification"
    return AbsorptionReport("failed", None, last, attempts=cfg.family_attempts, warnings=warnings)
