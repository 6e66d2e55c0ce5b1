"""Odd vertex sets met evenly by every edge.

A vertex set ``D`` of odd size that meets every edge in an even number of
vertices rules out a perfect matching: the edges of a perfect matching
partition ``D`` into even pieces.  Finding one is linear algebra over GF(2)
on the ``k*n`` vertex coordinates, bit ``c*n + i`` standing for vertex
``(c, i)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .extremal import h0_edge_count
from .hypergraph import PartiteHypergraph

CASE_I = "case_i"
CASE_II = "case_ii"
NO_OBSTRUCTION = "no_obstruction"


class NullspaceTooLarge(RuntimeError):
    def __init__(self, dim: int, cap: int):
        super().__init__(f"nullspace dimension {dim} exceeds cap {cap}")
        self.dim = dim
        self.cap = cap


@dataclass(frozen=True)
class NullspaceBasis:
    k: int
    n: int
    vectors: tuple[int, ...]

    @property
    def rank(self) -> int:
        return len(self.vectors)

    def as_array(self) -> np.ndarray:
        out = np.zeros((self.rank, self.k * self.n), dtype=np.uint8)
        for r, v in enumerate(self.vectors):
            out[r] = [(v >> b) & 1 for b in range(self.k * self.n)]
        return out


@dataclass(frozen=True)
class ParityCertificate:
    D: tuple[tuple[int, ...], ...]

    @property
    def sizes(self) -> tuple[int, ...]:
        return tuple(len(Di) for Di in self.D)

    @property
    def total(self) -> int:
        return sum(self.sizes)

    def verify(self, H: PartiteHypergraph) -> bool:
        """Direct check: odd total and every edge meets the set evenly."""
        if self.total % 2 == 0 or len(self.D) != H.k:
            return False
        member = np.zeros((H.k, H.n), dtype=bool)
        for c, Dc in enumerate(self.D):
            if any(not H.alive[c, i] for i in Dc):
                return False
            member[c, list(Dc)] = True
        for e in H.edges():
            if sum(member[c, i] for c, i in enumerate(e)) % 2:
                return False
        return True

    def to_dict(self) -> dict:
        return {"d": list(self.sizes), "D": [list(x) for x in self.D]}


def edge_bits(e, n: int) -> int:
    out = 0
    for c, i in enumerate(e):
        out |= 1 << (c * n + int(i))
    return out


def vector_to_sets(v: int, k: int, n: int) -> tuple[tuple[int, ...], ...]:
    return tuple(tuple(i for i in range(n) if (v >> (c * n + i)) & 1) for c in range(k))


def sets_to_vector(D, n: int) -> int:
    return sum(1 << (c * n + i) for c, Dc in enumerate(D) for i in Dc)


def _row_space(H: PartiteHypergraph) -> dict[int, int]:
    """Reduced row echelon form, keyed by pivot bit (the lowest set bit of each row)."""
    k, n = H.k, H.n
    rows: dict[int, int] = {}
    full = 0
    # dead vertices may not belong to a certificate
    constraints = [1 << (c * n + i) for c in range(k) for i in range(n) if not H.alive[c, i]]
    live_cols = k * n
    for e in H.edges():
        constraints.append(edge_bits(e, n))
    for r in constraints:
        for q, other in rows.items():
            if (r >> q) & 1:
                r ^= other
        if r:
            p = (r & -r).bit_length() - 1
            for q, other in rows.items():
                if (other >> p) & 1:
                    rows[q] = other ^ r
            rows[p] = r
        if len(rows) == live_cols:
            break
    return rows


def edge_incidence_nullspace(H: PartiteHypergraph) -> NullspaceBasis:
    """Basis of the vectors orthogonal, mod 2, to every edge's incidence vector."""
    rows = _row_space(H)
    kn = H.k * H.n
    basis = []
    for f in range(kn):
        if f in rows:
            continue
        v = 1 << f
        for p, r in rows.items():
            if (r >> f) & 1:
                v |= 1 << p
        basis.append(v)
    return NullspaceBasis(H.k, H.n, tuple(basis))


def _lowest_bit_echelon(vectors) -> list[int]:
    piv: dict[int, int] = {}
    for v in vectors:
        while v:
            p = (v & -v).bit_length() - 1
            if p in piv:
                v ^= piv[p]
            else:
                piv[p] = v
                break
    return [piv[p] for p in sorted(piv)]


def find_parity_certificate(H: PartiteHypergraph) -> ParityCertificate | None:
    """Lexicographically least odd-weight nullspace vector, or ``None``.

    Vectors compare as 0/1 sequences indexed by ``c*n + i``.
    """
    basis = edge_incidence_nullspace(H).vectors
    odd = [v for v in basis if bin(v).count("1") % 2]
    if not odd:
        return None
    v0 = odd[0]
    even = [v for v in basis if bin(v).count("1") % 2 == 0] + [v ^ v0 for v in odd[1:]]
    for b in _lowest_bit_echelon(even):
        p = (b & -b).bit_length() - 1
        if (v0 >> p) & 1:
            v0 ^= b
    return ParityCertificate(vector_to_sets(v0, H.k, H.n))


def iter_nullspace(basis: NullspaceBasis, cap: int = 20) -> Iterator[int]:
    """Every nullspace vector, in Gray-code order."""
    vecs = basis.vectors
    if len(vecs) > cap:
        raise NullspaceTooLarge(len(vecs), cap)
    v = 0
    yield v
    for step in range(1, 1 << len(vecs)):
        v ^= vecs[(step & -step).bit_length() - 1]
        yield v


def _class_weights(v: int, k: int, n: int) -> list[int]:
    seg = (1 << n) - 1
    return [bin((v >> (c * n)) & seg).count("1") for c in range(k)]


def theorem_case_witness(H: PartiteHypergraph, cap: int = 20) -> tuple[str, ParityCertificate | None]:
    """Classification together with the certificate that produced it."""
    k, n = H.k, H.n
    if not H.balanced or H.class_sizes[0] != n:
        raise ValueError("theorem classification needs all classes of full size n")
    basis = edge_incidence_nullspace(H)
    if n % 2 == 0:
        if k % 2 == 0 or n % 4 != 2:
            return NO_OBSTRUCTION, None
        if H.num_edges != h0_edge_count(k, n, (n // 2,) * k):
            return NO_OBSTRUCTION, None
        want = {n // 2}
    else:
        want = {(n - 1) // 2, (n + 1) // 2}
    hit = None
    for v in iter_nullspace(basis, cap):
        w = _class_weights(v, k, n)
        if sum(w) % 2 and all(x in want for x in w):
            if hit is None or _lex_key(v, k * n) < _lex_key(hit, k * n):
                hit = v
    if hit is None:
        return NO_OBSTRUCTION, None
    return (CASE_I if n % 2 == 0 else CASE_II), ParityCertificate(vector_to_sets(hit, k, n))


def _lex_key(v: int, width: int) -> str:
    return "".join("1" if (v >> b) & 1 else "0" for b in range(width))


def check_theorem_case(H: PartiteHypergraph, cap: int = 20) -> str:
    return theorem_case_witness(H, cap)[0]
