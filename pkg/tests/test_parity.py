import numpy as np
import pytest
from hypothesis import given

import oracles
from conftest import hypergraphs, random_graph
from kpartite.exact import find_perfect_matching
from kpartite.extremal import build_h0_canonical, h0
from kpartite.hypergraph import PartiteHypergraph
from kpartite.parity import (CASE_I, CASE_II, NO_OBSTRUCTION, NullspaceTooLarge, ParityCertificate,
                             check_theorem_case, edge_bits, edge_incidence_nullspace, find_parity_certificate,
                             iter_nullspace, sets_to_vector, theorem_case_witness, vector_to_sets)


def _orthogonal(H, v):
    return all(bin(edge_bits(e, H.n) & v).count("1") % 2 == 0 for e in H.edges())


def test_empty_graph_nullspace_is_everything():
    assert edge_incidence_nullspace(PartiteHypergraph.empty(3, 4)).rank == 12


def test_complete_graph_nullspace():
    basis = edge_incidence_nullspace(PartiteHypergraph.complete(3, 2))
    # sums of two whole classes
    assert basis.rank == 2
    assert all(_orthogonal(PartiteHypergraph.complete(3, 2), v) for v in basis.vectors)


def test_parity_graph_nullspace_contains_distinguished_set():
    H = h0(3, 2, (1, 1, 1))
    basis = edge_incidence_nullspace(H)
    target = sets_to_vector([(0,), (0,), (0,)], 2)
    span = set(iter_nullspace(basis))
    assert target in span


def test_certificate_examples():
    cert = find_parity_certificate(h0(3, 2, (1, 1, 1)))
    assert cert is not None and cert.sizes == (1, 1, 1)
    assert cert.verify(h0(3, 2, (1, 1, 1)))
    assert find_parity_certificate(PartiteHypergraph.complete(3, 2)) is None
    H = h0(2, 2, (1, 1))
    assert (find_parity_certificate(H) is None) == (oracles.parity_certificates(H) == [])


@given(hypergraphs(k_range=(2, 3), n_range=(1, 3)))
def test_nullspace_basis_is_independent_and_orthogonal(H):
    basis = edge_incidence_nullspace(H)
    assert all(_orthogonal(H, v) for v in basis.vectors)
    arr = basis.as_array()
    # rank over GF(2) via elimination on a copy
    rows = [int("".join(map(str, r[::-1])), 2) for r in arr]
    piv = {}
    for r in rows:
        while r:
            p = r.bit_length() - 1
            if p in piv:
                r ^= piv[p]
            else:
                piv[p] = r
                break
        assert r, "basis vectors are dependent"
    # dimension matches brute force count of orthogonal vectors
    kn = H.k * H.n
    count = sum(1 for v in range(1 << kn) if _orthogonal(H, v))
    assert count == 1 << basis.rank


@given(hypergraphs(k_range=(2, 3), n_range=(1, 3)))
def test_detector_matches_brute_force(H):
    certs = oracles.parity_certificates(H)
    cert = find_parity_certificate(H)
    if not certs:
        assert cert is None
    else:
        assert cert is not None and cert.verify(H)
        assert cert.D == certs[0]


@given(hypergraphs(k_range=(3, 3), n_range=(1, 3)))
def test_soundness(H):
    cert = find_parity_certificate(H)
    if cert is not None:
        assert cert.verify(H)
        assert find_perfect_matching(H) is None


@given(hypergraphs(k_range=(2, 3), n_range=(1, 3)))
def test_certificate_iff_contained_in_odd_parity_graph(H):
    cert = find_parity_certificate(H)
    if cert is None:
        return
    host = h0(H.k, H.n, cert.sizes, cert.D)
    assert sum(cert.sizes) % 2 == 1
    assert not (H.adj & ~host.adj).any()


def test_dead_vertices_stay_out_of_certificates():
    H = PartiteHypergraph.complete(3, 3).remove_vertices([(0, 0)])
    cert = find_parity_certificate(H)
    if cert is not None:
        assert 0 not in cert.D[0]
        assert cert.verify(H)


def test_verifier_rejects_bad_certificates():
    H = h0(3, 2, (1, 1, 1))
    assert not ParityCertificate(((0,), (0,), ())).verify(H)        # even total
    assert not ParityCertificate(((0, 1), (0,), ())).verify(H)      # some edge meets it oddly
    assert not ParityCertificate(((0,), (0,))).verify(H)            # wrong number of classes


def test_vector_round_trip():
    D = ((0, 2), (), (1,))
    assert vector_to_sets(sets_to_vector(D, 3), 3, 3) == D


@pytest.mark.parametrize("H,case", [
    (build_h0_canonical(3, 2), CASE_I),
    (build_h0_canonical(3, 6), CASE_I),
    (build_h0_canonical(5, 6), CASE_I),
    (h0(3, 3, (2, 2, 1)), CASE_II),
    (PartiteHypergraph.complete(3, 4), NO_OBSTRUCTION),
    (build_h0_canonical(4, 6), NO_OBSTRUCTION),     # even k: the canonical graph has an even total
    (build_h0_canonical(3, 4), NO_OBSTRUCTION),     # n divisible by 4
])
def test_theorem_cases(H, case):
    got, cert = theorem_case_witness(H)
    assert got == case
    assert check_theorem_case(H) == case
    if case != NO_OBSTRUCTION:
        assert cert.verify(H)
        assert find_perfect_matching(H) is None


def test_case_one_needs_exact_copy():
    H = build_h0_canonical(3, 6)
    adj = H.adj.copy()
    adj[tuple(np.argwhere(adj)[0])] = False
    # a proper subgraph of the extremal graph is not case (i)
    assert check_theorem_case(PartiteHypergraph(3, 6, adj)) == NO_OBSTRUCTION


def test_case_two_weight_filter():
    # odd total but a class weight outside {(n-1)/2, (n+1)/2}
    H = h0(3, 5, (1, 2, 2))
    assert find_parity_certificate(H) is not None
    # complementing two classes keeps every edge parity, but each such pair
    # pushes some class weight to 1 or 4
    assert check_theorem_case(H) == NO_OBSTRUCTION


def test_classification_needs_full_classes():
    with pytest.raises(ValueError):
        check_theorem_case(PartiteHypergraph.complete(3, 3).remove_vertices([(0, 0)]))


def test_nullspace_cap():
    with pytest.raises(NullspaceTooLarge) as info:
        check_theorem_case(PartiteHypergraph.empty(3, 7))
    assert info.value.dim == 21
    assert check_theorem_case(random_graph(3, 5, 0.9, 0), cap=20) in (NO_OBSTRUCTION, CASE_II)
