import io

import numpy as np
import pytest
from hypothesis import given, strategies as st

import oracles
from conftest import hypergraphs
from kpartite.extremal import h0
from kpartite.hypergraph import InvalidLegalSet, PartiteHypergraph, Vertex, all_legal_sets
from kpartite.instance_io import (InstanceFormatError, format_instance, parse_instance, read_instance,
                                  save_instance, write_instance)


def test_degree_of_pair_in_complete_graph():
    H = PartiteHypergraph.complete(3, 4)
    assert H.degree([Vertex(0, 1), Vertex(2, 3)]) == 4


def test_degree_in_empty_graph():
    H = PartiteHypergraph.empty(3, 4)
    assert all(H.degree(S) == 0 for S in all_legal_sets(3, 4, 2))


def test_degree_inside_parity_graph():
    H = h0(3, 2, (1, 1, 1))
    # D_i = {0}; both vertices in D, so only the class-2 vertex outside D keeps parity even
    assert H.degree([(0, 0), (1, 0)]) == 1


def test_illegal_sets_rejected():
    H = PartiteHypergraph.complete(3, 2)
    with pytest.raises(InvalidLegalSet):
        H.degree([(0, 0), (0, 1)])
    with pytest.raises(InvalidLegalSet):
        H.degree([(3, 0)])
    with pytest.raises(InvalidLegalSet):
        H.degree([(0, 2)])
    with pytest.raises(InvalidLegalSet):
        H.degree([])


@pytest.mark.parametrize("H,expected", [
    (PartiteHypergraph.complete(3, 4), 4),
    (h0(3, 2, (1, 1, 1)), 1),
    (PartiteHypergraph.empty(3, 4), 0),
])
def test_min_codegree_examples(H, expected):
    assert H.min_codegree() == expected


def test_parity_degree_examples():
    H = h0(3, 2, (1, 1, 1))
    D = [(0, 0), (1, 0), (2, 0)]
    for v in H.vertices():
        assert H.parity_degree(v, D, 1) == 0
        assert H.parity_degree(v, D, 0) == H.degree([v])
    K = PartiteHypergraph.complete(3, 2)
    S = [(1, 0), (1, 1)]
    assert all(K.parity_degree(v, S, 1) == 4 for v in K.vertices())


def test_remove_vertices_examples():
    K = PartiteHypergraph.complete(3, 2)
    assert K.remove_vertices([]) == K
    assert K.remove_vertices([(1, 0)]).num_edges == 4
    assert K.remove_vertices(K.vertices()).num_edges == 0
    assert K.remove_vertices([(1, 0)]).class_sizes == [2, 1, 2]


@given(hypergraphs(k_range=(2, 4), n_range=(1, 4)))
def test_degree_matches_enumeration(H):
    for size in range(1, H.k + 1):
        for S in all_legal_sets(H.k, H.n, size):
            assert H.degree(S) == oracles.degree(H, {v.cls: v.idx for v in S})


@given(hypergraphs(k_range=(2, 3), n_range=(1, 4)))
def test_min_codegree_matches_enumeration(H):
    assert H.min_codegree() == oracles.min_codegree(H)
    assert H.min_codegree() <= H.n


@given(hypergraphs(k_range=(2, 4), n_range=(1, 3)), st.data())
def test_parity_degrees_split_vertex_degree(H, data):
    verts = H.vertices()
    S = data.draw(st.lists(st.sampled_from(verts), unique=True))
    for v in verts:
        assert H.parity_degree(v, S, 0) + H.parity_degree(v, S, 1) == H.degree([v])


@given(hypergraphs(k_range=(2, 4), n_range=(1, 4)), st.data())
def test_remove_vertices_composes(H, data):
    verts = H.vertices()
    T1 = data.draw(st.lists(st.sampled_from(verts), unique=True))
    T2 = data.draw(st.lists(st.sampled_from(verts), unique=True))
    assert H.remove_vertices(T1 + T2) == H.remove_vertices(T1).remove_vertices(T2)
    R = H.remove_vertices(T1)
    gone = {(v.cls, v.idx) for v in map(Vertex._make, T1)}
    expected = {e for e in oracles.edge_list(H) if not any((c, i) in gone for c, i in enumerate(e))}
    assert set(R.edges()) == expected


def test_codegree_full_iff_every_set_extends_fully():
    assert PartiteHypergraph.complete(3, 3).min_codegree() == 3
    adj = np.ones((3, 3, 3), dtype=bool)
    adj[0, 0, 0] = False
    assert PartiteHypergraph(3, 3, adj).min_codegree() == 2


def test_graph_is_read_only():
    H = PartiteHypergraph.complete(3, 2)
    with pytest.raises(ValueError):
        H.adj[0, 0, 0] = False


@given(hypergraphs(k_range=(2, 4), n_range=(1, 4)))
def test_instance_round_trip(H):
    text = format_instance(H, "a comment")
    assert parse_instance(text) == H
    assert format_instance(parse_instance(text), "a comment") == text


def test_instance_file_round_trip(tmp_path):
    H = h0(3, 4, (2, 1, 3))
    path = tmp_path / "g.txt"
    save_instance(H, path)
    assert read_instance(path) == H
    buf = io.StringIO()
    write_instance(H, buf)
    assert buf.getvalue() == path.read_text()


@pytest.mark.parametrize("text", ["", "3\n", "3 2\n0 0\n", "3 2\n0 0 x\n", "3 2\n0 0 5\n", "1 2\n0\n"])
def test_bad_instances(text):
    with pytest.raises(InstanceFormatError):
        parse_instance(text)


def test_comments_and_blank_lines_ignored():
    H = parse_instance("# hello\n\n2 2\n# edge\n0 1\n")
    assert H.edges() == [(0, 1)]
