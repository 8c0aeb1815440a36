import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lrcc import cayley_complex, groups

from conftest import symmetric_set


def complex_for(group, a, b):
    return cayley_complex.build_complex(
        group, groups.make_generators(group, a, "left"), groups.make_generators(group, b, "right")
    )


@st.composite
def complexes(draw):
    if draw(st.booleans()):
        n = draw(st.integers(5, 30))
        group = groups.cyclic_group(n)
    else:
        group = groups.build_psl2(draw(st.sampled_from([3, 5])))
    delta = draw(st.integers(2, 4))
    rng = np.random.default_rng(draw(st.integers(0, 2**32 - 1)))
    a, b = symmetric_set(group, delta, rng), symmetric_set(group, delta, rng)
    if a is None or b is None:
        a = b = None
    return group, a, b


@settings(max_examples=25, deadline=None)
@given(complexes())
def test_face_corners_and_edges_agree(data):
    group, a, b = data
    if a is None:
        return
    cx = complex_for(group, a, b)
    n, d = cx.n, cx.delta
    assert (cx.n_vertices, cx.n_edges, cx.n_faces) == (4 * n, 4 * n * d, n * d * d)
    ends = cx.edge_ends[cx.face_edges]  # (faces, 4 edges, 2 ends)
    fv = cx.face_vertices
    # *0: 00-10, *1: 01-11, 0*: 00-01, 1*: 10-11
    for k, (t, h) in enumerate([(0, 1), (2, 3), (0, 2), (1, 3)]):
        assert np.array_equal(ends[:, k, 0], fv[:, t])
        assert np.array_equal(ends[:, k, 1], fv[:, h])
    g, ai, bi = cx.face_labels.T
    A, B = np.array(a), np.array(b)
    assert np.array_equal(fv[:, 1] - n, group.mul[A[ai], g])
    assert np.array_equal(fv[:, 2] - 2 * n, group.mul[g, B[bi]])


@settings(max_examples=25, deadline=None)
@given(complexes())
def test_every_vertex_sees_delta_squared_faces(data):
    group, a, b = data
    if a is None:
        return
    cx = complex_for(group, a, b)
    d = cx.delta
    assert cx.faces_at_vertex.shape == (cx.n_vertices, d * d)
    for f_list, v in zip(cx.faces_at_vertex, range(cx.n_vertices)):
        assert np.all(np.any(cx.face_vertices[f_list] == v, axis=1))
    assert cx.faces_at_edge.shape == (cx.n_edges, d)
    for f_list, e in zip(cx.faces_at_edge, range(cx.n_edges)):
        assert np.all(np.any(cx.face_edges[f_list] == e, axis=1))


@settings(max_examples=25, deadline=None)
@given(complexes())
def test_incidences_invert_their_slot_maps(data):
    group, a, b = data
    if a is None:
        return
    cx = complex_for(group, a, b)
    for inc in (cx.ve_vertical, cx.ve_horizontal, cx.ef_vertical, cx.ef_horizontal):
        for s in (0, 1):
            assert np.array_equal(inc.at[inc.ends[:, s], inc.slots[:, s]], np.arange(inc.n_items))
            assert np.all(inc.side[inc.ends[:, s], inc.slots[:, s]] == s)


def test_vertex_neighborhood_counts():
    g = groups.build_psl2(3)
    rng = np.random.default_rng(0)
    cx = complex_for(g, symmetric_set(g, 3, rng), symmetric_set(g, 3, rng))
    view = cx.neighborhood("vertex", cx.vertex("10", 4))
    assert view.cls == "10" and len(view.faces) == 9
    assert len(view.edges["*0"]) == 3 and len(view.edges["1*"]) == 3
    assert len(view.vertices["01"]) == 9
    edge = cx.neighborhood("edge", cx.edge("0*", 2, 1))
    assert len(edge.faces) == 3 and set(edge.vertices) == {"00", "01"}
    with pytest.raises(IndexError):
        cx.neighborhood("vertex", cx.n_vertices)
    with pytest.raises(ValueError):
        cx.neighborhood("face", 0)


def test_unequal_generator_counts_are_rejected():
    g = groups.cyclic_group(7)
    with pytest.raises(ValueError, match="equal"):
        complex_for(g, [1, 6], [1, 6, 2, 5])


def test_summary_counts_shared_generators():
    g = groups.cyclic_group(7)
    s = complex_for(g, [1, 6], [1, 6]).summary()
    assert s["shared_generators"] == 2 and s["faces"] == 28


@pytest.mark.parametrize("n, offs", [(12, [1, 11, 5, 7]), (20, [1, 19, 3, 17]), (9, [1, 8, 2, 7])])
def test_edge_quadratic_forms_hold(n, offs):
    g = groups.cyclic_group(n)
    cx = complex_for(g, offs, offs)
    lam = groups.spectral_report(groups.cayley_graph(g, cx.A)).lam_bound
    res = cayley_complex.m0_m1_check(cx, lam, 200, np.random.default_rng(n))
    assert res.passed, res.first_violation


def test_quadratic_forms_exact_on_full_set():
    # one opposite edge per face, so every row of M1 sums to delta
    g = groups.cyclic_group(8)
    cx = complex_for(g, [1, 7, 3, 5], [1, 7, 3, 5])
    ones = np.ones(cx.n_edges)
    assert ones @ (cx.opposite_edge_matrix() @ ones) == cx.delta * cx.n_edges
