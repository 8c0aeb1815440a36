import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lrcc import groups


@pytest.mark.parametrize("q", [3, 5, 7])
def test_psl2_order_and_axioms(q):
    g = groups.build_psl2(q)
    assert g.order == q * (q * q - 1) // 2
    g.check_axioms()


def test_psl2_3_is_not_abelian():
    g = groups.build_psl2(3)
    assert not np.array_equal(g.mul, g.mul.T)


def test_psl2_element_projective_scaling():
    # -I and I are the same element
    assert groups.psl2_element(5, [[1, 0], [0, 1]]) == groups.psl2_element(5, [[4, 0], [0, 4]])
    with pytest.raises(ValueError, match="square"):
        groups.psl2_element(5, [[2, 0], [0, 1]])


def test_table_group_rejects_non_group():
    with pytest.raises(ValueError):
        groups.table_group([[0, 1], [1, 1]])


@pytest.mark.parametrize("elems, msg", [([1, 1, 4, 4], "duplicate"), ([0, 1, 4], "identity"), ([1, 2], "inverse")])
def test_generator_validation(elems, msg):
    g = groups.cyclic_group(5)
    with pytest.raises(groups.ClosureError, match=msg):
        groups.make_generators(g, elems)


def test_build_cyclic_rejects_offsets_equal_mod_n():
    with pytest.raises(groups.ClosureError):
        groups.build_cyclic(5, [1, 4, 6, 9])


@settings(max_examples=30, deadline=None)
@given(st.integers(5, 40), st.data())
def test_cyclic_spectrum_matches_character_sums(n, data):
    s = data.draw(st.integers(1, (n - 1) // 2))
    t = data.draw(st.integers(1, (n - 1) // 2).filter(lambda t: t != s))
    offsets = [s, n - s, t, n - t]
    g, gens = groups.build_cyclic(n, offsets)
    rep = groups.spectral_report(groups.cayley_graph(g, gens))
    chars = sorted((sum(math.cos(2 * math.pi * j * o / n) for o in offsets) for j in range(n)), reverse=True)
    assert np.allclose(rep.eigenvalues, chars, atol=1e-9)
    assert rep.delta == 4
    assert rep.lam == pytest.approx(max(abs(chars[1]), abs(chars[-1])))


def test_left_and_right_cayley_graphs_are_regular():
    g = groups.build_psl2(5)
    a = [groups.psl2_element(5, m) for m in ([[1, 1], [0, 1]], [[1, 4], [0, 1]], [[1, 0], [1, 1]], [[1, 0], [4, 1]])]
    for side in ("left", "right"):
        graph = groups.cayley_graph(g, groups.make_generators(g, a, side))
        assert np.all(graph.degrees() == 4)
        assert np.array_equal(graph.adjacency, graph.adjacency.T)


def test_double_cover_spectrum_is_symmetric():
    g, gens = groups.build_cyclic(9, [1, 8, 2, 7])
    cover = groups.double_cover(groups.cayley_graph(g, gens))
    eig = np.array(groups.spectral_report(cover).eigenvalues)
    assert np.allclose(np.sort(eig), np.sort(-eig), atol=1e-9)
    assert len(cover.components()) == 1


def test_irregular_graph_is_rejected():
    graph = groups.Graph(3, np.array([[0, 1], [1, 0]]))
    with pytest.raises(groups.RegularityError):
        groups.spectral_report(graph)


def test_lps_generators_are_ramanujan():
    p, q = 17, 13
    gens = groups.lps_generators(p, q)
    assert len(gens) == p + 1
    g = groups.build_psl2(q)
    rep = groups.spectral_report(groups.cayley_graph(g, gens))
    assert rep.delta == p + 1
    assert rep.lam <= 2 * math.sqrt(p) + 1e-9


def test_lps_rejects_bad_primes():
    with pytest.raises(ValueError):
        groups.lps_generators(5, 7)


def test_mixing_bound_holds_on_samples():
    g, gens = groups.build_cyclic(31, [1, 30, 5, 26])
    graph = groups.cayley_graph(g, gens)
    res = groups.mixing_check(graph, groups.spectral_report(graph), 300, np.random.default_rng(3))
    assert res.passed and res.violations == 0
