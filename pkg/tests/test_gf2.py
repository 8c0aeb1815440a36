import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from lrcc import gf2


def bit_matrices(max_rows=9, max_cols=9):
    shapes = st.tuples(st.integers(1, max_rows), st.integers(1, max_cols))
    return shapes.flatmap(lambda s: arrays(np.uint8, s, elements=st.integers(0, 1)))


def rank_by_masks(m):
    """Independent rank: xor-basis of row bitmasks."""
    basis = []
    for row in m.tolist():
        v = int("".join(map(str, row)) or "0", 2)
        for b in basis:
            v = min(v, v ^ b)
        if v:
            basis.append(v)
    return len(basis)


def all_vectors(n):
    return np.array(list(itertools.product([0, 1], repeat=n)), dtype=np.uint8)


@given(bit_matrices())
def test_rank_matches_mask_oracle(m):
    assert gf2.rank(m) == rank_by_masks(m)


@given(bit_matrices())
def test_rank_of_transpose(m):
    assert gf2.rank(m) == gf2.rank(m.T)


@given(bit_matrices(), bit_matrices())
def test_matmul_against_integer_product(a, b):
    b = np.resize(b, (a.shape[1], b.shape[1]))
    assert np.array_equal(gf2.matmul(a, b), (a.astype(int) @ b.astype(int)) % 2)


@given(bit_matrices())
def test_kernel_basis_is_a_basis_of_the_kernel(m):
    k = gf2.kernel_basis(m)
    assert k.shape[0] == m.shape[1] - gf2.rank(m)
    assert not gf2.matmul(m, k.T).any()
    assert gf2.rank(k) == k.shape[0]


@given(bit_matrices(6, 7), st.data())
def test_solve_affine_agrees_with_brute_force(m, data):
    b = data.draw(arrays(np.uint8, m.shape[0], elements=st.integers(0, 1)))
    sols = [v for v in all_vectors(m.shape[1]) if np.array_equal(gf2.matmul(m, v), b)]
    res = gf2.solve_affine(m, b)
    if not sols:
        assert res is None
        return
    x, ker = res
    assert np.array_equal(gf2.matmul(m, x), b)
    assert 2 ** ker.shape[0] == len(sols)


@given(bit_matrices(4, 7), st.data())
def test_lex_least_is_least_in_coset(kernel, data):
    x = data.draw(arrays(np.uint8, kernel.shape[1], elements=st.integers(0, 1)))
    coset = [tuple(x ^ gf2.matmul(c, kernel)) for c in all_vectors(kernel.shape[0])]
    assert tuple(gf2.lex_least(x, kernel)) == min(coset)


@given(bit_matrices(7, 8))
def test_min_weight_matches_enumeration(basis):
    res = gf2.min_weight_nonzero(basis)
    words = gf2.matmul(all_vectors(basis.shape[0]), basis)
    nonzero = [int(w.sum()) for w in words if w.any()]
    if not nonzero:
        assert res is None
        return
    w, v = res
    assert w == min(nonzero) and int(v.sum()) == w


def test_min_weight_of_empty_basis():
    assert gf2.min_weight_nonzero(np.zeros((0, 4), np.uint8)) is None


def test_min_weight_refuses_above_cap():
    with pytest.raises(ValueError, match="cap"):
        gf2.min_weight_nonzero(gf2.identity(10), cap=512)


@given(st.integers(1, 8), st.data())
def test_inverse_round_trip(n, data):
    m = data.draw(arrays(np.uint8, (n, n), elements=st.integers(0, 1)))
    if gf2.rank(m) < n:
        with pytest.raises(gf2.RankDeficientError):
            gf2.inverse(m)
    else:
        assert np.array_equal(gf2.matmul(gf2.inverse(m), m), gf2.identity(n))


@given(bit_matrices(9, 5))
def test_left_inverse(m):
    if gf2.rank(m) < m.shape[1]:
        with pytest.raises(gf2.RankDeficientError):
            gf2.left_inverse(m)
    else:
        assert np.array_equal(gf2.matmul(gf2.left_inverse(m), m), gf2.identity(m.shape[1]))


@given(bit_matrices(6, 6), st.data())
def test_in_span(basis, data):
    v = data.draw(arrays(np.uint8, basis.shape[1], elements=st.integers(0, 1)))
    words = {tuple(w) for w in gf2.matmul(all_vectors(basis.shape[0]), basis)}
    assert gf2.in_span(basis, v) == (tuple(v) in words)


@settings(max_examples=20)
@given(bit_matrices(14, 6))
def test_span_chunks_enumerates_every_combination(basis):
    seen = []
    for start, block in gf2.span_chunks(basis, chunk_bits=3):
        for i, row in enumerate(block):
            coeff = start + i
            expect = np.zeros(basis.shape[1], np.uint8)
            for j in range(basis.shape[0]):
                if coeff >> j & 1:
                    expect ^= basis[j]
            assert np.array_equal(row, expect)
            seen.append(coeff)
    assert seen == list(range(2 ** basis.shape[0]))


def test_rref_on_wide_matrix_uses_packed_rows():
    rng = np.random.default_rng(0)
    m = rng.integers(0, 2, size=(40, 300), dtype=np.uint8)
    r, piv = gf2.rref(m)
    assert len(piv) == rank_by_masks(m)
    assert np.array_equal(r[: len(piv)][:, piv], gf2.identity(len(piv)))


def test_kron_index_convention():
    a = np.array([[1, 0], [1, 1]], np.uint8)
    b = np.array([[0, 1, 1]], np.uint8)
    k = gf2.kron(a, b)
    for ia, ja, jb in itertools.product(range(2), range(2), range(3)):
        assert k[ia * 1, ja * 3 + jb] == a[ia, ja] * b[0, jb]


def test_solve_affine_shape_mismatch():
    with pytest.raises(ValueError, match="shape mismatch"):
        gf2.solve_affine(gf2.identity(3), [1, 0])
