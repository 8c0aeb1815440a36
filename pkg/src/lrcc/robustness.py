"""Robustness of pairs of codes and the counting bounds around it.

A tensor word is an ``na x nb`` 0/1 matrix.  For enumeration it is packed
into a ``uint64`` mask with entry ``(r, j)`` at bit ``r*nb + j``, so word
sizes are limited to 64 cells.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import gf2
from .codes import INF, LinearCode, from_parity_check, puncture

GV_SLACK = 1e-9


# norms


def col_norm(c) -> int:
    """Number of nonzero columns."""
    return int(np.count_nonzero(np.asarray(c).any(axis=0)))


def row_norm(c) -> int:
    return int(np.count_nonzero(np.asarray(c).any(axis=1)))


def cross_norm(c) -> int:
    """Nonzero rows plus nonzero columns."""
    return row_norm(c) + col_norm(c)


# packed words


def to_mask(c) -> int:
    bits = gf2.as_bits(c).ravel()
    return int.from_bytes(np.packbits(bits, bitorder="little").tobytes(), "little")


def from_mask(mask: int, na: int, nb: int) -> np.ndarray:
    raw = np.frombuffer(int(mask).to_bytes(8, "little"), dtype=np.uint8)
    return np.unpackbits(raw, bitorder="little")[: na * nb].reshape(na, nb).copy()


def _masks(rows: np.ndarray) -> np.ndarray:
    return np.array([to_mask(r) for r in rows], dtype=np.uint64)


def _span(masks: np.ndarray) -> np.ndarray:
    """All combinations; bit j of the index selects ``masks[j]``."""
    out = np.zeros(1, dtype=np.uint64)
    for m in masks:
        out = np.concatenate([out, out ^ m])
    return out


class _Shape:
    def __init__(self, na: int, nb: int):
        if na * nb > 64:
            raise ValueError(f"tensor words of {na}x{nb} cells do not fit a 64-bit mask")
        self.na, self.nb = na, nb
        self.cols = np.array(
            [sum(1 << (r * nb + j) for r in range(na)) for j in range(nb)], dtype=np.uint64
        )
        self.rows = np.array([((1 << nb) - 1) << (r * nb) for r in range(na)], dtype=np.uint64)

    def col_count(self, x: np.ndarray) -> np.ndarray:
        out = np.zeros(x.shape, dtype=np.int64)
        for m in self.cols:
            out += (x & m) != 0
        return out

    def row_count(self, x: np.ndarray) -> np.ndarray:
        out = np.zeros(x.shape, dtype=np.int64)
        for m in self.rows:
            out += (x & m) != 0
        return out

    def max_line_weight(self, x: np.ndarray) -> np.ndarray:
        best = np.zeros(x.shape, dtype=np.int64)
        for m in np.concatenate([self.cols, self.rows]):
            best = np.maximum(best, np.bitwise_count(x & m).astype(np.int64))
        return best


def _check_cap(log2_size: int, cap: int, what: str) -> None:
    if log2_size >= 63 or (1 << log2_size) > cap:
        raise ValueError(f"{what} needs 2^{log2_size} enumerations, above cap {cap}")


# decompositions


@dataclass(frozen=True)
class Decomposition:
    c_a: np.ndarray  # every column in C_A
    c_b: np.ndarray  # every row in C_B

    @property
    def cost(self) -> int:
        return col_norm(self.c_a) + row_norm(self.c_b)


def sigma_member(c, CA: LinearCode, CB: LinearCode) -> bool:
    c = gf2.as_bits(c)
    if c.shape != (CA.n, CB.n):
        raise ValueError(f"word has shape {c.shape}, expected {(CA.n, CB.n)}")
    return not gf2.matmul(gf2.matmul(CA.H, c), CB.H.T).any()


def _particular_cb(c: np.ndarray, CA: LinearCode, CB: LinearCode) -> np.ndarray | None:
    """Some c_b with rows in C_B and columns of c + c_b in C_A (None if c is not in the sum)."""
    gb = CB.generator
    na, kb = CA.n, gb.shape[0]
    if kb == 0:
        return np.zeros_like(c) if not gf2.matmul(CA.H, c).any() else None
    # c_b = X @ gb with HA X gb = HA c, i.e. kron(HA, gb^T) vec(X) = vec(HA c)
    system = gf2.kron(CA.H, gb.T)
    rhs = gf2.matmul(CA.H, c).ravel()
    if system.shape[0] == 0:
        return np.zeros_like(c)
    sol = gf2.solve_affine(system, rhs)
    if sol is None:
        return None
    return gf2.matmul(sol[0].reshape(na, kb), gb)


def _product_basis(ga: np.ndarray, gb: np.ndarray) -> np.ndarray:
    """Masks of the outer products ga[i] (x) gb[j]: a basis of the tensor code."""
    words = [np.outer(x, y) for x in ga for y in gb]
    return _masks(np.array(words).reshape(len(words), -1)) if words else np.zeros(0, dtype=np.uint64)


def min_decomposition(c, CA: LinearCode, CB: LinearCode, cap: int = gf2.ENUM_CAP) -> Decomposition:
    """Cheapest split c = c_a + c_b, by enumerating the coset of admissible c_b."""
    c = gf2.as_bits(c)
    if not sigma_member(c, CA, CB):
        raise ValueError("word is not in the sum of the two column/row codes")
    shape = _Shape(CA.n, CB.n)
    _check_cap(CA.k * CB.k, cap, "decomposition coset")
    cb0 = _particular_cb(c, CA, CB)
    coset = np.uint64(to_mask(cb0)) ^ _span(_product_basis(CA.generator, CB.generator))
    cost = shape.col_count(np.uint64(to_mask(c)) ^ coset) + shape.row_count(coset)
    best = int(coset[int(np.argmin(cost))])
    cb = from_mask(best, CA.n, CB.n)
    return Decomposition(c ^ cb, cb)


@dataclass(frozen=True)
class RobustnessReport:
    d2: Fraction | None  # None when the sum space is {0}
    witness: np.ndarray | None
    decomposition: Decomposition | None
    dim_sigma: int

    @property
    def vacuous(self) -> bool:
        return self.d2 is None


def robustness_exact(CA: LinearCode, CB: LinearCode, cap: int = gf2.ENUM_CAP, chunk: int = 1 << 12) -> RobustnessReport:
    """Exact min over nonzero c in the sum space of |c| / (cheapest decomposition cost).

    Ties between words go to the smallest mask.
    """
    na, nb = CA.n, CB.n
    shape = _Shape(na, nb)
    basis = gf2.kernel_basis(gf2.kron(CA.H, CB.H)) if CA.m and CB.m else gf2.identity(na * nb)
    dim = basis.shape[0]
    if dim == 0:
        return RobustnessReport(None, None, None, 0)
    _check_cap(dim + CA.k * CB.k, cap, "robustness")
    parts = [_particular_cb(v.reshape(na, nb), CA, CB) for v in basis]
    words = _span(_masks(basis))
    cbs = _span(_masks(np.array([p.ravel() for p in parts])))
    tensor = _span(_product_basis(CA.generator, CB.generator))
    best_w, best_cost, best_mask = None, None, None
    for lo in range(0, words.size, chunk):
        w = words[lo : lo + chunk]
        cb = cbs[lo : lo + chunk, None] ^ tensor[None, :]
        cost = (shape.col_count(w[:, None] ^ cb) + shape.row_count(cb)).min(axis=1)
        wt = np.bitwise_count(w).astype(np.int64)
        nz = wt > 0
        if not nz.any():
            continue
        ratio = np.where(nz, wt / np.maximum(cost, 1), np.inf)
        lowest = ratio.min()
        for i in np.flatnonzero(np.isclose(ratio, lowest, rtol=0, atol=1e-12)):
            cand = (int(wt[i]), int(cost[i]), int(w[i]))
            if best_w is None:
                best_w, best_cost, best_mask = cand
                continue
            lhs, rhs = cand[0] * best_cost, best_w * cand[1]
            if lhs < rhs or (lhs == rhs and cand[2] < best_mask):
                best_w, best_cost, best_mask = cand
    witness = from_mask(best_mask, na, nb)
    dec = min_decomposition(witness, CA, CB, cap)
    assert dec.cost == best_cost
    return RobustnessReport(Fraction(best_w, best_cost), witness, dec, dim)


def _complement_units(gen: np.ndarray, n: int) -> np.ndarray:
    """Unit vectors spanning a complement of the row space of ``gen``."""
    if gen.shape[0] == 0:
        return gf2.identity(n)
    _, pivots = gf2.rref(gen)
    free = [j for j in range(n) if j not in set(pivots)]
    return gf2.identity(n)[free]


def agreement_test_parameter(CA: LinearCode, CB: LinearCode, cap: int = gf2.ENUM_CAP) -> Fraction | None:
    """Exact agreement parameter: min over pairs (c_a, c_b) with nonzero sum of
    |c_a + c_b| / min_c (cols(c + c_a) + rows(c + c_b)), c over the tensor code.

    Pairs are enumerated with c_a reduced modulo the tensor code.  ``None``
    means no pair has a nonzero sum.
    """
    na, nb = CA.n, CB.n
    shape = _Shape(na, nb)
    ga, gb = CA.generator, CB.generator
    ka, kb = ga.shape[0], gb.shape[0]
    _check_cap(ka * nb + na * kb, cap, "agreement test")
    reps = _span(_product_basis(ga, _complement_units(gb, nb)))
    cbs = _span(_product_basis(gf2.identity(na), gb))
    tensor = _span(_product_basis(ga, gb))
    best: Fraction | None = None
    for ca in reps:
        s = ca ^ cbs
        wt = np.bitwise_count(s).astype(np.int64)
        nz = wt > 0
        if not nz.any():
            continue
        cost = (shape.col_count(ca ^ tensor)[None, :] + shape.row_count(cbs[:, None] ^ tensor[None, :])).min(axis=1)
        idx = np.flatnonzero(nz)
        ratios = wt[idx] / cost[idx]
        i = idx[int(np.argmin(ratios))]
        cand = Fraction(int(wt[i]), int(cost[i]))
        if best is None or cand < best:
            best = cand
    return best


# structured words


def structured_decomposition(c, Ia, Ib, CA: LinearCode, CB: LinearCode) -> tuple[Decomposition, bool | None]:
    """Split a word living on a few rows ``Ia`` and columns ``Ib``.

    Columns of ``c_a`` are rebuilt from the rows outside ``Ia`` with a left
    inverse of ``HA`` restricted to ``Ia`` (rows of ``c_b`` likewise).  The
    second return value is the weight inequality ``|c| >= d1/2 * cost`` when
    both index sets are below half the distance, else ``None``.
    """
    c = gf2.as_bits(c)
    na, nb = CA.n, CB.n
    Ia, Ib = sorted(set(Ia)), sorted(set(Ib))
    d1 = min(CA.d1, CB.d1)
    if len(Ia) >= d1 or len(Ib) >= d1:
        raise ValueError(f"|Ia| = {len(Ia)}, |Ib| = {len(Ib)} must both be below the distance {d1}")
    if not sigma_member(c, CA, CB):
        raise ValueError("word is not in the sum of the two column/row codes")
    outside = np.ones((na, nb), dtype=bool)
    outside[Ia, :] = False
    outside[:, Ib] = False
    if c[outside].any():
        raise ValueError("word has support outside the rows Ia and columns Ib")
    rest_a = [i for i in range(na) if i not in Ia]
    rest_b = [j for j in range(nb) if j not in Ib]

    def recovery(H: np.ndarray, idx: list[int], rest: list[int], n: int) -> np.ndarray:
        rec = np.zeros((n, len(rest)), dtype=np.uint8)
        rec[rest, np.arange(len(rest))] = 1
        if idx:
            rec[idx] = gf2.matmul(gf2.left_inverse(H[:, idx]), H[:, rest])
        return rec

    c_a = np.zeros_like(c)
    c_b = np.zeros_like(c)
    if Ib:
        c_a[:, Ib] = gf2.matmul(recovery(CA.H, Ia, rest_a, na), c[np.ix_(rest_a, Ib)])
    if Ia:
        c_b[Ia, :] = gf2.matmul(recovery(CB.H, Ib, rest_b, nb), c[np.ix_(Ia, rest_b)].T).T
    if not np.array_equal(c_a ^ c_b, c):
        raise AssertionError("recovered parts do not add up to the word")
    dec = Decomposition(c_a, c_b)
    bound = None
    if 2 * len(Ia) < d1 and 2 * len(Ib) < d1:
        bound = dec.cost == 0 or 2 * gf2.weight(c) >= d1 * dec.cost
    return dec, bound


@dataclass(frozen=True)
class HeavyCheck:
    passed: bool
    counterexample: tuple | None  # (Ia, Ib, word on the punctured grid)
    words_checked: int


def punctured_heavy_check(CA: LinearCode, CB: LinearCode, s: int, t: int, cap: int = gf2.ENUM_CAP) -> HeavyCheck:
    """Every nonzero word of every s-punctured sum space has a row or column of weight >= t."""
    na, nb = CA.n, CB.n
    if not 0 <= s <= min(na, nb):
        raise ValueError(f"puncture size {s} out of range")
    shape = _Shape(na - s, nb - s)
    checked = 0
    for Ia in itertools.combinations(range(na), s):
        pa = puncture(CA, Ia)
        for Ib in itertools.combinations(range(nb), s):
            pb = puncture(CB, Ib)
            if pa.m and pb.m:
                basis = gf2.kernel_basis(gf2.kron(pa.H, pb.H))
            else:
                basis = gf2.identity(pa.n * pb.n)
            _check_cap(basis.shape[0], cap, "punctured sum space")
            checked += 1 << basis.shape[0]
            if checked > cap:
                raise ValueError(f"punctured heavy check exceeds cap {cap}")
            words = _span(_masks(basis))[1:]
            light = np.flatnonzero(shape.max_line_weight(words) < t)
            if light.size:
                word = from_mask(int(words[light[0]]), pa.n, pb.n)
                return HeavyCheck(False, (Ia, Ib, word), checked)
    return HeavyCheck(True, None, checked)


# counting bounds


def gaussian_binomial(x: int, y: int) -> int:
    """Number of y-dimensional subspaces of GF(2)^x."""
    if not 0 <= y <= x:
        raise ValueError(f"need 0 <= y <= x, got x={x}, y={y}")
    num = den = 1
    for i in range(y):
        num *= (1 << (x - i)) - 1
        den *= (1 << (i + 1)) - 1
    return num // den


def gaussian_binomial_bracket(x: int, y: int) -> bool:
    """2^(y(x-y)) <= binom(x, y)_2 <= 8 * 2^(y(x-y)), in exact integers."""
    g = gaussian_binomial(x, y)
    lo = 1 << (y * (x - y))
    return lo <= g <= 8 * lo


def entropy(p: float) -> float:
    if p <= 0 or p >= 1:
        return 0.0
    return -p * math.log2(p) - (1 - p) * math.log2(1 - p)


def count_light_matrices(n: int, t: int) -> dict[int, int]:
    """Exhaustive count, by rank, of n x n matrices whose rows and columns all have weight < t."""
    rows = [r for r in range(1 << n) if r.bit_count() < t]
    tally: dict[int, int] = {}
    col_w = [0] * n
    chosen: list[int] = []

    def rank_of(vals: list[int]) -> int:
        basis: list[int] = []
        for v in vals:
            for b in basis:
                v = min(v, v ^ b)
            if v:
                basis.append(v)
        return len(basis)

    def rec(i: int) -> None:
        if i == n:
            r = rank_of(chosen)
            tally[r] = tally.get(r, 0) + 1
            return
        for row in rows:
            bits = [j for j in range(n) if row >> j & 1]
            if any(col_w[j] + 1 >= t for j in bits):
                continue
            for j in bits:
                col_w[j] += 1
            chosen.append(row)
            rec(i + 1)
            chosen.pop()
            for j in bits:
                col_w[j] -= 1

    if t >= 1:
        rec(0)
    return tally


def light_matrix_log2_bound(n: int, r: int, t: int) -> float:
    return 2 * r * n * entropy(t / n) + 2 * n * entropy(r / n)


def codeword_log2_bound(n: int, r: int, ka: int, kb: int) -> float:
    return math.log2(512 * (r + 1)) - 0.75 * (n - ka) * (n - kb) / n * r


@dataclass(frozen=True)
class UnionRow:
    rank: int
    log2_light_bound: float
    log2_codeword_bound: float
    log2_term: float
    exact_light_count: int | None
    count_within_bound: bool | None


@dataclass(frozen=True)
class UnionBoundReport:
    delta: int
    s: int
    t: int
    rows: tuple[UnionRow, ...]
    log2_total: float  # sum over rank >= 1


def union_bound_report(delta: int, s: int, t: int, ka: int, kb: int, exhaustive_max: int = 5) -> UnionBoundReport:
    n = delta - s
    if not (0 <= s < delta and 1 <= t and 2 * t <= n and 0 <= ka <= delta and 0 <= kb <= delta):
        raise ValueError(f"need 0 <= s < delta, 1 <= t <= (delta - s)/2, got delta={delta}, s={s}, t={t}")
    counts = count_light_matrices(n, t) if n <= exhaustive_max else None
    log_pairs = 2 * math.log2(math.comb(delta, s))
    rows = []
    for r in range(n + 1):
        lm = light_matrix_log2_bound(n, r, t)
        lp = codeword_log2_bound(n, r, ka, kb)
        exact = counts.get(r, 0) if counts is not None else None
        ok = None if exact is None else (exact == 0 or math.log2(exact) <= lm + GV_SLACK)
        rows.append(UnionRow(r, lm, lp, log_pairs + lm + lp, exact, ok))
    terms = [row.log2_term for row in rows[1:]]
    top = max(terms) if terms else -math.inf
    total = top + math.log2(sum(2 ** (x - top) for x in terms)) if terms else -math.inf
    return UnionBoundReport(delta, s, t, tuple(rows), total)


# two-dimensional GV condition


def _gv_check_domain(rho_a: float, rho_b: float, delta1: float, delta2: float) -> None:
    if not (0 < rho_a < 1 and 0 < rho_b < 1):
        raise ValueError("rates must lie in (0, 1)")
    if not 0 < delta1 < 0.5:
        raise ValueError("delta1 must lie in (0, 1/2)")
    if not 0 < delta2 < delta1 * (1 - delta1 / 2) / 8:
        raise ValueError("delta2 must lie in (0, delta1 (1 - delta1/2) / 8)")


def gv2d_margin(rho_a: float, rho_b: float, delta1: float, delta2: float) -> float:
    """Right side minus left side of the two-dimensional GV condition."""
    _gv_check_domain(rho_a, rho_b, delta1, delta2)
    half = 1 - delta1 / 2
    lhs = 2 * entropy(delta1 / 2) + 2 * half * entropy(4 * delta2 / (delta1 * half))
    rhs = 0.75 * (half - rho_a) * (half - rho_b) / half
    return rhs - lhs


def gv2d_feasible(rho_a: float, rho_b: float, delta1: float, delta2: float) -> bool:
    """Strict condition with slack; both rate gaps 1 - delta1/2 - rho must be positive."""
    half = 1 - delta1 / 2
    margin = gv2d_margin(rho_a, rho_b, delta1, delta2)
    return half - rho_a > 0 and half - rho_b > 0 and margin > GV_SLACK


@dataclass(frozen=True)
class GVRegion:
    delta1: np.ndarray
    delta2: np.ndarray  # shape (len(delta1), len(fractions))
    margin: np.ndarray
    feasible: np.ndarray


def gv2d_region(rho_a: float, rho_b: float, delta1_values, fractions) -> GVRegion:
    """Scan delta2 = f * delta1 (1 - delta1/2) / 8 for each f in ``fractions`` (open unit interval)."""
    d1 = np.asarray(list(delta1_values), dtype=np.float64)
    fr = np.asarray(list(fractions), dtype=np.float64)
    d2 = d1[:, None] * (1 - d1[:, None] / 2) / 8 * fr[None, :]
    margin = np.empty(d2.shape)
    feas = np.zeros(d2.shape, dtype=bool)
    for i, j in np.ndindex(d2.shape):
        margin[i, j] = gv2d_margin(rho_a, rho_b, d1[i], d2[i, j])
        feas[i, j] = gv2d_feasible(rho_a, rho_b, d1[i], d2[i, j])
    return GVRegion(d1, d2, margin, feas)


# the local tensor complex


class LocalTensorComplex:
    """Three-term complex on na x nb grids: grid -> (grid HB^T, HA grid) -> HA . HB^T.

    Grade 1 is flattened as the ``na x mb`` part followed by the ``ma x nb`` part.
    """

    def __init__(self, HA, HB):
        self.CA = from_parity_check(HA)
        self.CB = from_parity_check(HB)
        self.HA, self.HB = self.CA.H, self.CB.H
        na, nb, ma, mb = self.CA.n, self.CB.n, self.CA.m, self.CB.m
        self.na, self.nb, self.ma, self.mb = na, nb, ma, mb
        self.d2 = np.concatenate([gf2.kron(gf2.identity(na), self.HB), gf2.kron(self.HA, gf2.identity(nb))])
        self.d1 = np.concatenate([gf2.kron(self.HA, gf2.identity(mb)), gf2.kron(gf2.identity(ma), self.HB)], axis=1)

    def split(self, c1) -> tuple[np.ndarray, np.ndarray]:
        c1 = gf2.as_bits(c1).ravel()
        cut = self.na * self.mb
        if c1.size != cut + self.ma * self.nb:
            raise ValueError(f"grade-1 vector has length {c1.size}, expected {cut + self.ma * self.nb}")
        return c1[:cut].reshape(self.na, self.mb), c1[cut:].reshape(self.ma, self.nb)

    def boundary2(self, c2) -> np.ndarray:
        c2 = gf2.as_bits(c2).reshape(self.na, self.nb)
        return np.concatenate([gf2.matmul(c2, self.HB.T).ravel(), gf2.matmul(self.HA, c2).ravel()])

    def norm1(self, c1) -> int:
        """Nonzero rows of the na x mb part plus nonzero columns of the ma x nb part."""
        rows_part, cols_part = self.split(c1)
        return row_norm(rows_part) + col_norm(cols_part)

    def exactness_check(self) -> bool:
        if gf2.matmul(self.d1, self.d2).any():
            return False
        dim_ker = self.d1.shape[1] - gf2.rank(self.d1)
        return dim_ker == gf2.rank(self.d2)

    def lift_small(self, c1, d2: Fraction | None = None, cap: int = gf2.ENUM_CAP) -> np.ndarray:
        """A preimage c2 of c1 with cross norm at most (1 + max(na, nb)/d2) * norm1(c1).

        ``d2`` is the robustness of the pair (ker HA, ker HB); it is computed
        when not given.
        """
        rows_part, cols_part = self.split(c1)
        c1 = gf2.as_bits(c1).ravel()
        if gf2.matmul(self.d1, c1[:, None]).any():
            raise ValueError("chain is not a boundary")
        na, nb = self.na, self.nb
        # guess column by column from HA and row by row from HB, zero where the target is zero
        guess_a = np.zeros((na, nb), dtype=np.uint8)
        for j in np.flatnonzero(cols_part.any(axis=0)):
            guess_a[:, j] = gf2.solve_affine(self.HA, cols_part[:, j])[0]
        guess_b = np.zeros((na, nb), dtype=np.uint8)
        for i in np.flatnonzero(rows_part.any(axis=1)):
            guess_b[i] = gf2.solve_affine(self.HB, rows_part[i])[0]
        mismatch = guess_a ^ guess_b
        dec = min_decomposition(mismatch, self.CA, self.CB, cap)
        c2 = guess_a ^ dec.c_a
        if not np.array_equal(c2, guess_b ^ dec.c_b):
            raise AssertionError("the two corrected guesses disagree")
        if not np.array_equal(self.boundary2(c2), c1):
            raise AssertionError("lift is not a preimage")
        if d2 is None:
            d2 = robustness_exact(self.CA, self.CB, cap).d2
        size = self.norm1(c1)
        bound = size if d2 is None else (1 + Fraction(max(na, nb)) / d2) * size
        if cross_norm(c2) > bound:
            raise AssertionError(f"lift norm {cross_norm(c2)} above bound {bound}")
        return c2


def local_complex(HA, HB) -> LocalTensorComplex:
    return LocalTensorComplex(HA, HB)
