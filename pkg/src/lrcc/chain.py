"""The three-term complex faces -> edges -> vertices built from four Tanner maps.

Bit layout:

* grade 2: one bit per face, in face order;
* grade 1: vertical edges (classes *0 then *1) carry ``mb`` bits each, then
  horizontal edges (0* then 1*) carry ``ma`` bits each;
* grade 0: vertex ``v`` owns bits ``v*ma*mb + i*mb + j`` (an ``ma x mb`` block).

Around every vertex the faces form a ``D x D`` grid indexed by the vertical
slot ``a`` and the horizontal slot ``b``; the vertical edge in slot ``a``
is row ``a`` of a ``D x mb`` block ``Y`` and the horizontal edge in slot
``b`` is column ``b`` of an ``ma x D`` block ``X``.  With that convention
the local boundary is ``HA Y + X HB^T`` and the local coboundary is
``Y HB + HA^T X`` for every vertex.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import gf2
from .cayley_complex import Incidence, LeftRightComplex
from .codes import INF, LinearCode, dual


class ChainConditionError(AssertionError):
    pass


def block_tanner_map(inc: Incidence, blocks, width: int) -> np.ndarray:
    """Map from ``width`` bits per item to ``rows`` bits per node.

    ``blocks[slot]`` is the ``rows x width`` matrix applied when an item
    meets a node in that slot; contributions add over GF(2).
    """
    inc.at  # validates the identification
    blocks = [gf2.as_bits(b) for b in blocks]
    if len(blocks) != inc.degree:
        raise ValueError(f"need one block per slot ({inc.degree}), got {len(blocks)}")
    rows = blocks[0].shape[0]
    out = np.zeros((inc.n_nodes * rows, inc.n_items * width), dtype=np.uint8)
    r_off = np.arange(rows)
    c_off = np.arange(width)
    for side in (0, 1):
        for slot, blk in enumerate(blocks):
            items = np.flatnonzero(inc.slots[:, side] == slot)
            if items.size == 0 or rows == 0 or width == 0:
                continue
            nodes = inc.ends[items, side]
            ri = (nodes[:, None, None] * rows + r_off[None, :, None])
            ci = (items[:, None, None] * width + c_off[None, None, :])
            out[ri, ci] ^= blk[None, :, :]
    return out


def tanner_map(inc: Incidence, H) -> np.ndarray:
    """Copy each item bit to its two ends, then apply ``H`` at every node (slot = column)."""
    H = gf2.as_bits(H)
    if H.shape[1] != inc.degree:
        raise ValueError(f"check matrix has {H.shape[1]} columns, nodes have degree {inc.degree}")
    return block_tanner_map(inc, [H[:, [s]] for s in range(inc.degree)], 1)


@dataclass(frozen=True)
class LdpcProfile:
    d2_max_row: int
    d2_max_col: int
    d1_max_row: int
    d1_max_col: int
    delta: int
    ma: int
    mb: int

    def coarse_ok(self) -> bool:
        return max(self.d2_max_row, self.d2_max_col, self.d1_max_row, self.d1_max_col) <= 4 * self.delta

    def fine_ok(self) -> dict[str, bool]:
        m = max(self.ma, self.mb)
        return {
            "face bit to edge bits": self.d2_max_col <= 4 * m,
            "edge bit to face bits": self.d2_max_row <= self.delta,
            "edge bit to vertex bits": self.d1_max_col <= 2 * m,
            "vertex bit to edge bits": self.d1_max_row <= 2 * self.delta,
        }


class ChainComplex:
    def __init__(self, cx: LeftRightComplex, CA: LinearCode, CB: LinearCode):
        if not (CA.n == CB.n == cx.delta):
            raise ValueError(f"code lengths {CA.n}, {CB.n} must equal the generator count {cx.delta}")
        self.cx, self.CA, self.CB = cx, CA, CB
        self.HA, self.HB = CA.H, CB.H
        self.ma, self.mb = CA.m, CB.m
        d, n = cx.delta, cx.n
        self.delta = d
        self.n_faces = cx.n_faces
        nv_edges = 2 * n * d
        self.h_offset = nv_edges * self.mb
        self.n_edge_bits = nv_edges * (self.ma + self.mb)
        self.n_vertex_bits = cx.n_vertices * self.ma * self.mb

        self.d2 = np.concatenate([tanner_map(cx.ef_vertical, self.HB), tanner_map(cx.ef_horizontal, self.HA)])
        ia, ib = gf2.identity(self.ma), gf2.identity(self.mb)
        vert = block_tanner_map(cx.ve_vertical, [gf2.kron(self.HA[:, [a]], ib) for a in range(d)], self.mb)
        hor = block_tanner_map(cx.ve_horizontal, [gf2.kron(ia, self.HB[:, [b]]) for b in range(d)], self.ma)
        self.d1 = np.concatenate([vert, hor], axis=1)
        self._check_chain_condition()

    # layout
    @functools.cached_property
    def edge_offsets(self) -> np.ndarray:
        nv = 2 * self.cx.n * self.delta
        widths = np.concatenate([np.full(nv, self.mb), np.full(nv, self.ma)])
        return np.concatenate([[0], np.cumsum(widths)]).astype(np.int64)

    def edge_bits(self, e: int) -> np.ndarray:
        return np.arange(self.edge_offsets[e], self.edge_offsets[e + 1])

    def vertex_bits(self, v: int) -> np.ndarray:
        w = self.ma * self.mb
        return np.arange(v * w, (v + 1) * w)

    @functools.cached_property
    def vertex_faces(self) -> np.ndarray:
        """``vertex_faces[v, a, b]``: the face at vertical slot a and horizontal slot b of v."""
        cx = self.cx
        nv_edges = 2 * cx.n * self.delta
        vert = cx.ve_vertical.at  # (V, D) local vertical edge ids
        hor = cx.ve_horizontal.at
        grid = cx.ef_vertical.at[vert]  # (V, D_a, D_b)
        check = cx.ef_horizontal.at[hor]  # (V, D_b, D_a)
        if not np.array_equal(grid, check.transpose(0, 2, 1)):
            raise AssertionError("vertical and horizontal slot grids disagree")
        del nv_edges
        return grid

    @functools.cached_property
    def vertex_local_index(self) -> np.ndarray:
        """Grade-1 bit indices of the ``Y`` block (D x mb) then the ``X`` block (ma x D) of each vertex."""
        cx = self.cx
        d, ma, mb = self.delta, self.ma, self.mb
        vert = cx.ve_vertical.at  # (V, D)
        hor = cx.ve_horizontal.at
        y = vert[:, :, None] * mb + np.arange(mb)[None, None, :]  # (V, D, mb)
        x = self.h_offset + hor[:, None, :] * ma + np.arange(ma)[None, :, None]  # (V, ma, D)
        return np.concatenate([y.reshape(cx.n_vertices, d * mb), x.reshape(cx.n_vertices, ma * d)], axis=1)

    def incident_edges(self, v: int) -> np.ndarray:
        return self.cx.incident_edges(v)

    # norms
    def cell_norm(self, vec, grade: int) -> int:
        vec = np.asarray(vec).ravel()
        if grade == 2:
            return int(np.count_nonzero(vec))
        if grade == 1:
            return int(np.count_nonzero(self.edge_cells(vec)))
        if grade == 0:
            w = self.ma * self.mb
            return int(np.count_nonzero(vec.reshape(-1, w).any(axis=1))) if w else 0
        raise ValueError(f"grade must be 0, 1 or 2, got {grade}")

    def edge_cells(self, vec) -> np.ndarray:
        """Boolean per edge: is the edge's block nonzero."""
        vec = np.asarray(vec, dtype=bool).ravel()
        if vec.size != self.n_edge_bits:
            raise ValueError(f"grade-1 vector has {vec.size} bits, expected {self.n_edge_bits}")
        return _reduce_any(vec, self.edge_offsets)

    def block_size(self, grade: int) -> int:
        return {2: 1, 1: max(self.ma, self.mb), 0: self.ma * self.mb}[grade]

    def size(self, grade: int) -> int:
        return {2: self.n_faces, 1: self.n_edge_bits, 0: self.n_vertex_bits}[grade]

    # maps
    def boundary(self, vec, grade: int) -> np.ndarray:
        m = {2: self.d2, 1: self.d1}[grade]
        return gf2.matmul(m, gf2.as_bits(vec).reshape(-1, 1)).ravel()

    def coboundary(self, vec, grade: int) -> np.ndarray:
        m = {0: self.d1, 1: self.d2}[grade]
        return gf2.matmul(gf2.as_bits(vec).reshape(1, -1), m).ravel()

    def _check_chain_condition(self) -> None:
        prod = gf2.matmul(self.d1, self.d2)
        if prod.any():
            bit, face = (int(x) for x in np.argwhere(prod)[0])
            v = bit // max(self.ma * self.mb, 1)
            raise ChainConditionError(f"boundary of boundary is nonzero at face {face}, vertex {v}")

    def ldpc_profile(self) -> LdpcProfile:
        def mx(m, axis):
            return int(m.sum(axis=axis, dtype=np.int64).max()) if m.size else 0

        return LdpcProfile(mx(self.d2, 1), mx(self.d2, 0), mx(self.d1, 1), mx(self.d1, 0), self.delta, self.ma, self.mb)


def _reduce_any(vec: np.ndarray, offsets: np.ndarray) -> np.ndarray:
    """Per-segment OR along the last axis; empty segments give False."""
    vec = np.asarray(vec, dtype=bool)
    widths = np.diff(offsets)
    out = np.zeros(vec.shape[:-1] + (widths.size,), dtype=bool)
    nz = widths > 0
    if nz.any():
        out[..., nz] = np.logical_or.reduceat(vec, offsets[:-1][nz], axis=-1)
    return out


def build_chain_complex(cx: LeftRightComplex, CA: LinearCode, CB: LinearCode) -> ChainComplex:
    return ChainComplex(cx, CA, CB)


def dual_complex(cx: LeftRightComplex, CA: LinearCode, CB: LinearCode) -> ChainComplex:
    """Same square complex with the dual local codes."""
    return ChainComplex(cx, dual(CA), dual(CB))


# dimension and rate


def rate_lower_bound(rho_a, rho_b) -> Fraction:
    """-(2 rho_a - 1)(2 rho_b - 1) / (2 (2 - rho_a - rho_b)), with rho = 1 - checks/length."""
    rho_a, rho_b = Fraction(rho_a), Fraction(rho_b)
    return -(2 * rho_a - 1) * (2 * rho_b - 1) / (2 * (2 - rho_a - rho_b))


@dataclass(frozen=True)
class DimensionReport:
    k: int
    n: int
    rank_d1: int
    rank_d2: int
    rate: Fraction
    lower_bound: Fraction

    @property
    def bound_holds(self) -> bool:
        return self.rate >= self.lower_bound


def dimension_and_rate(x: ChainComplex) -> DimensionReport:
    r1, r2 = gf2.rank(x.d1), gf2.rank(x.d2)
    n = x.n_edge_bits
    k = n - r1 - r2
    d = x.delta
    bound = rate_lower_bound(1 - Fraction(x.ma, d), 1 - Fraction(x.mb, d))
    return DimensionReport(k, n, r1, r2, Fraction(k, n), bound)


@dataclass(frozen=True)
class CssCode:
    Hx: np.ndarray
    Hz: np.ndarray

    @property
    def n(self) -> int:
        return int(self.Hx.shape[1])

    @functools.cached_property
    def k(self) -> int:
        return self.n - gf2.rank(self.Hx) - gf2.rank(self.Hz)


def css_code(x: ChainComplex) -> CssCode:
    """Qubits on edge bits, X checks on vertex bits, Z checks on faces."""
    code = CssCode(x.d1.copy(), x.d2.T.copy())
    if gf2.matmul(code.Hx, code.Hz.T).any():
        raise ChainConditionError("X and Z checks do not commute")
    return code


# exact distances


@dataclass(frozen=True)
class Systole:
    hamming: int | None
    hamming_witness: np.ndarray | None
    cell: int | None
    cell_witness: np.ndarray | None


@dataclass(frozen=True)
class DistanceReport:
    k: int
    dz: Systole  # cycles modulo boundaries
    dx: Systole  # cocycles modulo coboundaries


def _quotient_basis(sub: np.ndarray, whole: np.ndarray) -> np.ndarray:
    """Rows of ``whole`` that extend a basis of span(sub) to span(whole), scanned in order."""
    picked = []
    current = gf2.row_basis(sub) if sub.shape[0] else sub
    r = current.shape[0]
    for v in whole:
        trial = np.concatenate([current, v[None, :]]) if current.shape[0] else v[None, :]
        if gf2.rank(trial) > r:
            current, r = trial, r + 1
            picked.append(v)
    return np.array(picked, dtype=np.uint8).reshape(len(picked), whole.shape[1])


def _systole(d_in: np.ndarray, d_out: np.ndarray, offsets: np.ndarray, cap: int) -> Systole:
    """Minimum Hamming and cell weight over ker(d_out) minus im(d_in)."""
    n = d_out.shape[1]
    cycles = gf2.kernel_basis(d_out)
    bounds = gf2.row_basis(d_in.T) if d_in.size else np.zeros((0, n), dtype=np.uint8)
    logical = _quotient_basis(bounds, cycles)
    if logical.shape[0] == 0:
        return Systole(None, None, None, None)
    total = logical.shape[0] + bounds.shape[0]
    if total > 62 or (1 << total) > cap:
        raise ValueError(f"distance needs 2^{logical.shape[0]} classes x 2^{bounds.shape[0]} boundaries, above cap {cap}")
    lp, bp = _pack64(logical), _pack64(bounds)
    pos = np.arange(n)
    cell_masks = _pack64((pos >= offsets[:-1, None]) & (pos < offsets[1:, None]))
    big = np.iinfo(np.int64).max
    best = {"h": (big, None), "c": (big, None)}
    for lstart, lblock in _span64(lp, 6):
        if lstart == 0:
            lblock = lblock[1:]  # skip the trivial class
        if lblock.shape[0] == 0:
            continue
        for _, bblock in _span64(bp, 12):
            words = (lblock[:, None, :] ^ bblock[None, :, :]).reshape(-1, lp.shape[1])
            h = np.bitwise_count(words).sum(axis=1, dtype=np.int64)
            c = np.zeros(words.shape[0], dtype=np.int64)
            for mask in cell_masks:
                c += (words & mask).any(axis=1)
            for key, vals in (("h", h), ("c", c)):
                i = int(np.argmin(vals))
                if vals[i] < best[key][0]:
                    best[key] = (int(vals[i]), _unpack64(words[i], n))
    return Systole(best["h"][0], best["h"][1], best["c"][0], best["c"][1])


def _pack64(rows: np.ndarray) -> np.ndarray:
    rows = gf2.as_bits(rows)
    k, n = rows.shape
    width = max(1, -(-n // 64))
    padded = np.zeros((k, width * 64), dtype=np.uint8)
    padded[:, :n] = rows
    return np.packbits(padded, axis=1, bitorder="little").view(np.uint64).reshape(k, width)


def _unpack64(word: np.ndarray, n: int) -> np.ndarray:
    return np.unpackbits(word.view(np.uint8), bitorder="little")[:n].astype(np.uint8)


def _span64(basis: np.ndarray, chunk_bits: int):
    """Same enumeration order as ``gf2.span_chunks`` on packed rows."""
    k = basis.shape[0]
    low = min(k, chunk_bits)
    table = np.zeros((1, basis.shape[1]), dtype=np.uint64)
    for j in range(low):
        table = np.concatenate([table, table ^ basis[j]])
    high = basis[low:]
    for h in range(1 << (k - low)):
        offset = np.zeros(basis.shape[1], dtype=np.uint64)
        for j in range(k - low):
            if (h >> j) & 1:
                offset ^= high[j]
        yield h << low, table ^ offset


def quantum_distance_exact(x: ChainComplex, cap: int = gf2.ENUM_CAP) -> DistanceReport:
    dz = _systole(x.d2, x.d1, x.edge_offsets, cap)
    dx = _systole(x.d1.T, x.d2.T, x.edge_offsets, cap)
    return DistanceReport(dimension_and_rate(x).k, dz, dx)


# expansion probe


def co_expansion_constants(lam, d1, d2, delta) -> tuple[Fraction, Fraction, Fraction]:
    """(linear coefficient, quadratic coefficient, eta) of the co-expansion inequality."""
    lam, d1, d2, delta = (Fraction(v) for v in (lam, d1, d2, delta))
    num = d1 * d2 - lam * d2 - 8 * lam * delta
    den = 4 * d2 + 8 * delta
    quad = (delta * d2 / 2 + 2 * delta) / den
    eta = num / (delta * d2 / 2 + 2 * delta)
    return num / den, quad, eta


def vertex_coflip_reduce(x: ChainComplex, c1: np.ndarray, max_rounds: int = 10_000) -> np.ndarray:
    """Add single-vertex coboundaries while the edge-cell norm strictly drops."""
    c1 = gf2.as_bits(c1).copy()
    w = x.ma * x.mb
    if w == 0:
        return c1
    local = gf2.as_bits([[(i >> j) & 1 for j in range(w)] for i in range(1, 1 << w)])
    cx = x.cx
    for _ in range(max_rounds):
        improved = False
        for v in range(cx.n_vertices):
            edges = cx.incident_edges(v)
            bits = np.concatenate([x.edge_bits(e) for e in edges])
            offs = np.concatenate([[0], np.cumsum([x.edge_offsets[e + 1] - x.edge_offsets[e] for e in edges])])
            rows = x.d1[x.vertex_bits(v)][:, bits]
            flips = gf2.matmul(local, rows)
            cur = c1[bits]
            before = int(_reduce_any(cur.astype(bool), offs).sum())
            after = np.array([_reduce_any((cur ^ f).astype(bool), offs).sum() for f in flips])
            k = int(np.argmin(after))
            if after[k] < before:
                c1[bits] ^= flips[k]
                improved = True
        if not improved:
            return c1
    raise RuntimeError("co-flip reduction did not settle")


@dataclass(frozen=True)
class ExpansionProbe:
    eta: Fraction
    linear: Fraction
    quadratic: Fraction
    applicable: bool
    samples: int
    violations: int
    worst_slack: float
    rows: list = field(default_factory=list)  # (cochain cell norm, coboundary norm, bound)


def expansion_probe(x: ChainComplex, lam, d1, d2, samples: int, rng: np.random.Generator) -> ExpansionProbe:
    """Evaluate the co-expansion inequality on random co-locally minimal cochains.

    Violations are counted, not raised: with overridden parameters the
    inequality is not a theorem.
    """
    lin, quad, eta = co_expansion_constants(lam, d1, d2, x.delta)
    n = x.cx.n
    bad = 0
    worst = math.inf
    rows = []
    for _ in range(samples):
        density = rng.random() * 0.3
        c1 = (rng.random(x.n_edge_bits) < density).astype(np.uint8)
        c1 = vertex_coflip_reduce(x, c1)
        size = x.cell_norm(c1, 1)
        cob = x.cell_norm(x.coboundary(c1, 1), 2)
        bound = float(lin * size - quad * Fraction(size * size, n))
        slack = cob - bound
        worst = min(worst, slack)
        bad += slack < -1e-12
        rows.append((size, cob, bound))
    return ExpansionProbe(eta, lin, quad, eta > 0, samples, bad, worst, rows)
