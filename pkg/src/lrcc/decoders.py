"""Small-set-flip co-decoders and the reconstruction decoder for the chain direction.

Local coordinates at a vertex follow ``ChainComplex``: the ``Y`` block
(D x mb, one row per vertical slot) then the ``X`` block (ma x D, one
column per horizontal slot).  A local flip pattern is an integer whose
bit ``j`` is local bit ``j``.
"""

from __future__ import annotations

import functools
import itertools
import time
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import gf2
from .chain import ChainComplex


# radii


@dataclass(frozen=True)
class DecodingRadii:
    eta: Fraction
    eta_prime: Fraction
    kappa: Fraction

    @property
    def applicable(self) -> bool:
        return self.eta > 0 and self.eta_prime > 0

    def error_radius(self, x: ChainComplex) -> Fraction:
        """Largest guaranteed edge-cell norm for the co-decoder on ``x``."""
        if not self.applicable:
            return Fraction(0)
        return self.kappa * x.n_edge_bits / (2 * x.delta * (x.ma + x.mb))


def radii(d1, d2, lam, delta) -> DecodingRadii:
    d1, d2, lam, delta = (Fraction(v) for v in (d1, d2, lam, delta))
    eta = (d1 * d2 - lam * d2 - 8 * lam * delta) / (delta * d2 / 2 + 2 * delta)
    eta_p = (d1 * d2 / 4 - lam * d2 / 2 - 8 * lam * delta) / (delta * d2 / 4 + 2 * delta)
    kappa = (delta * d2 / 2 + 2 * delta) / (8 * delta * d2 + 16 * delta * delta) * eta_p * eta
    return DecodingRadii(eta, eta_p, kappa)


# local flip tables


def _local_units(H_left: np.ndarray, H_right: np.ndarray, delta: int) -> np.ndarray:
    """Face-grid mask of ``Y Hr + Hl^T X`` for each local unit bit (Y block then X block)."""
    mr, ml = H_right.shape[0], H_left.shape[0]
    units = []
    for a in range(delta):
        for j in range(mr):
            z = np.zeros((delta, delta), dtype=np.uint8)
            z[a] = H_right[j]
            units.append(z)
    for i in range(ml):
        for b in range(delta):
            z = np.zeros((delta, delta), dtype=np.uint8)
            z[:, b] = H_left[i]
            units.append(z)
    return np.array([_grid_mask(z) for z in units], dtype=np.uint64)


def _grid_mask(z: np.ndarray) -> int:
    return int(sum(1 << int(i) for i in np.flatnonzero(z.ravel())))


class FlipTable:
    """Best local flip for every local syndrome.

    Only the face footprint of a flip matters for the weight drop.  When
    the footprint space is small it is enumerated outright, keeping the
    smallest pattern per footprint, so ties go to the smallest pattern.
    Otherwise footprints are reached through coset leaders of the local
    tensor code (the footprint space is its dual): the drop is still
    exact, ties go to the smallest leader.  With ``max_support`` set, only
    patterns touching at most that many local bits are tried and the
    decoder guarantee is void.
    """

    def __init__(self, x: ChainComplex, cap: int = gf2.ENUM_CAP, max_support: int | None = None):
        d = x.delta
        if d * d > 64:
            raise ValueError(f"face grid of {d * d} bits does not fit a 64-bit mask")
        units = [int(u) for u in _local_units(x.HA, x.HB, d)]
        n_local = len(units)
        if n_local > 62:
            raise ValueError(f"{n_local} local bits do not fit a pattern index")
        self.n_local = n_local
        self.exhaustive = max_support is None
        self.basis, self.kernel = _eliminate(units)
        self.leaders = None
        self.footprint: dict[int, int] = {}
        if not self.exhaustive:
            pats, masks = [0], [0]
            for size in range(1, max_support + 1):
                for combo in itertools.combinations(range(n_local), size):
                    pats.append(sum(1 << j for j in combo))
                    masks.append(functools.reduce(lambda acc, j: acc ^ units[j], combo, 0))
            order = np.argsort(pats)
            self.patterns = np.array(pats, dtype=np.int64)[order]
            self.masks = np.array(masks, dtype=np.uint64)[order]
        elif (1 << len(self.basis)) <= cap:
            self.patterns, self.masks = _footprint_space(self.basis, self.kernel)
        else:
            tensor = gf2.kron(x.CA.generator, x.CB.generator)
            self.checks = [_grid_mask(row.reshape(d, d)) for row in tensor]
            if (1 << len(self.checks)) > cap:
                raise ValueError(f"neither 2^{len(self.basis)} footprints nor 2^{len(self.checks)} leaders fit cap {cap}")
            self.leaders = _coset_leaders(self.checks, d * d)
        if self.leaders is None:
            self.footprint = dict(zip(self.patterns.tolist(), self.masks.tolist()))
        self._cache: dict[int, tuple[int, int]] = {}

    def best(self, syndrome_mask: int) -> tuple[int, int]:
        """(pattern, drop) of the best flip."""
        hit = self._cache.get(syndrome_mask)
        if hit is None:
            if self.leaders is None:
                w = np.bitwise_count(self.masks ^ np.uint64(syndrome_mask))
                i = int(np.argmin(w))  # entries are sorted by pattern
                hit = (int(self.patterns[i]), int(syndrome_mask).bit_count() - int(w[i]))
            else:
                key = sum((((syndrome_mask & c).bit_count() & 1) << i) for i, c in enumerate(self.checks))
                leader = self.leaders[key]
                foot = syndrome_mask ^ leader
                pattern = _smallest_pattern(foot, self.basis, self.kernel)
                self.footprint[pattern] = foot
                hit = (pattern, syndrome_mask.bit_count() - leader.bit_count())
            self._cache[syndrome_mask] = hit
        return hit


def _eliminate(units: list[int]) -> tuple[dict[int, tuple[int, int]], dict[int, int]]:
    """Echelon basis of the footprints (leading bit -> (footprint, pattern)) and of the empty-footprint patterns."""
    basis: dict[int, tuple[int, int]] = {}
    kernel: dict[int, int] = {}
    for j, u in enumerate(units):
        val, pat = u, 1 << j
        while val:
            lead = val.bit_length() - 1
            if lead not in basis:
                basis[lead] = (val, pat)
                break
            val ^= basis[lead][0]
            pat ^= basis[lead][1]
        else:
            while pat:
                lead = pat.bit_length() - 1
                if lead not in kernel:
                    kernel[lead] = pat
                    break
                pat ^= kernel[lead]
    return basis, kernel


def _footprint_space(basis, kernel) -> tuple[np.ndarray, np.ndarray]:
    """Every reachable footprint with the smallest pattern producing it, sorted by pattern."""
    masks = np.zeros(1, dtype=np.uint64)
    pats = np.zeros(1, dtype=np.int64)
    for val, pat in basis.values():
        masks = np.concatenate([masks, masks ^ np.uint64(val)])
        pats = np.concatenate([pats, pats ^ np.int64(pat)])
    for lead in sorted(kernel, reverse=True):
        # clearing leading bits from the top gives the least element of each coset
        hit = (pats >> lead) & 1 == 1
        pats[hit] ^= np.int64(kernel[lead])
    order = np.argsort(pats)
    return pats[order], masks[order]


def _smallest_pattern(foot: int, basis, kernel) -> int:
    pat = 0
    while foot:
        lead = foot.bit_length() - 1
        if lead not in basis:
            raise ValueError("footprint outside the reachable space")
        foot ^= basis[lead][0]
        pat ^= basis[lead][1]
    for lead in sorted(kernel, reverse=True):
        if (pat >> lead) & 1:
            pat ^= kernel[lead]
    return pat


def _coset_leaders(checks: list[int], n_bits: int) -> list[int]:
    """Least-weight (then smallest) word for every syndrome against ``checks``."""
    total = 1 << len(checks)
    leaders: list[int | None] = [None] * total
    found = 0
    for w in range(n_bits + 1):
        for combo in itertools.combinations(range(n_bits), w):
            word = sum(1 << i for i in combo)
            key = sum((((word & c).bit_count() & 1) << i) for i, c in enumerate(checks))
            if leaders[key] is None:
                leaders[key] = word
                found += 1
        # finish the weight class so ties resolve to the smallest word
        if found == total:
            break
    return leaders


def _pattern_bits(pattern: int, n_local: int) -> np.ndarray:
    return np.array([(pattern >> j) & 1 for j in range(n_local)], dtype=np.uint8)


@dataclass
class CoDecodeResult:
    correction: np.ndarray
    syndrome: np.ndarray  # residual face syndrome
    iterations: int
    evaluations: int
    guaranteed_search: bool
    wall_ns: int = 0
    flips: list = field(default_factory=list)  # (vertex, pattern)

    @property
    def success(self) -> bool:
        return not self.syndrome.any()


class CoDecoder:
    """Greedy flips at single vertices that strictly lower the face syndrome weight."""

    def __init__(self, x: ChainComplex, cap: int = gf2.ENUM_CAP, max_support: int | None = None):
        self.x = x
        self.table = FlipTable(x, cap, max_support)
        grid = x.vertex_faces.reshape(x.cx.n_vertices, -1)
        self.grid = grid
        self.weights = np.uint64(1) << np.arange(grid.shape[1], dtype=np.uint64)
        fv = x.cx.face_vertices
        self.neighbors = [np.unique(fv[grid[v]]) for v in range(grid.shape[0])]

    def local_mask(self, syndrome: np.ndarray, v: int) -> int:
        return int(np.bitwise_or.reduce(self.weights[syndrome[self.grid[v]] != 0], initial=np.uint64(0)))

    def find_flip(self, v: int, syndrome) -> tuple[np.ndarray, int] | None:
        """Best local flip at ``v`` as a full grade-1 vector, or None if nothing lowers the weight."""
        pattern, drop = self.table.best(self.local_mask(np.asarray(syndrome), v))
        if drop <= 0:
            return None
        e1 = np.zeros(self.x.n_edge_bits, dtype=np.uint8)
        e1[self.x.vertex_local_index[v]] = _pattern_bits(pattern, self.table.n_local)
        return e1, drop

    def _apply(self, v, pattern, syndrome, correction):
        bits = _pattern_bits(pattern, self.table.n_local)
        correction[self.x.vertex_local_index[v]] ^= bits
        footprint = self.table.footprint[pattern]
        local = np.array([(footprint >> i) & 1 for i in range(self.grid.shape[1])], dtype=np.uint8)
        syndrome[self.grid[v]] ^= local

    def decode_simple(self, syndrome) -> CoDecodeResult:
        t0 = time.perf_counter_ns()
        s = gf2.as_bits(syndrome).copy()
        corr = np.zeros(self.x.n_edge_bits, dtype=np.uint8)
        flips, evals = [], 0
        n_v = self.grid.shape[0]
        changed = True
        while changed and s.any():
            changed = False
            for v in range(n_v):
                pattern, drop = self.table.best(self.local_mask(s, v))
                evals += 1
                if drop > 0:
                    self._apply(v, pattern, s, corr)
                    flips.append((v, pattern))
                    changed = True
        return CoDecodeResult(corr, s, len(flips), evals, self.table.exhaustive, time.perf_counter_ns() - t0, flips)

    def decode_queue(self, syndrome) -> CoDecodeResult:
        t0 = time.perf_counter_ns()
        s = gf2.as_bits(syndrome).copy()
        corr = np.zeros(self.x.n_edge_bits, dtype=np.uint8)
        flips, evals = [], 0
        if not s.any():
            return CoDecodeResult(corr, s, 0, 0, self.table.exhaustive, time.perf_counter_ns() - t0, flips)
        queue: deque[int] = deque()
        queued = np.zeros(self.grid.shape[0], dtype=bool)
        # only vertices touching the syndrome can be flippable
        touched = np.unique(self.x.cx.face_vertices[np.flatnonzero(s)])
        for v in touched:
            evals += 1
            if self.table.best(self.local_mask(s, v))[1] > 0:
                queue.append(int(v))
                queued[v] = True
        while queue:
            v = queue.popleft()
            queued[v] = False
            pattern, drop = self.table.best(self.local_mask(s, v))
            evals += 1
            if drop <= 0:
                continue  # stale entry
            self._apply(v, pattern, s, corr)
            flips.append((v, pattern))
            for u in self.neighbors[v]:
                if queued[u]:
                    continue
                evals += 1
                if self.table.best(self.local_mask(s, u))[1] > 0:
                    queue.append(int(u))
                    queued[u] = True
        return CoDecodeResult(corr, s, len(flips), evals, self.table.exhaustive, time.perf_counter_ns() - t0, flips)

    def is_co_locally_minimal(self, syndrome) -> bool:
        s = gf2.as_bits(syndrome)
        return all(self.table.best(self.local_mask(s, v))[1] <= 0 for v in range(self.grid.shape[0]))


@functools.lru_cache(maxsize=16)
def _decoder_for(x: ChainComplex) -> CoDecoder:
    return CoDecoder(x)


def find_flip(x: ChainComplex, v: int, syndrome):
    return _decoder_for(x).find_flip(v, syndrome)


def co_decode_simple(x: ChainComplex, syndrome) -> CoDecodeResult:
    return _decoder_for(x).decode_simple(syndrome)


def co_decode_queue(x: ChainComplex, syndrome) -> CoDecodeResult:
    return _decoder_for(x).decode_queue(syndrome)


# chain-direction helpers


def verify_correction(x: ChainComplex, claimed, true_error, direction: str = "chain") -> bool:
    """Does ``claimed + true_error`` lie in the boundaries (chain) or coboundaries (cochain)?"""
    diff = gf2.as_bits(claimed) ^ gf2.as_bits(true_error)
    if direction == "chain":
        return gf2.solve_affine(x.d2, diff) is not None
    if direction == "cochain":
        return gf2.solve_affine(x.d1.T, diff) is not None
    raise ValueError(f"direction must be 'chain' or 'cochain', got {direction!r}")


def local_flip_reduce(x: ChainComplex, c1) -> tuple[np.ndarray, np.ndarray]:
    """Add single-face boundaries while the edge-cell norm strictly drops.

    Returns the reduced chain and the face chain that was added.
    """
    c1 = gf2.as_bits(c1).copy()
    c2 = np.zeros(x.n_faces, dtype=np.uint8)
    d2 = x.d2
    offs = x.edge_offsets
    face_bits = [np.flatnonzero(d2[:, f]) for f in range(x.n_faces)]
    face_edges = x.cx.face_edges
    norm = x.cell_norm(c1, 1)
    improved = True
    while improved:
        improved = False
        for f in range(x.n_faces):
            bits = face_bits[f]
            if bits.size == 0:
                continue
            edges = face_edges[f]
            before = sum(bool(c1[offs[e]:offs[e + 1]].any()) for e in edges)
            c1[bits] ^= 1
            after = sum(bool(c1[offs[e]:offs[e + 1]].any()) for e in edges)
            if after < before:
                c2[f] ^= 1
                norm -= before - after
                improved = True
            else:
                c1[bits] ^= 1
    return c1, c2


# reconstruction decoder


def local_boundary_matrix(x: ChainComplex) -> np.ndarray:
    """Map from local edge bits at a vertex (Y then X) to its ma*mb block: ``HA Y + X HB^T``."""
    d, ma, mb = x.delta, x.ma, x.mb
    cols = []
    for a in range(d):
        for j in range(mb):
            e = np.zeros(mb, dtype=np.uint8)
            e[j] = 1
            cols.append(np.outer(x.HA[:, a], e).ravel())
    for i in range(ma):
        for b in range(d):
            e = np.zeros(ma, dtype=np.uint8)
            e[i] = 1
            cols.append(np.outer(e, x.HB[:, b]).ravel())
    return np.array(cols, dtype=np.uint8).reshape(len(cols), ma * mb).T.copy()


class LocalSolver:
    """Minimum-cell-norm solutions of the local boundary equation, cached by target.

    Cells are the D rows of ``Y`` then the D columns of ``X``.  Supports are
    searched by increasing size; inside the first feasible size every
    solution uses all its cells, so the lexicographically least one over
    those supports is the answer.
    """

    def __init__(self, x: ChainComplex, cap: int = gf2.ENUM_CAP):
        self.x = x
        self.M = local_boundary_matrix(x)
        d, ma, mb = x.delta, x.ma, x.mb
        if (1 << (2 * d)) > cap:
            raise ValueError(f"2^{2 * d} local supports exceed cap {cap}")
        self.cell_bits = [np.arange(a * mb, (a + 1) * mb) for a in range(d)]
        self.cell_bits += [d * mb + np.arange(ma) * d + b for b in range(d)]
        self.supports = sorted(range(1 << (2 * d)), key=lambda s: (s.bit_count(), s))
        self._cache: dict[bytes, np.ndarray] = {}

    def cells(self, words: np.ndarray) -> np.ndarray:
        words = np.atleast_2d(words)
        return sum(words[:, bits].any(axis=1).astype(np.int64) for bits in self.cell_bits)

    def solve(self, target) -> np.ndarray:
        target = gf2.as_bits(target).ravel()
        key = target.tobytes()
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        n = self.M.shape[1]
        best, size = None, None
        for s in self.supports:
            if size is not None and s.bit_count() > size:
                break
            picked = [self.cell_bits[c] for c in range(len(self.cell_bits)) if (s >> c) & 1]
            cols = np.concatenate(picked) if picked else np.zeros(0, dtype=np.int64)
            sol = gf2.solve_affine(self.M[:, cols], target)
            if sol is None:
                continue
            word = np.zeros(n, dtype=np.uint8)
            word[cols] = gf2.lex_least(*sol)
            # a smaller support would have been found first, so every cell is used
            size = s.bit_count()
            if best is None or tuple(word) < tuple(best):
                best = word
        if best is None:
            raise ValueError("local syndrome is not in the image of the local boundary map")
        self._cache[key] = best
        return best


def local_minimal_solve(x: ChainComplex, v: int, target) -> np.ndarray:
    """Minimal-cell-norm local edge word at ``v`` whose local boundary is ``target``."""
    del v  # the local map is the same at every vertex
    return _solver_for(x).solve(target)


@functools.lru_cache(maxsize=16)
def _solver_for(x: ChainComplex) -> LocalSolver:
    return LocalSolver(x)


def _least_preimage(H: np.ndarray, t: np.ndarray) -> np.ndarray | None:
    """Lexicographically least u with H u = t (zero when t is zero)."""
    sol = gf2.solve_affine(H, t)
    return None if sol is None else gf2.lex_least(*sol)


@dataclass
class ReconstructResult:
    correction: np.ndarray | None
    success: bool
    stage: str  # where it stopped: "done" or the failing step
    co_decoder: CoDecodeResult | None = None
    workspace: dict = field(default_factory=dict)


def decode_reconstruct(x: ChainComplex, x_dual: ChainComplex, c0, variant: str = "queue") -> ReconstructResult:
    """Recover a grade-1 chain from its vertex syndrome ``c0`` via the dual co-decoder."""
    c0 = gf2.as_bits(c0).ravel()
    cx = x.cx
    d, ma, mb = x.delta, x.ma, x.mb
    n_vert = cx.n_vertices
    nd = cx.n * d
    nv_edges = 2 * nd
    if not c0.any():
        return ReconstructResult(np.zeros(x.n_edge_bits, dtype=np.uint8), True, "done")

    # 1: minimal local guess at every vertex
    solver = _solver_for(x)
    blocks = c0.reshape(n_vert, ma * mb)
    try:
        s1 = np.array([solver.solve(blocks[v]) for v in range(n_vert)], dtype=np.uint8)
    except ValueError:
        return ReconstructResult(None, False, "local solve")
    y_blocks = s1[:, : d * mb].reshape(n_vert, d, mb)
    x_blocks = s1[:, d * mb:].reshape(n_vert, ma, d).transpose(0, 2, 1)  # (V, D, ma)

    ve_v, ve_h = cx.ve_vertical, cx.ve_horizontal
    y_end = [y_blocks[ve_v.ends[:, s], ve_v.slots[:, s]] for s in (0, 1)]  # (2nD, mb) each
    x_end = [x_blocks[ve_h.ends[:, s], ve_h.slots[:, s]] for s in (0, 1)]

    # 2: disagreement on each edge
    t_vert = y_end[0] ^ y_end[1]
    t_hor = x_end[0] ^ x_end[1]

    # 3: lift each disagreement to the faces of its edge
    u_vert = _lift_rows(x.HB, t_vert)
    u_hor = _lift_rows(x.HA, t_hor)
    if u_vert is None or u_hor is None:
        return ReconstructResult(None, False, "edge lift")

    # 4: face syndrome for the dual complex, then co-decode
    ef_v, ef_h = cx.ef_vertical, cx.ef_horizontal
    c2 = np.zeros(x.n_faces, dtype=np.uint8)
    for s in (0, 1):
        c2 ^= u_vert[ef_v.ends[:, s], ef_v.slots[:, s]]
        c2 ^= u_hor[ef_h.ends[:, s], ef_h.slots[:, s]]
    dec = _decoder_for(x_dual)
    res = dec.decode_queue(c2) if variant == "queue" else dec.decode_simple(c2)
    work = {"s1": s1, "t_vert": t_vert, "t_hor": t_hor, "u_vert": u_vert, "u_hor": u_hor, "c2": c2}
    if not res.success:
        return ReconstructResult(None, False, "dual co-decoder", res, work)

    # 5: corrected lifts
    kb, ka = x_dual.mb, x_dual.ma
    ct = res.correction
    cv = ct[: nv_edges * kb].reshape(nv_edges, kb)
    ch = ct[x_dual.h_offset:].reshape(nv_edges, ka)
    tv = u_vert ^ gf2.matmul(cv, x_dual.HB)
    th = u_hor ^ gf2.matmul(ch, x_dual.HA)
    work.update(t2_vert=tv, t2_hor=th)

    # 6: read each edge from one endpoint, fixing the far classes through the corrected lifts
    out_v = y_end[0].copy()  # *0 from V00, *1 from V01
    out_h = x_end[0].copy()  # 0* from V00, 1* from V10
    far_v = np.arange(nd, nv_edges)
    faces = ef_v.at[far_v]  # (nD, D) faces of each *1 edge by slot b
    grid = th[ef_h.ends[faces, 0], ef_h.slots[faces, 0]]  # lift on the 0* edge of each face
    out_v[far_v] ^= gf2.matmul(grid, x.HB.T)
    far_h = np.arange(nd, nv_edges)
    faces = ef_h.at[far_h]  # (nD, D) faces of each 1* edge by slot a
    grid = tv[ef_v.ends[faces, 0], ef_v.slots[faces, 0]]  # lift on the *0 edge of each face
    out_h[far_h] ^= gf2.matmul(grid, x.HA.T)
    c1 = np.concatenate([out_v.ravel(), out_h.ravel()]).astype(np.uint8)

    if not np.array_equal(x.boundary(c1, 1), c0):
        return ReconstructResult(None, False, "final check", res, work)
    return ReconstructResult(c1, True, "done", res, work)


def _lift_rows(H: np.ndarray, targets: np.ndarray) -> np.ndarray | None:
    cache: dict[bytes, np.ndarray | None] = {}
    out = np.zeros((targets.shape[0], H.shape[1]), dtype=np.uint8)
    for i, t in enumerate(targets):
        key = t.tobytes()
        if key not in cache:
            cache[key] = _least_preimage(H, t)
        if cache[key] is None:
            return None
        out[i] = cache[key]
    return out
