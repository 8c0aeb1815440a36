"""Dense linear algebra over GF(2).

Matrices and vectors are numpy ``uint8`` arrays holding 0/1 entries.
Gaussian elimination packs rows into bytes with ``np.packbits`` so that
row operations are XORs over ``cols / 8`` bytes.
"""

from __future__ import annotations

from collections.abc import Iterator

import numpy as np

ENUM_CAP = 1 << 22


def as_bits(a) -> np.ndarray:
    """Return a fresh uint8 0/1 copy of ``a``."""
    return (np.asarray(a, dtype=np.int64) & 1).astype(np.uint8)


def zeros(rows: int, cols: int) -> np.ndarray:
    return np.zeros((rows, cols), dtype=np.uint8)


def identity(n: int) -> np.ndarray:
    return np.eye(n, dtype=np.uint8)


def weight(v) -> int:
    return int(np.count_nonzero(v))


def matmul(a, b) -> np.ndarray:
    """Product over GF(2); float BLAS is exact while counts stay below 2**24."""
    a = np.asarray(a)
    b = np.asarray(b)
    inner = a.shape[-1]
    dtype = np.float32 if inner < (1 << 24) else np.float64
    prod = a.astype(dtype) @ b.astype(dtype)
    return (prod.astype(np.int64) & 1).astype(np.uint8)


def kron(a, b) -> np.ndarray:
    """Kronecker product with row index ``ia*rows(b)+ib`` and column index ``ja*cols(b)+jb``."""
    return (np.kron(as_bits(a), as_bits(b)) & 1).astype(np.uint8)


def _rref_packed(m: np.ndarray, n_pivot_cols: int) -> tuple[np.ndarray, list[int]]:
    rows = m.shape[0]
    packed = np.packbits(m, axis=1)
    pivots: list[int] = []
    r = 0
    for j in range(n_pivot_cols):
        if r == rows:
            break
        byte = j >> 3
        mask = np.uint8(0x80 >> (j & 7))
        below = np.flatnonzero(packed[r:, byte] & mask)
        if below.size == 0:
            continue
        p = r + int(below[0])
        if p != r:
            packed[[r, p]] = packed[[p, r]]
        hits = np.flatnonzero(packed[:, byte] & mask)
        hits = hits[hits != r]
        if hits.size:
            packed[hits] ^= packed[r]
        pivots.append(j)
        r += 1
    return packed, pivots


def rref(m, n_pivot_cols: int | None = None) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form.

    Pivots are only searched in the first ``n_pivot_cols`` columns (all by
    default); row operations act on the full width.  Returns ``(R, pivots)``
    where ``R`` has the same shape as ``m``.
    """
    m = as_bits(m)
    if m.ndim != 2:
        raise ValueError(f"expected a matrix, got shape {m.shape}")
    cols = m.shape[1]
    if n_pivot_cols is None:
        n_pivot_cols = cols
    if m.size == 0:
        return m.copy(), []
    packed, pivots = _rref_packed(m, n_pivot_cols)
    return np.unpackbits(packed, axis=1, count=cols), pivots


def rank(m) -> int:
    m = np.asarray(m)
    if m.size == 0:
        return 0
    return len(rref(m)[1])


def _kernel_from_rref(r: np.ndarray, pivots: list[int], cols: int) -> np.ndarray:
    pivset = set(pivots)
    free = [j for j in range(cols) if j not in pivset]
    basis = np.zeros((len(free), cols), dtype=np.uint8)
    basis[np.arange(len(free)), free] = 1
    if pivots and free:
        basis[:, pivots] = r[: len(pivots)][:, free].T
    return basis


def kernel_basis(m) -> np.ndarray:
    """Rows of the returned matrix form a basis of ker m (one row per free column)."""
    m = as_bits(m)
    cols = m.shape[1]
    if m.shape[0] == 0:
        return identity(cols)
    r, pivots = rref(m)
    return _kernel_from_rref(r, pivots, cols)


def row_basis(m) -> np.ndarray:
    """Nonzero rows of the reduced echelon form: a basis of the row space."""
    m = as_bits(m)
    if m.shape[0] == 0:
        return m.copy()
    r, pivots = rref(m)
    return r[: len(pivots)]


def solve_affine(m, b) -> tuple[np.ndarray, np.ndarray] | None:
    """Solve ``m x = b``.

    Returns ``(particular, kernel)`` with kernel rows spanning ker m, or
    ``None`` when the system is inconsistent.
    """
    m = as_bits(m)
    b = as_bits(b).reshape(-1)
    rows, cols = m.shape
    if b.shape[0] != rows:
        raise ValueError(f"shape mismatch: matrix has {rows} rows, rhs has length {b.shape[0]}")
    aug = np.concatenate([m, b[:, None]], axis=1)
    r, pivots = rref(aug, n_pivot_cols=cols)
    if np.any(r[len(pivots):, cols]):
        return None
    x = np.zeros(cols, dtype=np.uint8)
    for i, p in enumerate(pivots):
        x[p] = r[i, cols]
    return x, _kernel_from_rref(r[:, :cols], pivots, cols)


def lex_least(x, kernel) -> np.ndarray:
    """Lexicographically least element of ``x + span(kernel)`` (position 0 most significant)."""
    x = as_bits(x).copy()
    kernel = as_bits(kernel)
    if kernel.shape[0] == 0:
        return x
    r, pivots = rref(kernel)
    for i, p in enumerate(pivots):
        if x[p]:
            x ^= r[i]
    return x


def solve_many(m, rhs) -> np.ndarray | None:
    """Particular solutions of ``m X = rhs`` column by column (free variables zero)."""
    m = as_bits(m)
    rhs = as_bits(rhs)
    if rhs.ndim == 1:
        rhs = rhs[:, None]
    cols = m.shape[1]
    aug = np.concatenate([m, rhs], axis=1)
    r, pivots = rref(aug, n_pivot_cols=cols)
    if np.any(r[len(pivots):, cols:]):
        return None
    x = np.zeros((cols, rhs.shape[1]), dtype=np.uint8)
    x[pivots] = r[: len(pivots), cols:]
    return x


class RankDeficientError(ValueError):
    pass


def inverse(m) -> np.ndarray:
    m = as_bits(m)
    n = m.shape[0]
    if m.shape != (n, n):
        raise ValueError("inverse needs a square matrix")
    r, pivots = rref(np.concatenate([m, identity(n)], axis=1), n_pivot_cols=n)
    if len(pivots) < n:
        raise RankDeficientError(f"matrix is singular (rank {len(pivots)} < {n})")
    return r[:, n:]


def left_inverse(m) -> np.ndarray:
    """Return ``J`` with ``J @ m == I``; raises ``RankDeficientError`` if m is not injective.

    The first linearly independent rows of ``m`` (scanning top to bottom) are
    used as pivots, so the result is deterministic.
    """
    m = as_bits(m)
    rows, cols = m.shape
    if cols == 0:
        return zeros(0, rows)
    _, piv_rows = rref(m.T)
    if len(piv_rows) < cols:
        raise RankDeficientError(f"matrix is not injective (rank {len(piv_rows)} < {cols} columns)")
    j = zeros(cols, rows)
    j[:, piv_rows] = inverse(m[piv_rows])
    return j


def span_chunks(basis, chunk_bits: int = 12) -> Iterator[tuple[int, np.ndarray]]:
    """Enumerate every combination of the rows of ``basis``.

    Yields ``(start, block)`` where row ``i`` of ``block`` is the combination
    with coefficient index ``start + i``; bit ``j`` of the index selects row
    ``j`` of the basis.  Index 0 (the zero vector) comes first.
    """
    basis = as_bits(basis)
    k, n = basis.shape
    low = min(k, chunk_bits)
    table = np.zeros((1, n), dtype=np.uint8)
    for j in range(low):
        table = np.concatenate([table, table ^ basis[j]], axis=0)
    high = basis[low:]
    for h in range(1 << (k - low)):
        offset = np.zeros(n, dtype=np.uint8)
        for j in range(k - low):
            if (h >> j) & 1:
                offset ^= high[j]
        yield h << low, table ^ offset


def min_weight_nonzero(basis, cap: int = ENUM_CAP) -> tuple[int, np.ndarray] | None:
    """Minimum Hamming weight over nonzero vectors of the span, with a witness.

    Returns ``None`` when the span is {0}.  Raises ``ValueError`` when
    ``2**dim`` exceeds ``cap``.  Ties go to the smallest coefficient index.
    """
    basis = as_bits(basis)
    k = basis.shape[0]
    if k == 0:
        return None
    if (1 << k) > cap:
        raise ValueError(f"span of dimension {k} exceeds enumeration cap {cap}")
    best_w = None
    best_v = None
    for start, block in span_chunks(basis):
        w = block.sum(axis=1, dtype=np.int64)
        w[w == 0] = np.iinfo(np.int64).max  # dependent rows can cancel
        i = int(np.argmin(w))
        if w[i] < np.iinfo(np.int64).max and (best_w is None or w[i] < best_w):
            best_w = int(w[i])
            best_v = block[i].copy()
    return None if best_w is None else (best_w, best_v)


def in_span(basis, v) -> bool:
    basis = as_bits(basis)
    v = as_bits(v).reshape(1, -1)
    if basis.shape[0] == 0:
        return not v.any()
    return rank(np.concatenate([basis, v])) == rank(basis)
