"""Classical binary linear codes given by parity checks, plus alist / Matrix Market I/O."""

from __future__ import annotations

import functools
import io
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.io
import scipy.sparse as sp

from . import gf2

INF = math.inf  # distance of the zero code


@dataclass(frozen=True, eq=False)
class LinearCode:
    H: np.ndarray

    @property
    def n(self) -> int:
        return int(self.H.shape[1])

    @property
    def m(self) -> int:
        return int(self.H.shape[0])

    @functools.cached_property
    def k(self) -> int:
        return self.n - gf2.rank(self.H)

    @functools.cached_property
    def generator(self) -> np.ndarray:
        """Rows form a basis of the code."""
        return gf2.kernel_basis(self.H)

    @functools.cached_property
    def d1(self) -> float:
        return distance_exact(self)

    def contains(self, word) -> bool:
        return not gf2.matmul(self.H, gf2.as_bits(word).reshape(-1, 1)).any()

    def same_space(self, other: "LinearCode") -> bool:
        if self.n != other.n or self.k != other.k:
            return False
        return not gf2.matmul(other.H, self.generator.T).any()


def from_parity_check(H) -> LinearCode:
    H = gf2.as_bits(H)
    if H.ndim != 2:
        raise ValueError(f"parity check must be a matrix, got shape {H.shape}")
    return LinearCode(H)


def repetition(n: int) -> LinearCode:
    H = np.zeros((n - 1, n), dtype=np.uint8)
    idx = np.arange(n - 1)
    H[idx, idx] = 1
    H[idx, idx + 1] = 1
    return LinearCode(H)


def full_space(n: int) -> LinearCode:
    return LinearCode(np.zeros((0, n), dtype=np.uint8))


def zero_code(n: int) -> LinearCode:
    return LinearCode(gf2.identity(n))


def dual(code: LinearCode) -> LinearCode:
    return LinearCode(code.generator.copy())


def distance_exact(code: LinearCode, cap: int = gf2.ENUM_CAP) -> float:
    """Minimum weight of a nonzero codeword; ``INF`` for the zero code."""
    res = gf2.min_weight_nonzero(code.generator, cap)
    return INF if res is None else res[0]


def min_weight_codeword(code: LinearCode, cap: int = gf2.ENUM_CAP) -> np.ndarray | None:
    res = gf2.min_weight_nonzero(code.generator, cap)
    return None if res is None else res[1]


def puncture(code: LinearCode, removed) -> LinearCode:
    removed = sorted({int(i) for i in removed})
    if any(i < 0 or i >= code.n for i in removed):
        raise ValueError(f"puncture positions {removed} outside [0, {code.n})")
    keep = [j for j in range(code.n) if j not in set(removed)]
    gen = code.generator[:, keep]
    if gen.shape[0] == 0:
        return zero_code(len(keep))
    return LinearCode(gf2.kernel_basis(gf2.row_basis(gen)))


def from_generator(G, n: int | None = None) -> LinearCode:
    G = gf2.as_bits(G)
    if G.shape[0] == 0:
        return zero_code(n if n is not None else G.shape[1])
    return LinearCode(gf2.kernel_basis(G))


def sample_uniform(n: int, k: int, rng: np.random.Generator) -> LinearCode:
    """Uniformly random k-dimensional subspace of GF(2)^n (rejection on full rank)."""
    if not 0 <= k <= n:
        raise ValueError(f"need 0 <= k <= n, got n={n}, k={k}")
    if k == 0:
        return zero_code(n)
    while True:
        G = rng.integers(0, 2, size=(k, n), dtype=np.uint8)
        if gf2.rank(G) == k:
            return from_generator(G)


def canonical_basis(code: LinearCode) -> bytes:
    """Hashable key identifying the code as a subspace."""
    gen = code.generator
    if gen.shape[0] == 0:
        return b""
    return np.packbits(gf2.row_basis(gen), axis=1).tobytes()


# file formats


def write_alist(H, path_or_buf) -> str:
    """MacKay alist: 1-based indices, column lists then row lists, zero padded."""
    H = gf2.as_bits(H)
    m, n = H.shape
    col_w = H.sum(axis=0).astype(int)
    row_w = H.sum(axis=1).astype(int)
    max_c = int(col_w.max()) if n else 0
    max_r = int(row_w.max()) if m else 0
    lines = [f"{n} {m}", f"{max_c} {max_r}", " ".join(map(str, col_w)), " ".join(map(str, row_w))]
    # an all-zero list is written as a single 0 so that no line is blank
    for j in range(n):
        idx = (np.flatnonzero(H[:, j]) + 1).tolist()
        lines.append(" ".join(map(str, idx + [0] * (max(max_c, 1) - len(idx)))))
    for i in range(m):
        idx = (np.flatnonzero(H[i]) + 1).tolist()
        lines.append(" ".join(map(str, idx + [0] * (max(max_r, 1) - len(idx)))))
    text = "\n".join(lines) + "\n"
    _emit(text, path_or_buf)
    return text


def read_alist(source) -> np.ndarray:
    text = _slurp(source)
    rows = [line.split() for line in text.splitlines() if line.strip()]
    try:
        n, m = int(rows[0][0]), int(rows[0][1])
        pos = 2
        col_w = [int(x) for x in rows[pos]] if n else []
        pos += n > 0
        row_w = [int(x) for x in rows[pos]] if m else []
        pos += m > 0
    except (IndexError, ValueError) as exc:
        raise ValueError(f"malformed alist header: {exc}") from None
    body = rows[pos:]
    if len(body) != n + m or len(col_w) != n or len(row_w) != m:
        raise ValueError(f"alist expects {n} column and {m} row lists, found {len(body)} lines")
    H = np.zeros((m, n), dtype=np.uint8)
    for j, line in enumerate(body[:n]):
        idx = [int(x) - 1 for x in line if int(x) > 0]
        if len(idx) != col_w[j]:
            raise ValueError(f"column {j + 1}: weight {col_w[j]} declared, {len(idx)} listed")
        H[idx, j] = 1
    for i, line in enumerate(body[n:]):
        idx = sorted(int(x) - 1 for x in line if int(x) > 0)
        if idx != np.flatnonzero(H[i]).tolist() or len(idx) != row_w[i]:
            raise ValueError(f"row {i + 1} disagrees with the column lists")
    return H


def write_mtx(H, path_or_buf) -> str:
    H = gf2.as_bits(H)
    buf = io.BytesIO()
    scipy.io.mmwrite(buf, sp.coo_matrix(H.astype(np.int64)), field="integer", symmetry="general")
    text = buf.getvalue().decode()
    _emit(text, path_or_buf)
    return text


def read_mtx(source) -> np.ndarray:
    text = _slurp(source)
    mat = scipy.io.mmread(io.BytesIO(text.encode()))
    dense = mat.toarray() if sp.issparse(mat) else np.asarray(mat)
    return gf2.as_bits(dense)


def _emit(text: str, target) -> None:
    if target is None:
        return
    if isinstance(target, (str, Path)):
        Path(target).write_text(text)
    else:
        target.write(text)


def _slurp(source) -> str:
    if isinstance(source, Path) or (isinstance(source, str) and "\n" not in source):
        return Path(source).read_text()
    if isinstance(source, str):
        return source
    return source.read()
