"""Finite groups given by multiplication tables, Cayley graphs and their spectra."""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field

import numpy as np

EIG_SLACK = 1e-6


class ClosureError(ValueError):
    """Generator set is not closed under inverse or contains the identity."""


class RegularityError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class FiniteGroup:
    mul: np.ndarray  # mul[g, h] = index of g*h
    inv: np.ndarray
    identity: int
    labels: tuple = ()
    name: str = ""
    _lookup: dict = field(default_factory=dict, repr=False)

    @property
    def order(self) -> int:
        return int(self.mul.shape[0])

    def index(self, label) -> int:
        if not self._lookup:
            self._lookup.update({lab: i for i, lab in enumerate(self.labels)})
        return self._lookup[label]

    def check_axioms(self, rng: np.random.Generator | None = None, samples: int = 2000) -> None:
        n = self.order
        e = self.identity
        idx = np.arange(n)
        if not (np.array_equal(self.mul[e], idx) and np.array_equal(self.mul[:, e], idx)):
            raise ValueError("identity is not two-sided")
        if not np.all(self.mul[self.inv, idx] == e):
            raise ValueError("inverse table is wrong")
        if n ** 3 <= 250_000:
            g, h, k = np.meshgrid(idx, idx, idx, indexing="ij")
            g, h, k = g.ravel(), h.ravel(), k.ravel()
        else:
            rng = rng or np.random.default_rng(0)
            g, h, k = rng.integers(0, n, size=(3, samples))
        if not np.array_equal(self.mul[self.mul[g, h], k], self.mul[g, self.mul[h, k]]):
            raise ValueError("multiplication is not associative")


@dataclass(frozen=True)
class GeneratorSet:
    elements: tuple[int, ...]
    side: str = "left"

    def __len__(self) -> int:
        return len(self.elements)


def make_generators(group: FiniteGroup, elements, side: str = "left") -> GeneratorSet:
    """Validate and wrap a generator list (order is kept: it fixes the slot labels)."""
    if side not in ("left", "right"):
        raise ValueError(f"side must be 'left' or 'right', got {side!r}")
    elems = tuple(int(a) for a in elements)
    if len(set(elems)) != len(elems):
        raise ClosureError(f"duplicate generators in {elems}")
    if group.identity in elems:
        raise ClosureError("generator set contains the identity")
    missing = [a for a in elems if int(group.inv[a]) not in elems]
    if missing:
        raise ClosureError(f"generator set not closed under inverse: inverses of {missing} missing")
    return GeneratorSet(elems, side)


def table_group(mul, labels=None, name: str = "table") -> FiniteGroup:
    mul = np.asarray(mul, dtype=np.int64)
    n = mul.shape[0]
    if mul.shape != (n, n) or mul.min() < 0 or mul.max() >= n:
        raise ValueError("multiplication table must be a square table of element indices")
    idx = np.arange(n)
    ids = [e for e in range(n) if np.array_equal(mul[e], idx) and np.array_equal(mul[:, e], idx)]
    if len(ids) != 1:
        raise ValueError("table has no two-sided identity")
    e = ids[0]
    inv = np.full(n, -1, dtype=np.int64)
    for g in range(n):
        hits = np.flatnonzero(mul[g] == e)
        if hits.size != 1 or mul[hits[0], g] != e:
            raise ValueError(f"element {g} has no two-sided inverse")
        inv[g] = hits[0]
    group = FiniteGroup(mul, inv, e, tuple(labels) if labels is not None else tuple(range(n)), name)
    group.check_axioms()
    return group


def cyclic_group(n: int) -> FiniteGroup:
    idx = np.arange(n)
    mul = (idx[:, None] + idx[None, :]) % n
    return FiniteGroup(mul, (-idx) % n, 0, tuple(range(n)), f"Z{n}")


def build_cyclic(n: int, offsets, side: str = "left") -> tuple[FiniteGroup, GeneratorSet]:
    if n < 2:
        raise ValueError("cyclic group needs n >= 2")
    group = cyclic_group(n)
    return group, make_generators(group, [int(o) % n for o in offsets], side)


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    return all(n % p for p in range(2, math.isqrt(n) + 1))


def legendre(a: int, p: int) -> int:
    r = pow(a % p, (p - 1) // 2, p)
    return -1 if r == p - 1 else r


def _canon(m: np.ndarray, q: int, invtab: np.ndarray) -> np.ndarray:
    first = np.where(m[..., 0] != 0, m[..., 0], m[..., 1])
    return (m * invtab[first][..., None]) % q


@functools.lru_cache(maxsize=8)
def build_psl2(q: int) -> FiniteGroup:
    """PSL(2, q) as 2x2 matrices with nonzero square determinant modulo scalars.

    Each element is stored as the scalar multiple whose first nonzero entry
    (row-major) is 1; labels are those 4-tuples in lexicographic order.
    """
    if not is_prime(q) or q < 3:
        raise ValueError(f"q must be an odd prime, got {q}")
    invtab = np.zeros(q, dtype=np.int64)
    invtab[1:] = [pow(x, -1, q) for x in range(1, q)]
    squares = np.zeros(q, dtype=bool)
    squares[(np.arange(1, q) ** 2) % q] = True
    grid = np.stack(np.meshgrid(*[np.arange(q)] * 4, indexing="ij"), axis=-1).reshape(-1, 4)
    det = (grid[:, 0] * grid[:, 3] - grid[:, 1] * grid[:, 2]) % q
    first = np.where(grid[:, 0] != 0, grid[:, 0], grid[:, 1])
    keep = squares[det] & (first == 1)
    elems = grid[keep]
    n = elems.shape[0]
    assert n == q * (q * q - 1) // 2
    code = lambda m: ((m[..., 0] * q + m[..., 1]) * q + m[..., 2]) * q + m[..., 3]
    lookup = np.full(q**4, -1, dtype=np.int64)
    lookup[code(elems)] = np.arange(n)

    a, b, c, d = (elems[:, i] for i in range(4))
    mul = np.empty((n, n), dtype=np.int64)
    for i in range(n):
        a0, b0, c0, d0 = elems[i]
        prod = np.stack([a0 * a + b0 * c, a0 * b + b0 * d, c0 * a + d0 * c, c0 * b + d0 * d], axis=-1) % q
        mul[i] = lookup[code(_canon(prod, q, invtab))]
    inv = lookup[code(_canon(np.stack([d, -b % q, -c % q, a], axis=-1), q, invtab))]
    ident = int(lookup[code(np.array([1, 0, 0, 1]))])
    labels = tuple(tuple(int(x) for x in row) for row in elems)
    return FiniteGroup(mul, inv, ident, labels, f"PSL(2,{q})")


def psl2_element(q: int, matrix) -> int:
    """Index in ``build_psl2(q)`` of a 2x2 integer matrix with nonzero square determinant."""
    group = build_psl2(q)
    m = np.asarray(matrix, dtype=np.int64).reshape(4) % q
    det = int(m[0] * m[3] - m[1] * m[2]) % q
    if det == 0 or legendre(det, q) != 1:
        raise ValueError(f"determinant {det} is not a nonzero square mod {q}")
    invtab = np.zeros(q, dtype=np.int64)
    invtab[1:] = [pow(x, -1, q) for x in range(1, q)]
    return group.index(tuple(int(x) for x in _canon(m, q, invtab)))


def lps_quaternions(p: int) -> list[tuple[int, int, int, int]]:
    """Integer solutions of a^2+b^2+c^2+d^2 = p with a odd and positive."""
    r = math.isqrt(p)
    sols = []
    for a in range(1, r + 1, 2):
        for b in range(-r, r + 1):
            for c in range(-r, r + 1):
                rest = p - a * a - b * b - c * c
                if rest < 0:
                    continue
                d = math.isqrt(rest)
                if d * d != rest:
                    continue
                for dd in sorted({d, -d}):
                    sols.append((a, b, c, dd))
    return sols


def lps_generators(p: int, q: int, side: str = "left") -> GeneratorSet:
    """The p+1 generators of the LPS graph, as indices into ``build_psl2(q)``."""
    if p == q or not (is_prime(p) and is_prime(q)):
        raise ValueError("p and q must be distinct primes")
    if p % 4 != 1 or q % 4 != 1:
        raise ValueError("p and q must both be 1 mod 4")
    if legendre(q, p) != 1 or legendre(p, q) != 1:
        raise ValueError(f"({q}|{p}) must be 1 so that the generators lie in PSL(2,{q})")
    i = next(x for x in range(q) if (x * x + 1) % q == 0)
    group = build_psl2(q)
    elems = []
    for a, b, c, d in lps_quaternions(p):
        mat = [a + b * i, c + d * i, -c + d * i, a - b * i]
        elems.append(psl2_element(q, mat))
    if len(elems) != p + 1 or len(set(elems)) != p + 1:
        raise ValueError(f"expected {p + 1} distinct generators, got {len(set(elems))}")
    return make_generators(group, elems, side)


@dataclass(frozen=True, eq=False)
class Graph:
    """Undirected multigraph; every edge is stored as two opposite arcs."""

    n: int
    arcs: np.ndarray  # shape (2 * edges, 2)

    @functools.cached_property
    def adjacency(self) -> np.ndarray:
        adj = np.zeros((self.n, self.n), dtype=np.int64)
        np.add.at(adj, (self.arcs[:, 0], self.arcs[:, 1]), 1)
        return adj

    def degrees(self) -> np.ndarray:
        return self.adjacency.sum(axis=1)

    def components(self) -> list[list[int]]:
        adj = self.adjacency
        seen = np.zeros(self.n, dtype=bool)
        comps = []
        for s in range(self.n):
            if seen[s]:
                continue
            stack, comp = [s], []
            seen[s] = True
            while stack:
                u = stack.pop()
                comp.append(u)
                for w in np.flatnonzero(adj[u]):
                    if not seen[w]:
                        seen[w] = True
                        stack.append(int(w))
            comps.append(sorted(comp))
        return comps


@dataclass(frozen=True, eq=False)
class CayleyGraph(Graph):
    group: FiniteGroup | None = None
    gens: GeneratorSet | None = None


def cayley_graph(group: FiniteGroup, gens: GeneratorSet) -> CayleyGraph:
    """Arcs g -> a g (left) or g -> g b (right) for every g and generator.

    Closure under inverse makes the arc multiset symmetric, so each vertex
    has degree |gens| counting multiplicity.
    """
    g = np.repeat(np.arange(group.order), len(gens))
    s = np.tile(np.array(gens.elements, dtype=np.int64), group.order)
    head = group.mul[s, g] if gens.side == "left" else group.mul[g, s]
    return CayleyGraph(group.order, np.stack([g, head], axis=1), group, gens)


def double_cover(graph: Graph) -> Graph:
    """Bipartite double cover: vertex (v, side) is v + side*n; arc u->w gives edge (u,0)-(w,1)."""
    n = graph.n
    u, w = graph.arcs[:, 0], graph.arcs[:, 1] + n
    arcs = np.concatenate([np.stack([u, w], axis=1), np.stack([w, u], axis=1)])
    return Graph(2 * n, arcs)


@dataclass(frozen=True)
class SpectralReport:
    delta: int
    lam: float
    eigenvalues: tuple[float, ...]  # descending

    @property
    def lam_bound(self) -> float:
        """Certified upper bound used by every downstream inequality."""
        return self.lam + EIG_SLACK


def spectral_report(graph: Graph) -> SpectralReport:
    adj = graph.adjacency
    deg = adj.sum(axis=1)
    if graph.n == 0 or not np.all(deg == deg[0]):
        raise RegularityError("graph is not regular")
    if not np.array_equal(adj, adj.T):
        raise RegularityError("adjacency is not symmetric")
    eig = np.linalg.eigvalsh(adj.astype(np.float64))[::-1]
    lam = max(abs(eig[1]), abs(eig[-1])) if graph.n > 1 else 0.0
    return SpectralReport(int(deg[0]), float(lam), tuple(float(x) for x in eig))


@dataclass(frozen=True)
class MixingResult:
    passed: bool
    worst_slack: float
    violations: int
    trials: int


def mixing_check(graph: Graph, report: SpectralReport, trials: int, rng: np.random.Generator) -> MixingResult:
    """Sample subset pairs and test |E(S,T)| <= D|S||T|/n + lam*sqrt(|S||T|)."""
    adj = graph.adjacency.astype(np.float64)
    n = graph.n
    worst = math.inf
    bad = 0
    for _ in range(trials):
        ps, pt = rng.random(2)
        s = (rng.random(n) < ps).astype(np.float64)
        t = (rng.random(n) < pt).astype(np.float64)
        e_st = s @ adj @ t
        ns, nt = s.sum(), t.sum()
        slack = report.delta * ns * nt / n + report.lam_bound * math.sqrt(ns * nt) - e_st
        worst = min(worst, slack)
        bad += int(slack < 0)
    return MixingResult(bad == 0, float(worst), bad, trials)
