"""Square complex on four copies of a group with left and right generator actions.

Indexing (n = |G|, D = |A| = |B|, generators referred to by slot index):

* vertex ``cls*n + g`` for classes 00, 10, 01, 11 in that order;
* edge ``cls*n*D + g*D + s`` for classes *0, *1, 0*, 1* in that order, where
  (g, a) in *0 joins 00:g to 10:ag, (h, a) in *1 joins 01:h to 11:ah,
  (g, b) in 0* joins 00:g to 01:gb and (h, b) in 1* joins 10:h to 11:hb;
* face ``(g*D + a)*D + b`` with corners g, ag, gb, agb.

Every incidence is by label, so coincidences in small groups show up as
multi-edges or repeated faces rather than being merged.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .groups import FiniteGroup, GeneratorSet, make_generators

VERTEX_CLASSES = ("00", "10", "01", "11")
EDGE_CLASSES = ("*0", "*1", "0*", "1*")
# (tail vertex class, head vertex class) of each edge class
EDGE_ENDS = ((0, 1), (2, 3), (0, 2), (1, 3))


@dataclass(frozen=True, eq=False)
class Incidence:
    """Bipartite incidence where every item has two ends and every node has ``degree`` slots.

    ``ends[i, s]`` is the node met by end ``s`` of item ``i`` in slot
    ``slots[i, s]``; ``at[v, slot]`` and ``side[v, slot]`` invert that map.
    """

    name: str
    ends: np.ndarray
    slots: np.ndarray
    n_nodes: int
    degree: int

    @functools.cached_property
    def _inverse(self) -> tuple[np.ndarray, np.ndarray]:
        at = np.full((self.n_nodes, self.degree), -1, dtype=np.int64)
        side = np.full((self.n_nodes, self.degree), -1, dtype=np.int64)
        items = np.arange(self.ends.shape[0])
        for s in (0, 1):
            if np.any(at[self.ends[:, s], self.slots[:, s]] >= 0):
                raise ValueError(f"{self.name}: two item ends share a node slot")
            at[self.ends[:, s], self.slots[:, s]] = items
            side[self.ends[:, s], self.slots[:, s]] = s
        if np.any(at < 0):
            raise ValueError(f"{self.name}: identification is not onto every node slot")
        return at, side

    @property
    def at(self) -> np.ndarray:
        return self._inverse[0]

    @property
    def side(self) -> np.ndarray:
        return self._inverse[1]

    @property
    def n_items(self) -> int:
        return int(self.ends.shape[0])


@dataclass(frozen=True)
class NeighborhoodView:
    kind: str  # "vertex" or "edge"
    cls: str
    index: int
    edges: dict  # edge class -> tuple of edge ids (multiset)
    vertices: dict  # vertex class -> tuple of vertex ids (multiset)
    faces: tuple


class LeftRightComplex:
    def __init__(self, group: FiniteGroup, A: GeneratorSet, B: GeneratorSet):
        if len(A) != len(B):
            raise ValueError(f"|A| = {len(A)} and |B| = {len(B)} must be equal")
        # re-validate: callers may hand in raw GeneratorSet values
        self.A = make_generators(group, A.elements, "left")
        self.B = make_generators(group, B.elements, "right")
        self.group = group
        self.n = group.order
        self.delta = len(A)
        n, d = self.n, self.delta
        a_el = np.array(self.A.elements, dtype=np.int64)
        b_el = np.array(self.B.elements, dtype=np.int64)
        g = np.arange(n)
        self.left = group.mul[a_el[None, :], g[:, None]]  # left[g, a] = a g
        self.right = group.mul[g[:, None], b_el[None, :]]  # right[g, b] = g b

        gf, af, bf = (x.ravel() for x in np.meshgrid(g, np.arange(d), np.arange(d), indexing="ij"))
        ag = self.left[gf, af]
        gb = self.right[gf, bf]
        agb = self.right[ag, bf]
        if not np.array_equal(agb, self.left[gb, af]):
            raise AssertionError("left and right actions do not commute")
        nd = n * d
        self.face_edges = np.stack(
            [gf * d + af, nd + gb * d + af, 2 * nd + gf * d + bf, 3 * nd + ag * d + bf], axis=1
        )
        self.face_vertices = np.stack([gf, n + ag, 2 * n + gb, 3 * n + agb], axis=1)
        self.face_labels = np.stack([gf, af, bf], axis=1)

        ge = np.repeat(g, d)
        se = np.tile(np.arange(d), n)
        heads = [self.left[ge, se], self.left[ge, se], self.right[ge, se], self.right[ge, se]]
        self.edge_ends = np.concatenate(
            [np.stack([t * n + ge, h * n + hd], axis=1) for (t, h), hd in zip(EDGE_ENDS, heads)]
        )
        self.edge_labels = np.concatenate([np.stack([ge, se], axis=1)] * 4)

    # sizes
    @property
    def n_vertices(self) -> int:
        return 4 * self.n

    @property
    def n_edges(self) -> int:
        return 4 * self.n * self.delta

    @property
    def n_faces(self) -> int:
        return self.n * self.delta**2

    def vertex(self, cls: str, g: int) -> int:
        return VERTEX_CLASSES.index(cls) * self.n + g

    def edge(self, cls: str, g: int, slot: int) -> int:
        return (EDGE_CLASSES.index(cls) * self.n + g) * self.delta + slot

    def face(self, g: int, a: int, b: int) -> int:
        return (g * self.delta + a) * self.delta + b

    def vertex_class(self, v: int) -> int:
        return v // self.n

    def edge_class(self, e: int) -> int:
        return e // (self.n * self.delta)

    @functools.cached_property
    def faces_at_vertex(self) -> np.ndarray:
        """Row v lists the D^2 faces having v as a corner."""
        out = np.empty((self.n_vertices, self.delta**2), dtype=np.int64)
        for c in range(4):
            col = self.face_vertices[:, c]
            order = np.argsort(col, kind="stable")
            out[c * self.n : (c + 1) * self.n] = order.reshape(self.n, -1)
        return out

    @functools.cached_property
    def faces_at_edge(self) -> np.ndarray:
        out = np.empty((self.n_edges, self.delta), dtype=np.int64)
        nd = self.n * self.delta
        for c in range(4):
            order = np.argsort(self.face_edges[:, c], kind="stable")
            out[c * nd : (c + 1) * nd] = order.reshape(nd, -1)
        return out

    # Tanner incidences
    @functools.cached_property
    def ef_vertical(self) -> Incidence:
        b = self.face_labels[:, 2]
        return Incidence("EF-vertical", self.face_edges[:, :2].copy(), np.stack([b, b], axis=1), 2 * self.n * self.delta, self.delta)

    @functools.cached_property
    def ef_horizontal(self) -> Incidence:
        a = self.face_labels[:, 1]
        ends = self.face_edges[:, 2:] - 2 * self.n * self.delta
        return Incidence("EF-horizontal", ends, np.stack([a, a], axis=1), 2 * self.n * self.delta, self.delta)

    @functools.cached_property
    def ve_vertical(self) -> Incidence:
        m = 2 * self.n * self.delta
        s = self.edge_labels[:m, 1]
        return Incidence("VE-vertical", self.edge_ends[:m].copy(), np.stack([s, s], axis=1), self.n_vertices, self.delta)

    @functools.cached_property
    def ve_horizontal(self) -> Incidence:
        m = 2 * self.n * self.delta
        s = self.edge_labels[m:, 1]
        return Incidence("VE-horizontal", self.edge_ends[m:].copy(), np.stack([s, s], axis=1), self.n_vertices, self.delta)

    def subgraph(self, which: str) -> Incidence:
        table = {
            "EF-vertical": self.ef_vertical,
            "EF-horizontal": self.ef_horizontal,
            "VE-vertical": self.ve_vertical,
            "VE-horizontal": self.ve_horizontal,
        }
        if which not in table:
            raise ValueError(f"unknown subgraph {which!r}; expected one of {sorted(table)}")
        return table[which]

    def incident_edges(self, v: int) -> np.ndarray:
        """The 2D edges at vertex v: vertical slots first, then horizontal (ids are global)."""
        vert = self.ve_vertical.at[v]
        hor = self.ve_horizontal.at[v] + 2 * self.n * self.delta
        return np.concatenate([vert, hor])

    def neighborhood(self, kind: str, index: int) -> NeighborhoodView:
        if kind == "vertex":
            if not 0 <= index < self.n_vertices:
                raise IndexError(f"vertex {index} out of range")
            cls = self.vertex_class(index)
            faces = self.faces_at_vertex[index]
            edges = {}
            for c, name in enumerate(EDGE_CLASSES):
                if cls in EDGE_ENDS[c]:
                    inc = self.ve_vertical if c < 2 else self.ve_horizontal
                    offset = 0 if c < 2 else 2 * self.n * self.delta
                    edges[name] = tuple(int(e) + offset for e in inc.at[index])
                else:
                    edges[name] = tuple(int(e) for e in self.face_edges[faces, c])
            verts = {}
            for c, name in enumerate(VERTEX_CLASSES):
                if c == cls:
                    continue
                if bin(c ^ cls).count("1") == 1:
                    inc = self.incident_edges(index)
                    others = self.edge_ends[inc].ravel()
                    verts[name] = tuple(int(u) for u in others if self.vertex_class(u) == c)
                else:
                    verts[name] = tuple(int(u) for u in self.face_vertices[faces, c])
            return NeighborhoodView("vertex", VERTEX_CLASSES[cls], index, edges, verts, tuple(int(f) for f in faces))
        if kind == "edge":
            if not 0 <= index < self.n_edges:
                raise IndexError(f"edge {index} out of range")
            cls = self.edge_class(index)
            faces = self.faces_at_edge[index]
            edges = {
                name: tuple(int(e) for e in self.face_edges[faces, c])
                for c, name in enumerate(EDGE_CLASSES)
                if c != cls
            }
            verts = {VERTEX_CLASSES[self.vertex_class(u)]: (int(u),) for u in self.edge_ends[index]}
            return NeighborhoodView("edge", EDGE_CLASSES[cls], index, edges, verts, tuple(int(f) for f in faces))
        raise ValueError(f"kind must be 'vertex' or 'edge', got {kind!r}")

    def summary(self) -> dict:
        inv = self.group.inv
        a_set, b_set = set(self.A.elements), set(self.B.elements)
        corners = {tuple(row) for row in self.face_vertices.tolist()}
        return {
            "group": self.group.name,
            "order": self.n,
            "delta": self.delta,
            "vertices": self.n_vertices,
            "edges_per_class": self.n * self.delta,
            "faces": self.n_faces,
            "shared_generators": len(a_set & b_set),
            "involutions_A": sum(int(inv[a]) == a for a in a_set),
            "involutions_B": sum(int(inv[b]) == b for b in b_set),
            "repeated_face_corners": self.n_faces - len(corners),
        }

    # adjacency operators on edges
    def opposite_edge_matrix(self) -> sp.csr_matrix:
        fe = self.face_edges
        rows = np.concatenate([fe[:, 0], fe[:, 1], fe[:, 2], fe[:, 3]])
        cols = np.concatenate([fe[:, 1], fe[:, 0], fe[:, 3], fe[:, 2]])
        m = self.n_edges
        return sp.csr_matrix((np.ones(rows.size), (rows, cols)), shape=(m, m))

    def vertex_edge_incidence(self) -> sp.csr_matrix:
        """D with D[v, e] = number of times v is an end of e."""
        ends = self.edge_ends
        cols = np.concatenate([np.arange(self.n_edges)] * 2)
        return sp.csr_matrix((np.ones(cols.size), (ends.T.ravel(), cols)), shape=(self.n_vertices, self.n_edges))

    def vertex_adjacency(self) -> sp.csr_matrix:
        """One adjacency entry per edge label, in both directions."""
        u, v = self.edge_ends[:, 0], self.edge_ends[:, 1]
        nv = self.n_vertices
        return sp.csr_matrix((np.ones(2 * u.size), (np.concatenate([u, v]), np.concatenate([v, u]))), shape=(nv, nv))


def build_complex(group: FiniteGroup, A: GeneratorSet, B: GeneratorSet) -> LeftRightComplex:
    return LeftRightComplex(group, A, B)


@dataclass(frozen=True)
class QuadraticCheck:
    passed: bool
    samples: int
    violations: int
    worst_slack_m1: float
    worst_slack_m0: float
    first_violation: tuple | None = None


def m0_m1_check(cx: LeftRightComplex, lam: float, samples: int, rng: np.random.Generator) -> QuadraticCheck:
    """Test both edge-walk quadratic form bounds on random edge subsets.

    ``lam`` must bound the second eigenvalue of both Cayley graphs.  The
    empty set and the full edge set are always included.
    """
    m1 = cx.opposite_edge_matrix()
    inc = cx.vertex_edge_incidence()
    adj = cx.vertex_adjacency()
    d, n = cx.delta, cx.n
    worst1 = worst0 = math.inf
    bad = 0
    first = None
    sets = [np.zeros(cx.n_edges), np.ones(cx.n_edges)]
    for _ in range(max(samples - 2, 0)):
        sets.append((rng.random(cx.n_edges) < rng.random()).astype(np.float64))
    sets = sets[:samples]
    for i, s in enumerate(sets):
        size = s.sum()
        q1 = s @ (m1 @ s)
        deg = inc @ s
        q0 = deg @ (adj @ deg)
        slack1 = lam * size + d / (2 * n) * size**2 - q1
        slack0 = 8 * lam * d * size + 2 * d / n * size**2 - q0
        worst1 = min(worst1, slack1)
        worst0 = min(worst0, slack0)
        if slack1 < 0 or slack0 < 0:
            bad += 1
            if first is None:
                first = (i, float(slack1), float(slack0))
    return QuadraticCheck(bad == 0, len(sets), bad, float(worst1), float(worst0), first)
