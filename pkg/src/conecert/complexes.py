"""Polygonal 2-complexes: turnovers, their truncations, voltage covers,
cone-offs, vertex links, isomorphism testing and the two-polygon boundary
surface.

Faces are closed cycles of edge sides ``(edge id, +1 | -1)``; ``+1`` walks
an edge from its first endpoint to its second.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Hashable, Iterable, Optional

import numpy as np

from ._util import gc_paused
from .graphs import CoveringMap, Edge, Multigraph, VoltageAssignment, check_covering, girth
from .groups import FiniteGroup, ProductGroup


class ComplexError(ValueError):
    """Malformed complex or inconsistent cell data."""


class HolonomyError(ComplexError):
    """A face boundary carries a nontrivial voltage product."""


class GraphTooLarge(ValueError):
    """Input exceeds the isomorphism tester's size guard."""


@dataclass
class Complex2:
    """Polygonal 2-complex.

    Parameters
    ----------
    vertices : list
        Vertex ids.
    edges : dict
        ``id -> (u, v)``.
    faces : list
        Each face is a tuple of ``(edge id, sign)`` forming a closed path.
    labels : dict
        Optional annotations. Keys used here: ``boundary`` (list of dicts with
        ``name``, ``vertices``, ``edges``), ``cone`` (dict cone vertex ->
        boundary name), ``edge_kind``, ``vertex_kind``, ``spine``, ``tree``.
    """

    vertices: list
    edges: dict
    faces: list
    labels: dict = field(default_factory=dict)
    validate: bool = True

    def __post_init__(self):
        self.faces = [tuple(f) for f in self.faces]
        if self.validate:
            self.check()

    def check(self):
        vs = set(self.vertices)
        if len(vs) != len(self.vertices):
            raise ComplexError("duplicate vertex ids")
        for eid, (u, v) in self.edges.items():
            if u not in vs or v not in vs:
                raise ComplexError(f"edge {eid!r} references a missing vertex")
        for i, f in enumerate(self.faces):
            if not f:
                raise ComplexError(f"face {i} is empty")
            for eid, s in f:
                if eid not in self.edges:
                    raise ComplexError(f"face {i} references missing edge {eid!r}")
                if s not in (1, -1):
                    raise ComplexError(f"face {i} has a side with sign {s!r}")
            for (e1, s1), (e2, s2) in zip(f, f[1:] + f[:1]):
                if self._head(e1, s1) != self._tail(e2, s2):
                    raise ComplexError(f"face {i} boundary is not a closed edge path")

    def _tail(self, eid, s):
        u, v = self.edges[eid]
        return u if s > 0 else v

    def _head(self, eid, s):
        u, v = self.edges[eid]
        return v if s > 0 else u

    def counts(self) -> tuple[int, int, int]:
        return len(self.vertices), len(self.edges), len(self.faces)

    def one_skeleton(self) -> Multigraph:
        return Multigraph(self.vertices, [Edge(e, u, v) for e, (u, v) in self.edges.items()])

    @cached_property
    def _corners(self):
        """Per vertex: edge-ends and face corners incident to it."""
        ends = defaultdict(list)
        for eid, (u, v) in self.edges.items():
            ends[u].append((eid, 0))
            ends[v].append((eid, 1))
        corners = defaultdict(list)
        for fi, f in enumerate(self.faces):
            n = len(f)
            for ci in range(n):
                e_in, s_in = f[ci]
                e_out, s_out = f[(ci + 1) % n]
                v = self._head(e_in, s_in)
                corners[v].append(((fi, ci), (e_in, 1 if s_in > 0 else 0), (e_out, 0 if s_out > 0 else 1)))
        return ends, corners

    def corner_count(self, v) -> int:
        return len(self._corners[1].get(v, []))

    def to_json(self) -> dict:
        cone = self.labels.get("cone", {})
        return {
            "vertices": [{"id": _js(v), "cone": v in cone} for v in self.vertices],
            "edges": [{"id": _js(e), "u": _js(u), "v": _js(v)} for e, (u, v) in self.edges.items()],
            "faces": [[[_js(e), s] for e, s in f] for f in self.faces],
            "labels": _js_labels(self.labels),
        }

    @classmethod
    def from_json(cls, data: dict) -> "Complex2":
        vs = [_hb(v["id"] if isinstance(v, dict) else v) for v in data["vertices"]]
        es = {_hb(e["id"]): (_hb(e["u"]), _hb(e["v"])) for e in data["edges"]}
        fs = [tuple((_hb(e), int(s)) for e, s in f) for f in data["faces"]]
        labels = {}
        cone = {_hb(v["id"]): True for v in data["vertices"] if isinstance(v, dict) and v.get("cone")}
        lab = data.get("labels", {})
        if "boundary" in lab:
            labels["boundary"] = [
                {"name": _hb(b["name"]), "vertices": [_hb(x) for x in b["vertices"]], "edges": [_hb(x) for x in b["edges"]]}
                for b in lab["boundary"]
            ]
        for key in ("edge_kind", "vertex_kind"):
            if key in lab:
                labels[key] = {_hb(k): v for k, v in lab[key]}
        if cone:
            labels["cone"] = {v: lab.get("cone_of", {}).get(str(v), None) for v in cone}
        return cls(vs, es, fs, labels)


def _js(x):
    if isinstance(x, tuple):
        return [_js(y) for y in x]
    return x


def _hb(x):
    if isinstance(x, list):
        return tuple(_hb(y) for y in x)
    return x


def _js_labels(labels: dict) -> dict:
    out = {}
    if "boundary" in labels:
        out["boundary"] = [
            {"name": _js(b["name"]), "vertices": [_js(x) for x in b["vertices"]], "edges": [_js(x) for x in b["edges"]]}
            for b in labels["boundary"]
        ]
    for key in ("edge_kind", "vertex_kind"):
        if key in labels:
            out[key] = [[_js(k), v] for k, v in labels[key].items()]
    if "cone" in labels:
        out["cone_of"] = {str(_js(k)): _js(v) for k, v in labels["cone"].items()}
    return out


def euler_characteristic(c: Complex2) -> int:
    v, e, f = c.counts()
    return v - e + f


# ---------------------------------------------------------------- turnovers


def turnover(k: int) -> Complex2:
    """``k`` triangles sharing one boundary triangle."""
    if k < 1:
        raise ValueError("turnover needs k >= 1")
    edges = {"ab": ("a", "b"), "bc": ("b", "c"), "ca": ("c", "a")}
    faces = [(("ab", 1), ("bc", 1), ("ca", 1)) for _ in range(k)]
    return Complex2(["a", "b", "c"], edges, faces)


CORNERS = ("a", "b", "c")


def truncated_turnover(k: int) -> Complex2:
    """Turnover with its three corners cut off: ``k`` hexagons.

    Each corner ``x`` leaves a boundary theta graph with vertices
    ``x_<prev>``, ``x_<next>`` and edges ``t_x_1 .. t_x_k``; edge ``t_x_j``
    lies in hexagon ``j``. Hexagon ``j`` reads
    ``a_b -> b_a -> b_c -> c_b -> c_a -> a_c -> a_b``.
    """
    if k < 2:
        raise ValueError("truncated turnover needs k >= 2")
    vs = ["a_b", "a_c", "b_a", "b_c", "c_a", "c_b"]
    edges = {"D_ab": ("a_b", "b_a"), "D_bc": ("b_c", "c_b"), "D_ca": ("c_a", "a_c")}
    # arcs oriented as traversed by the hexagons
    arc_ends = {"a": ("a_c", "a_b"), "b": ("b_a", "b_c"), "c": ("c_b", "c_a")}
    for x in CORNERS:
        for j in range(1, k + 1):
            edges[f"t_{x}_{j}"] = arc_ends[x]
    faces = []
    for j in range(1, k + 1):
        faces.append(
            (("D_ab", 1), (f"t_b_{j}", 1), ("D_bc", 1), (f"t_c_{j}", 1), ("D_ca", 1), (f"t_a_{j}", 1))
        )
    boundary = [
        {"name": x, "vertices": list(arc_ends[x]), "edges": [f"t_{x}_{j}" for j in range(1, k + 1)]}
        for x in CORNERS
    ]
    labels = {
        "boundary": boundary,
        "tree": ["D_ab", "D_bc", "D_ca", f"t_a_{k}", f"t_b_{k}"],
        # spine: one vertex per boundary theta, one per hexagon, each hexagon meets all three
        "spine": {"left": list(CORNERS), "right": list(range(1, k + 1))},
        "k": k,
    }
    return Complex2(vs, edges, faces, labels)


def spine_graph(t0: Complex2) -> Multigraph:
    """The complete bipartite spine recorded on a truncated turnover."""
    sp = t0.labels["spine"]
    left = [("corner", x) for x in sp["left"]]
    right = [("page", j) for j in sp["right"]]
    es = [Edge((a, b), a, b) for a in left for b in right]
    return Multigraph(left + right, es)


def boundary_theta(c: Complex2, name) -> Multigraph:
    """A labeled boundary subgraph as a multigraph on the complex's ids."""
    for b in c.labels.get("boundary", []):
        if b["name"] == name:
            return Multigraph(b["vertices"], [Edge(e, *c.edges[e]) for e in b["edges"]])
    raise KeyError(name)


# ---------------------------------------------------------------- complex voltages


@dataclass
class ComplexVoltage:
    """Group labels on the oriented edges of a 2-complex."""

    base: Complex2
    group: FiniteGroup
    voltage: dict

    def __post_init__(self):
        missing = [e for e in self.base.edges if e not in self.voltage]
        if missing:
            raise ComplexError(f"edges without voltage: {missing[:5]}")

    def side_voltage(self, eid, s):
        g = self.voltage[eid]
        return g if s > 0 else self.group.inv(g)

    def path_voltage(self, sides) -> Hashable:
        G = self.group
        out = G.identity
        for eid, s in sides:
            out = G.mul(out, self.side_voltage(eid, s))
        return out

    def face_holonomies(self) -> list:
        return [self.path_voltage(f) for f in self.base.faces]

    def check_faces(self):
        for i, h in enumerate(self.face_holonomies()):
            if h != self.group.identity:
                raise HolonomyError(f"face {i} has holonomy {h!r}")

    def generated_subgroup(self) -> list:
        return self.group.generated_subgroup(set(self.voltage.values()))


def theta_loop_images(va: VoltageAssignment) -> list:
    """``phi(x_j) = v(e_j) v(e_k)^{-1}`` for the basis loops ``x_j = e_j e_k^{-1}``."""
    G = va.group
    last = G.inv(va.voltage[va.base.edges[-1].id])
    return [G.mul(va.voltage[e.id], last) for e in va.base.edges[:-1]]


def phi_voltages(
    k: int,
    va: VoltageAssignment,
    tau: Optional[Callable] = None,
    t0: Optional[Complex2] = None,
) -> ComplexVoltage:
    """Voltages on the truncated turnover with values in ``Q x Q``.

    On the three boundary thetas the induced maps on loops are
    ``(phi, 1)``, ``(1, phi)`` and ``(phi o tau, phi o tau)``, where ``phi``
    comes from the theta-graph voltages ``va`` and ``tau`` inverts the basis
    loops (passed as a map on ``phi``-values, default group inversion).
    The spanning-tree edges carry the identity.

    Returns
    -------
    ComplexVoltage
        Its ``surjective`` attribute records whether the voltages generate
        the whole product group.
    """
    if len(va.base.edges) != k or len(va.base.vertices) != 2:
        raise ValueError("voltage data must live on the theta graph with k edges")
    Q = va.group
    tau = tau or Q.inv
    t0 = t0 or truncated_turnover(k)
    G = ProductGroup(Q, Q)
    e = Q.identity
    phis = theta_loop_images(va) + [e]
    volt = {eid: G.identity for eid in t0.edges}
    for j in range(1, k + 1):
        f = phis[j - 1]
        volt[f"t_a_{j}"] = (f, e)
        volt[f"t_b_{j}"] = (e, f)
        volt[f"t_c_{j}"] = (tau(f), tau(f))
    cv = ComplexVoltage(t0, G, volt)
    cv.check_faces()
    return cv


def boundary_loop_voltage(cv: ComplexVoltage, corner: str, j: int) -> Hashable:
    """Voltage along the loop ``t_x_j t_x_k^{-1}`` of boundary ``corner``."""
    k = cv.base.labels["k"]
    return cv.path_voltage([(f"t_{corner}_{j}", 1), (f"t_{corner}_{k}", -1)])


def is_surjective(cv: ComplexVoltage) -> bool:
    return len(cv.generated_subgroup()) == cv.group.order()


# ---------------------------------------------------------------- covers


@dataclass
class ComplexCover:
    cover: Complex2
    base: Complex2
    vertex_map: dict
    edge_map: dict
    face_map: dict
    sheets: list


@gc_paused
def cover_complex(cv: ComplexVoltage, sheets: Optional[list] = None) -> ComplexCover:
    """Regular cover: every cell of the base times every sheet.

    Sheets default to the subgroup generated by the voltages. Boundary
    labels lift to the connected components of their preimages.
    """
    cv.check_faces()
    base, G = cv.base, cv.group
    sheets = list(cv.generated_subgroup() if sheets is None else sheets)
    mul = G.mul

    vs = [(v, x) for v in base.vertices for x in sheets]
    # right multiplication by each distinct voltage, tabulated once
    right = {}
    for g in set(cv.voltage.values()):
        fwd = {x: mul(x, g) for x in sheets}
        right[g] = (fwd, {y: x for x, y in fwd.items()})
    edges = {}
    emap = {}
    for eid, (u, v) in base.edges.items():
        fwd = right[cv.voltage[eid]][0]
        for x in sheets:
            ce = (eid, x)
            edges[ce] = ((u, x), (v, fwd[x]))
            emap[ce] = eid
    faces = []
    fmap = {}
    for fi, f in enumerate(base.faces):
        sides = [(eid, s, *right[cv.voltage[eid]]) for eid, s in f]
        for x in sheets:
            y = x
            lifted = []
            for eid, s, fwd, back in sides:
                if s > 0:
                    lifted.append(((eid, y), 1))
                    y = fwd[y]
                else:
                    y = back[y]
                    lifted.append(((eid, y), -1))
            fmap[len(faces)] = fi
            faces.append(tuple(lifted))

    labels = {}
    for key in ("edge_kind", "vertex_kind"):
        if key in base.labels:
            src = base.labels[key]
            cells = edges if key == "edge_kind" else vs
            labels[key] = {c: src[c[0]] for c in cells if c[0] in src}
    if "boundary" in base.labels:
        lifted_b = []
        for b in base.labels["boundary"]:
            sub = Multigraph(
                [(v, x) for v in b["vertices"] for x in sheets],
                [Edge((e, x), *edges[(e, x)]) for e in b["edges"] for x in sheets],
            )
            comps = sub.connected_components()
            where = {}
            for n, comp in enumerate(comps):
                for i in comp:
                    where[sub.vertices[i]] = n
            cedges = [[] for _ in comps]
            for e in sub.edges:
                cedges[where[e.u]].append(e.id)
            for n, comp in enumerate(comps):
                cverts = [sub.vertices[i] for i in comp]
                lifted_b.append({"name": (b["name"], n), "base": b["name"], "vertices": cverts, "edges": cedges[n]})
        labels["boundary"] = lifted_b
    cover = Complex2(vs, edges, faces, labels, validate=False)
    return ComplexCover(cover, base, {v: v[0] for v in vs}, emap, fmap, sheets)


def check_complex_covering(cc: ComplexCover) -> bool:
    """1-skeleton is a graph covering and every lifted face maps side by side onto its base face."""
    c, b = cc.cover, cc.base
    cmap = CoveringMap(c.one_skeleton(), b.one_skeleton(), cc.vertex_map, cc.edge_map)
    if not check_covering(cmap):
        return False
    for fi, f in enumerate(c.faces):
        bf = b.faces[cc.face_map[fi]]
        if len(f) != len(bf):
            return False
        for (e, s), (be, bs) in zip(f, bf):
            if cc.edge_map[e] != be or s != bs:
                return False
    nb = defaultdict(int)
    for fi in cc.face_map.values():
        nb[fi] += 1
    return len(set(nb.values())) == 1 and len(nb) == len(b.faces)


# ---------------------------------------------------------------- cone-off and links


@gc_paused
def cone_off(c: Complex2) -> Complex2:
    """Cone every labeled boundary component to a new vertex.

    Each boundary edge ``u -> v`` becomes the base of a triangle
    ``cone -> u -> v -> cone``.
    """
    bounds = c.labels.get("boundary", [])
    used = set()
    for b in bounds:
        vb = set(b["vertices"])
        if vb & used:
            raise ComplexError(f"boundary component {b['name']!r} overlaps another")
        used |= vb
    vs = list(c.vertices)
    edges = dict(c.edges)
    faces = list(c.faces)
    cone = dict(c.labels.get("cone", {}))
    for b in bounds:
        cv = ("cone", b["name"])
        vs.append(cv)
        cone[cv] = b["name"]
        for v in b["vertices"]:
            edges[("cone", b["name"], v)] = (cv, v)
        for e in b["edges"]:
            u, v = c.edges[e]
            faces.append(((("cone", b["name"], u), 1), (e, 1), (("cone", b["name"], v), -1)))
    labels = {k: v for k, v in c.labels.items() if k != "boundary"}
    labels["cone"] = cone
    labels["coned_boundary"] = bounds
    labels["cone_faces"] = (len(c.faces), len(faces))
    return Complex2(vs, edges, faces, labels, validate=False)


@gc_paused
def vertex_links(c: Complex2, targets, faces: Optional[Iterable[int]] = None) -> dict:
    """Links of several vertices, skipping corners away from them.

    Agrees with :func:`vertex_link` but avoids tabulating every corner of
    a large complex. ``faces`` restricts the scan to the given face indices
    (it must contain every face with a corner at a target, e.g. the cone
    triangles recorded by :func:`cone_off`).
    """
    targets = set(targets)
    missing = targets - set(c.vertices)
    if missing:
        raise ComplexError(f"unknown vertices {sorted(map(repr, missing))[:3]}")
    ends = {v: [] for v in targets}
    near = set()
    for eid, (u, w) in c.edges.items():
        if u in targets:
            ends[u].append((eid, 0))
            near.add(eid)
        if w in targets:
            ends[w].append((eid, 1))
            near.add(eid)
    corners = {v: [] for v in targets}
    edges = c.edges
    all_faces = c.faces
    for fi in range(len(all_faces)) if faces is None else faces:
        f = all_faces[fi]
        n = len(f)
        for ci in range(n):
            e_in, s_in = f[ci]
            # a corner at a target has both sides incident to it
            if e_in not in near:
                continue
            v = edges[e_in][1] if s_in > 0 else edges[e_in][0]
            if v in targets:
                e_out, s_out = f[(ci + 1) % n]
                corners[v].append(((fi, ci), (e_in, 1 if s_in > 0 else 0), (e_out, 0 if s_out > 0 else 1)))
    return {v: Multigraph(ends[v], [Edge(cid, a, b) for cid, a, b in corners[v]]) for v in targets}


def vertex_link(c: Complex2, v) -> Multigraph:
    """Link graph: a vertex per edge-end at ``v``, an edge per face corner at ``v``."""
    ends, corners = c._corners
    if v not in ends and v not in set(c.vertices):
        raise ComplexError(f"unknown vertex {v!r}")
    lv = list(ends.get(v, []))
    le = [Edge(cid, a, b) for cid, a, b in corners.get(v, [])]
    return Multigraph(lv, le)


# ---------------------------------------------------------------- isomorphism


MAX_ISO_CELLS = 2000


def _multiplicities(g: Multigraph) -> list[dict]:
    m = [defaultdict(int) for _ in g.vertices]
    for e in g.edges:
        a, b = g.vertex_index[e.u], g.vertex_index[e.v]
        m[a][b] += 1
        if a != b:
            m[b][a] += 1
    return [dict(x) for x in m]


def invariants(g: Multigraph) -> dict:
    A = g.adjacency_matrix()
    spec = np.round(np.linalg.eigvalsh(A), 6) if len(g.vertices) else np.array([])
    return {
        "n": len(g.vertices),
        "m": len(g.edges),
        "degrees": tuple(sorted(g.degrees())),
        "girth": girth(g),
        "spectrum": spec,
    }


class _JointRefiner:
    """Colour refinement on the disjoint union of two graphs.

    Neighbour-colour multisets are summed with fixed random 64-bit weights
    (wrapping arithmetic, so the sum is order independent). A hash collision
    can only merge classes, which weakens pruning but never rejects a true
    isomorphism; the final map is verified exactly.
    """

    def __init__(self, a: Multigraph, b: Multigraph):
        n = len(a.vertices)
        self.n = n
        src, dst = [], []
        for off, g in ((0, a), (n, b)):
            for e in g.edges:
                x, y = g.vertex_index[e.u] + off, g.vertex_index[e.v] + off
                src += [x, y]
                dst += [y, x]
        self.src = np.array(src, dtype=np.int64)
        self.dst = np.array(dst, dtype=np.int64)
        rng = np.random.default_rng(0x5EED)
        self.weights = rng.integers(1, 2**62, size=2 * n + 4, dtype=np.uint64)

    def refine(self, col: np.ndarray) -> np.ndarray:
        ncls = len(np.unique(col))
        while True:
            h = np.zeros(2 * self.n, dtype=np.uint64)
            np.add.at(h, self.src, self.weights[col[self.dst]])
            _, new = np.unique(np.stack([col.astype(np.uint64), h], axis=1), axis=0, return_inverse=True)
            new = new.ravel()
            m = new.max() + 1
            if m == ncls:
                return new
            col, ncls = new, m

    def balanced(self, col: np.ndarray) -> bool:
        n = self.n
        m = col.max() + 1
        return np.array_equal(np.bincount(col[:n], minlength=m), np.bincount(col[n:], minlength=m))


def find_isomorphism(a: Multigraph, b: Multigraph) -> Optional[tuple[dict, dict]]:
    """Return ``(vertex map, edge map)`` from ``a`` to ``b`` or ``None``.

    Invariant prescreen (sizes, degree multiset, girth, adjacency spectrum),
    then individualisation-refinement: fix one vertex of ``a`` against each
    equally coloured vertex of ``b``, refine both, recurse until the colouring
    is discrete, and verify the induced map exactly.
    """
    for g in (a, b):
        if len(g.vertices) + len(g.edges) > MAX_ISO_CELLS:
            raise GraphTooLarge(f"graph with {len(g.vertices)} vertices and {len(g.edges)} edges exceeds the guard")
    ia, ib = invariants(a), invariants(b)
    for key in ("n", "m", "degrees", "girth"):
        if ia[key] != ib[key]:
            return None
    if not np.allclose(ia["spectrum"], ib["spectrum"], atol=1e-6):
        return None
    n = ia["n"]
    if n == 0:
        return {}, {}
    ma, mb = _multiplicities(a), _multiplicities(b)
    ref = _JointRefiner(a, b)

    def verify(col):
        where_b = {int(c): i for i, c in enumerate(col[n:])}
        fwd = [where_b[int(c)] for c in col[:n]]
        for i in range(n):
            row = mb[fwd[i]]
            if len(row) != len(ma[i]):
                return None
            for j, c in ma[i].items():
                if row.get(fwd[j], 0) != c:
                    return None
        return fwd

    def search(col):
        col = ref.refine(col)
        if not ref.balanced(col):
            return None
        counts = np.bincount(col[:n])
        if counts.max() == 1:
            return verify(col)
        sizes = np.where(counts > 1, counts, n + 1)
        target = int(np.argmin(sizes))
        x = int(np.flatnonzero(col[:n] == target)[0])
        fresh = col.max() + 1
        for y in np.flatnonzero(col[n:] == target):
            c2 = col.copy()
            c2[x] = fresh
            c2[n + y] = fresh
            out = search(c2)
            if out is not None:
                return out
        return None

    fwd = search(np.zeros(2 * n, dtype=np.int64))
    if fwd is None:
        return None
    vmap = {a.vertices[i]: b.vertices[fwd[i]] for i in range(n)}
    # match parallel edges in order
    bucket = defaultdict(list)
    for e in b.edges:
        bucket[frozenset((e.u, e.v))].append(e.id)
    emap = {}
    for e in a.edges:
        emap[e.id] = bucket[frozenset((vmap[e.u], vmap[e.v]))].pop()
    return vmap, emap


def graphs_isomorphic(a: Multigraph, b: Multigraph) -> bool:
    return find_isomorphism(a, b) is not None


def is_isomorphism(a: Multigraph, b: Multigraph, vmap: dict, emap: dict) -> bool:
    """Independent witness check: bijections preserving incidence."""
    if sorted(map(repr, vmap.values())) != sorted(map(repr, b.vertices)) or len(vmap) != len(a.vertices):
        return False
    if len(set(emap.values())) != len(b.edges) or len(emap) != len(a.edges):
        return False
    for e in a.edges:
        f = b.edge_by_id[emap[e.id]]
        if {vmap[e.u], vmap[e.v]} != {f.u, f.v}:
            return False
    return True


# ---------------------------------------------------------------- boundary surface


def boundary_surface(k: int) -> Complex2:
    """Two 3k-gons glued along ``k`` interior edges: a sphere with ``k`` holes.

    Interior edge ``I_j`` runs ``s_j -> t_j``. Between ``I_j`` and
    ``I_{j+1}`` the first polygon has mirror edges ``t_j -> g_j -> s_{j+1}``
    and the second ``s_{j+1} -> h_j -> t_j``; the four form boundary circle
    ``j``. ``g_j`` and ``h_j`` are right-angled corners, ``s_j`` and ``t_j``
    straight points.
    """
    if k < 3:
        raise ValueError("boundary surface needs k >= 3")
    vs, edges, kinds, vkind = [], {}, {}, {}
    for j in range(k):
        for name, kind in ((f"s{j}", "straight"), (f"t{j}", "straight"), (f"g{j}", "corner"), (f"h{j}", "corner")):
            vs.append(name)
            vkind[name] = kind
    for j in range(k):
        n = (j + 1) % k
        edges[f"I{j}"] = (f"s{j}", f"t{j}")
        edges[f"mx{j}a"] = (f"t{j}", f"g{j}")
        edges[f"mx{j}b"] = (f"g{j}", f"s{n}")
        edges[f"my{j}a"] = (f"s{n}", f"h{j}")
        edges[f"my{j}b"] = (f"h{j}", f"t{j}")
        kinds[f"I{j}"] = "interior"
        for e in (f"mx{j}a", f"mx{j}b", f"my{j}a", f"my{j}b"):
            kinds[e] = "mirror"
    x_face, y_face = [], []
    for j in range(k):
        x_face += [(f"I{j}", 1), (f"mx{j}a", 1), (f"mx{j}b", 1)]
    for j in reversed(range(k)):
        y_face += [(f"my{j}a", 1), (f"my{j}b", 1), (f"I{j}", -1)]
    mirrors = []
    for j in range(k):
        n = (j + 1) % k
        mirrors.append({"through": f"s{n}", "edges": [f"mx{j}b", f"my{j}a"]})
        mirrors.append({"through": f"t{j}", "edges": [f"my{j}b", f"mx{j}a"]})
    circles = [
        {"name": j, "vertices": [f"t{j}", f"g{j}", f"s{(j + 1) % k}", f"h{j}"], "edges": [f"mx{j}a", f"mx{j}b", f"my{j}a", f"my{j}b"]}
        for j in range(k)
    ]
    labels = {"edge_kind": kinds, "vertex_kind": vkind, "mirrors": mirrors, "circles": circles, "k": k}
    return Complex2(vs, edges, [tuple(x_face), tuple(y_face)], labels)


def surface_voltages(s: Complex2, va: VoltageAssignment) -> ComplexVoltage:
    """Voltages on ``boundary_surface(k)`` whose cover retracts onto the theta cover of ``va``.

    With ``g_j`` the voltage of ``e_{j+1}``: ``t_j -> g_j`` carries
    ``g_j^{-1}``, ``g_j -> s_{j+1}`` carries ``g_{j+1}`` and all other edges
    carry the identity, so the first polygon's holonomy telescopes away.
    """
    k = s.labels["k"]
    G = va.group
    gs = [va.voltage[e.id] for e in va.base.edges]
    if len(gs) != k:
        raise ValueError("theta graph size does not match the surface")
    volt = {e: G.identity for e in s.edges}
    for j in range(k):
        volt[f"mx{j}a"] = G.inv(gs[j])
        volt[f"mx{j}b"] = gs[(j + 1) % k]
    cv = ComplexVoltage(s, G, volt)
    cv.check_faces()
    return cv


def surface_dual_graph(s: Complex2) -> Multigraph:
    """A vertex per face and an edge per interior edge joining its two sides."""
    kinds = s.labels.get("edge_kind")
    if kinds is None:
        raise ComplexError("surface has no interior-edge labels")
    sides = defaultdict(list)
    for fi, f in enumerate(s.faces):
        for eid, sg in f:
            if kinds.get(eid) == "interior":
                sides[eid].append((fi, sg))
    es = []
    for eid in s.edges:
        if kinds.get(eid) != "interior":
            continue
        occ = sides[eid]
        if len(occ) != 2:
            raise ComplexError(f"interior edge {eid!r} is not shared by exactly two face sides")
        (f1, s1), (f2, _) = sorted(occ, key=lambda t: -t[1])
        es.append(Edge(eid, f1, f2))
    return Multigraph(list(range(len(s.faces))), es)
