"""Compact hyperbolic polyhedra from dihedral-angle data.

Faces are realized by unit spacelike outward normals ``e_i`` in Minkowski
space; adjacent faces satisfy ``<e_i, e_j> = -cos(pi / n_ij)`` and the
polyhedron is ``{x : <x, e_i> <= 0 for all i}``.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from importlib import resources
from typing import Optional

import numpy as np

from .lorentz import J4, mdot, normalize_timelike, point_distance


class AndreevViolation(ValueError):
    """Angle data fails a combinatorial necessary condition."""


class RealizationError(RuntimeError):
    """Newton iteration did not produce a valid polyhedron."""


class DomainError(ValueError):
    """Geometric query outside its domain (e.g. distance between adjacent faces)."""


@dataclass
class AngledPolyhedron:
    """Combinatorial polyhedron with dihedral angles ``pi / n``.

    Parameters
    ----------
    faces : list of str
    names : dict
        Human-readable face names.
    angles : dict
        ``frozenset({f1, f2}) -> n`` for every pair of adjacent faces.
    boundary_face, sigma_face : str
    bold_edge : tuple of str
    extra : dict
        Anything else carried by the data file (roles, unfolding schedule).
    """

    faces: list
    angles: dict
    boundary_face: str
    sigma_face: str
    bold_edge: tuple
    names: dict = field(default_factory=dict)
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        fs = set(self.faces)
        for pair, n in self.angles.items():
            if len(pair) != 2 or not pair <= fs:
                raise ValueError(f"bad adjacency {set(pair)}")
            if not (isinstance(n, int) and n >= 2):
                raise ValueError(f"angle label {n} must be an integer >= 2")
        for f in self.faces:
            if len(self.neighbors(f)) < 3:
                raise ValueError(f"face {f} has fewer than three neighbours")
        for f in (self.boundary_face, self.sigma_face, *self.bold_edge):
            if f not in fs:
                raise ValueError(f"designated face {f} is unknown")
        if frozenset(self.bold_edge) not in self.angles:
            raise ValueError("bold edge is not an edge")
        # trivalence: every edge lies on exactly two vertices
        for pair in self.angles:
            n = sum(1 for v in self.vertices if pair <= set(v))
            if n != 2:
                raise ValueError(f"edge {sorted(pair)} lies on {n} vertices, polyhedron is not trivalent")

    def adjacent(self, a, b) -> bool:
        return frozenset((a, b)) in self.angles

    def angle(self, a, b) -> float:
        return math.pi / self.angles[frozenset((a, b))]

    def neighbors(self, f) -> list:
        return [g for g in self.faces if g != f and self.adjacent(f, g)]

    @property
    def edges(self) -> list:
        order = {f: i for i, f in enumerate(self.faces)}
        return sorted((tuple(sorted(p, key=order.get)) for p in self.angles), key=lambda e: (order[e[0]], order[e[1]]))

    @property
    def vertices(self) -> list:
        """Mutually adjacent face triples (valid without prismatic 3-circuits)."""
        out = []
        for a, b, c in itertools.combinations(self.faces, 3):
            if self.adjacent(a, b) and self.adjacent(b, c) and self.adjacent(a, c):
                out.append((a, b, c))
        return out

    def face_cycle(self, f) -> list:
        """Neighbours of ``f`` in cyclic order (consecutive ones share a vertex)."""
        nb = self.neighbors(f)
        verts = [set(v) - {f} for v in self.vertices if f in v]
        cyc = [nb[0]]
        while len(cyc) < len(nb):
            cur = cyc[-1]
            nxt = [next(iter(p - {cur})) for p in verts if cur in p and next(iter(p - {cur})) not in cyc]
            if not nxt:
                raise ValueError(f"face {f} does not close up")
            cyc.append(sorted(nxt)[0])
        return cyc

    def to_json(self) -> dict:
        return {
            "faces": [{"id": f, "name": self.names.get(f, f)} for f in self.faces],
            "edges": [{"f1": a, "f2": b, "angle_sub": self.angles[frozenset((a, b))]} for a, b in self.edges],
            "boundary_face": self.boundary_face,
            "sigma_face": self.sigma_face,
            "bold_edge": list(self.bold_edge),
            **self.extra,
        }

    @classmethod
    def from_json(cls, data: dict, k: Optional[int] = None) -> "AngledPolyhedron":
        faces = [f["id"] for f in data["faces"]]
        names = {f["id"]: f.get("name", f["id"]) for f in data["faces"]}
        angles = {}
        for e in data["edges"]:
            n = e.get("angle_sub", 2)
            if n == "k":
                if k is None:
                    raise ValueError("angle label 'k' needs a value of k")
                n = k
            angles[frozenset((e["f1"], e["f2"]))] = int(n)
        extra = {key: data[key] for key in ("roles", "unfold", "description") if key in data}
        return cls(faces, angles, data["boundary_face"], data["sigma_face"], tuple(data["bold_edge"]), names, extra)


def load_prism_data() -> dict:
    return json.loads(resources.files("conecert").joinpath("data/prism.json").read_text())


def prism_combinatorics(k: int, data: Optional[dict] = None) -> AngledPolyhedron:
    """Pentagonal prism with the bundled angle labels, ``k`` substituted."""
    if k < 7:
        raise ValueError("k must be at least 7")
    return AngledPolyhedron.from_json(data or load_prism_data(), k=k)


def andreev_prechecks(ap: AngledPolyhedron) -> None:
    """Vertex sums above pi, prismatic 3- and 4-circuit sums below pi and 2 pi."""
    verts = {frozenset(v) for v in ap.vertices}
    for v in ap.vertices:
        s = sum(ap.angle(a, b) for a, b in itertools.combinations(v, 2))
        if s <= math.pi + 1e-12:
            raise AndreevViolation(f"vertex {v}: angle sum {s:.6f} <= pi")
    for tri in itertools.combinations(ap.faces, 3):
        if frozenset(tri) in verts:
            continue
        if all(ap.adjacent(a, b) for a, b in itertools.combinations(tri, 2)):
            s = sum(ap.angle(a, b) for a, b in itertools.combinations(tri, 2))
            if s >= math.pi - 1e-12:
                raise AndreevViolation(f"prismatic 3-circuit {tri}: angle sum {s:.6f} >= pi")
    for quad in itertools.permutations(ap.faces, 4):
        if quad[0] != min(quad) or quad[1] > quad[3]:
            continue
        cyc = list(zip(quad, quad[1:] + quad[:1]))
        if not all(ap.adjacent(a, b) for a, b in cyc):
            continue
        if ap.adjacent(quad[0], quad[2]) or ap.adjacent(quad[1], quad[3]):
            continue
        edges = [frozenset(e) for e in cyc]
        # prismatic: no two of the four edges share a vertex
        if any(sum(1 for e in edges if e <= v) > 1 for v in verts):
            continue
        s = sum(ap.angle(a, b) for a, b in cyc)
        if s >= 2 * math.pi - 1e-12:
            raise AndreevViolation(f"prismatic 4-circuit {quad}: angle sum {s:.6f} >= 2 pi")


@dataclass
class RealizedPolyhedron:
    ap: AngledPolyhedron
    normals: np.ndarray
    gram: np.ndarray
    vertices: dict
    residual: float
    restart: int
    iterations: int

    def index(self, f) -> int:
        return self.ap.faces.index(f)

    def normal(self, f) -> np.ndarray:
        return self.normals[self.index(f)]

    def vertex(self, a, b, c) -> np.ndarray:
        return self.vertices[frozenset((a, b, c))]

    def transformed(self, T: np.ndarray) -> "RealizedPolyhedron":
        """Image under a Lorentz transformation ``T`` (acting on columns)."""
        E = self.normals @ T.T
        V = {key: T @ v for key, v in self.vertices.items()}
        return RealizedPolyhedron(self.ap, E, E @ J4 @ E.T, V, self.residual, self.restart, self.iterations)


def _equations(ap: AngledPolyhedron, gauge: tuple):
    idx = {f: i for i, f in enumerate(ap.faces)}
    pairs = [(idx[a], idx[b], -math.cos(ap.angle(a, b))) for a, b in ap.edges]
    g0, g1, g2 = (idx[f] for f in gauge)
    n = len(ap.faces)

    def F(x):
        E = x.reshape(n, 4)
        G = E @ J4 @ E.T
        out = [G[i, i] - 1.0 for i in range(n)]
        out += [G[a, b] - c for a, b, c in pairs]
        out += [E[g0, 1], E[g0, 2], E[g0, 3], E[g1, 2], E[g1, 3], E[g2, 3]]
        return np.array(out)

    def jac(x):
        E = x.reshape(n, 4)
        JE = E @ J4
        rows = []
        for i in range(n):
            r = np.zeros((n, 4))
            r[i] = 2 * JE[i]
            rows.append(r.ravel())
        for a, b, _ in pairs:
            r = np.zeros((n, 4))
            r[a] = JE[b]
            r[b] = JE[a]
            rows.append(r.ravel())
        for f, c in ((g0, 1), (g0, 2), (g0, 3), (g1, 2), (g1, 3), (g2, 3)):
            r = np.zeros((n, 4))
            r[f, c] = 1.0
            rows.append(r.ravel())
        return np.array(rows)

    return F, jac


def newton(F, jac, x0, tol: float = 1e-14, max_iter: int = 100):
    """Damped Newton with backtracking on the squared residual.

    Returns ``(x, residual inf-norm, iterations)``.
    """
    x = np.array(x0, dtype=float)
    f = F(x)
    nf = f @ f
    for it in range(max_iter):
        if np.max(np.abs(f)) < tol:
            return x, float(np.max(np.abs(f))), it
        Jm = jac(x)
        try:
            dx = np.linalg.solve(Jm, -f)
        except np.linalg.LinAlgError:
            dx = np.linalg.lstsq(Jm, -f, rcond=None)[0]
        t = 1.0
        while t > 1e-8:
            xn = x + t * dx
            fn = F(xn)
            if fn @ fn < (1 - 1e-4 * t) * nf:
                break
            t *= 0.5
        else:
            break
        x, f, nf = xn, fn, fn @ fn
    return x, float(np.max(np.abs(f))), max_iter


def _prism_guess(ap: AngledPolyhedron) -> np.ndarray:
    """Euclidean-like prism in the Klein model: two caps and a lateral ring."""
    n = len(ap.faces)
    deg = {f: len(ap.neighbors(f)) for f in ap.faces}
    caps = [f for f in ap.faces if deg[f] == n - 2]
    caps = [f for f in caps if not any(ap.adjacent(f, g) for g in caps if g != f)]
    if len(caps) != 2:
        raise RealizationError("initial guess is only implemented for prisms")
    ring = ap.face_cycle(caps[0])
    E = np.zeros((n, 4))
    E[ap.faces.index(caps[0])] = [0, 0, 1, 0.2]
    E[ap.faces.index(caps[1])] = [0, 0, -1, 0.2]
    m = len(ring)
    for i, f in enumerate(ring):
        t = 2 * math.pi * (i + 0.5) / m
        E[ap.faces.index(f)] = [math.cos(t), math.sin(t), 0, 0.3]
    return E / np.sqrt(mdot(E, E))[:, None]


def _vertices(ap: AngledPolyhedron, E: np.ndarray) -> Optional[dict]:
    idx = {f: i for i, f in enumerate(ap.faces)}
    out = {}
    for v in ap.vertices:
        A = E[[idx[f] for f in v]] @ J4
        ns = np.linalg.svd(A)[2][-1]
        if mdot(ns, ns) >= -1e-12:
            return None
        out[frozenset(v)] = normalize_timelike(ns)
    return out


def realize_polyhedron(
    ap: AngledPolyhedron,
    seed: int = 0,
    restarts: int = 64,
    tol: float = 1e-12,
) -> RealizedPolyhedron:
    """Solve for unit outward normals with the prescribed Gram entries.

    Damped Newton on the square system (unit norms, adjacent-face cosines and
    six gauge equations pinning the three faces of the first vertex). Restart
    ``r`` perturbs the prism guess with ``default_rng(seed + r)``; the first
    restart whose solution is convex wins.
    """
    andreev_prechecks(ap)
    gauge = ap.vertices[0]
    F, jac = _equations(ap, gauge)
    base = _prism_guess(ap)
    best = math.inf
    for r in range(restarts):
        rng = np.random.default_rng(seed + r)
        scale = 0.0 if r == 0 else 0.05 * (1 + r / 8)
        x0 = (base + scale * rng.standard_normal(base.shape)).ravel()
        x, res, its = newton(F, jac, x0)
        best = min(best, res)
        if res > tol:
            continue
        E = x.reshape(base.shape)
        V = _vertices(ap, E)
        if V is None:
            continue
        S = np.array([[mdot(v, e) for e in E] for v in V.values()])
        if np.all(S <= 1e-10):
            pass
        elif np.all(S >= -1e-10):
            E = -E
        else:
            continue
        G = E @ J4 @ E.T
        rp = RealizedPolyhedron(ap, E, G, V, res, r, its)
        if not validate_realization(rp)["ok"]:
            continue
        return rp
    raise RealizationError(f"no convex realization after {restarts} restarts (best residual {best:.3e})")


def validate_realization(rp: RealizedPolyhedron) -> dict:
    """Recompute every realization invariant from the raw normals."""
    ap, E = rp.ap, rp.normals
    G = E @ J4 @ E.T
    n = len(ap.faces)
    unit = max(abs(G[i, i] - 1) for i in range(n))
    ang = max(abs(G[ap.faces.index(a), ap.faces.index(b)] + math.cos(ap.angle(a, b))) for a, b in ap.edges)
    nonadj = [G[i, j] for i, j in itertools.combinations(range(n), 2) if not ap.adjacent(ap.faces[i], ap.faces[j])]
    ev = np.sort(np.linalg.eigvalsh(G))
    pos = int(np.sum(ev > 1e-8))
    neg = int(np.sum(ev < -1e-8))
    small = float(np.max(np.abs(ev[1 : n - 3]))) if n > 4 else 0.0
    side = max(float(mdot(v, e)) for v in rp.vertices.values() for e in E)
    out = {
        "unit_residual": float(unit),
        "angle_residual": float(ang),
        "residual": float(max(unit, ang)),
        "max_nonadjacent_gram": float(max(nonadj)) if nonadj else -math.inf,
        "positive_eigenvalues": pos,
        "negative_eigenvalues": neg,
        "near_zero_eigenvalue_max": small,
        "max_vertex_side": side,
    }
    out["ok"] = bool(
        unit < 1e-10
        and ang < 1e-10
        and out["max_nonadjacent_gram"] < -1
        and pos == 3
        and neg == 1
        and small < 1e-8
        and side <= 1e-10
    )
    return out


def face_distance(rp: RealizedPolyhedron, a, b) -> float:
    """Distance between the planes of two ultraparallel faces."""
    if rp.ap.adjacent(a, b):
        raise DomainError(f"faces {a} and {b} are adjacent")
    g = -float(mdot(rp.normal(a), rp.normal(b)))
    if g < 1:
        raise DomainError(f"faces {a} and {b} are not ultraparallel")
    return float(np.arccosh(g))


def perpendicular_feet(rp: RealizedPolyhedron, a, b) -> tuple[np.ndarray, np.ndarray, bool, bool]:
    """Feet of the common perpendicular of two face planes and whether each lies in its face."""
    ea, eb = rp.normal(a), rp.normal(b)
    c = float(mdot(ea, eb))
    fa = normalize_timelike(eb - c * ea)
    fb = normalize_timelike(ea - c * eb)

    def inside(x, own):
        return all(mdot(x, rp.normal(f)) <= 1e-12 for f in rp.ap.faces if f != own)

    return fa, fb, inside(fa, a), inside(fb, b)


def edge_endpoints(rp: RealizedPolyhedron, edge) -> tuple[np.ndarray, np.ndarray]:
    a, b = edge
    ends = [v for key, v in rp.vertices.items() if {a, b} <= key]
    if len(ends) != 2:
        raise DomainError(f"{edge} is not an edge")
    return ends[0], ends[1]


def edge_length(rp: RealizedPolyhedron, edge) -> float:
    v, w = edge_endpoints(rp, edge)
    for x in (v, w):
        if mdot(x, x) > -1 + 1e-9 or mdot(x, x) < -1 - 1e-9:
            raise DomainError("edge endpoint is not a unit timelike vector")
    return point_distance(v, w)
