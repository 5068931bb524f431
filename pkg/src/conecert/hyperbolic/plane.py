"""Hyperbolic plane geometry in the hyperboloid model of signature (2, 1).

Points are unit timelike vectors on the upper sheet; lines are unit
spacelike normals. Used for face polygons, the developed right-angled
``3k``-gon and segment distances.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import mpmath
import numpy as np

from .lorentz import J3, lorentz_cross, mdot, normalize_spacelike, normalize_timelike, point_distance, reflection
from .polyhedron import RealizedPolyhedron

TOL = 1e-12


class DevelopmentError(RuntimeError):
    """Unfolding did not close up into the expected polygon."""


class DegenerateSegment(ValueError):
    """A segment has coincident endpoints."""


def line_through(a, b) -> np.ndarray:
    """Unit normal of the geodesic through two distinct points."""
    n = lorentz_cross(a, b)
    if mdot(n, n) <= TOL:
        raise DegenerateSegment("points coincide")
    return normalize_spacelike(n)


def tangent_angle(v, a, b) -> float:
    """Angle at ``v`` between the geodesics towards ``a`` and ``b``."""
    ua = a + mdot(a, v) * v
    ub = b + mdot(b, v) * v
    c = mdot(ua, ub) / math.sqrt(mdot(ua, ua) * mdot(ub, ub))
    return math.acos(max(-1.0, min(1.0, c)))


def triangle_area(a, b, c) -> float:
    """Area from vertex coordinates alone: ``tan(A/2) = |det| / (1 + cosh ab + cosh bc + cosh ca)``."""
    det = abs(np.linalg.det(np.array([a, b, c])))
    return 2.0 * math.atan2(det, 1.0 - mdot(a, b) - mdot(b, c) - mdot(c, a))


@dataclass
class Polygon2D:
    """Convex hyperbolic polygon, vertices counterclockwise-or-not but cyclic.

    ``sides[i]`` labels the side from ``vertices[i]`` to ``vertices[i + 1]``.
    """

    vertices: np.ndarray
    sides: list
    meta: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.vertices)

    def angles(self) -> np.ndarray:
        V, n = self.vertices, len(self.vertices)
        return np.array([tangent_angle(V[i], V[i - 1], V[(i + 1) % n]) for i in range(n)])

    def side_lengths(self) -> np.ndarray:
        V, n = self.vertices, len(self.vertices)
        return np.array([point_distance(V[i], V[(i + 1) % n]) for i in range(n)])

    def gauss_bonnet_area(self) -> float:
        return (len(self) - 2) * math.pi - float(np.sum(self.angles()))

    def triangulated_area(self) -> float:
        V = self.vertices
        return sum(triangle_area(V[0], V[i], V[i + 1]) for i in range(1, len(V) - 1))

    def side_normal(self, i: int) -> np.ndarray:
        """Normal of side ``i``, pointing away from the polygon."""
        V, n = self.vertices, len(self.vertices)
        m = line_through(V[i], V[(i + 1) % n])
        c = V.mean(axis=0)
        return -m if mdot(c, m) > 0 else m

    def transformed(self, T: np.ndarray) -> "Polygon2D":
        return Polygon2D(self.vertices @ T.T, list(self.sides), dict(self.meta))


def face_frame(normal) -> np.ndarray:
    """Rows ``b1, b2, b3``: an orthonormal basis of ``normal``'s orthogonal complement, ``b3`` timelike."""
    from .lorentz import J4

    e = np.asarray(normal, dtype=float)
    if mdot(e, e) <= 0:
        raise ValueError("face normal is not spacelike")
    basis = []
    for cand in ([0, 0, 0, 1.0], [1.0, 0, 0, 0], [0, 1.0, 0, 0], [0, 0, 1.0, 0]):
        v = np.array(cand) - mdot(cand, e) * e
        for b in basis:
            v = v - mdot(v, b) / mdot(b, b) * b
        q = mdot(v, v)
        if abs(q) > 1e-6:
            basis.append(v / math.sqrt(abs(q)))
        if len(basis) == 3:
            break
    tl = [b for b in basis if mdot(b, b) < 0]
    sl = [b for b in basis if mdot(b, b) > 0]
    if len(tl) != 1 or len(sl) != 2:
        raise ValueError("could not build a frame for the face plane")
    b3 = tl[0] if tl[0][-1] > 0 else -tl[0]
    F = np.array([sl[0], sl[1], b3])
    assert np.allclose(F @ J4 @ F.T, J3, atol=1e-9)
    return F


def face_polygon(rp: RealizedPolyhedron, face) -> Polygon2D:
    """The face as a planar polygon, sides labelled by the neighbouring face."""
    F = face_frame(rp.normal(face))

    def coords(x):
        return np.array([mdot(x, F[0]), mdot(x, F[1]), -mdot(x, F[2])])

    cyc = rp.ap.face_cycle(face)
    if len(cyc) < 3:
        raise ValueError("face has fewer than three sides")
    n = len(cyc)
    # vertex i sits between sides cyc[i - 1] and cyc[i]
    V = np.array([coords(rp.vertex(face, cyc[i - 1], cyc[i])) for i in range(n)])
    V = np.array([normalize_timelike(v) for v in V])
    names = [tuple(sorted((cyc[i - 1], cyc[i]))) for i in range(n)]
    return Polygon2D(V, list(cyc), {"face": face, "corner_faces": names})


def reflection_across(poly: Polygon2D, side) -> np.ndarray:
    return reflection(poly.side_normal(poly.sides.index(side)))


@dataclass
class DevelopedPolygon:
    """Right-angled polygon assembled from reflected copies of a face.

    ``polygon.sides`` holds ``"interior"`` or ``"mirror"`` per side.
    """

    polygon: Polygon2D
    tiles: list
    copies: int
    closure_error: float
    report: dict

    def segments(self, kind: str) -> list:
        V, n = self.polygon.vertices, len(self.polygon)
        return [(V[i], V[(i + 1) % n]) for i in range(n) if self.polygon.sides[i] == kind]


def corner_of(poly: Polygon2D, idx: dict, s, t) -> np.ndarray:
    """Vertex where sides ``s`` and ``t`` meet."""
    n = len(poly)
    i, j = idx[s], idx[t]
    if (i + 1) % n == j:
        return poly.vertices[j]
    if (j + 1) % n == i:
        return poly.vertices[i]
    raise DevelopmentError(f"sides {s} and {t} are not consecutive")


def boost_to_origin(x) -> np.ndarray:
    """Lorentz transformation of signature (2, 1) sending ``x`` to ``(0, 0, 1)``."""
    x = np.asarray(x, dtype=float)
    t, v = x[2], x[:2]
    r = np.linalg.norm(v)
    if r < 1e-15:
        return np.eye(3)
    u = v / r
    # rotate u to the first axis, then boost along it
    R = np.array([[u[0], u[1], 0.0], [-u[1], u[0], 0.0], [0.0, 0.0, 1.0]])
    B = np.array([[t, 0.0, -r], [0.0, 1.0, 0.0], [-r, 0.0, t]])
    return B @ R


def develop_3kgon(fb: Polygon2D, k: int, unfold: dict) -> DevelopedPolygon:
    """Reflect ``fb`` around its ``pi / k`` corner into ``2k`` tiles and read off the outer polygon.

    ``unfold`` names the two sides through the centre corner, the side whose
    copies line up into interior edges and the side whose copies are mirror
    edges.
    """
    sa, sb = unfold["center_sides"]
    s_int, s_mir = unfold["interior_side"], unfold["mirror_side"]
    n = len(fb)
    idx = {s: i for i, s in enumerate(fb.sides)}
    if {sa, sb, s_int, s_mir} - set(idx) or n != 4:
        raise DevelopmentError("unfolding schedule does not match the face")
    # work in a frame centred at the pi/k corner so the rotations are exact
    center = corner_of(fb, idx, sa, sb)
    T = boost_to_origin(center)
    fb = fb.transformed(T)
    ra, rb = reflection_across(fb, sa), reflection_across(fb, sb)
    rot = np.linalg.matrix_power(ra @ rb, k)
    closure = float(np.max(np.abs(rot - np.eye(3))))
    if closure > 1e-8:
        raise DevelopmentError(f"reflections around the centre do not close up (defect {closure:.3e})")
    step = rb @ ra
    theta = math.atan2(step[1, 0], step[0, 0])

    def corner(s, t):
        return corner_of(fb, idx, s, t)

    p = corner(s_int, s_mir)
    q = corner(s_mir, sb)  # mirror corner, shared with the next tile across sb
    tiles = []
    for j in range(k):
        c, sn = math.cos(j * theta), math.sin(j * theta)
        g = np.array([[c, -sn, 0.0], [sn, c, 0.0], [0.0, 0.0, 1.0]])
        tiles += [g, g @ rb]
    verts, kinds = [], []
    for j in range(k):
        g0, g1 = tiles[2 * j], tiles[2 * j + 1]
        verts += [g0 @ p, g0 @ q, g1 @ p]
        kinds += ["mirror", "mirror", "interior"]
    V = np.array([normalize_timelike(v) for v in verts])
    poly = Polygon2D(V, kinds, {"k": k})
    ang = poly.angles()
    lengths = poly.side_lengths()
    mir = lengths[[i for i, s in enumerate(kinds) if s == "mirror"]]
    area = poly.gauss_bonnet_area()
    report = {
        "corners": 3 * k,
        "max_angle_defect": float(np.max(np.abs(ang - math.pi / 2))),
        "mirror_length_spread": float(np.max(mir) - np.min(mir)),
        "mirror_length": float(np.mean(mir)),
        "area": area,
        "expected_area": (3 * k - 4) * math.pi / 2,
        "tile_area_total": 2 * k * fb.gauss_bonnet_area(),
        "closure_error": closure,
    }
    if report["max_angle_defect"] > 1e-8:
        raise DevelopmentError(f"polygon is not right-angled (defect {report['max_angle_defect']:.3e})")
    if abs(area - report["expected_area"]) > 1e-8 or abs(area - report["tile_area_total"]) > 1e-8:
        raise DevelopmentError("developed area disagrees with the tile count")
    return DevelopedPolygon(poly, tiles, 2 * k, closure, report)


def _on_segment(x, a, b, tol=1e-11) -> bool:
    """Whether ``x`` (on the line through ``a, b``) lies between them."""
    coef = np.linalg.lstsq(np.array([a, b]).T, x, rcond=None)[0]
    return bool(coef[0] >= -tol and coef[1] >= -tol)


def point_segment_distance(x, a, b) -> float:
    n = line_through(a, b)
    s = float(mdot(x, n))
    foot = x - s * n
    if mdot(foot, foot) < 0:
        foot = normalize_timelike(foot)
        if _on_segment(foot, a, b):
            return float(np.arcsinh(abs(s)))
    return min(point_distance(x, a), point_distance(x, b))


def segments_intersect(s1, s2, tol: float = 1e-12) -> bool:
    (a1, b1), (a2, b2) = s1, s2
    n1, n2 = line_through(a1, b1), line_through(a2, b2)
    d1, e1 = mdot(a2, n1), mdot(b2, n1)
    d2, e2 = mdot(a1, n2), mdot(b1, n2)
    if abs(d1) < tol and abs(e1) < tol:
        # collinear: overlap iff an endpoint lies on the other segment
        return any(_on_segment(x, a1, b1) for x in (a2, b2)) or any(_on_segment(x, a2, b2) for x in (a1, b1))
    return d1 * e1 <= tol and d2 * e2 <= tol


def segment_distance_h2(s1, s2) -> float:
    """Exact distance between two geodesic segments."""
    (a1, b1), (a2, b2) = s1, s2
    n1, n2 = line_through(a1, b1), line_through(a2, b2)
    if segments_intersect(s1, s2):
        return 0.0
    c = float(mdot(n1, n2))
    if abs(c) > 1 + 1e-15:
        f1 = normalize_timelike(n2 - c * n1)
        f2 = normalize_timelike(n1 - c * n2)
        if _on_segment(f1, a1, b1) and _on_segment(f2, a2, b2):
            return float(np.arccosh(abs(c)))
    return min(
        point_segment_distance(a1, a2, b2),
        point_segment_distance(b1, a2, b2),
        point_segment_distance(a2, a1, b1),
        point_segment_distance(b2, a1, b1),
    )


def mirror_segments(dev: DevelopedPolygon) -> list:
    """Mirrors touching the polygon: each mirror edge extended through its corner on an interior edge."""
    poly = dev.polygon
    V, n = poly.vertices, len(poly)
    out = []
    for i in range(n):
        if poly.sides[i] != "mirror":
            continue
        a, b = V[i], V[(i + 1) % n]
        # one endpoint is the corner shared with an interior edge
        if poly.sides[i - 1] == "interior":
            far, j = b, i - 1
        else:
            far, j = a, (i + 1) % n
        r = reflection(poly.side_normal(j))
        out.append((far, r @ far))
    return out


def interior_reflections(dev: DevelopedPolygon) -> list:
    poly = dev.polygon
    return [reflection(poly.side_normal(i)) for i in range(len(poly)) if poly.sides[i] == "interior"]


def _mp_matrix(A):
    return mpmath.matrix([[mpmath.mpf(float(x)) for x in row] for row in np.atleast_2d(A)])


def _mp_reflection(normal):
    n = mpmath.matrix([mpmath.mpf(float(x)) for x in normal])
    q = n[0] ** 2 + n[1] ** 2 - n[2] ** 2
    n = n / mpmath.sqrt(q)
    return mpmath.eye(3) - 2 * n * (n.T * _mp_matrix(J3))


def mirror_distance(dev: DevelopedPolygon, radius: int = 2, same: float = 1e-6) -> dict:
    """Minimal distance between non-adjacent mirrors around the developed polygon.

    The neighbourhood is the orbit of the polygon under words of length at
    most ``radius`` in the reflections across its interior edges. Mirrors
    sharing an endpoint count as adjacent. Far tiles have huge hyperboloid
    coordinates, so the orbit is computed in extended precision and each
    candidate pair is recentred at the first mirror's midpoint before the
    float distance is taken.
    """
    home = mirror_segments(dev)
    poly = dev.polygon
    normals = [poly.side_normal(i) for i in range(len(poly)) if poly.sides[i] == "interior"]
    with mpmath.workdps(40):
        refl = [_mp_reflection(nv) for nv in normals]
        tiles = [mpmath.eye(3)]
        frontier = [((), mpmath.eye(3))]
        for _ in range(radius):
            nxt = []
            for word, g in frontier:
                for i, r in enumerate(refl):
                    if word and word[-1] == i:
                        continue
                    h = g * r
                    tiles.append(h)
                    nxt.append((word + (i,), h))
            frontier = nxt
        ends = [(_mp_matrix(a).T, _mp_matrix(b).T) for a, b in home]
        mirrors = [(g * a, g * b) for g in tiles for a, b in ends]
        mids = []
        for a, b in mirrors:
            m = a + b
            m = m / mpmath.sqrt(m[2] ** 2 - m[0] ** 2 - m[1] ** 2)
            mids.append([float(x) for x in m])
        mids = np.array(mids)
        L = max(point_distance(a, b) for a, b in home)
        best, pair, evaluated = math.inf, None, 0
        for m, (a, b) in enumerate(home):
            mid = normalize_timelike(a + b)
            # d(m1, m2) >= d(mid1, mid2) - L, and D <= L
            near = np.flatnonzero(np.arccosh(np.maximum(1.0, -mdot(mids, mid))) < 2 * L + 0.5)
            T = _mp_matrix(boost_to_origin(mid))
            s1 = (boost_to_origin(mid) @ a, boost_to_origin(mid) @ b)
            for c in near:
                ma, mb = mirrors[c]
                s2 = tuple(np.array([float(x) for x in T * v]) for v in (ma, mb))
                s2 = tuple(normalize_timelike(v) for v in s2)
                d_ends = [point_distance(x, y) for x in s1 for y in s2]
                if min(d_ends) < same:
                    continue  # the same mirror, or adjacent at a corner
                evaluated += 1
                d = segment_distance_h2(s1, s2)
                if d < best:
                    best, pair = d, (m, int(c))
    return {"D": best, "radius": radius, "tiles": len(tiles), "mirrors": len(mirrors), "pairs": evaluated, "pair": pair}


def interior_distance(dev: DevelopedPolygon) -> dict:
    """Minimal distance between interior edges of the polygon, overall and for consecutive pairs."""
    segs = dev.segments("interior")
    k = len(segs)
    best = min(segment_distance_h2(segs[i], segs[j]) for i in range(k) for j in range(i + 1, k))
    consecutive = min(segment_distance_h2(segs[i], segs[(i + 1) % k]) for i in range(k))
    return {"C": best, "C_consecutive": consecutive}
