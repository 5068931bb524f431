"""Geometric constants of the realized prism and the derived radii."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np
from scipy.optimize import minimize

from .lorentz import mdot, normalize_timelike, point_distance
from .plane import DevelopedPolygon, develop_3kgon, face_polygon, interior_distance, mirror_distance
from .polyhedron import DomainError, RealizedPolyhedron, edge_length, face_distance, perpendicular_feet, prism_combinatorics, realize_polyhedron


class ConstantsError(RuntimeError):
    """Derived constants violate their defining inequalities."""


@dataclass
class GeometricConstants:
    """Constants of the prism and of the radius choices built on them.

    ``b``, ``c``, ``R``, ``girth_target`` and ``A_threshold`` stay ``None``
    until :func:`choose_b_R` fills them in.
    """

    C: float
    L: float
    mu: float
    D: float
    b: Optional[float] = None
    c: Optional[float] = None
    R: Optional[float] = None
    girth_target: Optional[int] = None
    A_threshold: Optional[float] = None
    b_fraction: Optional[float] = None
    R_margin: Optional[float] = None
    details: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return asdict(self)

    @classmethod
    def from_json(cls, data: dict) -> "GeometricConstants":
        return cls(**data)

    def invariant_failures(self) -> list[str]:
        """Names of violated invariants (empty when all hold strictly)."""
        bad = []
        for name in ("C", "L", "mu", "D"):
            if not getattr(self, name) > 0:
                bad.append(f"{name} > 0")
        if self.b is None:
            return bad
        s = math.sinh(self.b)
        if not 0 < self.b < self.mu:
            bad.append("0 < b < mu")
        if not self.R > 2 * math.pi / s:
            bad.append("R > 2 pi / sinh b")
        if not math.pi / s < self.c < self.R / 2:
            bad.append("pi / sinh b < c < R / 2")
        if not self.girth_target >= max(6, math.ceil((self.R + self.L) / self.C)):
            bad.append("girth_target >= max(6, ceil((R + L) / C))")
        if not self.A_threshold > 0:
            bad.append("A_threshold > 0")
        return bad


def sampled_face_distance(rp: RealizedPolyhedron, a, b, samples: int = 2000, seed: int = 0) -> float:
    """Distance between two compact faces by dense sampling plus local refinement.

    Points of a face are normalized convex combinations of its vertices.
    Accurate to about ``1e-6``.
    """
    rng = np.random.default_rng(seed)
    Va = np.array([v for key, v in rp.vertices.items() if a in key])
    Vb = np.array([v for key, v in rp.vertices.items() if b in key])

    def points(V, W):
        P = W @ V
        return P / np.sqrt(-mdot(P, P))[:, None]

    Wa = rng.dirichlet(np.ones(len(Va)), samples)
    Wb = rng.dirichlet(np.ones(len(Vb)), samples)
    Pa, Pb = points(Va, Wa), points(Vb, Wb)
    G = -(Pa[:, :-1] @ Pb[:, :-1].T - np.outer(Pa[:, -1], Pb[:, -1]))
    i, j = np.unravel_index(np.argmin(G), G.shape)

    def f(z):
        wa = np.exp(z[: len(Va)])
        wb = np.exp(z[len(Va) :])
        x = normalize_timelike(wa @ Va)
        y = normalize_timelike(wb @ Vb)
        return point_distance(x, y)

    z0 = np.concatenate([np.log(Wa[i] + 1e-12), np.log(Wb[j] + 1e-12)])
    res = minimize(f, z0, method="Nelder-Mead", options={"xatol": 1e-10, "fatol": 1e-12, "maxiter": 20000})
    return float(min(res.fun, f(z0)))


def boundary_gap(rp: RealizedPolyhedron, a, b) -> dict:
    """Distance within the polyhedron between faces ``a`` and ``b``.

    The plane-to-plane distance is used when both feet of the common
    perpendicular lie in the faces; otherwise the faces are sampled.
    """
    plane = face_distance(rp, a, b)
    _, _, in_a, in_b = perpendicular_feet(rp, a, b)
    if in_a and in_b:
        return {"distance": plane, "method": "common perpendicular", "plane_distance": plane}
    return {"distance": sampled_face_distance(rp, a, b), "method": "sampled", "plane_distance": plane}


def compute_constants(rp: RealizedPolyhedron, k: int, developed: Optional[DevelopedPolygon] = None, radius: int = 2) -> GeometricConstants:
    """``C``, ``L``, ``mu`` and ``D`` for a realized prism."""
    ap = rp.ap
    if developed is None:
        developed = develop_3kgon(face_polygon(rp, ap.boundary_face), k, ap.extra["unfold"])
    fb = ap.boundary_face
    disjoint = [f for f in ap.faces if f != fb and not ap.adjacent(f, fb)]
    if len(disjoint) != 2:
        raise DomainError(f"expected two faces disjoint from {fb}, found {len(disjoint)}")
    gaps = {f: boundary_gap(rp, fb, f) for f in disjoint}
    L = 2 * edge_length(rp, ap.bold_edge)
    inter = interior_distance(developed)
    mirrors = mirror_distance(developed, radius=radius)
    details = {
        "k": k,
        "mu_faces": {f: g for f, g in gaps.items()},
        "C_consecutive": inter["C_consecutive"],
        "D_search_radius": radius,
        "D_tiles": mirrors["tiles"],
        "D_pairs": mirrors["pairs"],
        "polygon": {key: developed.report[key] for key in ("corners", "area", "expected_area", "max_angle_defect", "mirror_length")},
        "realization": {"restart": rp.restart, "iterations": rp.iterations, "residual": rp.residual},
    }
    return GeometricConstants(
        C=inter["C"],
        L=L,
        mu=min(g["distance"] for g in gaps.values()),
        D=mirrors["D"],
        details=details,
    )


def choose_b_R(gc: GeometricConstants, b_fraction: float = 0.9, R_margin: float = 1.01) -> GeometricConstants:
    """Fill in ``b``, ``R``, ``c``, the girth target and the area threshold."""
    if not 0 < b_fraction < 1:
        raise ValueError("b_fraction must lie in (0, 1)")
    if not R_margin > 1:
        raise ValueError("R_margin must exceed 1")
    b = b_fraction * gc.mu
    s = math.sinh(b)
    R = R_margin * 2 * math.pi / s
    c = (math.pi / s + R / 2) / 2
    girth = max(6, math.ceil((R + gc.L) / gc.C))
    out = GeometricConstants(
        C=gc.C,
        L=gc.L,
        mu=gc.mu,
        D=gc.D,
        b=b,
        c=c,
        R=R,
        girth_target=girth,
        A_threshold=3 * R / gc.D + 3,
        b_fraction=b_fraction,
        R_margin=R_margin,
        details=dict(gc.details),
    )
    bad = out.invariant_failures()
    if bad:
        raise ConstantsError(f"derived constants violate: {', '.join(bad)}")
    return out


def sigma_margin(rp: RealizedPolyhedron, gc: GeometricConstants) -> tuple[float, bool]:
    """Distance from the sigma face to the boundary face and whether it exceeds ``b``."""
    ap = rp.ap
    d = face_distance(rp, ap.sigma_face, ap.boundary_face)
    return d, bool(gc.b is not None and d > gc.b)


def prism_constants(k: int = 18, seed: int = 0, b_fraction: float = 0.9, R_margin: float = 1.01, radius: int = 2, tol: float = 1e-12):
    """Realize the prism for ``k`` and return ``(realization, developed polygon, constants)``."""
    rp = realize_polyhedron(prism_combinatorics(k), seed=seed, tol=tol)
    dev = develop_3kgon(face_polygon(rp, rp.ap.boundary_face), k, rp.ap.extra["unfold"])
    gc = choose_b_R(compute_constants(rp, k, dev, radius=radius), b_fraction, R_margin)
    return rp, dev, gc
