import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conecert.hyperbolic.constants import (
    ConstantsError,
    GeometricConstants,
    choose_b_R,
    compute_constants,
    prism_constants,
    sigma_margin,
)
from conecert.hyperbolic.lorentz import (
    J3,
    J4,
    classify,
    mdot,
    normalize_spacelike,
    normalize_timelike,
    point_distance,
    random_lorentz,
    reflection,
)
from conecert.hyperbolic.plane import (
    DegenerateSegment,
    Polygon2D,
    develop_3kgon,
    face_polygon,
    point_segment_distance,
    segment_distance_h2,
    segments_intersect,
    triangle_area,
)
from conecert.hyperbolic.polyhedron import (
    AndreevViolation,
    AngledPolyhedron,
    DomainError,
    andreev_prechecks,
    edge_length,
    face_distance,
    load_prism_data,
    prism_combinatorics,
    realize_polyhedron,
    validate_realization,
)

from oracles import hyperbolic_distance_klein

coord = st.floats(-3, 3, allow_nan=False)


def h2_point(x, y):
    return normalize_timelike([x, y, math.sqrt(1 + x * x + y * y)])


def h3_point(x, y, z):
    return normalize_timelike([x, y, z, math.sqrt(1 + x * x + y * y + z * z)])


points2 = st.builds(h2_point, coord, coord)
points3 = st.builds(h3_point, coord, coord, coord)


def regular_polygon(n, r):
    t = 2 * math.pi * np.arange(n) / n
    return np.stack([math.sinh(r) * np.cos(t), math.sinh(r) * np.sin(t), np.full(n, math.cosh(r))], axis=1)


def sample_segment(a, b, n=400):
    return [normalize_timelike((1 - s) * a + s * b) for s in np.linspace(0, 1, n)]


@pytest.fixture(scope="module")
def prism18():
    return prism_constants(18)


# ------------------------------------------------------------ Minkowski primitives


def test_classify_and_normalize():
    assert classify([1, 0, 0, 0]) == "spacelike"
    assert classify([0, 0, 0, 1]) == "timelike"
    assert classify([1, 0, 0, 1]) == "lightlike"
    assert normalize_timelike([0, 0, -2.0])[-1] == 1.0
    assert mdot(normalize_spacelike([3.0, 0, 1.0]), normalize_spacelike([3.0, 0, 1.0])) == pytest.approx(1)
    with pytest.raises(ValueError):
        normalize_spacelike([0, 0, 1.0])
    with pytest.raises(ValueError):
        normalize_timelike([1.0, 0, 0])


@settings(max_examples=60, deadline=None)
@given(points3, points3, st.integers(0, 10**6))
def test_lorentz_maps_preserve_distance(x, y, seed):
    T = random_lorentz(np.random.default_rng(seed))
    np.testing.assert_allclose(T.T @ J4 @ T, J4, atol=1e-10)
    d = point_distance(x, y)
    assert point_distance(T @ x, T @ y) == pytest.approx(d, rel=1e-8, abs=1e-8)


@settings(max_examples=100, deadline=None)
@given(points3, points3)
def test_distance_matches_klein_model(x, y):
    assert point_distance(x, y) == pytest.approx(hyperbolic_distance_klein(x, y), rel=1e-7, abs=1e-6)


@settings(max_examples=60, deadline=None)
@given(points2, points2, points2)
def test_triangle_inequality(x, y, z):
    assert point_distance(x, z) <= point_distance(x, y) + point_distance(y, z) + 1e-9


def test_distance_along_axis():
    assert point_distance(h2_point(0, 0), h2_point(math.sinh(1.5), 0)) == pytest.approx(1.5)


@settings(max_examples=40, deadline=None)
@given(points2, points2)
def test_reflection_is_involutive_isometry(a, b):
    if point_distance(a, b) < 1e-3:
        return
    n = normalize_spacelike(np.cross(a, b) @ J3)
    R = reflection(n)
    np.testing.assert_allclose(R @ R, np.eye(3), atol=1e-8)
    np.testing.assert_allclose(R.T @ J3 @ R, J3, atol=1e-8)
    np.testing.assert_allclose(R @ a, a, atol=1e-8 * max(1, abs(a[-1])))


# ------------------------------------------------------------ polygons and segments


@pytest.mark.parametrize("n,r", [(3, 0.5), (5, 1.0), (8, 1.5), (54, 2.0)])
def test_gauss_bonnet_equals_triangulated_area(n, r):
    poly = Polygon2D(regular_polygon(n, r), list(range(n)))
    assert poly.gauss_bonnet_area() == pytest.approx(poly.triangulated_area(), rel=1e-9)
    assert np.allclose(poly.side_lengths(), poly.side_lengths()[0])


def test_right_angled_pentagon_area():
    # regular right-angled pentagon, circumradius found by bisection on the corner angle
    target = math.pi / 2
    lo, hi = 0.1, 5.0
    for _ in range(200):
        mid = (lo + hi) / 2
        ang = Polygon2D(regular_polygon(5, mid), list(range(5))).angles()[0]
        lo, hi = (mid, hi) if ang > target else (lo, mid)
    poly = Polygon2D(regular_polygon(5, lo), list(range(5)))
    assert poly.gauss_bonnet_area() == pytest.approx(math.pi / 2, abs=1e-9)


def test_triangle_area_degenerate_is_zero():
    a, b = h2_point(0, 0), h2_point(1, 0)
    assert triangle_area(a, b, a) == pytest.approx(0, abs=1e-12)


def test_degenerate_segment_rejected():
    a = h2_point(0.3, 0.1)
    with pytest.raises(DegenerateSegment):
        segment_distance_h2((a, a), (h2_point(0, 0), h2_point(1, 0)))


def test_crossing_segments_have_zero_distance():
    s1 = (h2_point(-1, 0), h2_point(1, 0))
    s2 = (h2_point(0, -1), h2_point(0, 1))
    assert segments_intersect(s1, s2)
    assert segment_distance_h2(s1, s2) == 0


def test_ultraparallel_segments_use_common_perpendicular():
    # two vertical geodesics through (+-t, 0): distance 2t along the x axis
    t = 0.7

    def perp(sign, s):
        # point at arc length s along the geodesic perpendicular to the x axis at x = sign * t
        return np.array([sign * math.sinh(t) * math.cosh(s), math.sinh(s), math.cosh(t) * math.cosh(s)])

    s1 = (perp(-1, -2.0), perp(-1, 1.5))
    s2 = (perp(1, -1.0), perp(1, 2.5))
    assert segment_distance_h2(s1, s2) == pytest.approx(2 * t, rel=1e-12)
    # shift the second segment so the perpendicular foot falls outside it
    s3 = (perp(1, 0.5), perp(1, 2.5))
    assert segment_distance_h2(s1, s3) == pytest.approx(point_segment_distance(s3[0], *s1), rel=1e-12)
    assert segment_distance_h2(s1, s3) > 2 * t


@settings(max_examples=60, deadline=None)
@given(points2, points2, points2, points2)
def test_segment_distance_against_sampling(a, b, c, d):
    if min(point_distance(a, b), point_distance(c, d)) < 1e-2:
        return
    s1, s2 = (a, b), (c, d)
    dist = segment_distance_h2(s1, s2)
    assert dist == pytest.approx(segment_distance_h2(s2, s1), abs=1e-9)
    assert dist <= min(point_distance(x, y) for x in s1 for y in s2) + 1e-9
    # sampled points of the second segment bound it from above
    approx = min(point_segment_distance(y, a, b) for y in sample_segment(c, d, 200))
    assert dist <= approx + 1e-9
    assert approx - dist <= 0.05 * max(1.0, point_distance(c, d))


# ------------------------------------------------------------ the prism


def test_prism_requires_large_k():
    with pytest.raises(ValueError):
        prism_combinatorics(6)


def test_prism_combinatorics():
    ap = prism_combinatorics(18)
    assert len(ap.faces) == 7
    assert len(ap.edges) == 15 and len(ap.vertices) == 10
    assert sorted(len(ap.neighbors(f)) for f in ap.faces) == [4] * 5 + [5, 5]
    assert AngledPolyhedron.from_json(ap.to_json()).angles == ap.angles


def test_andreev_precheck_rejects_flat_vertex():
    ap = prism_combinatorics(18)
    v = ap.vertices[0]
    angles = dict(ap.angles)
    for pair in [frozenset((v[0], v[1])), frozenset((v[1], v[2])), frozenset((v[0], v[2]))]:
        angles[pair] = 3
    bad = AngledPolyhedron(ap.faces, angles, ap.boundary_face, ap.sigma_face, ap.bold_edge)
    with pytest.raises(AndreevViolation):
        andreev_prechecks(bad)


def test_non_trivalent_data_rejected():
    data = load_prism_data()
    data = dict(data, edges=data["edges"][:-1])
    with pytest.raises(ValueError):
        AngledPolyhedron.from_json(data, k=18)


def test_realization_quality(prism18):
    rp, _, _ = prism18
    v = validate_realization(rp)
    assert v["ok"]
    assert v["residual"] < 1e-12
    assert (v["positive_eigenvalues"], v["negative_eigenvalues"]) == (3, 1)
    assert v["near_zero_eigenvalue_max"] < 1e-8
    assert v["max_nonadjacent_gram"] < -1


def test_realization_is_unique_up_to_isometry(prism18):
    rp, _, _ = prism18
    other = realize_polyhedron(prism_combinatorics(18), seed=7)
    np.testing.assert_allclose(other.gram, rp.gram, atol=1e-10)
    moved = rp.transformed(random_lorentz(np.random.default_rng(3)))
    np.testing.assert_allclose(moved.gram, rp.gram, atol=1e-9)
    assert edge_length(moved, rp.ap.bold_edge) == pytest.approx(edge_length(rp, rp.ap.bold_edge), rel=1e-9)


def test_face_distance_domain(prism18):
    rp, _, _ = prism18
    ap = rp.ap
    with pytest.raises(DomainError):
        face_distance(rp, *ap.bold_edge)
    a, b = next((a, b) for a in ap.faces for b in ap.faces if a < b and not ap.adjacent(a, b))
    assert face_distance(rp, a, b) > 0


def test_developed_polygon(prism18):
    rp, dev, gc = prism18
    rep = dev.report
    assert rep["corners"] == 54 == len(dev.polygon)
    assert rep["max_angle_defect"] < 1e-8
    assert rep["area"] == pytest.approx(25 * math.pi, abs=1e-8)
    assert rep["mirror_length"] == pytest.approx(gc.L / 2, rel=1e-9)
    assert dev.polygon.sides.count("interior") == 18
    again = develop_3kgon(face_polygon(rp, rp.ap.boundary_face), 18, rp.ap.extra["unfold"])
    np.testing.assert_allclose(again.polygon.vertices, dev.polygon.vertices)


@pytest.mark.parametrize("k", [7, 11, 24])
def test_developed_polygon_other_k(k):
    rp = realize_polyhedron(prism_combinatorics(k))
    dev = develop_3kgon(face_polygon(rp, rp.ap.boundary_face), k, rp.ap.extra["unfold"])
    assert len(dev.polygon) == 3 * k
    assert dev.report["area"] == pytest.approx((3 * k - 4) * math.pi / 2, abs=1e-8)


# ------------------------------------------------------------ constants


def test_frozen_constants(prism18):
    _, _, gc = prism18
    assert gc.C == pytest.approx(1.4133, rel=1e-3)
    assert gc.L == pytest.approx(2.3619, rel=1e-3)
    assert gc.mu == pytest.approx(0.069503, abs=1e-4)
    assert gc.D == pytest.approx(gc.L, rel=1e-9)
    assert gc.C == pytest.approx(1.4132908482504871, rel=1e-9)
    assert gc.mu == pytest.approx(0.06950251670740001, rel=1e-9)


def test_sigma_face_is_far_from_boundary(prism18):
    rp, _, gc = prism18
    d, ok = sigma_margin(rp, gc)
    assert ok and d == pytest.approx(0.462629, abs=1e-5)


def test_choose_b_R_defaults(prism18):
    _, _, gc = prism18
    assert gc.b == pytest.approx(0.06255, rel=1e-2)
    assert gc.R == pytest.approx(101.4, rel=1e-2)
    assert gc.girth_target == 74
    assert gc.invariant_failures() == []
    assert GeometricConstants.from_json(gc.to_json()) == gc


@settings(max_examples=50, deadline=None)
@given(st.floats(0.05, 0.95), st.floats(1.001, 3.0))
def test_choose_b_R_invariants(frac, margin):
    base = GeometricConstants(C=1.41, L=2.36, mu=0.0695, D=2.36)
    gc = choose_b_R(base, frac, margin)
    assert gc.invariant_failures() == []
    assert gc.girth_target >= math.ceil((gc.R + gc.L) / gc.C)


@pytest.mark.parametrize("frac,margin", [(0.0, 1.01), (1.0, 1.01), (0.9, 1.0)])
def test_choose_b_R_rejects(frac, margin):
    with pytest.raises(ValueError):
        choose_b_R(GeometricConstants(C=1, L=1, mu=0.1, D=1), frac, margin)


def test_invariant_failures_detect_tampering(prism18):
    _, _, gc = prism18
    bad = GeometricConstants.from_json(dict(gc.to_json(), girth_target=10))
    assert bad.invariant_failures() == ["girth_target >= max(6, ceil((R + L) / C))"]
    assert GeometricConstants(C=1, L=-1, mu=1, D=1).invariant_failures() == ["L > 0"]


def test_constants_error_class():
    assert issubclass(ConstantsError, RuntimeError)


def test_constants_independent_of_seed(prism18):
    _, _, gc = prism18
    rp = realize_polyhedron(prism_combinatorics(18), seed=11)
    other = compute_constants(rp, 18)
    for name in ("C", "L", "mu", "D"):
        assert getattr(other, name) == pytest.approx(getattr(gc, name), rel=1e-8)
