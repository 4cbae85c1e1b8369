import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from startail.errors import DegenerateBox, DirectionOutsideCone
from startail.shapes import (
    Bluntness,
    Ellipsoid,
    GaugeShape,
    LpBall,
    MetaTShape,
    OffCenterBall,
    PolytopeShape,
    SkewLimitShape,
    triangle,
)

SHAPES = [
    LpBall(1.0),
    LpBall(1.5),
    LpBall(2.0),
    LpBall(4.0),
    LpBall(math.inf),
    LpBall(3.0, dim=3),
    Ellipsoid.correlation(0.1),
    Ellipsoid([[2.0, 0.3, 0.1], [0.3, 1.0, -0.2], [0.1, -0.2, 0.5]]),
    OffCenterBall([0.3, -0.2]),
    triangle(),
    SkewLimitShape(np.eye(2), [-1.0, 3.0]),
    SkewLimitShape([[1.0, 0.4], [0.4, 2.0]], [2.0, 0.5]),
    MetaTShape(1.0),
    MetaTShape(3.0),
]
IDS = [s.label for s in SHAPES]

finite = st.floats(-50, 50, allow_nan=False)


def _vectors(d):
    return st.lists(finite, min_size=d, max_size=d).map(np.array).filter(lambda v: np.linalg.norm(v) > 1e-6)


@pytest.mark.parametrize("shape", SHAPES, ids=IDS)
def test_homogeneity(shape):
    rng = np.random.default_rng(1)
    x = rng.standard_normal((1000, shape.dim)) * rng.exponential(3.0, (1000, 1))
    t = rng.exponential(5.0, 1000)
    g_tx = shape.gauge(t[:, None] * x)
    assert_allclose(g_tx, t * shape.gauge(x), rtol=1e-9)


@pytest.mark.parametrize("shape", SHAPES, ids=IDS)
def test_boundedness(shape):
    rng = np.random.default_rng(2)
    x = rng.standard_normal((1000, shape.dim))
    assert np.all(shape.gauge(x) >= np.abs(x).max(1) / shape.radius - 1e-12)


@pytest.mark.parametrize("shape", SHAPES, ids=IDS)
def test_boundary_consistency(shape):
    rng = np.random.default_rng(3)
    w = rng.standard_normal((1000, shape.dim))
    b = shape.boundary_points(w)
    ok = np.all(np.isfinite(b), axis=1)
    assert ok.mean() > 0.4
    assert_allclose(shape.gauge(b[ok]), 1.0, rtol=1e-9)


@pytest.mark.parametrize("shape", SHAPES, ids=IDS)
def test_continuity_along_rays(shape):
    rng = np.random.default_rng(4)
    w = rng.standard_normal((50, shape.dim))
    t = np.linspace(0.01, 3.0, 300)
    g = shape.gauge(t[None, :, None] * w[:, None, :])
    g = g[np.all(np.isfinite(g), axis=1)]
    assert np.all(np.abs(np.diff(g, axis=1)) < 0.1)


@pytest.mark.parametrize("shape", [s for s in SHAPES if s.convex], ids=[s.label for s in SHAPES if s.convex])
def test_convexity_probe(shape):
    rng = np.random.default_rng(5)
    x, y = rng.standard_normal((2, 2000, shape.dim))
    gx, gy = shape.gauge(x), shape.gauge(y)
    ok = np.isfinite(gx) & np.isfinite(gy)
    lhs = shape.gauge(0.5 * x[ok] + 0.5 * y[ok])
    assert np.all(lhs <= 0.5 * gx[ok] + 0.5 * gy[ok] + 1e-9)


def test_metat_is_not_convex():
    s = MetaTShape(1.0)
    x, y = np.array([1.0, 1.0]), np.array([1.0, -1.0])
    assert s.gauge(0.5 * x + 0.5 * y) > 0.5 * s.gauge(x) + 0.5 * s.gauge(y)


# -- gauge examples -----------------------------------------------------------------


def test_gauge_examples():
    assert LpBall(2.0).gauge([1.0, 0.0]) == 1.0
    assert_allclose(MetaTShape(1.0).gauge([1.0, 1.0]), 1.0)
    assert_allclose(Ellipsoid.correlation(0.1).gauge([1.0, 0.1]), 1.0, rtol=1e-14)
    x = np.random.default_rng(0).standard_normal((100, 2))
    assert_allclose(OffCenterBall([0.0, 0.0]).gauge(x), np.linalg.norm(x, axis=1), rtol=1e-14)


def test_gauge_zero_only_at_origin():
    for shape in SHAPES:
        assert shape.gauge(np.zeros(shape.dim)) == 0.0
        assert shape.gauge(np.full(shape.dim, 1e-300)) > 0.0 or shape.gauge(np.full(shape.dim, 1e-300)) == math.inf


def test_ellipsoid_sigma_unit_vectors():
    sigma = np.array([[2.0, 0.3], [0.3, 1.0]])
    e = Ellipsoid(sigma)
    chol = np.linalg.cholesky(sigma)
    u = np.array([[1.0, 0.0], [0.0, 1.0], [0.6, 0.8]])
    assert_allclose(e.gauge(u @ chol.T), 1.0, rtol=1e-14)


@pytest.mark.parametrize("p", [1.0, 1.5, 2.0, 4.0, math.inf])
def test_lp_unit_vectors(p):
    assert_allclose(LpBall(p, 3).gauge(np.eye(3)), 1.0)


@given(_vectors(2), _vectors(2))
def test_skew_limit_formula(u, v):
    s = SkewLimitShape([[1.0, 0.2], [0.2, 1.5]], [-1.0, 3.0])
    for x in (u, v):
        q = x @ np.linalg.inv(s.omega) @ x
        a = s.alpha @ x
        expected = math.sqrt(q + (a * a if a < 0 else 0.0))
        assert_allclose(s.gauge(x), expected, rtol=1e-12)


def test_skew_limit_continuous_across_hyperplane():
    s = SkewLimitShape(np.eye(2), [-1.0, 3.0])
    u = np.array([3.0, 1.0])  # alpha'u = 0
    n = np.array([-1.0, 3.0]) / math.sqrt(10)
    for h in (1e-6, 1e-9):
        assert abs(s.gauge(u + h * n) - s.gauge(u - h * n)) < 10 * h


@given(_vectors(2))
def test_off_center_formula(x):
    beta = np.array([0.4, -0.7])
    s = OffCenterBall(beta)
    bx = beta @ x
    assert_allclose(s.gauge(x), math.sqrt(x @ x + bx * bx) - bx, rtol=1e-9)


def test_off_center_is_a_ball():
    # boundary points lie on the ball with centre beta and radius sqrt(1 + |beta|^2)
    beta = np.array([0.4, -0.7])
    s = OffCenterBall(beta)
    b = s.boundary_points(np.random.default_rng(0).standard_normal((200, 2)))
    assert_allclose(np.linalg.norm(b - beta, axis=1), math.sqrt(1 + beta @ beta), rtol=1e-12)


def test_polytope_vertices_have_gauge_one():
    t = triangle()
    assert_allclose(t.gauge(np.array([(1, 1), (-1, 0), (0, -1)], dtype=float)), 1.0)
    assert_allclose(t.exact_volume(), 1.5)


def test_polytope_cone():
    # origin on the boundary: the cone is the half-plane x + y < 0
    t = PolytopeShape.from_vertices([(1, -1), (-1, 1), (-1, -1)])
    assert t.gauge([1.0, 1.0]) == math.inf
    assert t.gauge([-1.0, -1.0]) == 1.0
    with pytest.raises(DirectionOutsideCone):
        t.boundary_point([1.0, 1.0])


# -- boundary point -----------------------------------------------------------------


def test_boundary_point_examples():
    assert_allclose(LpBall(1.0).boundary_point([1.0, 1.0]), [0.5, 0.5])
    assert_allclose(MetaTShape(1.0).boundary_point([1.0, 0.0]), [math.sqrt(0.5), 0.0])
    assert_allclose(MetaTShape(3.0).boundary_point([1.0, 0.0]), [math.sqrt(3 / 4), 0.0])
    assert_allclose(Ellipsoid(np.eye(2)).boundary_point([3.0, 4.0]), [0.6, 0.8])


def test_boundary_point_zero_direction():
    with pytest.raises(DirectionOutsideCone):
        LpBall(2.0).boundary_point([0.0, 0.0])


# -- extrema ------------------------------------------------------------------------


@pytest.mark.parametrize("shape", [s for s in SHAPES if s.dim == 2], ids=[s.label for s in SHAPES if s.dim == 2])
def test_numeric_extrema_match_analytic(shape):
    a0, b0 = shape.coordinate_extrema(method="analytic")
    a1, b1 = shape.coordinate_extrema(1e-9, method="numeric")
    assert_allclose(a1, a0, atol=1e-9)
    assert_allclose(b1, b0, atol=1e-9)


def test_numeric_extrema_3d():
    e = SHAPES[7]
    a, b = e.coordinate_extrema(1e-9, method="numeric")
    assert_allclose(b, np.sqrt(np.diag(e.sigma)), atol=1e-7)
    assert_allclose(a, -np.sqrt(np.diag(e.sigma)), atol=1e-7)


def test_extrema_examples():
    for p in (1.0, 1.5, 2.0, 4.0, math.inf):
        a, b = LpBall(p).coordinate_extrema()
        assert_allclose(b, [1, 1])
        assert_allclose(a, [-1, -1])
    a, b = triangle().coordinate_extrema()
    assert_allclose(b, [1, 1])
    # Lagrange: sup x_i over x' S^-1 x <= 1 is sqrt(S_ii); compare with a brute-force scan
    sigma = np.array([[2.0, 0.7], [0.7, 1.0]])
    phi = np.linspace(0, 2 * np.pi, 200001)
    pts = np.column_stack([np.cos(phi), np.sin(phi)]) @ np.linalg.cholesky(sigma).T
    assert_allclose(Ellipsoid(sigma).coordinate_extrema()[1], pts.max(0), atol=1e-9)


def test_custom_gauge_shape_scans_box():
    s = GaugeShape(2, lambda x: np.abs(x[..., 0]) / 2 + np.abs(x[..., 1]))
    a, b = s.coordinate_extrema()
    assert_allclose(b, [2, 1], atol=1e-9)
    assert_allclose(s.bounding_box[1], [3, 1.5], atol=1e-8)


# -- projections --------------------------------------------------------------------


def test_projection_equals_gauge_in_2d():
    s = SHAPES[10]
    u = np.random.default_rng(0).standard_normal((20, 2))
    assert_allclose([s.projection_gauge(0, 1, v) for v in u], s.gauge(u))


def test_projection_ellipsoid_marginal():
    e = SHAPES[7]
    m = e.marginal(0, 1)
    u = np.random.default_rng(1).standard_normal((40, 2))
    assert_allclose([e.projection_gauge(0, 1, v) for v in u], m.gauge(u), rtol=1e-8)
    m02 = e.marginal(0, 2)
    assert_allclose([e.projection_gauge(0, 2, v) for v in u], m02.gauge(u), rtol=1e-8)


@pytest.mark.parametrize("p", [1.0, 2.0, 4.0, math.inf])
def test_projection_lp_ball(p):
    b = LpBall(p, 3)
    for i, j in ((0, 1), (1, 2), (0, 2)):
        assert_allclose(b.projection_gauge(i, j, [1.0, 0.0]), 1.0, atol=1e-9)


def test_projection_is_an_infimum():
    e = SHAPES[7]
    rng = np.random.default_rng(2)
    for _ in range(20):
        u = rng.standard_normal(2)
        g, x = e.projection_gauge(0, 1, u, full_output=True)
        assert_allclose(x[:2], u)
        assert_allclose(e.gauge(x), g, rtol=1e-9)
        probes = rng.standard_normal((200, 1)) * 3
        assert np.all(e.gauge(np.column_stack([np.tile(u, (200, 1)), probes])) >= g - 1e-12)


def test_projection_rejects_equal_axes():
    with pytest.raises(ValueError):
        LpBall(2.0, 3).projection_gauge(1, 1, [1.0, 0.0])


# -- bluntness ----------------------------------------------------------------------


@pytest.mark.parametrize(
    "shape, verdict, g",
    [
        (LpBall(1.0), Bluntness.BLUNT, 2.0),
        (LpBall(1.5), Bluntness.BLUNT, 2 ** (1 / 1.5)),
        (LpBall(2.0), Bluntness.BLUNT, math.sqrt(2)),
        (LpBall(4.0), Bluntness.BLUNT, 2**0.25),
        (LpBall(math.inf), Bluntness.NON_BLUNT, 1.0),
        (triangle(), Bluntness.NON_BLUNT, 1.0),
        (SkewLimitShape(np.eye(2), [-1.0, 3.0]), Bluntness.BLUNT, None),
        (Ellipsoid.correlation(0.1), Bluntness.BLUNT, math.sqrt(2 / 1.1)),
        (MetaTShape(1.0), Bluntness.NON_BLUNT, 1.0),
    ],
    ids=["l1", "l1.5", "l2", "l4", "linf", "triangle", "skew", "ellipse", "metat"],
)
def test_bluntness_table(shape, verdict, g):
    res = shape.is_blunt()
    assert res.verdict == verdict
    if g is not None:
        assert_allclose(res.g, g, rtol=1e-7)


def test_bluntness_marginal_band():
    # a rounded square whose witness sits just above 1: inside the band
    s = LpBall(400.0)
    res = s.is_blunt(tol=1e-2)
    assert 1.0 < res.g < 1.01
    assert res.verdict == Bluntness.MARGINAL


def test_bluntness_3d_projection():
    assert LpBall(2.0, 3).is_blunt(0, 2).verdict == Bluntness.BLUNT
    assert LpBall(math.inf, 3).is_blunt(1, 2).verdict == Bluntness.NON_BLUNT


@pytest.mark.parametrize("alpha", [(-1.0, 3.0), (2.0, 0.5), (0.0, -1.0), (5.0, 5.0)])
def test_skew_limit_always_blunt(alpha):
    assert SkewLimitShape([[1.0, 0.3], [0.3, 2.0]], alpha).is_blunt().verdict == Bluntness.BLUNT


# -- volume -------------------------------------------------------------------------


@pytest.mark.parametrize(
    "shape, exact",
    [(LpBall(2.0), math.pi), (LpBall(1.0), 2.0), (triangle(), 1.5), (MetaTShape(1.0), None), (SHAPES[11], None)],
    ids=["disk", "diamond", "triangle", "metat", "skew"],
)
def test_volume(shape, exact):
    est, se = shape.volume(10**6, seed=0)
    truth = exact if exact is not None else shape.exact_volume()
    assert abs(est - truth) <= 3 * se


def test_triangle_area_shoelace():
    v = np.array([(1, 1), (-1, 0), (0, -1)], dtype=float)
    x, y = v[:, 0], v[:, 1]
    assert_allclose(0.5 * abs(x @ np.roll(y, -1) - y @ np.roll(x, -1)), triangle().exact_volume())


def test_volume_deterministic_and_thread_invariant():
    s = MetaTShape(2.0)
    assert s.volume(200_000, seed=5, threads=1) == s.volume(200_000, seed=5, threads=4)


def test_volume_errors():
    with pytest.raises(ValueError):
        LpBall(2.0).volume(10)
    flat = GaugeShape(2, lambda x: np.abs(x[..., 0]) + np.abs(x[..., 1]), bounding_box=([-1, 0], [1, 0]))
    with pytest.raises(DegenerateBox):
        flat.volume(1000)
