"""Bounded star-shaped sets described by their gauge functions.

A set ``D`` containing the origin (or having it on its boundary) is encoded by
the 1-homogeneous gauge ``n_D`` with ``D = {n_D < 1}``. Points outside the cone
generated by ``D`` have gauge ``+inf``.

Besides the gauge itself every shape answers the geometric queries needed by
the tail-dependence criteria: boundary points along rays, the coordinatewise
supremum/infimum of ``D``, gauges of bivariate projections, bluntness of those
projections and hit-or-miss volume estimates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from functools import cached_property

import numpy as np
from scipy import optimize, special
from scipy.spatial import ConvexHull, HalfspaceIntersection
from scipy.stats import qmc

from .errors import DegenerateBox, DirectionOutsideCone, ToleranceNotReached
from .parallel import block_sizes, map_blocks, substream

GRID_POINTS = 257


class Bluntness(str, Enum):
    BLUNT = "Blunt"
    NON_BLUNT = "NonBlunt"
    MARGINAL = "Marginal"


@dataclass(frozen=True)
class BluntResult:
    verdict: Bluntness
    g: float
    sup_point: tuple[float, float]
    axes: tuple[int, int]

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict.value,
            "g": self.g,
            "sup_point": list(self.sup_point),
            "axes": list(self.axes),
        }


def unit_ball_volume(d: int) -> float:
    return math.pi ** (d / 2) / math.gamma(d / 2 + 1)


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


class StarShape:
    """Base class. Subclasses implement :meth:`_gauge` on ``(..., d)`` arrays."""

    convex = False

    def __init__(self, dim: int, label: str):
        if dim < 1:
            raise ValueError("dim must be positive")
        self.dim = int(dim)
        self.label = label

    def __repr__(self):
        return f"{type(self).__name__}({self.label!r})"

    # -- gauge -------------------------------------------------------------

    def _gauge(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def gauge(self, x):
        """Gauge of ``x``; accepts a single d-vector or an ``(..., d)`` array."""
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.dim:
            raise ValueError(f"expected trailing dimension {self.dim}, got {x.shape}")
        # evaluate on x / max|x_i| so quadratic forms neither underflow nor overflow
        m = np.max(np.abs(x), axis=-1, keepdims=True)
        safe = np.where((m > 0) & np.isfinite(m), m, 1.0)
        g = self._gauge(x / safe) * safe[..., 0]
        return float(g) if np.ndim(g) == 0 else g

    def contains(self, x) -> np.ndarray:
        return np.asarray(self.gauge(x)) < 1.0

    def boundary_point(self, direction) -> np.ndarray:
        """Intersection of the ray through ``direction`` with the boundary of D."""
        direction = np.asarray(direction, dtype=float)
        g = self.gauge(direction)
        if not np.isfinite(g) or g <= 0.0:
            raise DirectionOutsideCone(f"gauge({direction.tolist()}) = {g}")
        return direction / g

    def boundary_points(self, directions) -> np.ndarray:
        """Vectorised :meth:`boundary_point`; directions outside the cone give NaN."""
        directions = np.asarray(directions, dtype=float)
        g = np.asarray(self.gauge(directions))
        ok = np.isfinite(g) & (g > 0)
        out = np.full(directions.shape, np.nan)
        out[ok] = directions[ok] / g[ok, None]
        return out

    # -- extent ------------------------------------------------------------

    def _analytic_extrema(self):
        """``(a, b)`` with ``a = inf D`` and ``b = sup D`` if known in closed form."""
        return None

    @cached_property
    def bounding_box(self) -> tuple[np.ndarray, np.ndarray]:
        ext = self._analytic_extrema()
        if ext is not None:
            return _frozen(ext[0]), _frozen(ext[1])
        a, b = self._scan_extrema(1e-9)
        return _frozen(1.5 * a), _frozen(1.5 * b)

    @property
    def radius(self) -> float:
        a, b = self.bounding_box
        return float(max(np.max(np.abs(a)), np.max(np.abs(b))))

    def coordinate_extrema(self, tol: float = 1e-9, method: str = "auto"):
        """Coordinatewise infimum ``a`` and supremum ``b`` of D.

        ``method`` is ``"auto"`` (closed form when the shape has one),
        ``"analytic"`` or ``"numeric"`` (direction scan plus local polish).
        """
        if tol <= 0:
            raise ValueError("tol must be positive")
        if method not in ("auto", "analytic", "numeric"):
            raise ValueError(f"unknown method {method!r}")
        if method != "numeric":
            ext = self._analytic_extrema()
            if ext is not None:
                return np.array(ext[0], dtype=float), np.array(ext[1], dtype=float)
            if method == "analytic":
                raise NotImplementedError(f"{self!r} has no closed-form extrema")
        return self._scan_extrema(tol)

    def _ratio(self, v: np.ndarray, i: int, sign: float) -> np.ndarray:
        g = np.asarray(self._gauge(v))
        with np.errstate(divide="ignore", invalid="ignore"):
            r = sign * v[..., i] / g
        return np.where(np.isfinite(g) & (g > 0), r, 0.0)

    def _scan_extrema(self, tol: float):
        d = self.dim
        a = np.empty(d)
        b = np.empty(d)
        dirs = _direction_grid(d)
        for i in range(d):
            b[i] = self._polish_sup(i, +1.0, dirs, tol)
            a[i] = -self._polish_sup(i, -1.0, dirs, tol)
        return a, b

    def _polish_sup(self, i: int, sign: float, dirs: np.ndarray, tol: float) -> float:
        vals = self._ratio(dirs, i, sign)
        k = int(np.argmax(vals))
        if self.dim == 1:
            return float(vals[k])
        if self.dim == 2:
            step = 2 * np.pi / len(dirs)
            phi0 = math.atan2(dirs[k, 1], dirs[k, 0])

            def f(phi):
                return self._ratio(np.stack([np.cos(phi), np.sin(phi)], -1), i, sign)

            _, best = _zoom(f, phi0, step, maximize=True)
            best = max(best, float(vals[k]))
            fine = np.linspace(phi0 - step, phi0 + step, 4097)
            check = f(fine)
        else:
            def f(v):
                return -float(self._ratio(v, i, sign))

            res = optimize.minimize(
                f, dirs[k], method="Nelder-Mead",
                options={"xatol": 1e-12, "fatol": 1e-15, "maxiter": 40000,
                         "initial_simplex": _simplex(dirs[k], 0.05)},
            )
            res2 = optimize.minimize(
                f, res.x, method="Nelder-Mead",
                options={"xatol": 1e-12, "fatol": 1e-15, "maxiter": 40000,
                         "initial_simplex": _simplex(res.x, 1e-3 * np.linalg.norm(res.x))},
            )
            best = max(-res.fun, -res2.fun, float(vals[k]))
            check = np.array([-res2.fun])
        if float(np.max(check)) > best + tol:
            raise ToleranceNotReached(
                f"coordinate {i}: polish stalled at {best}, local scan found {np.max(check)}"
            )
        return best

    # -- projections and bluntness -----------------------------------------

    def _embed(self, i: int, j: int, u: np.ndarray, w: np.ndarray) -> np.ndarray:
        rest = [k for k in range(self.dim) if k not in (i, j)]
        shape = np.broadcast_shapes(u.shape[:-1], w.shape[:-1])
        x = np.empty(shape + (self.dim,))
        x[..., i] = u[..., 0]
        x[..., j] = u[..., 1]
        if rest:
            x[..., rest] = w
        return x

    def projection_gauge(self, i: int, j: int, u, tol: float = 1e-9, full_output: bool = False):
        """Gauge of the projection of D onto the ``(x_i, x_j)`` plane at ``u``.

        Computed as the infimum over the dropped coordinates ``w`` of
        ``gauge(embed(u, w))``. Accepts one 2-vector or an ``(m, 2)`` array.
        With ``full_output`` the minimising d-vector is returned as well.
        """
        if i == j or not (0 <= i < self.dim and 0 <= j < self.dim):
            raise ValueError(f"invalid axes ({i}, {j}) for dim {self.dim}")
        if tol <= 0:
            raise ValueError("tol must be positive")
        u = np.asarray(u, dtype=float)
        single = u.ndim == 1
        U = np.atleast_2d(u)
        if self.dim == 2:
            pts = self._embed(i, j, U, np.empty((len(U), 0)))
            vals = np.asarray(self._gauge(pts), dtype=float)
        else:
            vals = np.empty(len(U))
            pts = np.empty((len(U), self.dim))
            for m, um in enumerate(U):
                vals[m], pts[m] = self._project_one(i, j, um, tol)
        if single:
            vals, pts = float(vals[0]), pts[0]
        return (vals, pts) if full_output else vals

    def _project_one(self, i: int, j: int, u: np.ndarray, tol: float):
        rest = [k for k in range(self.dim) if k not in (i, j)]
        if not np.any(u):
            return 0.0, np.zeros(self.dim)
        a, b = self.bounding_box
        lo, hi = a[rest], b[rest]
        g0 = float(self._gauge(self._embed(i, j, u, np.zeros(len(rest)))))
        scale = g0
        if not np.isfinite(scale):
            # ray (u, 0) misses the cone: widen the search box until it is hit
            for k in range(60):
                scale = np.linalg.norm(u) * self.radius * 2.0 ** k
                w = _box_grid(scale * lo, scale * hi, 33)
                gw = np.asarray(self._gauge(self._embed(i, j, u[None], w)))
                if np.isfinite(gw).any():
                    break
            else:
                return math.inf, np.full(self.dim, np.nan)
        lo, hi = scale * lo, scale * hi
        nrest = len(rest)
        per_dim = GRID_POINTS if nrest == 1 else max(5, int(round(66000 ** (1 / nrest))))
        w = _box_grid(lo, hi, per_dim)
        gw = np.asarray(self._gauge(self._embed(i, j, u[None], w)))
        k = int(np.argmin(gw))
        if not np.isfinite(gw[k]):
            return math.inf, np.full(self.dim, np.nan)

        def f(wv):
            wv = np.atleast_1d(wv)
            return float(self._gauge(self._embed(i, j, u, wv)))

        if nrest == 1:
            step = (hi[0] - lo[0]) / (per_dim - 1)

            def fv(wv):
                return np.asarray(self._gauge(self._embed(i, j, u[None], wv[:, None])))

            x, best = _zoom(fv, w[k, 0], step, maximize=False)
            wbest = np.array([x])
            fine = np.linspace(w[k, 0] - step, w[k, 0] + step, 2049)
            check = float(np.min(fv(fine)))
        else:
            width = float(np.max(hi - lo)) / per_dim
            res = optimize.minimize(
                f, w[k], method="Nelder-Mead",
                options={"xatol": 1e-12, "fatol": 1e-15, "maxiter": 40000,
                         "initial_simplex": _simplex(w[k], width)},
            )
            wbest, best = res.x, float(res.fun)
            res2 = optimize.minimize(
                f, wbest, method="Nelder-Mead",
                options={"xatol": 1e-12, "fatol": 1e-15, "maxiter": 40000,
                         "initial_simplex": _simplex(wbest, 1e-3 * max(width, 1e-12))},
            )
            check = float(res2.fun)
        if best > float(gw[k]):
            best, wbest = float(gw[k]), w[k]
        if check < best - tol * max(1.0, best):
            raise ToleranceNotReached(
                f"projection polish stalled at {best}, local scan found {check}"
            )
        return best, self._embed(i, j, u, wbest)

    def is_blunt(self, i: int = 0, j: int = 1, tol: float = 1e-3) -> BluntResult:
        """Classify the projection ``D_ij`` as blunt, non-blunt or marginal.

        The witness is ``g = n_{D_ij}(b_i, b_j)`` where ``b = sup D``. The
        supremum lies outside the closure of the projection iff ``g > 1``.
        ``g > 1 + tol`` is Blunt, ``g <= 1 + tol/1000`` (the sup point sits on
        the closure to numerical accuracy) is NonBlunt, anything in between is
        reported as Marginal.
        """
        if tol <= 0:
            raise ValueError("tol must be positive")
        _, b = self.coordinate_extrema(tol=min(1e-9, tol * 1e-3))
        sup = np.array([b[i], b[j]])
        g = float(self.projection_gauge(i, j, sup, tol=min(1e-9, tol * 1e-3)))
        if g > 1.0 + tol:
            verdict = Bluntness.BLUNT
        elif g <= 1.0 + tol * 1e-3:
            verdict = Bluntness.NON_BLUNT
        else:
            verdict = Bluntness.MARGINAL
        return BluntResult(verdict, g, (float(sup[0]), float(sup[1])), (i, j))

    # -- volume ------------------------------------------------------------

    def exact_volume(self) -> float | None:
        return None

    def volume(self, n_mc: int = 10**6, seed: int = 0, threads: int | None = None):
        """Hit-or-miss Monte Carlo volume over the bounding box.

        Returns ``(estimate, stderr)`` with the binomial standard error.
        """
        if n_mc < 1000:
            raise ValueError("n_mc must be at least 1000")
        a, b = self.bounding_box
        width = b - a
        if np.any(width <= 0):
            raise DegenerateBox(f"bounding box of {self!r} has zero width")
        box = float(np.prod(width))
        sizes = block_sizes(n_mc)

        def hits(k):
            rng = substream(seed, k)
            x = a + width * rng.random((sizes[k], self.dim))
            return int(np.count_nonzero(np.asarray(self._gauge(x)) < 1.0))

        p = sum(map_blocks(hits, len(sizes), threads)) / n_mc
        return box * p, box * math.sqrt(p * (1 - p) / n_mc)


def _direction_grid(d: int) -> np.ndarray:
    if d == 1:
        return np.array([[1.0], [-1.0]])
    if d == 2:
        phi = np.linspace(0.0, 2 * np.pi, GRID_POINTS, endpoint=False)
        return np.stack([np.cos(phi), np.sin(phi)], -1)
    if d == 3:
        th = np.linspace(0.0, np.pi, GRID_POINTS)
        ph = np.linspace(0.0, 2 * np.pi, GRID_POINTS, endpoint=False)
        T, P = np.meshgrid(th, ph, indexing="ij")
        return np.stack(
            [np.sin(T) * np.cos(P), np.sin(T) * np.sin(P), np.cos(T)], -1
        ).reshape(-1, 3)
    z = special.ndtri(qmc.Sobol(d, scramble=True, seed=0).random(1 << 15))
    z = np.vstack([z, np.eye(d), -np.eye(d)])
    return z / np.linalg.norm(z, axis=1, keepdims=True)


def _zoom(f, x0: float, half_width: float, maximize: bool, points: int = 65):
    """Nested grid search for a 1-D extremum of a vectorised ``f`` near ``x0``.

    Each round evaluates ``points`` nodes on ``[x - h, x + h]`` and shrinks
    ``h`` around the best node; robust to kinks where derivative-based polish
    stalls. Returns ``(argext, ext)``.
    """
    sgn = 1.0 if maximize else -1.0
    x, h = float(x0), float(half_width)
    best = -np.inf
    while h > 1e-15 * max(1.0, abs(x)):
        t = np.linspace(x - h, x + h, points)
        v = sgn * np.asarray(f(t), dtype=float)
        v = np.where(np.isnan(v), -np.inf, v)
        k = int(np.argmax(v))
        if v[k] >= best:
            x, best = float(t[k]), float(v[k])
        h *= 4.0 / (points - 1)
    return x, sgn * best


def _box_grid(lo, hi, per_dim: int) -> np.ndarray:
    axes = [np.linspace(l, h, per_dim) for l, h in zip(lo, hi)]
    return np.stack(np.meshgrid(*axes, indexing="ij"), -1).reshape(-1, len(lo))


def _simplex(x0, size) -> np.ndarray:
    x0 = np.asarray(x0, dtype=float)
    return np.vstack([x0, x0 + size * np.eye(len(x0))])


# ---------------------------------------------------------------------------
# concrete shapes
# ---------------------------------------------------------------------------


class Ellipsoid(StarShape):
    """``{x : x' Sigma^{-1} x < 1}`` for a symmetric positive-definite Sigma."""

    convex = True

    def __init__(self, sigma, label: str | None = None):
        sigma = np.atleast_2d(np.asarray(sigma, dtype=float))
        if sigma.shape[0] != sigma.shape[1] or not np.allclose(sigma, sigma.T):
            raise ValueError("sigma must be a symmetric square matrix")
        try:
            np.linalg.cholesky(sigma)
        except np.linalg.LinAlgError:
            raise ValueError("sigma must be positive definite") from None
        super().__init__(len(sigma), label or f"ellipsoid{sigma.tolist()}")
        self.sigma = _frozen(sigma)
        self.precision = _frozen(np.linalg.inv(sigma))

    @classmethod
    def correlation(cls, rho: float) -> "Ellipsoid":
        if not -1 < rho < 1:
            raise ValueError("rho must lie in (-1, 1)")
        return cls([[1.0, rho], [rho, 1.0]], label=f"ellipse(rho={rho})")

    def _gauge(self, x):
        q = np.einsum("...i,ij,...j->...", x, self.precision, x)
        return np.sqrt(np.maximum(q, 0.0))

    def _analytic_extrema(self):
        b = np.sqrt(np.diag(self.sigma))
        return -b, b

    def exact_volume(self):
        return unit_ball_volume(self.dim) * math.sqrt(np.linalg.det(self.sigma))

    def marginal(self, i: int, j: int) -> "Ellipsoid":
        """Projection onto coordinates ``(i, j)``: the sub-covariance ellipse."""
        idx = [i, j]
        return Ellipsoid(self.sigma[np.ix_(idx, idx)])


class LpBall(StarShape):
    """Unit ball of the l_p norm, ``p`` in ``[1, inf]``."""

    convex = True

    def __init__(self, p: float, dim: int = 2):
        p = float(p)
        if not p >= 1.0:
            raise ValueError("p must be >= 1")
        super().__init__(dim, f"l{p:g}-ball(d={dim})")
        self.p = p

    def _gauge(self, x):
        ax = np.abs(x)
        if math.isinf(self.p):
            return ax.max(-1)
        if self.p == 1.0:
            return ax.sum(-1)
        m = ax.max(-1)
        safe = np.where(m > 0, m, 1.0)
        return m * np.sum((ax / safe[..., None]) ** self.p, -1) ** (1 / self.p)

    def _analytic_extrema(self):
        return -np.ones(self.dim), np.ones(self.dim)

    def exact_volume(self):
        if math.isinf(self.p):
            return 2.0 ** self.dim
        p, d = self.p, self.dim
        return math.exp(d * math.log(2 * math.gamma(1 + 1 / p)) - math.lgamma(1 + d / p))


class OffCenterBall(StarShape):
    """Euclidean ball with centre ``beta`` and radius ``sqrt(1 + |beta|^2)``.

    Its gauge is ``sqrt(|x|^2 + (beta'x)^2) - beta'x``; ``beta = 0`` is the unit
    ball.
    """

    convex = True

    def __init__(self, beta):
        beta = np.atleast_1d(np.asarray(beta, dtype=float))
        super().__init__(len(beta), f"offcenter-ball(beta={beta.tolist()})")
        self.beta = _frozen(beta)
        self.ball_radius = math.sqrt(1.0 + float(beta @ beta))

    def _gauge(self, x):
        sq = np.sum(x * x, -1)
        bx = x @ self.beta
        root = np.sqrt(sq + bx * bx)
        with np.errstate(divide="ignore", invalid="ignore"):
            stable = np.where(bx > 0, sq / (root + bx), root - bx)
        return np.where(sq > 0, stable, 0.0)

    def _analytic_extrema(self):
        return self.beta - self.ball_radius, self.beta + self.ball_radius

    def exact_volume(self):
        return unit_ball_volume(self.dim) * self.ball_radius ** self.dim


class PolytopeShape(StarShape):
    """Convex polytope ``{x : a_k'x < 1} ∩ {c_m'x < 0}``.

    The optional ``cone_facets`` ``c_m`` are facets through the origin; with
    them the origin lies on the boundary and the gauge is ``+inf`` outside the
    cone ``{c_m'x < 0}``.
    """

    convex = True

    def __init__(self, facets, cone_facets=(), label: str | None = None, vertices=None):
        facets = np.atleast_2d(np.asarray(facets, dtype=float))
        dim = facets.shape[1]
        cone = np.asarray(cone_facets, dtype=float).reshape(-1, dim)
        super().__init__(dim, label or f"polytope({len(facets)}+{len(cone)} facets)")
        self.facets = _frozen(facets)
        self.cone_facets = _frozen(cone)
        if vertices is None:
            vertices = self._vertices_from_facets()
        self.vertices = _frozen(vertices)

    @classmethod
    def from_vertices(cls, vertices, label: str | None = None) -> "PolytopeShape":
        """Planar convex polygon from its vertices (any orientation)."""
        v = np.asarray(vertices, dtype=float)
        if v.ndim != 2 or v.shape[1] != 2 or len(v) < 3:
            raise ValueError("expected at least three planar vertices")
        area2 = np.sum(v[:, 0] * np.roll(v[:, 1], -1) - np.roll(v[:, 0], -1) * v[:, 1])
        if area2 < 0:
            v = v[::-1]
        facets, cone = [], []
        for k in range(len(v)):
            p, q = v[k], v[(k + 1) % len(v)]
            normal = np.array([q[1] - p[1], p[0] - q[0]])
            h = float(normal @ p)
            if h > 1e-14 * np.linalg.norm(normal):
                facets.append(normal / h)
            elif h >= -1e-14 * np.linalg.norm(normal):
                cone.append(normal)
            else:
                raise ValueError("origin lies outside the polygon")
        label = label or f"polygon{v.tolist()}"
        return cls(facets, cone, label=label, vertices=v)

    def _vertices_from_facets(self):
        d = self.dim
        hs = [np.append(a, -1.0) for a in self.facets]
        hs += [np.append(c, 0.0) for c in self.cone_facets]
        hs = np.array(hs)
        # Chebyshev centre as a strictly interior point
        norms = np.linalg.norm(hs[:, :-1], axis=1)
        res = optimize.linprog(
            np.r_[np.zeros(d), -1.0],
            A_ub=np.c_[hs[:, :-1], norms], b_ub=-hs[:, -1],
            bounds=[(None, None)] * d + [(0, None)],
        )
        if not res.success or res.x[-1] <= 0:
            raise ValueError("polytope has empty interior or is unbounded")
        return HalfspaceIntersection(hs, res.x[:-1]).intersections

    def _gauge(self, x):
        g = np.maximum((x @ self.facets.T).max(-1), 0.0)
        if len(self.cone_facets):
            nonzero = np.any(x != 0, axis=-1)
            outside = np.any(x @ self.cone_facets.T >= 0, axis=-1) & nonzero
            g = np.where(outside, np.inf, g)
        return g

    def _analytic_extrema(self):
        return self.vertices.min(0), self.vertices.max(0)

    def exact_volume(self):
        if self.dim == 1:
            return float(np.ptp(self.vertices))
        return float(ConvexHull(self.vertices).volume)


class SkewLimitShape(StarShape):
    """Limit shape of skew-normal level sets.

    ``gauge(u)^2 = u' Omega^{-1} u + min(alpha'u, 0)^2``: the covariance
    ellipsoid on the half-space ``alpha'u >= 0`` glued to a flattened ellipsoid
    on the other side.
    """

    convex = True

    def __init__(self, omega, alpha):
        omega = np.atleast_2d(np.asarray(omega, dtype=float))
        alpha = np.asarray(alpha, dtype=float)
        if not np.any(alpha):
            raise ValueError("alpha must be non-zero")
        if alpha.shape != (len(omega),):
            raise ValueError("alpha and omega dimensions differ")
        super().__init__(len(omega), f"skew-limit(alpha={alpha.tolist()})")
        self.omega = _frozen(omega)
        self.alpha = _frozen(alpha)
        self.precision = _frozen(np.linalg.inv(omega))

    def _gauge(self, x):
        q = np.einsum("...i,ij,...j->...", x, self.precision, x)
        neg = np.minimum(x @ self.alpha, 0.0)
        return np.sqrt(np.maximum(q + neg * neg, 0.0))

    def _half_max(self, M, e, side: float) -> float:
        """max e'u over {u'Mu <= 1, side * alpha'u >= 0}."""
        Minv = np.linalg.inv(M)
        u = Minv @ e / math.sqrt(e @ Minv @ e)
        if side * (self.alpha @ u) >= 0:
            return float(e @ u)
        Ma = Minv @ self.alpha
        C = Minv - np.outer(Ma, Ma) / (self.alpha @ Ma)
        return math.sqrt(max(float(e @ C @ e), 0.0))

    def _analytic_extrema(self):
        flat = self.precision + np.outer(self.alpha, self.alpha)
        a, b = np.empty(self.dim), np.empty(self.dim)
        for i in range(self.dim):
            e = np.eye(self.dim)[i]
            b[i] = max(self._half_max(self.precision, e, 1), self._half_max(flat, e, -1))
            a[i] = -max(self._half_max(self.precision, -e, 1), self._half_max(flat, -e, -1))
        return a, b

    def exact_volume(self):
        flat = self.precision + np.outer(self.alpha, self.alpha)
        return 0.5 * unit_ball_volume(self.dim) * (
            math.sqrt(np.linalg.det(self.omega)) + 1.0 / math.sqrt(np.linalg.det(flat))
        )


class MetaTShape(StarShape):
    """Planar limit shape of meta-t level sets.

    ``{u : |u|_2^2 + lam > (lam + 2) |u|_inf^2}``, a star-shaped, non-convex
    subset of the square with corners on its boundary.
    """

    def __init__(self, lam: float):
        if not lam > 0:
            raise ValueError("lambda must be positive")
        super().__init__(2, f"meta-t-limit(lambda={lam:g})")
        self.lam = float(lam)

    def _gauge(self, x):
        m = np.abs(x).max(-1)
        q = ((self.lam + 2) * m * m - np.sum(x * x, -1)) / self.lam
        return np.sqrt(np.maximum(q, 0.0))

    def _analytic_extrema(self):
        return -np.ones(2), np.ones(2)

    def exact_volume(self):
        a = math.sqrt(self.lam + 1)
        return 2 * self.lam / a * math.log((a + 1) / (a - 1))


class GaugeShape(StarShape):
    """Shape given by a user-supplied vectorised gauge function."""

    def __init__(self, dim: int, gauge_fn, label: str = "custom", bounding_box=None):
        super().__init__(dim, label)
        self._fn = gauge_fn
        if bounding_box is not None:
            a, b = bounding_box
            self.__dict__["bounding_box"] = (_frozen(a), _frozen(b))

    def _gauge(self, x):
        return np.asarray(self._fn(x), dtype=float)


def triangle() -> PolytopeShape:
    """The open triangle with vertices (1,1), (-1,0), (0,-1)."""
    return PolytopeShape.from_vertices([(1, 1), (-1, 0), (0, -1)], label="triangle")
