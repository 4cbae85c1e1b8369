"""Scaled sample clouds, convergence onto a limit set, edges and maxima.

A sample cloud is ``{X_1/s_n, ..., X_n/s_n}``. For light-tailed homothetic
densities with ``n s_n^d f(s_n) = 1`` the clouds converge onto the closure of
``D``: eventually no points lie outside ``e^eps D`` and every ``eps``-ball
around a boundary point holds many points. For heavy tails the coordinatewise
maxima instead have Fréchet limits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, special, stats
from scipy.spatial import cKDTree

from .errors import HeavyTailOnly, HeavyTailUnsupported
from .parallel import child_seed, map_blocks
from .shapes import StarShape


@dataclass(frozen=True, eq=False)
class SampleCloud:
    """``n`` observations and their scaled copy ``raw / s_n``."""

    raw: np.ndarray
    s_n: float
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "scaled", self.raw / self.s_n)

    @property
    def n(self) -> int:
        return len(self.raw)

    @property
    def dim(self) -> int:
        return self.raw.shape[1]


def make_cloud(density, n: int, seed=0, s_n: float | None = None, threads: int | None = None) -> SampleCloud:
    """Sample ``n`` points and scale them by ``s_n``.

    ``s_n`` defaults to the density's scaling constant, which exists for
    light tails only.
    """
    if s_n is None:
        if not density.light_tailed:
            raise HeavyTailUnsupported("heavy-tailed density: pass an explicit s_n")
        s_n = density.cloud_scale(n)
    if not s_n > 0:
        raise ValueError("s_n must be positive")
    raw = density.sample(n, seed=seed, threads=threads)
    return SampleCloud(raw, float(s_n), {"density": density.label, "seed": seed, "n": n})


# -- convergence onto D -----------------------------------------------------------


@dataclass(frozen=True)
class ConvergenceReport:
    eps: float
    n: int
    outside_count: int
    outside_fraction: float
    probe_radius: float
    probes: np.ndarray
    probe_hits: np.ndarray
    m_min: int
    outside_tol: float

    @property
    def clause_outside(self) -> bool:
        """Few points outside ``e^eps D``."""
        return self.outside_fraction <= self.outside_tol

    @property
    def clause_probes(self) -> bool:
        """Every probe ball holds at least ``m_min`` points."""
        return bool(np.all(self.probe_hits >= self.m_min))

    def to_dict(self) -> dict:
        return {
            "eps": self.eps,
            "n": self.n,
            "outside_count": self.outside_count,
            "outside_fraction": self.outside_fraction,
            "probe_radius": self.probe_radius,
            "probe_hits": self.probe_hits.tolist(),
            "min_probe_hits": int(self.probe_hits.min()),
            "m_min": self.m_min,
            "clause_outside": self.clause_outside,
            "clause_probes": self.clause_probes,
        }


def probe_directions(d: int, n_probes: int) -> np.ndarray:
    """Equally spaced angles in the plane, Sobol points mapped to the sphere otherwise."""
    if d == 2:
        phi = 2.0 * np.pi * np.arange(n_probes) / n_probes
        return np.column_stack([np.cos(phi), np.sin(phi)])
    # fixed scrambling keeps the probe set reproducible and away from the cube centre
    m = max(0, math.ceil(math.log2(n_probes)))
    u = stats.qmc.Sobol(d, scramble=True, seed=0).random_base2(m)[:n_probes]
    v = stats.norm.ppf(u)
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def convergence_report(
    cloud: SampleCloud,
    shape: StarShape,
    eps: float = 0.15,
    n_probes: int | None = None,
    m_min: int = 3,
    probe_radius: float | None = None,
    outside_tol: float = 0.01,
) -> ConvergenceReport:
    """Raw counts for both clauses of convergence onto the closure of ``shape``.

    Parameters
    ----------
    eps : float
        Points with gauge above ``e^eps`` count as outside.
    n_probes : int, optional
        64 boundary probes in the plane, 512 in higher dimension.
    probe_radius : float, optional
        Radius of the probe balls, ``eps`` by default.
    """
    if not eps > 0:
        raise ValueError("eps must be positive")
    d = cloud.dim
    if n_probes is None:
        n_probes = 64 if d == 2 else 512
    r = eps if probe_radius is None else probe_radius
    g = np.asarray(shape.gauge(cloud.scaled))
    outside = int(np.count_nonzero(~(g <= math.exp(eps))))
    probes = shape.boundary_points(probe_directions(d, n_probes))
    probes = probes[np.all(np.isfinite(probes), axis=1)]
    if len(probes) == 0:
        raise ValueError("no probe direction meets the boundary")
    hits = cKDTree(cloud.scaled).query_ball_point(probes, r, return_length=True)
    return ConvergenceReport(
        eps, cloud.n, outside, outside / cloud.n, r, probes, np.asarray(hits, dtype=np.int64), m_min, outside_tol
    )


# -- edges and maxima --------------------------------------------------------------


def _points(cloud) -> np.ndarray:
    return cloud.scaled if isinstance(cloud, SampleCloud) else np.asarray(cloud, dtype=float)


def pareto_edge(cloud, quadrant=(1, 1), method: str = "pareto") -> np.ndarray:
    """Outermost points in the closed quadrant with the given signs, sorted by angle.

    ``method="pareto"`` keeps the Pareto-maximal points: no other point of
    the quadrant is at least as far out in both sign-adjusted coordinates.
    ``method="hull"`` further keeps only those on the upper concave chain, so
    points behind the segment joining two neighbours are dropped.
    """
    x = _points(cloud)
    if x.ndim != 2 or x.shape[1] != 2:
        raise ValueError("pareto_edge needs planar points")
    if method not in ("pareto", "hull"):
        raise ValueError(f"unknown method {method!r}")
    sgn = np.asarray(quadrant, dtype=float)
    if sgn.shape != (2,) or not np.all(np.abs(sgn) == 1):
        raise ValueError("quadrant must be a pair of signs")
    y = x * sgn
    y = y[np.all(y >= 0, axis=1)]
    if len(y) == 0:
        return np.empty((0, 2))
    order = np.lexsort((-y[:, 1], -y[:, 0]))
    y = y[order]
    keep = np.empty(len(y), dtype=bool)
    best = -np.inf
    for i, yi in enumerate(y[:, 1]):
        keep[i] = yi > best
        if keep[i]:
            best = yi
    edge = y[keep][::-1]  # x ascending, y descending
    if method == "hull" and len(edge) > 2:
        chain: list[np.ndarray] = []
        for p in edge:
            while len(chain) >= 2:
                o, a = chain[-2], chain[-1]
                if (a[0] - o[0]) * (p[1] - o[1]) - (a[1] - o[1]) * (p[0] - o[0]) >= 0:
                    chain.pop()
                else:
                    break
            chain.append(p)
        edge = np.array(chain)
    edge = edge * sgn
    ang = np.arctan2(edge[:, 1], edge[:, 0])
    return edge[np.argsort(ang, kind="stable")]


def coordinatewise_max(cloud) -> tuple[np.ndarray, bool]:
    """Componentwise maximum and whether a single point attains it."""
    x = _points(cloud)
    if len(x) == 0:
        raise ValueError("empty cloud")
    m = x.max(axis=0)
    return m, bool(np.any(np.all(x == m, axis=1)))


# -- heavy tails -----------------------------------------------------------------


@dataclass(frozen=True)
class FrechetFit:
    lambda_hat: float
    a_hat: np.ndarray
    scale: np.ndarray
    residuals: np.ndarray
    n: int
    trials: int

    def to_dict(self) -> dict:
        return {
            "lambda_hat": self.lambda_hat,
            "a_hat": self.a_hat.tolist(),
            "scale": self.scale.tolist(),
            "rms_residual": float(np.sqrt(np.mean(self.residuals**2))),
            "n": self.n,
            "trials": self.trials,
        }


def expected_loglog_positions(m: int, ranks) -> np.ndarray:
    """``E[log(-log U_(i))]`` for uniform order statistics ``U_(i) ~ Beta(i, m+1-i)``.

    Unbiased log-scale plotting positions: ``log(-log(i/(m+1)))`` overstates
    the top order statistic by about Euler's constant.
    """
    out = []
    for i in np.atleast_1d(ranks):
        i = int(i)
        lb = special.betaln(i, m + 1 - i)

        def integrand(w, i=i, lb=lb):
            if w <= 0.0:
                return 0.0
            return math.log(w) * math.exp(-w * i + (m - i) * math.log1p(-math.exp(-w)) - lb)

        # W = -log U_(i) concentrates near log(m / i)
        mid = math.log(m / i) if i < m else 1.0 / m
        out.append(sum(integrate.quad(integrand, lo, hi, limit=200)[0] for lo, hi in ((0.0, mid), (mid, math.inf))))
    return np.array(out)


def fit_frechet(maxima: np.ndarray, positions: str = "expected") -> tuple[float, np.ndarray, np.ndarray]:
    """Common-exponent Fréchet fit ``F_j(t) = exp(-(a_j / t)^lam)``.

    Regresses ``log(-log F_hat)`` on ``log t`` over the upper half of each
    coordinate's maxima, with one slope ``-lam`` and one intercept
    ``lam log a_j`` per coordinate. ``positions="expected"`` uses
    :func:`expected_loglog_positions` for the ordinate; ``"empirical"`` uses
    ``F_hat = i / (m + 1)`` directly.
    """
    w = np.asarray(maxima, dtype=float)
    m, d = w.shape
    i = np.arange(1, m + 1)
    upper = i > m // 2
    if positions == "expected":
        y_pos = expected_loglog_positions(m, i[upper])
    elif positions == "empirical":
        y_pos = np.log(-np.log(i[upper] / (m + 1.0)))
    else:
        raise ValueError(f"unknown positions {positions!r}")
    rows, ys = [], []
    for j in range(d):
        t = np.sort(w[:, j])[upper]
        if np.any(t <= 0):
            raise ValueError("upper maxima must be positive")
        onehot = np.zeros((len(t), d))
        onehot[:, j] = 1.0
        rows.append(np.column_stack([np.log(t), onehot]))
        ys.append(y_pos)
    a_mat, y = np.vstack(rows), np.concatenate(ys)
    coef, *_ = np.linalg.lstsq(a_mat, y, rcond=None)
    lam = -coef[0]
    return float(lam), np.exp(coef[1:] / lam), y - a_mat @ coef


def frechet_fit(density, n: int, trials: int, seed=0, threads: int | None = None) -> FrechetFit:
    """Fréchet tail exponent of coordinatewise maxima of ``n``-point clouds.

    Each maximum is scaled by the marginal ``(1 - 1/n)``-quantile estimated
    from a separate sample of size ``min(100 n, 10^7)``; the scale cancels in
    the exponent.
    """
    if density.light_tailed:
        raise HeavyTailOnly("Fréchet maxima need a regularly varying generator")
    if trials < 500:
        raise ValueError("trials must be at least 500")
    pilot = density.sample(min(100 * n, 10**7), seed=child_seed(seed, 0), threads=threads)
    scale = np.quantile(pilot, 1.0 - 1.0 / n, axis=0)
    per = max(1, (1 << 20) // n)
    sizes = [per] * (trials // per) + ([trials % per] if trials % per else [])

    def run(b):
        pts = density.sample(sizes[b] * n, seed=child_seed(seed, 1, b), threads=1)
        return pts.reshape(sizes[b], n, -1).max(axis=1)

    maxima = np.concatenate(map_blocks(run, len(sizes), threads)) / scale
    lam, a, resid = fit_frechet(maxima)
    return FrechetFit(lam, a, scale, resid, n, trials)


def positivity_partition_check(shape: StarShape, grid: int = 4096) -> bool:
    """Whether ``D`` has a point with both coordinates positive.

    Scans directions strictly inside the positive quadrant: any direction with
    finite gauge gives such a point since ``D`` is star-shaped about 0.
    """
    if shape.dim != 2:
        raise ValueError("positivity check is planar")
    phi = 0.5 * np.pi * (np.arange(grid) + 0.5) / grid
    g = np.asarray(shape.gauge(np.column_stack([np.cos(phi), np.sin(phi)])))
    return bool(np.any(np.isfinite(g)))
