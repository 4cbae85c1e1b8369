"""Normalized densities with exact, block-deterministic samplers.

:class:`HomotheticDensity` is ``c * f0(n_D(x))``. Its sampler uses the cone
measure decomposition: if ``V`` is uniform on ``D`` then ``Theta = V / n_D(V)``
lies on the boundary of ``D`` and, independently of ``Theta``, a radius ``R``
with density proportional to ``r^(d-1) f0(r)`` gives ``X = R * Theta`` with
density ``c * f0(n_D(x))``. (Integrating ``f0(n_D)`` over the shell
``{r < n_D < r + dr}`` gives ``d |D| r^(d-1) f0(r) dr``, and the mass of a
cone sector of ``D`` is the same fraction of every shell.)

Three non-homothetic examples are provided: a skew-normal density, a meta-t
density with standard normal marginals and a "sliced triangle" density whose
level sets lose their top vertex.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import integrate, special, stats

from .errors import NumericError, RejectionStall
from .generators import (
    Generator,
    ParetoGenerator,
    RadialTable,
    WeibullGenerator,
    level_radius,
    normalizing_constant,
    scaling_constant,
)
from .parallel import block_sizes, concat, map_blocks, substream
from .shapes import LpBall, MetaTShape, SkewLimitShape, StarShape, triangle

# below this acceptance rate a rejection sampler is considered stuck
MIN_ACCEPTANCE = 1e-4
_STALL_WINDOW = 1 << 20


def _rejection(rng, m: int, propose, rate_hint: float) -> np.ndarray:
    """Collect ``m`` accepted draws from ``propose(rng, k) -> (x, accepted_mask)``."""
    parts, got, tried, acc = [], 0, 0, 0
    rate = max(rate_hint, MIN_ACCEPTANCE)
    while got < m:
        k = min(int((m - got) / rate * 1.2) + 16, _STALL_WINDOW)
        x, ok = propose(rng, k)
        tried += k
        acc += int(np.count_nonzero(ok))
        parts.append(x[ok])
        got += int(np.count_nonzero(ok))
        if tried >= _STALL_WINDOW and acc < MIN_ACCEPTANCE * tried:
            raise RejectionStall(f"acceptance {acc}/{tried} below {MIN_ACCEPTANCE:g}")
        if acc:
            rate = max(acc / tried, MIN_ACCEPTANCE)
    return np.concatenate(parts)[:m]


class Density:
    """Common interface.

    Subclasses provide ``_log_pdf`` on ``(..., d)`` arrays and
    ``_sample_block(rng, m)``.
    """

    dim: int
    label: str
    light_tailed: bool = True
    tail_index: float | None = None
    limit_shape: StarShape | None = None

    def _log_pdf(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError(f"{type(self).__name__} has no density")

    def log_pdf(self, x):
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.dim:
            raise ValueError(f"expected trailing dimension {self.dim}, got {x.shape}")
        with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
            v = self._log_pdf(x)
        return float(v) if np.ndim(v) == 0 else v

    def pdf(self, x):
        v = np.exp(self.log_pdf(x))
        return float(v) if np.ndim(v) == 0 else v

    def _sample_block(self, rng: np.random.Generator, m: int) -> np.ndarray:
        raise NotImplementedError

    def sample(self, n: int, seed=0, threads: int | None = None) -> np.ndarray:
        """``n`` exact draws, identical for any thread count.

        The work is cut into fixed blocks; block ``b`` uses the substream
        ``(seed, b)`` and blocks are concatenated in index order.
        """
        if n < 1:
            raise ValueError("n must be at least 1")
        sizes = block_sizes(n)
        parts = map_blocks(lambda b: self._sample_block(substream(seed, b), sizes[b]), len(sizes), threads)
        return concat(parts, self.dim)

    def cloud_scale(self, n: int) -> float:
        """Scaling constant ``s_n`` for an ``n``-point sample cloud."""
        raise NotImplementedError

    # -- normalization -------------------------------------------------------

    def normalization_check(
        self,
        n_mc: int = 10**6,
        seed=0,
        threads: int | None = None,
        method: str = "radial",
        truncate_gauge: float | None = None,
    ):
        """Monte Carlo estimate of the total mass with its standard error.

        ``method="radial"`` (default) maps the unit ball onto the whole space
        by ``x = psi(rho) * y / rho`` with ``psi(rho) = s * rho / (1 - rho)^k``
        and integrates uniformly over the ball; ``s`` is a pilot median radius
        and ``k`` is raised for heavy tails so the weight stays bounded.
        ``method="box"`` is plain uniform sampling over the box of the level
        set at ``1e-12`` times the peak (homothetic densities only).

        ``truncate_gauge`` restricts the integral to ``{n_D < T}`` for the
        reference shape, e.g. to measure how much mass a truncation keeps.
        """
        if n_mc < 10**4:
            raise ValueError("n_mc must be at least 10^4")
        if method == "box":
            return self._box_check(n_mc, seed, threads, truncate_gauge)
        if method != "radial":
            raise ValueError(f"unknown method {method!r}")
        d = self.dim
        pilot = self.sample(4096, seed=(*np.atleast_1d(seed).tolist(), 1 << 30))
        s = float(np.median(np.linalg.norm(pilot, axis=1)))
        k = max(1.0, 1.0 / self.tail_index) if self.tail_index else 1.0
        trunc = self._reference_shape() if truncate_gauge is not None else None
        sizes = block_sizes(n_mc)

        def block(b):
            rng = substream(seed, b)
            y = 2.0 * rng.random((sizes[b], d)) - 1.0
            rho = np.linalg.norm(y, axis=1)
            inside = (rho < 1.0) & (rho > 0.0)
            y, rho = y[inside], rho[inside]
            psi = s * rho / (1.0 - rho) ** k
            dpsi = s * (1.0 - rho + k * rho) / (1.0 - rho) ** (k + 1)
            x = (psi / rho)[:, None] * y
            with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
                logw = self.log_pdf(x) + (d - 1) * np.log(psi / rho) + np.log(dpsi)
                w = np.where(np.isfinite(logw), np.exp(logw), 0.0)
            if trunc is not None:
                w = np.where(np.asarray(trunc.gauge(x)) < truncate_gauge, w, 0.0)
            return float(w.sum()), float((w * w).sum())

        sums = map_blocks(block, len(sizes), threads)
        box = 2.0**d
        m1 = sum(a for a, _ in sums) / n_mc
        m2 = sum(b for _, b in sums) / n_mc
        return box * m1, box * math.sqrt(max(m2 - m1 * m1, 0.0) / n_mc)

    def _reference_shape(self) -> StarShape:
        return self.limit_shape if self.limit_shape is not None else LpBall(2.0, self.dim)

    def _box_check(self, n_mc, seed, threads, truncate_gauge):
        raise NotImplementedError(f"box normalization check not available for {type(self).__name__}")


class HomotheticDensity(Density):
    """``c * f0(n_D(x))`` with ``c`` fixed by the slice identity.

    Parameters
    ----------
    shape : StarShape
        The unit level set ``D``.
    gen : Generator
        Radial profile ``f0``.
    quad_tol : float
        Relative tolerance for the radial integral.
    vol : float, optional
        ``|D|``. Taken from the shape (exact or Monte Carlo) if omitted.
    """

    def __init__(self, shape: StarShape, gen: Generator, quad_tol: float = 1e-10, vol: float | None = None, label=None):
        self.shape = shape
        self.gen = gen
        self.dim = shape.dim
        if vol is None:
            vol = shape.exact_volume()
            if vol is None:
                vol = shape.volume(10**6, seed=0)[0]
        self.vol = float(vol)
        self.c_norm = normalizing_constant(shape, gen, quad_tol, self.vol)
        self.light_tailed = gen.light_tailed
        self.tail_index = None if gen.light_tailed else gen.variation.lam
        self.limit_shape = shape
        self.label = label or f"{shape.label}/{gen!r}"
        a, b = shape.bounding_box
        self._box = (np.asarray(a), np.asarray(b))
        self.uniform_efficiency = self.vol / float(np.prod(b - a))
        # exact radius sampler when the generator has one, else a table
        probe = gen.sample_radius(np.random.default_rng(0), 1, self.dim)
        self.radial_table = None if probe is not None else RadialTable(gen, self.dim)

    def __repr__(self):
        return f"HomotheticDensity({self.label!r})"

    def _log_pdf(self, x):
        return math.log(self.c_norm) + self.gen.log_eval(self.shape._gauge(x))

    def level_set_radius(self, level: float) -> float:
        """``r`` with ``{pdf > level} = r D``."""
        return level_radius(self.gen, self.c_norm, level)

    def radial_cdf(self, r):
        """CDF of ``n_D(X)``."""
        cdf = self.gen.radial_cdf(r, self.dim)
        return cdf if cdf is not None else self.radial_table.cdf(r)

    def sample_uniform(self, rng, m: int) -> np.ndarray:
        """``m`` points uniform on ``D`` by rejection from the bounding box."""
        a, b = self._box

        def propose(rng, k):
            v = a + (b - a) * rng.random((k, self.dim))
            g = self.shape._gauge(v)
            return v, (g < 1.0) & (g > 0.0)

        return _rejection(rng, m, propose, self.uniform_efficiency)

    def _sample_block(self, rng, m):
        v = self.sample_uniform(rng, m)
        theta = v / self.shape._gauge(v)[:, None]
        r = self.gen.sample_radius(rng, m, self.dim)
        if r is None:
            r = self.radial_table.ppf(rng.random(m))
        return r[:, None] * theta

    def cloud_scale(self, n: int) -> float:
        return scaling_constant(self.shape, self.gen, self.c_norm, n)

    def _box_check(self, n_mc, seed, threads, truncate_gauge):
        if truncate_gauge is None:
            peak = self.c_norm * float(self.gen.eval(0.0))
            truncate_gauge = self.level_set_radius(1e-12 * peak)
        a, b = self._box
        lo, hi = truncate_gauge * a, truncate_gauge * b
        area = float(np.prod(hi - lo))
        sizes = block_sizes(n_mc)

        def block(k):
            rng = substream(seed, k)
            x = lo + (hi - lo) * rng.random((sizes[k], self.dim))
            f = self.pdf(x) * (self.shape._gauge(x) < truncate_gauge)
            return float(f.sum()), float((f * f).sum())

        sums = map_blocks(block, len(sizes), threads)
        m1 = sum(s for s, _ in sums) / n_mc
        m2 = sum(q for _, q in sums) / n_mc
        return area * m1, area * math.sqrt(max(m2 - m1 * m1, 0.0) / n_mc)


def gaussian(rho: float = 0.0) -> HomotheticDensity:
    """Standard bivariate normal with correlation ``rho`` as a homothetic density."""
    from .shapes import Ellipsoid

    shape = LpBall(2.0) if rho == 0 else Ellipsoid.correlation(rho)
    return HomotheticDensity(shape, WeibullGenerator(2.0, math.sqrt(2.0)), label=f"gaussian(rho={rho:g})")


def pareto_disk(lam: float) -> HomotheticDensity:
    """Heavy-tailed density ``c (1 + |x|)^-(lam + 2)`` on the plane."""
    return HomotheticDensity(LpBall(2.0), ParetoGenerator(lam, 2), label=f"pareto-disk(lambda={lam:g})")


class SkewNormalDensity(Density):
    """``2 phi_Omega(x) Phi(alpha' x)``.

    Level sets are asymptotically homothetic with limit shape
    ``{u' Omega^{-1} u + min(alpha'u, 0)^2 < 1}``.
    """

    def __init__(self, omega, alpha):
        omega = np.atleast_2d(np.asarray(omega, dtype=float))
        self.alpha = np.asarray(alpha, dtype=float)
        self.omega = omega
        self.dim = len(omega)
        self.limit_shape = SkewLimitShape(omega, self.alpha)
        self._chol = np.linalg.cholesky(omega)
        self._logdet = 2.0 * float(np.sum(np.log(np.diag(self._chol))))
        self._log_phi0 = -0.5 * self.dim * math.log(2 * math.pi) - 0.5 * self._logdet
        self.label = f"skew-normal(alpha={self.alpha.tolist()})"

    def _log_pdf(self, x):
        z = np.linalg.solve(self._chol, np.moveaxis(x, -1, 0).reshape(self.dim, -1))
        q = np.sum(z * z, axis=0).reshape(x.shape[:-1])
        return math.log(2.0) + self._log_phi0 - 0.5 * q + special.log_ndtr(x @ self.alpha)

    def _sample_block(self, rng, m):
        z = rng.standard_normal((m, self.dim)) @ self._chol.T
        w = rng.standard_normal(m)
        return np.where((w <= z @ self.alpha)[:, None], z, -z)

    def cloud_scale(self, n: int) -> float:
        c = 2.0 * math.exp(self._log_phi0)
        return scaling_constant(self.limit_shape, WeibullGenerator(2.0, math.sqrt(2.0)), c, n)


class MetaTDensity(Density):
    """Bivariate density with standard normal marginals and the t copula.

    ``X_i = Phi^{-1}(T_lam(Z_i))`` for a spherical t vector ``Z`` with
    ``lam`` degrees of freedom; ``lam = 1`` is the meta-Cauchy case.
    """

    dim = 2

    def __init__(self, lam: float = 1.0):
        if not lam > 0:
            raise ValueError("lambda must be positive")
        self.lam = float(lam)
        self.limit_shape = MetaTShape(self.lam)
        self.label = f"meta-t(lambda={self.lam:g})"
        lam = self.lam
        self._log_t2 = special.gammaln((lam + 2) / 2) - special.gammaln(lam / 2) - math.log(lam * math.pi)

    def _to_t(self, x):
        # upper tails handled through the lower tail by symmetry
        return np.sign(x) * -special.stdtrit(self.lam, special.ndtr(-np.abs(x)))

    def _to_normal(self, z):
        return np.sign(z) * -special.ndtri(special.stdtr(self.lam, -np.abs(z)))

    def _log_pdf(self, x):
        z = self._to_t(x)
        lam = self.lam
        log_joint = self._log_t2 - 0.5 * (lam + 2) * np.log1p(np.sum(z * z, -1) / lam)
        log_marg = stats.t.logpdf(z, lam).sum(-1)
        log_norm = stats.norm.logpdf(x).sum(-1)
        out = log_joint + log_norm - log_marg
        # Phi underflows past |x| ~ 37; the density there is below e^-700
        return np.where(np.all(np.isfinite(z), axis=-1), out, -np.inf)

    def _sample_block(self, rng, m):
        g = rng.standard_normal((m, 2))
        w = np.sqrt(rng.chisquare(self.lam, m) / self.lam)
        return self._to_normal(g / w[:, None])

    def cloud_scale(self, n: int) -> float:
        if n < 2:
            raise ValueError("n must be at least 2")
        return math.sqrt(2.0 * math.log(n))


def _tau(s):
    """Slicing level: ``x + y < 2t - sqrt(t)`` iff ``tau(x + y) < t`` (for ``t >= 1/4``)."""
    s = np.asarray(s, dtype=float)
    w = 0.25 * (1.0 + np.sqrt(1.0 + 8.0 * np.maximum(s, 0.0)))
    return np.where(s > 0, w * w, 0.0)


class SlicedTriangleDensity(Density):
    """``c * exp(-t(x))`` with ``t = max(n_D(x), tau(x1 + x2))``.

    ``D`` is the triangle with vertices (1,1), (-1,0), (0,-1). The level set
    at ``t`` is ``tD`` minus the strip ``{x + y >= 2t - sqrt(t)}``, so the
    vertex in the direction (1,1) is cut off at every scale.
    """

    dim = 2

    def __init__(self, quad_tol: float = 1e-12):
        self.triangle = triangle()
        self.limit_shape = self.triangle
        self.label = "sliced-triangle"
        self._proposal = HomotheticDensity(self.triangle, WeibullGenerator(1.0, 1.0))
        self.c_norm = 1.0 / self._mass(quad_tol)
        # acceptance of the rejection step is the sliced mass over the unsliced mass 3
        self.acceptance = 1.0 / (3.0 * self.c_norm)

    @staticmethod
    def _mass(quad_tol: float) -> float:
        # with s = x + y, v = x - y the gauge is max(-s, s/2 + 1.5|v|), so
        # the v-integral is explicit and one quadrature in s remains
        def inner(s):
            c0 = max(-s, float(_tau(s)))
            if s / 2 >= c0:
                return 4.0 / 3.0 * math.exp(-s / 2)
            v0 = (c0 - s / 2) / 1.5
            return 2.0 * math.exp(-c0) * (v0 + 2.0 / 3.0)

        total = 0.0
        for lo, hi in ((-math.inf, 0.0), (0.0, math.inf)):
            val, err = integrate.quad(inner, lo, hi, epsabs=0.0, epsrel=quad_tol, limit=400)
            if err > 10 * quad_tol * abs(val):
                raise NumericError(f"sliced-triangle mass quadrature error {err:g}")
            total += val
        return 0.5 * total

    def level(self, x):
        """``t(x)``: the level-set index of ``x``."""
        x = np.asarray(x, dtype=float)
        return np.maximum(self.triangle._gauge(x), _tau(x[..., 0] + x[..., 1]))

    def _log_pdf(self, x):
        return math.log(self.c_norm) - self.level(x)

    def _sample_block(self, rng, m):
        tri = self.triangle

        def propose(rng, k):
            x = self._proposal._sample_block(rng, k)
            excess = _tau(x[:, 0] + x[:, 1]) - tri._gauge(x)
            u = rng.random(k)
            return x, u < np.exp(-np.maximum(excess, 0.0))

        return _rejection(rng, m, propose, self.acceptance)

    def cloud_scale(self, n: int) -> float:
        return scaling_constant(self.triangle, self._proposal.gen, self.c_norm, n)


class ComonotoneGaussian(Density):
    """``(Z, ..., Z)`` for one standard normal ``Z``: complete dependence, no density."""

    def __init__(self, dim: int = 2):
        self.dim = dim
        self.label = "comonotone"

    def _sample_block(self, rng, m):
        return np.repeat(rng.standard_normal((m, 1)), self.dim, axis=1)

    def cloud_scale(self, n: int) -> float:
        if n < 2:
            raise ValueError("n must be at least 2")
        return math.sqrt(2.0 * math.log(n))
