"""Radial decay profiles (density generators) and the constants built on them.

A generator ``f0`` is a continuous, strictly decreasing, positive function on
``[0, inf)``. Combined with a shape ``D`` it defines the homothetic density
``c * f0(n_D(x))``. Rapidly varying generators (Weibull type) give light tails,
regularly varying ones (Pareto type) heavy tails.

All evaluation goes through ``log_eval`` so nothing underflows far out in the
tail.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy import integrate, optimize, special
from scipy.interpolate import PchipInterpolator

from .errors import (
    DivergentIntegral,
    HeavyTailUnsupported,
    LevelOutOfRange,
    NoRoot,
    NumericError,
    ToleranceNotReached,
)


@dataclass(frozen=True)
class Rapid:
    """Weibull-type tail ``exp(-(r/kappa)^theta)``."""

    theta: float
    kappa: float


@dataclass(frozen=True)
class Regular:
    """Regularly varying tail with exponent ``-(lam + d)``."""

    exponent: float
    lam: float


Variation = Union[Rapid, Regular]


class Generator:
    variation: Variation

    def log_eval(self, r):
        raise NotImplementedError

    def eval(self, r):
        return np.exp(self.log_eval(r))

    def log_inverse(self, log_c):
        """Radius ``r`` with ``log f0(r) = log_c``."""
        raise NotImplementedError

    def inverse(self, c):
        c = np.asarray(c, dtype=float)
        if np.any(c <= 0) or np.any(c > self.eval(0.0)):
            raise LevelOutOfRange(f"level {c} outside (0, f0(0)]")
        with np.errstate(divide="ignore"):
            return self.log_inverse(np.log(c))

    @property
    def light_tailed(self) -> bool:
        return isinstance(self.variation, Rapid)

    def radial_mode(self, d: int) -> float:
        """Maximiser of ``r^d f0(r)`` (where ``n r^d f0(r)`` peaks)."""
        res = optimize.minimize_scalar(
            lambda u: -(d * u + float(self.log_eval(math.exp(u)))),
            bracket=(-5.0, 5.0),
        )
        return math.exp(res.x)

    def sample_radius(self, rng: np.random.Generator, size: int, d: int):
        """Exact draws from the density proportional to ``r^(d-1) f0(r)``.

        Returns ``None`` when the generator has no exact sampler; callers then
        fall back to a :class:`RadialTable`.
        """
        return None

    def radial_cdf(self, r, d: int):
        return None


class WeibullGenerator(Generator):
    """``f0(r) = exp(-(r/kappa)^theta)``."""

    def __init__(self, theta: float, kappa: float = 1.0):
        if not (theta > 0 and kappa > 0):
            raise ValueError("theta and kappa must be positive")
        self.theta = float(theta)
        self.kappa = float(kappa)
        self.variation = Rapid(self.theta, self.kappa)

    def __repr__(self):
        return f"WeibullGenerator(theta={self.theta:g}, kappa={self.kappa:g})"

    def log_eval(self, r):
        return -((np.asarray(r, dtype=float) / self.kappa) ** self.theta)

    def log_inverse(self, log_c):
        return self.kappa * (-np.asarray(log_c, dtype=float)) ** (1.0 / self.theta)

    def radial_mode(self, d: int) -> float:
        return self.kappa * (d / self.theta) ** (1.0 / self.theta)

    def sample_radius(self, rng, size, d):
        # (R / kappa)^theta ~ Gamma(d / theta)
        return self.kappa * rng.standard_gamma(d / self.theta, size) ** (1.0 / self.theta)

    def radial_cdf(self, r, d):
        z = (np.asarray(r, dtype=float) / self.kappa) ** self.theta
        return special.gammainc(d / self.theta, z)


class ParetoGenerator(Generator):
    """``f0(r) = (1 + r)^-(lam + d)`` for ambient dimension ``d``."""

    def __init__(self, lam: float, d: int):
        if not lam > 0:
            raise DivergentIntegral("Pareto generator needs lambda > 0")
        if d < 1:
            raise ValueError("d must be positive")
        self.lam = float(lam)
        self.d = int(d)
        self.variation = Regular(-(self.lam + self.d), self.lam)

    def __repr__(self):
        return f"ParetoGenerator(lam={self.lam:g}, d={self.d})"

    def log_eval(self, r):
        return -(self.lam + self.d) * np.log1p(np.asarray(r, dtype=float))

    def log_inverse(self, log_c):
        return np.expm1(-np.asarray(log_c, dtype=float) / (self.lam + self.d))

    def _check_dim(self, d):
        if d != self.d:
            raise ValueError(f"generator built for d={self.d}, used with d={d}")

    def sample_radius(self, rng, size, d):
        self._check_dim(d)
        # beta-prime(d, lam) as a ratio of independent gammas
        return rng.standard_gamma(d, size) / rng.standard_gamma(self.lam, size)

    def radial_cdf(self, r, d):
        self._check_dim(d)
        r = np.asarray(r, dtype=float)
        return special.betainc(d, self.lam, r / (1.0 + r))


def radial_integral(gen: Generator, d: int, quad_tol: float = 1e-10) -> float:
    """``int_0^inf s^(d-1) f0(s) ds`` by adaptive quadrature."""
    if isinstance(gen.variation, Regular) and gen.variation.lam <= 0:
        raise DivergentIntegral("regular generator with lambda <= 0")

    def integrand(s):
        if s <= 0.0:
            return 0.0 if d > 1 else float(gen.eval(0.0))
        return math.exp((d - 1) * math.log(s) + float(gen.log_eval(s)))

    # split at the mode of the integrand so QUADPACK sees the bulk
    split = max(gen.radial_mode(d) if d > 1 else 1.0, 1e-3) * 4.0
    total, err = 0.0, 0.0
    for lo, hi in ((0.0, split), (split, math.inf)):
        val, e = integrate.quad(integrand, lo, hi, epsabs=0.0, epsrel=quad_tol, limit=500)
        total += val
        err += e
    if not total > 0 or err > quad_tol * total:
        raise ToleranceNotReached(f"radial integral error {err:g} exceeds {quad_tol:g}")
    return total


def normalizing_constant(shape, gen: Generator, quad_tol: float = 1e-10, vol: float | None = None) -> float:
    """``c`` such that ``c * f0(n_D(x))`` integrates to one.

    ``1 / c = d |D| int_0^inf s^(d-1) f0(s) ds``. ``vol`` defaults to the
    shape's exact volume, else a 10^6-point Monte Carlo estimate.
    """
    d = shape.dim
    if vol is None:
        vol = shape.exact_volume()
        if vol is None:
            vol = shape.volume(10**6, seed=0)[0]
    return 1.0 / (d * vol * radial_integral(gen, d, quad_tol))


def level_radius(gen: Generator, c_norm: float, level: float) -> float:
    """Radius ``r`` with ``{c f0(n_D) > level} = r D``."""
    peak = c_norm * float(gen.eval(0.0))
    if not 0.0 < level < peak:
        raise LevelOutOfRange(f"level {level} outside (0, {peak})")
    return float(gen.log_inverse(math.log(level) - math.log(c_norm)))


def scaling_constant(shape, gen: Generator, c_norm: float, n: int) -> float:
    """Largest root ``s`` of ``n s^d c f0(s) = 1`` (sample-cloud scale).

    Bisection on ``log s`` over a bracket to the right of the peak of the
    map, where it is decreasing.
    """
    if not gen.light_tailed:
        raise HeavyTailUnsupported("scaling constant is defined for rapidly varying generators")
    if n < 2:
        raise ValueError("n must be at least 2")
    d = shape.dim
    base = math.log(n) + math.log(c_norm)

    def h(u):
        return base + d * u + float(gen.log_eval(math.exp(u)))

    lo = math.log(gen.radial_mode(d))
    if h(lo) < 0:
        raise NoRoot(f"n s^d f(s) < 1 for all s at n={n}")
    hi = lo + 1.0
    while h(hi) >= 0:
        hi += 1.0
        if hi > lo + 200:
            raise NoRoot("no upper bracket for the scaling constant")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if h(mid) >= 0:
            lo = mid
        else:
            hi = mid
    u = lo if abs(h(lo)) <= abs(h(hi)) else hi
    s = math.exp(u)
    resid = abs(math.expm1(h(u)))
    if resid > 1e-10:
        raise NumericError(f"scaling constant residual {resid:g}")
    return s


def empirical_variation_ratio(gen: Generator, x: float, t_grid, log: bool = False) -> np.ndarray:
    """``f0(t x) / f0(t)`` along ``t_grid`` (natural log of it with ``log=True``)."""
    if x <= 0 or x == 1:
        raise ValueError("x must be positive and different from 1")
    t = np.asarray(t_grid, dtype=float)
    lr = gen.log_eval(t * x) - gen.log_eval(t)
    return lr if log else np.exp(lr)


class RadialTable:
    """Tabulated CDF of the radius law ``proportional to r^(d-1) f0(r)``.

    Knots are log-spaced; segment masses use 8-point Gauss-Legendre in
    ``log r`` and both directions are monotone (PCHIP) interpolants.
    """

    def __init__(self, gen: Generator, d: int, knots: int = 4096):
        self.d = d
        mode = gen.radial_mode(d) if d > 1 else 1.0
        lo = math.log(mode) - 40.0 / d
        hi = math.log(mode)
        peak = d * math.log(mode) + float(gen.log_eval(mode))
        while d * hi + float(gen.log_eval(math.exp(hi))) > peak - 45.0 and hi < 700:
            hi += 0.5
        u = np.linspace(lo, hi, knots)
        x, w = np.polynomial.legendre.leggauss(8)
        mid = 0.5 * (u[1:] + u[:-1])
        half = 0.5 * (u[1:] - u[:-1])
        nodes = mid[:, None] + half[:, None] * x[None, :]
        dens = np.exp(d * nodes + gen.log_eval(np.exp(nodes)) - peak)
        seg = (dens * w).sum(1) * half
        cdf = np.r_[0.0, np.cumsum(seg)]
        # mass below the first knot, r^d f0(r) ~ f0(0) r^d
        head = math.exp(d * lo + float(gen.log_eval(0.0)) - peak) / d
        cdf = (cdf + head) / (cdf[-1] + head)
        keep = np.r_[True, np.diff(cdf) > 0]
        self.log_r = u[keep]
        self.cdf_values = cdf[keep]
        self._ppf = PchipInterpolator(self.cdf_values, self.log_r)
        self._cdf = PchipInterpolator(self.log_r, self.cdf_values)

    def ppf(self, q):
        q = np.clip(np.asarray(q, dtype=float), self.cdf_values[0], self.cdf_values[-1])
        return np.exp(self._ppf(q))

    def cdf(self, r):
        lr = np.log(np.maximum(np.asarray(r, dtype=float), 1e-300))
        return np.clip(self._cdf(np.clip(lr, self.log_r[0], self.log_r[-1])), 0.0, 1.0)
