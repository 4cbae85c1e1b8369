"""Empirical diagnostics for asymptotic (in)dependence of two components.

All tail estimators work on ranks, i.e. on the empirical copula, so they are
unchanged by strictly increasing transformations of the coordinates.
Binomial proportions carry Wilson score intervals.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from enum import Enum
from typing import Sequence

import numpy as np
from scipy import stats

from .errors import InsufficientSample, InsufficientTail
from .parallel import child_seed, map_blocks

# points per simulated batch of clouds
_BATCH_POINTS = 1 << 20


def wilson(k: int, n: int, confidence: float = 0.95) -> tuple[float, float]:
    """Wilson score interval for ``k`` successes in ``n`` trials."""
    if n <= 0:
        return 0.0, 1.0
    ci = stats.binomtest(int(k), int(n)).proportion_ci(confidence, method="wilson")
    return float(ci.low), float(ci.high)


def ranks(points) -> np.ndarray:
    """Columnwise ordinal ranks ``1..N``; ties broken by input order."""
    x = np.asarray(points)
    return np.column_stack([stats.rankdata(x[:, j], method="ordinal") for j in range(x.shape[1])]).astype(np.int64)


def empirical_copula(points, u: float, v: float) -> float:
    """``C_N(u, v) = #{R1 <= uN, R2 <= vN} / N``."""
    r = ranks(points)
    n = len(r)
    return float(np.count_nonzero((r[:, 0] <= u * n) & (r[:, 1] <= v * n))) / n


def sibuya_function(points, s: float) -> float:
    """Joint upper-tail mass ``P(1-s, 1-s) = #{R1 > (1-s)N, R2 > (1-s)N} / N``."""
    r = ranks(points)
    n = len(r)
    thr = (1.0 - s) * n
    return float(np.count_nonzero((r[:, 0] > thr) & (r[:, 1] > thr))) / n


def _draw(source, n: int, seed, threads=None) -> np.ndarray:
    if hasattr(source, "sample"):
        return source.sample(n, seed=seed, threads=threads)
    return np.asarray(source(n, seed))


# -- tail dependence curve ------------------------------------------------------


@dataclass(frozen=True)
class SibuyaCurve:
    q_grid: np.ndarray
    lambda_hat: np.ndarray
    ci: np.ndarray
    n_effective: np.ndarray
    joint_counts: np.ndarray

    def to_dict(self) -> dict:
        return {
            "grid": self.q_grid.tolist(),
            "estimates": self.lambda_hat.tolist(),
            "ci": self.ci.tolist(),
            "params": {"n_effective": self.n_effective.tolist(), "joint_counts": self.joint_counts.tolist()},
        }


def lambda_u_curve(points, q_grid: Sequence[float], confidence: float = 0.95) -> SibuyaCurve:
    """Rank estimate of ``P{X1 > F1^-1(q) | X2 > F2^-1(q)}`` along ``q_grid``.

    Raises
    ------
    InsufficientSample
        Fewer than 1000 points.
    InsufficientTail
        ``(1 - q) N < 20`` at the largest level.
    """
    x = np.asarray(points, dtype=float)
    if x.ndim != 2 or x.shape[1] < 2:
        raise ValueError("points must be an (N, 2) array")
    n = len(x)
    if n < 1000:
        raise InsufficientSample(f"need at least 1000 points, got {n}")
    q = np.asarray(q_grid, dtype=float)
    if q.ndim != 1 or len(q) == 0 or np.any((q <= 0) | (q >= 1)) or np.any(np.diff(q) <= 0):
        raise ValueError("q_grid must be increasing in (0, 1)")
    if (1.0 - q[-1]) * n < 20:
        raise InsufficientTail(f"(1-q)N = {(1 - q[-1]) * n:.3g} < 20 at q = {q[-1]}")
    r = ranks(x[:, :2])
    lam, ci, n_eff, joint = [], [], [], []
    for qi in q:
        thr = qi * n
        cond = r[:, 1] > thr
        m = int(np.count_nonzero(cond))
        k = int(np.count_nonzero(cond & (r[:, 0] > thr)))
        lam.append(k / m)
        ci.append(wilson(k, m, confidence))
        n_eff.append(m)
        joint.append(k)
    return SibuyaCurve(q, np.array(lam), np.array(ci), np.array(n_eff), np.array(joint))


# -- sum criterion --------------------------------------------------------------


@dataclass(frozen=True)
class SumCriterion:
    n_list: np.ndarray
    s_hat: np.ndarray
    thresholds: np.ndarray
    n_big: int

    def to_dict(self) -> dict:
        return {
            "grid": self.n_list.tolist(),
            "estimates": self.s_hat.tolist(),
            "ci": None,
            "params": {"thresholds": self.thresholds.tolist(), "n_big": self.n_big},
        }


def sum_criterion(source, n_list: Sequence[int], n_big: int, seed=0, threads=None, points=None) -> SumCriterion:
    """``s_n = n P{X1 + X2 > t1n + t2n}`` with ``t_in`` the empirical ``(1 - 1/n)``-quantiles.

    One sample of size ``n_big`` serves every ``n``. A precomputed sample can
    be passed as ``points``.
    """
    n_arr = np.asarray(n_list, dtype=np.int64)
    if len(n_arr) == 0 or np.any(n_arr < 2):
        raise ValueError("n_list must hold integers >= 2")
    if points is not None:
        n_big = len(points)
    if n_arr.max() * 100 > n_big:
        raise InsufficientSample(f"max(n_list) = {n_arr.max()} exceeds n_big/100 = {n_big / 100:g}")
    x = _draw(source, n_big, seed, threads) if points is None else np.asarray(points, dtype=float)
    tot = x[:, 0] + x[:, 1]
    s_hat, thr = [], []
    for n in n_arr:
        t = np.quantile(x[:, :2], 1.0 - 1.0 / n, axis=0)
        thr.append(t)
        s_hat.append(n * np.count_nonzero(tot > t.sum()) / len(x))
    return SumCriterion(n_arr, np.array(s_hat), np.array(thr), int(len(x)))


# -- records and overlaps -------------------------------------------------------


@dataclass(frozen=True)
class RecordEstimate:
    n: int
    trials: int
    hits: int
    p_hat: float
    ci: tuple[float, float]

    def to_dict(self) -> dict:
        return {"grid": [self.n], "estimates": [self.p_hat], "ci": [list(self.ci)], "params": {"trials": self.trials, "hits": self.hits}}


@dataclass(frozen=True)
class OverlapEstimate:
    n: int
    k: int
    trials: int
    hits: int
    p_hat: float
    ci: tuple[float, float]
    independent: float = field(default=float("nan"))

    def to_dict(self) -> dict:
        d = asdict(self)
        d["ci"] = list(self.ci)
        return d


def _cloud_batches(source, n: int, trials: int, seed, threads, fn) -> int:
    """Sum of ``fn(clouds)`` over batches of ``(m, n, d)`` clouds.

    Batch ``b`` is drawn from the seed ``(seed, b)`` with a fixed batch size,
    so the count does not depend on ``threads``.
    """
    per = max(1, _BATCH_POINTS // n)
    sizes = [per] * (trials // per) + ([trials % per] if trials % per else [])

    def run(b):
        pts = _draw(source, sizes[b] * n, child_seed(seed, b), 1)
        return int(fn(pts.reshape(sizes[b], n, -1)))

    return sum(map_blocks(run, len(sizes), threads))


def record_probability(source, n: int, trials: int, seed=0, threads=None, confidence: float = 0.95) -> RecordEstimate:
    """Fraction of ``n``-point clouds whose coordinatewise maximum is a sample point."""
    if trials < 1000:
        raise ValueError("trials must be at least 1000")
    if n < 1:
        raise ValueError("n must be positive")

    def hits(c):
        am = np.argmax(c, axis=1)
        return np.count_nonzero(np.all(am == am[:, :1], axis=1))

    k = _cloud_batches(source, n, trials, seed, threads, hits)
    return RecordEstimate(n, trials, k, k / trials, wilson(k, trials, confidence))


def overlap_independent(n: int, k: int) -> float:
    """``p_n(k)`` for independent components: ``1 - prod_{i<k} (n-k-i)/(n-i)``."""
    if not 1 <= k <= n:
        raise ValueError("need 1 <= k <= n")
    if 2 * k > n:
        return 1.0
    i = np.arange(k)
    return float(1.0 - np.prod((n - k - i) / (n - i)))


def overlap_probability(source, n: int, k: int, trials: int, seed=0, threads=None, confidence: float = 0.95) -> OverlapEstimate:
    """Probability that the top-``k`` index sets of the two coordinates intersect."""
    if trials < 1000:
        raise ValueError("trials must be at least 1000")
    if not 1 <= k <= n:
        raise ValueError("need 1 <= k <= n")

    def hits(c):
        m = c.shape[0]
        if k == n:
            return m
        top1 = np.argpartition(-c[:, :, 0], k - 1, axis=1)[:, :k]
        top2 = np.argpartition(-c[:, :, 1], k - 1, axis=1)[:, :k]
        mark = np.zeros((m, n), dtype=bool)
        np.put_along_axis(mark, top1, True, axis=1)
        return np.count_nonzero(np.take_along_axis(mark, top2, axis=1).any(axis=1))

    h = _cloud_batches(source, n, trials, seed, threads, hits)
    return OverlapEstimate(n, k, trials, h, h / trials, wilson(h, trials, confidence), overlap_independent(n, k))


# -- verdict --------------------------------------------------------------------


class Tag(str, Enum):
    INDEPENDENT = "AsympIndependent"
    DEPENDENT = "AsympDependent"
    INCONCLUSIVE = "Inconclusive"


@dataclass(frozen=True)
class VerdictThresholds:
    """Decision thresholds; defaults are conventions, not theory."""

    lambda_small: float = 0.05
    ci_width: float = 0.05
    lambda_large: float = 0.1
    decay_factor: float = 2.0


@dataclass(frozen=True)
class Verdict:
    tag: Tag
    evidence: dict
    thresholds: VerdictThresholds

    def to_dict(self) -> dict:
        return {"tag": self.tag.value, "evidence": self.evidence, "thresholds": asdict(self.thresholds)}


def dependence_verdict(
    curve: SibuyaCurve | None = None,
    records: Sequence[RecordEstimate] | None = None,
    sums: SumCriterion | None = None,
    thresholds: VerdictThresholds = VerdictThresholds(),
) -> Verdict:
    """Combine the diagnostics into one of three tags.

    ``AsympIndependent`` when every diagnostic present points that way: the
    top-level ``lambda_hat`` is small with a narrow interval, record
    probabilities fall by ``decay_factor`` from the smallest to the largest
    cloud, and the sum statistic falls by the same factor. ``AsympDependent``
    when the lower confidence bound of ``lambda_hat`` exceeds
    ``lambda_large`` at the two highest levels. Otherwise ``Inconclusive``.
    """
    records = list(records or [])
    if curve is None and not records and sums is None:
        raise ValueError("at least one diagnostic is required")
    th = thresholds
    checks: dict[str, bool] = {}
    evidence: dict = {}
    if curve is not None:
        evidence["lambda_u"] = curve.to_dict()
        top, width = curve.lambda_hat[-1], curve.ci[-1, 1] - curve.ci[-1, 0]
        checks["lambda_small"] = bool(top < th.lambda_small and width < th.ci_width)
        lows = curve.ci[-2:, 0]
        checks["lambda_large"] = bool(np.all(lows > th.lambda_large))
    if records:
        recs = sorted(records, key=lambda r: r.n)
        evidence["records"] = [r.to_dict() for r in recs]
        checks["records_decay"] = len(recs) >= 2 and recs[-1].p_hat * th.decay_factor < recs[0].p_hat
    if sums is not None:
        evidence["sums"] = sums.to_dict()
        checks["sums_decay"] = bool(sums.s_hat[-1] * th.decay_factor < sums.s_hat[0])
    evidence["checks"] = checks

    ai = [v for k, v in checks.items() if k != "lambda_large"]
    if checks.get("lambda_large", False):
        tag = Tag.DEPENDENT
    elif ai and all(ai):
        tag = Tag.INDEPENDENT
    else:
        tag = Tag.INCONCLUSIVE
    return Verdict(tag, evidence, th)
