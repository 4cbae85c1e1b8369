import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from scipy import stats
from scipy.stats import qmc

settings.register_profile("default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

ACCEPTANCE_LINES: list[str] = []


def report(criterion: int, ok: bool, detail: str) -> None:
    line = f"CRITERION {criterion:>2}: {'PASS' if ok else 'FAIL'} | {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)


def histogram_chi2(density, points, pilot, cells=16, qmc_points=1 << 12, seed=0):
    """Chi-square p-value of a 2-D histogram against per-cell pdf masses.

    The grid covers the box between the 0.25% and 99.75% marginal quantiles
    of an independent pilot sample (about 99% of the mass); everything else
    goes into one outside bin. Cell masses come from scrambled Sobol
    quadrature of the pdf; cells with expected count below 5 are pooled.
    """
    lo = np.quantile(pilot, 0.0025, axis=0)
    hi = np.quantile(pilot, 0.9975, axis=0)
    ex = np.linspace(lo[0], hi[0], cells + 1)
    ey = np.linspace(lo[1], hi[1], cells + 1)
    base = qmc.Sobol(2, scramble=True, seed=seed).random(qmc_points)
    mass = np.empty((cells, cells))
    for i in range(cells):
        for j in range(cells):
            w = np.array([ex[i + 1] - ex[i], ey[j + 1] - ey[j]])
            u = np.array([ex[i], ey[j]]) + base * w
            mass[i, j] = density.pdf(u).mean() * w.prod()
    counts, _, _ = np.histogram2d(points[:, 0], points[:, 1], bins=[ex, ey])
    n = len(points)
    obs = np.r_[counts.ravel(), n - counts.sum()]
    exp = np.r_[mass.ravel(), max(1.0 - mass.sum(), 0.0)] * n
    small = exp < 5
    obs = np.r_[obs[~small], obs[small].sum()]
    exp = np.r_[exp[~small], exp[small].sum()]
    if exp[-1] == 0:
        obs, exp = obs[:-1], exp[:-1]
    exp = exp * obs.sum() / exp.sum()
    return stats.chisquare(obs, exp).pvalue


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
