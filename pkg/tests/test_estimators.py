import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from numpy.testing import assert_allclose
from scipy import stats

from startail.density import ComonotoneGaussian, MetaTDensity, gaussian, pareto_disk
from startail.errors import InsufficientSample, InsufficientTail
from startail.estimators import (
    RecordEstimate,
    SumCriterion,
    Tag,
    VerdictThresholds,
    dependence_verdict,
    empirical_copula,
    lambda_u_curve,
    overlap_independent,
    overlap_probability,
    ranks,
    record_probability,
    sibuya_function,
    sum_criterion,
    wilson,
)

# lambda_U(q) of the spherical Cauchy copula: P{Z1 > t, Z2 > t} / P{Z2 > t} with t the Cauchy
# q-quantile, by 2-D quadrature of the bivariate Cauchy density (limit 1 - sqrt(2)/2).
META_CAUCHY_LAMBDA = {0.99: 0.29295138606074284, 0.995: 0.2929077587416806, 0.999: 0.29289380039979934}


def independent(n, seed):
    return np.random.default_rng(seed).random((n, 2))


@pytest.fixture(scope="module")
def uniform_pairs():
    return independent(10**6, 1)


# -- helpers ------------------------------------------------------------------------


def test_wilson_matches_closed_form():
    k, n, z = 7, 50, stats.norm.ppf(0.975)
    p = k / n
    centre = (p + z * z / (2 * n)) / (1 + z * z / n)
    half = z / (1 + z * z / n) * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n))
    assert_allclose(wilson(k, n), (centre - half, centre + half), rtol=1e-10)
    assert wilson(0, 0) == (0.0, 1.0)


def test_ranks_ties_by_order():
    r = ranks(np.array([[1.0, 5.0], [1.0, 2.0], [0.0, 2.0]]))
    assert r.tolist() == [[2, 3], [3, 1], [1, 2]]


def test_sibuya_identity(uniform_pairs):
    x = uniform_pairs[:20000]
    n = len(x)
    for s in (0.01, 0.05, 0.2, 0.5):
        lhs = sibuya_function(x, s)
        rhs = 1 + empirical_copula(x, 1 - s, 1 - s) - 2 * (1 - s)
        assert abs(lhs - rhs) <= 2 / n


# -- tail dependence curve ----------------------------------------------------------


def test_lambda_comonotone():
    z = np.random.default_rng(2).standard_normal(5000)
    c = lambda_u_curve(np.column_stack([z, np.exp(z)]), [0.5, 0.9, 0.99])
    assert np.all(c.lambda_hat == 1.0)


def test_lambda_independent(uniform_pairs):
    q = np.array([0.5, 0.9, 0.99])
    c = lambda_u_curve(uniform_pairs, q)
    assert 0.0 <= c.lambda_hat[-1] <= 0.05
    assert np.all((c.ci[:, 0] <= 1 - q) & (1 - q <= c.ci[:, 1]))


def test_lambda_meta_cauchy():
    x = MetaTDensity(1.0).sample(10**6, seed=3)
    c = lambda_u_curve(x, [0.99, 0.995])
    assert abs(c.lambda_hat[1] - 0.29) <= 0.05
    for q, (lo, hi) in zip(c.q_grid, c.ci):
        assert lo - 0.01 <= META_CAUCHY_LAMBDA[q] <= hi + 0.01


def test_lambda_curve_invariants(uniform_pairs):
    q = np.linspace(0.5, 0.999, 12)
    c = lambda_u_curve(uniform_pairs[:100000], q)
    assert np.all((0 <= c.lambda_hat) & (c.lambda_hat <= 1))
    assert np.all((c.ci[:, 0] <= c.lambda_hat) & (c.lambda_hat <= c.ci[:, 1]))
    assert np.all(np.diff(c.n_effective) < 0)
    d = c.to_dict()
    assert set(d) == {"grid", "estimates", "ci", "params"}


@given(st.integers(0, 2**32 - 1), st.sampled_from(["exp", "cube", "affine", "logistic"]))
def test_lambda_rank_invariance(seed, kind):
    x = np.random.default_rng(seed).standard_normal((2000, 2))
    x[:, 1] += 0.5 * x[:, 0]
    f = {
        "exp": np.exp,
        "cube": lambda v: v**3,
        "affine": lambda v: 3.0 * v - 7.0,
        "logistic": lambda v: 1 / (1 + np.exp(-v)),
    }[kind]
    q = [0.5, 0.9, 0.98]
    a = lambda_u_curve(x, q)
    b = lambda_u_curve(f(x), q)
    assert a.lambda_hat.tobytes() == b.lambda_hat.tobytes()
    assert a.ci.tobytes() == b.ci.tobytes()


def test_lambda_errors(uniform_pairs):
    with pytest.raises(InsufficientSample):
        lambda_u_curve(uniform_pairs[:999], [0.5])
    with pytest.raises(InsufficientTail):
        lambda_u_curve(uniform_pairs[:10000], [0.9, 0.999])
    with pytest.raises(ValueError):
        lambda_u_curve(uniform_pairs[:10000], [0.9, 0.5])
    with pytest.raises(ValueError):
        lambda_u_curve(uniform_pairs[:10000], [1.0])


# -- sum criterion ------------------------------------------------------------------


def test_sum_criterion_gaussian():
    res = sum_criterion(gaussian(), [10**2, 10**3, 10**4], 10**7, seed=4)
    assert np.all(np.diff(res.s_hat) < 0)
    # oracle: X1 + X2 ~ N(0, 2), so s(n) = n * Phi-bar(sqrt(2) z_{1-1/n})
    n = np.array([1e2, 1e3, 1e4])
    oracle = n * stats.norm.sf(math.sqrt(2) * stats.norm.isf(1 / n))
    se = np.sqrt(oracle * n / 1e7)
    assert np.all(np.abs(res.s_hat - oracle) < 4 * se + 0.1 * oracle)


def test_sum_criterion_comonotone():
    res = sum_criterion(ComonotoneGaussian(), [10, 100, 1000], 10**5, seed=5)
    assert_allclose(res.s_hat, 1.0, atol=0.02)


def test_sum_criterion_heavy_no_decay():
    res = sum_criterion(pareto_disk(1.0), [10**2, 10**4], 10**6, seed=6)
    assert res.s_hat[-1] > 0.5 * res.s_hat[0] and res.s_hat[-1] > 0.2


def test_sum_criterion_points_and_errors(uniform_pairs):
    res = sum_criterion(None, [10, 100], 0, points=uniform_pairs[:20000])
    assert res.n_big == 20000 and isinstance(res, SumCriterion)
    assert np.all(res.s_hat >= 0)
    with pytest.raises(InsufficientSample):
        sum_criterion(gaussian(), [10**4], 10**5)
    with pytest.raises(ValueError):
        sum_criterion(gaussian(), [1], 10**5)


# -- records ------------------------------------------------------------------------


@pytest.mark.parametrize("n, trials", [(10, 10**5), (100, 10**5), (1000, 20000)])
def test_record_exact_under_independence(n, trials):
    rec = record_probability(independent, n, trials, seed=7)
    half = 0.5 * (rec.ci[1] - rec.ci[0])
    assert abs(rec.p_hat - 1 / n) <= half
    assert rec.ci[0] <= rec.p_hat <= rec.ci[1]


def test_record_comonotone():
    assert record_probability(ComonotoneGaussian(), 50, 1000, seed=8).p_hat == 1.0


def test_record_decays_gaussian_rho():
    dens = gaussian(0.1)
    small = record_probability(dens, 10**2, 10**4, seed=9)
    large = record_probability(dens, 10**4, 2000, seed=9)
    assert large.p_hat < small.p_hat / 2


def test_record_thread_invariant():
    a = record_probability(independent, 700, 5000, seed=10, threads=1)
    b = record_probability(independent, 700, 5000, seed=10, threads=4)
    assert a == b


def test_record_errors():
    with pytest.raises(ValueError):
        record_probability(independent, 10, 999)
    with pytest.raises(ValueError):
        record_probability(independent, 0, 1000)


# -- overlaps -----------------------------------------------------------------------


def test_overlap_formula_enumeration():
    # brute force over all placements of the two top-2 sets among 6 indices
    sets = list(itertools.combinations(range(6), 2))
    hit = sum(bool(set(a) & set(b)) for a in sets for b in sets)
    assert_allclose(hit / len(sets) ** 2, 0.6)
    assert_allclose(overlap_independent(6, 2), 0.6)
    assert overlap_independent(10, 10) == 1.0
    assert overlap_independent(10, 6) == 1.0


@pytest.mark.parametrize("n, k", [(20, 3), (100, 5)])
def test_overlap_matches_formula(n, k):
    est = overlap_probability(independent, n, k, 20000, seed=11)
    assert est.ci[0] <= overlap_independent(n, k) <= est.ci[1]
    assert_allclose(est.independent, overlap_independent(n, k))


def test_overlap_comonotone_and_full():
    assert overlap_probability(ComonotoneGaussian(), 50, 3, 1000, seed=12).p_hat == 1.0
    assert overlap_probability(independent, 8, 8, 1000, seed=12).p_hat == 1.0


def test_overlap_k1_is_record():
    a = overlap_probability(independent, 30, 1, 2000, seed=13)
    b = record_probability(independent, 30, 2000, seed=13)
    assert a.hits == b.hits


def test_overlap_errors():
    with pytest.raises(ValueError):
        overlap_probability(independent, 10, 0, 1000)
    with pytest.raises(ValueError):
        overlap_probability(independent, 10, 11, 1000)
    with pytest.raises(ValueError):
        overlap_probability(independent, 10, 2, 10)


# -- verdict ------------------------------------------------------------------------


def _record(n, p, trials=10**4):
    k = round(p * trials)
    return RecordEstimate(n, trials, k, k / trials, wilson(k, trials))


def test_verdict_gaussian():
    x = gaussian().sample(10**6, seed=14)
    curve = lambda_u_curve(x, [0.9, 0.99, 0.999])
    recs = [record_probability(gaussian(), n, 2000, seed=15) for n in (10**2, 10**4)]
    v = dependence_verdict(curve, recs)
    assert v.tag is Tag.INDEPENDENT


def test_verdict_meta_cauchy():
    x = MetaTDensity(1.0).sample(10**6, seed=16)
    curve = lambda_u_curve(x, [0.9, 0.99, 0.995])
    v = dependence_verdict(curve)
    assert v.tag is Tag.DEPENDENT
    assert v.to_dict()["tag"] == "AsympDependent"


def test_verdict_tiny_sample_inconclusive():
    x = gaussian().sample(1000, seed=17)
    curve = lambda_u_curve(x, [0.5, 0.98])
    assert dependence_verdict(curve).tag is Tag.INCONCLUSIVE


def test_verdict_pure_function_of_evidence():
    recs = [_record(100, 0.02), _record(10000, 0.005)]
    assert dependence_verdict(records=recs).tag is Tag.INDEPENDENT
    strict = VerdictThresholds(decay_factor=5.0)
    assert dependence_verdict(records=recs, thresholds=strict).tag is Tag.INCONCLUSIVE
    flat = [_record(100, 0.5), _record(10000, 0.45)]
    assert dependence_verdict(records=flat).tag is Tag.INCONCLUSIVE
    with pytest.raises(ValueError):
        dependence_verdict()
