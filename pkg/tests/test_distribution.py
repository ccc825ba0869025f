import math
from fractions import Fraction as F

import numpy as np
import pytest
from scipy import stats

from dcrv import (
    compositions,
    correlation,
    covariance,
    cross_covariance,
    marginal_pmf,
    mean,
    mgf,
    new_model,
    pmf,
    pmf_table,
)
from dcrv.distribution import FormulaSource, dependence_factor
from dcrv.errors import BadPositions, CountOutOfRange, InvalidCounts, TableTooLarge

from conftest import brute_count_law, brute_sequence_law


def multinomial_pmf(p, x):
    n = sum(x)
    coef = math.factorial(n)
    for k in x:
        coef //= math.factorial(k)
    out = coef
    for pi, k in zip(p, x):
        out *= pi**k
    return out


# pmf


def test_pmf_independent_binary():
    assert pmf(new_model([0.5, 0.5], 0), 2, (1, 1)) == pytest.approx(0.5, abs=1e-15)


def test_pmf_uniform_example(uniform3):
    law = brute_count_law(uniform3.p, uniform3.delta, 2)
    assert law[(0, 1, 1)] == F(1, 9)
    assert pmf(uniform3, 2, (0, 1, 1), exact=True) == F(1, 9)
    assert pmf(uniform3, 2, (0, 1, 1)) == pytest.approx(1 / 9, abs=1e-15)


@pytest.mark.parametrize("K", [2, 3, 4])
@pytest.mark.parametrize("n", [1, 2, 5, 8])
def test_pmf_normalizes(K, n):
    p = [F(i + 1, K * (K + 1) // 2) for i in range(K)]
    m = new_model(p, F(3, 7))
    assert sum(pmf(m, n, x, exact=True) for x in compositions(n, K)) == 1
    assert math.fsum(pmf(m, n, x) for x in compositions(n, K)) == pytest.approx(1, abs=1e-10)


@pytest.mark.parametrize("n", range(1, 6))
def test_pmf_matches_brute_force(skewed3, n):
    law = brute_count_law(skewed3.p, skewed3.delta, n)
    for x in compositions(n, 3):
        assert pmf(skewed3, n, x, exact=True) == law.get(x, 0)


def test_pmf_independence_reduction():
    m = new_model([0.1, 0.2, 0.3, 0.4], 0)
    for x in compositions(6, 4):
        assert pmf(m, 6, x) == pytest.approx(float(multinomial_pmf(m.p, x)), abs=1e-12)


def test_pmf_binary_equals_marginal():
    m = new_model([0.35, 0.65], 0.45)
    for k in range(8):
        assert pmf(m, 7, (k, 7 - k)) == pytest.approx(marginal_pmf(m, 7, 1, k), abs=1e-12)


def test_pmf_log_space_large_n():
    m = new_model([0.2, 0.3, 0.5], 0.3)
    n = 30
    for x in [(10, 10, 10), (0, 0, 30), (30, 0, 0), (3, 7, 20)]:
        exact = float(pmf(m, n, x, exact=True))
        assert pmf(m, n, x) == pytest.approx(exact, rel=1e-10, abs=1e-300)


def test_pmf_perfect_dependence_log_space():
    m = new_model([0.25, 0.75], 1)
    assert pmf(m, 30, (30, 0)) == pytest.approx(0.25, rel=1e-12)
    assert pmf(m, 30, (29, 1)) == 0.0


@pytest.mark.parametrize("x", [(1, 1), (1, 0, 0), (-1, 3, 0), (1, 1, 1)])
def test_pmf_invalid_counts(x):
    with pytest.raises(InvalidCounts):
        pmf(new_model([0.2, 0.3, 0.5], 0.1), 2, x)


# pmf_table


def test_table_single_draw_is_p():
    m = new_model([0.4, 0.6], 0.3)
    table = pmf_table(m, 1)
    assert [x for x, _ in table] == [(0, 1), (1, 0)]
    assert dict(table)[(1, 0)] == pytest.approx(0.4)
    assert dict(table)[(0, 1)] == pytest.approx(0.6)


def test_table_sizes_and_order(uniform3):
    t = pmf_table(uniform3, 2)
    assert len(t) == 6
    assert [x for x, _ in t] == sorted(x for x, _ in t)
    assert sum(v for _, v in t) == pytest.approx(1, abs=1e-12)
    assert len(pmf_table(uniform3, 40)) == 861


def test_table_cap():
    with pytest.raises(TableTooLarge):
        pmf_table(new_model([0.2, 0.3, 0.5], 0.1), 40, cap=860)


# marginal


def test_marginal_independence_is_binomial():
    m = new_model([0.2, 0.3, 0.5], 0)
    for k in range(9):
        assert marginal_pmf(m, 8, 3, k) == pytest.approx(stats.binom.pmf(k, 8, 0.5), abs=1e-12)


def test_marginal_matches_joint_table(skewed3):
    n = 4
    law = brute_count_law(skewed3.p, skewed3.delta, n)
    for i in range(1, 4):
        for k in range(n + 1):
            expect = sum(v for x, v in law.items() if x[i - 1] == k)
            assert marginal_pmf(skewed3, n, i, k, exact=True) == expect
            assert marginal_pmf(skewed3, n, i, k) == pytest.approx(float(expect), abs=1e-12)


def test_marginal_perfect_dependence():
    m = new_model([0.2, 0.3, 0.5], 1)
    n = 6
    for k in range(n + 1):
        expect = {0: 0.8, n: 0.2}.get(k, 0.0)
        assert marginal_pmf(m, n, 1, k) == pytest.approx(expect, abs=1e-15)


def test_marginal_log_space_matches_exact():
    m = new_model([0.2, 0.3, 0.5], 0.6)
    for k in (0, 1, 12, 24, 25):
        assert marginal_pmf(m, 25, 2, k) == pytest.approx(float(marginal_pmf(m, 25, 2, k, exact=True)), rel=1e-10)


def test_marginal_errors():
    m = new_model([0.5, 0.5], 0.1)
    with pytest.raises(CountOutOfRange):
        marginal_pmf(m, 3, 1, 4)
    with pytest.raises(Exception):
        marginal_pmf(m, 3, 3, 1)


# mgf


def test_mgf_at_zero():
    assert mgf(new_model([0.2, 0.3, 0.5], 0.6), 5, (0, 0, 0)) == 1.0


def test_mgf_independence():
    m = new_model([0.2, 0.3, 0.5], 0)
    t = (0.3, -0.7, 0.1)
    base = sum(float(pi) * math.exp(ti) for pi, ti in zip(m.p, t))
    assert mgf(m, 6, t) == pytest.approx(base**6, rel=1e-12)


def test_mgf_matches_sequence_expectation():
    m = new_model([0.2, 0.3, 0.5], 0.6)
    t = (0.1, -0.2, 0.3)
    law = brute_sequence_law(m.p, m.delta, 3)
    assert len(law) == 27
    expect = math.fsum(float(v) * math.exp(sum(t[c - 1] for c in e)) for e, v in law.items())
    assert mgf(m, 3, t) == pytest.approx(expect, rel=1e-12)


def test_mgf_gradient_is_mean():
    m = new_model([0.2, 0.3, 0.5], 0.4)
    n, h = 7, 1e-5
    for i in range(3):
        tp = [0.0] * 3
        tm = [0.0] * 3
        tp[i], tm[i] = h, -h
        grad = (mgf(m, n, tp) - mgf(m, n, tm)) / (2 * h)
        assert grad == pytest.approx(n * float(m.p[i]), rel=1e-5)


# moments


def test_mean_example():
    assert mean(new_model([0.2, 0.3, 0.5], 0.9), 5) == pytest.approx((1.0, 1.5, 2.5))
    assert mean(new_model([0.2, 0.3, 0.5], 0.0), 5) == mean(new_model([0.2, 0.3, 0.5], 0.9), 5)


def test_mean_matches_enumeration(skewed3):
    law = brute_count_law(skewed3.p, skewed3.delta, 4)
    for i in range(3):
        assert mean(skewed3, 4, exact=True)[i] == sum(v * x[i] for x, v in law.items())


def _brute_cov(p, delta, n):
    law = brute_count_law(p, delta, n)
    K = len(p)
    ex = [sum(v * x[i] for x, v in law.items()) for i in range(K)]
    return [[sum(v * x[i] * x[j] for x, v in law.items()) - ex[i] * ex[j] for j in range(K)] for i in range(K)]


def test_covariance_independence_both_sources():
    m = new_model([0.2, 0.3, 0.5], 0)
    n = 5
    for source in FormulaSource:
        c = covariance(m, n, source)
        for i in range(3):
            for j in range(3):
                pi, pj = float(m.p[i]), float(m.p[j])
                expect = n * pi * (1 - pi) if i == j else -n * pi * pj
                assert c[i][j] == pytest.approx(expect, abs=1e-12)


def test_covariance_perfect_dependence():
    m = new_model([0.5, 0.5], 1)
    assert _brute_cov(m.p, m.delta, 3)[0][0] == F(9, 4)
    assert covariance(m, 3)[0][0] == 2.25
    assert covariance(m, 3, "paper_printed")[0][0] == 1.75


def test_covariance_matches_enumeration(skewed3):
    assert [list(r) for r in covariance(skewed3, 4, exact=True)] == _brute_cov(skewed3.p, skewed3.delta, 4)
    for row in covariance(skewed3, 4, exact=True):
        assert sum(row) == 0


def test_dependence_factor_sums_cross_covariances():
    for n in range(1, 8):
        for d in (F(0), F(1, 3), F(1)):
            pairs = sum(d if a == 1 else d * d for a in range(1, n + 1) for b in range(a + 1, n + 1))
            assert dependence_factor(n, d) == n + 2 * pairs


def test_correlation_closed_form():
    m = new_model([0.2, 0.3, 0.5], 0.7)
    r = correlation(m, 6)
    p = [float(v) for v in m.p]
    for i in range(3):
        assert r[i][i] == 1.0
        for j in range(3):
            if i != j:
                assert r[i][j] == pytest.approx(-math.sqrt(p[i] * p[j] / ((1 - p[i]) * (1 - p[j]))), abs=1e-12)


def test_correlation_matches_enumeration(skewed3):
    c = _brute_cov(skewed3.p, skewed3.delta, 4)
    r = correlation(skewed3, 4)
    for i in range(3):
        for j in range(3):
            assert r[i][j] == pytest.approx(float(c[i][j]) / math.sqrt(float(c[i][i] * c[j][j])), abs=1e-12)


def test_correlation_binary_is_minus_one():
    r = correlation(new_model([0.1, 0.9], 0.35), 9)
    assert r[0][1] == pytest.approx(-1.0, abs=1e-15)


def test_correlation_independence_is_multinomial():
    m = new_model([0.2, 0.3, 0.5], 0)
    c = np.array(covariance(m, 4))
    expect = c / np.sqrt(np.outer(np.diag(c), np.diag(c)))
    np.testing.assert_allclose(np.array(correlation(m, 4)), expect, atol=1e-12)
    np.testing.assert_allclose(np.array(correlation(m, 4, "paper_printed")), expect, atol=1e-12)


# cross covariance


def test_cross_covariance_worked_example(uniform3):
    e = cross_covariance(uniform3, 1, 2, exact=True).entries
    for i in range(3):
        for j in range(3):
            assert e[i][j] == (F(1, 9) if i == j else F(-1, 18))


def test_cross_covariance_independence_zero():
    m = new_model([0.2, 0.3, 0.5], 0)
    for a, b in [(1, 2), (2, 3), (4, 9)]:
        assert all(v == 0 for row in cross_covariance(m, a, b, exact=True).entries for v in row)


def test_cross_covariance_later_positions(skewed3):
    law = brute_sequence_law(skewed3.p, skewed3.delta, 3)
    joint = [[sum(v for e, v in law.items() if e[1] == i and e[2] == j) for j in (1, 2, 3)] for i in (1, 2, 3)]
    expect = [[joint[i][j] - skewed3.p[i] * skewed3.p[j] for j in range(3)] for i in range(3)]
    assert [list(r) for r in cross_covariance(skewed3, 2, 3, exact=True).entries] == expect
    got = cross_covariance(skewed3, 2, 3).entries
    for i in range(3):
        for j in range(3):
            assert got[i][j] == pytest.approx(float(expect[i][j]), abs=1e-12)


def test_cross_covariance_margins_zero(skewed3):
    for a, b in [(1, 2), (1, 5), (2, 3), (3, 7)]:
        e = cross_covariance(skewed3, a, b).entries
        for row in e:
            assert abs(sum(row)) < 1e-12
        for col in zip(*e):
            assert abs(sum(col)) < 1e-12


@pytest.mark.parametrize("a, b", [(2, 2), (3, 2), (0, 1)])
def test_cross_covariance_bad_positions(a, b):
    with pytest.raises(BadPositions):
        cross_covariance(new_model([0.5, 0.5], 0.2), a, b)
