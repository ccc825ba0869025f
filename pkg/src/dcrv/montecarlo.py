"""Monte Carlo checks: chi-square goodness of fit and empirical moments."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import distribution as dist_mod
from .distribution import DEFAULT_TABLE_CAP, FormulaSource
from .errors import DegenerateCells, InvalidCounts
from .params import ModelParams
from .sampler import counts_array, sample_array

MIN_EXPECTED = 5.0

_EPS = 1e-16
_TINY = 1e-300
_MAX_ITER = 10_000


def _gamma_series(a: float, x: float) -> float:
    """Regularized lower incomplete gamma P(a, x) by its power series."""
    term = total = 1.0 / a
    ap = a
    for _ in range(_MAX_ITER):
        ap += 1.0
        term *= x / ap
        total += term
        if abs(term) < abs(total) * _EPS:
            break
    return total * math.exp(-x + a * math.log(x) - math.lgamma(a))


def _gamma_cfrac(a: float, x: float) -> float:
    """Regularized upper incomplete gamma Q(a, x) by modified Lentz."""
    b = x + 1.0 - a
    c = 1.0 / _TINY
    d = 1.0 / b
    h = d
    for i in range(1, _MAX_ITER):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < _TINY:
            d = _TINY
        c = b + an / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            break
    return h * math.exp(-x + a * math.log(x) - math.lgamma(a))


def gammaincc(a: float, x: float) -> float:
    """Q(a, x) = Gamma(a, x) / Gamma(a) for a > 0, x >= 0."""
    if a <= 0:
        raise ValueError("shape must be positive")
    if x < 0:
        raise ValueError("x must be non-negative")
    if x == 0:
        return 1.0
    if x < a + 1.0:
        return max(0.0, 1.0 - _gamma_series(a, x))
    return min(1.0, _gamma_cfrac(a, x))


def chi2_sf(statistic: float, dof: int) -> float:
    return gammaincc(dof / 2.0, statistic / 2.0)


@dataclass(frozen=True)
class GofReport:
    statistic: float
    dof: int
    p_value: float
    samples: int
    cells_merged: int

    def to_dict(self) -> dict:
        return {
            "statistic": self.statistic,
            "dof": self.dof,
            "p_value": self.p_value,
            "samples": self.samples,
            "cells_merged": self.cells_merged,
        }


def pool_cells(expected_counts: Sequence[float]) -> list[list[int]]:
    """Group cell indices so every group expects at least ``MIN_EXPECTED``.

    All low cells go into one pool; if that pool is still short it absorbs
    the lowest remaining cells until it is not.
    """
    order = sorted(range(len(expected_counts)), key=lambda c: (expected_counts[c], c))
    low = [c for c in order if expected_counts[c] < MIN_EXPECTED]
    rest = [c for c in order if expected_counts[c] >= MIN_EXPECTED]
    if low:
        pooled_mass = sum(expected_counts[c] for c in low)
        while pooled_mass < MIN_EXPECTED and rest:
            c = rest.pop(0)
            low.append(c)
            pooled_mass += expected_counts[c]
    groups = [[c] for c in sorted(rest)]
    if low:
        groups.append(sorted(low))
    return groups


def chi_square_gof(observed: Sequence[int], expected: Sequence[float], total: int) -> GofReport:
    observed = [int(o) for o in observed]
    expected = [float(e) for e in expected]
    if len(observed) != len(expected):
        raise InvalidCounts("observed and expected differ in length")
    if abs(math.fsum(expected) - 1.0) > 1e-9:
        raise InvalidCounts("expected probabilities do not sum to 1")
    if sum(observed) != total:
        raise InvalidCounts(f"observed counts sum to {sum(observed)}, not {total}")
    exp_counts = [total * e for e in expected]
    groups = pool_cells(exp_counts)
    if len(groups) < 2:
        raise DegenerateCells("fewer than two cells remain after pooling")
    stat = 0.0
    for g in groups:
        o = sum(observed[c] for c in g)
        e = math.fsum(exp_counts[c] for c in g)
        stat += (o - e) ** 2 / e
    merged = len(groups[-1]) if any(exp_counts[c] < MIN_EXPECTED for c in range(len(exp_counts))) else 0
    dof = len(groups) - 1
    return GofReport(stat, dof, chi2_sf(stat, dof), total, merged)


@dataclass(frozen=True)
class CellRow:
    counts: tuple[int, ...]
    expected_prob: float
    observed: int


@dataclass
class CountTrial:
    report: GofReport
    cells: list[CellRow] = field(default_factory=list)
    seed: int = 0

    def to_dict(self) -> dict:
        out = self.report.to_dict()
        out["seed"] = self.seed
        out["cells"] = [
            {"counts": list(r.counts), "expected_prob": r.expected_prob, "observed": r.observed}
            for r in self.cells
        ]
        return out


def _histogram(seqs: np.ndarray, n: int, K: int, table: list) -> np.ndarray:
    radix = (n + 1) ** np.arange(K, dtype=np.int64)
    keys = counts_array(seqs, K) @ radix if len(seqs) else np.empty(0, dtype=np.int64)
    index = {int(np.dot(x, radix)): c for c, (x, _) in enumerate(table)}
    observed = np.zeros(len(table), dtype=np.int64)
    uniq, freq = np.unique(keys, return_counts=True)
    for key, f in zip(uniq, freq):
        observed[index[int(key)]] += int(f)
    return observed


def run_count_trial(
    model: ModelParams,
    n: int,
    samples: int,
    seed: int,
    expected_model: ModelParams | None = None,
    cap: int = DEFAULT_TABLE_CAP,
    method: str = "inverse",
) -> CountTrial:
    """Sample count vectors and test them against the closed-form PMF.

    ``expected_model`` defaults to ``model``; passing a different model
    measures the power of the test against a misspecified law.
    """
    table = dist_mod.pmf_table(expected_model or model, n, cap)
    seqs = sample_array(model, n, samples, seed, method)
    observed = _histogram(seqs, n, model.K, table)
    probs = [float(v) for _, v in table]
    # float table sums to 1 only up to rounding
    s = math.fsum(probs)
    probs = [v / s for v in probs]
    report = chi_square_gof(observed.tolist(), probs, samples)
    cells = [CellRow(x, pr, int(o)) for (x, _), pr, o in zip(table, probs, observed)]
    return CountTrial(report, cells, seed)


@dataclass
class MomentCheck:
    samples: int
    mean: np.ndarray
    covariance: np.ndarray
    mean_se: np.ndarray
    covariance_se: np.ndarray
    reference_mean: np.ndarray
    reference_covariance: np.ndarray

    @staticmethod
    def _z(est, ref, se):
        diff = est - ref
        with np.errstate(divide="ignore", invalid="ignore"):
            z = np.where(se > 0, diff / se, np.where(np.isclose(diff, 0, atol=1e-12), 0.0, np.inf))
        return z

    @property
    def mean_z(self) -> np.ndarray:
        return self._z(self.mean, self.reference_mean, self.mean_se)

    @property
    def covariance_z(self) -> np.ndarray:
        return self._z(self.covariance, self.reference_covariance, self.covariance_se)

    def to_dict(self) -> dict:
        return {
            "samples": self.samples,
            "mean": self.mean.tolist(),
            "covariance": self.covariance.tolist(),
            "mean_se": self.mean_se.tolist(),
            "covariance_se": self.covariance_se.tolist(),
            "mean_z": self.mean_z.tolist(),
            "covariance_z": self.covariance_z.tolist(),
        }


def empirical_moments(
    model: ModelParams,
    n: int,
    samples: int,
    seed: int,
    source: FormulaSource | str = FormulaSource.ORACLE_VERIFIED,
    method: str = "inverse",
) -> MomentCheck:
    """Sample mean and unbiased covariance of the counts, with standard errors."""
    if samples < 2:
        raise ValueError("need at least two samples")
    X = counts_array(sample_array(model, n, samples, seed, method), model.K).astype(np.float64)
    mu = X.mean(axis=0)
    cov = np.cov(X, rowvar=False, ddof=1)
    D = X - mu
    prods = D[:, :, None] * D[:, None, :]
    cov_se = prods.std(axis=0, ddof=1) / math.sqrt(samples)
    mean_se = np.sqrt(np.diag(cov) / samples)
    return MomentCheck(
        samples=samples,
        mean=mu,
        covariance=cov,
        mean_se=mean_se,
        covariance_se=cov_se,
        reference_mean=np.array(dist_mod.mean(model, n), dtype=np.float64),
        reference_covariance=np.array(dist_mod.covariance(model, n, source), dtype=np.float64),
    )
