"""Exhaustive-enumeration ground truth in exact rational arithmetic.

Every one of the ``K**n`` sequences is listed with its exact probability;
counts, moments, marginals and covariances are then obtained by direct
summation.  The closed forms in :mod:`dcrv.distribution` are checked
against these sums by :func:`errata_report`.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from . import distribution as dist_mod
from .distribution import FormulaSource, compositions, validate_counts
from .errors import BadPosition, BadPositions, EnumerationTooLarge
from .params import ModelParams, check_identities, conditional_matrix, marginal_params, p_minus, p_plus
from .rng import SplitMix64
from .sampler import all_sequences, counts, descent_path, sample_inverse, sequence_interval, sequence_probability

DEFAULT_ENUMERATION_CAP = 10**6
# Above this many sequences the interval and sampling checks are skipped.
EXHAUSTIVE_SAMPLER_LIMIT = 6561

FLOAT_TOLERANCE = 1e-12


@dataclass(frozen=True)
class ExactDistribution:
    model: ModelParams
    n: int
    masses: tuple[Fraction, ...]

    def items(self):
        """``(sequence, mass)`` pairs in lexicographic order."""
        return zip(all_sequences(self.model.K, self.n), self.masses)

    @functools.cached_property
    def count_distribution(self) -> dict[tuple[int, ...], Fraction]:
        out: dict[tuple[int, ...], Fraction] = {}
        K = self.model.K
        for e, m in self.items():
            x = counts(e, K)
            out[x] = out.get(x, Fraction(0)) + m
        return out


def enumerate_distribution(model: ModelParams, n: int, cap: int = DEFAULT_ENUMERATION_CAP) -> ExactDistribution:
    K = model.K
    if n < 1:
        raise BadPosition(f"sequence length must be positive, got {n}")
    if K**n > cap:
        raise EnumerationTooLarge(f"{K}**{n} sequences exceed the cap of {cap}")
    cond = conditional_matrix(model, exact=True)
    masses: list[Fraction] = []
    for first in range(K):
        block = [model.p[first]]
        for _ in range(n - 1):
            block = [m * c for m in block for c in cond[first]]
        masses.extend(block)
    return ExactDistribution(model, n, tuple(masses))


def oracle_pmf(dist: ExactDistribution, x: Sequence[int]) -> Fraction:
    x = validate_counts(dist.model, dist.n, x)
    return dist.count_distribution.get(x, Fraction(0))


def oracle_moments(dist: ExactDistribution) -> tuple[tuple, tuple]:
    """Exact mean vector and covariance matrix of the counts."""
    K = dist.model.K
    ex = [Fraction(0)] * K
    exx = [[Fraction(0)] * K for _ in range(K)]
    for x, m in dist.count_distribution.items():
        for i in range(K):
            ex[i] += m * x[i]
            for j in range(K):
                exx[i][j] += m * x[i] * x[j]
    cov = tuple(tuple(exx[i][j] - ex[i] * ex[j] for j in range(K)) for i in range(K))
    return tuple(ex), cov


def oracle_position_marginal(dist: ExactDistribution, r: int) -> tuple[Fraction, ...]:
    if not 1 <= r <= dist.n:
        raise BadPosition(f"position {r} outside 1..{dist.n}")
    out = [Fraction(0)] * dist.model.K
    for e, m in dist.items():
        out[e[r - 1] - 1] += m
    return tuple(out)


def oracle_cross_covariance(dist: ExactDistribution, iota: int, tau: int) -> tuple:
    if not 1 <= iota < tau <= dist.n:
        raise BadPositions(f"need 1 <= iota < tau <= {dist.n}, got ({iota}, {tau})")
    K = dist.model.K
    joint = [[Fraction(0)] * K for _ in range(K)]
    for e, m in dist.items():
        joint[e[iota - 1] - 1][e[tau - 1] - 1] += m
    a = oracle_position_marginal(dist, iota)
    b = oracle_position_marginal(dist, tau)
    return tuple(tuple(joint[i][j] - a[i] * b[j] for j in range(K)) for i in range(K))


def oracle_mgf(dist: ExactDistribution, t: Sequence[float]) -> float:
    return math.fsum(
        float(m) * math.exp(sum(ti * xi for ti, xi in zip(t, x)))
        for x, m in dist.count_distribution.items()
    )


def oracle_correlation(dist: ExactDistribution) -> tuple:
    _, cov = oracle_moments(dist)
    K = dist.model.K
    return tuple(
        tuple(1.0 if i == j else float(cov[i][j]) / math.sqrt(float(cov[i][i] * cov[j][j])) for j in range(K))
        for i in range(K)
    )


# Published variants that disagree with enumeration; kept only for the report.


def _statement_marginal(model: ModelParams, n: int, i: int, k: int) -> Fraction:
    """Marginal with the pairing as stated rather than as proved."""
    mp = marginal_params(model, i, exact=True)
    pi = model.p[i - 1]
    total = Fraction(0)
    if k <= n - 1:
        total += mp.q * math.comb(n - 1, k) * p_minus(model, i, True) ** k * mp.q_minus ** (n - 1 - k)
    if k >= 1:
        total += pi * math.comb(n - 1, k - 1) * p_plus(model, i, True) ** (k - 1) * mp.q_plus ** (n - k)
    return total


def _printed_correlation_expression(model: ModelParams, n: int) -> tuple:
    p, d = model.p, model.delta
    ratio = (n - d * (n - 1) * (n - 2)) / (n + d * (n - 1) + d**2 * (n - 1) * (n - 2))
    K = model.K
    return tuple(
        tuple(
            1.0 if i == j else -math.sqrt(float(p[i] * p[j] / ((1 - p[i]) * (1 - p[j])))) * float(ratio)
            for j in range(K)
        )
        for i in range(K)
    )


@dataclass
class FormulaCheck:
    name: str
    role: str  # "verified" or "printed_variant"
    max_deviation: float
    exact: bool
    tolerance: float
    probe_grid: dict = field(default_factory=dict)
    details: dict = field(default_factory=dict)

    @property
    def verdict(self) -> str:
        if self.max_deviation == 0:
            return "exact"
        if not self.exact and self.max_deviation <= self.tolerance:
            return "within_tolerance"
        return "deviates"

    @property
    def passed(self) -> bool:
        return self.verdict != "deviates"

    def to_dict(self) -> dict:
        return {
            "role": self.role,
            "max_deviation": float(self.max_deviation),
            "verdict": self.verdict,
            "tolerance": 0.0 if self.exact else self.tolerance,
            "probe_grid": self.probe_grid,
            **{k: float(v) for k, v in self.details.items()},
        }


@dataclass
class ErrataReport:
    model: ModelParams
    n: int
    checks: dict[str, FormulaCheck]

    @property
    def verified_ok(self) -> bool:
        return all(c.passed for c in self.checks.values() if c.role == "verified")

    def to_dict(self) -> dict:
        return {
            "model": self.model.to_dict(),
            "n": self.n,
            "formulas": {name: c.to_dict() for name, c in self.checks.items()},
            "verified_ok": self.verified_ok,
        }


def _max_abs(pairs) -> Fraction | float:
    return max((abs(a - b) for a, b in pairs), default=0)


def mgf_probe_points(K: int, probes: int, seed: int = 0, scale: float = 0.5) -> list[tuple[float, ...]]:
    """``t = 0`` followed by ``probes`` points uniform on ``[-scale, scale]**K``."""
    rng = SplitMix64(seed)
    pts = [tuple(0.0 for _ in range(K))]
    for _ in range(probes):
        pts.append(tuple(scale * (2 * rng.random() - 1) for _ in range(K)))
    return pts


def errata_report(
    model: ModelParams,
    n: int,
    probes: int = 10,
    seed: int = 0,
    cap: int = DEFAULT_ENUMERATION_CAP,
) -> ErrataReport:
    """Compare every closed form, and the published variants, with enumeration."""
    dist = enumerate_distribution(model, n, cap)
    K = model.K
    comps = list(compositions(n, K))
    checks: dict[str, FormulaCheck] = {}

    def add(name, role, dev, exact=True, grid=None):
        checks[name] = FormulaCheck(name, role, dev, exact, FLOAT_TOLERANCE, grid or {})

    add(
        "pmf",
        "verified",
        _max_abs((dist_mod.pmf(model, n, x, exact=True), oracle_pmf(dist, x)) for x in comps),
        grid={"compositions": len(comps)},
    )

    marg_grid = {"categories": K, "counts": list(range(n + 1))}
    truth = {(i, k): sum((m for x, m in dist.count_distribution.items() if x[i - 1] == k), Fraction(0))
             for i in range(1, K + 1) for k in range(n + 1)}
    add("marginal", "verified",
        _max_abs((dist_mod.marginal_pmf(model, n, i, k, exact=True), v) for (i, k), v in truth.items()),
        grid=marg_grid)
    add("marginal_statement", "printed_variant",
        _max_abs((_statement_marginal(model, n, i, k), v) for (i, k), v in truth.items()),
        grid=marg_grid)

    points = mgf_probe_points(K, probes, seed)
    mgf_dev = 0.0
    for t in points:
        ref = oracle_mgf(dist, t)
        mgf_dev = max(mgf_dev, abs(dist_mod.mgf(model, n, t) - ref) / abs(ref))
    add("mgf", "verified", mgf_dev, exact=False,
        grid={"points": len(points), "seed": seed, "measure": "relative"})

    ex, cov = oracle_moments(dist)
    add("mean", "verified", _max_abs(zip(dist_mod.mean(model, n, exact=True), ex)))
    for source in FormulaSource:
        closed = dist_mod.covariance(model, n, source, exact=True)
        diag = _max_abs((closed[i][i], cov[i][i]) for i in range(K))
        off = _max_abs((closed[i][j], cov[i][j]) for i in range(K) for j in range(K) if i != j)
        add(
            f"covariance_{source.value}",
            "verified" if source is FormulaSource.ORACLE_VERIFIED else "printed_variant",
            max(diag, off),
        )
        checks[f"covariance_{source.value}"].details.update(
            max_diagonal_deviation=diag, max_offdiagonal_deviation=off
        )
    corr = oracle_correlation(dist)
    for source in FormulaSource:
        closed = dist_mod.correlation(model, n, source)
        add(
            f"correlation_{source.value}",
            "verified" if source is FormulaSource.ORACLE_VERIFIED else "printed_variant",
            _max_abs((closed[i][j], corr[i][j]) for i in range(K) for j in range(K)),
            exact=False,
        )
    printed = _printed_correlation_expression(model, n)
    add("correlation_printed_expression", "printed_variant",
        _max_abs((printed[i][j], corr[i][j]) for i in range(K) for j in range(K)), exact=False)

    pairs = [(a, b) for a in range(1, n + 1) for b in range(a + 1, n + 1)]
    cc_dev = Fraction(0)
    for a, b in pairs:
        closed = dist_mod.cross_covariance(model, a, b, exact=True).entries
        ref = oracle_cross_covariance(dist, a, b)
        cc_dev = max(cc_dev, _max_abs((closed[i][j], ref[i][j]) for i in range(K) for j in range(K)))
    add("cross_covariance", "verified", cc_dev, grid={"position_pairs": len(pairs)})
    return ErrataReport(model, n, checks)


@dataclass
class InvariantCheck:
    name: str
    passed: bool
    detail: str = ""

    def to_dict(self) -> dict:
        return {"name": self.name, "passed": self.passed, "detail": self.detail}


def invariant_checks(model: ModelParams, n: int, cap: int = DEFAULT_ENUMERATION_CAP) -> list[InvariantCheck]:
    """Structural properties of one ``(model, n)`` verified by enumeration."""
    dist = enumerate_distribution(model, n, cap)
    K = model.K
    out = []

    total = sum(dist.masses, Fraction(0))
    out.append(InvariantCheck("normalization", total == 1, f"sum of masses = {total}"))

    ident = check_identities(model, exact=True)
    out.append(InvariantCheck("conditional_identities", ident.ok,
                              f"residuals {ident.total_mass_residual}, {ident.flow_balance_residual}"))

    bad = [r for r in range(1, n + 1) if oracle_position_marginal(dist, r) != model.p]
    out.append(InvariantCheck("identical_position_marginals", not bad, f"failing positions {bad}"))

    _, cov = oracle_moments(dist)
    out.append(InvariantCheck("covariance_rows_sum_zero", all(sum(row) == 0 for row in cov)))

    cc_ok = True
    for a in range(1, n + 1):
        for b in range(a + 1, n + 1):
            m = dist_mod.cross_covariance(model, a, b, exact=True).entries
            cc_ok &= all(sum(row) == 0 for row in m) and all(sum(col) == 0 for col in zip(*m))
    out.append(InvariantCheck("cross_covariance_margins_zero", cc_ok))

    if K == 2:
        ok = all(
            dist_mod.pmf(model, n, (k, n - k), exact=True) == dist_mod.marginal_pmf(model, n, 1, k, exact=True)
            for k in range(n + 1)
        )
        out.append(InvariantCheck("binary_reduction", ok))

    if K**n <= EXHAUSTIVE_SAMPLER_LIMIT:
        out.extend(_sampler_checks(dist))
    return out


def _sampler_checks(dist: ExactDistribution) -> list[InvariantCheck]:
    model, n = dist.model, dist.n
    prev_hi = Fraction(0)
    partition_ok = True
    inverse_ok = True
    flow_ok = True
    for e, m in dist.items():
        iv = sequence_interval(model, e)
        partition_ok &= iv.lo == prev_hi and iv.length == m
        prev_hi = iv.hi
        if m == 0:
            continue
        mid = (iv.lo + iv.hi) / 2
        inverse_ok &= sample_inverse(model, n, mid) == e
        inverse_ok &= sample_inverse(model, n, float(mid)) == e or m < 1e-12
        path = descent_path(model, n, mid)
        flow_ok &= all(length == sequence_probability(model, e[: r + 1], exact=True)
                       for r, (_, length) in enumerate(path))
    partition_ok &= prev_hi == 1
    return [
        InvariantCheck("interval_partition", partition_ok),
        InvariantCheck("inverse_hits_midpoints", inverse_ok),
        InvariantCheck("descent_matches_flow", flow_ok),
    ]
