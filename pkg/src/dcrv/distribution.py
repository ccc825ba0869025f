"""Closed forms of the generalized multinomial distribution.

``X = (X_1, ..., X_K)`` counts how many of the ``n`` dependent draws land
in each category.  Count vectors are plain tuples of non-negative ints.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Sequence

from .errors import (
    BadPositions,
    CountOutOfRange,
    DegenerateVariance,
    InvalidCounts,
    NonFinite,
    TableTooLarge,
)
from .params import ModelParams, _check_category, marginal_params, p_minus, p_plus

# Above this length float evaluation switches to log-space coefficients.
LOG_SPACE_THRESHOLD = 20
DEFAULT_TABLE_CAP = 10**6


class FormulaSource(str, enum.Enum):
    ORACLE_VERIFIED = "oracle_verified"
    PAPER_PRINTED = "paper_printed"


@dataclass(frozen=True)
class MomentSummary:
    mean: tuple
    covariance: tuple
    correlation: tuple
    formula_source: FormulaSource

    def to_dict(self) -> dict:
        return {
            "mean": [float(v) for v in self.mean],
            "covariance": [[float(v) for v in row] for row in self.covariance],
            "correlation": [[float(v) for v in row] for row in self.correlation],
            "formula_source": self.formula_source.value,
        }


@dataclass(frozen=True)
class CrossCovarianceMatrix:
    iota: int
    tau: int
    entries: tuple


def validate_counts(model: ModelParams, n: int, x: Sequence[int]) -> tuple[int, ...]:
    if not isinstance(n, int) or n < 1:
        raise InvalidCounts(f"sequence length must be a positive integer, got {n!r}")
    x = tuple(x)
    if len(x) != model.K:
        raise InvalidCounts(f"expected {model.K} counts, got {len(x)}")
    if any(not isinstance(c, int) or c < 0 for c in x):
        raise InvalidCounts(f"counts must be non-negative integers: {x}")
    if sum(x) != n:
        raise InvalidCounts(f"counts {x} sum to {sum(x)}, not n={n}")
    return x


def compositions(n: int, K: int) -> Iterator[tuple[int, ...]]:
    """All ``K``-part compositions of ``n`` in ascending lexicographic order."""
    if K == 1:
        yield (n,)
        return
    for first in range(n + 1):
        for rest in compositions(n - first, K - 1):
            yield (first,) + rest


def _multinomial(total: int, parts: Sequence[int]) -> int:
    out, left = 1, total
    for k in parts:
        out *= math.comb(left, k)
        left -= k
    return out


def _log_multinomial(total: int, parts: Sequence[int]) -> float:
    return math.lgamma(total + 1) - sum(math.lgamma(k + 1) for k in parts)


def _log_pow(base: float, k: int) -> float:
    if k == 0:
        return 0.0
    if base == 0:
        return -math.inf
    return k * math.log(base)


def pmf(model: ModelParams, n: int, x: Sequence[int], exact: bool = False):
    """P(X = x).

    Conditioning on the first draw ``i`` forces ``x_i >= 1``, so terms with
    ``x_i = 0`` contribute nothing.
    """
    x = validate_counts(model, n, x)
    K = model.K
    p = model.probs(exact)
    plus = [p_plus(model, i, exact) for i in range(1, K + 1)]
    minus = [p_minus(model, i, exact) for i in range(1, K + 1)]
    log_space = not exact and n > LOG_SPACE_THRESHOLD
    total = Fraction(0) if exact else 0.0
    for i in range(K):
        if x[i] == 0:
            continue
        rest = list(x)
        rest[i] -= 1
        if log_space:
            log_term = math.log(p[i]) + _log_multinomial(n - 1, rest) + _log_pow(plus[i], rest[i])
            log_term += sum(_log_pow(minus[j], x[j]) for j in range(K) if j != i)
            total += math.exp(log_term)
        else:
            term = p[i] * _multinomial(n - 1, rest) * plus[i] ** rest[i]
            for j in range(K):
                if j != i:
                    term *= minus[j] ** x[j]
            total += term
    return total


def pmf_table(model: ModelParams, n: int, cap: int = DEFAULT_TABLE_CAP, exact: bool = False) -> list:
    """``[(counts, probability), ...]`` over every composition of ``n``."""
    size = math.comb(n + model.K - 1, model.K - 1)
    if size > cap:
        raise TableTooLarge(f"{size} compositions exceed the cap of {cap}")
    return [(x, pmf(model, n, x, exact)) for x in compositions(n, model.K)]


def marginal_pmf(model: ModelParams, n: int, i: int, k: int, exact: bool = False):
    """P(X_i = k), a generalized binomial.

    Given a first draw of ``i`` the other categories carry ``q^-`` of the
    mass; given any other first draw they carry ``q^+``.
    """
    _check_category(model, i)
    if not isinstance(k, int) or not 0 <= k <= n:
        raise CountOutOfRange(f"count {k!r} outside 0..{n}")
    mp = marginal_params(model, i, exact)
    pi = model.probs(exact)[i - 1]
    plus, minus = p_plus(model, i, exact), p_minus(model, i, exact)
    total = Fraction(0) if exact else 0.0
    if not exact and n > LOG_SPACE_THRESHOLD:
        if k >= 1:
            total += math.exp(
                math.log(pi) + _log_comb(n - 1, k - 1) + _log_pow(plus, k - 1) + _log_pow(mp.q_minus, n - k)
            )
        if k <= n - 1:
            total += math.exp(
                math.log(mp.q) + _log_comb(n - 1, k) + _log_pow(minus, k) + _log_pow(mp.q_plus, n - 1 - k)
            )
        return total
    if k >= 1:
        total += pi * math.comb(n - 1, k - 1) * plus ** (k - 1) * mp.q_minus ** (n - k)
    if k <= n - 1:
        total += mp.q * math.comb(n - 1, k) * minus**k * mp.q_plus ** (n - 1 - k)
    return total


def _log_comb(a: int, b: int) -> float:
    return math.lgamma(a + 1) - math.lgamma(b + 1) - math.lgamma(a - b + 1)


def mgf(model: ModelParams, n: int, t: Sequence[float]) -> float:
    """E[exp(t . X)]."""
    K = model.K
    if len(t) != K:
        raise InvalidCounts(f"expected {K} arguments, got {len(t)}")
    t = [float(v) for v in t]
    if not all(math.isfinite(v) for v in t):
        raise NonFinite("mgf argument must be finite")
    if not any(t):
        # the model is normalized exactly, so skip float rounding at the origin
        return 1.0
    p = model.p_float
    plus = [p_plus(model, i) for i in range(1, K + 1)]
    minus = [p_minus(model, i) for i in range(1, K + 1)]
    try:
        et = [math.exp(v) for v in t]
        total = 0.0
        for i in range(K):
            inner = plus[i] * et[i] + sum(minus[j] * et[j] for j in range(K) if j != i)
            total += p[i] * et[i] * inner ** (n - 1)
    except OverflowError as exc:
        raise NonFinite("mgf overflowed") from exc
    if not math.isfinite(total):
        raise NonFinite("mgf overflowed")
    return total


def mean(model: ModelParams, n: int, exact: bool = False) -> tuple:
    return tuple(n * v for v in model.probs(exact))


def dependence_factor(n: int, delta):
    """Variance inflation over the multinomial: ``n + 2d(n-1) + d^2(n-1)(n-2)``."""
    return n + 2 * delta * (n - 1) + delta**2 * (n - 1) * (n - 2)


def covariance(
    model: ModelParams,
    n: int,
    source: FormulaSource | str = FormulaSource.ORACLE_VERIFIED,
    exact: bool = False,
) -> tuple:
    """K x K covariance of the count vector.

    ``oracle_verified`` sums the pairwise cross-covariances over all
    position pairs.  ``paper_printed`` reproduces a published variant that
    drops the factor 2 on the linear term and uses a different off-diagonal;
    it only agrees with the enumeration at ``delta = 0``.
    """
    source = FormulaSource(source)
    p, d = model.probs(exact), model.coefficient(exact)
    K = model.K
    if source is FormulaSource.ORACLE_VERIFIED:
        c = dependence_factor(n, d)
        return tuple(
            tuple(p[i] * (1 - p[i]) * c if i == j else -p[i] * p[j] * c for j in range(K))
            for i in range(K)
        )
    diag = n + d * (n - 1) + d**2 * (n - 1) * (n - 2)
    off = d * (1 - d) * (n - 2) * (n - 1) - n
    return tuple(
        tuple(p[i] * (1 - p[i]) * diag if i == j else p[i] * p[j] * off for j in range(K))
        for i in range(K)
    )


def correlation(
    model: ModelParams, n: int, source: FormulaSource | str = FormulaSource.ORACLE_VERIFIED
) -> tuple:
    cov = covariance(model, n, source, exact=True)
    K = model.K
    if any(cov[i][i] <= 0 for i in range(K)):
        raise DegenerateVariance("a count has zero variance, correlation undefined")
    return tuple(
        tuple(
            1.0 if i == j else float(cov[i][j]) / math.sqrt(float(cov[i][i] * cov[j][j]))
            for j in range(K)
        )
        for i in range(K)
    )


def moments(
    model: ModelParams, n: int, source: FormulaSource | str = FormulaSource.ORACLE_VERIFIED
) -> MomentSummary:
    source = FormulaSource(source)
    return MomentSummary(
        mean=mean(model, n),
        covariance=covariance(model, n, source),
        correlation=correlation(model, n, source),
        formula_source=source,
    )


def cross_covariance(model: ModelParams, iota: int, tau: int, exact: bool = False) -> CrossCovarianceMatrix:
    """Covariance between the indicator vectors of positions ``iota < tau``.

    The first position carries one factor of ``delta``; two later positions
    are linked only through the first, hence ``delta**2``.
    """
    if not (isinstance(iota, int) and isinstance(tau, int)) or iota < 1 or iota >= tau:
        raise BadPositions(f"need 1 <= iota < tau, got iota={iota!r}, tau={tau!r}")
    p, d = model.probs(exact), model.coefficient(exact)
    scale = d if iota == 1 else d * d
    K = model.K
    entries = tuple(
        tuple(scale * p[i] * (1 - p[i]) if i == j else -scale * p[i] * p[j] for j in range(K))
        for i in range(K)
    )
    return CrossCovarianceMatrix(iota, tau, entries)
