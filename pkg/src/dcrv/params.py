"""Model parameters and the first-kind conditional probabilities.

A model is a base probability vector ``p`` over categories ``1..K`` and a
dependency coefficient ``delta``.  Every variable after the first is drawn
from an altered vector that moves ``delta`` of the mass of the other
categories onto the category the first variable landed in.

Parameters are held as exact :class:`~fractions.Fraction` values so the
enumeration oracle can check identities without rounding noise.  Functions
taking ``exact=False`` evaluate the same quantity in floating point.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational
from typing import Sequence, Union

from .errors import IndexOutOfRange, OutOfRange, SumNotOne, TooFewCategories

Number = Union[int, float, str, Fraction]


def to_fraction(value: Number) -> Fraction:
    """Exact ratio of ``value``; floats go through their shortest repr."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, Rational):
        return Fraction(value)
    if isinstance(value, float):
        if not math.isfinite(value):
            raise OutOfRange(f"non-finite value {value!r}")
        return Fraction(repr(value))
    try:
        return Fraction(str(value).strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise OutOfRange(f"cannot read {value!r} as a number") from exc


@dataclass(frozen=True)
class ModelParams:
    p: tuple[Fraction, ...]
    delta: Fraction

    @property
    def K(self) -> int:
        return len(self.p)

    @functools.cached_property
    def p_float(self) -> tuple[float, ...]:
        return tuple(float(x) for x in self.p)

    @functools.cached_property
    def delta_float(self) -> float:
        return float(self.delta)

    def probs(self, exact: bool = False) -> tuple:
        return self.p if exact else self.p_float

    def coefficient(self, exact: bool = False):
        return self.delta if exact else self.delta_float

    def to_dict(self) -> dict:
        return {"p": list(self.p_float), "delta": self.delta_float, "K": self.K}


@dataclass(frozen=True)
class ConditionalDistribution:
    """Distribution of every later variable given the first equals ``given``."""

    given: int
    probs: tuple


@dataclass(frozen=True)
class MarginalParams:
    """Two-category collapse around focal category ``i``."""

    i: int
    q: object
    q_plus: object
    q_minus: object


@dataclass(frozen=True)
class IdentityReport:
    total_mass_holds: bool
    flow_balance_holds: bool
    total_mass_residual: object
    flow_balance_residual: object

    @property
    def ok(self) -> bool:
        return self.total_mass_holds and self.flow_balance_holds


def new_model(p: Sequence[Number], delta: Number, tolerance: float = 1e-9) -> ModelParams:
    """Validate ``(p, delta)`` and return a model with ``sum(p) == 1`` exactly.

    Raises TooFewCategories, OutOfRange or SumNotOne.
    """
    probs = [to_fraction(x) for x in p]
    if len(probs) < 2:
        raise TooFewCategories(f"need at least 2 categories, got {len(probs)}")
    for idx, x in enumerate(probs, start=1):
        if not 0 < x < 1:
            raise OutOfRange(f"p_{idx} = {float(x)!r} is not strictly inside (0, 1)")
    d = to_fraction(delta)
    if not 0 <= d <= 1:
        raise OutOfRange(f"delta = {float(d)!r} is not in [0, 1]")
    total = sum(probs)
    if abs(total - 1) > to_fraction(tolerance):
        raise SumNotOne(f"probabilities sum to {float(total)!r}, not 1")
    return ModelParams(p=tuple(x / total for x in probs), delta=d)


def _check_category(model: ModelParams, i: int) -> None:
    if not isinstance(i, int) or not 1 <= i <= model.K:
        raise IndexOutOfRange(f"category {i!r} outside 1..{model.K}")


def p_plus(model: ModelParams, i: int, exact: bool = False):
    """Probability of category ``i`` given the first outcome was ``i``."""
    p, d = model.probs(exact), model.coefficient(exact)
    return p[i - 1] + d * (1 - p[i - 1])


def p_minus(model: ModelParams, i: int, exact: bool = False):
    """Probability of category ``i`` given the first outcome was not ``i``."""
    p, d = model.probs(exact), model.coefficient(exact)
    return (1 - d) * p[i - 1]


def conditional_probs(model: ModelParams, given: int, exact: bool = False) -> ConditionalDistribution:
    _check_category(model, given)
    return ConditionalDistribution(given, _conditional_vector(model, given, exact))


@functools.lru_cache(maxsize=1024)
def _conditional_vector(model: ModelParams, given: int, exact: bool) -> tuple:
    return tuple(
        p_plus(model, j, exact) if j == given else p_minus(model, j, exact)
        for j in range(1, model.K + 1)
    )


def conditional_matrix(model: ModelParams, exact: bool = False) -> tuple[tuple, ...]:
    """Row ``i - 1`` is the altered vector given the first outcome ``i``."""
    return tuple(_conditional_vector(model, i, exact) for i in range(1, model.K + 1))


def marginal_params(model: ModelParams, i: int, exact: bool = False) -> MarginalParams:
    _check_category(model, i)
    p, d = model.probs(exact), model.coefficient(exact)
    q = 1 - p[i - 1]
    return MarginalParams(i=i, q=q, q_plus=q + d * p[i - 1], q_minus=q - d * q)


def check_identities(model: ModelParams, exact: bool = True) -> IdentityReport:
    """Check that each altered vector sums to one and preserves ``p_i``.

    The first identity is ``p_i^+ + sum_{l != i} p_l^- = 1``; the second is
    ``p_i p_i^+ + p_i^- sum_{l != i} p_l = p_i``.  Residuals are the largest
    absolute deviation over ``i``; in exact mode a holding identity has
    residual exactly zero, in float mode the threshold is 1e-12.
    """
    p = model.probs(exact)
    mass_res = 0
    balance_res = 0
    for i in range(1, model.K + 1):
        plus = p_plus(model, i, exact)
        others_minus = sum(p_minus(model, l, exact) for l in range(1, model.K + 1) if l != i)
        others = sum(p[l - 1] for l in range(1, model.K + 1) if l != i)
        mass_res = max(mass_res, abs(plus + others_minus - 1))
        balance_res = max(
            balance_res,
            abs(p[i - 1] * plus + p_minus(model, i, exact) * others - p[i - 1]),
        )
    tol = 0 if exact else 1e-12
    return IdentityReport(mass_res <= tol, balance_res <= tol, mass_res, balance_res)
