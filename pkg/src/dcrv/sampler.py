"""Sequence probabilities, lexicographic indexing and inverse-CDF generation.

Sequences are tuples of 1-based categories.  Ordering all ``K**n``
sequences lexicographically and laying their probabilities end to end
partitions [0, 1) into half-open intervals; a single uniform ``u`` picks
the sequence whose interval contains it.  The interval is found level by
level: the current search interval is split in proportion to ``p`` at the
first level and to the altered vector of the first draw afterwards.
"""

from __future__ import annotations

import bisect
import itertools
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational
from typing import Sequence

import numpy as np

from .errors import InvalidSequence, SequenceTooLong, UOutOfRange
from .params import ModelParams, conditional_matrix
from .rng import SplitMix64

DEFAULT_INTERVAL_CAP = 4096


@dataclass(frozen=True)
class SequenceInterval:
    lex_index: int
    lo: Fraction
    hi: Fraction

    @property
    def length(self) -> Fraction:
        return self.hi - self.lo


def validate_sequence(e: Sequence[int], K: int) -> tuple[int, ...]:
    e = tuple(e)
    if not e:
        raise InvalidSequence("sequence must have at least one entry")
    for v in e:
        if isinstance(v, bool) or not isinstance(v, (int, np.integer)) or not 1 <= v <= K:
            raise InvalidSequence(f"entry {v!r} outside 1..{K}")
    return tuple(int(v) for v in e)


def sequence_probability(model: ModelParams, e: Sequence[int], exact: bool = False):
    e = validate_sequence(e, model.K)
    cond = conditional_matrix(model, exact)[e[0] - 1]
    prob = model.probs(exact)[e[0] - 1]
    for v in e[1:]:
        prob *= cond[v - 1]
    return prob


def lex_index(e: Sequence[int], K: int) -> int:
    """1-based position of ``e`` among all sequences of its length."""
    e = validate_sequence(e, K)
    idx = 0
    for v in e:
        idx = idx * K + (v - 1)
    return idx + 1


def lex_sequence(i: int, K: int, n: int) -> tuple[int, ...]:
    if not 1 <= i <= K**n:
        raise InvalidSequence(f"lex index {i} outside 1..{K ** n}")
    i -= 1
    out = []
    for _ in range(n):
        i, r = divmod(i, K)
        out.append(r + 1)
    return tuple(reversed(out))


def all_sequences(K: int, n: int):
    """Every sequence of length ``n`` in lexicographic order."""
    return itertools.product(range(1, K + 1), repeat=n)


def counts(e: Sequence[int], K: int) -> tuple[int, ...]:
    e = validate_sequence(e, K)
    out = [0] * K
    for v in e:
        out[v - 1] += 1
    return tuple(out)


def _cumulative(probs) -> list:
    return list(itertools.accumulate(probs))


def _descend(model: ModelParams, u, n: int, exact: bool, path: list | None = None) -> tuple[int, ...]:
    p = model.probs(exact)
    cond = conditional_matrix(model, exact)
    lo, length = (Fraction(0), Fraction(1)) if exact else (0.0, 1.0)
    probs, cum = p, _cumulative(p)
    seq = []
    for level in range(n):
        edges = [lo + length * c for c in cum]
        # count of edges <= u; ties go to the right-hand interval
        k = min(bisect.bisect_right(edges, u), model.K - 1)
        if k:
            lo = edges[k - 1]
        length = length * probs[k]
        seq.append(k + 1)
        if path is not None:
            path.append((lo, length))
        if level == 0:
            probs = cond[k]
            cum = _cumulative(probs)
    return tuple(seq)


def _check_u(u) -> None:
    if not 0 <= u < 1:
        raise UOutOfRange(f"u = {u!r} is not in [0, 1)")


def sample_inverse(model: ModelParams, n: int, u) -> tuple[int, ...]:
    """The sequence whose probability interval contains ``u``.

    Rational ``u`` (Fraction or int) runs the descent exactly; a float runs
    it in double precision.  A double resolves roughly 52 bits of path, so
    once the search interval is narrower than the spacing of doubles near
    ``u`` the remaining entries are decided by rounding.
    """
    _check_u(u)
    return _descend(model, u, n, exact=isinstance(u, Rational))


def descent_path(model: ModelParams, n: int, u) -> list:
    """``(lo, length)`` of the search interval after each level of the descent."""
    _check_u(u)
    path: list = []
    _descend(model, u, n, exact=isinstance(u, Rational), path=path)
    return path


def sequence_interval(model: ModelParams, e: Sequence[int], cap: int = DEFAULT_INTERVAL_CAP) -> SequenceInterval:
    """Exact ``[lo, hi)`` assigned to ``e``; ``hi - lo`` is its probability."""
    e = validate_sequence(e, model.K)
    if len(e) > cap:
        raise SequenceTooLong(f"length {len(e)} exceeds the cap of {cap}")
    p = model.p
    cond = conditional_matrix(model, exact=True)[e[0] - 1]
    lo = sum(p[: e[0] - 1], Fraction(0))
    length = p[e[0] - 1]
    for v in e[1:]:
        lo += length * sum(cond[: v - 1], Fraction(0))
        length *= cond[v - 1]
    return SequenceInterval(lex_index(e, model.K), lo, lo + length)


def _cumulative_table(model: ModelParams) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    K = model.K
    cum_p = np.array(_cumulative(model.p_float))
    p = np.array(model.p_float)
    cond = np.array(conditional_matrix(model), dtype=np.float64).reshape(K, K)
    cum_cond = np.array([_cumulative(row) for row in conditional_matrix(model)]).reshape(K, K)
    return p, cum_p, cond, cum_cond


def inverse_array(model: ModelParams, n: int, u: np.ndarray) -> np.ndarray:
    """Vectorized float descent: row ``j`` equals ``sample_inverse(model, n, u[j])``."""
    u = np.asarray(u, dtype=np.float64)
    if u.size and (u.min() < 0 or u.max() >= 1):
        raise UOutOfRange("uniform variates must lie in [0, 1)")
    K = model.K
    p, cum_p, cond, cum_cond = _cumulative_table(model)
    m = u.shape[0]
    out = np.empty((m, n), dtype=np.int64)
    lo = np.zeros(m)
    length = np.ones(m)
    rows = np.arange(m)
    first = None
    for level in range(n):
        if level == 0:
            cum, probs = np.broadcast_to(cum_p, (m, K)), np.broadcast_to(p, (m, K))
        else:
            cum, probs = cum_cond[first], cond[first]
        edges = lo[:, None] + length[:, None] * cum
        k = np.minimum((edges <= u[:, None]).sum(axis=1), K - 1)
        lo = np.where(k > 0, edges[rows, np.maximum(k - 1, 0)], lo)
        length = length * probs[rows, k]
        out[:, level] = k + 1
        if level == 0:
            first = k
    return out


def sequential_array(model: ModelParams, n: int, u: np.ndarray) -> np.ndarray:
    """Draw the first entry from ``p`` and each later entry from its own uniform.

    ``u`` has shape ``(m, n)``.
    """
    u = np.asarray(u, dtype=np.float64)
    K = model.K
    _, cum_p, _, cum_cond = _cumulative_table(model)
    m = u.shape[0]
    out = np.empty((m, n), dtype=np.int64)
    first = np.minimum((cum_p[None, :] <= u[:, :1]).sum(axis=1), K - 1)
    out[:, 0] = first + 1
    for level in range(1, n):
        k = np.minimum((cum_cond[first] <= u[:, level : level + 1]).sum(axis=1), K - 1)
        out[:, level] = k + 1
    return out


def sample_array(model: ModelParams, n: int, count: int, seed: int, method: str = "inverse") -> np.ndarray:
    """``count x n`` array of sampled sequences from the SplitMix64 stream for ``seed``.

    ``inverse`` consumes one variate per sequence; ``sequential`` consumes
    ``n`` per sequence, row-major.
    """
    if count < 0:
        raise ValueError("count must be non-negative")
    rng = SplitMix64(seed)
    if method == "inverse":
        return inverse_array(model, n, rng.uniforms(count))
    if method == "sequential":
        return sequential_array(model, n, rng.uniforms(count * n).reshape(count, n))
    raise ValueError(f"unknown sampling method {method!r}")


def sample_many(model: ModelParams, n: int, count: int, seed: int, method: str = "inverse") -> list:
    return [tuple(int(v) for v in row) for row in sample_array(model, n, count, seed, method)]


def counts_array(seqs: np.ndarray, K: int) -> np.ndarray:
    """Per-row category counts of a sequence array."""
    return np.stack([(seqs == c).sum(axis=1) for c in range(1, K + 1)], axis=1)
