"""Majorant functionals beta_n built from a coefficient sequence.

Variants ``b1`` to ``b6`` are the standard majorants::

    b1 = |a_n|
    b2 = sum_{k=n}^{n+N} |a_k|
    b3 = sum_{v=0}^{N} |a_{floor(c^v n)}|
    b4 = |a_n| + sum_{k=n+1}^{[cn]} |a_k| / k
    b5 = sum_{k=[n/c]}^{[cn]} |a_k| / k
    b6 = (1/ln n) max_{m >= [n/c]} (ln m / m) sum_{k=m}^{2m} |a_k|

Brackets are floors and ``[n/c]`` is clamped to at least 1. The maximum in
``b6`` runs over ``[n/c] <= m <= horizon`` and is rejected when it sits on
the horizon, since then the truncated value certifies nothing.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, NamedTuple

import numpy as np

from ._numerics import TailFit, fit_tail
from .sequences import CoefficientSequence

__all__ = ["BetaSpec", "BetaError", "beta", "beta_array", "b6_argmax", "beta_series_tail", "SeriesTail"]

VARIANTS = ("b1", "b2", "b3", "b4", "b5", "b6", "custom")


class BetaError(ValueError):
    """Invalid majorant request or a truncation that cannot be certified."""


@dataclass(frozen=True)
class BetaSpec:
    variant: str = "b1"
    N: int = 0
    c: float = 2.0
    horizon: int = 1 << 16
    custom: Callable[[CoefficientSequence, int], float] | None = field(default=None, compare=False)
    strict_integer: bool = False

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise BetaError(f"unknown beta variant {self.variant!r}")
        if self.variant in ("b3", "b4", "b5", "b6") and not self.c > 1:
            raise BetaError("beta parameter c must exceed 1")
        if self.N < 0:
            raise BetaError("beta parameter N must be nonnegative")
        if self.horizon < 2:
            raise BetaError("beta horizon must be at least 2")
        if self.variant == "custom" and self.custom is None:
            raise BetaError("custom beta needs a callable")
        if self.variant == "b3" and self.strict_integer and float(self.c) != int(self.c):
            raise BetaError("b3 in strict-integer mode needs an integer c")

    @property
    def flags(self) -> list[str]:
        if self.variant == "b3" and float(self.c) != int(self.c):
            return ["b3-real-c-floored"]
        return []

    def to_dict(self) -> dict:
        if self.variant == "custom":
            raise BetaError("custom majorants are not serialisable")
        out: dict = {"variant": self.variant}
        if self.variant in ("b2", "b3"):
            out["N"] = self.N
        if self.variant in ("b3", "b4", "b5", "b6"):
            out["c"] = self.c
        if self.variant == "b6":
            out["horizon"] = self.horizon
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_json(cls, obj: str | Mapping) -> "BetaSpec":
        if isinstance(obj, str):
            obj = json.loads(obj)
        obj = dict(obj)
        unknown = set(obj) - {"variant", "N", "c", "horizon"}
        if unknown:
            raise BetaError(f"unknown beta fields {sorted(unknown)}")
        kwargs = {"variant": obj.get("variant", "b1")}
        if "N" in obj:
            kwargs["N"] = int(obj["N"])
        if "c" in obj:
            kwargs["c"] = float(obj["c"])
        if "horizon" in obj:
            kwargs["horizon"] = int(obj["horizon"])
        return cls(**kwargs)


def _lower(n: np.ndarray, c: float) -> np.ndarray:
    return np.maximum(np.floor(n / c), 1).astype(np.int64)


def _upper(n: np.ndarray, c: float) -> np.ndarray:
    return np.floor(n * c).astype(np.int64)


class _Windows:
    """Window sums of |a_k| * w_k over 1..top via extended-precision suffix sums."""

    def __init__(self, terms: np.ndarray):
        acc = np.zeros(len(terms) + 2, dtype=np.longdouble)
        acc[1:-1] = np.cumsum(np.asarray(terms, dtype=np.longdouble)[::-1])[::-1]
        self._suf = acc  # _suf[k] = sum_{j >= k} terms[j-1], k in 1..top+1

    def __call__(self, lo, hi) -> np.ndarray:
        lo = np.asarray(lo)
        hi = np.asarray(hi)
        out = self._suf[lo] - self._suf[hi + 1]
        return np.where(hi >= lo, out, 0).astype(float)


def _b6_profile(seq: CoefficientSequence, horizon: int) -> np.ndarray:
    """g[m] = (ln m / m) sum_{k=m}^{2m} |a_k| for m = 1..horizon (index 0 unused)."""
    absval = seq.abs_values(1, 2 * horizon)
    win = _Windows(absval)
    m = np.arange(1, horizon + 1)
    g = np.zeros(horizon + 1)
    g[1:] = np.log(m) / m * win(m, 2 * m)
    return g


def _suffix_argmax(g: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Suffix maxima of g[1:] and the smallest index attaining each."""
    vals = g[1:]
    size = len(vals)
    smax = np.maximum.accumulate(vals[::-1])[::-1]
    nxt = np.append(smax[1:], -np.inf)
    record = vals >= nxt
    pos = np.where(record, np.arange(size), size)
    first = np.minimum.accumulate(pos[::-1])[::-1]
    return np.concatenate([[0.0], smax]), np.concatenate([[0], first + 1])


def b6_argmax(spec: BetaSpec, seq: CoefficientSequence, n: int) -> int:
    """Index m at which the maximum defining b6 at ``n`` is attained."""
    _, arg = _b6_values(spec, seq, np.array([n]))
    return int(arg[0])


def _b6_values(spec: BetaSpec, seq: CoefficientSequence, n: np.ndarray):
    if np.any(n < 2):
        raise BetaError("b6 needs n >= 2 so that ln n > 0")
    start = _lower(n, spec.c)
    if np.any(start >= spec.horizon):
        raise BetaError(f"b6 horizon {spec.horizon} does not exceed [n/c] = {int(start.max())}")
    g = _b6_profile(seq, spec.horizon)
    smax, arg = _suffix_argmax(g)
    where = arg[start]
    if np.any((where == spec.horizon) & (smax[start] > 0)):
        bad = int(n[np.argmax(where == spec.horizon)])
        raise BetaError(
            f"b6 maximum at n={bad} is attained at the horizon m={spec.horizon}; increase the horizon")
    return smax[start] / np.log(n), where


def beta_array(spec: BetaSpec, seq: CoefficientSequence, ns) -> np.ndarray:
    """Vectorised :func:`beta` over an array of indices."""
    n = np.atleast_1d(np.asarray(ns, dtype=np.int64))
    if n.size == 0:
        return np.zeros(0)
    if np.any(n < 1):
        raise BetaError("beta needs indices n >= 1")
    v = spec.variant
    if v == "custom":
        return np.array([float(spec.custom(seq, int(k))) for k in n])
    if v == "b1":
        top = int(n.max())
        return seq.abs_values(1, top)[n - 1].astype(float)
    if v == "b6":
        return _b6_values(spec, seq, n)[0]
    if v == "b3":
        c = spec.c
        total = np.zeros(len(n))
        if float(c) == int(c):
            idx = n.copy()
            for _ in range(spec.N + 1):
                total += np.array([abs(seq.coeff(int(k))) for k in idx])
                idx = idx * int(c)
        else:
            for nu in range(spec.N + 1):
                idx = np.floor(c ** nu * n.astype(float)).astype(np.int64)
                total += np.array([abs(seq.coeff(int(k))) for k in idx])
        return total
    if v == "b2":
        lo, hi = n, n + spec.N
        top = int(hi.max())
        win = _Windows(seq.abs_values(1, top))
        return win(lo, hi)
    hi = _upper(n, spec.c)
    top = int(max(hi.max(), n.max()))
    k = np.arange(1, top + 1)
    win = _Windows(seq.abs_values(1, top) / k)
    if v == "b4":
        return seq.abs_values(1, top)[n - 1] + win(n + 1, hi)
    return win(_lower(n, spec.c), hi)  # b5


def beta(spec: BetaSpec, seq: CoefficientSequence, n: int) -> float:
    """The majorant ``beta_n`` of ``seq`` for the chosen variant.

    >>> from gmseries.sequences import make_generator
    >>> beta(BetaSpec("b1"), make_generator("harmonic"), 10)
    0.1
    """
    return float(beta_array(spec, seq, [n])[0])


class SeriesTail(NamedTuple):
    value: float
    tail: float
    verdict: str
    fit: TailFit


def beta_series_tail(spec: BetaSpec, seq: CoefficientSequence, start: int, horizon: int,
                     rel_tol: float = 0.05) -> SeriesTail:
    """Partial sum of ``beta_k / k`` over ``start..horizon`` plus a fitted tail.

    The verdict is ``summable`` when the extrapolated tail is finite and at
    most ``rel_tol`` times the partial sum, and ``not-summable`` otherwise.
    """
    if start < 1 or horizon <= start:
        raise BetaError("need 1 <= start < horizon")
    if horizon < 1000 * start:
        raise BetaError("horizon must cover three decades past the start index to fit a tail")
    k = np.arange(start, horizon + 1)
    terms = beta_array(spec, seq, k) / k
    value = math.fsum(terms)
    fit = fit_tail(terms, start)
    tail = fit.estimate
    summable = math.isfinite(tail) and tail <= max(rel_tol * value, 1e-300)
    return SeriesTail(value, tail, "summable" if summable else "not-summable", fit)
