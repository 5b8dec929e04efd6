"""Coefficient sequences as lazily evaluated, cached generators.

A :class:`CoefficientSequence` wraps a vectorised closed form ``n -> a_n``
defined on the positive integers. Values are produced in blocks and kept in
a growing cache so that scans over long horizons touch every index once.

Named generators cover the monotone reference sequences and the explicit
counterexamples (``remark5_cos``, ``remark5_sin``, ``remark6``)::

    >>> seq = make_generator("remark6", {"r": 3})
    >>> [seq.coeff(n) for n in (3, 6, 7)]
    [0.1111111111111111, 0.027777777777777776, 0.0]
"""

from __future__ import annotations

import enum
import json
import threading
from typing import Callable, Mapping

import numpy as np

__all__ = [
    "CoefficientSequence",
    "SeriesKind",
    "GeneratorError",
    "GENERATORS",
    "make_generator",
    "from_function",
    "coeff",
    "to_exponential",
    "from_exponential",
]


class GeneratorError(ValueError):
    """Unknown generator name or invalid generator parameters."""


class SeriesKind(str, enum.Enum):
    COSINE = "cos"
    SINE = "sin"
    EXPONENTIAL = "exp"

    @classmethod
    def parse(cls, value) -> "SeriesKind":
        if isinstance(value, cls):
            return value
        aliases = {"cosine": "cos", "sine": "sin", "complex-exponential": "exp", "exponential": "exp"}
        return cls(aliases.get(value, value))


def _harmonic(n, params):
    return 1.0 / n


def _inv_log(n, params):
    return 1.0 / np.log(n + float(params.get("shift", 1)))


def _power(n, params):
    return n ** (-float(params["p"]))


def _constant(n, params):
    return np.full(n.shape, params.get("value", 1.0), dtype=complex if isinstance(params.get("value"), complex) else float)


def _loglog_term(n):
    ln = np.log(n)
    with np.errstate(invalid="ignore", divide="ignore"):
        lnln = np.log(ln)
        out = 1.0 / (ln * lnln)
    return np.where(lnln > 0, out, 0.0)


def _remark5_cos(n, params):
    support = (n % 3 == 1) & (n >= 4)
    return np.where(support, _loglog_term(np.maximum(n, 2.0)), 0.0)


def _remark5_sin(n, params):
    support = (n % 2 == 1) & (n >= 3)
    return np.where(support, _loglog_term(np.maximum(n, 2.0)), 0.0)


def _remark6(n, params):
    r = int(params["r"])
    return np.where(n % r == 0, 1.0 / (n * n), 0.0)


def _explicit(n, params):
    values = np.asarray(params["values"])
    if np.iscomplexobj(values):
        out = np.zeros(n.shape, dtype=complex)
    else:
        values = values.astype(float)
        out = np.zeros(n.shape)
    idx = n.astype(np.int64) - 1
    inside = idx < len(values)
    out[inside] = values[idx[inside]]
    return out


GENERATORS: dict[str, Callable] = {
    "harmonic": _harmonic,
    "inv_log": _inv_log,
    "power": _power,
    "constant": _constant,
    "monotone_list": _explicit,
    "explicit": _explicit,
    "remark5_cos": _remark5_cos,
    "remark5_sin": _remark5_sin,
    "remark6": _remark6,
}

# first index at which each generator can be nonzero
_START = {"remark5_cos": 4, "remark5_sin": 3}


def _validate(name: str, params: Mapping) -> None:
    if name not in GENERATORS:
        raise GeneratorError(f"unknown generator {name!r}")
    if name == "power":
        if "p" not in params or float(params["p"]) <= 0:
            raise GeneratorError("power generator needs an exponent p > 0")
    if name == "remark6":
        if int(params.get("r", 0)) < 1:
            raise GeneratorError("remark6 generator needs an integer r >= 1")
    if name in ("explicit", "monotone_list"):
        if "values" not in params:
            raise GeneratorError(f"{name} generator needs a 'values' list")
    if name == "monotone_list":
        v = np.asarray(params["values"], dtype=float)
        if np.any(v < 0) or np.any(np.diff(v) > 0):
            raise GeneratorError("monotone_list values must be nonnegative and nonincreasing")
    if name == "inv_log" and float(params.get("shift", 1)) <= 0:
        raise GeneratorError("inv_log shift must be positive")


class CoefficientSequence:
    """A 1-based coefficient sequence backed by a vectorised closed form.

    ``func`` maps a float array of indices to values. Indices below
    ``start`` evaluate to exactly 0. ``a0`` is the constant term of a cosine
    series and is not part of the indexed sequence.
    """

    _BLOCK = 4096

    def __init__(self, func: Callable, *, name: str = "closure", params: Mapping | None = None,
                 start: int = 1, complex_valued: bool = False, a0: complex = 0.0):
        self._func = func
        self.name = name
        self.params = dict(params or {})
        self.start = int(start)
        self.complex_valued = bool(complex_valued)
        self.a0 = a0
        dtype = complex if complex_valued else float
        self._cache = np.zeros(1, dtype=dtype)  # slot 0 unused
        self._lock = threading.Lock()

    # -- evaluation --------------------------------------------------------
    def _extend(self, upto: int) -> None:
        with self._lock:
            have = len(self._cache) - 1
            if upto <= have:
                return
            new_len = max(upto, 2 * have, self._BLOCK)
            idx = np.arange(have + 1, new_len + 1, dtype=float)
            vals = np.asarray(self._func(idx, self.params))
            if vals.shape != idx.shape:
                vals = np.broadcast_to(vals, idx.shape)
            vals = np.where(idx < self.start, 0.0, vals)
            if not self.complex_valued:
                if np.iscomplexobj(vals):
                    raise GeneratorError("real generator produced complex values")
                vals = vals.astype(float)
            self._cache = np.concatenate([self._cache, vals])

    def values(self, lo: int, hi: int) -> np.ndarray:
        """Coefficients for indices ``lo..hi`` inclusive (0 for indices < 1)."""
        if hi < lo:
            return np.zeros(0, dtype=self._cache.dtype)
        self._extend(hi)
        if lo >= 1:
            return self._cache[lo: hi + 1]
        head = np.zeros(min(hi, 0) - lo + 1, dtype=self._cache.dtype)
        if hi < 1:
            return head
        return np.concatenate([head, self._cache[1: hi + 1]])

    def coeff(self, n: int):
        if n < 1:
            return 0.0
        self._extend(n)
        v = self._cache[n]
        return complex(v) if self.complex_valued else float(v)

    __getitem__ = coeff

    def abs_values(self, lo: int, hi: int) -> np.ndarray:
        return np.abs(self.values(lo, hi))

    # -- arithmetic used by property tests ---------------------------------
    def scaled(self, factor) -> "CoefficientSequence":
        f = self._func
        cplx = self.complex_valued or isinstance(factor, complex)
        return CoefficientSequence(lambda n, p: factor * np.asarray(f(n, p)), name="closure",
                                   params=self.params, start=self.start, complex_valued=cplx,
                                   a0=factor * self.a0)

    def __add__(self, other: "CoefficientSequence") -> "CoefficientSequence":
        f, g = self._func, other._func
        p, q = self.params, other.params
        s1, s2 = self.start, other.start

        def func(n, _):
            a = np.where(n < s1, 0.0, f(n, p))
            b = np.where(n < s2, 0.0, g(n, q))
            return a + b

        return CoefficientSequence(func, start=min(s1, s2),
                                   complex_valued=self.complex_valued or other.complex_valued,
                                   a0=self.a0 + other.a0)

    # -- serialisation -----------------------------------------------------
    @property
    def descriptor(self) -> dict:
        if self.name not in GENERATORS:
            raise GeneratorError("closure-backed sequences have no JSON descriptor")
        params = dict(self.params)
        if self.a0:
            params["a0"] = self.a0
        return {"name": self.name, "params": params}

    def to_json(self) -> str:
        return json.dumps(self.descriptor, sort_keys=True)

    @classmethod
    def from_json(cls, text: str | Mapping) -> "CoefficientSequence":
        obj = json.loads(text) if isinstance(text, str) else dict(text)
        if "name" not in obj:
            raise GeneratorError("generator descriptor needs a 'name'")
        return make_generator(obj["name"], obj.get("params", {}))

    def __repr__(self) -> str:
        return f"CoefficientSequence({self.name!r}, {self.params!r})"


def make_generator(name: str, params: Mapping | None = None) -> CoefficientSequence:
    """Build a named generator.

    Recognised names: ``harmonic`` (1/n), ``inv_log`` (1/ln(n + shift),
    shift defaults to 1), ``power`` (n**-p), ``constant``, ``monotone_list``,
    ``explicit``, ``remark5_cos`` (support n = 3l+1, l >= 1),
    ``remark5_sin`` (support n = 2l+1, l >= 1) and ``remark6`` (1/n**2 on
    multiples of r). A key ``a0`` in ``params`` sets the constant term.
    """
    params = dict(params or {})
    _validate(name, params)
    a0 = params.pop("a0", 0.0)
    cplx = False
    if name in ("explicit",):
        cplx = any(isinstance(v, complex) for v in params["values"])
    if name == "constant":
        cplx = isinstance(params.get("value"), complex)
    return CoefficientSequence(GENERATORS[name], name=name, params=params,
                               start=_START.get(name, 1), complex_valued=cplx, a0=a0)


def from_function(func: Callable[[np.ndarray], np.ndarray], *, start: int = 1,
                  complex_valued: bool = False, a0=0.0) -> CoefficientSequence:
    """Wrap a vectorised ``n -> a_n`` function (float index array in)."""
    return CoefficientSequence(lambda n, _: func(n), start=start,
                               complex_valued=complex_valued, a0=a0)


def coeff(seq: CoefficientSequence, n: int):
    return seq.coeff(n)


def to_exponential(seq: CoefficientSequence, kind) -> tuple[CoefficientSequence, CoefficientSequence]:
    """Coefficients ``(c_k, c_{-k})`` for k >= 1 of the exponential form.

    Cosine: c_k = c_{-k} = a_k/2. Sine: c_k = -c_{-k} = -i b_k/2.
    """
    kind = SeriesKind.parse(kind)
    if kind is SeriesKind.COSINE:
        half = seq.scaled(0.5)
        return half, half
    if kind is SeriesKind.SINE:
        return seq.scaled(-0.5j), seq.scaled(0.5j)
    raise ValueError("sequence is already in exponential form")


def from_exponential(pos: CoefficientSequence, neg: CoefficientSequence, kind, horizon: int) -> np.ndarray:
    """Recover ``a_k`` (cosine) or ``b_k`` (sine) for k = 1..horizon."""
    kind = SeriesKind.parse(kind)
    cp, cn = pos.values(1, horizon), neg.values(1, horizon)
    if kind is SeriesKind.COSINE:
        return cp + cn
    if kind is SeriesKind.SINE:
        return 1j * (cp - cn)
    raise ValueError("kind must be cos or sin")


def effective_start(seq: CoefficientSequence) -> int:
    """First index at which the generator may be nonzero."""
    return seq.start


def is_finite_support(seq: CoefficientSequence) -> int | None:
    """Length of the support for list-backed generators, else None."""
    if seq.name in ("explicit", "monotone_list"):
        return len(seq.params["values"])
    if seq.name == "constant" and seq.params.get("value", 1.0) == 0:
        return 0
    return None

