"""Finite-prefix diagnostics for monotonicity-type sequence classes.

Membership in GM(beta, r) or RBVS(beta, r) asks for a single constant C
with ``variation_m <= C * beta_m`` for every m. A finite prefix can only
show whether the ratio variation/majorant stays bounded on a grid, so every
report carries the raw ratios next to its verdict. A ratio column whose
log-log slope exceeds ``SLOPE_THRESHOLD`` is read as unbounded growth.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from ._numerics import fit_tail, loglog_slope
from .beta import BetaSpec, beta_array
from .sequences import CoefficientSequence

__all__ = [
    "ClassSpec", "MembershipReport", "ClassError", "VariationTail",
    "block_variation", "tail_variation", "membership_scan",
    "remark1_condition", "remark1_chain", "remark2_chain",
    "theorem2_hypothesis", "theorem2_keystep", "theorem3_hypothesis",
    "coefficient_criterion", "bounded_verdict", "o1_verdict", "qm_tau_search",
    "SLOPE_THRESHOLD",
]

SLOPE_THRESHOLD = 0.2
MIN_DECADES = 2.0
CONSISTENT, INCONSISTENT, INCONCLUSIVE = "consistent", "inconsistent", "inconclusive"
CLASS_IDS = ("M", "QM", "RBVS", "GM", "GBVS", "NBVS", "MVBV", "GM(beta,r)", "RBVS(beta,r)")


class ClassError(ValueError):
    """Invalid class specification or a request the data cannot support."""


@dataclass(frozen=True)
class ClassSpec:
    class_id: str
    r: int = 1
    beta: BetaSpec | None = None
    tau: float | None = None
    N: int = 0
    c: float = 2.0

    def __post_init__(self):
        if self.class_id not in CLASS_IDS:
            raise ClassError(f"unknown class {self.class_id!r}")
        if self.r < 1:
            raise ClassError("step r must be >= 1")
        if self.class_id == "QM" and not (self.tau is not None and self.tau > 0):
            raise ClassError("QM needs tau > 0")
        if self.class_id == "MVBV" and not self.c > 1:
            raise ClassError("MVBV needs c > 1")
        if self.class_id in ("GM(beta,r)", "RBVS(beta,r)") and self.beta is None:
            raise ClassError(f"{self.class_id} needs a beta specification")

    @property
    def label(self) -> str:
        if self.class_id in ("GM(beta,r)", "RBVS(beta,r)"):
            return f"{self.class_id.split('(')[0]}({self.beta.variant},{self.r})"
        if self.class_id == "QM":
            return f"QM(tau={self.tau})"
        if self.class_id == "GBVS":
            return f"GBVS(N={self.N})"
        if self.class_id == "MVBV":
            return f"MVBV(c={self.c})"
        return self.class_id

    def reduced(self) -> tuple[str, int, BetaSpec | str]:
        """Express the class as (block|tail, r, majorant)."""
        cid = self.class_id
        if cid == "GM(beta,r)":
            return "block", self.r, self.beta
        if cid == "RBVS(beta,r)":
            return "tail", self.r, self.beta
        if cid == "GM":
            return "block", 1, BetaSpec("b1")
        if cid == "RBVS":
            return "tail", 1, BetaSpec("b1")
        if cid == "MVBV":
            return "block", 1, BetaSpec("b5", c=self.c)
        if cid == "GBVS":
            return "block", 1, "window-max"
        if cid == "NBVS":
            return "block", 1, "m-and-2m"
        return "monotone", 1, cid


@dataclass
class MembershipReport:
    grid: list[int]
    ratios: list[float]
    sup_ratio: float
    trend_slope: float
    verdict: str
    flags: list[str] = field(default_factory=list)
    variations: list[float] = field(default_factory=list)
    majorants: list[float] = field(default_factory=list)
    label: str = ""
    params: dict = field(default_factory=dict)

    @property
    def fitted_C(self) -> float:
        return self.sup_ratio

    def to_dict(self) -> dict:
        return _jsonable(asdict(self))

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["m", "variation", "majorant", "ratio"])
        for row in zip(self.grid, self.variations or [""] * len(self.grid),
                       self.majorants or [""] * len(self.grid), self.ratios):
            w.writerow([repr(v) if isinstance(v, float) else v for v in row])
        return buf.getvalue()


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    if isinstance(obj, (np.integer, np.bool_)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, BetaSpec):
        return obj.to_dict()
    return obj


# -- variation functionals ------------------------------------------------

def block_variation(seq: CoefficientSequence, m: int, r: int) -> float:
    """sum_{n=m}^{2m-1} |a_n - a_{n+r}|."""
    if m < 1 or r < 1:
        raise ClassError("block_variation needs m >= 1 and r >= 1")
    a = seq.values(m, 2 * m - 1 + r)
    return math.fsum(np.abs(a[:m] - a[r: r + m]))


def _block_variation_array(seq, ms: np.ndarray, r: int) -> np.ndarray:
    return np.array([block_variation(seq, int(m), r) for m in ms])


class VariationTail(NamedTuple):
    value: float
    tail: float

    @property
    def total(self) -> float:
        return self.value + self.tail


def _variation_terms(seq: CoefficientSequence, lo: int, horizon: int, r: int) -> np.ndarray:
    a = seq.values(lo, horizon + r)
    return np.abs(a[: horizon - lo + 1] - a[r:])


def tail_variation(seq: CoefficientSequence, m: int, r: int, horizon: int) -> VariationTail:
    """Truncated ``sum_{n=m}^{horizon} |a_n - a_{n+r}|`` and a fitted remainder.

    The remainder past ``horizon`` is extrapolated from dyadic block sums of
    the summands, so it is an estimate rather than a bound.
    """
    if horizon < 2 * m:
        raise ClassError("tail_variation needs horizon >= 2m")
    terms = _variation_terms(seq, 1, horizon, r)
    value = math.fsum(terms[m - 1:])
    fit = fit_tail(terms, 1)
    return VariationTail(value, fit.estimate)


def tail_variation_array(seq, ms, r: int, horizon: int) -> tuple[np.ndarray, float]:
    """Vectorised :func:`tail_variation`; the fitted remainder is shared."""
    ms = np.asarray(ms, dtype=np.int64)
    if horizon < 2 * int(ms.max()):
        raise ClassError("tail_variation needs horizon >= 2m")
    terms = _variation_terms(seq, 1, horizon, r)
    suf = np.cumsum(terms[::-1].astype(np.longdouble))[::-1]
    return suf[ms - 1].astype(float), fit_tail(terms, 1).estimate


# -- verdict logic ---------------------------------------------------------

def bounded_verdict(grid: Sequence[int], ratios: Sequence[float],
                    threshold: float = SLOPE_THRESHOLD) -> tuple[str, float, list[str]]:
    """Classify a ratio column as bounded, growing or too short to tell."""
    grid = np.asarray(grid, dtype=float)
    ratios = np.asarray(ratios, dtype=float)
    flags: list[str] = []
    if np.any(np.isinf(ratios)):
        return INCONSISTENT, float("inf"), ["infinite-ratio"]
    slope = loglog_slope(grid, ratios)
    if np.all(ratios == 0):
        slope = 0.0
    if len(grid) < 3 or np.log10(grid.max() / grid.min()) < MIN_DECADES:
        flags.append("insufficient-trend-data")
        return INCONCLUSIVE, slope, flags
    if math.isnan(slope):
        flags.append("too-few-positive-ratios")
        return INCONCLUSIVE, slope, flags
    return (INCONSISTENT if slope > threshold else CONSISTENT), slope, flags


def o1_verdict(grid: Sequence[int], values: Sequence[float], share: float = 0.25) -> tuple[str, float]:
    """Decide whether a column looks like o(1) along the grid.

    The column is fitted as ``L + C / ln(ln n)``, about the slowest decay
    one meets in practice, and ``L`` serves as the extrapolated limit. The
    verdict is ``o(1)`` when ``L`` is at most ``share`` times the last value
    and the column ends below where it started. Returns the verdict and
    ``L / last``.
    """
    values = np.asarray(values, dtype=float)
    grid = np.asarray(grid, dtype=float)
    if np.all(values == 0):
        return "o(1)", 0.0
    keep = np.isfinite(values) & (grid > math.e)
    if keep.sum() < 3:
        return INCONCLUSIVE, float("nan")
    g = 1.0 / np.log(np.log(grid[keep]))
    v = values[keep]
    if np.ptp(g) == 0:
        return INCONCLUSIVE, float("nan")
    C, L = np.polyfit(g, v, 1)
    last = v[-1]
    rel = float(L / last) if last > 0 else (0.0 if L <= 0 else float("inf"))
    return ("o(1)" if rel <= share and v[-1] < v[0] else "not-o(1)"), rel


def _ratio(num: np.ndarray, den: np.ndarray) -> tuple[np.ndarray, list[str]]:
    flags = []
    with np.errstate(divide="ignore", invalid="ignore"):
        out = num / den
    zz = (num == 0) & (den == 0)
    if np.any(zz):
        flags.append("zero-over-zero-at-m=" + ",".join(str(i) for i in np.flatnonzero(zz)))
        out[zz] = 0.0
    if np.any(np.isinf(out)):
        flags.append("zero-majorant")
    return out, flags


# -- membership scans --------------------------------------------------------

def _majorant(seq, ms: np.ndarray, maj, N: int) -> np.ndarray:
    if isinstance(maj, BetaSpec):
        return beta_array(maj, seq, ms)
    if maj == "window-max":
        return np.array([np.abs(seq.values(int(m), int(m) + N)).max() for m in ms])
    if maj == "m-and-2m":
        return np.abs(seq.values(1, 2 * int(ms.max())))[ms - 1] + np.abs(seq.values(1, 2 * int(ms.max())))[2 * ms - 1]
    raise ClassError(f"unknown majorant {maj!r}")


def _monotone_scan(seq, cls: ClassSpec, ms: np.ndarray) -> MembershipReport:
    top = int(2 * ms.max())
    a = seq.values(1, top + 1)
    if np.iscomplexobj(a) or np.any(a < 0):
        return MembershipReport(ms.tolist(), [float("inf")] * len(ms), float("inf"), float("nan"),
                                INCONSISTENT, ["negative-or-complex-values"], label=cls.label)
    if cls.class_id == "QM":
        a = a * np.arange(1, top + 2, dtype=float) ** (-cls.tau)
    rises = np.maximum(np.diff(a), 0.0)
    var = np.array([math.fsum(rises[m - 1: 2 * m - 1]) for m in ms])
    den = a[ms - 1]
    ratios, flags = _ratio(var, den)
    verdict = CONSISTENT if np.all(var == 0) else INCONSISTENT
    flags.append("exact-prefix-predicate")
    return MembershipReport(ms.tolist(), ratios.tolist(), float(np.max(ratios)), loglog_slope(ms, ratios),
                            verdict, flags, var.tolist(), den.tolist(), cls.label)


def membership_scan(seq: CoefficientSequence, cls: ClassSpec, grid: Sequence[int],
                    horizon: int | None = None) -> MembershipReport:
    """Ratios of variation to majorant over ``grid`` with a trend verdict.

    >>> from gmseries.sequences import make_generator
    >>> rep = membership_scan(make_generator("harmonic"), ClassSpec("GM"), [2 ** j for j in range(1, 13)])
    >>> rep.verdict, round(rep.sup_ratio, 6)
    ('consistent', 0.5)
    """
    ms = np.asarray(list(grid), dtype=np.int64)
    if ms.size == 0:
        raise ClassError("membership grid is empty")
    if np.any(np.diff(ms) <= 0) or ms[0] < 1:
        raise ClassError("membership grid must be positive and strictly increasing")
    kind, r, maj = cls.reduced()
    if kind == "monotone":
        return _monotone_scan(seq, cls, ms)
    flags = []
    if isinstance(maj, BetaSpec):
        flags += maj.flags
    if kind == "block":
        var = _block_variation_array(seq, ms, r)
    else:
        horizon = horizon or max(1 << 16, 64 * int(ms.max()))
        values, tail = tail_variation_array(seq, ms, r, horizon)
        if not math.isfinite(tail):
            flags.append("variation-tail-not-summable")
        var = values + (tail if math.isfinite(tail) else 0.0)
    den = _majorant(seq, ms, maj, cls.N)
    ratios, rflags = _ratio(var, den)
    verdict, slope, vflags = bounded_verdict(ms, ratios)
    if "variation-tail-not-summable" in flags:
        verdict = INCONSISTENT
    finite = ratios[np.isfinite(ratios)]
    sup = float(np.max(ratios)) if finite.size == ratios.size else float("inf")
    params = {"r": r, "class": cls.class_id}
    if horizon:
        params["horizon"] = int(horizon)
    if isinstance(maj, BetaSpec) and maj.variant != "custom":
        params["beta"] = maj.to_dict()
    return MembershipReport(ms.tolist(), ratios.tolist(), sup, slope, verdict,
                            flags + rflags + vflags, var.tolist(), den.tolist(), cls.label, params)


def qm_tau_search(seq: CoefficientSequence, taus: Sequence[float], grid: Sequence[int]) -> float | None:
    """Smallest tau in ``taus`` certifying QM on the prefix, or None.

    This is a finite search and cannot prove that no tau works.
    """
    for tau in sorted(taus):
        if membership_scan(seq, ClassSpec("QM", tau=tau), grid).verdict == CONSISTENT:
            return tau
    return None


# -- hypothesis checkers -----------------------------------------------------

@dataclass
class RatioReport:
    grid: list[int]
    values: list[float]
    verdict: str
    trend: float  # log-log slope for ratio columns, limit/last for o(1) columns
    flags: list[str] = field(default_factory=list)
    label: str = ""

    @property
    def sup(self) -> float:
        return float(np.max(self.values)) if self.values else float("nan")

    def to_dict(self) -> dict:
        return _jsonable(asdict(self))


def _ratio_report(label, ns, num, den) -> RatioReport:
    ratios, flags = _ratio(np.asarray(num, float), np.asarray(den, float))
    verdict, slope, vflags = bounded_verdict(ns, ratios)
    verdict = {CONSISTENT: "bounded", INCONSISTENT: "unbounded"}.get(verdict, verdict)
    return RatioReport(list(map(int, ns)), ratios.tolist(), verdict, slope, flags + vflags, label)


def remark1_condition(beta: BetaSpec, seq: CoefficientSequence, q: int, p: int, grid) -> RatioReport:
    """Ratios ``sum_{i<p} beta_{n+iq} / beta_n`` with a boundedness verdict."""
    if p < 1 or q < 1:
        raise ClassError("p and q must be >= 1")
    ns = np.asarray(list(grid), dtype=np.int64)
    num = np.zeros(len(ns))
    for i in range(p):
        num += beta_array(beta, seq, ns + i * q)
    den = beta_array(beta, seq, ns)
    keep = den != 0
    rep = _ratio_report(f"remark1(p={p},q={q})", ns[keep], num[keep], den[keep])
    if not np.all(keep):
        rep.flags.append("zero-beta-excluded-at-n=" + ",".join(map(str, ns[~keep])))
    return rep


def _window_abs(seq, lo: int, hi: int) -> float:
    return math.fsum(np.abs(seq.values(lo, hi))) if hi >= lo else 0.0


def theorem2_hypothesis(seq, beta: BetaSpec, gamma: float, grid) -> RatioReport:
    """Ratios ``sum_{[n/2]}^{n} beta_k / sum_{[n/gamma]}^{[gamma n]} |c_k|``."""
    if not gamma > 1:
        raise ClassError("gamma must exceed 1")
    ns = list(map(int, grid))
    num, den = [], []
    for n in ns:
        k = np.arange(max(n // 2, 1), n + 1)
        num.append(math.fsum(beta_array(beta, seq, k)))
        den.append(_window_abs(seq, max(int(n / gamma), 1), int(gamma * n)))
    return _ratio_report(f"theorem2-hypothesis(gamma={gamma})", ns, num, den)


def theorem2_keystep(seq, r: int, gamma: float, grid) -> RatioReport:
    """Ratios ``n |c_n| / sum_{[n/gamma]}^{[gamma n]} |c_k|``."""
    if not gamma > 1:
        raise ClassError("gamma must exceed 1")
    ns = list(map(int, grid))
    num = [n * abs(seq.coeff(n)) for n in ns]
    den = [_window_abs(seq, max(int(n / gamma), 1), int(gamma * n)) for n in ns]
    rep = _ratio_report(f"theorem2-keystep(r={r},gamma={gamma})", ns, num, den)
    return rep


def theorem3_hypothesis(seq, beta: BetaSpec, grid) -> RatioReport:
    """Values of ``sum_{k=[n/2]}^{2n-1} (beta_k + beta_2k + |a_k| + |a_k+1|) / (2k-n+2)``."""
    ns = list(map(int, grid))
    if min(ns) < 2:
        raise ClassError("theorem3_hypothesis needs n >= 2")
    vals = []
    for n in ns:
        k = np.arange(n // 2, 2 * n)
        a = np.abs(seq.values(int(k[0]), int(k[-1]) + 1))
        terms = beta_array(beta, seq, k) + beta_array(beta, seq, 2 * k) + a[:-1] + a[1:]
        vals.append(math.fsum(terms / (2 * k - n + 2)))
    verdict, slope = o1_verdict(ns, vals)
    return RatioReport(ns, vals, verdict, slope, label="theorem3-hypothesis")


def coefficient_criterion(seq, grid) -> RatioReport:
    """``|a_n| ln n`` along the grid with an o(1) verdict."""
    ns = list(map(int, grid))
    if min(ns) < 2:
        raise ClassError("coefficient_criterion needs n >= 2")
    vals = [abs(seq.coeff(n)) * math.log(n) for n in ns]
    verdict, slope = o1_verdict(ns, vals)
    flags = []
    if any(v == 0 for v in vals) and not all(v == 0 for v in vals):
        flags.append("zero-values-excluded-from-fit")
    return RatioReport(ns, vals, verdict, slope, flags, "coefficient-criterion")


# -- embedding chains --------------------------------------------------------

@dataclass
class ChainCheck:
    n: int
    lhs: float
    mid: float
    rhs: float
    holds: bool
    detail: dict = field(default_factory=dict)


_SLACK = 1e-12


def _leq(a: float, b: float) -> bool:
    return a <= b + _SLACK * max(abs(a), abs(b), 1e-300)


def remark1_chain(seq, beta: BetaSpec, q: int, p: int, grid) -> list[ChainCheck]:
    """Pointwise check of the block-variation chain for r = p*q.

    At each n::

        bv(n, r) <= sum_l sum_{k=n+lq}^{2n+lq-1} |a_k - a_{k+q}| <= sum_l bv(n+lq, q)

    and the ratio bound ``bv(n,r)/beta_n <= max_l ratio_q(n+lq) * sum_l beta_{n+lq}/beta_n``.
    """
    r = p * q
    out = []
    for n in map(int, grid):
        lhs = block_variation(seq, n, r)
        a = seq.values(n, 2 * n + r)
        mid = math.fsum(math.fsum(np.abs(a[l * q: l * q + n] - a[l * q + q: l * q + q + n])) for l in range(p))
        parts = [block_variation(seq, n + l * q, q) for l in range(p)]
        rhs = math.fsum(parts)
        holds = _leq(lhs, mid) and _leq(mid, rhs)
        betas = beta_array(beta, seq, [n + l * q for l in range(p)])
        detail = {}
        if betas[0] > 0 and np.all(betas > 0):
            ratio = lhs / betas[0]
            bound = max(pv / b for pv, b in zip(parts, betas)) * math.fsum(betas) / betas[0]
            detail = {"ratio_r": ratio, "ratio_bound": bound}
            holds = holds and _leq(ratio, bound)
        out.append(ChainCheck(n, lhs, mid, rhs, holds, detail))
    return out


def remark2_chain(seq, q: int, r: int, grid, horizon: int) -> list[ChainCheck]:
    """Pointwise check of the tail-variation chain for q | r.

    The exact truncated form ``sum_{k=n}^{H} |a_k - a_{k+r}| <= p sum_{k=n}^{H+r} |a_k - a_{k+q}|``
    is checked together with the fitted tails.
    """
    if r % q:
        raise ClassError("remark2_chain needs q | r")
    p = r // q
    out = []
    terms_r = _variation_terms(seq, 1, horizon, r)
    terms_q = _variation_terms(seq, 1, horizon + r, q)
    tail_r = fit_tail(terms_r, 1).estimate
    tail_q = fit_tail(terms_q, 1).estimate
    for n in map(int, grid):
        lhs = math.fsum(terms_r[n - 1:])
        mid = math.fsum(math.fsum(terms_q[n - 1 + l * q: horizon + l * q]) for l in range(p))
        rhs = p * math.fsum(terms_q[n - 1:])
        holds = _leq(lhs, mid) and _leq(mid, rhs)
        detail = {"p": p, "tail_r": tail_r, "tail_q": tail_q}
        if math.isfinite(tail_r) and math.isfinite(tail_q):
            fitted_ok = lhs + tail_r <= p * (rhs / p + tail_q) * (1 + 1e-6) + 1e-12
            detail["fitted_holds"] = bool(fitted_ok)
        out.append(ChainCheck(n, lhs, mid, rhs, holds, detail))
    return out
