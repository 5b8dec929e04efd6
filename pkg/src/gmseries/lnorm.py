"""L1 norms ``(1/2pi) int_{-pi}^{pi} |f|`` of trigonometric expressions.

The integrand is split at its sign changes, found by sampling at a density
tied to its highest frequency and refined by bracketing. On each piece of
constant sign the integral of |f| is the absolute value of the integral of
f, taken from an antiderivative when one is known (trigonometric
polynomials and series tails) and from adaptive Gauss-Kronrod otherwise.

Singular points must come with a bound for the mass of |f| in a small
neighbourhood. That neighbourhood is excluded from the quadrature and its
bound is reported next to the quadrature error.
"""

from __future__ import annotations

import heapq
import json
import math
from dataclasses import asdict, dataclass, field
from typing import Callable, Sequence

import numpy as np

from ._numerics import TWO_PI, fit_tail, gk15_apply, gk15_nodes
from .beta import BetaSpec, beta_array
from .sequences import CoefficientSequence, SeriesKind, is_finite_support
from .summation import NoTailCertificate, TailEngine, trig_sum

__all__ = [
    "QuadratureSpec", "NormReport", "Integrand", "TrigPolynomial", "QuadratureError",
    "l1_norm", "cauchy_gap", "vn_sn_gap", "sn_f_gap", "theorem4_bound", "shell_mass",
]


class QuadratureError(RuntimeError):
    """The requested tolerance was not reached within the panel budget."""


@dataclass(frozen=True)
class QuadratureSpec:
    tol: float = 1e-6
    singular_points: tuple = ()
    eps: float | None = None
    max_panels: int = 200_000
    breakpoints: tuple = ()

    def __post_init__(self):
        if not (self.tol > 0 and math.isfinite(self.tol)):
            raise ValueError("quadrature tolerance must be a positive number")
        if self.max_panels < 1:
            raise ValueError("max_panels must be positive")


@dataclass
class NormReport:
    functional: str
    params: dict
    value: float
    error_estimate: float
    panels: int
    flags: list[str] = field(default_factory=list)
    excluded_mass: float = 0.0
    unsampled_mass: float = 0.0

    def to_dict(self) -> dict:
        out = asdict(self)
        for key in ("value", "error_estimate", "excluded_mass", "unsampled_mass"):
            v = out[key]
            if not math.isfinite(v):
                out[key] = "inf" if v > 0 else "nan" if math.isnan(v) else "-inf"
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)


@dataclass
class Integrand:
    """A real function of x together with what is known about it.

    ``antiderivative`` enables exact piecewise integration. ``frequency``
    (the highest harmonic) sets the sampling density used to find sign
    changes. ``excluded_mass(s, eps)`` must bound ``int_{|x-s|<eps} |f|``
    for every entry ``s`` of ``singular_points``.
    """

    func: Callable[[np.ndarray], np.ndarray]
    antiderivative: Callable[[np.ndarray], np.ndarray] | None = None
    frequency: float = 8.0
    singular_points: Sequence[float] = ()
    excluded_mass: Callable[[float, float], float] | None = None
    abs_even: bool = False


class TrigPolynomial(Integrand):
    """``sum_{j} coef[j] trig((k0 + j) x)`` with its exact antiderivative."""

    def __init__(self, coef, k0: int, kind):
        self.coef = np.asarray(coef)
        self.k0 = int(k0)
        self.kind = SeriesKind.parse(kind)
        if self.kind is SeriesKind.EXPONENTIAL:
            raise ValueError("TrigPolynomial takes cos or sin coefficients")
        if self.k0 < 1:
            raise ValueError("TrigPolynomial frequencies start at 1")
        k = np.arange(self.k0, self.k0 + self.coef.size)
        self._anti = self.coef / k
        anti_kind = SeriesKind.SINE if self.kind is SeriesKind.COSINE else SeriesKind.COSINE
        sign = 1.0 if self.kind is SeriesKind.COSINE else -1.0
        super().__init__(
            func=lambda x: trig_sum(self.coef, self.k0, x, self.kind),
            antiderivative=lambda x: sign * trig_sum(self._anti, self.k0, x, anti_kind),
            frequency=float(k[-1]) if k.size else 1.0,
            abs_even=True,
        )

    @property
    def rounding(self) -> float:
        return 8 * np.finfo(float).eps * float(np.sum(np.abs(self._anti)))


def _refine_roots(f, a, b, fa, fb, xtol, maxiter=60):
    """Vectorised Illinois iteration on brackets with fa*fb < 0."""
    a, b, fa, fb = (np.array(v, dtype=float) for v in (a, b, fa, fb))
    side = np.zeros(len(a), dtype=int)
    for _ in range(maxiter):
        live = np.abs(b - a) > xtol
        if not np.any(live):
            break
        idx = np.flatnonzero(live)
        denom = fb[idx] - fa[idx]
        c = np.where(denom != 0, b[idx] - fb[idx] * (b[idx] - a[idx]) / np.where(denom != 0, denom, 1),
                     0.5 * (a[idx] + b[idx]))
        lo, hi = np.minimum(a[idx], b[idx]), np.maximum(a[idx], b[idx])
        bad = ~((c > lo) & (c < hi))
        c[bad] = 0.5 * (a[idx][bad] + b[idx][bad])
        fc = f(c)
        exact = fc == 0
        same = np.sign(fc) == np.sign(fb[idx])
        # bracket [b, c] if sign change between b and c, else [a, c]
        new_a = np.where(same, a[idx], b[idx])
        new_fa = np.where(same, fa[idx], fb[idx])
        ill = same & (side[idx] == -1)
        new_fa = np.where(ill, 0.5 * new_fa, new_fa)
        side[idx] = np.where(same, -1, 1)
        a[idx], fa[idx] = new_a, new_fa
        b[idx], fb[idx] = c, fc
        a[idx[exact]] = c[exact]
        b[idx[exact]] = c[exact]
    return 0.5 * (a + b)


def _golden_min(g, a: np.ndarray, b: np.ndarray, iters: int = 48) -> np.ndarray:
    """Vectorised golden-section search for a minimiser of g on each [a, b]."""
    inv = (math.sqrt(5.0) - 1.0) / 2.0
    c, d = b - inv * (b - a), a + inv * (b - a)
    gc, gd = g(c), g(d)
    for _ in range(iters):
        left = gc < gd
        b = np.where(left, d, b)
        a = np.where(left, a, c)
        c_new = np.where(left, b - inv * (b - a), d)
        d_new = np.where(left, c, a + inv * (b - a))
        fresh = np.where(left, c_new, d_new)
        gf = g(fresh)
        gc, gd = np.where(left, gf, gd), np.where(left, gc, gf)
        c, d = c_new, d_new
    return 0.5 * (a + b)


def _hidden_crossings(f, x: np.ndarray, y: np.ndarray):
    """Brackets for root pairs that fall between two samples.

    Sampling eight points per period of the top harmonic keeps a parabola
    through three samples within about 0.004 max|f| of f, so only dips whose
    parabolic vertex gets that close to zero are searched.
    """
    s = np.sign(y)
    inner = np.arange(1, len(y) - 1)
    same = (s[inner - 1] == s[inner]) & (s[inner + 1] == s[inner]) & (s[inner] != 0)
    dip = (np.abs(y[inner]) <= np.abs(y[inner - 1])) & (np.abs(y[inner]) <= np.abs(y[inner + 1]))
    i = inner[same & dip]
    if i.size == 0:
        return []
    y0, y1, y2 = y[i - 1], y[i], y[i + 1]
    curv = y0 - 2 * y1 + y2
    vertex = y1 - np.where(curv != 0, (y2 - y0) ** 2 / (8 * np.where(curv != 0, curv, 1)), 0.0)
    i = i[s[i] * vertex <= 0.01 * np.max(np.abs(y))]
    if i.size == 0:
        return []
    sign = s[i]
    xm = _golden_min(lambda t: sign * f(t), x[i - 1].copy(), x[i + 1].copy())
    ym = f(xm)
    hit = sign * ym < 0
    out = []
    for j in np.flatnonzero(hit):
        k = i[j]
        out.append((x[k - 1], xm[j], y[k - 1], ym[j]))
        out.append((xm[j], x[k + 1], ym[j], y[k + 1]))
    return out


def _sign_pieces(f, lo: float, hi: float, freq: float, xtol: float):
    """Breakpoints splitting [lo, hi] into pieces where f keeps its sign."""
    h = math.pi / (8.0 * max(freq, 8.0))
    count = max(65, int(math.ceil((hi - lo) / h)) + 1)
    x = np.linspace(lo, hi, count)
    y = f(x)
    s = np.sign(y)
    change = np.flatnonzero(s[:-1] * s[1:] < 0)
    zeros = x[1:-1][y[1:-1] == 0]
    a, b, fa, fb = x[change], x[change + 1], y[change], y[change + 1]
    hidden = _hidden_crossings(f, x, y)
    if hidden:
        ha, hb, hfa, hfb = map(np.array, zip(*hidden))
        a, b, fa, fb = (np.concatenate(v) for v in ((a, ha), (b, hb), (fa, hfa), (fb, hfb)))
    roots = _refine_roots(f, a, b, fa, fb, xtol) if a.size else []
    pts = np.unique(np.concatenate([[lo, hi], roots, zeros]))
    return pts, count


def _gk_adaptive(f, a: float, b: float, tol: float, budget: int):
    """Adaptive GK15 on [a, b]; returns (integral, error, panels)."""
    lo, hi = np.array([a]), np.array([b])
    val, err = gk15_apply(f(gk15_nodes(lo, hi).ravel()).reshape(1, 15), lo, hi)
    heap = [(-err[0], a, b, val[0], err[0])]
    total, total_err, panels = val[0], err[0], 1
    while total_err > tol:
        if panels >= budget:
            raise QuadratureError(f"tolerance {tol:.3g} not reached within {budget} panels")
        batch = [heapq.heappop(heap) for _ in range(min(len(heap), 64))]
        los, his = [], []
        for _, u, v, pv, pe in batch:
            total -= pv
            total_err -= pe
            m = 0.5 * (u + v)
            los += [u, m]
            his += [m, v]
        los, his = np.array(los), np.array(his)
        vals, errs = gk15_apply(f(gk15_nodes(los, his).ravel()).reshape(-1, 15), los, his)
        for u, v, pv, pe in zip(los, his, vals, errs):
            heapq.heappush(heap, (-pe, u, v, pv, pe))
            total += pv
            total_err += pe
        panels += len(los)
        total_err = max(total_err, 0.0)
    # final sum in panel order for determinism
    pieces = sorted((u, pv, pe) for _, u, _, pv, pe in heap)
    return math.fsum(p[1] for p in pieces), math.fsum(p[2] for p in pieces), panels


_FFT_POINTS = 1 << 14


def _estimate_frequency(f) -> float:
    """Highest harmonic carrying visible energy, from an FFT over one period."""
    x = -math.pi + TWO_PI * np.arange(_FFT_POINTS) / _FFT_POINTS
    spec = np.abs(np.fft.rfft(f(x)))
    visible = np.nonzero(spec > 1e-10 * max(spec.max(), 1e-300))[0]
    top = int(visible[-1]) if visible.size else 0
    return float(max(8, min(top, _FFT_POINTS // 2)))


def l1_norm(integrand, spec: QuadratureSpec = QuadratureSpec(), functional: str = "l1_norm",
            params: dict | None = None) -> NormReport:
    """Normalised L1 norm of ``integrand`` over one period.

    >>> round(l1_norm(lambda x: np.sin(3 * x)).value, 12)
    0.636619772368
    """
    if not isinstance(integrand, Integrand):
        def func(x, g=integrand):
            return np.asarray(g(x), dtype=float) * np.ones_like(x)

        integrand = Integrand(func=func, frequency=_estimate_frequency(func))
    f = integrand.func
    flags: list[str] = []
    singular = sorted(set(float(s) for s in tuple(integrand.singular_points) + tuple(spec.singular_points)))
    lo, hi = (0.0, math.pi) if integrand.abs_even else (-math.pi, math.pi)
    scale = 1.0 / (hi - lo)
    excluded = 0.0
    cuts = [lo, hi] + [float(b) for b in spec.breakpoints if lo < b < hi]
    holes = []
    if singular:
        if integrand.excluded_mass is None:
            raise ValueError("integrand has singular points but no excluded-mass bound")
        eps = spec.eps if spec.eps is not None else 1e-3
        for _ in range(80):
            excluded = sum(integrand.excluded_mass(s, eps) for s in singular) * scale
            if excluded <= 0.1 * spec.tol or spec.eps is not None:
                break
            eps /= 4
        else:
            raise QuadratureError("could not shrink singular neighbourhoods below the mass budget")
        for s in singular:
            holes.append((s - eps, s + eps))
            cuts += [s - eps, s + eps]
        flags.append(f"excluded-radius={eps:.3g}")
    cuts = sorted(set(min(max(c, lo), hi) for c in cuts))
    segments = [(u, v) for u, v in zip(cuts[:-1], cuts[1:])
                if v > u and not any(hu <= u and v <= hv for hu, hv in holes)]
    raw, err, panels = [], 0.0, 0
    budget = spec.max_panels
    for u, v in segments:
        pts, samples = _sign_pieces(f, u, v, integrand.frequency, 1e-12 / max(integrand.frequency, 1.0))
        if integrand.antiderivative is not None:
            F = integrand.antiderivative(pts)
            raw.append(math.fsum(np.abs(np.diff(F))))
            rounding = getattr(integrand, "rounding", 8 * np.finfo(float).eps * float(np.max(np.abs(F))))
            err += rounding * len(pts)
            panels += len(pts) - 1
            continue
        share = spec.tol / scale / max(len(segments), 1)
        for a, b in zip(pts[:-1], pts[1:]):
            piece_tol = share * (b - a) / (v - u)
            val, e, used = _gk_adaptive(f, a, b, max(piece_tol, 1e-15), budget - panels)
            raw.append(abs(val))
            err += e
            panels += used
    value = math.fsum(raw) * scale
    err = float(err) * scale
    if err > spec.tol:
        flags.append("error-estimate-above-tolerance")
    return NormReport(functional, params or {}, value, err, panels, flags, excluded_mass=excluded)


# -- functionals of a coefficient sequence ------------------------------------

def cauchy_gap(seq: CoefficientSequence, kind, n: int, m: int,
               spec: QuadratureSpec = QuadratureSpec()) -> NormReport:
    """``||S_m - S_{n-1}||``, the norm of the block ``sum_{k=n}^{m} a_k trig(kx)``."""
    if not 1 <= n <= m:
        raise ValueError("cauchy_gap needs 1 <= n <= m")
    poly = TrigPolynomial(seq.values(n, m), n, kind)
    params = {"kind": SeriesKind.parse(kind).value, "n": n, "m": m}
    if not np.any(poly.coef):
        return NormReport("cauchy_gap", params, 0.0, 0.0, 0)
    return l1_norm(poly, spec, "cauchy_gap", params)


def vn_sn_gap(seq: CoefficientSequence, kind, n: int, spec: QuadratureSpec = QuadratureSpec()) -> NormReport:
    """``||V_n - S_n||`` using ``V_n - S_n = -sum_{k<=n} k/(n+1) a_k trig(kx)``."""
    if n < 1:
        raise ValueError("vn_sn_gap needs n >= 1")
    k = np.arange(1, n + 1)
    coef = -(k / (n + 1)) * seq.values(1, n)
    params = {"kind": SeriesKind.parse(kind).value, "n": n}
    if not np.any(coef):
        return NormReport("vn_sn_gap", params, 0.0, 0.0, 0)
    return l1_norm(TrigPolynomial(coef, 1, kind), spec, "vn_sn_gap", params)


def shell_mass(seq: CoefficientSequence, n: int, r: int, radius: float, horizon: int = 1 << 20) -> float:
    """Bound for ``int_{0<d<radius} |sum_{k>n} a_k trig(k(s+d))| dd`` at s in (2pi/r)Z.

    The neighbourhood is cut into shells pi/(r M_{j+1}) < d <= pi/(r M_j)
    with M_j growing geometrically. On a shell, for a split index M, the
    terms n < k <= M are bounded by their absolute sum and the rest by the
    step-r summation-by-parts bound together with sin(rd/2) >= rd/pi. The
    shells past the horizon are extrapolated geometrically, so the result
    is an estimate whenever that extrapolation is used.
    """
    M0 = max(1, int(math.ceil(math.pi / (r * radius))))
    top = max(horizon, 4 * M0, 4 * (n + r))
    vals = seq.values(1, top + r)
    a = np.abs(vals)
    var = np.abs(vals[:top] - vals[r:])
    var_tail = fit_tail(var, 1).estimate
    if not math.isfinite(var_tail):
        raise NoTailCertificate("variation tail is not summable; no singular mass bound")
    vsuf = np.concatenate([[0.0], np.cumsum(var[::-1])[::-1], [0.0]]) + var_tail  # vsuf[k] = sum_{j>=k}
    asum = np.concatenate([[0.0], np.cumsum(a)])  # asum[k] = sum_{j<=k}
    steps = int(4 * math.log2((top - r) / M0)) + 1 if top - r > M0 else 1
    edges = np.unique(np.round(M0 * 2.0 ** (np.arange(0, steps + 1) / 4.0)).astype(np.int64))
    edges = edges[edges <= top - r]
    lo, hi = edges[:-1], edges[1:]

    def bound(split):
        sp = np.maximum(split, n)
        A = asum[sp] - asum[n]
        B = 0.5 * (vsuf[sp + 1] + asum[sp + r] - asum[sp])
        return (math.pi / r) * ((1.0 / lo - 1.0 / hi) * A + np.log(hi / lo) * B)

    terms = np.minimum(bound(lo), bound(hi))
    last = terms[-8:]
    if last.size < 3 or np.any(last <= 0):
        rest = 0.0 if last.size and np.all(last == 0) else math.inf
    else:
        rho = math.exp(np.polyfit(np.arange(last.size), np.log(last), 1)[0])
        rest = last[-1] * rho / (1 - rho) if rho < 1 else math.inf
    return math.fsum(terms) + rest


def _singular_points(r: int) -> list[float]:
    return [TWO_PI * l / r for l in range(0, r // 2 + 1)]


def _class_sums(seq, n: int, r: int, horizon: int):
    """Residue-class sums sum_{k>n, k = rho mod r} a_k / k, each with a fitted tail."""
    k = np.arange(n + 1, horizon + 1)
    t = seq.values(n + 1, horizon) / k
    out = []
    for rho in range(r):
        sel = (k % r) == rho
        terms = np.zeros_like(t)
        terms[sel] = t[sel]
        fit = fit_tail(np.abs(terms), n + 1)
        if not math.isfinite(fit.estimate) or fit.estimate > math.fsum(np.abs(terms)):
            out.append(math.copysign(math.inf, float(np.sum(terms[-1000:]))) if np.any(terms) else 0.0)
            continue
        signs = np.sign(terms[-4096:][terms[-4096:] != 0])
        tail = fit.estimate * (signs[-1] if signs.size and np.all(signs == signs[-1]) else 0.0)
        out.append(math.fsum(terms) + tail)
    return out


def _antiderivative_at_singular(seq, kind: SeriesKind, n: int, r: int, l: int, horizon: int) -> float:
    trig = math.sin if kind is SeriesKind.COSINE else math.cos
    sign = 1.0 if kind is SeriesKind.COSINE else -1.0
    weights = []
    for rho in range(r):
        if kind is SeriesKind.COSINE and (2 * rho * l) % r == 0:
            weights.append(0.0)  # sin of a multiple of pi
        else:
            weights.append(trig(TWO_PI * rho * l / r))
    if not any(weights):
        return 0.0
    sums = _class_sums(seq, n, r, horizon)
    total = 0.0
    for w, c in zip(weights, sums):
        if w != 0.0 and c != 0.0:
            total += w * c
    return sign * total


def sn_f_gap(seq: CoefficientSequence, kind, n: int, r: int = 1,
             spec: QuadratureSpec = QuadratureSpec(), horizon: int = 1 << 21,
             order: int = 2) -> NormReport:
    """``||f - S_n||`` for the series sum f, without truncating f.

    The tail ``e = sum_{k>n} a_k trig(kx)`` is evaluated pointwise with
    :class:`TailEngine` (step ``r``), its sign changes on [0, pi] are
    located, and the norm is assembled from the termwise antiderivative at
    those points. Sampling stops at distance ``0.02/(n+1)`` from the points
    2 pi l / r; inside that distance e is taken to keep the sign of its
    nearest sample, and ``unsampled_mass`` bounds what that zone could hold.
    """
    kind = SeriesKind.parse(kind)
    if kind is SeriesKind.EXPONENTIAL:
        raise ValueError("sn_f_gap takes a cosine or sine series")
    params = {"kind": kind.value, "n": n, "r": r, "horizon": horizon}
    support = is_finite_support(seq)
    if support is not None and support <= n:
        return NormReport("sn_f_gap", params, 0.0, 0.0, 0, ["finite-support"])
    eng_e = TailEngine(seq, r, order, horizon)
    eng_g = TailEngine(seq, r, order + 1, horizon, weight="inv_k")
    flags = ["sign-assumed-near-singular-points"]
    if eng_e.tail_fit.estimate > 0:
        flags.append("difference-tail-extrapolated")
    sing = _singular_points(r)
    x_min = min(0.02 / (n + 1), 0.1 * math.pi / r)
    h = math.pi / (8.0 * (n + 1))
    grid = np.arange(0.0, math.pi + 0.5 * h, h)
    grid[-1] = min(grid[-1], math.pi)
    dist = np.min(np.abs(grid[:, None] - np.array(sing)[None, :]), axis=1)
    grid = grid[dist >= 16 * h]
    geo = x_min * 2.0 ** (np.arange(0, 64) / 8.0)
    geo = geo[geo < 16 * h]
    extra = []
    for s in sing:
        for side in (-1.0, 1.0):
            pts = s + side * geo
            extra.append(pts[(pts > 0) & (pts <= math.pi)])
    x = np.unique(np.concatenate([grid] + extra))
    x = x[np.min(np.abs(x[:, None] - np.array(sing)[None, :]), axis=1) >= x_min * (1 - 1e-12)]

    e_atol = max(spec.tol, 1e-12)

    def tail(xs):
        return eng_e.series(kind, n, xs, atol=e_atol, rtol=1e-2).value

    res = eng_e.series(kind, n, x, atol=e_atol, rtol=1e-2)
    y = res.value
    unresolved = int(np.sum(~res.converged))
    if unresolved:
        flags.append(f"sign-unresolved-at-{unresolved}-samples")
    # sign changes between consecutive samples not separated by a singular point
    s = np.sign(y)
    between = np.array([any(a < p < b for p in sing) for a, b in zip(x[:-1], x[1:])])
    change = np.flatnonzero((s[:-1] * s[1:] < 0) & ~between)
    roots = _refine_roots(tail, x[change], x[change + 1], y[change], y[change + 1], xtol=1e-6 * h) \
        if change.size else np.zeros(0)
    regular = np.unique(np.concatenate([roots, [math.pi] if not any(abs(p - math.pi) < 1e-15 for p in sing) else []]))
    count = len(regular) + len(sing)
    g_atol = max(0.25 * spec.tol * math.pi / max(count, 1), 1e-14)
    part = (lambda v: v.imag) if kind is SeriesKind.COSINE else (lambda v: -v.real)
    gres = eng_g.evaluate(n, regular, atol=g_atol, rtol=0.0) if regular.size else None
    G = dict(zip(regular.tolist(), part(gres.value).tolist())) if gres is not None else {}
    gerr = float(np.sum(gres.error)) if gres is not None else 0.0
    for l, p in enumerate(sing):
        G[p] = _antiderivative_at_singular(seq, kind, n, r, l, min(horizon, 1 << 22))
    pts = sorted(G)
    vals = np.array([G[p] for p in pts])
    if not np.all(np.isfinite(vals)):
        flags.append("divergent-antiderivative-at-singular-point")
        value = math.inf
    else:
        value = math.fsum(np.abs(np.diff(vals))) / math.pi
    try:
        sides = sum(1 if (p == 0.0 or abs(p - math.pi) < 1e-15) else 2 for p in sing)
        unsampled = float(sides * shell_mass(seq, n, r, x_min, horizon=min(horizon, 1 << 20)) / math.pi)
    except NoTailCertificate:
        unsampled = math.inf
    if not math.isfinite(unsampled):
        raise NoTailCertificate("no mass bound near the singular points; coefficients may not decay")
    err = 2.0 * gerr / math.pi
    if err > spec.tol:
        flags.append("error-estimate-above-tolerance")
    return NormReport("sn_f_gap", params, value, err, len(x), flags, unsampled_mass=unsampled)


def theorem4_bound(seq: CoefficientSequence, beta: BetaSpec, n: int, horizon: int | None = None) -> float:
    """``beta_{n+1} ln(n+1) + sum_{k>n} beta_k / k`` with a fitted tail.

    >>> from gmseries.sequences import make_generator
    >>> round(theorem4_bound(make_generator("harmonic"), BetaSpec("b1"), 10), 4)
    0.3132
    """
    if n < 1:
        raise ValueError("theorem4_bound needs n >= 1")
    horizon = horizon or max(1 << 16, 1024 * (n + 1))
    k = np.arange(n + 1, horizon + 1)
    terms = beta_array(beta, seq, k) / k
    fit = fit_tail(terms, n + 1)
    body = math.fsum(terms)
    # a fitted tail larger than everything summed so far certifies nothing
    if not math.isfinite(fit.estimate) or fit.estimate > body:
        raise NoTailCertificate("sum of beta_k / k does not look summable")
    head = beta_array(beta, seq, [n + 1])[0] * math.log(n + 1)
    return float(head + body + fit.estimate)
