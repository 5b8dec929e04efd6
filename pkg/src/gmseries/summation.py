"""Partial sums of cosine, sine and exponential series.

Three evaluation routes are provided:

* direct accumulation ``sum a_k trig(kx)`` with exactly reduced phases,
* the r-step summation-by-parts identity (:func:`abel_block_sum`), which
  trades the coefficients for their r-differences at the cost of the divisor
  ``2 sin(rx/2)``,
* :class:`TailEngine`, which evaluates infinite tails ``sum_{k>n} a_k z^k``
  by applying that identity repeatedly past a cut index K and certifying
  the dropped remainder from the size of the higher differences.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._numerics import TWO_PI, fit_tail, fsum_complex, phase
from .sequences import CoefficientSequence, SeriesKind

__all__ = [
    "BlockSumRequest", "BlockSumResult", "SingularPointError", "NoTailCertificate",
    "direct_block_sum", "abel_block_sum", "partial_sum", "vallee_poussin",
    "series_tail_bound", "TailEngine", "TailResult", "singular_distance", "trig_sum",
]

_EPS = np.finfo(float).eps


class SingularPointError(ValueError):
    """Evaluation requested too close to a zero of sin(rx/2)."""


class NoTailCertificate(ValueError):
    """The difference sequence does not decay, so no tail bound exists."""


def singular_distance(x, r: int):
    """Distance from x to the nearest point of (2 pi / r) Z."""
    step = TWO_PI / r
    x = np.asarray(x, dtype=float)
    return np.abs(x - step * np.rint(x / step))


@dataclass(frozen=True)
class BlockSumRequest:
    seq: CoefficientSequence
    n: int
    m: int
    r: int = 1
    x: float = 0.0
    kind: SeriesKind = SeriesKind.COSINE

    def __post_init__(self):
        if self.n < 1 or self.m < self.n:
            raise ValueError("need 1 <= n <= m")
        if self.r < 1:
            raise ValueError("step r must be >= 1")
        if not math.isfinite(self.x):
            raise ValueError("x must be finite")
        object.__setattr__(self, "kind", SeriesKind.parse(self.kind))
        if self.kind is SeriesKind.EXPONENTIAL:
            raise ValueError("block sums are defined for cos and sin series")


@dataclass
class BlockSumResult:
    value: float
    method: str
    components: dict = field(default_factory=dict)


def _trig(kind: SeriesKind, ph):
    return np.cos(ph) if kind is SeriesKind.COSINE else np.sin(ph)


def direct_block_sum(req: BlockSumRequest) -> BlockSumResult:
    """``sum_{k=n}^{m} a_k trig(kx)`` accumulated with correctly rounded summation."""
    k = np.arange(req.n, req.m + 1)
    a = req.seq.values(req.n, req.m)
    return BlockSumResult(fsum_complex(a * _trig(req.kind, phase(k, req.x))), "direct")


def abel_block_sum(req: BlockSumRequest, eps: float | None = None) -> BlockSumResult:
    """The block sum rebuilt from r-differences and two boundary blocks.

    For the cosine kind::

        sum_{k=n}^{m} a_k cos kx = 1/(2 sin(rx/2)) * [ sum_{k=n}^{m} (a_k - a_{k+r}) sin((k + r/2)x)
                                    + sum_{k=m+1}^{m+r} a_k sin((k - r/2)x)
                                    - sum_{k=n}^{n+r-1} a_k sin((k - r/2)x) ]

    and the sine kind swaps sin for cos inside the bracket and flips the sign.
    """
    n, m, r, x = req.n, req.m, req.r, req.x
    radius = 1e-6 * TWO_PI / r if eps is None else eps
    if singular_distance(x, r) < radius:
        raise SingularPointError(f"x={x!r} lies within {radius:.3g} of 2*pi*l/{r}")
    inner = np.sin if req.kind is SeriesKind.COSINE else np.cos
    a = req.seq.values(n, m + r)
    k = np.arange(n, m + 1)
    half = 0.5 * x
    diff = fsum_complex((a[: m - n + 1] - a[r:]) * inner(phase(2 * k + r, half)))
    kt = np.arange(m + 1, m + r + 1)
    trailing = fsum_complex(a[m - n + 1:] * inner(phase(2 * kt - r, half)))
    kl = np.arange(n, n + r)
    lead_a = a[:r] if m - n + 1 >= r else req.seq.values(n, n + r - 1)
    leading = fsum_complex(lead_a * inner(phase(2 * kl - r, half)))
    s = math.sin(float(phase(r, half)))
    pref = 1.0 / (2.0 * s) if req.kind is SeriesKind.COSINE else -1.0 / (2.0 * s)
    value = pref * fsum_complex([diff, trailing, -leading])
    return BlockSumResult(value, "abel", {"difference": diff, "trailing": trailing, "leading": leading,
                                          "prefactor": pref})


# -- vectorised partial sums ------------------------------------------------

_CHUNK = 1 << 22


def _exp_sum(coef: np.ndarray, k0: int, x: np.ndarray) -> np.ndarray:
    """``sum_j coef[j] z^(k0+j)`` by blocks: z^(k0 + bB + j) = z^(k0 + bB) * z^j."""
    size = coef.size
    width = int(min(512, max(16, 2 ** round(math.log2(math.sqrt(size) + 1)))))
    nb = -(-size // width)
    c = np.zeros(nb * width, dtype=complex if np.iscomplexobj(coef) else float)
    c[:size] = coef
    c = c.reshape(nb, width)
    out = np.empty(len(x), dtype=complex)
    rows = max(1, _CHUNK // max(width, nb))
    j = np.arange(width)
    starts = k0 + width * np.arange(nb)
    for i0 in range(0, len(x), rows):
        xs = x[i0: i0 + rows, None]
        inner = np.exp(1j * phase(j, xs)) @ c.T
        base = np.exp(1j * phase(starts, xs))
        out[i0: i0 + rows] = np.einsum("ij,ij->i", inner, base)
    return out


def trig_sum(coef: np.ndarray, k0: int, x, kind) -> np.ndarray:
    """``sum_j coef[j] trig((k0 + j) x)`` for every x (trig = cos, sin or exp)."""
    kind = SeriesKind.parse(kind)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    coef = np.asarray(coef)
    cplx = np.iscomplexobj(coef)
    if coef.size == 0:
        return np.zeros(len(x), dtype=complex if (cplx or kind is SeriesKind.EXPONENTIAL) else float)
    if kind is SeriesKind.EXPONENTIAL:
        return _exp_sum(coef, k0, x)
    if not cplx:
        s = _exp_sum(coef, k0, x)
        return s.real if kind is SeriesKind.COSINE else s.imag
    plus, minus = _exp_sum(coef, k0, x), _exp_sum(coef, k0, -x)
    return 0.5 * (plus + minus) if kind is SeriesKind.COSINE else (plus - minus) / 2j


def _scalar(x, out):
    return out[0] if np.ndim(x) == 0 else out


def partial_sum(seq, kind, n: int, x):
    """S_n at x. Cosine includes a_0/2; the exponential kind takes a pair
    ``(c_plus, c_minus)`` of sequences and sums ``|k| <= n``."""
    kind = SeriesKind.parse(kind)
    if n < 0:
        raise ValueError("n must be >= 0")
    if kind is SeriesKind.EXPONENTIAL:
        pos, neg = seq
        out = pos.a0 + trig_sum(pos.values(1, n), 1, x, kind) + trig_sum(neg.values(1, n), 1, -np.asarray(x), kind)
        return _scalar(x, out)
    out = trig_sum(seq.values(1, n), 1, x, kind)
    if kind is SeriesKind.COSINE:
        out = out + 0.5 * seq.a0
    return _scalar(x, out)


def vallee_poussin(seq, kind, n: int, x):
    """V_n = (S_0 + ... + S_n)/(n+1), via the weights 1 - k/(n+1)."""
    kind = SeriesKind.parse(kind)
    if n < 0:
        raise ValueError("n must be >= 0")
    w = 1.0 - np.arange(1, n + 1) / (n + 1)
    out = trig_sum(seq.values(1, n) * w, 1, x, kind)
    if kind is SeriesKind.COSINE:
        out = out + 0.5 * seq.a0
    return _scalar(x, out)


# -- infinite tails -----------------------------------------------------------

@dataclass
class TailResult:
    value: np.ndarray
    error: np.ndarray
    cut: np.ndarray
    converged: np.ndarray


class TailEngine:
    """Evaluate ``T_n(x) = sum_{k>n} w_k a_k z^k`` with z = e^{ix}.

    Past a cut K the remainder is rewritten ``order`` times with the step-r
    summation by parts, leaving boundary blocks divided by powers of
    ``1 - z^r`` and a remainder of size at most
    ``sum_{k > K + order*r} |D^order a_k| / |1 - z^r|^order``. The cut
    doubles from ``n`` until that bound meets the tolerance or reaches
    ``horizon``. ``weight="inv_k"`` evaluates the series with coefficients
    ``a_k / k`` (the termwise antiderivative).

    Beyond ``horizon`` the difference mass is extrapolated, so the returned
    error is an estimate that relies on that fit.
    """

    def __init__(self, seq: CoefficientSequence, r: int = 1, order: int = 2,
                 horizon: int = 1 << 21, weight: str | None = None):
        if r < 1 or order < 1:
            raise ValueError("r and order must be >= 1")
        if seq.complex_valued:
            raise ValueError("tail engine expects a real coefficient sequence")
        self.r, self.order, self.horizon = r, order, horizon
        top = horizon + order * r
        a = np.zeros(top + 1)
        a[1:] = seq.values(1, top)
        if weight == "inv_k":
            a[1:] /= np.arange(1, top + 1)
        elif weight is not None:
            raise ValueError(f"unknown weight {weight!r}")
        self._diffs = [a]
        for _ in range(order):
            prev = self._diffs[-1]
            d = np.zeros_like(prev)
            d[r:] = prev[r:] - prev[:-r]
            self._diffs.append(d)
        absd = np.abs(self._diffs[-1])
        # Past some index the computed differences are dominated by rounding
        # of the coefficients themselves; the mass there is extrapolated from
        # the clean range instead (coefficient rounding enters the error
        # through the separate rounding term).
        span = order * r
        amax = np.abs(a)
        for shift in range(1, span + 1):
            amax[shift:] = np.maximum(amax[shift:], np.abs(a[:-shift]))
        noise = (2.0 ** order) * 4 * _EPS * amax
        dirty = np.flatnonzero((absd < 64 * noise) & (noise > 0))
        dirty = dirty[dirty >= 1024]
        clean_end = int(dirty[0]) - 1 if dirty.size else top
        fit = fit_tail(absd[1: clean_end + 1], 1)
        self.tail_fit = fit
        if not math.isfinite(fit.estimate):
            raise NoTailCertificate(
                f"order-{order} differences with step {r} show no summable decay (fit: {fit.model})")
        suf = np.zeros(top + 2, dtype=np.longdouble)
        suf[: clean_end + 1] = np.cumsum(absd[clean_end::-1].astype(np.longdouble))[::-1]
        vsuf = (suf + fit.estimate).astype(float)  # V(K') = sum_{k >= K'} |D a_k|
        past = np.arange(clean_end + 1, top + 2)
        vsuf[clean_end + 1:] = fit.beyond(clean_end, past - 1)
        self._vsuf = vsuf
        self.clean_end = clean_end
        self._abs_prefix = np.concatenate([[0.0], np.cumsum(np.abs(a[1:]))])
        self._a = a

    def remainder_mass(self, K) -> np.ndarray:
        """sum_{k > K + order*r} |D^order a_k| (fitted beyond the horizon)."""
        return self._vsuf[np.asarray(K) + self.order * self.r + 1]

    def _boundary(self, K: int, x: np.ndarray, w: np.ndarray):
        r = self.r
        total = np.zeros(len(x), dtype=complex)
        size = np.zeros(len(x))
        inv = 1.0 / (1.0 - w)
        power = inv.copy()
        for j in range(self.order):
            lo = K + j * r + 1
            coef = self._diffs[j][lo: lo + r]
            b = trig_sum(coef, lo, x, SeriesKind.EXPONENTIAL) * power
            total += b
            size += np.abs(b)
            power = power * inv
        return total, size

    def evaluate(self, n: int, x, atol: float = 1e-10, rtol: float = 1e-8) -> TailResult:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        r = self.r
        if n < 0 or n >= self.horizon:
            raise ValueError("need 0 <= n < horizon")
        w = np.exp(1j * phase(r, x))
        gap = np.abs(1.0 - w)
        if np.any(gap == 0):
            raise SingularPointError("tail engine evaluated on the singular set")
        value = np.zeros(len(x), dtype=complex)
        error = np.full(len(x), np.inf)
        cut = np.zeros(len(x), dtype=np.int64)
        done = np.zeros(len(x), dtype=bool)
        direct = np.zeros(len(x), dtype=complex)
        active = np.arange(len(x))
        K = n
        while active.size:
            xa = x[active]
            bnd, bsize = self._boundary(K, xa, w[active])
            total = direct[active] + bnd
            rem = self.remainder_mass(K) / gap[active] ** self.order
            rnd = 4 * _EPS * (self._abs_prefix[K] - self._abs_prefix[n] + bsize)
            err = rem + rnd
            value[active], error[active], cut[active] = total, err, K
            ok = err <= np.maximum(atol, rtol * np.abs(total))
            done[active[ok]] = True
            if K >= self.horizon:
                break
            active = active[~ok]
            if not active.size:
                break
            K_new = min(max(2 * K, K + 64), self.horizon)
            direct[active] += trig_sum(self._a[K + 1: K_new + 1], K + 1, x[active], SeriesKind.EXPONENTIAL)
            K = K_new
        return TailResult(value, error, cut, done)

    def series(self, kind, n: int, x, **tol) -> TailResult:
        """Cosine or sine tail ``sum_{k>n} a_k trig(kx)`` (real part or imaginary part)."""
        res = self.evaluate(n, x, **tol)
        kind = SeriesKind.parse(kind)
        part = res.value.real if kind is SeriesKind.COSINE else res.value.imag
        return TailResult(part, res.error, res.cut, res.converged)


def series_tail_bound(seq: CoefficientSequence, n: int, r: int, x: float, horizon: int = 1 << 18,
                      eps: float | None = None) -> tuple[float, list[str]]:
    """Upper bound for ``|sum_{k>n} a_k trig(kx)|`` for either trig kind.

    The bound is ``(V + sum_{k=n+1}^{n+r} |a_k|) / (2 |sin(rx/2)|)`` with
    ``V = sum_{k>n} |a_k - a_{k+r}|``. V past ``horizon`` comes from a
    fitted extrapolation, which the returned flag records.
    """
    from .classes import tail_variation

    radius = 1e-6 * TWO_PI / r if eps is None else eps
    if singular_distance(x, r) < radius:
        raise SingularPointError(f"x={x!r} lies within {radius:.3g} of 2*pi*l/{r}")
    horizon = max(horizon, 2 * (n + 1))
    var = tail_variation(seq, n + 1, r, horizon)
    if not math.isfinite(var.tail):
        raise NoTailCertificate("variation tail is not summable on the evaluated prefix")
    boundary = math.fsum(np.abs(seq.values(n + 1, n + r)))
    s = abs(math.sin(float(phase(r, 0.5 * x))))
    bound = (var.total + boundary) / (2.0 * s)
    flags = [] if var.tail == 0 else ["assumes-fitted-variation-tail-is-an-overestimate"]
    return bound, flags
