"""Low-level numerical helpers shared by the public modules.

Nothing in here knows about sequence classes or series; it is argument
reduction, accurate summation, slope fits and the dyadic tail extrapolation
used whenever an infinite sum has to be truncated at a finite horizon.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

TWO_PI = 2.0 * math.pi

# 2*pi split into 30 + 30 + 53 bits so that q * _P1 and q * _P2 are exact
# for |q| < 2**23.
_P1 = 6.283185310661793
_P2 = -3.4822062768002926e-09
_P3 = -1.401373759235972e-18
_VELTKAMP = 134217729.0  # 2**27 + 1


def _split(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    c = _VELTKAMP * x
    hi = c - (c - x)
    return hi, x - hi


def _reduce(t: np.ndarray) -> np.ndarray:
    q = np.rint(t / TWO_PI)
    return ((t - q * _P1) - q * _P2) - q * _P3


def phase(k, x) -> np.ndarray:
    """Return ``k * x`` reduced to [-pi, pi], accurate to a few ulps.

    ``k`` must be integer valued with ``|k| < 2**26``; ``x`` any float.
    The product is formed exactly from a 26-bit head of ``x`` and reduced
    with a three-part representation of 2*pi.
    """
    x = _reduce(np.asarray(x, dtype=float))
    k = np.asarray(k, dtype=float)
    hi, lo = _split(x)
    return _reduce(k * hi) + k * lo


def fsum_complex(values) -> complex:
    values = np.asarray(values)
    if np.iscomplexobj(values):
        return complex(math.fsum(values.real), math.fsum(values.imag))
    return math.fsum(values)


def suffix_sums(values: np.ndarray) -> np.ndarray:
    """``out[i] = sum(values[i:])`` accumulated from the small end."""
    acc = np.cumsum(np.asarray(values, dtype=np.longdouble)[::-1])[::-1]
    return acc.astype(float)


def prefix_sums(values: np.ndarray) -> np.ndarray:
    """``out[i] = sum(values[:i])`` with a leading zero, in extended precision."""
    out = np.zeros(len(values) + 1, dtype=np.longdouble)
    np.cumsum(np.asarray(values, dtype=np.longdouble), out=out[1:])
    return out


def loglog_slope(x, y) -> float:
    """Least-squares slope of log(y) against log(x) over positive finite y."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    keep = np.isfinite(y) & (y > 0) & (x > 0)
    if keep.sum() < 2 or np.ptp(np.log(x[keep])) == 0:
        return float("nan")
    return float(np.polyfit(np.log(x[keep]), np.log(y[keep]), 1)[0])


@dataclass(frozen=True)
class TailFit:
    """Outcome of extrapolating a nonnegative series past its horizon."""

    estimate: float
    model: str
    rate: float
    blocks: int

    def beyond(self, end: int, index) -> np.ndarray:
        """Extrapolated ``sum_{k > index}`` for ``index >= end``, where ``end``
        is the last index of the data the fit was made on."""
        index = np.maximum(np.asarray(index, dtype=float), end)
        if self.estimate == 0.0 or not math.isfinite(self.estimate):
            return np.full(index.shape, self.estimate)
        if self.model == "geometric":
            return self.estimate * (end / index) ** (-math.log2(self.rate))
        return self.estimate * (np.log2(index) / math.log2(end)) ** (1.0 - self.rate)


POLYLOG_MAX_POWER = 4.0


def fit_tail(terms: np.ndarray, first_index: int, min_blocks: int = 3) -> TailFit:
    """Estimate ``sum_{k > last} terms`` from dyadic block sums.

    ``terms[i]`` is the (nonnegative) summand at index ``first_index + i``.
    Blocks are aligned to the end of the data: block 0 covers (H/2, H],
    block 1 covers (H/4, H/2] and so on. Two models are fitted to the log
    block sums of the last few blocks, geometric (power-law summands) and
    polylogarithmic (summands like 1/(k log^q k)), and the one with the
    smaller residual is extrapolated, the polylogarithmic one only when its
    log power is at most ``POLYLOG_MAX_POWER``. A non-decaying fit gives ``inf``.
    """
    terms = np.abs(np.asarray(terms, dtype=float))
    last = first_index + len(terms) - 1
    edges = [last]
    while edges[-1] // 2 >= first_index and len(edges) < 13:
        edges.append(edges[-1] // 2)
    sums = []
    for hi, lo in zip(edges[:-1], edges[1:]):
        sums.append(math.fsum(terms[lo + 1 - first_index: hi + 1 - first_index]))
    if len(sums) < min_blocks:
        return TailFit(float("nan"), "insufficient", float("nan"), len(sums))
    sums = np.array(sums[:8])
    if sums[0] == 0.0 and sums[1] == 0.0:
        return TailFit(0.0, "finite-support", 0.0, len(sums))
    if np.any(sums <= 0):
        # sparse blocks: fall back to the envelope of the nonzero ones
        pos = sums[sums > 0]
        if len(pos) < 2:
            return TailFit(float("inf"), "undetermined", float("nan"), len(sums))
        sums = np.maximum(sums, pos.min())
    # block j sits at log2 position p_j; fit against p (geometric) or log p
    pos = np.log2(np.array(edges[: len(sums)], dtype=float))
    y = np.log(sums)
    geo = np.polyfit(pos, y, 1, full=True)
    ply = np.polyfit(np.log(pos), y, 1, full=True)
    rss_geo = float(geo[1][0]) if len(geo[1]) else 0.0
    rss_ply = float(ply[1][0]) if len(ply[1]) else 0.0
    b0 = float(np.exp(np.polyval(geo[0], pos[0])))
    q = -float(ply[0][0])
    # a steep log-power is indistinguishable from geometric decay and extrapolates worse
    if rss_geo <= rss_ply or q > POLYLOG_MAX_POWER:
        rho = float(np.exp(geo[0][0]))
        if rho >= 1.0:
            return TailFit(float("inf"), "geometric", rho, len(sums))
        return TailFit(b0 * rho / (1.0 - rho), "geometric", rho, len(sums))
    if q <= 1.0:
        return TailFit(float("inf"), "polylog", q, len(sums))
    c = float(np.exp(ply[0][1]))
    j = pos[0]
    return TailFit(c * (j + 0.5) ** (1.0 - q) / (q - 1.0), "polylog", q, len(sums))


# Gauss-Kronrod 7/15 nodes and weights on [-1, 1] (nonnegative half).
GK15_NODES = np.array([
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0,
])
GK15_WEIGHTS = np.array([
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714,
])
G7_WEIGHTS = np.array([
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327,
])

_X15 = np.concatenate([-GK15_NODES[:-1], GK15_NODES[::-1]])
_WK15 = np.concatenate([GK15_WEIGHTS[:-1], GK15_WEIGHTS[::-1]])
_WG7 = np.zeros(15)
_WG7[[1, 3, 5, 7, 9, 11, 13]] = np.concatenate([G7_WEIGHTS[:-1], G7_WEIGHTS[::-1]])


def gk15_nodes(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronrod abscissae for each panel, shape (len(a), 15)."""
    mid = 0.5 * (a + b)
    half = 0.5 * (b - a)
    return mid[:, None] + half[:, None] * _X15[None, :]


def gk15_apply(values: np.ndarray, a: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Kronrod estimate and |Kronrod - Gauss| error per panel."""
    half = 0.5 * (b - a)
    k = half * (values @ _WK15)
    g = half * (values @ _WG7)
    return k, np.abs(k - g)
