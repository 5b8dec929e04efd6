"""Named, deterministic studies that reproduce the counterexamples and the
convergence criteria at desk scale.

Each ``run_*`` function returns a :class:`StudyReport`: a set of tables
(lists of row dicts) plus a list of checks, every check carrying the
numbers it was judged on. :func:`write_study` stores a report as
``{study_id}-{timestamp}.json`` with one CSV per table; the timestamp only
appears in file names, so equal inputs give byte-identical files.
"""

from __future__ import annotations

import csv
import datetime as _dt
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np

from .beta import BetaSpec, beta_series_tail
from .classes import (ClassSpec, _jsonable, block_variation, coefficient_criterion, membership_scan,
                      o1_verdict, remark1_chain, remark1_condition, remark2_chain, theorem3_hypothesis)
from .lnorm import QuadratureSpec, cauchy_gap, sn_f_gap, theorem4_bound, vn_sn_gap
from .sequences import CoefficientSequence, SeriesKind, make_generator

__all__ = [
    "StudyReport", "Check", "STUDY_IDS", "DEFAULT_GRID",
    "run_remark5", "run_remark6", "run_criterion_iff", "run_embedding_suite",
    "run_theorem3_suite", "run_theorem4_suite", "run_study", "write_study", "remark5_lower_bound",
]

STUDY_IDS = ("remark5_cos", "remark5_sin", "remark6", "criterion_iff",
             "theorem3_suite", "theorem4_suite", "embedding_suite")
DEFAULT_GRID = tuple(2 ** j for j in range(4, 13))


@dataclass
class Check:
    name: str
    passed: bool
    values: dict = field(default_factory=dict)


@dataclass
class StudyReport:
    study_id: str
    params: dict
    tables: dict[str, list[dict]] = field(default_factory=dict)
    checks: list[Check] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def check(self, name: str) -> Check:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_dict(self) -> dict:
        out = _jsonable(asdict(self))
        out["passed"] = self.passed
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)


def _pmap(func: Callable, items: Iterable, jobs: int | None):
    items = list(items)
    if not jobs or jobs <= 1 or len(items) <= 1:
        return [func(i) for i in items]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(func, items))


def _check_grid(grid: Sequence[int]) -> list[int]:
    grid = [int(g) for g in grid]
    if not grid or any(b <= a for a, b in zip(grid, grid[1:])) or grid[0] < 1:
        raise ValueError("grid must be a nonempty, strictly increasing list of positive integers")
    return grid


# -- divergent cosine and sine series ---------------------------------------------

_R5 = {
    SeriesKind.COSINE: (3, 1, math.sin(2 * math.pi / 3) / math.pi),
    SeriesKind.SINE: (2, 1, 2 / math.pi),
}


def remark5_lower_bound(kind, n: int, M: int) -> float:
    """``C * sum_{k=n}^{M} 1/(u ln u ln ln u)`` with u = qk + 1 (q = 3 cos, 2 sin)."""
    q, shift, const = _R5[SeriesKind.parse(kind)]
    u = q * np.arange(n, M + 1, dtype=float) + shift
    lu = np.log(u)
    return const * math.fsum(1.0 / (u * lu * np.log(lu)))


def _lnlnln(u: float) -> float:
    return math.log(math.log(math.log(u)))


def run_remark5(kind, n: int = 50, M: int = 5000, spec: QuadratureSpec = QuadratureSpec(),
                growth_M: Sequence[int] = (500, 5000, 500_000), growth_tol: float = 0.15) -> StudyReport:
    """Lower-bound sum versus the measured Cauchy gap for the remark5 generators.

    The gap is ``||S_{3M+2} - S_{3n-1}||`` for the cosine series and
    ``||S_{2M+1} - S_{2n-1}||`` for the sine series. The divergence itself
    needs M of order exp(exp(exp n)) and is out of reach; what is checked
    is the mechanism: gap >= lower bound, and the lower bound growing like
    ln ln ln of the top index.
    """
    kind = SeriesKind.parse(kind)
    if not M >= n >= 2:
        raise ValueError("run_remark5 needs M >= n >= 2")
    q = _R5[kind][0]
    seq = make_generator("remark5_cos" if kind is SeriesKind.COSINE else "remark5_sin")
    lo, hi = q * n, q * M + q - 1
    gap = cauchy_gap(seq, kind, lo, hi, spec)
    bound = remark5_lower_bound(kind, n, M)
    rep = StudyReport(f"remark5_{kind.value}", {"kind": kind.value, "n": n, "M": M, "tol": spec.tol,
                                               "growth_M": list(growth_M)})
    rep.tables["gap"] = [{"n": n, "M": M, "block_start": lo, "block_end": hi, "gap": gap.value,
                          "gap_error": gap.error_estimate, "lower_bound": bound}]
    rep.checks.append(Check("gap-at-least-lower-bound", gap.value >= bound - spec.tol,
                            {"gap": gap.value, "lower_bound": bound, "tol": spec.tol}))
    const = _R5[kind][2]
    rows, increasing, within = [], True, True
    prev = None
    for Mg in growth_M:
        if Mg < n:
            continue
        b = remark5_lower_bound(kind, n, Mg)
        row = {"M": Mg, "lower_bound": b}
        if prev is not None:
            pM, pb = prev
            inc = b - pb
            pred = const / q * (_lnlnln(q * Mg + 1) - _lnlnln(q * pM + 1))
            row.update(increment=inc, predicted=pred, relative_deviation=abs(inc - pred) / pred)
            increasing &= inc > 0
            within &= abs(inc - pred) <= growth_tol * pred
        rows.append(row)
        prev = (Mg, b)
    rep.tables["growth"] = rows
    rep.checks.append(Check("lower-bound-strictly-increasing", bool(increasing), {"M": list(growth_M)}))
    rep.checks.append(Check("increments-match-integral-comparison", bool(within), {"tolerance": growth_tol}))
    rep.notes.append("divergence needs M ~ exp(exp(exp n)); only the lower-bound mechanism is checked")
    return rep


# -- remark6 study ----------------------------------------------------------------

def run_remark6(r: int = 3, grid: Sequence[int] = DEFAULT_GRID, beta6: BetaSpec | None = None,
                spec: QuadratureSpec = QuadratureSpec(), beta5: BetaSpec | None = None,
                series_horizon: int = 1 << 16, jobs: int | None = None) -> StudyReport:
    """Three sub-studies of d_n = 1/n^2 on multiples of r (r >= 3).

    (1) RBVS(b5, r) scan, expected bounded; (2) sum b6_k/k, expected
    summable; (3) GM(b6, 2) scan, expected growing linearly, next to the
    lower bound block_variation(n, 2) >= 1/(4rn).
    """
    if r < 3:
        raise ValueError("run_remark6 needs r >= 3")
    grid = _check_grid(grid)
    beta6 = beta6 or BetaSpec("b6", c=2.0, horizon=max(1 << 17, 4 * grid[-1]))
    beta5 = beta5 or BetaSpec("b5", c=2.0)
    seq = make_generator("remark6", {"r": r})
    rep = StudyReport("remark6", {"r": r, "grid": grid, "beta6": beta6.to_dict(), "beta5": beta5.to_dict(),
                                  "series_horizon": series_horizon})

    rbvs = membership_scan(seq, ClassSpec("RBVS(beta,r)", r=r, beta=beta5), grid)
    rep.tables["rbvs_b5"] = [{"m": m, "variation": v, "majorant": b, "ratio": q}
                             for m, v, b, q in zip(rbvs.grid, rbvs.variations, rbvs.majorants, rbvs.ratios)]
    top = [q for m, q in zip(rbvs.grid, rbvs.ratios) if m * 10 >= grid[-1]]
    spread = max(top) / min(top) if top and min(top) > 0 else float("inf")
    rep.checks.append(Check("rbvs-b5-bounded", rbvs.verdict == "consistent",
                            {"verdict": rbvs.verdict, "trend_slope": rbvs.trend_slope, "fitted_C": rbvs.fitted_C}))
    rep.checks.append(Check("rbvs-b5-fitted-C-stable-top-decade", spread <= 1.10,
                            {"max_over_min": spread, "top_decade_ratios": top}))

    series = beta_series_tail(beta6, seq, 2, series_horizon)
    rep.tables["b6_series"] = [{"from": 2, "horizon": series_horizon, "value": series.value,
                                "tail": series.tail, "model": series.fit.model}]
    rep.checks.append(Check("b6-series-summable", series.verdict == "summable",
                            {"value": series.value, "tail": series.tail}))

    gm = membership_scan(seq, ClassSpec("GM(beta,r)", r=2, beta=beta6), grid)
    lower = [1.0 / (4 * r * m) for m in grid]
    rep.tables["gm_b6_2"] = [{"m": m, "variation": v, "lower_bound": lb, "majorant": b, "ratio": q,
                              "majorant_times_m2": b * m * m}
                             for m, v, lb, b, q in zip(gm.grid, gm.variations, lower, gm.majorants, gm.ratios)]
    rep.checks.append(Check("block-variation-above-1/(4rn)",
                            all(v >= lb for v, lb in zip(gm.variations, lower)),
                            {"min_margin": min(v / lb for v, lb in zip(gm.variations, lower))}))
    rep.checks.append(Check("gm-b6-2-inconsistent", gm.verdict == "inconsistent",
                            {"verdict": gm.verdict, "trend_slope": gm.trend_slope}))
    rep.tables["verdicts"] = [
        {"sub_report": "rbvs_b5", "verdict": rbvs.verdict, "trend_slope": rbvs.trend_slope},
        {"sub_report": "b6_series", "verdict": series.verdict, "trend_slope": None},
        {"sub_report": "gm_b6_2", "verdict": gm.verdict, "trend_slope": gm.trend_slope},
    ]
    rep.checks.append(Check("gm-b6-2-slope-at-least-0.8", bool(gm.trend_slope >= 0.8),
                            {"trend_slope": gm.trend_slope}))
    return rep


# -- criterion contrast ---------------------------------------------------------------

def run_criterion_iff(seq: CoefficientSequence, kind="cos", grid: Sequence[int] = DEFAULT_GRID,
                      spec: QuadratureSpec = QuadratureSpec(), functional: str = "sn_f_gap",
                      r: int = 1, jobs: int | None = None) -> StudyReport:
    """Norm column against ``|a_n| ln n`` with an o(1) verdict on each."""
    grid = _check_grid(grid)
    kind = SeriesKind.parse(kind)
    if functional == "sn_f_gap":
        reports = _pmap(lambda n: sn_f_gap(seq, kind, n, r=r, spec=spec), grid, jobs)
    elif functional == "vn_sn_gap":
        reports = _pmap(lambda n: vn_sn_gap(seq, kind, n, spec), grid, jobs)
    else:
        raise ValueError(f"unknown functional {functional!r}")
    norms = [rp.value for rp in reports]
    coef = coefficient_criterion(seq, grid)
    mono = membership_scan(seq, ClassSpec("M"), grid)
    desc = seq.descriptor if seq.name != "closure" else {"name": "closure"}
    rep = StudyReport("criterion_iff", {"generator": desc, "kind": kind.value, "grid": grid,
                                        "functional": functional, "r": r, "tol": spec.tol})
    rep.tables["pairs"] = [{"n": n, "norm": v, "error": rp.error_estimate, "unsampled_mass": rp.unsampled_mass,
                            "criterion": c} for n, v, rp, c in zip(grid, norms, reports, coef.values)]
    norm_verdict, norm_limit = o1_verdict(grid, norms)
    rep.checks.append(Check("monotone-coefficients", mono.verdict == "consistent", {"verdict": mono.verdict}))
    rep.checks.append(Check("trend-agreement", norm_verdict == coef.verdict,
                            {"norm_verdict": norm_verdict, "norm_limit_over_last": norm_limit,
                             "criterion_verdict": coef.verdict, "criterion_limit_over_last": coef.trend}))
    return rep


# -- embeddings -------------------------------------------------------------------

DEFAULT_EMBEDDING_CASES = (
    {"generator": {"name": "harmonic", "params": {}}, "q": 1, "r": 3, "beta": {"variant": "b5", "c": 2.0}},
    {"generator": {"name": "remark6", "params": {"r": 6}}, "q": 2, "r": 6, "beta": {"variant": "b5", "c": 2.0}},
    {"generator": {"name": "constant", "params": {}}, "q": 1, "r": 3, "beta": {"variant": "b1"}},
    {"generator": {"name": "harmonic", "params": {}}, "q": 1, "r": 2,
     "beta": {"variant": "b6", "c": 2.0, "horizon": 1 << 14}},
)


def run_embedding_suite(cases: Sequence[dict] = DEFAULT_EMBEDDING_CASES, grid: Sequence[int] = DEFAULT_GRID,
                        horizon: int = 1 << 16) -> StudyReport:
    """Pointwise proof-chain inequalities for both embedding statements.

    Each case names a generator, a pair q | r and a majorant. The block
    chain (r = pq) and the tail chain are checked at every grid point.
    """
    grid = _check_grid(grid)
    rep = StudyReport("embedding_suite", {"cases": list(cases), "grid": grid, "horizon": horizon})
    for i, case in enumerate(cases):
        seq = make_generator(case["generator"]["name"], case["generator"].get("params", {}))
        q, r = int(case["q"]), int(case["r"])
        beta = BetaSpec.from_json(case["beta"])
        label = f"{case['generator']['name']}:q={q}:r={r}:{beta.variant}"
        p = r // q
        chain1 = remark1_chain(seq, beta, q, p, grid)
        chain2 = remark2_chain(seq, q, r, grid, horizon)
        cond = remark1_condition(beta, seq, q, p, grid)
        rows = []
        for c1, c2 in zip(chain1, chain2):
            rows.append({"n": c1.n, "block_lhs": c1.lhs, "block_mid": c1.mid, "block_rhs": c1.rhs,
                         "block_holds": c1.holds, "tail_lhs": c2.lhs, "tail_mid": c2.mid, "tail_rhs": c2.rhs,
                         "tail_holds": c2.holds, **{f"block_{k}": v for k, v in c1.detail.items()},
                         "tail_fitted_holds": c2.detail.get("fitted_holds")})
        rep.tables[f"case{i}"] = rows
        rep.checks.append(Check(f"{label}:block-chain", all(c.holds for c in chain1),
                                {"failures": [c.n for c in chain1 if not c.holds]}))
        rep.checks.append(Check(f"{label}:tail-chain", all(c.holds for c in chain2),
                                {"failures": [c.n for c in chain2 if not c.holds]}))
        rep.notes.append(f"{label}: beta condition ratio verdict {cond.verdict}, sup {cond.sup:.6g}")
    return rep


# -- norm suites -----------------------------------------------------------------

def run_theorem4_suite(r: int = 3, grid: Sequence[int] = tuple(2 ** j for j in range(4, 10)),
                       beta: BetaSpec | None = None, spec: QuadratureSpec = QuadratureSpec(),
                       jobs: int | None = None, decreasing_from: int = 32) -> StudyReport:
    """||f - S_n|| for the remark6 cosine series against the bound
    beta_{n+1} ln(n+1) + sum_{k>n} beta_k/k."""
    grid = _check_grid(grid)
    beta = beta or BetaSpec("b5", c=2.0)
    seq = make_generator("remark6", {"r": r})
    gaps = _pmap(lambda n: sn_f_gap(seq, "cos", n, r=r, spec=spec), grid, jobs)
    bounds = [theorem4_bound(seq, beta, n) for n in grid]
    rep = StudyReport("theorem4_suite", {"r": r, "grid": grid, "beta": beta.to_dict(), "tol": spec.tol})
    ratios = [g.value / b for g, b in zip(gaps, bounds)]
    rep.tables["gap_vs_bound"] = [{"n": n, "sn_f_gap": g.value, "error": g.error_estimate,
                                   "unsampled_mass": g.unsampled_mass, "bound": b, "ratio": q}
                                  for n, g, b, q in zip(grid, gaps, bounds, ratios)]
    tail = [g.value for n, g in zip(grid, gaps) if n >= decreasing_from]
    rep.checks.append(Check("strictly-decreasing", all(b < a for a, b in zip(tail, tail[1:])),
                            {"from": decreasing_from}))
    spread = max(ratios) / min(ratios) if min(ratios) > 0 else float("inf")
    rep.checks.append(Check("bounded-ratio-to-bound", spread < 3.0, {"max_over_min": spread, "K": max(ratios)}))
    verdict, limit = o1_verdict(grid, [g.value for g in gaps])
    rep.checks.append(Check("o(1)-trend", verdict == "o(1)", {"limit_over_last": limit}))
    return rep


def run_theorem3_suite(seq: CoefficientSequence | None = None, kind="cos",
                       grid: Sequence[int] = (8, 16, 32, 64, 128, 256),
                       beta: BetaSpec | None = None, spec: QuadratureSpec = QuadratureSpec(),
                       jobs: int | None = None) -> StudyReport:
    """||V_n - S_n|| next to the weighted hypothesis sum, and the constant in
    ||V_n - S_n|| <= K [ (1/(n+1)) sum_j ||S_j - S_[j/2]|| + max_k ||S_k - S_[n/2]|| ]
    fitted on the grid."""
    grid = _check_grid(grid)
    seq = seq or make_generator("harmonic")
    beta = beta or BetaSpec("b1")
    kind = SeriesKind.parse(kind)
    hyp = theorem3_hypothesis(seq, beta, grid)
    vs = _pmap(lambda n: vn_sn_gap(seq, kind, n, spec), grid, jobs)
    top = grid[-1]
    half_gap = {j: (cauchy_gap(seq, kind, j // 2 + 1, j, spec).value if j // 2 + 1 <= j else 0.0)
                for j in range(1, top + 1)}
    rhs = []
    for n in grid:
        avg = math.fsum(half_gap[j] for j in range(1, n + 1)) / (n + 1)
        h = n // 2
        mx = max([cauchy_gap(seq, kind, h + 1, k, spec).value for k in range(h + 1, n + 1)] + [0.0])
        rhs.append(avg + mx)
    ratios = [v.value / b if b > 0 else 0.0 for v, b in zip(vs, rhs)]
    rep = StudyReport("theorem3_suite", {"generator": seq.descriptor if seq.name != "closure" else "closure",
                                         "kind": kind.value, "grid": grid, "beta": beta.to_dict()})
    rep.tables["vn_sn"] = [{"n": n, "vn_sn_gap": v.value, "hypothesis_sum": hv, "reference_rhs": b, "ratio": q}
                           for n, v, hv, b, q in zip(grid, vs, hyp.values, rhs, ratios)]
    v_verdict, v_lim = o1_verdict(grid, [v.value for v in vs])
    rep.checks.append(Check("hypothesis-and-gap-agree", (hyp.verdict == "o(1)") <= (v_verdict == "o(1)"),
                            {"hypothesis": hyp.verdict, "vn_sn_gap": v_verdict}))
    rep.checks.append(Check("reference-inequality-fitted-constant", math.isfinite(max(ratios)),
                            {"K": max(ratios)}))
    return rep


# -- dispatch ------------------------------------------------------------------------

def run_study(study_id: str, params: dict | None = None, spec: QuadratureSpec | None = None,
              jobs: int | None = None) -> StudyReport:
    """Run a study by id with JSON-style parameters."""
    params = dict(params or {})
    spec = spec or QuadratureSpec(tol=float(params.pop("tol", 1e-6)))
    params.pop("tol", None)
    if study_id in ("remark5_cos", "remark5_sin"):
        return run_remark5(study_id.split("_")[1], int(params.get("n", 50)), int(params.get("M", 5000)), spec,
                           tuple(params.get("growth_M", (500, 5000, 500_000))))
    if study_id == "remark6":
        b6 = BetaSpec.from_json(params["beta6"]) if "beta6" in params else None
        return run_remark6(int(params.get("r", 3)), params.get("grid", DEFAULT_GRID), b6, spec, jobs=jobs)
    if study_id == "criterion_iff":
        gen = params.get("generator", {"name": "harmonic", "params": {}})
        seq = make_generator(gen["name"], gen.get("params", {}))
        return run_criterion_iff(seq, params.get("kind", "cos"), params.get("grid", DEFAULT_GRID), spec,
                                 params.get("functional", "sn_f_gap"), int(params.get("r", 1)), jobs)
    if study_id == "embedding_suite":
        return run_embedding_suite(params.get("cases", DEFAULT_EMBEDDING_CASES), params.get("grid", DEFAULT_GRID),
                                   int(params.get("horizon", 1 << 16)))
    if study_id == "theorem4_suite":
        beta = BetaSpec.from_json(params["beta"]) if "beta" in params else None
        return run_theorem4_suite(int(params.get("r", 3)), params.get("grid", tuple(2 ** j for j in range(4, 10))),
                                  beta, spec, jobs)
    if study_id == "theorem3_suite":
        gen = params.get("generator", {"name": "harmonic", "params": {}})
        seq = make_generator(gen["name"], gen.get("params", {}))
        beta = BetaSpec.from_json(params["beta"]) if "beta" in params else None
        return run_theorem3_suite(seq, params.get("kind", "cos"),
                                  params.get("grid", (8, 16, 32, 64, 128, 256)), beta, spec, jobs)
    raise ValueError(f"unknown study id {study_id!r}")


def write_study(report: StudyReport, out_dir: str | Path, timestamp: str | None = None) -> list[Path]:
    """Write the JSON report and one CSV per table; returns the paths written."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    stamp = timestamp or _dt.datetime.now(_dt.timezone.utc).strftime("%Y%m%dT%H%M%SZ")
    base = f"{report.study_id}-{stamp}"
    paths = [out / f"{base}.json"]
    paths[0].write_text(report.to_json() + "\n")
    for name, rows in report.tables.items():
        if not rows:
            continue
        path = out / f"{base}-{name}.csv"
        cols = list(dict.fromkeys(k for row in rows for k in row))
        with path.open("w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=cols, lineterminator="\n")
            w.writeheader()
            for row in rows:
                w.writerow({k: _jsonable(v) for k, v in row.items()})
        paths.append(path)
    return paths
