"""Command-line front end.

Exit codes: 0 success (or consistent verdict), 2 invalid configuration,
3 inconsistent verdict or failed study check, 4 inconclusive verdict,
5 numerical failure. Errors are printed as one line on stderr::

    error code=2 kind=config message="..."
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import re
import sys
from pathlib import Path

from .beta import BetaError, BetaSpec
from .classes import CLASS_IDS, ClassError, ClassSpec, membership_scan
from .experiments import STUDY_IDS, _jsonable, _pmap, run_study, write_study
from .lnorm import QuadratureError, QuadratureSpec, cauchy_gap, sn_f_gap, vn_sn_gap
from .sequences import CoefficientSequence, GeneratorError, SeriesKind
from .summation import NoTailCertificate, SingularPointError

log = logging.getLogger("gmseries")

EXIT_OK, EXIT_CONFIG, EXIT_INCONSISTENT, EXIT_INCONCLUSIVE, EXIT_NUMERIC = 0, 2, 3, 4, 5
_VERDICT_EXIT = {"consistent": EXIT_OK, "inconsistent": EXIT_INCONSISTENT, "inconclusive": EXIT_INCONCLUSIVE}
FUNCTIONALS = ("partial_sum", "cauchy_gap", "vn_sn_gap", "sn_f_gap")


class ConfigError(ValueError):
    pass


class NumericFailure(RuntimeError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def parse_grid(text: str) -> list[int]:
    """``start:stop:step`` with a geometric step, or a comma list.

    >>> parse_grid("16:4096:4")
    [16, 64, 256, 1024, 4096]
    """
    text = str(text).strip()
    if ":" not in text:
        try:
            return [int(v) for v in text.split(",") if v.strip()]
        except ValueError as exc:
            raise ConfigError(f"bad grid {text!r}") from exc
    parts = text.split(":")
    if len(parts) != 3:
        raise ConfigError(f"grid must be start:stop:step, got {text!r}")
    try:
        start, stop, step = int(parts[0]), int(parts[1]), float(parts[2])
    except ValueError as exc:
        raise ConfigError(f"bad grid {text!r}") from exc
    if start < 1 or stop < start or step <= 1:
        raise ConfigError("grid needs 1 <= start <= stop and step > 1")
    out, v = [], float(start)
    while round(v) <= stop:
        if not out or round(v) > out[-1]:
            out.append(int(round(v)))
        v *= step
    return out


def _load_json_arg(text: str, what: str):
    path = Path(text)
    try:
        if not text.lstrip().startswith("{") and path.exists():
            return json.loads(path.read_text())
        return json.loads(text)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read {what}: {exc}") from exc


def _param_value(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file with option values")
    common.add_argument("--param", action="append", default=[], metavar="KEY=VALUE",
                        help="override a config entry (value parsed as JSON when possible)")
    common.add_argument("--generator", help="generator descriptor as JSON or a path to a JSON file")
    common.add_argument("--kind", help="cos, sin or exp")
    common.add_argument("--class", dest="class_id", help=f"class id, one of {', '.join(CLASS_IDS)} or e.g. GM(b6,2)")
    common.add_argument("--beta", help="majorant as JSON, e.g. '{\"variant\": \"b5\", \"c\": 2}'")
    common.add_argument("--r", type=int)
    common.add_argument("--grid", help="start:stop:geometric-step or a comma list")
    common.add_argument("--tol", type=float)
    common.add_argument("--horizon", type=int)
    common.add_argument("--jobs", type=int)
    common.add_argument("--out", help="output file (classify, norm, plotdata) or directory (study)")
    common.add_argument("--format", choices=("json", "csv"))

    parser = _Parser(prog="gmseries", description="Diagnostics for general monotone "
                                     "coefficient sequences and L1 convergence of trigonometric series.")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("classify", parents=[common], help="scan a sequence against a class")
    p = sub.add_parser("norm", parents=[common], help="L1 norm functionals")
    p.add_argument("--functional", choices=FUNCTIONALS)
    p.add_argument("--n", type=int)
    p.add_argument("--m", type=int)
    p = sub.add_parser("study", parents=[common], help="run a named study")
    p.add_argument("study_id", nargs="?", choices=STUDY_IDS)
    p = sub.add_parser("plotdata", parents=[common], help="re-emit a report as x,y CSV")
    p.add_argument("report", nargs="?", help="JSON report file")
    p.add_argument("--table")
    p.add_argument("--x")
    p.add_argument("--y")
    return parser


def _resolve(args: argparse.Namespace) -> dict:
    cfg: dict = {}
    if args.config:
        loaded = _load_json_arg(args.config, "config")
        if not isinstance(loaded, dict):
            raise ConfigError("config file must hold a JSON object")
        cfg.update(loaded)
    for key, value in vars(args).items():
        if key in ("config", "param", "command") or value is None:
            continue
        cfg[key] = value
    if "class" in cfg and "class_id" not in cfg:
        cfg["class_id"] = cfg.pop("class")
    for item in args.param:
        if "=" not in item:
            raise ConfigError(f"--param expects key=value, got {item!r}")
        key, value = item.split("=", 1)
        cfg[key.strip()] = _param_value(value)
    return cfg


def _generator(cfg: dict) -> CoefficientSequence:
    desc = cfg.get("generator")
    if desc is None:
        raise ConfigError("a generator descriptor is required")
    if isinstance(desc, str):
        desc = _load_json_arg(desc, "generator")
    if not isinstance(desc, dict) or "name" not in desc:
        raise ConfigError("generator descriptor needs a 'name'")
    return CoefficientSequence.from_json(desc)


def _beta(cfg: dict) -> BetaSpec | None:
    b = cfg.get("beta")
    if b is None:
        return None
    if isinstance(b, str):
        b = {"variant": b} if re.fullmatch(r"b[1-6]", b) else _load_json_arg(b, "beta")
    return BetaSpec.from_json(b)


def _class_spec(cfg: dict) -> ClassSpec:
    cid = cfg.get("class_id")
    if not cid:
        raise ConfigError("--class is required")
    beta = _beta(cfg)
    r = int(cfg.get("r", 1))
    match = re.fullmatch(r"(GM|RBVS)\((b[1-6]),\s*(\d+)\)", cid)
    if match:
        family, variant, r = match.group(1), match.group(2), int(match.group(3))
        if beta is None or beta.variant != variant:
            beta = BetaSpec(variant) if beta is None else BetaSpec.from_json({**beta.to_dict(), "variant": variant})
        cid = f"{family}(beta,r)"
    elif cid in ("GM", "RBVS") and (beta is not None or r != 1):
        beta = beta or BetaSpec("b1")
        cid = f"{cid}(beta,r)"
    extra = {k: cfg[k] for k in ("tau", "N", "c") if k in cfg}
    return ClassSpec(cid, r=r, beta=beta, **extra)


def _grid(cfg: dict, default: str) -> list[int]:
    g = cfg.get("grid", default)
    grid = parse_grid(g) if isinstance(g, str) else [int(v) for v in g]
    if not grid or any(b <= a for a, b in zip(grid, grid[1:])):
        raise ConfigError("grid must be nonempty and strictly increasing")
    return grid


def _qspec(cfg: dict) -> QuadratureSpec:
    return QuadratureSpec(tol=float(cfg.get("tol", 1e-6)))


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        Path(out).write_text(text)
        log.info("wrote %s", out)
    else:
        sys.stdout.write(text)


def _csv_text(rows: list[dict]) -> str:
    buf = io.StringIO()
    cols = list(dict.fromkeys(k for row in rows for k in row))
    w = csv.DictWriter(buf, fieldnames=cols, lineterminator="\n")
    w.writeheader()
    for row in rows:
        w.writerow({k: _jsonable(v) for k, v in row.items()})
    return buf.getvalue()


def cmd_classify(cfg: dict) -> int:
    seq = _generator(cfg)
    cls = _class_spec(cfg)
    grid = _grid(cfg, "16:4096:2")
    report = membership_scan(seq, cls, grid, horizon=cfg.get("horizon"))
    report.params["generator"] = cfg["generator"] if isinstance(cfg["generator"], dict) else seq.descriptor
    text = report.to_csv() if cfg.get("format") == "csv" else report.to_json() + "\n"
    _emit(text, cfg.get("out"))
    log.info("%s: verdict %s, slope %.3g", report.label, report.verdict, report.trend_slope)
    return _VERDICT_EXIT[report.verdict]


def cmd_norm(cfg: dict) -> int:
    seq = _generator(cfg)
    spec = _qspec(cfg)
    kind = SeriesKind.parse(cfg.get("kind", "cos"))
    functional = cfg.get("functional", "sn_f_gap")
    if functional not in FUNCTIONALS:
        raise ConfigError(f"unknown functional {functional!r}")
    r = int(cfg.get("r", 1))
    horizon = int(cfg.get("horizon", 1 << 21))

    def one(n: int):
        if functional == "partial_sum":
            rep = cauchy_gap(seq, kind, 1, n, spec)
            rep.functional = "partial_sum"
            return rep
        if functional == "cauchy_gap":
            m = int(cfg.get("m", 2 * n))
            return cauchy_gap(seq, kind, n, m, spec)
        if functional == "vn_sn_gap":
            return vn_sn_gap(seq, kind, n, spec)
        return sn_f_gap(seq, kind, n, r=r, spec=spec, horizon=horizon)

    if "n" in cfg:
        grid = [int(cfg["n"])]
    elif "grid" in cfg:
        grid = _grid(cfg, "")
    else:
        raise ConfigError("norm needs --n or --grid")
    if any(n < 1 for n in grid):
        raise ConfigError("n must be positive")
    reports = _pmap(one, grid, cfg.get("jobs") or os.cpu_count())
    if cfg.get("format") == "csv":
        rows = [{"n": n, "value": rp.value, "error_estimate": rp.error_estimate,
                 "unsampled_mass": rp.unsampled_mass, "flags": ";".join(rp.flags)} for n, rp in zip(grid, reports)]
        text = _csv_text(rows)
    elif len(reports) == 1:
        text = reports[0].to_json() + "\n"
    else:
        doc = {"functional": functional, "grid": grid, "reports": [rp.to_dict() for rp in reports]}
        text = json.dumps(doc, sort_keys=True, indent=2) + "\n"
    _emit(text, cfg.get("out"))
    return EXIT_OK


def cmd_study(cfg: dict) -> int:
    sid = cfg.get("study_id")
    if sid not in STUDY_IDS:
        raise ConfigError(f"study id must be one of {', '.join(STUDY_IDS)}")
    params = {k: v for k, v in cfg.items() if k not in ("study_id", "out", "format", "jobs", "tol")}
    if "grid" in params and isinstance(params["grid"], str):
        params["grid"] = parse_grid(params["grid"])
    if "grid" in params and any(b <= a for a, b in zip(params["grid"], params["grid"][1:])):
        raise ConfigError("grid must be strictly increasing")
    if "generator" in params and isinstance(params["generator"], str):
        params["generator"] = _load_json_arg(params["generator"], "generator")
    if "beta" in params and isinstance(params["beta"], str):
        params["beta"] = _load_json_arg(params["beta"], "beta")
    report = run_study(sid, params, _qspec(cfg), jobs=cfg.get("jobs") or os.cpu_count())
    paths = write_study(report, cfg.get("out", "."))
    for p in paths:
        print(p)
    for c in report.checks:
        log.info("%s %s", "PASS" if c.passed else "FAIL", c.name)
    return EXIT_OK if report.passed else EXIT_INCONSISTENT


_XY_DEFAULTS = (("grid", "ratios"), ("grid", "values"), ("n", "value"))


def cmd_plotdata(cfg: dict) -> int:
    src = cfg.get("report")
    if not src:
        raise ConfigError("plotdata needs a report file")
    try:
        doc = json.loads(Path(src).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read report {src}: {exc}") from exc
    x_key, y_key = cfg.get("x"), cfg.get("y")
    if "reports" in doc and "grid" in doc:
        xs, ys = doc["grid"], [rp["value"] for rp in doc["reports"]]
        x_key, y_key = x_key or "n", y_key or "value"
    elif "tables" in doc:
        name = cfg.get("table") or next(iter(doc["tables"]), None)
        rows = doc["tables"].get(name) if name else None
        if not rows:
            raise ConfigError(f"report has no table {name!r}")
        x_key = x_key or next(iter(rows[0]))
        y_key = y_key or [k for k in rows[0] if k != x_key][0]
        if x_key not in rows[0] or y_key not in rows[0]:
            raise ConfigError(f"table {name!r} has no column {x_key!r} or {y_key!r}")
        xs, ys = [row[x_key] for row in rows], [row[y_key] for row in rows]
    elif "value" in doc:
        xs, ys = [doc.get("params", {}).get("n", 0)], [doc["value"]]
        x_key, y_key = x_key or "n", y_key or "value"
    else:
        for xd, yd in _XY_DEFAULTS:
            if (x_key or xd) in doc and (y_key or yd) in doc:
                x_key, y_key = x_key or xd, y_key or yd
                break
        else:
            raise ConfigError("cannot find x,y columns in report")
        xs, ys = doc[x_key], doc[y_key]
    _emit(_csv_text([{x_key: x, y_key: y} for x, y in zip(xs, ys)]), cfg.get("out"))
    return EXIT_OK


COMMANDS = {"classify": cmd_classify, "norm": cmd_norm, "study": cmd_study, "plotdata": cmd_plotdata}


def _fail(code: int, kind: str, exc: BaseException) -> int:
    message = " ".join(str(exc).split()) or type(exc).__name__
    print(f"error code={code} kind={kind} message={json.dumps(message)}", file=sys.stderr)
    return code


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=os.environ.get("GMSERIES_LOG", "WARNING").upper(),
                        format="%(levelname)s %(name)s: %(message)s")
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        cfg = _resolve(args)
        return COMMANDS[args.command](cfg)
    except (QuadratureError, NoTailCertificate, SingularPointError, NumericFailure) as exc:
        return _fail(EXIT_NUMERIC, "numeric", exc)
    except BetaError as exc:
        if "horizon" in str(exc):
            return _fail(EXIT_NUMERIC, "numeric", exc)
        return _fail(EXIT_CONFIG, "config", exc)
    except (ConfigError, GeneratorError, ClassError, ValueError, KeyError, TypeError) as exc:
        return _fail(EXIT_CONFIG, "config", exc)
    except (OSError, FloatingPointError, ArithmeticError) as exc:
        return _fail(EXIT_NUMERIC if isinstance(exc, ArithmeticError) else EXIT_CONFIG,
                     "numeric" if isinstance(exc, ArithmeticError) else "io", exc)


if __name__ == "__main__":
    sys.exit(main())
