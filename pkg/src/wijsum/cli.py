"""Command-line front end.

    wijsum identities --lambda n^2 --horizon 500 --seed 7
    wijsum conditions --lambda n^2 --mu n^3 --horizon 1000
    wijsum scenario --name sparse-spike
    wijsum transform --seq "sphere((k, 0), k)" --target "hyperplane((1, 0), 0)" \\
        --probe 2,1 --horizon 1000 --format csv

Exit codes: 0 success, 1 diffs / violations / failed checks, 2 bad input.
Settings may also come from ``--config FILE`` (``key = value`` lines); flags
given on the command line win.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import time
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Optional

import numpy as np

from . import _expr
from .errors import ParseError, WijsumError
from .ideals import Ideal, Mode, Status, ideal_verdict
from .index_methods import (
    IndexMethod,
    Quantity,
    lambda_from_expr,
    r_abs_row_sum,
    r_rows,
    ratio_condition,
    regularity_report,
    t_rows,
)
from .metric_sets import DistanceTrace, as_points, trace
from .scenarios import CATALOG, builtin, implication_sweep, run
from .statistical import (
    bounded_split_check,
    c_lambda_stat_density,
    chebyshev_check,
    statistical_density,
)
from .transforms import c1, c_lambda, d_lambda, identity_residuals, strong_mean

COMMANDS = ("transform", "density", "verdict", "scenario", "identities", "conditions")
MAX_HORIZON = 2**24
MAX_CELLS = 2**26
MIN_VERDICT_HORIZON = 100


@dataclass
class RunConfig:
    command: str
    lam: str = "n^2"
    mu: Optional[str] = None
    horizon: Optional[int] = None
    eps: float = 0.5
    delta: float = 0.1
    p: float = 2.0
    tol: float = 1e-12
    probes: list = field(default_factory=lambda: [(0.0, 0.0)])
    ideal: str = "DensityZero"
    threshold: float = 0.05
    format: Optional[str] = None
    output: Optional[str] = None
    seed: int = 0
    seq: Optional[str] = None
    target: Optional[str] = None
    name: Optional[str] = None
    mode: Optional[str] = None
    trace_csv: Optional[str] = None
    traces: int = 20
    sweep: bool = False
    timing: bool = False

    def validate(self) -> None:
        if self.command not in COMMANDS:
            raise ParseError(f"unknown command {self.command!r}")
        if not self.tol > 0:
            raise ParseError("tolerance must be positive")
        if self.horizon is not None:
            if not 1 <= self.horizon <= MAX_HORIZON:
                raise ParseError(f"horizon must lie in 1..{MAX_HORIZON}")
            if self.horizon * len(self.probes) > MAX_CELLS:
                raise ParseError("horizon times probe count exceeds the memory budget")
        if self.command == "verdict" and (self.horizon or 0) < MIN_VERDICT_HORIZON \
                and self.trace_csv is None and self.name is None:
            raise ParseError(f"verdict needs --horizon >= {MIN_VERDICT_HORIZON}")
        if self.format not in (None, "csv", "json"):
            raise ParseError("format must be csv or json")
        if self.ideal not in ("Fin", "DensityZero"):
            raise ParseError("ideal must be Fin or DensityZero")
        if self.mode is not None:
            Mode(self.mode)

    def echo(self) -> dict:
        out = {f.name: getattr(self, f.name) for f in fields(self)}
        out["probes"] = [list(p) for p in self.probes]
        # where the text goes is not part of the run
        out.pop("timing")
        out.pop("output")
        return out


# -- parsing ------------------------------------------------------------------

def parse_lambda(expr: str, n_max: Optional[int] = None) -> IndexMethod:
    """An index method from an expression or ``@file`` (one integer per line)."""
    expr = expr.strip()
    if expr.startswith("@"):
        path = Path(expr[1:])
        try:
            lines = path.read_text(encoding="utf-8").split()
        except OSError as exc:
            raise ParseError(f"cannot read {path}: {exc.strerror}") from None
        try:
            vals = [int(v) for v in lines]
        except ValueError:
            raise ParseError(f"{path}: expected one integer per line") from None
        lam = IndexMethod.from_list(vals, label=expr)
    else:
        lam = lambda_from_expr(expr)
    if n_max is not None:
        lam.array(n_max)  # raises on overflow past MAX_INDEX or a short list
    return lam


def parse_probe(text: str) -> tuple:
    try:
        return tuple(float(v) for v in text.replace(" ", "").strip("()").split(","))
    except ValueError:
        raise ParseError(f"cannot parse probe {text!r}") from None


def read_config(path: str) -> dict:
    out = {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"cannot read config {path}: {exc.strerror}") from None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParseError(f"{path}:{lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key.replace("-", "_")] = value
    return out


_CONFIG_TYPES = {
    "lambda": ("lam", str), "lam": ("lam", str), "mu": ("mu", str),
    "horizon": ("horizon", int), "N": ("horizon", int),
    "eps": ("eps", float), "delta": ("delta", float), "p": ("p", float),
    "tol": ("tol", float), "tolerance": ("tol", float),
    "ideal": ("ideal", str), "threshold": ("threshold", float),
    "format": ("format", str), "output": ("output", str), "seed": ("seed", int),
    "seq": ("seq", str), "target": ("target", str), "name": ("name", str),
    "mode": ("mode", str), "trace_csv": ("trace_csv", str), "traces": ("traces", int),
    "sweep": ("sweep", lambda v: v.lower() in ("1", "true", "yes")),
    "probes": ("probes", lambda v: [parse_probe(s) for s in v.split(";") if s.strip()]),
    "command": ("command", str),
}


def build_config(args: argparse.Namespace) -> RunConfig:
    values: dict = {}
    if args.config:
        for key, raw in read_config(args.config).items():
            if key not in _CONFIG_TYPES:
                raise ParseError(f"unknown config key {key!r}")
            name, conv = _CONFIG_TYPES[key]
            try:
                values[name] = conv(raw)
            except ValueError:
                raise ParseError(f"bad value for {key}: {raw!r}") from None
    for f in fields(RunConfig):
        v = getattr(args, f.name, None)
        if v is not None and v is not False:
            values[f.name] = v
    if getattr(args, "probe", None):
        values["probes"] = [parse_probe(s) for s in args.probe]
    values["command"] = args.command
    cfg = RunConfig(**values)
    cfg.validate()
    return cfg


# -- output -------------------------------------------------------------------

def _num(x) -> str:
    x = float(x)
    return format(x, ".17g") if math.isfinite(x) else "null"


def dumps(obj, indent: int = 0) -> str:
    """JSON text with every float at 17 significant digits; nan/inf become null."""
    pad, inner = "  " * indent, "  " * (indent + 1)
    if obj is None or isinstance(obj, (bool, np.bool_)):
        return {None: "null", True: "true", False: "false"}[None if obj is None else bool(obj)]
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _num(obj)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, np.ndarray):
        obj = obj.tolist()
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{inner}{json.dumps(str(k))}: {dumps(v, indent + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(not isinstance(v, (dict, list, tuple, np.ndarray)) for v in obj):
            return "[" + ", ".join(dumps(v) for v in obj) + "]"
        return "[\n" + ",\n".join(inner + dumps(v, indent + 1) for v in obj) + "\n" + pad + "]"
    if hasattr(obj, "value"):  # enums
        return dumps(obj.value)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


CSV_HEADER = ("probe_index", "n", "lambda_n", "series_kind", "value")


def series_rows(kind: str, values: np.ndarray, upper: np.ndarray):
    for p in range(values.shape[0]):
        for j in range(values.shape[1]):
            yield (p, j + 1, int(upper[j]), kind, _num(values[p, j]))


def trace_rows(tr: DistanceTrace):
    ks = np.arange(1, tr.horizon + 1)
    yield from series_rows("trace", tr.values, ks)
    if tr.has_target:
        for p, v in enumerate(tr.target_row):
            yield (p, 0, 0, "target", _num(v))


def write_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    w.writerows(rows)
    return buf.getvalue()


def read_trace_csv(path: str) -> DistanceTrace:
    """Rebuild a trace from the ``trace`` and ``target`` rows of an emitted CSV."""
    try:
        fh = open(path, newline="", encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc.strerror}") from None
    vals: dict = {}
    target: dict = {}
    with fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != CSV_HEADER:
            raise ParseError(f"{path}: expected columns {','.join(CSV_HEADER)}")
        for row in reader:
            p, n = int(row["probe_index"]), int(row["n"])
            if row["series_kind"] == "trace":
                vals.setdefault(p, {})[n] = float(row["value"])
            elif row["series_kind"] == "target":
                target[p] = float(row["value"])
    if not vals:
        raise ParseError(f"{path}: no trace rows")
    P = max(vals) + 1
    N = max(max(r) for r in vals.values())
    V = np.full((P, N), np.nan)
    for p, r in vals.items():
        for n, v in r.items():
            V[p, n - 1] = v
    if np.isnan(V).any():
        raise ParseError(f"{path}: trace rows are incomplete")
    tr = None
    if target:
        if len(target) != P:
            raise ParseError(f"{path}: target rows are incomplete")
        tr = [target[p] for p in range(P)]
    return DistanceTrace.from_values(V, tr, label=path)


def emit(cfg: RunConfig, text: str) -> None:
    if cfg.output:
        try:
            Path(cfg.output).write_text(text, encoding="utf-8")
        except OSError as exc:
            raise ParseError(f"cannot write {cfg.output}: {exc.strerror}") from None
    else:
        sys.stdout.write(text)


# -- commands -----------------------------------------------------------------

def _load_trace(cfg: RunConfig) -> DistanceTrace:
    if cfg.trace_csv:
        return read_trace_csv(cfg.trace_csv)
    if cfg.name:
        sc = builtin(cfg.name)
        return trace(sc.seq, sc.probes, cfg.horizon or sc.horizon, sc.target)
    if not cfg.seq:
        raise ParseError("give --seq, --name or --trace-csv")
    if cfg.horizon is None:
        raise ParseError("--horizon is required with --seq")
    seq = _expr.parse_sequence(cfg.seq)
    target = None if cfg.target is None else _expr.parse_set(cfg.target)
    return trace(seq, as_points(cfg.probes), cfg.horizon, target)


def cmd_transform(cfg: RunConfig) -> tuple[int, object]:
    tr = _load_trace(cfg)
    lam = parse_lambda(cfg.lam)
    series = {"C1": c1(tr), "Clambda": c_lambda(tr, lam), "Dlambda": d_lambda(tr, lam)}
    if tr.has_target:
        series["StrongClambda"] = strong_mean(tr, "Clambda", lam, 1.0)
        series["StrongDlambda"] = strong_mean(tr, "Dlambda", lam, 1.0)
        series["StrongC1"] = strong_mean(tr, "C1", None, 1.0)
        series["PStrongClambda"] = strong_mean(tr, "Clambda", lam, cfg.p)
    if (cfg.format or "csv") == "csv":
        rows = list(trace_rows(tr))
        for kind, s in series.items():
            rows.extend(series_rows(kind, s.values, s.upper))
        return 0, write_csv(rows)
    return 0, {
        "config": cfg.echo(),
        "series": {
            k: {"lambda_n": s.upper, "values": s.values} for k, s in series.items()
        },
    }


def cmd_density(cfg: RunConfig) -> tuple[int, object]:
    tr = _load_trace(cfg)
    lam = parse_lambda(cfg.lam)
    stat = statistical_density(tr, cfg.eps)
    cst = c_lambda_stat_density(tr, lam, cfg.eps)
    pstrong = strong_mean(tr, "Clambda", lam, cfg.p)
    alpha = np.max(tr.deviations()[:, : int(cst.upper[-1])], axis=1)
    checks = [
        chebyshev_check(pstrong, cst, cfg.eps, cfg.p),
        bounded_split_check(pstrong, cst, cfg.eps, cfg.p, alpha),
    ]
    code = 0 if all(c.ok for c in checks) else 1
    if (cfg.format or "json") == "csv":
        rows = list(series_rows("stat_density", stat.values, stat.upper))
        rows += series_rows("Clambda_stat_density", cst.values, cst.upper)
        return code, write_csv(rows)
    return code, {
        "config": cfg.echo(),
        "stat_density_at_N": stat.values[:, -1],
        "exceed_count_at_N": stat.counts[:, -1],
        "Clambda_stat_density_last": cst.values[:, -1],
        "alpha": alpha,
        "inequalities": [c.as_dict() for c in checks],
    }


def cmd_verdict(cfg: RunConfig) -> tuple[int, object]:
    tr = _load_trace(cfg)
    if tr.horizon < MIN_VERDICT_HORIZON:
        raise ParseError(f"verdict needs a horizon >= {MIN_VERDICT_HORIZON}")
    lam = parse_lambda(cfg.lam)
    I = Ideal(cfg.ideal, density_threshold=cfg.threshold)
    modes = [Mode(cfg.mode)] if cfg.mode else list(Mode)
    verdicts = [ideal_verdict(m, tr, lam, I, cfg.eps, cfg.delta, cfg.p) for m in modes]
    violated = any(s is Status.VIOLATED for v in verdicts for s in v.statuses)
    return (1 if violated else 0), {
        "config": cfg.echo(),
        "verdicts": [v.as_dict() for v in verdicts],
    }


def cmd_scenario(cfg: RunConfig) -> tuple[int, object]:
    names = sorted(CATALOG) if cfg.name in (None, "all") else [cfg.name]
    for n in names:
        builtin(n)  # unknown names fail before any work
    if cfg.sweep:
        entries = implication_sweep(names)
        bad = [e for e in entries if not e.report.ok]
        return (1 if bad else 0), {
            "config": cfg.echo(),
            "sweep": [e.as_dict() for e in entries],
            "candidates": [
                {"scenario": e.scenario, "lambda": e.lam, "ideal": e.report.ideal.name,
                 "theorem": t, "probe": p}
                for e in entries for t, p in e.report.candidates
            ],
        }
    reports = [run(builtin(n)) for n in names]
    bad = any(r.diffs or r.candidates for r in reports)
    if (cfg.format or "json") == "csv":
        rows = []
        for r in reports:
            for kind, s in r.series.items():
                rows.extend(series_rows(f"{r.scenario.name}:{kind}", s.values, s.upper))
        return (1 if bad else 0), write_csv(rows)
    return (1 if bad else 0), {
        "config": cfg.echo(),
        "scenarios": [r.as_dict() for r in reports],
    }


def cmd_identities(cfg: RunConfig) -> tuple[int, object]:
    N = cfg.horizon or 500
    lam = parse_lambda(cfg.lam)
    rng = np.random.default_rng(cfg.seed)
    worst: dict = {}
    for _ in range(cfg.traces):
        tr = DistanceTrace.from_values(rng.uniform(0.0, 10.0, size=(1, N)))
        for k, v in identity_residuals(tr, lam).items():
            worst[k] = max(worst.get(k, 0.0), v)
    n_h = lam.n_horizon(N)
    r_dev = 0.0
    rows = r_rows(lam)
    for n in range(2, n_h + 1):
        got = math.fsum(abs(v) for v in rows(n).values())
        r_dev = max(r_dev, abs(got - r_abs_row_sum(lam, n)) / r_abs_row_sum(lam, n))
    worst["r_abs_row_sum"] = r_dev
    max_res = max(worst.values())
    print(f"max identity residual: {max_res:.3e}", file=sys.stderr)
    return (0 if max_res < cfg.tol else 1), {
        "config": cfg.echo(),
        "lambda": lam.label,
        "horizon": N,
        "n_horizon": n_h,
        "traces": cfg.traces,
        "residuals": worst,
        "max_residual": max_res,
        "tol": cfg.tol,
        "ok": max_res < cfg.tol,
    }


def cmd_conditions(cfg: RunConfig) -> tuple[int, object]:
    N = cfg.horizon or 1000
    lam = parse_lambda(cfg.lam, N + 1)
    reports = [
        ratio_condition(lam, Quantity.LIMSUP_NEXT, N),
        ratio_condition(lam, Quantity.LIMINF_PREV, N),
        ratio_condition(lam, Quantity.LIMSUP_PREV, N),
        ratio_condition(lam, Quantity.LIM_N_OVER, N),
    ]
    if cfg.mu:
        mu = parse_lambda(cfg.mu, N + 1)
        reports.append(ratio_condition(mu, Quantity.LIMSUP_NEXT, N))
        reports.append(ratio_condition(lam, Quantity.LIM_COMPANION, N, mu))
    reg_N = min(N, 200)
    regularity = {
        "T": regularity_report(t_rows(lam), reg_N).as_dict(),
        "R": regularity_report(r_rows(lam), reg_N).as_dict(),
    }
    return 0, {
        "config": cfg.echo(),
        "conditions": [r.as_dict() for r in reports],
        "regularity": regularity,
    }


HANDLERS = {
    "transform": cmd_transform,
    "density": cmd_density,
    "verdict": cmd_verdict,
    "scenario": cmd_scenario,
    "identities": cmd_identities,
    "conditions": cmd_conditions,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key = value file; flags override it")
    common.add_argument("--lambda", dest="lam", help="index method, e.g. n^2, 2^n, @list.txt")
    common.add_argument("--mu", help="companion index method")
    common.add_argument("--horizon", "-N", type=int)
    common.add_argument("--eps", type=float)
    common.add_argument("--delta", type=float)
    common.add_argument("-p", "--power", dest="p", type=float)
    common.add_argument("--tol", type=float)
    common.add_argument("--probe", action="append", help="probe point x,y (repeatable)")
    common.add_argument("--ideal", choices=("Fin", "DensityZero"))
    common.add_argument("--threshold", type=float, help="DensityZero density threshold")
    common.add_argument("--format", choices=("csv", "json"))
    common.add_argument("--output", "-o")
    common.add_argument("--seed", type=int)
    common.add_argument("--seq", help='set sequence, e.g. "sphere((k, 0), k)"')
    common.add_argument("--target", help='limit set, e.g. "hyperplane((1, 0), 0)"')
    common.add_argument("--name", help="builtin scenario (scenario: 'all' runs every one)")
    common.add_argument("--mode", choices=[m.value for m in Mode])
    common.add_argument("--trace-csv", dest="trace_csv", help="re-ingest an emitted trace CSV")
    common.add_argument("--traces", type=int, help="random traces for identities")
    common.add_argument("--sweep", action="store_true", help="scenario: implication sweep")
    common.add_argument("--timing", action="store_true", help="add wall time to JSON output")

    parser = argparse.ArgumentParser(
        prog="wijsum", description="Summability diagnostics for sequences of closed sets."
    )
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "transform": "emit trace and mean series",
        "density": "statistical densities and the two per-n inequalities",
        "verdict": "finite-horizon ideal convergence verdicts",
        "scenario": "run builtin scenarios or the implication sweep",
        "identities": "exact-identity residuals on random traces",
        "conditions": "ratio conditions and regularity diagnostics for lambda",
    }
    for name in COMMANDS:
        sub.add_parser(name, parents=[common], help=helps[name])
    return parser


def execute(cfg: RunConfig) -> int:
    start = time.perf_counter()
    code, payload = HANDLERS[cfg.command](cfg)
    if isinstance(payload, dict):
        if cfg.timing:
            payload["wall_time"] = time.perf_counter() - start
        text = dumps(payload) + "\n"
    else:
        text = payload
    emit(cfg, text)
    return code


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = build_config(args)
        return execute(cfg)
    except (WijsumError, ValueError) as exc:
        print(f"wijsum: error: {exc}", file=sys.stderr)
        return 2
    except BrokenPipeError:
        # reader went away (e.g. piped into head); keep the exit quiet
        devnull = os.open(os.devnull, os.O_WRONLY)
        os.dup2(devnull, sys.stdout.fileno())
        return 0


if __name__ == "__main__":
    sys.exit(main())
