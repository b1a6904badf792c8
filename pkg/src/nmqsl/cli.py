"""Command-line front end: single runs, one-parameter sweeps and the Table 1 check.

Config files are flat ``key = value`` text; command-line flags override them.
Recognised keys: model, gamma0, lambda, k, omega_c, omega0, state, rho00,
re01, im01, tau, dt, log_base, sweep, out, format, jobs.

Exit codes: 0 success, 1 Table 1 mismatch, 2 configuration error,
3 numerical error.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import io
import json
import logging
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from . import models
from .errors import ConfigError, InvalidState, NumericalError
from .generator import integrate
from .qlinalg import TABLE1, l1_coherence, purity, rho_from_entries, validate_density_matrix
from .qsl import QslReport, analyze

log = logging.getLogger("nmqsl")

MODELS = ("amplitude_damping", "dephasing", "eternal")
MODEL_PARAMS = {
    "amplitude_damping": ("gamma0", "lambda"),
    "dephasing": ("k", "omega_c"),
    "eternal": (),
}
SWEEPABLE = ("gamma0", "lambda", "k", "omega_c", "tau")
DEFAULTS = {
    "model": None,
    "gamma0": 0.3,
    "lambda": 1.0,
    "k": 1.0,
    "omega_c": 1.0,
    "omega0": None,
    "state": None,
    "rho00": None,
    "re01": None,
    "im01": None,
    "tau": 1.0,
    "dt": 1e-3,
    "log_base": "2",
    "sweep": None,
    "out": None,
    "format": "csv",
    "jobs": 1,
}

TRACE_COLUMNS = ("t", "p1", "p2", "R12", "R21", "T12", "T21", "s_dot", "s_tot_M",
                 "s_tot_NM", "activity", "dE", "dED", "speed_tr")
SWEEP_COLUMNS = ("sweep_value", "distance", "tau_q1", "tau_q2", "ratio_q1", "ratio_q2",
                 "ratio_q2_q1", "trivial_q2")
REPORT_COLUMNS = ("tau", "distance", "mean_speed", "mean_dE", "mean_dED", "mean_s_tot_M",
                  "mean_activity", "tau_q1", "tau_q2", "ratio_q1", "ratio_q2", "ratio_q2_q1",
                  "trivial_q2")


@dataclass(frozen=True)
class Sweep:
    param: str
    start: float
    stop: float
    steps: int

    def values(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.steps)


@dataclass(frozen=True)
class RunConfig:
    model: str
    params: dict
    rho0: np.ndarray
    tau: float = 1.0
    dt: float = 1e-3
    log_base: object = 2.0
    sweep: Sweep | None = None
    out: Path | None = None
    format: str = "csv"
    jobs: int = 1

    def model_params(self):
        if self.model == "amplitude_damping":
            return models.AmplitudeDampingParams(self.params["gamma0"], self.params["lambda"])
        if self.model == "dephasing":
            return models.DephasingParams(self.params["k"], self.params["omega_c"])
        return models.EternalParams()

    def with_value(self, name: str, value: float) -> "RunConfig":
        if name == "tau":
            return replace(self, tau=float(value))
        return replace(self, params={**self.params, name: float(value)})


# --- configuration -----------------------------------------------------------

def read_config_file(path) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        parser.read_string("[run]\n" + text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config file {path}: {exc}") from exc
    values = dict(parser["run"])
    unknown = set(values) - set(DEFAULTS)
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
    return values


def _float(raw, name):
    try:
        value = float(raw)
    except (TypeError, ValueError):
        raise ConfigError(f"{name} must be a number, got {raw!r}") from None
    if not math.isfinite(value):
        raise ConfigError(f"{name} must be finite")
    return value


def parse_sweep(text: str) -> Sweep:
    parts = text.split(":")
    if len(parts) != 4:
        raise ConfigError("sweep must look like param:from:to:steps")
    param = parts[0].strip()
    if param not in SWEEPABLE:
        raise ConfigError(f"cannot sweep {param!r}; choose from {', '.join(SWEEPABLE)}")
    start, stop = _float(parts[1], "sweep start"), _float(parts[2], "sweep end")
    try:
        steps = int(parts[3])
    except ValueError:
        raise ConfigError("sweep steps must be an integer") from None
    if steps < 2:
        raise ConfigError("sweep needs at least 2 steps")
    return Sweep(param, start, stop, steps)


def build_config(values: dict) -> RunConfig:
    v = {**DEFAULTS, **{k: val for k, val in values.items() if val is not None}}
    model = v["model"]
    if model not in MODELS:
        raise ConfigError(f"model must be one of {', '.join(MODELS)}; got {model!r}")
    params = {name: _float(v[name], name) for name in MODEL_PARAMS[model]}
    for name, value in params.items():
        if value <= 0:
            raise ConfigError(f"{name} must be positive")
    if v["omega0"] is not None:
        reason = "the dephasing equation is written in the interaction picture" \
            if model == "dephasing" else f"model {model} has no free Hamiltonian"
        log.warning("omega0 is ignored: %s", reason)

    if v["state"] is not None:
        try:
            index = int(v["state"])
        except ValueError:
            raise ConfigError("state must be an integer 1-6") from None
        rows = {row[0]: row for row in TABLE1}
        if index not in rows:
            raise ConfigError("state must be an integer 1-6")
        rho0 = rho_from_entries(rows[index][1], rows[index][2])
    elif v["rho00"] is not None:
        rho00 = _float(v["rho00"], "rho00")
        re01 = _float(v["re01"] or 0.0, "re01")
        im01 = _float(v["im01"] or 0.0, "im01")
        rho0 = rho_from_entries(rho00, complex(re01, im01))
    else:
        rho0 = rho_from_entries(TABLE1[0][1], TABLE1[0][2])
    try:
        rho0 = validate_density_matrix(rho0)
    except InvalidState as exc:
        raise ConfigError(f"invalid initial state: {exc}") from None

    tau, dt = _float(v["tau"], "tau"), _float(v["dt"], "dt")
    if dt <= 0 or tau < dt:
        raise ConfigError("need 0 < dt <= tau")
    base = str(v["log_base"]).strip()
    if base == "e":
        log_base = "e"
    elif base in ("2", "2.0"):
        log_base = 2.0
    else:
        raise ConfigError("log_base must be 2 or e")
    fmt = str(v["format"]).lower()
    if fmt not in ("csv", "json"):
        raise ConfigError("format must be csv or json")
    sweep = v["sweep"]
    if isinstance(sweep, str):
        sweep = parse_sweep(sweep)
    if sweep is not None:
        if sweep.param != "tau" and sweep.param not in params:
            raise ConfigError(f"model {model} has no parameter {sweep.param!r}")
        if sweep.param != "tau" and min(sweep.start, sweep.stop) <= 0:
            raise ConfigError(f"{sweep.param} must stay positive over the sweep")
        if sweep.param == "tau" and min(sweep.start, sweep.stop) < dt:
            raise ConfigError("swept tau must stay >= dt")
    try:
        jobs = int(v["jobs"])
    except ValueError:
        raise ConfigError("jobs must be an integer") from None
    out = Path(v["out"]) if v["out"] else None
    return RunConfig(model, params, rho0, tau, dt, log_base, sweep, out, fmt, max(1, jobs))


# --- execution ---------------------------------------------------------------

def run_single(cfg: RunConfig):
    params = cfg.model_params()
    g = models.build_generator(cfg.model, params)
    traj = integrate(g, cfg.rho0, cfg.tau, cfg.dt)
    return analyze(traj, g, cfg.log_base)


def _sweep_point(args):
    cfg, value = args
    try:
        return value, run_single(cfg.with_value(cfg.sweep.param, value)).report, None
    except NumericalError as exc:
        return value, None, f"{type(exc).__name__}: {exc}"


def run_sweep(cfg: RunConfig):
    """Reports for every sweep point, in sweep order."""
    tasks = [(cfg, float(v)) for v in cfg.sweep.values()]
    if cfg.jobs > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            results = list(pool.map(_sweep_point, tasks))
    else:
        results = [_sweep_point(t) for t in tasks]
    for value, _, error in results:
        if error is not None:
            raise NumericalError(f"sweep point {cfg.sweep.param}={value!r} failed: {error}")
    return [(value, report) for value, report, _ in results]


def trace_rows(analysis):
    th = analysis.thermo
    p = analysis.track.populations
    R, T = analysis.rates.R, analysis.rates.T
    cols = (th.t, p[:, 0], p[:, 1], R[:, 0, 1], R[:, 1, 0], T[:, 0, 1], T[:, 1, 0],
            th.s_dot, th.s_tot_M, th.s_tot_NM, th.activity, th.delta_E, th.delta_E_D,
            analysis.speed)
    return [dict(zip(TRACE_COLUMNS, (float(c[i]) for c in cols))) for i in range(len(th.t))]


def report_row(report: QslReport) -> dict:
    return {name: getattr(report, name) for name in REPORT_COLUMNS}


def sweep_row(value: float, report: QslReport) -> dict:
    return {
        "sweep_value": value,
        "distance": report.distance,
        "tau_q1": report.tau_q1,
        "tau_q2": report.tau_q2,
        "ratio_q1": report.ratio_q1,
        "ratio_q2": report.ratio_q2,
        "ratio_q2_q1": report.ratio_q2_q1,
        "trivial_q2": report.trivial_q2,
    }


# --- output ------------------------------------------------------------------

def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating, int)):
        return repr(float(value) + 0.0)  # + 0.0 turns -0.0 into 0.0
    return str(value)


def _json_value(value):
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    value = float(value)
    return value if math.isfinite(value) else None


def to_csv(rows, columns) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_fmt(row[c]) for c in columns])
    return buf.getvalue()


def to_json(payload) -> str:
    def convert(obj):
        if isinstance(obj, dict):
            return {k: convert(v) for k, v in obj.items()}
        if isinstance(obj, list):
            return [convert(v) for v in obj]
        if isinstance(obj, str):
            return obj
        return _json_value(obj)

    return json.dumps(convert(payload), indent=1) + "\n"


def _write(path: Path | None, text: str):
    if path is None:
        sys.stdout.write(text)
    else:
        path.write_text(text, encoding="utf-8")


def emit_single(cfg: RunConfig, analysis):
    trace = trace_rows(analysis)
    report = report_row(analysis.report)
    if cfg.format == "json":
        _write(cfg.out, to_json({"trace": trace, "report": report}))
        return
    if cfg.out is None:
        _write(None, to_csv([report], REPORT_COLUMNS))
        return
    _write(cfg.out, to_csv(trace, TRACE_COLUMNS))
    report_path = cfg.out.with_name(cfg.out.stem + "_report.csv")
    _write(report_path, to_csv([report], REPORT_COLUMNS))


def emit_sweep(cfg: RunConfig, results):
    rows = [sweep_row(v, r) for v, r in results]
    if cfg.format == "json":
        _write(cfg.out, to_json({"sweep_param": cfg.sweep.param, "rows": rows}))
    else:
        _write(cfg.out, to_csv(rows, SWEEP_COLUMNS))


def check_rows(results) -> list[str]:
    problems = []
    for value, report in results:
        if not report.trivial_q2 and not report.chain_holds():
            problems.append(f"chain tau >= tau_q1 >= tau_q2 violated at sweep value {value!r}")
    return problems


# --- table 1 -------------------------------------------------------------------

def validate_table1(stream=None, tol: float = 1e-3) -> bool:
    stream = stream or sys.stdout
    ok = True
    stream.write("state  rho00     rho01            purity  (table)  l1     (table)\n")
    for index, rho00, rho01, pur_ref, l1_ref in TABLE1:
        rho = validate_density_matrix(rho_from_entries(rho00, rho01))
        pur, l1 = float(purity(rho)), float(l1_coherence(rho))
        good = abs(pur - pur_ref) <= tol and abs(l1 - l1_ref) <= tol
        ok &= good
        stream.write(f"{index:<6} {rho00:<9.4f} {str(rho01):<16} {pur:.4f}  ({pur_ref:<5}) "
                     f"{l1:.4f} ({l1_ref:<5}) {'ok' if good else 'MISMATCH'}\n")
    return ok


# --- entry point ----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nmqsl", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("run", "sweep"):
        p = sub.add_parser(name, help=f"{name} a model")
        p.add_argument("--config", type=Path)
        p.add_argument("--model", help=" | ".join(MODELS))
        p.add_argument("--gamma0")
        p.add_argument("--lambda", dest="lambda_", metavar="LAMBDA")
        p.add_argument("--k")
        p.add_argument("--omega-c", dest="omega_c")
        p.add_argument("--omega0")
        p.add_argument("--state")
        p.add_argument("--rho00")
        p.add_argument("--re01")
        p.add_argument("--im01")
        p.add_argument("--tau")
        p.add_argument("--dt")
        p.add_argument("--log-base", dest="log_base")
        p.add_argument("--sweep", help="param:from:to:steps")
        p.add_argument("--out")
        p.add_argument("--format", help="csv | json")
        p.add_argument("--jobs", help="worker processes for sweeps")
    sub.add_parser("table1", help="check the six initial states against the printed table")
    return parser


def _values_from_args(args) -> dict:
    values = read_config_file(args.config) if args.config else {}
    flags = {k: v for k, v in vars(args).items() if k not in ("command", "config")}
    flags["lambda"] = flags.pop("lambda_")
    values.update({k: v for k, v in flags.items() if v is not None})
    return values


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s")
    args = build_parser().parse_args(argv)
    if args.command == "table1":
        return 0 if validate_table1() else 1
    try:
        cfg = build_config(_values_from_args(args))
        if args.command == "sweep" and cfg.sweep is None:
            raise ConfigError("sweep needs --sweep param:from:to:steps")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    try:
        if cfg.sweep is not None:
            results = run_sweep(cfg)
            emit_sweep(cfg, results)
            problems = check_rows(results)
            if problems:
                print("\n".join(problems), file=sys.stderr)
                return 3
        else:
            emit_single(cfg, run_single(cfg))
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
