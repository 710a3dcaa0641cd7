"""Batch experiments: quench / ramp / optimized sweeps, pulse transfer, work comparison.

Configuration files are INI-style with a single ``[experiment]`` section of
``key = value`` lines (see ``CONFIG_KEYS``). Times accept multiples of pi,
e.g. ``T = pi/4``.
"""
from __future__ import annotations

import configparser
import csv
import io
import json
import math
import re
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path
from typing import Optional

import numpy as np

from .dcrab import DcrabParams, OptimizationTrace, optimize
from .dynamics import (
    DCRAB_PULSE,
    ControlProtocol,
    PulseLayer,
    TimeGrid,
    convergence_check,
    linear_ramp,
    sudden_quench,
)
from .simplex import NelderMeadParams
from .spin_model import SpinChainConfig
from .thermo import DrivenRing, IrreversibilityReport

EXPERIMENTS = ("quench_sweep", "ramp_sweep", "optimize_sweep", "convergence_trace",
               "transfer", "work_compare", "convergence")
RESULT_HEADER = ("f0", "fT", "protocol", "avg_work", "delta_F", "s_irr", "w_fric", "s_qvol",
                 "n_evaluations", "stopping_reason")
TRACE_HEADER = ("nu", "superiteration", "cost", "best_cost", "s_irr", "w_fric", "s_qvol",
                "best_s_irr", "best_w_fric", "best_s_qvol")
CONVERGENCE_HEADER = ("f0", "fT", "protocol", "T", "n_steps", "n_steps_refined", "max_abs_diff")
PULSE_FORMAT = "isingthermo-pulse"


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str = "quench_sweep"
    n_spins: int = 4
    beta: float = 50.0
    f0_start: float = 0.1
    f0_stop: float = 2.0
    f0_step: float = 0.05
    delta_f: float = 0.1
    T: float = math.pi
    n_steps: Optional[int] = None
    n_frequencies: int = 4
    bandwidth: float = 20.0
    eta: float = 1e-5
    eta_error: Optional[float] = None
    eta_change: Optional[float] = None
    max_superiterations: int = 8
    nm_max_evaluations: Optional[int] = None
    nm_initial_step: float = 0.1
    nm_xtol: float = 1e-7
    objective: str = "s_irr"
    seed: int = 0
    target_n_spins: Optional[int] = None
    pulses: Optional[str] = None
    output: Optional[str] = None
    workers: int = 1

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment {self.experiment!r}; choose from {EXPERIMENTS}")
        for name in ("beta", "f0_start", "f0_stop", "f0_step", "delta_f", "T", "bandwidth", "eta"):
            if not math.isfinite(getattr(self, name)):
                raise ConfigError(f"{name} must be finite")
        if not self.f0_step > 0:
            raise ConfigError("f0_step must be positive")
        if self.f0_stop < self.f0_start:
            raise ConfigError("f0 range is empty")
        if not self.T > 0:
            raise ConfigError("T must be positive")
        try:
            SpinChainConfig(self.n_spins, self.beta)
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc

    @property
    def spin_config(self) -> SpinChainConfig:
        return SpinChainConfig(self.n_spins, self.beta)

    def f0_values(self) -> list:
        n = int(math.floor((self.f0_stop - self.f0_start) / self.f0_step + 1e-9)) + 1
        return [round(self.f0_start + i * self.f0_step, 12) for i in range(n)]

    def grid(self) -> TimeGrid:
        return TimeGrid.for_duration(self.T, self.n_steps)

    def dcrab_params(self, point_index: int = 0) -> DcrabParams:
        max_eval = self.nm_max_evaluations or 200 * self.n_frequencies
        return DcrabParams(
            T=self.T,
            n_frequencies=self.n_frequencies,
            omega_max=2 * math.pi * self.bandwidth / self.T,
            eta_error=self.eta if self.eta_error is None else self.eta_error,
            eta_change=self.eta if self.eta_change is None else self.eta_change,
            max_superiterations=self.max_superiterations,
            seed=(self.seed, point_index),
            simplex=NelderMeadParams(initial_step=self.nm_initial_step,
                                     max_evaluations=max_eval, xtol=self.nm_xtol),
        )


CONFIG_KEYS = {f.name: f for f in fields(ExperimentConfig)}
# configparser folds keys to lower case; "T" is the only mixed-case field
_KEY_BY_LOWER = {name.lower(): name for name in CONFIG_KEYS}
_PI_RE = re.compile(r"^\s*([-+]?[0-9.eE+-]*)\s*\*?\s*pi\s*(?:/\s*([0-9.eE+-]+))?\s*$")


def _parse_float(text: str) -> float:
    m = _PI_RE.match(text)
    if m:
        num = float(m.group(1)) if m.group(1) not in ("", "+", "-") else float(m.group(1) + "1")
        den = float(m.group(2)) if m.group(2) else 1.0
        return num * math.pi / den
    return float(text)


def _coerce(name: str, text: str):
    kind = CONFIG_KEYS[name].type
    text = text.strip()
    if text.lower() in ("none", ""):
        return None
    if "int" in str(kind):
        return int(text)
    if "float" in str(kind):
        return _parse_float(text)
    return text


def load_config(path, **overrides) -> ExperimentConfig:
    """Read an ``[experiment]`` section; ``overrides`` (non-None) win over the file."""
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        with open(path) as fh:
            parser.read_file(fh)
    except (OSError, configparser.Error) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not parser.has_section("experiment"):
        raise ConfigError("config file needs an [experiment] section")
    values = {}
    for raw_key, text in parser.items("experiment"):
        key = _KEY_BY_LOWER.get(raw_key)
        if key is None:
            raise ConfigError(f"unknown config key {raw_key!r}")
        try:
            values[key] = _coerce(key, text)
        except ValueError as exc:
            raise ConfigError(f"bad value for {key}: {text!r}") from exc
    values.update({k: v for k, v in overrides.items() if v is not None})
    return ExperimentConfig(**values)


@dataclass(frozen=True)
class ResultRow:
    f0: float
    fT: float
    protocol: str
    avg_work: float
    delta_F: float
    s_irr: float
    w_fric: float
    s_qvol: float
    n_evaluations: int = 0
    stopping_reason: str = ""

    @classmethod
    def from_report(cls, f0, fT, protocol, rep: IrreversibilityReport, n_evaluations=0,
                    stopping_reason=""):
        return cls(f0, fT, protocol, rep.avg_work, rep.delta_F, rep.s_irr, rep.w_fric,
                   rep.s_qvol, n_evaluations, stopping_reason)


# ---------------------------------------------------------------- pulse files

def pulse_to_dict(protocol: ControlProtocol, **extra) -> dict:
    return {
        "format": PULSE_FORMAT,
        "version": 1,
        "kind": protocol.kind,
        "f0": protocol.f0,
        "fT": protocol.fT,
        "T": protocol.T,
        "layers": [
            {"frequencies": list(layer.frequencies), "phases": list(layer.phases),
             "coefficients": list(layer.coefficients)}
            for layer in protocol.layers
        ],
        **extra,
    }


def pulse_from_dict(data: dict) -> ControlProtocol:
    try:
        if data.get("format") != PULSE_FORMAT:
            raise ValueError(f"not a pulse file (format={data.get('format')!r})")
        layers = tuple(
            PulseLayer(tuple(map(float, l["frequencies"])), tuple(map(float, l["phases"])),
                       tuple(map(float, l["coefficients"])))
            for l in data["layers"]
        )
        return ControlProtocol(data["kind"], float(data["f0"]), float(data["fT"]),
                               float(data["T"]), layers)
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"malformed pulse file: {exc}") from exc


def write_pulse(path, protocol: ControlProtocol, **extra) -> None:
    Path(path).write_text(json.dumps(pulse_to_dict(protocol, **extra), indent=1) + "\n")


def read_pulse(path) -> ControlProtocol:
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read pulse file {path}: {exc}") from exc
    return pulse_from_dict(data)


def read_pulses(path) -> list:
    """A single pulse file, or every ``*.json`` pulse in a directory (sorted by name)."""
    path = Path(path)
    if path.is_dir():
        files = sorted(path.glob("*.json"))
        if not files:
            raise ConfigError(f"no pulse files in {path}")
        return [read_pulse(p) for p in files]
    return [read_pulse(path)]


# ------------------------------------------------------------------ CSV output

def _fmt(value) -> str:
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    return str(value)


def format_csv(rows, header) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        values = asdict(row) if hasattr(row, "__dataclass_fields__") else row
        writer.writerow([_fmt(values[h]) for h in header])
    return buf.getvalue()


def write_csv(rows, path=None, header=RESULT_HEADER) -> str:
    text = format_csv(rows, header)
    if path is None or str(path) == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)
    return text


# ----------------------------------------------------------------- experiments

def _map(func, items, workers: int):
    # executor.map keeps input order, so output is independent of worker count
    if workers <= 1 or len(items) <= 1:
        return [func(item) for item in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, items))


def _fixed_protocol_point(args):
    cfg, kind, f0 = args
    fT = f0 + cfg.delta_f
    ring = DrivenRing(cfg.spin_config, f0, fT)
    if kind == "sudden_quench":
        protocol = sudden_quench(f0, fT, cfg.T)
        return ResultRow.from_report(f0, fT, protocol.kind, ring.report(protocol))
    protocol = linear_ramp(f0, fT, cfg.T)
    return ResultRow.from_report(f0, fT, protocol.kind, ring.report(protocol, cfg.grid()))


def run_quench_sweep(cfg: ExperimentConfig) -> list:
    """One row per ``f0`` for the instantaneous quench ``f0 -> f0 + delta_f``."""
    return _map(_fixed_protocol_point, [(cfg, "sudden_quench", f0) for f0 in cfg.f0_values()],
                cfg.workers)


def run_ramp_sweep(cfg: ExperimentConfig) -> list:
    return _map(_fixed_protocol_point, [(cfg, "linear_ramp", f0) for f0 in cfg.f0_values()],
                cfg.workers)


@dataclass
class OptimizedPoint:
    f0: float
    fT: float
    rows: list
    pulse: ControlProtocol
    trace: OptimizationTrace


def _optimize_point(args) -> OptimizedPoint:
    cfg, index, f0, with_ramp = args
    fT = f0 + cfg.delta_f
    ring = DrivenRing(cfg.spin_config, f0, fT)
    grid = cfg.grid()
    rows = [ResultRow.from_report(f0, fT, "sudden_quench", ring.report(sudden_quench(f0, fT, cfg.T)))]
    if with_ramp:
        rows.append(ResultRow.from_report(f0, fT, "linear_ramp",
                                          ring.report(linear_ramp(f0, fT, cfg.T), grid)))
    pulse, trace = optimize(cfg.spin_config, f0, fT, cfg.T, cfg.dcrab_params(index), grid,
                            cfg.objective, ring=ring)
    rows.append(ResultRow.from_report(f0, fT, DCRAB_PULSE, ring.report(pulse, grid),
                                      trace.n_evaluations, trace.stopping_reason))
    return OptimizedPoint(f0, fT, rows, pulse, trace)


def optimize_points(cfg: ExperimentConfig, with_ramp: bool = True) -> list:
    items = [(cfg, i, f0, with_ramp) for i, f0 in enumerate(cfg.f0_values())]
    return _map(_optimize_point, items, cfg.workers)


def run_optimize_sweep(cfg: ExperimentConfig, pulse_dir=None):
    """Quench, linear ramp and optimized pulse per ``f0``.

    Returns ``(rows, pulses)``; pulses are also written to ``pulse_dir``
    (one JSON file per point) when given.
    """
    points = optimize_points(cfg, with_ramp=True)
    rows = [row for p in points for row in p.rows]
    pulses = [p.pulse for p in points]
    if pulse_dir is not None:
        save_pulses(points, cfg, pulse_dir)
    return rows, pulses


def save_pulses(points, cfg: ExperimentConfig, pulse_dir) -> None:
    pulse_dir = Path(pulse_dir)
    pulse_dir.mkdir(parents=True, exist_ok=True)
    for i, p in enumerate(points):
        write_pulse(pulse_dir / f"pulse_{i:03d}.json", p.pulse, n_spins=cfg.n_spins,
                    beta=cfg.beta, objective=cfg.objective,
                    cost=float(min(p.trace.costs)), stopping_reason=p.trace.stopping_reason)


def trace_rows(trace: OptimizationTrace) -> list:
    sizes = [s.n_evaluations for s in trace.superiterations]
    labels = [0] + [j + 1 for j, n in enumerate(sizes) for _ in range(n)]
    best_cost = trace.best_so_far()
    rows = []
    for nu, (cost, rep, best) in enumerate(zip(trace.costs, trace.reports, trace.best_reports())):
        rows.append({
            "nu": nu, "superiteration": labels[nu] if nu < len(labels) else labels[-1],
            "cost": cost, "best_cost": best_cost[nu],
            "s_irr": rep.s_irr, "w_fric": rep.w_fric, "s_qvol": rep.s_qvol,
            "best_s_irr": best.s_irr, "best_w_fric": best.w_fric, "best_s_qvol": best.s_qvol,
        })
    return rows


def run_convergence_trace(cfg: ExperimentConfig):
    """Optimize at the single point ``f0_start``; returns ``(trace rows, pulse, trace)``."""
    f0 = cfg.f0_start
    fT = f0 + cfg.delta_f
    pulse, trace = optimize(cfg.spin_config, f0, fT, cfg.T, cfg.dcrab_params(0), cfg.grid(),
                            cfg.objective)
    return trace_rows(trace), pulse, trace


def run_transfer(cfg: ExperimentConfig, pulses) -> list:
    """Apply stored pulses unchanged to a ring of ``target_n_spins`` (default ``n_spins``).

    Each pulse yields quench, linear-ramp and transferred-pulse rows for its
    own ``f0 -> fT`` and ``T``.
    """
    n_target = cfg.target_n_spins or cfg.n_spins
    spin = SpinChainConfig(n_target, cfg.beta)
    rows = []
    for pulse in pulses:
        if pulse.kind != DCRAB_PULSE:
            raise ConfigError("transfer expects dcrab pulse files")
        ring = DrivenRing(spin, pulse.f0, pulse.fT)
        grid = TimeGrid.for_duration(pulse.T, cfg.n_steps)
        rows.append(ResultRow.from_report(pulse.f0, pulse.fT, "sudden_quench",
                                          ring.report(sudden_quench(pulse.f0, pulse.fT, pulse.T))))
        rows.append(ResultRow.from_report(pulse.f0, pulse.fT, "linear_ramp",
                                          ring.report(linear_ramp(pulse.f0, pulse.fT, pulse.T), grid)))
        rows.append(ResultRow.from_report(pulse.f0, pulse.fT, DCRAB_PULSE, ring.report(pulse, grid)))
    return rows


def run_work_compare(cfg: ExperimentConfig) -> list:
    """Quench and optimized rows per ``f0`` (compare ``avg_work`` and ``s_irr``)."""
    return [row for p in optimize_points(cfg, with_ramp=False) for row in p.rows]


def run_convergence(cfg: ExperimentConfig, pulses=None) -> list:
    """Step-doubling check of ``rho(T)`` for the ramp at every ``f0`` (or for given pulses)."""
    spin = cfg.spin_config
    if pulses is None:
        protocols = [linear_ramp(f0, f0 + cfg.delta_f, cfg.T) for f0 in cfg.f0_values()]
    else:
        protocols = list(pulses)
    rows = []
    for p in protocols:
        ring = DrivenRing(spin, p.f0, p.fT)
        grid = TimeGrid.for_duration(p.T, cfg.n_steps)
        rep = convergence_check(spin, p, ring.rho0, grid)
        rows.append({"f0": p.f0, "fT": p.fT, "protocol": p.kind, "T": p.T,
                     "n_steps": rep.n_steps, "n_steps_refined": rep.n_steps_refined,
                     "max_abs_diff": rep.max_abs_diff})
    return rows


def write_metadata(path, cfg: ExperimentConfig, wall_time: float, stopping_reasons=None) -> None:
    from . import __version__
    meta = {
        "package_version": __version__,
        "config": {k: v for k, v in asdict(cfg).items()},
        "seed": cfg.seed,
        "rng": "numpy PCG64, SeedSequence((seed, point_index))",
        "stopping_reasons": stopping_reasons or [],
        "wall_time_s": wall_time,
    }
    Path(path).write_text(json.dumps(meta, indent=1) + "\n")


def run(cfg: ExperimentConfig, out=None):
    """Run ``cfg.experiment``, write its CSV (and pulses / sidecar) and return the CSV text."""
    start = time.perf_counter()
    out = out if out is not None else cfg.output
    out_path = None if out in (None, "-") else Path(out)
    reasons = []
    header = RESULT_HEADER
    if cfg.experiment == "quench_sweep":
        rows = run_quench_sweep(cfg)
    elif cfg.experiment == "ramp_sweep":
        rows = run_ramp_sweep(cfg)
    elif cfg.experiment in ("optimize_sweep", "work_compare"):
        points = optimize_points(cfg, with_ramp=cfg.experiment == "optimize_sweep")
        rows = [row for p in points for row in p.rows]
        reasons = [p.trace.stopping_reason for p in points]
        if out_path is not None:
            save_pulses(points, cfg, out_path.with_suffix(".pulses"))
    elif cfg.experiment == "convergence_trace":
        rows, pulse, trace = run_convergence_trace(cfg)
        header = TRACE_HEADER
        reasons = [trace.stopping_reason]
        if out_path is not None:
            write_pulse(out_path.with_suffix(".pulse.json"), pulse, n_spins=cfg.n_spins,
                        beta=cfg.beta, objective=cfg.objective, cost=float(min(trace.costs)),
                        stopping_reason=trace.stopping_reason)
    elif cfg.experiment == "transfer":
        if not cfg.pulses:
            raise ConfigError("transfer needs a pulse file or directory (key 'pulses')")
        rows = run_transfer(cfg, read_pulses(cfg.pulses))
    else:
        header = CONVERGENCE_HEADER
        rows = run_convergence(cfg, read_pulses(cfg.pulses) if cfg.pulses else None)
    text = write_csv(rows, out_path, header)
    if out_path is not None:
        write_metadata(out_path.with_suffix(".meta.json"), cfg, time.perf_counter() - start, reasons)
    return text


def with_overrides(cfg: ExperimentConfig, **overrides) -> ExperimentConfig:
    return replace(cfg, **{k: v for k, v in overrides.items() if v is not None})
