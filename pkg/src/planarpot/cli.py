"""Command-line experiment runner.

Usage::

    planarpot verify                          # acceptance suite
    planarpot verify --checks AC01 AC05
    planarpot density --config ct.json --out-dir results
    planarpot --config run.json               # task taken from the file

Exit codes: 0 when every check passes, 1 when a check fails, 2 on a
configuration or numerical error.
"""
from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import List, Optional, Sequence

import numpy as np

from .config import (
    TASKS, ConfigError, ExperimentConfig, build_compact, config_from_dict, parse_config, point,
)
from .exceptions import ConfigurationError, NumericError, PlanarPotError
from .geometry import boundary_distance, sample_boundary
from .grid import GridSpec
from .report import emit_plot, write_csv
from .verify import ACCEPTANCE, CheckResult, run_acceptance, run_domain_checks

__all__ = ["RunReport", "run", "main", "build_parser"]


@dataclass
class RunReport:
    """Per-check outcomes of one run plus the files written."""

    task: str
    checks: List[CheckResult] = field(default_factory=list)
    files: List[str] = field(default_factory=list)

    @property
    def exit_code(self) -> int:
        if any(c.status == "error" for c in self.checks):
            return 2
        if any(c.status == "fail" for c in self.checks):
            return 1
        return 0

    def to_dict(self) -> dict:
        return {"task": self.task, "exit_code": self.exit_code, "files": list(self.files),
                "checks": [asdict(c) for c in self.checks]}


def _points(items) -> np.ndarray:
    return np.array([point(p) for p in items], dtype=complex)


def _field_rows(fld, samples: Optional[np.ndarray]):
    if samples is not None:
        vals = fld(samples)
        return [(z.real, z.imag, v) for z, v in zip(samples, vals)]
    nodes = fld.grid.nodes()
    vals = fld.values
    mask = fld.interior & np.isfinite(vals)
    return [(z.real, z.imag, v) for z, v in zip(nodes[mask], vals[mask])]


def _task_cap(cfg: ExperimentConfig, out: Path, report: RunReport):
    from .capacity import dirichlet_capacity, green_energy, log_capacity

    p = cfg.params
    K = build_compact(p["compact"])
    rep = log_capacity(K, p.get("n", 256), p.get("method", "energy"))
    rows = [("log_capacity", rep.log_cap), ("capacity", rep.cap), ("err_estimate", rep.err_estimate),
            ("point_count", rep.point_count)]
    if cfg.domain is not None and not K.is_polar:
        ge = green_energy(K, cfg.domain, cfg.grid)
        dc = dirichlet_capacity(K, cfg.domain, cfg.grid)
        rows += [("log_green_capacity", ge.log_green_capacity), ("dirichlet_capacity", dc.value),
                 ("dirichlet_energy", dc.energy)]
    report.files.append(str(write_csv(out / cfg.outputs.get("csv", "cap.csv"), ("quantity", "value"), rows)))
    return dict(rows), {}


def _decay(cfg, pole, out, report):
    from .density import approach_samples, fit_green_decay

    ap = cfg.params["approach"]
    deltas = np.geomspace(ap.get("delta_min", 1e-3), ap.get("delta_max", 1e-1), ap.get("count", 16))
    model = ap.get("model", "power")
    fit = fit_green_decay(cfg.domain, pole, approach_samples(point(ap["point"]), point(ap["direction"]), deltas),
                          model, cfg.grid)
    rows = list(zip(fit.deltas, fit.values))
    stem = Path(cfg.outputs.get("plot", "green_decay.svg"))
    report.files.append(str(write_csv(out / stem.with_suffix(".csv"), ("delta", "minus_green"), rows)))
    if model == "power":
        x, slope = fit.deltas, fit.exponent
    else:
        x, slope = -np.log(fit.deltas), -fit.exponent
    line = {"slope": slope, "intercept": fit.intercept / np.log(10), "value": fit.exponent,
            "uncertainty": _slope_se(np.log(x), np.log(fit.values))}
    report.files.append(str(emit_plot((x, fit.values), line, out / stem, name="β",
                                      xlabel="delta" if model == "power" else "log(1/delta)",
                                      ylabel="-g(z, z0)", title=f"{model} decay fit")))
    return {"decay_exponent": fit.exponent, "decay_r2": fit.r2}


def _slope_se(x, y) -> float:
    A = np.column_stack([x, np.ones_like(x)])
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    r = y - A @ coef
    if x.size < 3:
        return 0.0
    return float(np.sqrt(r @ r / (x.size - 2) / np.sum((x - x.mean()) ** 2)))


def _task_green(cfg: ExperimentConfig, out: Path, report: RunReport):
    from .potential import green_function

    p = cfg.params
    pole = point(p["pole"]) if "pole" in p else cfg.domain.base_point
    g = green_function(cfg.domain, pole, cfg.grid)
    samples = _points(p["samples"]) if "samples" in p else None
    rows = _field_rows(g, samples)
    report.files.append(str(write_csv(out / cfg.outputs.get("csv", "green.csv"), ("x", "y", "value"), rows)))
    measured = {"nodes_written": len(rows), "residual": g.residual}
    if "approach" in p:
        measured.update(_decay(cfg, pole, out, report))
    return measured, {}


def _task_potential(cfg: ExperimentConfig, out: Path, report: RunReport):
    from .capacity import dirichlet_capacity
    from .potential import capacity_potential

    p = cfg.params
    K = build_compact(p["compact"])
    phi = capacity_potential(K, cfg.domain, cfg.grid)
    dc = dirichlet_capacity(K, cfg.domain, cfg.grid, p.get("n", 128))
    samples = _points(p["samples"]) if "samples" in p else None
    rows = _field_rows(phi, samples)
    report.files.append(str(write_csv(out / cfg.outputs.get("csv", "potential.csv"), ("x", "y", "value"), rows)))
    return {"dirichlet_capacity": dc.value, "dirichlet_energy": dc.energy, "nodes_written": len(rows)}, {}


def _task_bergman(cfg: ExperimentConfig, out: Path, report: RunReport):
    from .bergman import BasisSpec, bergman_distance, bergman_metric, build_bergman_model

    p = cfg.params
    degree = p.get("degree", 40)
    model = build_bergman_model(cfg.domain, BasisSpec.for_domain(cfg.domain, degree), degree=degree)
    z = _points(p["samples"]) if "samples" in p else np.array([cfg.domain.base_point])
    z0 = point(p["distance_from"]) if "distance_from" in p else cfg.domain.base_point
    delta = boundary_distance(cfg.domain, z)
    K = model.kernel(z)
    b = bergman_metric(model, z)
    dB = [0.0 if zi == z0 else bergman_distance(model, z0, zi) for zi in z]
    rows = [(zi.real, zi.imag, di, ki, bi, d) for zi, di, ki, bi, d in zip(z, delta, K, b, dB)]
    report.files.append(str(write_csv(out / cfg.outputs.get("csv", "bergman.csv"),
                                      ("z_re", "z_im", "delta", "K", "b", "d_B"), rows)))
    return {"samples": len(rows), "basis_size": len(model.steps)}, {}


def _task_density(cfg: ExperimentConfig, out: Path, report: RunReport):
    from .density import weak_strong_density

    p = cfg.params
    pts = _points(p["points"]) if "points" in p else sample_boundary(cfg.domain, p.get("n_samples", 64))
    ws = weak_strong_density(cfg.domain, pts, p.get("eps", 2.0 ** -12), p.get("lam", 0.5), p.get("n_max", 24),
                             p.get("gamma"))
    rows = [row for prof in ws.profiles for row in prof.rows()]
    report.files.append(str(write_csv(out / cfg.outputs.get("csv", "density.csv"),
                                      ("a_re", "a_im", "n", "qualifies", "log_cap_scaled", "d_n"), rows)))
    return {"points": len(pts), "rows": len(rows), "weak_estimate": ws.weak, "strong_estimate": ws.strong}, {}


_TASKS = {"cap": _task_cap, "green": _task_green, "potential": _task_potential,
          "bergman": _task_bergman, "density": _task_density}


def run(cfg: ExperimentConfig, out_dir="out", *, jobs: int = 1) -> RunReport:
    """Execute a validated configuration and write its outputs.

    Non-verify tasks produce one check entry named after the task, which
    fails only when the computation raises.  The verify task reports one
    entry per acceptance identifier (or per domain check).  A JSON report is
    written next to the tables.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    report = RunReport(cfg.task)
    if cfg.task == "verify":
        if cfg.params.get("suite", "acceptance") == "domain":
            report.checks = run_domain_checks(cfg.domain, cfg.grid)
        else:
            report.checks = run_acceptance(cfg.params.get("checks"), jobs=jobs)
    else:
        t0 = time.perf_counter()
        try:
            measured, tol = _TASKS[cfg.task](cfg, out, report)
            status, detail = "pass", ""
        except (NumericError, ConfigurationError) as exc:
            measured, tol, status, detail = {}, {}, "error", f"{type(exc).__name__}: {exc}"
        except PlanarPotError as exc:
            measured, tol, status, detail = {}, {}, "fail", f"{type(exc).__name__}: {exc}"
        report.checks = [CheckResult(cfg.task, f"{cfg.task} task", status,
                                     {k: _plain(v) for k, v in measured.items()}, tol,
                                     time.perf_counter() - t0, detail)]
    path = out / cfg.outputs.get("report", "report.json")
    path.write_text(json.dumps(report.to_dict(), indent=2, sort_keys=True, default=_plain) + "\n", encoding="utf-8")
    report.files.append(str(path))
    return report


def _plain(v):
    if isinstance(v, (np.bool_,)):
        return bool(v)
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, np.floating):
        return float(v)
    if isinstance(v, complex):
        return [v.real, v.imag]
    return v


def _add_common(p: argparse.ArgumentParser) -> None:
    sup = argparse.SUPPRESS
    p.add_argument("--config", type=Path, default=sup, help="JSON experiment configuration")
    p.add_argument("--out-dir", type=Path, default=sup, help="output directory (default: out)")
    p.add_argument("--grid", type=float, default=sup, help="override the bulk grid spacing h")
    p.add_argument("--jobs", type=int, default=sup, help="worker processes for independent checks (default: 1)")


def build_parser() -> argparse.ArgumentParser:
    """Argument parser; the global flags are accepted before or after the command."""
    parser = argparse.ArgumentParser(prog="planarpot", description="Planar potential theory experiments.")
    _add_common(parser)
    sub = parser.add_subparsers(dest="command")
    for task in TASKS:
        sp = sub.add_parser(task, help=f"run the {task} task")
        _add_common(sp)
        if task == "verify":
            sp.add_argument("--checks", nargs="+", metavar="ID", help="acceptance identifiers such as AC01")
    return parser


def _load(args) -> ExperimentConfig:
    if args.config is not None:
        cfg = parse_config(args.config)
        if args.command is not None and args.command != cfg.task:
            raise ConfigError([f"$.task: configuration task {cfg.task!r} does not match command {args.command!r}"])
    elif args.command is None:
        raise ConfigError(["either a command or --config is required"])
    elif args.command == "verify":
        doc = {"task": "verify"}
        if getattr(args, "checks", None):
            doc["params"] = {"checks": list(args.checks)}
        cfg = config_from_dict(doc)
    else:
        raise ConfigError([f"the {args.command} task needs --config"])
    if args.command == "verify" and getattr(args, "checks", None) and args.config is not None:
        cfg.params["checks"] = list(args.checks)
    unknown = [c for c in cfg.params.get("checks", []) if c not in ACCEPTANCE] if cfg.task == "verify" else []
    if unknown:
        raise ConfigError([f"$.params.checks: unknown identifiers {', '.join(unknown)}"])
    if args.grid is not None:
        base = cfg.grid or GridSpec(args.grid)
        h_focus = base.h_focus if base.h_focus is None or base.h_focus <= args.grid else None
        cfg.grid = GridSpec(args.grid, base.focus, h_focus, base.ratio)
    return cfg


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    for name, default in (("config", None), ("out_dir", None), ("grid", None), ("jobs", None)):
        if not hasattr(args, name):
            setattr(args, name, default)
    jobs = args.jobs if args.jobs is not None else 1
    out_dir = args.out_dir if args.out_dir is not None else Path("out")
    try:
        if jobs < 1:
            raise ConfigError(["--jobs must be at least 1"])
        if args.grid is not None and not args.grid > 0:
            raise ConfigError(["--grid must be positive"])
        cfg = _load(args)
        report = run(cfg, out_dir, jobs=jobs)
    except ConfigError as exc:
        print(str(exc), file=sys.stderr)
        return 2
    except PlanarPotError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    for c in report.checks:
        print(c.line() + (f" {c.detail}" if c.detail else ""))
    return report.exit_code


if __name__ == "__main__":
    sys.exit(main())
