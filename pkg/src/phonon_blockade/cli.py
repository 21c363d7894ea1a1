"""Command-line front end.

    phonon-blockade --config run.json
    phonon-blockade --mode figure --figure fig6a --out fig6a.csv --workers 4
    phonon-blockade --config run.json --dump-config

Exit codes: 0 success, 2 config error, 3 solver failure, 4 validation
tolerance exceeded.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from .analytic import g2_analytic, g3_analytic
from .errors import BlockadeError, SpecError
from .lindblad import DEFAULT_MAX_DIM, DEFAULT_START_DIM, DEFAULT_TRUNCATION_TOL
from .params import TWO_PI, DriveDirection, SystemParams, linewidth, nonlinearity_from_spin, rotation_for_shift
from .sweep import (
    OUTPUTS,
    Directions,
    SweepAxis,
    SweepSpec,
    csv_columns,
    figure_recipe,
    record_dict,
    record_row,
    run_sweep,
    solve_params,
    write_csv,
)

log = logging.getLogger("phonon_blockade")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SOLVER = 3
EXIT_VALIDATION = 4

MODES = ("point", "sweep", "figure", "validate")
PARAM_KEYS = ("nonlinearity_u", "drive_amp", "drive_detuning", "rotation_omega", "chirality_mag", "direction")

DEFAULT_TOLERANCES = {
    "start_dim": DEFAULT_START_DIM,
    "truncation_tol": DEFAULT_TRUNCATION_TOL,
    "max_dim": DEFAULT_MAX_DIM,
    "validate_rtol": 0.05,
}
VALIDATE_AXIS = {"name": "drive_detuning", "start": -40.0, "stop": 60.0, "num_points": 201}


class ConfigError(SpecError):
    pass


@dataclass
class RunConfig:
    mode: str = "point"
    params: dict[str, Any] = field(default_factory=dict)
    axes: list[dict[str, Any]] = field(default_factory=list)
    directions: str = "left"
    outputs: list[str] = field(default_factory=lambda: list(OUTPUTS))
    figure: str | None = None
    out: str | None = None
    format: str = "csv"
    workers: int = 1
    tolerances: dict[str, float] = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))

    def system_params(self) -> SystemParams:
        kwargs = {k: self.params[k] for k in PARAM_KEYS if k in self.params}
        for k in ("omega", "quality_factor"):
            if k in self.params:
                kwargs[k] = self.params[k]
        try:
            return SystemParams(**kwargs)
        except BlockadeError as exc:
            raise ConfigError(str(exc)) from exc

    def sweep_spec(self) -> SweepSpec:
        tol = self.tolerances
        common = dict(start_dim=int(tol["start_dim"]), truncation_tol=float(tol["truncation_tol"]),
                      max_dim=int(tol["max_dim"]))
        try:
            if self.mode == "figure":
                if not self.figure:
                    raise ConfigError("figure mode needs a figure name")
                spec = figure_recipe(self.figure)
                return SweepSpec(spec.base, spec.axes, spec.directions, spec.outputs, **common)
            if not self.axes:
                raise ConfigError("sweep mode needs at least one axis")
            axes = tuple(SweepAxis(a["name"], float(a["start"]), float(a["stop"]), int(a["num_points"]))
                         for a in self.axes)
            return SweepSpec(self.system_params(), axes, self.directions, tuple(self.outputs), **common)
        except KeyError as exc:
            raise ConfigError(f"axis entry missing key {exc}") from exc
        except SpecError as exc:
            raise ConfigError(str(exc)) from exc

    def to_dict(self) -> dict[str, Any]:
        """Flat JSON form; parses back to an equivalent run."""
        p = self.system_params()
        doc: dict[str, Any] = {"mode": self.mode}
        doc.update({
            "nonlinearity_u": p.nonlinearity_u,
            "drive_amp": p.drive_amp,
            "drive_detuning": p.drive_detuning,
            "rotation_omega": p.rotation_omega,
            "chirality_mag": p.chirality_mag,
            "direction": p.direction.value,
            "omega": p.omega,
            "quality_factor": p.quality_factor,
        })
        doc.update({
            "axes": self.axes,
            "directions": self.directions,
            "outputs": self.outputs,
            "figure": self.figure,
            "out": self.out,
            "format": self.format,
            "workers": self.workers,
            "tolerances": self.tolerances,
        })
        return doc


def _physical_block(block: dict[str, Any]) -> dict[str, float]:
    """Convert a ``physical_units`` block (frequencies in Hz) to gamma units."""
    omega = TWO_PI * float(block.get("omega_hz", 3.0e9))
    q = float(block.get("Q", 1.0e7))
    gamma = linewidth(omega, q)
    out: dict[str, float] = {"omega": omega, "quality_factor": q}
    if "u_hz" in block:
        out["nonlinearity_u"] = TWO_PI * float(block["u_hz"]) / gamma
    elif {"g_hz", "rabi_hz", "detuning_hz"} <= block.keys():
        u = nonlinearity_from_spin(TWO_PI * float(block["g_hz"]), TWO_PI * float(block["rabi_hz"]),
                                   TWO_PI * float(block["detuning_hz"]))
        out["nonlinearity_u"] = u / gamma
    for key, name in (("drive_amp_hz", "drive_amp"), ("drive_detuning_hz", "drive_detuning"),
                      ("rotation_hz", "rotation_omega")):
        if key in block:
            out[name] = TWO_PI * float(block[key]) / gamma
    return out


def parse_config(doc: dict[str, Any]) -> RunConfig:
    if not isinstance(doc, dict):
        raise ConfigError("config must be a JSON object")
    cfg = RunConfig()
    cfg.mode = doc.get("mode", cfg.mode)
    if cfg.mode not in MODES:
        raise ConfigError(f"unknown mode {cfg.mode!r}")
    params: dict[str, Any] = {}
    try:
        if "physical_units" in doc:
            params.update(_physical_block(doc["physical_units"]))
        for key in PARAM_KEYS + ("omega", "quality_factor"):
            if key in doc:
                params[key] = doc[key] if key == "direction" else float(doc[key])
        if "sagnac_shift" in doc:
            if "rotation_omega" in doc:
                raise ConfigError("give either sagnac_shift or rotation_omega, not both")
            chi = float(params.get("chirality_mag", 0.12))
            params["rotation_omega"] = rotation_for_shift(float(doc["sagnac_shift"]), chi)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad parameter value: {exc}") from exc
    cfg.params = params
    cfg.axes = list(doc.get("axes", []))
    cfg.directions = str(doc.get("directions", cfg.directions))
    cfg.outputs = list(doc.get("outputs", cfg.outputs))
    cfg.figure = doc.get("figure")
    cfg.out = doc.get("out")
    cfg.format = doc.get("format", cfg.format)
    if cfg.format not in ("csv", "json"):
        raise ConfigError(f"unknown format {cfg.format!r}")
    cfg.workers = int(doc.get("workers", cfg.workers))
    tol = dict(DEFAULT_TOLERANCES)
    tol.update(doc.get("tolerances", {}))
    cfg.tolerances = tol
    cfg.system_params()  # fail early on invalid parameters
    return cfg


def _open_out(path: str | None):
    if path is None or path == "-":
        return sys.stdout, False
    try:
        return open(path, "w", newline=""), True
    except OSError as exc:
        raise ConfigError(f"cannot write {path}: {exc}") from exc


def _run_point(cfg: RunConfig) -> int:
    params = cfg.system_params()
    tol = cfg.tolerances
    rec = solve_params(params, int(tol["start_dim"]), float(tol["truncation_tol"]), int(tol["max_dim"]))
    rec.coords = (params.drive_detuning,)
    stream, close = _open_out(cfg.out)
    try:
        if cfg.format == "json":
            report = record_dict(rec)
            report["params"] = cfg.to_dict()
            json.dump(report, stream, indent=2)
            stream.write("\n")
        else:
            import csv

            cols = csv_columns(cfg.outputs)
            writer = csv.writer(stream, lineterminator="\n")
            writer.writerow(cols)
            writer.writerow(record_row(rec, cols))
    finally:
        if close:
            stream.close()
    if not rec.ok:
        log.error("point solve failed: %s", rec.error)
        return EXIT_SOLVER
    log.info("verdict %s at <n>=%.4g (N=%d)", rec.classification.verdict.value, rec.mean_n, rec.dim)
    return EXIT_OK


def _run_sweep(cfg: RunConfig) -> int:
    spec = cfg.sweep_spec()
    result = run_sweep(spec, workers=cfg.workers)
    stream, close = _open_out(cfg.out)
    try:
        if cfg.format == "json":
            json.dump([record_dict(r) for r in result.records], stream)
            stream.write("\n")
        else:
            write_csv(result, stream)
    finally:
        if close:
            stream.close()
    if result.failures:
        log.error("%d of %d points failed", len(result.failures), len(result.records))
        return EXIT_SOLVER
    return EXIT_OK


def validate(cfg: RunConfig) -> tuple[float, float]:
    """Largest relative g2 and g3 deviation of the solver from the weak-drive formulas."""
    base = cfg.system_params()
    axis_doc = cfg.axes[0] if cfg.axes else VALIDATE_AXIS
    axis = SweepAxis(axis_doc["name"], float(axis_doc["start"]), float(axis_doc["stop"]),
                     int(axis_doc["num_points"]))
    spec = SweepSpec(base, (axis,), Directions.BOTH, ("g2", "g3"),
                     start_dim=int(cfg.tolerances["start_dim"]),
                     truncation_tol=float(cfg.tolerances["truncation_tol"]),
                     max_dim=int(cfg.tolerances["max_dim"]))
    result = run_sweep(spec, workers=cfg.workers)
    if result.failures:
        raise BlockadeError(result.failures[0].error)
    err2 = err3 = 0.0
    for rec in result.records:
        p = spec.point_params(rec.coords, rec.direction)
        a2, a3 = g2_analytic(p), g3_analytic(p)
        err2 = max(err2, abs(rec.stats.g[2] - a2) / a2)
        err3 = max(err3, abs(rec.stats.g[3] - a3) / a3)
    return err2, err3


def _run_validate(cfg: RunConfig) -> int:
    if "drive_amp" not in cfg.params:
        cfg.params["drive_amp"] = 0.01
    err2, err3 = validate(cfg)
    rtol = float(cfg.tolerances["validate_rtol"])
    print(f"max relative g2 error: {err2:.6g}")
    print(f"max relative g3 error: {err3:.6g}")
    if not err2 < rtol:
        log.error("g2 deviation %.3g exceeds tolerance %.3g", err2, rtol)
        return EXIT_VALIDATION
    return EXIT_OK


def run(cfg: RunConfig) -> int:
    if cfg.mode == "point":
        return _run_point(cfg)
    if cfg.mode in ("sweep", "figure"):
        return _run_sweep(cfg)
    return _run_validate(cfg)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="phonon-blockade", description=__doc__.splitlines()[0] if __doc__ else None)
    ap.add_argument("--config", help="JSON run configuration")
    ap.add_argument("--mode", choices=MODES)
    ap.add_argument("--figure", help="figure recipe name (fig2a..fig2d, fig3a, fig4a, fig5a, fig5b, fig6a, fig7)")
    ap.add_argument("--out", help="output file (default: standard output)")
    ap.add_argument("--format", choices=("csv", "json"))
    ap.add_argument("--workers", type=int)
    ap.add_argument("--dump-config", action="store_true", help="print the resolved config and exit")
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO, stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        doc: dict[str, Any] = {}
        if args.config:
            try:
                doc = json.loads(Path(args.config).read_text())
            except (OSError, json.JSONDecodeError) as exc:
                raise ConfigError(f"cannot read config {args.config}: {exc}") from exc
        for key in ("mode", "figure", "out", "format", "workers"):
            value = getattr(args, key)
            if value is not None:
                doc[key] = value
        if args.figure and "mode" not in doc:
            doc["mode"] = "figure"
        cfg = parse_config(doc)
        if args.dump_config:
            json.dump(cfg.to_dict(), sys.stdout, indent=2)
            sys.stdout.write("\n")
            return EXIT_OK
        return run(cfg)
    except SpecError as exc:
        log.error("%s", exc)
        return EXIT_CONFIG
    except BlockadeError as exc:
        log.error("%s", exc)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
