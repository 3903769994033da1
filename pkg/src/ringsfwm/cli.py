"""Scenario-driven command line front end.

A scenario is a single JSON document with explicit SI units in the field
names; see the bundled files under ringsfwm/scenarios/.  Outputs are
plain CSV grids (comment lines prefixed '#', then kappa_signal,
kappa_idler, value triples) and a sorted observables.json, written
deterministically so identical configs give byte-identical files.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import sys as _sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .errors import ConfigError, UndefinedAnalysisError
from .model import (
    MaterialEstimate,
    RingSystem,
    derive_rates,
    estimate_nonlinear_couplings,
)
from .numerics import Grid2D, SpectralGrid, TimeGrid, suggested_half_width
from . import perturbative as pt
from . import propagator as pg
from .pump import PumpSpec, default_time_grid, pump_time_evolution

__all__ = ["Scenario", "run_scenario", "sweep", "main"]

_PIPELINES = ("perturbative", "propagator", "both")

_SYSTEM_FIELDS = {
    "omega_P_rad_per_s": ("omega_P", float),
    "omega_S_rad_per_s": ("omega_S", float),
    "omega_I_rad_per_s": ("omega_I", float),
    "v_P_m_per_s": ("v_P", float),
    "v_S_m_per_s": ("v_S", float),
    "v_I_m_per_s": ("v_I", float),
    "u_P_m_per_s": ("u_P", float),
    "u_S_m_per_s": ("u_S", float),
    "u_I_m_per_s": ("u_I", float),
    "Gamma_P_per_s": ("Gamma_P", float),
    "Gamma_S_per_s": ("Gamma_S", float),
    "Gamma_I_per_s": ("Gamma_I", float),
    "M_P_per_s": ("M_P", float),
    "M_S_per_s": ("M_S", float),
    "M_I_per_s": ("M_I", float),
    "lambda_fwm_per_s": ("lambda_fwm", complex),
    "eta_spm_per_s": ("eta_spm", complex),
    "zeta_xpm_per_s": ("zeta_xpm", complex),
}


@dataclass(frozen=True)
class Scenario:
    """Parsed scenario: system parameters, pump, grid requests, pipeline
    selection, and output flags."""

    system: RingSystem
    pump: PumpSpec
    spectral_n: int
    spectral_half_width: float | None
    time_steps: int | None
    pipeline: str
    write_jsi: bool
    write_pair_amplitude: bool
    raw: dict


def _expect_mapping(obj, path: str) -> dict:
    if not isinstance(obj, dict):
        raise ConfigError(f"{path}: expected an object, got "
                          f"{type(obj).__name__}")
    return obj


def _number(obj, path: str, cast=float):
    if isinstance(obj, bool) or not isinstance(obj, (int, float)):
        raise ConfigError(f"{path}: expected a number, got "
                          f"{type(obj).__name__}")
    return cast(obj)


def _build_system(raw: dict) -> RingSystem:
    sysm = _expect_mapping(raw.get("system"), "system")
    kwargs = {}
    for key, value in sysm.items():
        if key not in _SYSTEM_FIELDS:
            raise ConfigError(f"system.{key}: unknown field")
        name, cast = _SYSTEM_FIELDS[key]
        kwargs[name] = _number(value, f"system.{key}", cast)
    required = ["omega_P", "omega_S", "omega_I", "v_P", "v_S", "v_I",
                "Gamma_P", "Gamma_S", "Gamma_I", "M_P", "M_S", "M_I",
                "lambda_fwm"]
    missing = [k for k in required if k not in kwargs]
    if missing:
        unit_names = {v[0]: k for k, v in _SYSTEM_FIELDS.items()}
        raise ConfigError("system: missing required fields: "
                          + ", ".join(unit_names[m] for m in missing))
    try:
        return RingSystem.from_rates(**kwargs)
    except ValueError as exc:
        raise ConfigError(f"system: {exc}") from exc


def _build_pump(raw: dict) -> PumpSpec:
    pm = _expect_mapping(raw.get("pump"), "pump")
    kind = pm.get("kind", "gaussian")
    if kind != "gaussian":
        raise ConfigError("pump.kind: only 'gaussian' is supported in "
                          "scenario files")
    amplitude = _number(pm.get("amplitude", 1.0), "pump.amplitude")
    if "duration_s" not in pm:
        raise ConfigError("pump.duration_s: required")
    duration = _number(pm["duration_s"], "pump.duration_s")
    extra = set(pm) - {"kind", "amplitude", "duration_s"}
    if extra:
        raise ConfigError(f"pump.{sorted(extra)[0]}: unknown field")
    try:
        return PumpSpec(kind="gaussian", amplitude=amplitude,
                        duration=duration)
    except ValueError as exc:
        raise ConfigError(f"pump: {exc}") from exc


def parse_scenario(raw: dict) -> Scenario:
    """Validate a parsed JSON document into a Scenario; ConfigError
    messages name the offending field path."""
    raw = _expect_mapping(raw, "<root>")
    known = {"system", "pump", "grids", "pipeline", "outputs", "sweep"}
    for key in raw:
        if key not in known:
            raise ConfigError(f"{key}: unknown top-level field")
    system = _build_system(raw)
    pump = _build_pump(raw)

    grids = _expect_mapping(raw.get("grids", {}), "grids")
    spectral_n = int(_number(grids.get("spectral_n", 256),
                             "grids.spectral_n", float))
    if spectral_n < 8:
        raise ConfigError("grids.spectral_n: must be at least 8")
    half_width = grids.get("spectral_half_width_per_m")
    if half_width is not None:
        half_width = _number(half_width, "grids.spectral_half_width_per_m")
        if half_width <= 0:
            raise ConfigError("grids.spectral_half_width_per_m: must be "
                              "positive")
    time_steps = grids.get("time_steps")
    if time_steps is not None:
        time_steps = int(_number(time_steps, "grids.time_steps", float))
        if time_steps < 16:
            raise ConfigError("grids.time_steps: must be at least 16")
    extra = set(grids) - {"spectral_n", "spectral_half_width_per_m",
                          "time_steps"}
    if extra:
        raise ConfigError(f"grids.{sorted(extra)[0]}: unknown field")

    pipeline = raw.get("pipeline", "perturbative")
    if pipeline not in _PIPELINES:
        raise ConfigError(f"pipeline: must be one of {_PIPELINES}, got "
                          f"{pipeline!r}")

    outputs = _expect_mapping(raw.get("outputs", {}), "outputs")
    extra = set(outputs) - {"write_jsi", "write_pair_amplitude"}
    if extra:
        raise ConfigError(f"outputs.{sorted(extra)[0]}: unknown field")

    return Scenario(
        system=system, pump=pump, spectral_n=spectral_n,
        spectral_half_width=half_width, time_steps=time_steps,
        pipeline=pipeline,
        write_jsi=bool(outputs.get("write_jsi", True)),
        write_pair_amplitude=bool(outputs.get("write_pair_amplitude", True)),
        raw=raw)


def load_scenario(path: str | Path) -> Scenario:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read scenario file {path}: {exc}") from exc
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") \
            from exc
    return parse_scenario(raw)


def _spectral_grid(scn: Scenario) -> SpectralGrid:
    if scn.spectral_half_width is not None:
        return SpectralGrid(scn.spectral_half_width, scn.spectral_n)
    hw = max(
        suggested_half_width(scn.system.Gamma_bar("S"), scn.system.v_S,
                             scn.system.v_P, scn.pump.duration),
        suggested_half_width(scn.system.Gamma_bar("I"), scn.system.v_I,
                             scn.system.v_P, scn.pump.duration))
    return SpectralGrid(hw, scn.spectral_n)


def _grid_csv_lines(grid: Grid2D, scn: Scenario, value_columns) -> list[str]:
    """Render a 2D grid as '#'-commented metadata plus CSV rows.

    value_columns: list of (column_name, 2D float array).
    """
    axis_s, axis_i = grid.axis_s, grid.axis_i
    lines = [
        f"# ringsfwm {__version__}",
        f"# n_signal={axis_s.n_points} n_idler={axis_i.n_points}",
        f"# kappa_signal_half_width_per_m={axis_s.half_width:.12e}",
        f"# kappa_idler_half_width_per_m={axis_i.half_width:.12e}",
        f"# v_S_m_per_s={scn.system.v_S:.12e}",
        f"# v_I_m_per_s={scn.system.v_I:.12e}",
        "kappa_signal," + "kappa_idler," + ",".join(
            name for name, _ in value_columns),
    ]
    ks = axis_s.points
    ki = axis_i.points
    cols = [np.asarray(arr, dtype=float) for _, arr in value_columns]
    for i in range(axis_s.n_points):
        for j in range(axis_i.n_points):
            row = [f"{ks[i]:.12e}", f"{ki[j]:.12e}"]
            row += [f"{c[i, j]:.12e}" for c in cols]
            lines.append(",".join(row))
    return lines


def _write_text(path: Path, lines: list[str]) -> None:
    path.write_text("\n".join(lines) + "\n", encoding="utf-8",
                    newline="\n")


def _json_float(x: float):
    """NaN is not valid JSON; report undefined values as null."""
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return None
    return x


def _observables_payload(scn: Scenario, obs, extra: dict) -> dict:
    rates = derive_rates(scn.system)
    payload = {
        "P_coincidences": _json_float(obs.P_coincidences) if obs else None,
        "P_singles": _json_float(obs.P_singles) if obs else None,
        "r_numeric": _json_float(obs.r) if obs else None,
        "r_numeric_defined": bool(obs and not math.isnan(obs.r)),
        "r_formula": pt.r_closed_form(scn.system),
        "r_relative_deviation":
            _json_float(obs.r_relative_deviation) if obs else None,
        "schmidt_K": _json_float(obs.schmidt_K) if obs else None,
        "purity": _json_float(obs.purity) if obs else None,
        "fwhm_signal_per_m": _json_float(obs.fwhm_signal) if obs else None,
        "fwhm_idler_per_m": _json_float(obs.fwhm_idler) if obs else None,
        "derived_rates": {
            **{f"Gamma_{j}_per_s": rates.Gamma[j] for j in "PSI"},
            **{f"M_{j}_per_s": rates.M[j] for j in "PSI"},
            **{f"Gamma_bar_{j}_per_s": rates.Gamma_bar[j] for j in "PSI"},
            **{f"critical_coupling_{j}": rates.critical_coupling[j]
               for j in "PSI"},
            "detuning_rad_per_s": scn.system.detuning,
        },
        "metadata": {
            "version": __version__,
            "pipeline": scn.pipeline,
            "units": "all rates in s^-1 (angular); kappa in rad/m; "
                     "named GHz values read as 1e9 s^-1",
            "spectral_n": scn.spectral_n,
        },
    }
    payload["metadata"].update(extra)
    return payload


def run_scenario(path: str | Path, out_dir: str | Path,
                 grid_n: int | None = None, pipeline: str | None = None,
                 tol: float | None = None) -> dict:
    """Run one scenario and write its artifacts into out_dir.

    Returns the observables payload that was written to observables.json.
    """
    scn = load_scenario(path)
    if grid_n is not None:
        scn = dataclasses.replace(scn, spectral_n=int(grid_n))
    if pipeline is not None:
        if pipeline not in _PIPELINES:
            raise ConfigError(f"pipeline: must be one of {_PIPELINES}")
        scn = dataclasses.replace(scn, pipeline=pipeline)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    sysm = scn.system
    grid = _spectral_grid(scn)
    pump = pump_time_evolution(sysm, scn.pump)
    F = pt.pump_pair_function(pump, sysm, grid, grid,
                              rel_tol=tol if tol else 1e-8)
    kernels = pt.response_kernels(sysm, F)
    S = pt.pair_amplitude(kernels)
    jsi = pt.jsi_closed_form(sysm, F)

    zero_pump = scn.pump.amplitude == 0.0
    if zero_pump:
        obs = None
    else:
        obs = pt.observables(kernels, S, sysm)

    meta_extra: dict = {"zero_pump": zero_pump}

    if scn.write_jsi:
        _write_text(out / "jsi.csv", _grid_csv_lines(
            jsi.normalized, scn, [("jsi_normalized", jsi.normalized.values)]))
    if scn.write_pair_amplitude:
        _write_text(out / "pair_amplitude.csv", _grid_csv_lines(
            S, scn, [("re_S", S.values.real), ("im_S", S.values.imag)]))

    if scn.pipeline in ("propagator", "both"):
        tgrid = default_time_grid(sysm, scn.pump)
        if scn.time_steps is not None:
            tgrid = TimeGrid(tgrid.t0, tgrid.t1, scn.time_steps)
        drive = pg.build_drive_matrix(sysm, pump)
        table = pg.solve_propagator(drive, tgrid,
                                    tol=tol if tol else 1e-7)
        S_time = pg.pair_amplitude_time_domain(sysm, pump, table, grid, grid)
        _write_text(out / "pair_amplitude_time.csv", _grid_csv_lines(
            S_time, scn, [("re_S", S_time.values.real),
                          ("im_S", S_time.values.imag)]))
        peak = float(np.max(np.abs(S.values)))
        if peak > 0:
            dev = float(np.max(np.abs(S_time.values - S.values))) / peak
        else:
            dev = None
        diag = {
            "time_steps": len(tgrid.times) - 1,
            "t0_s": tgrid.t0,
            "t1_s": tgrid.t1,
            "step_error_estimate": table.error_estimate,
            "path_deviation_vs_perturbative_peak_rel": _json_float(dev),
            "strong_pump_validated": False,
        }
        _write_text(out / "propagator.json",
                    json.dumps(diag, indent=2, sort_keys=True).splitlines())
        meta_extra["propagator"] = diag

    payload = _observables_payload(scn, obs, meta_extra)
    _write_text(out / "observables.json",
                json.dumps(payload, indent=2, sort_keys=True).splitlines())
    return payload


_SWEEPABLE_PREFIXES = ("system.", "pump.", "grids.")


def _apply_sweep_value(raw: dict, field_path: str, value) -> dict:
    raw = json.loads(json.dumps(raw))  # deep copy
    raw.pop("sweep", None)
    if field_path == "system.M_over_Gamma_all":
        sysm = raw["system"]
        for mode in ("P", "S", "I"):
            sysm[f"M_{mode}_per_s"] = value * sysm[f"Gamma_{mode}_per_s"]
        return raw
    if not field_path.startswith(_SWEEPABLE_PREFIXES):
        raise ConfigError(f"sweep.field: unsupported field {field_path!r}")
    section, _, key = field_path.partition(".")
    target = raw.setdefault(section, {})
    if not isinstance(target, dict):
        raise ConfigError(f"sweep.field: {section} is not an object")
    target[key] = value
    return raw


def _pump_affected(field_path: str) -> bool:
    if field_path.startswith("pump."):
        return True
    return field_path in ("system.Gamma_P_per_s", "system.M_P_per_s",
                          "system.v_P_m_per_s", "system.omega_P_rad_per_s",
                          "system.u_P_m_per_s", "system.eta_spm_per_s",
                          "system.M_over_Gamma_all")


_F_SAFE_FIELDS = {"system.Gamma_S_per_s", "system.M_S_per_s",
                  "system.Gamma_I_per_s", "system.M_I_per_s",
                  "system.u_S_m_per_s", "system.u_I_m_per_s",
                  "system.lambda_fwm_per_s", "system.zeta_xpm_per_s"}


def sweep(path: str | Path, out_dir: str | Path,
          grid_n: int | None = None, tol: float | None = None) -> list[dict]:
    """Run a 1-parameter sweep described by the scenario's "sweep" block
    and write sweep.csv (one row per value).

    The pump solution is reused when the swept field cannot affect it;
    the pump-pair function is additionally reused when only signal/idler
    rates change.  In the latter case the kappa grid is fixed from the
    widest system in the sweep so all rows share one grid.
    """
    base = load_scenario(path)
    sweep_cfg = _expect_mapping(base.raw.get("sweep"), "sweep")
    field_path = sweep_cfg.get("field")
    values = sweep_cfg.get("values")
    if not isinstance(field_path, str):
        raise ConfigError("sweep.field: required string")
    if not isinstance(values, list) or not values:
        raise ConfigError("sweep.values: required non-empty list")
    extra = set(sweep_cfg) - {"field", "values"}
    if extra:
        raise ConfigError(f"sweep.{sorted(extra)[0]}: unknown field")

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    scenarios = []
    for idx, value in enumerate(values):
        if not isinstance(value, (int, float)) or isinstance(value, bool):
            raise ConfigError(f"sweep.values[{idx}]: expected a number")
        scn = parse_scenario(_apply_sweep_value(base.raw, field_path, value))
        if grid_n is not None:
            scn = dataclasses.replace(scn, spectral_n=int(grid_n))
        scenarios.append(scn)

    f_cacheable = field_path in _F_SAFE_FIELDS
    shared_grid = None
    if f_cacheable and scenarios[0].spectral_half_width is None:
        shared_grid = max((_spectral_grid(s) for s in scenarios),
                          key=lambda g: g.half_width)

    pump_cache = None
    f_cache = None
    rows = []
    for scn, value in zip(scenarios, values):
        if pump_cache is None or _pump_affected(field_path):
            pump_cache = pump_time_evolution(scn.system, scn.pump)
        grid = shared_grid if shared_grid is not None else _spectral_grid(scn)
        if f_cache is None or not f_cacheable:
            f_cache = pt.pump_pair_function(
                pump_cache, scn.system, grid, grid,
                rel_tol=tol if tol else 1e-8)
        kernels = pt.response_kernels(scn.system, f_cache)
        S = pt.pair_amplitude(kernels)
        if scn.pump.amplitude == 0.0:
            rows.append({"value": value, "r_numeric": math.nan,
                         "r_formula": pt.r_closed_form(scn.system),
                         "P_coincidences": 0.0, "P_singles": 0.0,
                         "schmidt_K": math.nan, "purity": math.nan,
                         "fwhm_signal_per_m": math.nan,
                         "fwhm_idler_per_m": math.nan})
            continue
        obs = pt.observables(kernels, S, scn.system)
        rows.append({
            "value": value,
            "P_coincidences": obs.P_coincidences,
            "P_singles": obs.P_singles,
            "r_numeric": obs.r,
            "r_formula": obs.r_formula,
            "schmidt_K": obs.schmidt_K,
            "purity": obs.purity,
            "fwhm_signal_per_m": obs.fwhm_signal,
            "fwhm_idler_per_m": obs.fwhm_idler,
        })

    columns = ["value", "P_coincidences", "P_singles", "r_numeric",
               "r_formula", "schmidt_K", "purity", "fwhm_signal_per_m",
               "fwhm_idler_per_m"]
    lines = [f"# ringsfwm {__version__}",
             f"# sweep field={field_path}",
             ",".join(columns)]
    for row in rows:
        lines.append(",".join(f"{row[c]:.12e}" for c in columns))
    _write_text(out / "sweep.csv", lines)
    return rows


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ringsfwm",
        description="Photon-pair generation in a lossy microring "
                    "resonator: scenario runner")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one scenario file")
    p_run.add_argument("config", help="scenario JSON path")
    p_run.add_argument("--out", default="out", help="output directory")
    p_run.add_argument("--grid-n", type=int, default=None,
                       help="override spectral grid size")
    p_run.add_argument("--pipeline", choices=_PIPELINES, default=None)
    p_run.add_argument("--tol", type=float, default=None,
                       help="relative tolerance override")

    p_sweep = sub.add_parser("sweep", help="run a 1-parameter sweep")
    p_sweep.add_argument("config", help="scenario JSON path with a "
                                        "'sweep' block")
    p_sweep.add_argument("--out", default="out")
    p_sweep.add_argument("--grid-n", type=int, default=None)
    p_sweep.add_argument("--tol", type=float, default=None)

    p_est = sub.add_parser(
        "estimate", help="estimate nonlinear couplings from material "
                         "parameters")
    p_est.add_argument("--chi3", type=float, required=True,
                       help="third-order susceptibility [m^2/V^2]")
    p_est.add_argument("--n", type=float, required=True,
                       help="refractive index")
    p_est.add_argument("--omega-ring", type=float, required=True,
                       help="ring mode volume [m^3]")
    p_est.add_argument("--omega-p", type=float, required=True,
                       help="pump angular frequency [rad/s]")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "run":
            payload = run_scenario(args.config, args.out,
                                   grid_n=args.grid_n,
                                   pipeline=args.pipeline, tol=args.tol)
            r = payload["r_numeric"]
            print(f"wrote {args.out}: r_formula="
                  f"{payload['r_formula']:.6g} r_numeric="
                  f"{'undefined' if r is None else format(r, '.6g')}")
        elif args.command == "sweep":
            rows = sweep(args.config, args.out, grid_n=args.grid_n,
                         tol=args.tol)
            print(f"wrote {args.out}/sweep.csv ({len(rows)} rows)")
        elif args.command == "estimate":
            est = MaterialEstimate(chi3=args.chi3, n=args.n,
                                   Omega_ring=args.omega_ring,
                                   omega_P=args.omega_p)
            nl = estimate_nonlinear_couplings(est)
            print(json.dumps({
                "lambda_fwm_per_s": nl.lambda_fwm,
                "eta_spm_per_s": nl.eta_spm,
                "zeta_xpm_per_s": nl.zeta_xpm,
            }, indent=2, sort_keys=True))
    except ConfigError as exc:
        print(f"config error: {exc}", file=_sys.stderr)
        return 2
    except (UndefinedAnalysisError, ValueError) as exc:
        print(f"error: {exc}", file=_sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
