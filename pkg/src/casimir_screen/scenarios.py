"""Scenario configuration, sweep orchestration and figure reproduction.

A scenario is a plain INI file describing material, surface model, geometry,
separation grid and tolerances.  Sweeps write one RFC-4180 CSV plus a JSON
manifest that records the fully resolved configuration, its hash, the
tolerances and the output hashes; re-running from the manifest reproduces
the CSV byte for byte.

The two canned figure scenarios are:

* fig1 -- nonlocal correction for a hydrodynamic metal (default: Au-like,
  rs = 1.59 A, omega_p*tau = 400) as five curves: (a) exact reflection
  amplitudes, (b) retarded first-order theory with the dynamic screening
  centroid, (c) the same with its static value d_perp(0) = -beta/omega_p,
  (d) the non-retarded theory, and (e) the sphere-plate version of (b)
  through the proximity force approximation.
* fig2 -- first-order corrections with positive static d_perp(0) values for
  jellium densities rs/a_B in {2, 3, 4, 5}; the d_perp(0) table is external
  data that must be supplied by the caller.
"""

from __future__ import annotations

import configparser
import csv
import hashlib
import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from . import __version__ as _VERSION
from .force import (
    ForceSpec,
    SweepPoint,
    effective_displacement,
    max_workers_from_env,
    sweep,
)
from .materials import Material, material_from_rs
from .quadrature import ConvergenceError, IntegrationConfig, integrate_2d_semi_inf
from .surface import (
    DPerpHydrodynamic,
    DPerpPerturbative,
    DPerpStaticConstant,
    Hydrodynamic,
    IdealMirror,
    LocalDrude,
    SurfaceModel,
    load_d_perp_table,
)
from .units import ANGSTROM, BOHR_RADIUS

__all__ = [
    "ConfigError",
    "ScenarioConfig",
    "SWEEP_COLUMNS",
    "load_jellium_table",
    "load_scenario",
    "run_figures",
    "run_figures_from_manifest",
    "run_sweep",
    "write_sweep_csv",
]

SWEEP_COLUMNS = [
    "L_natural",
    "L_nm",
    "F_per_area",
    "F_ideal_ratio",
    "delta_F",
    "delta_rel",
    "delta_rel_scaled",
    "delta_L_eff",
    "quad_err",
    "status",
]

MODEL_KINDS = ("ideal", "drude", "hydro", "dperp-dynamic", "dperp-static", "dperp-table")


class ConfigError(ValueError):
    """Scenario file is malformed or inconsistent."""


@dataclass(frozen=True)
class ScenarioConfig:
    """Fully resolved sweep scenario."""

    model_kind: str
    engine: str
    rs_angstrom: float | None
    tau_rel: float
    dperp0_angstrom: float | None
    dperp_table: str | None
    allow_extrapolation: bool
    geometry_kind: str
    radius: float | None
    grid_min: float
    grid_max: float
    grid_points: int
    grid_spacing: str
    rel_tol: float
    delta_rel_tol: float
    quad_method: str
    csv_path: str | None
    manifest_path: str | None

    def as_dict(self) -> dict:
        return {
            "model_kind": self.model_kind,
            "engine": self.engine,
            "rs_angstrom": self.rs_angstrom,
            "tau_rel": "inf" if math.isinf(self.tau_rel) else self.tau_rel,
            "dperp0_angstrom": self.dperp0_angstrom,
            "dperp_table": self.dperp_table,
            "allow_extrapolation": self.allow_extrapolation,
            "geometry_kind": self.geometry_kind,
            "radius": self.radius,
            "grid_min": self.grid_min,
            "grid_max": self.grid_max,
            "grid_points": self.grid_points,
            "grid_spacing": self.grid_spacing,
            "rel_tol": self.rel_tol,
            "delta_rel_tol": self.delta_rel_tol,
            "quad_method": self.quad_method,
        }

    def material(self) -> Material | None:
        if self.rs_angstrom is None:
            return None
        return material_from_rs(self.rs_angstrom, tau_rel=self.tau_rel)

    def grid(self) -> list[float]:
        if self.grid_spacing == "log":
            lo, hi = math.log10(self.grid_min), math.log10(self.grid_max)
            return [10.0 ** (lo + (hi - lo) * i / (self.grid_points - 1))
                    for i in range(self.grid_points)]
        step = (self.grid_max - self.grid_min) / (self.grid_points - 1)
        return [self.grid_min + step * i for i in range(self.grid_points)]

    def surface_model(self) -> SurfaceModel:
        m = self.material()
        if self.model_kind == "ideal":
            return IdealMirror()
        if m is None:
            raise ConfigError(f"model {self.model_kind!r} needs a [material] section")
        if self.model_kind == "drude":
            return LocalDrude(m)
        if self.model_kind == "hydro":
            return Hydrodynamic(m)
        if self.model_kind == "dperp-dynamic":
            return DPerpPerturbative(m, DPerpHydrodynamic())
        if self.model_kind == "dperp-static":
            if self.dperp0_angstrom is None:
                raise ConfigError("dperp-static requires dperp0_angstrom or dperp0_natural")
            return DPerpPerturbative(m, DPerpStaticConstant(self.dperp0_angstrom))
        if self.model_kind == "dperp-table":
            if self.dperp_table is None:
                raise ConfigError("dperp-table requires dperp_table = <csv path>")
            table = load_d_perp_table(self.dperp_table, self.allow_extrapolation)
            return DPerpPerturbative(m, table)
        raise ConfigError(f"unknown model kind {self.model_kind!r}")

    def force_spec(self) -> ForceSpec:
        return ForceSpec(
            s1=self.surface_model(),
            method=self.engine,
            sphere_radius=self.radius if self.geometry_kind == "sphere" else None,
            quad_method=self.quad_method,
        )

    def integration_config(self) -> IntegrationConfig:
        rel = self.delta_rel_tol if self.engine in ("linear", "nonretarded") else self.rel_tol
        return IntegrationConfig(rel_tol=rel)


def _get(section, key, parse, default=None, required=False):
    if key not in section:
        if required:
            raise ConfigError(f"missing required key {key!r}")
        return default
    raw = section[key].strip()
    try:
        return parse(raw)
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"bad value for {key!r}: {raw!r} ({exc})") from exc


def _parse_tau(raw: str) -> float:
    if raw.lower() in ("inf", "infinity"):
        return math.inf
    v = float(raw)
    if v <= 0.0:
        raise ValueError("tau_rel must be positive")
    return v


def _parse_bool(raw: str) -> bool:
    low = raw.lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError("expected a boolean")


def load_scenario(path) -> ScenarioConfig:
    """Parse and validate a scenario INI file.

    Referenced files (the d_perp table) must exist at parse time; any
    unknown section or key is an error so typos cannot silently change a
    run.
    """
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        read = parser.read(path)
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from exc
    if not read:
        raise ConfigError(f"cannot read scenario file {path}")

    known_sections = {"material", "model", "geometry", "grid", "integration", "output"}
    unknown = set(parser.sections()) - known_sections
    if unknown:
        raise ConfigError(f"unknown sections {sorted(unknown)}")
    known_keys = {
        "material": {"rs_angstrom", "rs_bohr", "tau_rel"},
        "model": {"kind", "engine", "dperp0_angstrom", "dperp0_natural", "dperp_table",
                  "allow_extrapolation"},
        "geometry": {"kind", "radius"},
        "grid": {"min", "max", "points", "spacing"},
        "integration": {"rel_tol", "delta_rel_tol", "method"},
        "output": {"csv", "manifest"},
    }
    for sec in parser.sections():
        extra = set(parser[sec]) - known_keys[sec]
        if extra:
            raise ConfigError(f"unknown keys {sorted(extra)} in section [{sec}]")

    mat = parser["material"] if parser.has_section("material") else {}
    rs_angstrom = _get(mat, "rs_angstrom", float)
    rs_bohr = _get(mat, "rs_bohr", float)
    if rs_angstrom is not None and rs_bohr is not None:
        raise ConfigError("give only one of rs_angstrom, rs_bohr")
    if rs_bohr is not None:
        rs_angstrom = rs_bohr * BOHR_RADIUS / ANGSTROM
    tau_rel = _get(mat, "tau_rel", _parse_tau, default=math.inf)

    if not parser.has_section("model"):
        raise ConfigError("missing [model] section")
    model = parser["model"]
    kind = _get(model, "kind", str, required=True)
    if kind not in MODEL_KINDS:
        raise ConfigError(f"model kind must be one of {MODEL_KINDS}, got {kind!r}")
    default_engine = "linear" if kind.startswith("dperp-") else "exact"
    engine = _get(model, "engine", str, default=default_engine)
    if engine not in ("exact", "linear", "nonretarded"):
        raise ConfigError(f"engine must be exact, linear or nonretarded, got {engine!r}")
    if engine in ("linear", "nonretarded") and not kind.startswith("dperp-"):
        raise ConfigError(f"engine {engine!r} requires a dperp-* model")

    dperp0_angstrom = _get(model, "dperp0_angstrom", float)
    dperp0_natural = _get(model, "dperp0_natural", float)
    if dperp0_angstrom is not None and dperp0_natural is not None:
        raise ConfigError("give only one of dperp0_angstrom, dperp0_natural")
    dperp_table = _get(model, "dperp_table", str)
    allow_extrapolation = _get(model, "allow_extrapolation", _parse_bool, default=False)

    if kind != "ideal" and rs_angstrom is None:
        raise ConfigError(f"model {kind!r} needs a [material] section with rs")
    if dperp0_natural is not None:
        mat_obj = material_from_rs(rs_angstrom, tau_rel=tau_rel)
        dperp0_angstrom = dperp0_natural * mat_obj.scale.length_m / ANGSTROM
    if kind == "dperp-table":
        if dperp_table is None:
            raise ConfigError("dperp-table requires dperp_table = <csv path>")
        if not os.path.exists(dperp_table):
            raise ConfigError(f"d_perp table not found: {dperp_table}")

    geo = parser["geometry"] if parser.has_section("geometry") else {}
    geometry_kind = _get(geo, "kind", str, default="plates")
    if geometry_kind not in ("plates", "sphere"):
        raise ConfigError(f"geometry kind must be plates or sphere, got {geometry_kind!r}")
    radius = _get(geo, "radius", float)
    if geometry_kind == "sphere" and (radius is None or radius <= 0.0):
        raise ConfigError("sphere geometry requires a positive radius")

    if not parser.has_section("grid"):
        raise ConfigError("missing [grid] section")
    grid = parser["grid"]
    gmin = _get(grid, "min", float, required=True)
    gmax = _get(grid, "max", float, required=True)
    points = _get(grid, "points", int, required=True)
    spacing = _get(grid, "spacing", str, default="log")
    if spacing not in ("log", "linear"):
        raise ConfigError(f"spacing must be log or linear, got {spacing!r}")
    if not (0.0 < gmin < gmax):
        raise ConfigError("grid needs 0 < min < max")
    if points < 2:
        raise ConfigError("grid needs points >= 2")

    integ = parser["integration"] if parser.has_section("integration") else {}
    rel_tol = _get(integ, "rel_tol", float, default=1.0e-8)
    delta_rel_tol = _get(integ, "delta_rel_tol", float, default=1.0e-6)
    quad_method = _get(integ, "method", str, default="polar")
    if quad_method not in ("polar", "cartesian"):
        raise ConfigError(f"integration method must be polar or cartesian")
    if rel_tol <= 0.0 or delta_rel_tol <= 0.0:
        raise ConfigError("tolerances must be positive")

    out = parser["output"] if parser.has_section("output") else {}
    csv_path = _get(out, "csv", str)
    manifest_path = _get(out, "manifest", str)

    cfg = ScenarioConfig(
        model_kind=kind,
        engine=engine,
        rs_angstrom=rs_angstrom,
        tau_rel=tau_rel,
        dperp0_angstrom=dperp0_angstrom,
        dperp_table=dperp_table,
        allow_extrapolation=allow_extrapolation,
        geometry_kind=geometry_kind,
        radius=radius,
        grid_min=gmin,
        grid_max=gmax,
        grid_points=points,
        grid_spacing=spacing,
        rel_tol=rel_tol,
        delta_rel_tol=delta_rel_tol,
        quad_method=quad_method,
        csv_path=csv_path,
        manifest_path=manifest_path,
    )
    cfg.surface_model()  # fail fast on inconsistent model/material combos
    return cfg


# ---------------------------------------------------------------------------
# CSV and manifest helpers
# ---------------------------------------------------------------------------


def _fmt(x: float | None) -> str:
    return "" if x is None else format(x, ".12e")


def config_hash(config: dict) -> str:
    canonical = json.dumps(config, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()


def _file_sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def write_sweep_csv(path, points: list[SweepPoint], material: Material | None) -> int:
    """Write sweep results; returns the number of converged rows."""
    length_nm = None if material is None else material.scale.length_m * 1e9
    converged = 0
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(SWEEP_COLUMNS)
        for pt in points:
            r = pt.result
            if r is not None and pt.error is None:
                converged += 1
                status = "ok"
            else:
                status = f"error: {pt.error}" if pt.error else "error"
            row = [
                _fmt(pt.length),
                _fmt(None if length_nm is None else pt.length * length_nm),
                _fmt(r.f_per_area if r else None),
                _fmt(r.f_ideal_ratio if r else None),
                _fmt(r.delta_f if r else None),
                _fmt(r.delta_rel if r else None),
                _fmt(r.delta_rel_scaled if r else None),
                _fmt(effective_displacement(pt.length, r.delta_rel) if r else None),
                _fmt(r.quadrature_error if r else None),
                status,
            ]
            writer.writerow(row)
    return converged


def _write_manifest(path: Path, kind: str, config: dict, tolerances: dict,
                    runtime: float, outputs: list[Path]) -> None:
    manifest = {
        "tool": "casimir-screen",
        "version": _VERSION,
        "kind": kind,
        "config": config,
        "config_sha256": config_hash(config),
        "tolerances": tolerances,
        "runtime_seconds": round(runtime, 3),
        "outputs": [
            {"path": p.name, "sha256": _file_sha256(p)} for p in outputs
        ],
    }
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def run_sweep(scenario: ScenarioConfig, out_dir=None) -> tuple[Path, Path, int]:
    """Run a configured sweep; returns (csv_path, manifest_path, n_converged)."""
    out = Path(out_dir) if out_dir is not None else Path.cwd()
    out.mkdir(parents=True, exist_ok=True)
    csv_path = out / (scenario.csv_path or "sweep.csv")
    manifest_path = out / (scenario.manifest_path or "sweep_manifest.json")

    start = time.perf_counter()
    points = sweep(scenario.grid(), scenario.force_spec(), scenario.integration_config())
    converged = write_sweep_csv(csv_path, points, scenario.material())
    _write_manifest(
        manifest_path,
        "sweep",
        scenario.as_dict(),
        {"rel_tol": scenario.rel_tol, "delta_rel_tol": scenario.delta_rel_tol},
        time.perf_counter() - start,
        [csv_path],
    )
    return csv_path, manifest_path, converged


# ---------------------------------------------------------------------------
# figure scenarios
# ---------------------------------------------------------------------------


def load_jellium_table(path) -> dict[float, float]:
    """Read (rs_bohr, d_perp0_bohr) rows from a CSV with '#' comments."""
    table: dict[float, float] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = [p.strip() for p in line.split(",")]
            if len(parts) != 2:
                raise ConfigError(f"{path}:{lineno}: expected rs_bohr, d_perp0_bohr")
            table[float(parts[0])] = float(parts[1])
    if not table:
        raise ConfigError(f"{path}: no data rows")
    return table


def _fig_point_worker(args):
    """All integrals needed by the fig1 curves at one separation."""
    from .force import _delta_energy_kernel, _delta_kernel, _energy_kernel, _force_kernel, _integrate

    material, length, rel_tol, delta_rel_tol, method = args
    m = material
    local = LocalDrude(m)
    hydro = Hydrodynamic(m)
    d_dyn = DPerpHydrodynamic()
    d_stat = DPerpStaticConstant(-m.beta_over_c * m.scale.length_m / ANGSTROM)
    cfg = IntegrationConfig(rel_tol=rel_tol)
    dcfg = IntegrationConfig(rel_tol=delta_rel_tol)
    try:
        f_local = _integrate(_force_kernel(local, local, m, length), length, cfg, method).value
        f_hydro = _integrate(_force_kernel(hydro, hydro, m, length), length, cfg, method).value
        db = _integrate(_delta_kernel(m, d_dyn, length, False), length, dcfg, method).value
        dc = _integrate(_delta_kernel(m, d_stat, length, False), length, dcfg, method).value
        dd = _integrate(_delta_kernel(m, d_dyn, length, True), length, dcfg, method).value
        e_local = _integrate(_energy_kernel(local, local, m, length), length, cfg, method).value
        de = _integrate(_delta_energy_kernel(m, d_dyn, length), length, dcfg, method).value
    except ConvergenceError as exc:
        return length, None, str(exc)
    rels = {
        "a": (f_hydro - f_local) / f_local,
        "b": db / f_local,
        "c": dc / f_local,
        "d": dd / f_local,
        "e": de / e_local,
    }
    return length, rels, None


def _fig2_point_worker(args):
    from .force import _delta_kernel, _force_kernel, _integrate

    material, d0_angstrom, length, rel_tol, delta_rel_tol, method = args
    m = material
    local = LocalDrude(m)
    dm = DPerpStaticConstant(d0_angstrom)
    cfg = IntegrationConfig(rel_tol=rel_tol)
    dcfg = IntegrationConfig(rel_tol=delta_rel_tol)
    try:
        f_local = _integrate(_force_kernel(local, local, m, length), length, cfg, method).value
        dv = _integrate(_delta_kernel(m, dm, length, False), length, dcfg, method).value
    except ConvergenceError as exc:
        return length, None, str(exc)
    return length, dv / f_local, None


def _write_curve_csv(path: Path, rows: list[tuple[float, float]]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["L_natural", "minus_delta_rel", "delta_rel_scaled"])
        for length, rel in rows:
            writer.writerow([_fmt(length), _fmt(-rel), _fmt(rel * length)])


def _run_jobs(worker, jobs, max_workers=None):
    workers = max_workers if max_workers is not None else max_workers_from_env()
    if workers <= 1 or len(jobs) <= 1:
        return [worker(job) for job in jobs]
    with ProcessPoolExecutor(max_workers=min(workers, len(jobs))) as pool:
        return list(pool.map(worker, jobs))


def run_figures(
    which: str,
    out_dir,
    *,
    rs_angstrom: float = 1.59,
    tau_rel: float = 400.0,
    jellium_table_path=None,
    grid_min: float = 0.01,
    grid_max: float = 100.0,
    grid_points: int = 97,
    rel_tol: float = 1.0e-8,
    delta_rel_tol: float = 1.0e-6,
    quad_method: str = "polar",
    max_workers: int | None = None,
) -> list[Path]:
    """Reproduce the packaged figure scenarios as per-curve CSVs + manifest.

    fig2 refuses to run without an explicit jellium d_perp(0) table: those
    values are external data, not something this package computes.
    """
    if which not in ("fig1", "fig2"):
        raise ConfigError(f"unknown figure {which!r} (expected fig1 or fig2)")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    start = time.perf_counter()

    config = {
        "figure": which,
        "rs_angstrom": rs_angstrom,
        "tau_rel": "inf" if math.isinf(tau_rel) else tau_rel,
        "grid_min": grid_min,
        "grid_max": grid_max,
        "grid_points": grid_points,
        "grid_spacing": "log",
        "rel_tol": rel_tol,
        "delta_rel_tol": delta_rel_tol,
        "quad_method": quad_method,
    }
    lo, hi = math.log10(grid_min), math.log10(grid_max)
    lengths = [10.0 ** (lo + (hi - lo) * i / (grid_points - 1)) for i in range(grid_points)]

    outputs: list[Path] = []
    if which == "fig1":
        material = material_from_rs(rs_angstrom, tau_rel=tau_rel)
        jobs = [(material, L, rel_tol, delta_rel_tol, quad_method) for L in lengths]
        results = _run_jobs(_fig_point_worker, jobs, max_workers)
        curves: dict[str, list[tuple[float, float]]] = {k: [] for k in "abcde"}
        for length, rels, err in results:
            if err is not None:
                raise ConvergenceError(f"figure point L={length:g} failed: {err}", None)
            for key, rel in rels.items():
                curves[key].append((length, rel))
        for key, rows in curves.items():
            path = out / f"fig1_curve_{key}.csv"
            _write_curve_csv(path, rows)
            outputs.append(path)
    else:
        if jellium_table_path is None:
            raise ConfigError(
                "fig2 requires a jellium d_perp(0) table "
                "(CSV columns rs_bohr, d_perp0_bohr)"
            )
        table = load_jellium_table(jellium_table_path)
        config["jellium_table"] = {f"{k:g}": v for k, v in sorted(table.items())}
        for rs_bohr, d0_bohr in sorted(table.items()):
            material = material_from_rs(rs_bohr=rs_bohr, tau_rel=tau_rel)
            d0_angstrom = d0_bohr * BOHR_RADIUS / ANGSTROM
            jobs = [
                (material, d0_angstrom, L, rel_tol, delta_rel_tol, quad_method)
                for L in lengths
            ]
            results = _run_jobs(_fig2_point_worker, jobs, max_workers)
            rows = []
            for length, rel, err in results:
                if err is not None:
                    raise ConvergenceError(f"figure point L={length:g} failed: {err}", None)
                rows.append((length, rel))
            path = out / f"fig2_rs{rs_bohr:g}.csv"
            _write_curve_csv(path, rows)
            outputs.append(path)

    manifest_path = out / f"{which}_manifest.json"
    _write_manifest(
        manifest_path,
        which,
        config,
        {"rel_tol": rel_tol, "delta_rel_tol": delta_rel_tol},
        time.perf_counter() - start,
        outputs,
    )
    return outputs + [manifest_path]


def run_figures_from_manifest(manifest_path, out_dir, max_workers: int | None = None) -> list[Path]:
    """Re-run a figure scenario exactly as recorded in its manifest."""
    with open(manifest_path, "r", encoding="utf-8") as fh:
        manifest = json.load(fh)
    config = manifest.get("config", {})
    which = config.get("figure")
    if which not in ("fig1", "fig2"):
        raise ConfigError(f"{manifest_path}: not a figure manifest")
    table_path = None
    if which == "fig2":
        # materialize the embedded table so the rerun needs no external file
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        table_path = out / "jellium_dperp0_from_manifest.csv"
        rows = config.get("jellium_table", {})
        lines = ["# regenerated from manifest"] + [
            f"{k}, {v}" for k, v in sorted(rows.items(), key=lambda kv: float(kv[0]))
        ]
        table_path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    tau = config.get("tau_rel", "inf")
    return run_figures(
        which,
        out_dir,
        rs_angstrom=config["rs_angstrom"],
        tau_rel=math.inf if tau == "inf" else float(tau),
        jellium_table_path=table_path,
        grid_min=config["grid_min"],
        grid_max=config["grid_max"],
        grid_points=config["grid_points"],
        rel_tol=config["rel_tol"],
        delta_rel_tol=config["delta_rel_tol"],
        quad_method=config["quad_method"],
        max_workers=max_workers,
    )
