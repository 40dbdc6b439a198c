"""Command-line front end: force, sweep and figures subcommands.

Exit codes: 0 success, 2 usage or configuration error, 3 quadrature
convergence failure (partial output available with --partial-output).
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

from .force import (
    ForceConvergenceError,
    ForceResult,
    delta_force_linear,
    delta_force_nonret,
    effective_displacement,
    force_per_area,
    pfa_sphere_force,
)
from .materials import Material, material_from_rs
from .quadrature import ConvergenceError, IntegrationConfig
from .scenarios import (
    ConfigError,
    load_scenario,
    run_figures,
    run_figures_from_manifest,
    run_sweep,
)
from .surface import (
    DPerpHydrodynamic,
    DPerpPerturbative,
    DPerpStaticConstant,
    Hydrodynamic,
    IdealMirror,
    LocalDrude,
    load_d_perp_table,
)
from .units import ANGSTROM, ideal_casimir_pressure_si

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_CONVERGENCE = 3

_LENGTH_UNITS = {"nm": 1.0e-9, "um": 1.0e-6, "a": 1.0e-10, "m": 1.0}


def _parse_rs(raw: str) -> float:
    """rs flag: bare float means Angstrom; 'aB' suffix means Bohr radii."""
    text = raw.strip()
    low = text.lower()
    if low.endswith("ab"):
        from .units import BOHR_RADIUS

        return float(text[:-2]) * BOHR_RADIUS / ANGSTROM
    if low.endswith("a"):
        return float(text[:-1])
    return float(text)


def _parse_tau(raw: str) -> float:
    if raw.strip().lower() in ("inf", "infinity"):
        return math.inf
    v = float(raw)
    if v <= 0.0:
        raise argparse.ArgumentTypeError("tau must be positive or 'inf'")
    return v


def _parse_length(raw: str) -> tuple[float, bool]:
    """Return (value, is_si).  '60nm', '1um', '2A', '1e-7m' are SI; a bare
    number is a separation in units of c/omega_p."""
    text = raw.strip().lower()
    for suffix, factor in _LENGTH_UNITS.items():
        if text.endswith(suffix) and text != suffix:
            return float(text[: -len(suffix)]) * factor, True
    return float(text), False


def _print_force_report(model: str, length_natural: float, material: Material | None,
                        result: ForceResult, units: str) -> None:
    lines = [("model", model), ("L_natural", f"{length_natural:.12g}")]
    if material is not None:
        lines.append(("L_si_m", f"{length_natural * material.scale.length_m:.12e}"))
    lines.append(("F_per_area_natural", f"{result.f_per_area:.12e}"))
    if units == "si" and result.f_per_area_si is not None:
        lines.append(("F_per_area_si_pa", f"{result.f_per_area_si:.12e}"))
    lines += [
        ("F_ideal_ratio", f"{result.f_ideal_ratio:.12e}"),
        ("delta_F_natural", f"{result.delta_f:.12e}"),
        ("delta_rel", f"{result.delta_rel:.12e}"),
        ("minus_delta_rel", f"{-result.delta_rel:.12e}"),
        ("delta_rel_scaled", f"{result.delta_rel_scaled:.12e}"),
        ("delta_L_eff_natural",
         f"{effective_displacement(length_natural, result.delta_rel):.12e}"),
        ("quad_rel_err", f"{result.quadrature_error:.3e}"),
    ]
    width = max(len(k) for k, _ in lines)
    for key, value in lines:
        print(f"{key:<{width}} = {value}")


def _cmd_force(args) -> int:
    material = None
    if args.model != "ideal":
        material = material_from_rs(args.rs, tau_rel=args.tau)

    length_value, is_si = _parse_length(args.L)
    if is_si:
        if material is None:
            # ideal mirrors carry no scale; print the closed-form SI result
            if args.model == "ideal" and args.R is None:
                f_si = ideal_casimir_pressure_si(length_value)
                print(f"model               = ideal")
                print(f"L_si_m              = {length_value:.12e}")
                print(f"F_per_area_si_pa    = {f_si:.12e}")
                print(f"F_ideal_ratio       = 1.000000000000e+00")
                return EXIT_OK
            print("error: SI separations need a material model", file=sys.stderr)
            return EXIT_CONFIG
        length = length_value / material.scale.length_m
    else:
        length = length_value
    if length <= 0.0:
        print("error: separation must be positive", file=sys.stderr)
        return EXIT_CONFIG

    cfg = IntegrationConfig(rel_tol=args.tol)
    dcfg = IntegrationConfig(rel_tol=args.delta_tol)

    try:
        if args.model == "ideal":
            model = IdealMirror()
            result = (
                pfa_sphere_force(model, None, length, args.R, cfg, args.method)
                if args.R is not None
                else force_per_area(model, None, length, cfg, args.method)
            )
        elif args.model == "drude":
            model = LocalDrude(material)
            result = (
                pfa_sphere_force(model, None, length, args.R, cfg, args.method)
                if args.R is not None
                else force_per_area(model, None, length, cfg, args.method)
            )
        elif args.model == "hydro":
            model = Hydrodynamic(material)
            result = (
                pfa_sphere_force(model, None, length, args.R, cfg, args.method)
                if args.R is not None
                else force_per_area(model, None, length, cfg, args.method)
            )
        else:
            if args.model == "dperp-dynamic":
                dm = DPerpHydrodynamic()
            elif args.model == "dperp-static":
                if args.dperp0 is None:
                    print("error: --dperp0 is required for dperp-static", file=sys.stderr)
                    return EXIT_CONFIG
                dm = DPerpStaticConstant(args.dperp0 * material.scale.length_m / ANGSTROM)
            else:  # dperp-table
                if args.dperp_table is None:
                    print("error: --dperp-table is required for dperp-table", file=sys.stderr)
                    return EXIT_CONFIG
                dm = load_d_perp_table(args.dperp_table, args.allow_extrapolation)
            if args.engine == "exact":
                model = DPerpPerturbative(material, dm)
                result = force_per_area(model, None, length, cfg, args.method)
            elif args.engine == "nonretarded":
                result = delta_force_nonret(material, dm, length, dcfg, args.method)
            else:
                result = delta_force_linear(material, dm, length, dcfg, args.method)
    except ForceConvergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        if args.partial_output and exc.partial is not None:
            _print_force_report(args.model, length, material, exc.partial, args.units)
        return EXIT_CONVERGENCE
    except (ValueError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    _print_force_report(args.model, length, material, result, args.units)
    return EXIT_OK


def _cmd_sweep(args) -> int:
    try:
        scenario = load_scenario(args.config)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    csv_path, manifest_path, converged = run_sweep(scenario, args.out)
    total = scenario.grid_points
    print(f"wrote {csv_path} ({converged}/{total} points converged) and {manifest_path}")
    if converged < 0.9 * total:
        print("error: more than 10% of sweep points failed", file=sys.stderr)
        return EXIT_CONVERGENCE
    return EXIT_OK


def _cmd_figures(args) -> int:
    try:
        if args.from_manifest is not None:
            outputs = run_figures_from_manifest(args.from_manifest, args.out)
        else:
            if args.which is None:
                print("error: give a figure name (fig1 or fig2) or --from-manifest",
                      file=sys.stderr)
                return EXIT_CONFIG
            outputs = run_figures(
                args.which,
                args.out,
                rs_angstrom=args.rs,
                tau_rel=args.tau,
                jellium_table_path=args.jellium_table,
                grid_min=args.lmin,
                grid_max=args.lmax,
                grid_points=args.points,
                rel_tol=args.tol,
                delta_rel_tol=args.delta_tol,
                quad_method=args.method,
            )
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ConvergenceError, ForceConvergenceError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    for path in outputs:
        print(f"wrote {path}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="casimir-screen",
        description="Casimir force between metal plates with nonlocal "
                    "surface-screening corrections",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    force = sub.add_parser("force", help="single-point force evaluation")
    force.add_argument("--model", required=True,
                       choices=["ideal", "drude", "hydro", "dperp-dynamic",
                                "dperp-static", "dperp-table"])
    force.add_argument("--rs", type=_parse_rs, default=1.59,
                       help="density parameter; bare number = Angstrom, "
                            "'3.01aB' = Bohr radii (default 1.59)")
    force.add_argument("--tau", type=_parse_tau, default=400.0,
                       help="omega_p*tau, or 'inf' (default 400)")
    force.add_argument("--L", required=True,
                       help="separation: bare number = units of c/omega_p; "
                            "'60nm', '1um', '2A', '1e-7m' = SI")
    force.add_argument("--R", type=float, default=None,
                       help="sphere radius in c/omega_p units (sphere-plate PFA)")
    force.add_argument("--tol", type=float, default=1.0e-8,
                       help="relative tolerance for force quadrature")
    force.add_argument("--delta-tol", type=float, default=1.0e-6, dest="delta_tol",
                       help="relative tolerance for correction quadrature")
    force.add_argument("--units", choices=["natural", "si"], default="natural")
    force.add_argument("--method", choices=["polar", "cartesian"], default="polar")
    force.add_argument("--engine", choices=["linear", "nonretarded", "exact"],
                       default="linear",
                       help="correction engine for dperp-* models")
    force.add_argument("--dperp0", type=float, default=None,
                       help="static d_perp(0) in c/omega_p units (dperp-static)")
    force.add_argument("--dperp-table", dest="dperp_table", default=None,
                       help="CSV of (zeta_over_omega_p, d_perp_angstrom)")
    force.add_argument("--allow-extrapolation", action="store_true",
                       dest="allow_extrapolation")
    force.add_argument("--partial-output", action="store_true", dest="partial_output",
                       help="print the partial result on convergence failure")
    force.set_defaults(func=_cmd_force)

    sweep_p = sub.add_parser("sweep", help="run a scenario config over an L grid")
    sweep_p.add_argument("config", help="scenario INI file")
    sweep_p.add_argument("--out", default=None, help="output directory (default: cwd)")
    sweep_p.set_defaults(func=_cmd_sweep)

    figures = sub.add_parser("figures", help="reproduce the packaged figure scenarios")
    figures.add_argument("which", nargs="?", choices=["fig1", "fig2"], default=None)
    figures.add_argument("--out", required=True, help="output directory")
    figures.add_argument("--rs", type=_parse_rs, default=1.59)
    figures.add_argument("--tau", type=_parse_tau, default=400.0)
    figures.add_argument("--jellium-table", dest="jellium_table", default=None,
                         help="CSV of (rs_bohr, d_perp0_bohr); required for fig2")
    figures.add_argument("--lmin", type=float, default=0.01)
    figures.add_argument("--lmax", type=float, default=100.0)
    figures.add_argument("--points", type=int, default=97)
    figures.add_argument("--tol", type=float, default=1.0e-8)
    figures.add_argument("--delta-tol", type=float, default=1.0e-6, dest="delta_tol")
    figures.add_argument("--method", choices=["polar", "cartesian"], default="polar")
    figures.add_argument("--from-manifest", dest="from_manifest", default=None,
                         help="re-run a figure exactly as recorded in a manifest")
    figures.set_defaults(func=_cmd_figures)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except KeyboardInterrupt:
        return 130


if __name__ == "__main__":
    sys.exit(main())
