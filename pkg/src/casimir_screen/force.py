"""Casimir force, nonlocal corrections and sphere-plate proximity layer.

Everything is evaluated on the imaginary frequency axis, where the
round-trip integrand is smooth, positive and exponentially damped.  With
hbar = c = 1, frequencies in omega_p and lengths in c/omega_p, the force per
unit area between two plates with reflection amplitudes r1, r2 is

    F(L) = 1/(2 pi^2) Int dzeta Int dQ  Q kappa  Sum_a  g_a,
    g_a  = rho_a E / (1 - rho_a E),   rho_a = r1_a r2_a,   E = e^(-2 kappa L),

which reduces to pi^2/(240 L^4) for ideal mirrors.  Attraction is reported
positive.  The plate-plate interaction energy needed by the proximity force
approximation is the L'-integral of F and has the closed form

    E_pp(L) = 1/(4 pi^2) Int dzeta Int dQ  Q  Sum_a  [-log(1 - rho_a E)],

so the sphere-plate force F_sp = 2 pi R E_pp(L) costs one 2D quadrature.

First order in the screening centroid d_perp (both plates identical), the
correction to F and to E_pp are

    dF(L)   = 1/(pi^2)   Int Int  Q kappa u d_perp  rho0 E/(1 - rho0 E)^2,
    dE_pp(L)= 1/(2 pi^2) Int Int  Q       u d_perp  rho0 E/(1 - rho0 E),
    u = 2 kappa eps Q^2 / (eps kappa^2 + Q^2),      rho0 = (r_p0)^2,

with the sign of the correction following the sign of d_perp.  A
finite-difference test in the suite checks dF against the linearization of
the full force, which pins both the kernel and its normalization.

The non-retarded variant replaces the coupling and the reflection amplitude
by their electrostatic limits, eps/(eps+1) and (eps-1)/(eps+1), while the
round-trip decay keeps the full e^(-2 kappa L); dropping the kappa in the
exponent as well would decouple the frequency integral entirely and grossly
overshoot the correction at separations beyond c/omega_p.
"""

from __future__ import annotations

import math
import os
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .materials import Material
from .quadrature import (
    ConvergenceError,
    ExpDecay,
    IntegrationConfig,
    QuadResult,
    integrate_2d_semi_inf,
    integrate_finite,
)
from .surface import (
    DPerpModel,
    DPerpPerturbative,
    Hydrodynamic,
    IdealMirror,
    LocalDrude,
    SurfaceModel,
    d_perp_eval,
    local_counterpart,
    r_p_local,
    reflection_pair,
)
from .units import ideal_casimir_pressure_natural

__all__ = [
    "ForceConvergenceError",
    "ForceResult",
    "ForceSpec",
    "Geometry",
    "ParallelPlates",
    "PfaValidityWarning",
    "SpherePlate",
    "SweepPoint",
    "delta_force_linear",
    "delta_force_nonret",
    "effective_displacement",
    "force_per_area",
    "force_per_area_real_axis",
    "pfa_delta_linear",
    "pfa_sphere_force",
    "sweep",
]

THREADS_ENV_VAR = "CASIMIR_SCREEN_THREADS"

# Tolerance defaults: the force itself converges to 1e-8, corrections to
# 1e-6 (two orders below the percent-level experimental precision).
DEFAULT_FORCE_CONFIG = IntegrationConfig(rel_tol=1.0e-8)
DEFAULT_DELTA_CONFIG = IntegrationConfig(rel_tol=1.0e-6)


class PfaValidityWarning(UserWarning):
    """Sphere radius is not large against the gap; the proximity force
    approximation is questionable."""


class ForceConvergenceError(RuntimeError):
    """Quadrature failed to converge; carries the partial ForceResult."""

    def __init__(self, message: str, partial: "ForceResult"):
        super().__init__(message)
        self.partial = partial


@dataclass(frozen=True)
class ParallelPlates:
    length: float

    def __post_init__(self):
        if not self.length > 0.0:
            raise ValueError("plate separation must be positive")


@dataclass(frozen=True)
class SpherePlate:
    length: float
    radius: float

    def __post_init__(self):
        if not self.length > 0.0:
            raise ValueError("gap must be positive")
        if not self.radius > 0.0:
            raise ValueError("radius must be positive")
        if self.radius < 10.0 * self.length:
            warnings.warn(
                f"R = {self.radius:g} < 10 L = {10 * self.length:g}: "
                "proximity-force approximation is marginal",
                PfaValidityWarning,
                stacklevel=2,
            )


Geometry = ParallelPlates | SpherePlate


@dataclass(frozen=True)
class ForceResult:
    """Force per area plus nonlocal-correction diagnostics, natural units.

    For sphere-plate geometry ``f_per_area`` holds the total PFA force
    2 pi R E_pp (units hbar omega_p^2 / c) instead of a pressure.

    ``delta_f`` is the signed nonlocal correction relative to the local
    Drude baseline (zero when the model itself is local or ideal),
    ``delta_rel`` its ratio to the baseline and ``delta_rel_scaled`` that
    ratio multiplied by L omega_p / c.  ``f_per_area_si`` is None when no
    material sets the scale (ideal mirrors in natural units).
    """

    f_per_area: float
    f_ideal_ratio: float
    delta_f: float
    delta_rel: float
    delta_rel_scaled: float
    quadrature_error: float
    f_per_area_si: float | None = None


# ---------------------------------------------------------------------------
# kernels
# ---------------------------------------------------------------------------


def _reference_material(*models: SurfaceModel) -> Material | None:
    for model in models:
        mat = getattr(model, "material", None)
        if mat is not None:
            return mat
    return None


def _pair_rho(s1, s2, ref: Material | None, q, z):
    """rho_s and rho_p = r1*r2 with each plate evaluated in its own natural
    units; frequencies are rescaled when the two materials differ."""

    def amplitudes(model):
        mat = getattr(model, "material", None)
        if mat is None or ref is None or mat.omega_p == ref.omega_p:
            return reflection_pair(model, z, q)
        ratio = ref.omega_p / mat.omega_p
        return reflection_pair(model, z * ratio, q * ratio)

    p1 = amplitudes(s1)
    p2 = amplitudes(s2) if s2 is not s1 else p1
    return p1.r_s * p2.r_s, p1.r_p * p2.r_p


def _force_kernel(s1, s2, ref, length):
    def f(q, z):
        rho_s, rho_p = _pair_rho(s1, s2, ref, q, z)
        kap = np.hypot(z, q)
        ex = np.exp(-2.0 * kap * length)
        gs = rho_s * ex
        gp = rho_p * ex
        return q * kap * (gs / (1.0 - gs) + gp / (1.0 - gp)) / (2.0 * math.pi**2)

    return f


def _energy_kernel(s1, s2, ref, length):
    def f(q, z):
        rho_s, rho_p = _pair_rho(s1, s2, ref, q, z)
        kap = np.hypot(z, q)
        ex = np.exp(-2.0 * kap * length)
        val = -np.log1p(-rho_s * ex) - np.log1p(-rho_p * ex)
        return q * val / (4.0 * math.pi**2)

    return f


def _delta_kernel(m: Material, dm: DPerpModel, length: float, nonretarded: bool):
    from .materials import eps_drude_imag

    def f(q, z):
        kap = np.hypot(z, q)
        ex = np.exp(-2.0 * kap * length)
        eps = eps_drude_imag(m, z)
        d = d_perp_eval(dm, m, z, q)
        if nonretarded:
            # electrostatic coupling and image amplitude, retarded decay
            rho0 = ((eps - 1.0) / (eps + 1.0)) ** 2 * ex
            w = rho0 / (1.0 - rho0) ** 2
            return 2.0 * q**3 * (eps * d / (eps + 1.0)) * w / math.pi**2
        r0 = r_p_local(m, z, q)
        rho0 = r0 * r0 * ex
        w = rho0 / (1.0 - rho0) ** 2
        u = 2.0 * kap * eps * q * q / (eps * kap * kap + q * q)
        return q * kap * u * d * w / math.pi**2

    return f


def _delta_energy_kernel(m: Material, dm: DPerpModel, length: float):
    from .materials import eps_drude_imag

    def f(q, z):
        kap = np.hypot(z, q)
        ex = np.exp(-2.0 * kap * length)
        eps = eps_drude_imag(m, z)
        d = d_perp_eval(dm, m, z, q)
        r0 = r_p_local(m, z, q)
        rho0 = r0 * r0 * ex
        u = 2.0 * kap * eps * q * q / (eps * kap * kap + q * q)
        return q * u * d * rho0 / (1.0 - rho0) / (2.0 * math.pi**2)

    return f


def _integrate(kernel, length, cfg, method) -> QuadResult:
    # The kernels decay like kappa^3 e^(-2 kappa L); a transform scale of
    # 4/(2L) maps that onto (1-t)^3 log^3(1-t), which vanishes smoothly at
    # the endpoint, instead of the bare log^3 divergence the exact decay
    # length 1/(2L) would leave behind.
    tr = ExpDecay(scale=2.0 / length)
    return integrate_2d_semi_inf(kernel, cfg, method=method, transform_x=tr, transform_y=tr)


# ---------------------------------------------------------------------------
# engines
# ---------------------------------------------------------------------------


def force_per_area(
    s1: SurfaceModel,
    s2: SurfaceModel | None,
    length: float,
    cfg: IntegrationConfig | None = None,
    method: str = "polar",
) -> ForceResult:
    """Force per unit area between two plates a distance ``length`` apart.

    ``length`` is in units of c/omega_p.  If ``s2`` is None the plates are
    identical.  For a nonlocal model the delta fields report the difference
    against the same material's local Drude baseline.
    """
    if not length > 0.0:
        raise ValueError("length must be positive")
    if s2 is None:
        s2 = s1
    cfg = cfg if cfg is not None else DEFAULT_FORCE_CONFIG
    ref = _reference_material(s1, s2)

    def run(a, b) -> QuadResult:
        return _integrate(_force_kernel(a, b, ref, length), length, cfg, method)

    try:
        main = run(s1, s2)
    except ConvergenceError as exc:
        partial = _assemble(exc.result.value, None, length, ref, exc.result, None)
        raise ForceConvergenceError(str(exc), partial) from exc

    b1, b2 = local_counterpart(s1), local_counterpart(s2)
    base = None
    if (b1, b2) != (s1, s2):
        try:
            base = run(b1, b2)
        except ConvergenceError as exc:
            partial = _assemble(main.value, None, length, ref, main, None)
            raise ForceConvergenceError(str(exc), partial) from exc
    return _assemble(main.value, base.value if base else None, length, ref, main, base)


def _assemble(
    f_value: float,
    f_base: float | None,
    length: float,
    ref: Material | None,
    main: QuadResult,
    base: QuadResult | None,
) -> ForceResult:
    ideal = ideal_casimir_pressure_natural(length)
    if f_base is None:
        delta = 0.0
        rel = 0.0
    else:
        delta = f_value - f_base
        rel = delta / f_base
    err = main.abs_error_estimate + (base.abs_error_estimate if base else 0.0)
    return ForceResult(
        f_per_area=f_value,
        f_ideal_ratio=f_value / ideal,
        delta_f=delta,
        delta_rel=rel,
        delta_rel_scaled=rel * length,
        quadrature_error=err / abs(f_value) if f_value else err,
        f_per_area_si=f_value * ref.scale.pressure_pa if ref is not None else None,
    )


def _delta_engine(
    m: Material,
    dm: DPerpModel,
    length: float,
    cfg: IntegrationConfig | None,
    method: str,
    nonretarded: bool,
) -> ForceResult:
    if not length > 0.0:
        raise ValueError("length must be positive")
    cfg = cfg if cfg is not None else DEFAULT_DELTA_CONFIG
    base_model = LocalDrude(m)
    force_cfg = replace(cfg, rel_tol=min(cfg.rel_tol, DEFAULT_FORCE_CONFIG.rel_tol))
    try:
        base = _integrate(
            _force_kernel(base_model, base_model, m, length), length, force_cfg, method
        )
        delta = _integrate(_delta_kernel(m, dm, length, nonretarded), length, cfg, method)
    except ConvergenceError as exc:
        partial = _assemble(exc.result.value, None, length, m, exc.result, None)
        raise ForceConvergenceError(str(exc), partial) from exc
    f0 = base.value
    d = delta.value
    ideal = ideal_casimir_pressure_natural(length)
    err = base.abs_error_estimate + delta.abs_error_estimate
    return ForceResult(
        f_per_area=f0 + d,
        f_ideal_ratio=(f0 + d) / ideal,
        delta_f=d,
        delta_rel=d / f0,
        delta_rel_scaled=d / f0 * length,
        quadrature_error=err / abs(f0 + d),
        f_per_area_si=(f0 + d) * m.scale.pressure_pa,
    )


def delta_force_linear(
    m: Material,
    dm: DPerpModel,
    length: float,
    cfg: IntegrationConfig | None = None,
    method: str = "polar",
) -> ForceResult:
    """Nonlocal force correction, first order in d_perp, retarded kernel."""
    return _delta_engine(m, dm, length, cfg, method, nonretarded=False)


def delta_force_nonret(
    m: Material,
    dm: DPerpModel,
    length: float,
    cfg: IntegrationConfig | None = None,
    method: str = "polar",
) -> ForceResult:
    """Nonlocal force correction in the small-distance (non-retarded) form.

    Intended regime is L <= c/omega_p; beyond that it systematically
    overestimates the correction magnitude.
    """
    return _delta_engine(m, dm, length, cfg, method, nonretarded=True)


def effective_displacement(length: float, delta_rel: float) -> float:
    """Effective separation shift summarizing a relative force correction.

    Uses F ~ L^-3 at short range, so dF/F = -3 dL/L, i.e.
    dL = -(L/3) * delta_rel; positive values mean the plates look farther
    apart than their nominal separation.
    """
    if not length > 0.0:
        raise ValueError("length must be positive")
    return -(length / 3.0) * delta_rel


def pfa_sphere_force(
    s1: SurfaceModel,
    s2: SurfaceModel | None,
    length: float,
    radius: float,
    cfg: IntegrationConfig | None = None,
    method: str = "polar",
) -> ForceResult:
    """Sphere-plate force via the proximity theorem, F = 2 pi R E_pp(L).

    The delta fields compare the plate-plate interaction energy against the
    local baseline, which is the correction ratio the proximity construction
    preserves.
    """
    geom = SpherePlate(length, radius)  # validates and warns on R < 10 L
    if s2 is None:
        s2 = s1
    cfg = cfg if cfg is not None else DEFAULT_FORCE_CONFIG
    ref = _reference_material(s1, s2)

    def run(a, b) -> QuadResult:
        return _integrate(_energy_kernel(a, b, ref, length), length, cfg, method)

    try:
        main = run(s1, s2)
        b1, b2 = local_counterpart(s1), local_counterpart(s2)
        base = run(b1, b2) if (b1, b2) != (s1, s2) else None
    except ConvergenceError as exc:
        partial = _assemble_pfa(exc.result, None, geom, ref)
        raise ForceConvergenceError(str(exc), partial) from exc
    return _assemble_pfa(main, base, geom, ref)


def _assemble_pfa(
    main: QuadResult, base: QuadResult | None, geom: SpherePlate, ref: Material | None
) -> ForceResult:
    two_pi_r = 2.0 * math.pi * geom.radius
    f_sp = two_pi_r * main.value
    ideal = math.pi**3 * geom.radius / (360.0 * geom.length**3)
    if base is None:
        delta = 0.0
        rel = 0.0
        err = main.abs_error_estimate
    else:
        delta = two_pi_r * (main.value - base.value)
        rel = (main.value - base.value) / base.value
        err = main.abs_error_estimate + base.abs_error_estimate
    return ForceResult(
        f_per_area=f_sp,
        f_ideal_ratio=f_sp / ideal,
        delta_f=delta,
        delta_rel=rel,
        delta_rel_scaled=rel * geom.length,
        quadrature_error=two_pi_r * err / abs(f_sp) if f_sp else err,
        f_per_area_si=f_sp * ref.scale.force_n if ref is not None else None,
    )


def pfa_delta_linear(
    m: Material,
    dm: DPerpModel,
    length: float,
    radius: float,
    cfg: IntegrationConfig | None = None,
    method: str = "polar",
) -> ForceResult:
    """Sphere-plate nonlocal correction, first order in d_perp."""
    geom = SpherePlate(length, radius)
    cfg = cfg if cfg is not None else DEFAULT_DELTA_CONFIG
    base_model = LocalDrude(m)
    force_cfg = replace(cfg, rel_tol=min(cfg.rel_tol, DEFAULT_FORCE_CONFIG.rel_tol))
    try:
        base = _integrate(
            _energy_kernel(base_model, base_model, m, length), length, force_cfg, method
        )
        delta = _integrate(_delta_energy_kernel(m, dm, length), length, cfg, method)
    except ConvergenceError as exc:
        partial = _assemble_pfa(exc.result, None, geom, m)
        raise ForceConvergenceError(str(exc), partial) from exc
    two_pi_r = 2.0 * math.pi * radius
    e_total = base.value + delta.value
    ideal = math.pi**3 * radius / (360.0 * length**3)
    err = base.abs_error_estimate + delta.abs_error_estimate
    return ForceResult(
        f_per_area=two_pi_r * e_total,
        f_ideal_ratio=two_pi_r * e_total / ideal,
        delta_f=two_pi_r * delta.value,
        delta_rel=delta.value / base.value,
        delta_rel_scaled=delta.value / base.value * length,
        quadrature_error=err / abs(e_total),
        f_per_area_si=two_pi_r * e_total * m.scale.force_n,
    )


# ---------------------------------------------------------------------------
# sweeps
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ForceSpec:
    """What to evaluate at each separation of a sweep.

    ``method`` selects the engine: "exact" runs force_per_area (or the PFA
    energy when ``sphere_radius`` is set), "linear" and "nonretarded" run the
    first-order d_perp engines and require a DPerpPerturbative surface.
    """

    s1: SurfaceModel
    s2: SurfaceModel | None = None
    method: str = "exact"
    sphere_radius: float | None = None
    quad_method: str = "polar"

    def __post_init__(self):
        if self.method not in ("exact", "linear", "nonretarded"):
            raise ValueError(f"unknown sweep method {self.method!r}")
        if self.method in ("linear", "nonretarded"):
            if not isinstance(self.s1, DPerpPerturbative):
                raise ValueError(
                    f"method {self.method!r} requires a DPerpPerturbative surface model"
                )
            if self.s2 is not None:
                raise ValueError("perturbative sweeps use identical plates")
        if self.method == "nonretarded" and self.sphere_radius is not None:
            raise ValueError("non-retarded engine has no sphere-plate form")


@dataclass(frozen=True)
class SweepPoint:
    length: float
    result: ForceResult | None
    error: str | None = None

    @property
    def converged(self) -> bool:
        return self.result is not None and self.error is None


def evaluate_point(spec: ForceSpec, length: float, cfg: IntegrationConfig | None) -> ForceResult:
    if spec.method == "exact":
        if spec.sphere_radius is not None:
            return pfa_sphere_force(
                spec.s1, spec.s2, length, spec.sphere_radius, cfg, spec.quad_method
            )
        return force_per_area(spec.s1, spec.s2, length, cfg, spec.quad_method)
    model = spec.s1
    assert isinstance(model, DPerpPerturbative)
    if spec.method == "linear":
        if spec.sphere_radius is not None:
            return pfa_delta_linear(
                model.material, model.dperp_model, length, spec.sphere_radius, cfg,
                spec.quad_method,
            )
        return delta_force_linear(model.material, model.dperp_model, length, cfg, spec.quad_method)
    return delta_force_nonret(model.material, model.dperp_model, length, cfg, spec.quad_method)


def _sweep_worker(args) -> SweepPoint:
    spec, length, cfg = args
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            return SweepPoint(length, evaluate_point(spec, length, cfg))
    except ForceConvergenceError as exc:
        return SweepPoint(length, exc.partial, error=str(exc))
    except (ValueError, ConvergenceError) as exc:
        return SweepPoint(length, None, error=str(exc))


def max_workers_from_env() -> int:
    raw = os.environ.get(THREADS_ENV_VAR)
    if raw is None:
        return os.cpu_count() or 1
    try:
        n = int(raw)
    except ValueError:
        raise ValueError(f"{THREADS_ENV_VAR} must be an integer, got {raw!r}") from None
    return max(1, n)


def sweep(
    lengths,
    spec: ForceSpec,
    cfg: IntegrationConfig | None = None,
    max_workers: int | None = None,
) -> list[SweepPoint]:
    """Evaluate ``spec`` at every separation in ``lengths`` (natural units).

    Points are independent and run concurrently up to ``max_workers``
    processes (default: the CASIMIR_SCREEN_THREADS environment variable, or
    the CPU count).  Results keep the input order and per-point failures are
    collected rather than aborting the sweep.
    """
    ls = [float(x) for x in lengths]
    if any(not x > 0.0 for x in ls):
        raise ValueError("all separations must be positive")
    if sorted(ls) != ls:
        raise ValueError("separations must be sorted ascending")
    if not ls:
        return []
    workers = max_workers if max_workers is not None else max_workers_from_env()
    jobs = [(spec, L, cfg) for L in ls]
    if workers <= 1 or len(ls) == 1:
        return [_sweep_worker(job) for job in jobs]
    with ProcessPoolExecutor(max_workers=min(workers, len(ls))) as pool:
        return list(pool.map(_sweep_worker, jobs))


# ---------------------------------------------------------------------------
# real-frequency-axis cross-check
# ---------------------------------------------------------------------------


def force_per_area_real_axis(
    m: Material,
    length: float,
    rel_tol: float = 1.0e-3,
    q_par_max: float | None = None,
    k_max: float | None = None,
) -> float:
    """Evaluate the force on the real frequency axis (low accuracy).

    This is a cross-check of the rotated engine, not a production path: the
    real-axis integrand oscillates in the propagating sector and carries
    sharp surface-plasmon structure in the evanescent sector.  Identical
    local Drude plates with finite dissipation only; expect percent-level
    accuracy at moderate separations (L around c/omega_p).

    The normal-wavevector contour runs from iQ to 0 along the imaginary
    axis (evanescent waves) and then outward along the real axis
    (propagating waves); both segments are integrated at real frequency
    omega = sqrt(k^2 + Q^2) with the retarded Drude response.
    """
    if m.dissipationless:
        raise ValueError("real-axis cross-check requires finite dissipation")
    if not length > 0.0:
        raise ValueError("length must be positive")
    inv_tau = m.inv_tau_rel
    qmax = q_par_max if q_par_max is not None else 40.0 / length + 20.0
    kmax = k_max if k_max is not None else 40.0 / length + 20.0

    def eps_retarded(w):
        return 1.0 - 1.0 / (w * (w + 1j * inv_tau))

    def branch_up(values):
        vals = np.sqrt(values.astype(complex))
        return np.where(vals.imag < 0.0, -vals, vals)

    def summed(k, w, q_par, phase):
        eps = eps_retarded(w)
        km = branch_up(eps * w * w - q_par * q_par)
        rs = (k - km) / (k + km)
        rp = (eps * k - km) / (eps * k + km)
        out = 0.0
        for r in (rs, rp):
            xi_inv = r * r * phase
            out = out + xi_inv / (1.0 - xi_inv)
        return out

    cfg = IntegrationConfig(rel_tol=rel_tol, abs_tol=1e-300, max_subdivisions=4000)
    inner_cfg = IntegrationConfig(rel_tol=rel_tol / 10.0, abs_tol=1e-300, max_subdivisions=4000)

    def q_integrand_scalar(q_par: float) -> float:
        if q_par == 0.0:
            return 0.0

        def evanescent(y):
            w = np.sqrt(np.maximum(q_par * q_par - y * y, 0.0))
            w = np.where(w == 0.0, 1e-300, w)
            val = summed(1j * y, w, q_par, np.exp(-2.0 * y * length))
            return -(y * y / w) * val.imag

        def propagating(k):
            w = np.sqrt(k * k + q_par * q_par)
            val = summed(k.astype(complex), w, q_par, np.exp(2j * k * length))
            return (k * k / w) * val.real

        # dense initial panels so narrow plasmon peaks are not stepped over
        ev = integrate_finite(evanescent, 0.0, q_par, inner_cfg, initial_panels=64)
        pr = integrate_finite(propagating, 0.0, kmax, inner_cfg, initial_panels=256)
        return q_par * (ev.value + pr.value)

    def outer(ts):
        return np.array([q_integrand_scalar(t) for t in np.atleast_1d(ts)])

    res = integrate_finite(outer, 0.0, qmax, cfg, initial_panels=32)
    return res.value / (4.0 * math.pi**2)
