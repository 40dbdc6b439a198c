"""Electron-gas material parameterization and the Drude bulk response.

A metal is described by its density parameter rs.  The plasma frequency and
Fermi velocity follow from the standard free-electron-gas relations

    n = 3/(4 pi rs^3),  omega_p^2 = 4 pi n e^2 / m,  v_F = hbar (3 pi^2 n)^(1/3) / m,

and the hydrodynamic speed is beta^2 = (3/5) v_F^2.  Dissipation enters
through the dimensionless lifetime omega_p*tau; the dissipationless limit is
a first-class flag (tau_rel = inf), not a large number.

All response evaluation happens on the imaginary frequency axis, where the
Drude dielectric function is real, positive and smooth:

    eps(i zeta) = 1 + omega_p^2 / (zeta^2 + zeta/tau).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .units import (
    ANGSTROM,
    ATOMIC_VELOCITY,
    BOHR_RADIUS,
    C_LIGHT,
    HARTREE_ENERGY,
    HBAR,
    ELEMENTARY_CHARGE,
    NaturalScale,
)


@dataclass(frozen=True)
class Material:
    """Immutable bulk-metal parameters.

    Attributes
    ----------
    rs_angstrom : float
        Electron density parameter in Angstrom.
    omega_p : float
        Plasma frequency in rad/s.
    tau_rel : float
        Dimensionless lifetime omega_p*tau; math.inf marks the
        dissipationless mode.
    v_f : float
        Fermi velocity in m/s.
    beta_hydro : float
        Hydrodynamic speed sqrt(3/5)*v_f in m/s.  A value of exactly 0 is
        accepted as the degenerate local limit; the nonlocal operations then
        refuse to run and point the caller at the local model.
    """

    rs_angstrom: float
    omega_p: float
    tau_rel: float
    v_f: float
    beta_hydro: float

    def __post_init__(self):
        if not self.rs_angstrom > 0.0:
            raise ValueError("rs must be positive")
        if not self.omega_p > 0.0:
            raise ValueError("omega_p must be positive")
        if not self.tau_rel > 0.0:
            raise ValueError("tau_rel must be positive (use math.inf for no dissipation)")
        if not 0.0 <= self.beta_hydro < C_LIGHT:
            raise ValueError("beta_hydro must lie in [0, c)")

    @property
    def dissipationless(self) -> bool:
        return math.isinf(self.tau_rel)

    @property
    def inv_tau_rel(self) -> float:
        """1/(omega_p*tau); exactly 0.0 in the dissipationless mode."""
        return 0.0 if self.dissipationless else 1.0 / self.tau_rel

    @property
    def beta_over_c(self) -> float:
        return self.beta_hydro / C_LIGHT

    @property
    def scale(self) -> NaturalScale:
        return NaturalScale(self.omega_p)


def material_from_rs(
    rs_angstrom: float | None = None,
    *,
    rs_bohr: float | None = None,
    tau_rel: float = math.inf,
) -> Material:
    """Build a Material from the density parameter rs.

    Exactly one of ``rs_angstrom`` or ``rs_bohr`` must be given.  The derived
    quantities are computed in atomic units, where omega_p = sqrt(3/rs^3) and
    v_F = (9 pi / 4)^(1/3) / rs, then converted to SI.

    Parameters
    ----------
    rs_angstrom : float, optional
        rs in Angstrom.
    rs_bohr : float, optional
        rs in Bohr radii.
    tau_rel : float
        omega_p*tau; math.inf disables dissipation.
    """
    if (rs_angstrom is None) == (rs_bohr is None):
        raise ValueError("give exactly one of rs_angstrom or rs_bohr")
    if rs_bohr is not None:
        rs_m = rs_bohr * BOHR_RADIUS
    else:
        rs_m = rs_angstrom * ANGSTROM
    if not rs_m > 0.0:
        raise ValueError("rs must be positive")
    if not tau_rel > 0.0:
        raise ValueError("tau_rel must be positive (use math.inf for no dissipation)")

    rs_au = rs_m / BOHR_RADIUS
    omega_p = math.sqrt(3.0 / rs_au**3) * HARTREE_ENERGY / HBAR
    v_f = (9.0 * math.pi / 4.0) ** (1.0 / 3.0) / rs_au * ATOMIC_VELOCITY
    beta = math.sqrt(0.6) * v_f
    return Material(
        rs_angstrom=rs_m / ANGSTROM,
        omega_p=omega_p,
        tau_rel=float(tau_rel),
        v_f=v_f,
        beta_hydro=beta,
    )


def gold() -> Material:
    """Au parameters: rs = 1.59 Angstrom, omega_p*tau = 400."""
    return material_from_rs(1.59, tau_rel=400.0)


def eps_drude_imag(m: Material, zeta):
    """Drude dielectric function on the imaginary axis, eps(i zeta).

    ``zeta`` is in units of omega_p and may be a scalar or ndarray.  The
    result is real, >= 1 and strictly decreasing in zeta.  At zeta = 0 the
    function diverges; by convention +inf is returned there (the quadrature
    engine uses open rules and never lands on that endpoint).
    """
    z = np.asarray(zeta, dtype=float)
    if np.any(z < 0.0):
        raise ValueError("zeta must be >= 0")
    with np.errstate(divide="ignore"):
        out = 1.0 + 1.0 / (z * (z + m.inv_tau_rel))
    return out if out.ndim else float(out)


def _parse_float_or_inf(text: str) -> float:
    t = text.strip().lower()
    if t in ("inf", "infinity"):
        return math.inf
    return float(t)


def load_material_config(path) -> Material:
    """Read a Material from a plain-text key/value file.

    Recognized keys: ``rs_angstrom`` (or ``rs_bohr``), ``tau_rel`` and the
    optional overrides ``omega_p_ev`` and ``v_f_si``.  Lines starting with
    '#' are comments; values are separated from keys by '='.
    """
    keys: dict[str, str] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected 'key = value'")
            key, _, value = line.partition("=")
            keys[key.strip().lower()] = value.strip()

    known = {"rs_angstrom", "rs_bohr", "tau_rel", "omega_p_ev", "v_f_si"}
    unknown = set(keys) - known
    if unknown:
        raise ValueError(f"{path}: unknown keys {sorted(unknown)}")
    if "rs_angstrom" in keys and "rs_bohr" in keys:
        raise ValueError(f"{path}: give only one of rs_angstrom, rs_bohr")
    if "rs_angstrom" not in keys and "rs_bohr" not in keys:
        raise ValueError(f"{path}: rs_angstrom or rs_bohr is required")

    tau_rel = _parse_float_or_inf(keys.get("tau_rel", "inf"))
    if "rs_angstrom" in keys:
        m = material_from_rs(float(keys["rs_angstrom"]), tau_rel=tau_rel)
    else:
        m = material_from_rs(rs_bohr=float(keys["rs_bohr"]), tau_rel=tau_rel)

    omega_p = m.omega_p
    v_f = m.v_f
    if "omega_p_ev" in keys:
        omega_p = float(keys["omega_p_ev"]) * ELEMENTARY_CHARGE / HBAR
    if "v_f_si" in keys:
        v_f = float(keys["v_f_si"])
    if omega_p != m.omega_p or v_f != m.v_f:
        m = Material(
            rs_angstrom=m.rs_angstrom,
            omega_p=omega_p,
            tau_rel=m.tau_rel,
            v_f=v_f,
            beta_hydro=math.sqrt(0.6) * v_f,
        )
    return m
