"""Unit conventions and physical constants.

All internal computation is carried out in natural units with hbar = c = 1:
frequencies are measured in units of the plasma frequency omega_p, lengths in
units of c/omega_p, and forces per area in units of hbar*omega_p^4/c^3.
Conversion to SI happens only at the user-facing boundary, anchored to the
omega_p of a concrete material.

Constants are CODATA values hard-coded to 9 significant digits so results are
reproducible without any external data source.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

# CODATA 2018, truncated to 9 significant digits.  c and e are exact.
HBAR = 1.054571817e-34          # J s
C_LIGHT = 2.99792458e8          # m/s (exact)
ELEMENTARY_CHARGE = 1.602176634e-19  # C (exact)
ELECTRON_MASS = 9.10938370e-31  # kg
BOHR_RADIUS = 5.29177211e-11    # m
HARTREE_ENERGY = 4.35974472e-18  # J
ATOMIC_VELOCITY = 2.18769126e6  # m/s (Bohr velocity, alpha*c)
VACUUM_PERMITTIVITY = 8.85418781e-12  # F/m

ANGSTROM = 1.0e-10              # m


@dataclass(frozen=True)
class NaturalScale:
    """Conversion factors between natural units and SI for a given omega_p.

    Frequencies scale with omega_p, lengths with c/omega_p, pressures with
    hbar*omega_p^4/c^3 and energies per area with hbar*omega_p^3/c^2.
    """

    omega_p: float  # rad/s

    def __post_init__(self):
        if not self.omega_p > 0.0:
            raise ValueError("omega_p must be positive")

    @property
    def length_m(self) -> float:
        """SI meters per one natural length unit (c/omega_p)."""
        return C_LIGHT / self.omega_p

    @property
    def frequency_rad_s(self) -> float:
        return self.omega_p

    @property
    def pressure_pa(self) -> float:
        """SI pascals per one natural force-per-area unit."""
        return HBAR * self.omega_p**4 / C_LIGHT**3

    @property
    def energy_per_area_j_m2(self) -> float:
        return HBAR * self.omega_p**3 / C_LIGHT**2

    @property
    def force_n(self) -> float:
        """SI newtons per one natural total-force unit (hbar*omega_p^2/c)."""
        return HBAR * self.omega_p**2 / C_LIGHT

    # -- length --
    def length_to_si(self, value_natural: float) -> float:
        return value_natural * self.length_m

    def length_from_si(self, value_m: float) -> float:
        return value_m / self.length_m

    # -- frequency --
    def frequency_to_si(self, value_natural: float) -> float:
        return value_natural * self.omega_p

    def frequency_from_si(self, value_rad_s: float) -> float:
        return value_rad_s / self.omega_p

    # -- force per area --
    def pressure_to_si(self, value_natural: float) -> float:
        return value_natural * self.pressure_pa

    def pressure_from_si(self, value_pa: float) -> float:
        return value_pa / self.pressure_pa


def ideal_casimir_pressure_natural(distance: float) -> float:
    """Ideal-mirror Casimir force per area, pi^2/(240 L^4), natural units.

    Attraction is reported positive throughout the package.
    """
    if not distance > 0.0:
        raise ValueError("distance must be positive")
    return math.pi**2 / (240.0 * distance**4)


def ideal_casimir_pressure_si(distance_m: float) -> float:
    """Ideal-mirror Casimir force per area in Pa for a separation in meters."""
    if not distance_m > 0.0:
        raise ValueError("distance must be positive")
    return math.pi**2 * HBAR * C_LIGHT / (240.0 * distance_m**4)
