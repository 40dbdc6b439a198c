import math

import numpy as np
import pytest

from casimir_screen.units import (
    C_LIGHT,
    HBAR,
    NaturalScale,
    ideal_casimir_pressure_natural,
    ideal_casimir_pressure_si,
)


@pytest.mark.parametrize("omega_p", [1.0e15, 1.374838e16, 3.3e16])
def test_round_trip_si_natural_si(omega_p):
    scale = NaturalScale(omega_p)
    rng = np.random.default_rng(7)
    for value in rng.uniform(1e-12, 1e3, 20):
        assert scale.length_to_si(scale.length_from_si(value)) == pytest.approx(value, rel=1e-12)
        assert scale.pressure_from_si(scale.pressure_to_si(value)) == pytest.approx(value, rel=1e-12)
        assert scale.frequency_to_si(scale.frequency_from_si(value)) == pytest.approx(value, rel=1e-12)


def test_scale_factors_are_consistent():
    scale = NaturalScale(2.0e16)
    assert scale.length_m == pytest.approx(C_LIGHT / 2.0e16, rel=1e-15)
    assert scale.pressure_pa == pytest.approx(HBAR * (2.0e16) ** 4 / C_LIGHT**3, rel=1e-15)
    # pressure unit = energy-per-area unit / length unit
    assert scale.pressure_pa == pytest.approx(
        scale.energy_per_area_j_m2 / scale.length_m, rel=1e-12
    )


def test_ideal_pressure_scaling_invariance():
    # the ideal force has no material scale: converting the natural-unit
    # value with any omega_p must give the same SI pressure
    L_si = 1.0e-7
    expected = ideal_casimir_pressure_si(L_si)
    for omega_p in (1e15, 1e16, 7.7e16):
        scale = NaturalScale(omega_p)
        L_nat = scale.length_from_si(L_si)
        natural = ideal_casimir_pressure_natural(L_nat)
        assert scale.pressure_to_si(natural) == pytest.approx(expected, rel=1e-12)


def test_ideal_pressure_value():
    # pi^2 hbar c / 240 / L^4 at 1 micron
    assert ideal_casimir_pressure_si(1.0e-6) == pytest.approx(1.30013e-3, rel=1e-4)


def test_invalid_arguments():
    with pytest.raises(ValueError):
        NaturalScale(0.0)
    with pytest.raises(ValueError):
        ideal_casimir_pressure_natural(-1.0)
    with pytest.raises(ValueError):
        ideal_casimir_pressure_si(0.0)
