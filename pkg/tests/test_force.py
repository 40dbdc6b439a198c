import math
import warnings
from dataclasses import replace

import numpy as np
import pytest

from casimir_screen.force import (
    ForceConvergenceError,
    ForceSpec,
    PfaValidityWarning,
    SpherePlate,
    delta_force_linear,
    delta_force_nonret,
    effective_displacement,
    force_per_area,
    force_per_area_real_axis,
    pfa_delta_linear,
    pfa_sphere_force,
    sweep,
)
from casimir_screen.materials import gold, material_from_rs
from casimir_screen.quadrature import IntegrationConfig
from casimir_screen.surface import (
    DPerpHydrodynamic,
    DPerpPerturbative,
    DPerpStaticConstant,
    Hydrodynamic,
    IdealMirror,
    LocalDrude,
)
from casimir_screen.units import ANGSTROM

from oracles import trapezoid_force_reference

AU = gold()


def ideal_pressure(L):
    return math.pi**2 / (240.0 * L**4)


# ---------------------------------------------------------------------------
# closed-form laws
# ---------------------------------------------------------------------------


@pytest.mark.parametrize("L", [0.01, 1.0, 100.0])
def test_ideal_mirror_law(L):
    res = force_per_area(IdealMirror(), None, L)
    assert res.f_per_area == pytest.approx(ideal_pressure(L), rel=1e-6)
    assert res.f_ideal_ratio == pytest.approx(1.0, rel=1e-6)
    assert res.delta_f == 0.0
    assert res.f_per_area_si is None


def test_pfa_ideal_law():
    L, R = 1.0, 50.0
    res = pfa_sphere_force(IdealMirror(), None, L, R)
    assert res.f_per_area == pytest.approx(math.pi**3 * R / (360.0 * L**3), rel=1e-5)
    assert res.f_ideal_ratio == pytest.approx(1.0, rel=1e-5)


def test_pfa_linear_in_radius():
    res1 = pfa_sphere_force(LocalDrude(AU), None, 2.0, 40.0)
    res2 = pfa_sphere_force(LocalDrude(AU), None, 2.0, 80.0)
    assert res2.f_per_area == pytest.approx(2.0 * res1.f_per_area, rel=1e-14)


def test_pfa_validity_warning():
    with pytest.warns(PfaValidityWarning):
        SpherePlate(length=1.0, radius=5.0)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        SpherePlate(length=1.0, radius=50.0)


# ---------------------------------------------------------------------------
# Drude force against the dense-grid reference
# ---------------------------------------------------------------------------


def test_drude_force_at_unit_separation():
    res = force_per_area(LocalDrude(AU), None, 1.0)
    assert 0.0 < res.f_ideal_ratio < 1.0
    # dense 4096^2 fixed-grid trapezoid reference
    reference = trapezoid_force_reference(AU, 1.0, n=4096)
    assert res.f_per_area == pytest.approx(reference, rel=1e-5)
    # regression pin of the adaptive value itself
    assert res.f_per_area == pytest.approx(6.3041629712e-03, rel=1e-7)
    assert res.f_ideal_ratio == pytest.approx(0.15329886, rel=1e-6)
    assert res.f_per_area_si == pytest.approx(res.f_per_area * AU.scale.pressure_pa, rel=1e-12)


def test_force_monotone_decreasing_in_L():
    for model in (LocalDrude(AU), Hydrodynamic(AU)):
        values = [force_per_area(model, None, L).f_per_area for L in (0.5, 1.0, 2.0, 4.0)]
        assert all(a > b for a, b in zip(values, values[1:]))


def test_ideal_limit_of_increasing_density():
    # at fixed physical separation, denser metals approach the ideal mirror
    L_si = 1.0e-7
    ratios = []
    for rs_bohr in (5.0, 3.0, 2.0, 1.0):
        m = material_from_rs(rs_bohr=rs_bohr, tau_rel=math.inf)
        L_nat = L_si / m.scale.length_m
        ratios.append(force_per_area(LocalDrude(m), None, L_nat).f_ideal_ratio)
    assert all(0.0 < r < 1.0 for r in ratios)
    assert all(a < b for a, b in zip(ratios, ratios[1:]))


# ---------------------------------------------------------------------------
# nonlocal correction engines
# ---------------------------------------------------------------------------


def test_hydro_correction_at_L3():
    res = force_per_area(Hydrodynamic(AU), None, 3.0)
    assert -res.delta_rel == pytest.approx(0.00541, abs=2e-4)
    assert res.delta_f < 0.0


def test_delta_zero_for_vanishing_d_perp():
    res = delta_force_linear(AU, DPerpStaticConstant(0.0), 1.0)
    assert res.delta_f == 0.0
    assert res.delta_rel == 0.0
    res_nr = delta_force_nonret(AU, DPerpStaticConstant(0.0), 1.0)
    assert res_nr.delta_f == 0.0


def test_delta_scales_linearly_in_d_perp():
    base = delta_force_linear(AU, DPerpStaticConstant(0.5), 1.0)
    doubled = delta_force_linear(AU, DPerpStaticConstant(1.0), 1.0)
    assert doubled.delta_f == pytest.approx(2.0 * base.delta_f, rel=1e-12)
    nr1 = delta_force_nonret(AU, DPerpStaticConstant(-0.4), 2.0)
    nr3 = delta_force_nonret(AU, DPerpStaticConstant(-1.2), 2.0)
    assert nr3.delta_f == pytest.approx(3.0 * nr1.delta_f, rel=1e-12)


def test_sign_dichotomy():
    lengths = 10.0 ** np.linspace(-2, 2, 9)
    jellium_like = DPerpStaticConstant(1.57 * 0.529177211)  # +1.57 a_B in Angstrom
    for L in lengths:
        hyd = delta_force_linear(AU, DPerpHydrodynamic(), float(L),
                                 IntegrationConfig(rel_tol=1e-6))
        jel = delta_force_linear(AU, jellium_like, float(L),
                                 IntegrationConfig(rel_tol=1e-6))
        assert hyd.delta_f < 0.0, f"hydrodynamic d_perp must reduce the force at L={L}"
        assert jel.delta_f > 0.0, f"positive d_perp(0) must increase the force at L={L}"
    exact = force_per_area(Hydrodynamic(AU), None, 1.0)
    assert exact.delta_f < 0.0


def test_linearization_finite_difference_oracle():
    # scale a 1-Angstrom static d_perp by eta and compare the linear engine
    # against the finite difference of the full force; the mismatch must be
    # first order in eta.  This is the arbiter for the perturbative kernel.
    L = 1.0
    cfg_force = IntegrationConfig(rel_tol=1e-12, max_subdivisions=4096)
    cfg_delta = IntegrationConfig(rel_tol=1e-10, max_subdivisions=4096)
    f_local = force_per_area(LocalDrude(AU), None, L, cfg_force).f_per_area
    mismatches = []
    for eta in (1e-3, 1e-4):
        dm = DPerpStaticConstant(eta * 1.0)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            f_pert = force_per_area(DPerpPerturbative(AU, dm), None, L, cfg_force).f_per_area
        fd = f_pert - f_local
        lin = delta_force_linear(AU, dm, L, cfg_delta).delta_f
        mismatches.append(abs(lin - fd) / abs(lin))
    assert mismatches[0] < 0.05
    ratio = mismatches[0] / mismatches[1]
    assert 3.0 < ratio < 30.0  # first-order convergence in eta


def test_nonretarded_regime():
    dyn = DPerpHydrodynamic()
    lin_small = delta_force_linear(AU, dyn, 0.1)
    nr_small = delta_force_nonret(AU, dyn, 0.1)
    assert nr_small.delta_f == pytest.approx(lin_small.delta_f, rel=1e-2)
    # beyond c/omega_p it systematically overestimates the magnitude
    lin_big = delta_force_linear(AU, dyn, 10.0)
    nr_big = delta_force_nonret(AU, dyn, 10.0)
    over = nr_big.delta_f / lin_big.delta_f - 1.0
    assert 0.05 < over < 0.25


def test_effective_displacement():
    assert effective_displacement(1.0, 0.0) == 0.0
    # delta_rel = -0.03 at L = 0.6 gives +0.006 by the formula
    assert effective_displacement(0.6, -0.03) == pytest.approx(0.006, rel=1e-12)
    with pytest.raises(ValueError):
        effective_displacement(0.0, 0.1)


def test_pfa_nonlocal_correction_tracks_flat_case():
    # sphere-plate relative correction: same sign, same order as flat-flat
    flat = delta_force_linear(AU, DPerpHydrodynamic(), 1.0)
    curved = pfa_delta_linear(AU, DPerpHydrodynamic(), 1.0, 100.0)
    assert curved.delta_rel < 0.0
    assert 0.3 < curved.delta_rel / flat.delta_rel < 1.0


def test_pfa_exact_model_deltas():
    res = pfa_sphere_force(Hydrodynamic(AU), None, 1.0, 100.0)
    assert res.delta_rel < 0.0
    flat = force_per_area(Hydrodynamic(AU), None, 1.0)
    assert 0.3 < res.delta_rel / flat.delta_rel < 1.0


def test_mixed_plates():
    L = 1.0
    f_dd = force_per_area(LocalDrude(AU), None, L).f_per_area
    f_ii = force_per_area(IdealMirror(), None, L).f_per_area
    f_di = force_per_area(LocalDrude(AU), IdealMirror(), L).f_per_area
    f_id = force_per_area(IdealMirror(), LocalDrude(AU), L).f_per_area
    assert f_dd < f_di < f_ii
    assert f_di == pytest.approx(f_id, rel=1e-9)


def test_mixed_materials_rescale():
    # two different metals: the evaluation is anchored to the first plate's
    # plasma frequency; swapping the plates must not change the physics
    m2 = material_from_rs(2.5, tau_rel=200.0)
    L_si = 5.0e-8
    L1 = L_si / AU.scale.length_m
    L2 = L_si / m2.scale.length_m
    f12 = force_per_area(LocalDrude(AU), LocalDrude(m2), L1)
    f21 = force_per_area(LocalDrude(m2), LocalDrude(AU), L2)
    assert f12.f_per_area_si == pytest.approx(f21.f_per_area_si, rel=1e-7)


def test_convergence_error_carries_partial_result():
    cfg = IntegrationConfig(rel_tol=1e-14, max_subdivisions=8)
    with pytest.raises(ForceConvergenceError) as info:
        force_per_area(LocalDrude(AU), None, 1.0, cfg)
    partial = info.value.partial
    assert partial.f_per_area == pytest.approx(6.304e-3, rel=1e-2)


def test_invalid_arguments():
    with pytest.raises(ValueError):
        force_per_area(IdealMirror(), None, -1.0)
    with pytest.raises(ValueError):
        delta_force_linear(AU, DPerpHydrodynamic(), 0.0)
    with pytest.raises(ValueError):
        pfa_sphere_force(IdealMirror(), None, 1.0, -2.0)


# ---------------------------------------------------------------------------
# sweeps
# ---------------------------------------------------------------------------


def test_sweep_empty():
    assert sweep([], ForceSpec(s1=IdealMirror())) == []


def test_sweep_validation():
    with pytest.raises(ValueError):
        sweep([2.0, 1.0], ForceSpec(s1=IdealMirror()))
    with pytest.raises(ValueError):
        sweep([-1.0], ForceSpec(s1=IdealMirror()))
    with pytest.raises(ValueError):
        ForceSpec(s1=IdealMirror(), method="linear")
    with pytest.raises(ValueError):
        ForceSpec(s1=IdealMirror(), method="spline")


def test_sweep_parallel_matches_serial_bitwise():
    spec = ForceSpec(s1=Hydrodynamic(AU))
    cfg = IntegrationConfig(rel_tol=1e-6)
    lengths = [0.5, 1.0, 2.0]
    serial = sweep(lengths, spec, cfg, max_workers=1)
    parallel = sweep(lengths, spec, cfg, max_workers=2)
    for a, b in zip(serial, parallel):
        assert a.result.f_per_area == b.result.f_per_area
        assert a.result.delta_f == b.result.delta_f


def test_sweep_collects_per_point_errors():
    spec = ForceSpec(s1=LocalDrude(AU))
    cfg = IntegrationConfig(rel_tol=1e-14, max_subdivisions=8)
    points = sweep([1.0, 2.0], spec, cfg, max_workers=1)
    assert len(points) == 2
    assert all(not p.converged for p in points)
    assert all(p.error is not None for p in points)
    # partial estimates are still reported
    assert points[0].result is not None


def test_sweep_linear_engine():
    spec = ForceSpec(
        s1=DPerpPerturbative(AU, DPerpHydrodynamic()),
        method="linear",
    )
    pts = sweep([0.5, 1.0], spec, IntegrationConfig(rel_tol=1e-6), max_workers=1)
    assert all(p.converged for p in pts)
    assert all(p.result.delta_f < 0.0 for p in pts)


# ---------------------------------------------------------------------------
# real-frequency-axis cross-check
# ---------------------------------------------------------------------------


@pytest.mark.slow
def test_real_axis_cross_check_at_moderate_separation():
    L = 1.0
    rotated = force_per_area(LocalDrude(AU), None, L).f_per_area
    real_axis = force_per_area_real_axis(AU, L, rel_tol=1e-3)
    assert real_axis == pytest.approx(rotated, rel=0.05)


def test_real_axis_requires_dissipation():
    lossless = material_from_rs(1.59, tau_rel=math.inf)
    with pytest.raises(ValueError):
        force_per_area_real_axis(lossless, 1.0)
