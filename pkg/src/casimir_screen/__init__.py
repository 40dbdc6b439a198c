"""Casimir force between metal plates with nonlocal surface-screening corrections.

The package evaluates the reflection-amplitude (Lifshitz-type) force formula
on the imaginary frequency axis for ideal mirrors, local Drude metals, the
exactly solvable hydrodynamic electron gas and perturbative surface-response
(d_perp) theory, and propagates the results through sweeps, effective
displacement diagnostics and the sphere-plate proximity force approximation.
"""

from .force import (
    ForceConvergenceError,
    ForceResult,
    ForceSpec,
    Geometry,
    ParallelPlates,
    PfaValidityWarning,
    SpherePlate,
    SweepPoint,
    delta_force_linear,
    delta_force_nonret,
    effective_displacement,
    force_per_area,
    force_per_area_real_axis,
    pfa_delta_linear,
    pfa_sphere_force,
    sweep,
)
from .materials import (
    Material,
    eps_drude_imag,
    gold,
    load_material_config,
    material_from_rs,
)
from .quadrature import (
    Algebraic,
    ConvergenceError,
    ExpDecay,
    IntegrationConfig,
    QuadResult,
    integrate_2d_semi_inf,
    integrate_semi_inf,
)
from .surface import (
    DPerpHydrodynamic,
    DPerpPerturbative,
    DPerpStaticConstant,
    DPerpTabulated,
    Hydrodynamic,
    IdealMirror,
    ImagFreqPoint,
    LocalDrude,
    LocalLimitError,
    PerturbativeRegimeWarning,
    ReflectionPair,
    SurfaceModel,
    d_perp_eval,
    kappa_l,
    load_d_perp_table,
    r_p_dperp,
    r_p_hydro,
    r_p_local,
    r_s_local,
    reflection_pair,
)
from .units import NaturalScale, ideal_casimir_pressure_natural, ideal_casimir_pressure_si

__version__ = "0.1.0"
