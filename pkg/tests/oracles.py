"""Independent reference computations used by the test suite.

These deliberately avoid the package's own rotated real-valued formulas and
its adaptive quadrature: reflection amplitudes are evaluated literally in
the complex frequency plane, and the reference force comes from a dense
fixed-grid trapezoid sum.  Agreement between these oracles and the package
is what validates the rotation and the adaptive engine.
"""

from __future__ import annotations

import numpy as np


def complex_reflection_oracle(beta_over_c: float, tau_rel: float, zeta, q_par):
    """Literal complex-plane evaluation of the reflection amplitudes at
    omega = i*zeta (natural units, omega_p = c = 1).

    Every square root picks the branch with Im >= 0 (decay into the metal).
    Returns a dict of complex values: eps, kappa_l, r_s, r_p_local,
    r_p_hydro and r_p_dperp (the latter using the hydrodynamic
    d_perp = -i/k_l).
    """
    z = np.asarray(zeta, dtype=float)
    q = np.asarray(q_par, dtype=float)
    w = 1j * z
    inv_tau = 0.0 if np.isinf(tau_rel) else 1.0 / tau_rel

    def up(vals):
        r = np.sqrt(np.asarray(vals, dtype=complex))
        return np.where(r.imag < 0.0, -r, r)

    eps = 1.0 - 1.0 / (w * (w + 1j * inv_tau))
    k = up(w * w - q * q)
    km = up(eps * w * w - q * q)
    kl = up((w * w + 1j * w * inv_tau - 1.0) / beta_over_c**2 - q * q)

    r_s = (k - km) / (k + km)
    r_p0 = (eps * k - km) / (eps * k + km)
    t = q * q * (eps - 1.0) / kl
    r_p_h = (eps * k - km + t) / (eps * k + km - t)
    d_perp = -1j / kl
    # real-axis denominator eps*k^2/Q^2 - 1; rotating gives eps*kappa^2 + Q^2
    r_p_d = r_p0 * (1.0 + 2j * k * eps * d_perp / (eps * k * k / (q * q) - 1.0))
    return {
        "eps": eps,
        "kappa_l": kl / 1j,
        "r_s": r_s,
        "r_p_local": r_p0,
        "r_p_hydro": r_p_h,
        "r_p_dperp": r_p_d,
    }


def trapezoid_force_reference(material, length: float, n: int = 4096, scale: float = 2.0):
    """Dense fixed-grid trapezoid reference for the local Drude force.

    Both semi-infinite axes are mapped through x = scale*t/(1-t) and sampled
    at n midpoints; rows are accumulated one at a time to keep memory flat.
    Natural units; same attraction-positive convention as the package.
    """
    inv_tau = material.inv_tau_rel
    t = (np.arange(n) + 0.5) / n
    x = scale * t / (1.0 - t)
    jac = scale / (1.0 - t) ** 2

    total = 0.0
    qs = x
    jq = jac
    for zi, jzi in zip(x, jac):
        eps = 1.0 + 1.0 / (zi * (zi + inv_tau))
        kap = np.hypot(zi, qs)
        km = np.sqrt(eps * zi * zi + qs * qs)
        rs2 = ((kap - km) / (kap + km)) ** 2
        rp2 = ((eps * kap - km) / (eps * kap + km)) ** 2
        ex = np.exp(-2.0 * kap * length)
        kern = qs * kap * (rs2 * ex / (1.0 - rs2 * ex) + rp2 * ex / (1.0 - rp2 * ex))
        total += jzi * float(np.dot(kern, jq))
    return total / n**2 / (2.0 * np.pi**2)
