"""Classical radiation diagnostics: far-field patterns and Purcell factors."""
from __future__ import annotations

import math

import numpy as np
from scipy import special

from ..units import UNITS
from .geometry import DipoleSpec, SphereScene
from .greens import (far_field_free_amplitude, far_field_scatter_amplitude,
                     greens_free, greens_scatter_sphere, mie_reflection_coeffs)
from .materials import DomainError, permittivity


def _scaled_hankel(rho: float, lmax: int):
    from ..accel import hankel_scaled
    return hankel_scaled(rho, lmax)


def _scattered_wave_sums(scene: SphereScene, dist: float, omega: float,
                         l_max: int, units=UNITS):
    """Partial-wave ingredients at the dipole radius.

    Returns per-l arrays (1..l_max as index l): B_TE, B_TM (unscaled
    complex; graceful underflow), j_l, h_l, and the Riccati derivative
    ratios zeta^j, zeta^h at rho = k*dist.
    """
    k = units.wavenumber(omega)
    eps = permittivity(scene.material, omega)
    m = np.sqrt(complex(eps))
    bte_m, bte_e, btm_m, btm_e = mie_reflection_coeffs(k * scene.radius_nm, m, l_max)
    rho = k * dist
    lv = np.arange(l_max + 1)
    jl = special.spherical_jn(lv, rho)
    hm, he = _scaled_hankel(rho, l_max)
    # combine scaled B and scaled h so products stay finite
    BThE = np.zeros(l_max + 1, dtype=complex)   # B_TE * h_l
    BThM = np.zeros(l_max + 1, dtype=complex)   # B_TM * h_l
    BTzE = np.zeros(l_max + 1, dtype=complex)   # B_TE * zeta_l^h
    BTzM = np.zeros(l_max + 1, dtype=complex)   # B_TM * zeta_l^h
    BhhM = np.zeros(l_max + 1, dtype=complex)   # B_TM * h_l^2 etc. via parts
    BhhE = np.zeros(l_max + 1, dtype=complex)
    BzzM = np.zeros(l_max + 1, dtype=complex)
    for l in range(1, l_max + 1):
        zeta = hm[l - 1] * math.ldexp(1.0, int(he[l - 1] - he[l])) - l * hm[l] / rho
        fe = math.ldexp(1.0, int(bte_e[l] + he[l]))
        fm = math.ldexp(1.0, int(btm_e[l] + he[l]))
        BThE[l] = bte_m[l] * hm[l] * fe
        BThM[l] = btm_m[l] * hm[l] * fm
        BTzE[l] = bte_m[l] * zeta * fe
        BTzM[l] = btm_m[l] * zeta * fm
        f2e = math.ldexp(1.0, int(bte_e[l] + 2 * he[l]))
        f2m = math.ldexp(1.0, int(btm_e[l] + 2 * he[l]))
        BhhE[l] = bte_m[l] * hm[l] * hm[l] * f2e
        BhhM[l] = btm_m[l] * hm[l] * hm[l] * f2m
        BzzM[l] = btm_m[l] * zeta * zeta * f2m
    zjl = np.zeros(l_max + 1)
    zjl[1:] = special.spherical_jn(lv[1:] - 1, rho) - lv[1:] * jl[1:] / rho
    return dict(jl=jl, zjl=zjl, BThE=BThE, BThM=BThM, BTzE=BTzE, BTzM=BTzM,
                BhhE=BhhE, BhhM=BhhM, BzzM=BzzM, rho=rho)


def purcell_partial_waves(scene: SphereScene, dist: float, omega: float,
                          l_max: int = 50, units=UNITS):
    """(P_total, P_rad) for radial and tangential unit dipoles at `dist`."""
    s = _scattered_wave_sums(scene, dist, omega, l_max, units)
    lv = np.arange(l_max + 1, dtype=float)
    rho = s["rho"]
    w_r = lv * (lv + 1) * (2 * lv + 1)
    w_t = 2 * lv + 1
    # total rates from Im of the scattered field at the dipole
    Ptot_r = 1.0 + 1.5 * np.sum(w_r[1:] * np.real(
        s["BhhM"][1:]) / rho**2)
    Ptot_t = 1.0 + 0.75 * np.sum(w_t[1:] * np.real(
        s["BhhE"][1:] + s["BzzM"][1:]))
    # radiative rates from the interference of regular and scattered waves
    Prad_r = 1.5 * np.sum(w_r[1:] * np.abs(
        s["jl"][1:] + s["BThM"][1:])**2) / rho**2
    Prad_t = 0.75 * np.sum(w_t[1:] * (
        np.abs(s["jl"][1:] + s["BThE"][1:])**2
        + np.abs(s["zjl"][1:] + s["BTzM"][1:])**2))
    return (Ptot_r, Prad_r), (Ptot_t, Prad_t)


def radiative_channel(scene: SphereScene, dist: float, omega, l: int,
                      l_max: int = 50, units=UNITS):
    """Radial-dipole radiated power in the single multipole channel l.

    Used by the calibration search to locate multipolar resonances.
    """
    omega = np.atleast_1d(np.asarray(omega, dtype=float))
    out = np.empty(len(omega))
    for i, w in enumerate(omega):
        s = _scattered_wave_sums(scene, dist, w, max(l_max, l + 2), units)
        out[i] = 1.5 * l * (l + 1) * (2 * l + 1) * abs(
            s["jl"][l] + s["BThM"][l])**2 / s["rho"]**2
    return out if out.size > 1 else float(out[0])


def _split_orientation(dipole: DipoleSpec):
    pos = dipole.position
    dist = float(np.linalg.norm(pos))
    rhat = pos / dist
    n_r = float(np.dot(dipole.orientation, rhat))
    n_t = float(np.linalg.norm(dipole.orientation - n_r * rhat))
    return dist, n_r, n_t


def purcell_factors(scene: SphereScene | None, dipole: DipoleSpec,
                    omega: float, l_max: int = 50, units=UNITS):
    """(P_total, P_rad, P_nonrad) relative to the free-space dipole."""
    if scene is None:
        return 1.0, 1.0, 0.0
    dist, n_r, n_t = _split_orientation(dipole)
    if dist <= scene.radius_nm:
        raise DomainError("dipole must lie outside the sphere")
    (Ptr, Prr), (Ptt, Prt) = purcell_partial_waves(scene, dist, omega,
                                                   l_max, units)
    P_total = n_r**2 * Ptr + n_t**2 * Ptt
    P_rad = n_r**2 * Prr + n_t**2 * Prt
    return float(P_total), float(P_rad), float(P_total - P_rad)


def far_field_pattern(scene: SphereScene | None, dipole: DipoleSpec,
                      omega: float, directions, l_max: int = 50,
                      units=UNITS) -> np.ndarray:
    """Normalized radiated power per solid angle along each direction."""
    dirs = np.atleast_2d(np.asarray(directions, dtype=float))
    dirs = dirs / np.linalg.norm(dirs, axis=1)[:, None]
    A = far_field_free_amplitude(dipole.position, dirs, omega, units=units)
    if scene is not None:
        if np.linalg.norm(dipole.position) <= scene.radius_nm:
            raise DomainError("dipole must lie outside the sphere")
        A = A + far_field_scatter_amplitude(scene, dipole.position, dirs,
                                            omega, l_max=l_max, units=units)
    amp = np.einsum("nij,j->ni", A, dipole.orientation)
    power = np.sum(np.abs(amp)**2, axis=1)
    peak = power.max()
    return power / peak if peak > 0 else power


def radiated_power_quadrature(scene: SphereScene | None, dipole: DipoleSpec,
                              omega: float, l_max: int = 50,
                              n_theta: int = 80, n_phi: int = 81,
                              units=UNITS) -> float:
    """P_rad by angular quadrature of the far field (independent route)."""
    x, wq = np.polynomial.legendre.leggauss(n_theta)
    phis = np.linspace(0, 2 * np.pi, n_phi, endpoint=False)
    ct = x
    st = np.sqrt(1 - ct**2)
    dirs = np.array([[s * np.cos(p), s * np.sin(p), c]
                     for c, s in zip(ct, st) for p in phis])
    A = far_field_free_amplitude(dipole.position, dirs, omega, units=units)
    if scene is not None:
        A = A + far_field_scatter_amplitude(scene, dipole.position, dirs,
                                            omega, l_max=l_max, units=units)
    amp = np.einsum("nij,j->ni", A, dipole.orientation)
    p = np.sum(np.abs(amp)**2, axis=1).reshape(n_theta, n_phi)
    integral = np.sum(wq[:, None] * p) * (2 * np.pi / n_phi)
    # free-space dipole: |A.n|^2 integrates to (8 pi / 3) / (4 pi)^2
    free = (8 * np.pi / 3) / (4 * np.pi) ** 2
    return float(integral / free)
