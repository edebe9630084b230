"""Sphere calibration: place multipolar resonances at target energies.

The sphere size and Drude parameters are not fixed by the physics inputs,
so scenes are calibrated by scanning radius and plasma frequency until
the radiative-channel peaks (or the near-field spectral-density peak)
land on the requested energies.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from ..units import UNITS
from .geometry import DipoleSpec, SphereScene
from .materials import DomainError, DrudeMaterial
from .radiation import radiative_channel
from .response import FrequencyGrid, response_matrix


class CalibrationError(RuntimeError):
    pass


@dataclass
class CalibrationResult:
    scene: SphereScene
    achieved: list          # (l, omega_peak)
    targets: list           # (l, omega_target)
    residual: float
    diagnostics: dict = field(default_factory=dict)


def _channel_peak(scene, dist, l, window, n=120, l_max=60):
    ws = np.linspace(window[0], window[1], n)
    vals = radiative_channel(scene, dist, ws, l, l_max=l_max)
    i = int(np.argmax(vals))
    if i == 0 or i == n - 1:
        return None
    # parabolic refinement around the grid maximum
    w0, w1, w2 = ws[i - 1], ws[i], ws[i + 1]
    v0, v1, v2 = vals[i - 1], vals[i], vals[i + 1]
    denom = (v0 - 2 * v1 + v2)
    if denom >= 0:
        return float(w1)
    return float(w1 - 0.5 * (ws[1] - ws[0]) * (v2 - v0) / denom)


def nearfield_peak(scene, dipole: DipoleSpec, window, n=160, l_max=60):
    """Location of the emitter spectral-density peak J_ee(w)."""
    grid = FrequencyGrid.uniform(window[0], window[1], n)
    table = response_matrix([dipole], scene, grid, l_max=l_max)
    J = table.J[:, 0, 0]
    i = int(np.argmax(J))
    if i == 0 or i == n - 1:
        return None
    ws = grid.points
    denom = (J[i - 1] - 2 * J[i] + J[i + 1])
    if denom >= 0:
        return float(ws[i])
    return float(ws[i] - 0.5 * (ws[1] - ws[0]) * (J[i + 1] - J[i - 1]) / denom)


def calibrate_sphere(targets, radius_bounds, omega_p_bounds,
                     gap_nm: float = 5.0, eps_inf: float = 1.0,
                     gamma: float = 0.1, window=None,
                     mode: str = "radiative", n_grid: int = 9,
                     l_max: int = 60) -> CalibrationResult:
    """Scan (radius, omega_p) so resonance peaks hit the targets.

    targets: list of (multipole order l, omega_eV). mode="radiative" uses
    the radiative-channel peak for a radial dipole `gap_nm` above the
    surface; mode="nearfield" (single target only) uses the J_ee peak.
    """
    if not targets:
        raise CalibrationError("at least one target required")
    if radius_bounds[0] > radius_bounds[1] or omega_p_bounds[0] > omega_p_bounds[1]:
        raise CalibrationError("empty bounds interval")
    t_omegas = [t[1] for t in targets]
    if window is None:
        lo = min(t_omegas) - 1.2
        hi = max(t_omegas) + 1.2
        window = (max(0.3, lo), hi)

    def peaks_for(radius, wp):
        scene = SphereScene(radius_nm=radius,
                            material=DrudeMaterial(eps_inf=eps_inf,
                                                   omega_p=wp, gamma=gamma))
        dist = radius + gap_nm
        out = []
        for (l, _) in targets:
            if mode == "nearfield":
                dip = DipoleSpec(position=np.array([0.0, 0.0, dist]),
                                 orientation=np.array([0.0, 0.0, 1.0]),
                                 dipole_debye=1.0, role="emitter")
                pk = nearfield_peak(scene, dip, window, l_max=l_max)
            else:
                pk = _channel_peak(scene, dist, l, window, l_max=l_max)
            out.append(pk)
        return scene, out

    def loss(params):
        radius = float(np.clip(params[0], *radius_bounds))
        wp = float(np.clip(params[1], *omega_p_bounds))
        _, pks = peaks_for(radius, wp)
        tot = 0.0
        for pk, (_, w_t) in zip(pks, targets):
            tot += (pk - w_t) ** 2 if pk is not None else 4.0
        return tot

    fixed_radius = radius_bounds[0] == radius_bounds[1]
    radii = ([radius_bounds[0]] if fixed_radius
             else np.linspace(*radius_bounds, n_grid))
    wps = np.linspace(*omega_p_bounds, n_grid) if omega_p_bounds[0] != omega_p_bounds[1] \
        else [omega_p_bounds[0]]
    best = None
    for r in radii:
        for wp in wps:
            v = loss([r, wp])
            if best is None or v < best[0]:
                best = (v, r, wp)
    res = optimize.minimize(loss, [best[1], best[2]], method="Nelder-Mead",
                            options=dict(xatol=1e-3, fatol=1e-8,
                                         maxfev=150))
    radius = float(np.clip(res.x[0], *radius_bounds))
    wp = float(np.clip(res.x[1], *omega_p_bounds))
    scene, pks = peaks_for(radius, wp)
    if any(pk is None for pk in pks):
        raise CalibrationError(
            f"no interior resonance peak in window {window} for "
            f"radius={radius:.3g} omega_p={wp:.3g}")
    achieved = [(l, pk) for (l, _), pk in zip(targets, pks)]
    residual = float(np.sqrt(np.mean([(pk - w_t) ** 2 for pk, (_, w_t)
                                      in zip(pks, targets)])))
    return CalibrationResult(scene=scene, achieved=achieved,
                             targets=list(targets), residual=residual,
                             diagnostics=dict(window=window, mode=mode,
                                              nfev=int(res.nfev)))
