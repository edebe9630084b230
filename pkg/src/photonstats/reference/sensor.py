"""Single-mode sensor method: Jaynes-Cummings cavity plus detector TLS.

The cavity parameters come from a Lorentzian approximation of the
emitter spectral density; the detector coupling is arbitrarily small, so
only normalized quantities are meaningful (enforced by the result type).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import least_squares

from ..em.materials import DomainError
from ..em.response import ResponseTable
from ..fit.params import FewModeParams
from ..quantum.basis import build_basis
from ..quantum.dynamics import evolve_single_excitation
from ..quantum.liouvillian import basis_for, build_liouvillian
from ..quantum.steady import weak_drive_steady
from ..quantum.system import DetectorQ, EmitterQ, SystemSpec, rotating_frame


class SensorFitError(RuntimeError):
    pass


@dataclass
class SensorParams:
    omega_c: float
    kappa_c: float
    lambda_e: float
    lambda_d: float
    fit_rms: float = 0.0

    def validate(self):
        if self.kappa_c <= 0:
            raise DomainError("kappa_c must be positive")
        if not self.lambda_d < 1e-3 * abs(self.lambda_e):
            raise DomainError("sensor coupling must be << emitter coupling")


@dataclass(eq=False)
class SensorResult:
    """Normalized sensor outputs; absolute intensities are undefined."""
    normalized: bool = True
    times: np.ndarray | None = None
    g1_normalized: np.ndarray | None = None   # detector population / max
    g2: dict = field(default_factory=dict)
    populations: dict = field(default_factory=dict)

    @property
    def g1_absolute(self):
        raise TypeError("sensor results are normalized only; the detector "
                        "coupling is arbitrary")


def lorentzian(w, omega_c, kappa_c, lam):
    return (lam**2 / (2 * np.pi)) * kappa_c / ((w - omega_c) ** 2
                                               + kappa_c**2 / 4)


def sensor_from_table(table: ResponseTable, window=None,
                      lambda_d_ratio: float = 1e-6) -> SensorParams:
    """Least-squares Lorentzian approximation of J_ee over the window."""
    if len(table.emitter_idx) != 1:
        raise DomainError("sensor method needs a single-emitter table")
    pts = table.grid.points
    J = table.J[:, table.emitter_idx[0], table.emitter_idx[0]]
    if window is not None:
        m = (pts >= window[0]) & (pts <= window[1])
        pts, J = pts[m], J[m]
    i_pk = int(np.argmax(J))
    if i_pk == 0 or i_pk == len(pts) - 1:
        raise SensorFitError("spectral density not peaked inside the window")
    half = J[i_pk] / 2
    above = J >= half
    width = max(pts[1] - pts[0],
                pts[above][-1] - pts[above][0]) if above.sum() > 1 else 0.1
    lam0 = np.sqrt(max(J[i_pk], 1e-300) * np.pi * width / 2)
    x0 = np.array([pts[i_pk], width, lam0])
    scale = J.max()

    def resid(x):
        return (lorentzian(pts, *x) - J) / scale

    res = least_squares(resid, x0, bounds=([pts[0], 1e-6, 0],
                                           [pts[-1], 10 * (pts[-1] - pts[0]),
                                            np.inf]), method="trf")
    rms = np.sqrt(np.mean(res.fun**2) / np.mean((J / scale) ** 2))
    omega_c, kappa_c, lam = res.x
    if not res.success and rms > 1.0:
        raise SensorFitError("Lorentzian fit failed")
    return SensorParams(omega_c=float(omega_c), kappa_c=float(kappa_c),
                        lambda_e=float(lam),
                        lambda_d=float(lambda_d_ratio * lam),
                        fit_rms=float(rms))


def _sensor_spec(params: SensorParams, omega_e: float, drive_ev: float,
                 detectors, laser_omega=None) -> SystemSpec:
    nd = len(detectors)
    modes = FewModeParams(
        omega_matrix=np.array([[params.omega_c]]),
        kappa=np.array([params.kappa_c]),
        lambda_e=np.array([[params.lambda_e]]),
        lambda_d=np.full((nd, 1), params.lambda_d),
        mu_e_debye=np.array([1.0]), mu_d_debye=np.ones(nd))
    ems = [EmitterQ(omega_ev=omega_e, drive_ev=drive_ev)]
    dets = [DetectorQ(omega_ev=w, gamma_ev=g, mu_debye=1.0)
            for (w, g) in detectors]
    return SystemSpec(emitters=ems, detectors=dets, modes=modes,
                      laser_omega=laser_omega)


def sensor_spontaneous(params: SensorParams, omega_e: float, detectors,
                       times) -> SensorResult:
    """Spontaneous-emission detector signal, normalized to its maximum."""
    params.validate()
    spec = _sensor_spec(params, omega_e, 0.0, detectors)
    n = 1 + len(detectors) + 1
    psi0 = np.zeros(n, dtype=complex)
    psi0[0] = 1.0
    traj = evolve_single_excitation(spec, psi0, times)
    pd = np.abs(traj.site("d0")) ** 2
    peak = pd.max()
    return SensorResult(times=np.asarray(times, float),
                        g1_normalized=pd / peak if peak > 0 else pd,
                        populations={"emitter": np.abs(traj.site("e0")) ** 2})


def sensor_driven_g2(params: SensorParams, omega_e: float, drive_ev: float,
                     laser_omega: float, detectors, n_max: int = 2):
    """Steady-state g2(0) between the first two sensor detectors."""
    params.validate()
    spec = _sensor_spec(params, omega_e, drive_ev, detectors,
                        laser_omega=laser_omega)
    spec = rotating_frame(spec)
    basis = basis_for(spec, n_max)
    sol = weak_drive_steady(spec, basis)
    from ..quantum.correlations import detector_g2, detector_population
    _, g2, _ = detector_g2(sol, spec, basis, 0, 1)
    res = SensorResult()
    res.g2[(0, 1)] = g2
    res.populations = {l: detector_population(sol, spec, basis, l)
                       for l in range(len(detectors))}
    return res
