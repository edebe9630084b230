"""Detector-observable correlation extraction: G1, G2, g2, and the
filter-convolution consistency oracle."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import sparse

from ..em.materials import DomainError
from .liouvillian import _dag
from .basis import RestrictedBasis
from .dynamics import AmplitudeTrajectory, DensityState
from .steady import WeakDriveSolution
from .system import SystemSpec


@dataclass(eq=False)
class CorrelationRecord:
    """G1 per detector, G2/g2 per detector pair, with units metadata.

    G1 carries (Gamma_d/(2 mu_d))^2 <d^dag d> in eV^2/(e nm)^2; g2 is
    dimensionless. `time` is None for steady state.
    """
    g1: dict = field(default_factory=dict)           # det index -> value
    g2: dict = field(default_factory=dict)           # (i, j) -> value
    G2: dict = field(default_factory=dict)
    prefactors: dict = field(default_factory=dict)
    populations: dict = field(default_factory=dict)  # raw <d^dag d>
    reliable: dict = field(default_factory=dict)     # (i, j) -> bool
    time: float | None = None

    def validate(self):
        for v in self.g1.values():
            if v < -1e-30:
                raise DomainError("G1 must be non-negative")
        for v in self.G2.values():
            if v < -1e-30:
                raise DomainError("G2 must be non-negative")


def _number_op(spec: SystemSpec, basis: RestrictedBasis, det_index: int):
    ne = len(spec.emitters)
    d = basis.annihilation(ne + det_index)
    return (_dag(d) @ d).tocsr(), d


def detector_g1(state, spec: SystemSpec, basis: RestrictedBasis,
                det_index: int) -> float:
    """Filtered field intensity at one detector."""
    nop, _ = _number_op(spec, basis, det_index)
    if isinstance(state, DensityState):
        pop = float(np.real(np.trace(nop.toarray() @ state.rho)))
    elif isinstance(state, WeakDriveSolution):
        pop = state.expectation_number(nop)
    else:
        raise DomainError("unsupported state type")
    return spec.prefactor(det_index) * pop


def detector_population(state, spec, basis, det_index) -> float:
    nop, _ = _number_op(spec, basis, det_index)
    if isinstance(state, DensityState):
        return float(np.real(np.trace(nop.toarray() @ state.rho)))
    return state.expectation_number(nop)


def detector_g2(state, spec: SystemSpec, basis: RestrictedBasis,
                i: int, j: int, g1_floor: float | None = None):
    """(G2, g2, reliable) for the detector pair (i, j).

    Equal-time, normally ordered. i == j is refused: same-position
    correlations use two co-located detector sites.
    """
    if basis.n_max < 2:
        raise DomainError("g2 requires n_max >= 2 (two excitations)")
    if i == j:
        raise DomainError("use two co-located detector sites for same-point g2")
    ne = len(spec.emitters)
    di = basis.annihilation(ne + i)
    dj = basis.annihilation(ne + j)
    pref = spec.prefactor(i) * spec.prefactor(j)
    if isinstance(state, DensityState):
        op = (_dag(di) @ _dag(dj) @ dj @ di).toarray()
        val = float(np.real(np.trace(op @ state.rho)))
    elif isinstance(state, WeakDriveSolution):
        amp = state.pair_amplitude(di, dj)
        val = float(abs(amp) ** 2)
    else:
        raise DomainError("unsupported state type")
    G2 = pref * val
    g1_i = detector_g1(state, spec, basis, i)
    g1_j = detector_g1(state, spec, basis, j)
    reliable = True
    if g1_floor is not None and (g1_i < g1_floor or g1_j < g1_floor):
        reliable = False
    if g1_i <= 0 or g1_j <= 0:
        return G2, np.nan, False
    return G2, G2 / (g1_i * g1_j), reliable


def correlation_record(state, spec: SystemSpec, basis: RestrictedBasis,
                       pairs=None, g1_floor=None,
                       time=None) -> CorrelationRecord:
    nd = len(spec.detectors)
    rec = CorrelationRecord(time=time)
    for l in range(nd):
        rec.populations[l] = detector_population(state, spec, basis, l)
        rec.prefactors[l] = spec.prefactor(l)
        rec.g1[l] = rec.prefactors[l] * rec.populations[l]
    if pairs is None:
        pairs = [(i, j) for i in range(nd) for j in range(i + 1, nd)]
    if basis.n_max >= 2:
        for (i, j) in pairs:
            G2, g2, ok = detector_g2(state, spec, basis, i, j,
                                     g1_floor=g1_floor)
            rec.G2[(i, j)] = G2
            rec.g2[(i, j)] = g2
            rec.reliable[(i, j)] = ok
    return rec


def convolution_check(spec: SystemSpec, traj: AmplitudeTrajectory,
                      det_index: int = 0) -> float:
    """Relative L2 error between the detector amplitude and the filtered
    field convolution it must equal.

    The detector equation of motion integrates to
    d(t) = -i int_0^t e^{-i(omega_d - i Gamma_d/2)(t - tau)}
           sum_a lambda_d[a] <a_a>(tau) d tau;
    the integral is evaluated with an exact exponential integrator on the
    sampled trajectory (linear interpolation of the mode sum).
    """
    ne = len(spec.emitters)
    nd = len(spec.detectors)
    if traj.amplitudes.shape[1] != ne + nd + spec.modes.n_modes:
        raise DomainError("trajectory lacks mode amplitudes")
    lam = spec.modes.lambda_d[det_index]
    modes = traj.amplitudes[:, ne + nd:]
    f = modes @ lam
    d = spec.detectors[det_index]
    wd = d.omega_ev - 0.5j * d.gamma_ev
    ts = traj.times
    I = np.zeros(len(ts), dtype=complex)
    for n in range(len(ts) - 1):
        dt = ts[n + 1] - ts[n]
        if dt <= 0:
            I[n + 1] = I[n]
            continue
        ph = np.exp(-1j * wd * dt)
        a = f[n]
        b = (f[n + 1] - f[n]) / dt
        # int_0^dt e^{-i wd (dt - u)} (a + b u) du, exact
        if abs(wd) * dt > 1e-8:
            e0 = (1.0 - ph) / (1j * wd)
            e1 = (dt - e0) / (1j * wd)
            seg = a * e0 + b * e1
        else:
            seg = (a + 0.5 * b * dt) * dt
        I[n + 1] = ph * I[n] + seg
    pred = -1j * I
    lhs = traj.amplitudes[:, ne + det_index]
    denom = np.linalg.norm(lhs)
    if denom == 0:
        raise DomainError("detector amplitude identically zero")
    return float(np.linalg.norm(lhs - pred) / denom)
