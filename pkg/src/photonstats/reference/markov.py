"""Markovian master equation: EM modes traced out at the emitter frequency.

Coherent couplings come from the real part of the retarded response, the
dissipator matrix from its imaginary part, both evaluated at a single
frequency. Retardation is lost by construction; the detector linewidth
is an internal property and stays on the dissipator diagonal.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse

from ..em.materials import DomainError
from ..em.response import ResponseTable
from ..quantum.basis import build_basis
from ..quantum.correlations import detector_g2 as _qg2
from ..quantum.dynamics import DensityState, evolve
from ..quantum.liouvillian import _dag, liouvillian_matrix
from ..quantum.steady import steady_state
from ..units import UNITS


@dataclass(eq=False)
class MarkovParams:
    """Site frequencies, coherent couplings t, and rate matrix gamma.

    Sites are ordered emitters first, then detectors. gamma is real
    symmetric; its detector diagonal holds the detector linewidths.
    """
    omegas: np.ndarray          # (N,) effective frequencies (Lamb-shifted)
    t: np.ndarray               # (N, N) symmetric coupling, zero diagonal
    gamma: np.ndarray           # (N, N) symmetric rate matrix
    n_emitters: int
    mu_d_debye: np.ndarray
    drives: np.ndarray | None = None
    psd: bool = True

    def prefactor(self, det_index: int) -> float:
        g = self.gamma[self.n_emitters + det_index,
                       self.n_emitters + det_index]
        mu = UNITS.dipole_enm(self.mu_d_debye[det_index])
        return (g / (2 * mu)) ** 2


def markov_from_table(table: ResponseTable, omega_e: float, gamma_d,
                      detector_omegas=None) -> MarkovParams:
    """Evaluate the response matrix at omega_e and fill the parameters."""
    pts = table.grid.points
    if not (pts[0] <= omega_e <= pts[-1]):
        raise DomainError("omega_e outside the table grid")
    ne = len(table.emitter_idx)
    nd = len(table.detector_idx)
    gamma_d = np.broadcast_to(np.asarray(gamma_d, dtype=float), (nd,))
    order = list(table.emitter_idx) + list(table.detector_idx)
    N = ne + nd
    Rw = np.empty((N, N), dtype=complex)
    for a, i in enumerate(order):
        for b, j in enumerate(order):
            Rw[a, b] = np.interp(omega_e, pts, table.R[:, i, j].real) \
                + 1j * np.interp(omega_e, pts, table.R[:, i, j].imag)
    omegas = np.empty(N)
    for a in range(ne):
        omegas[a] = omega_e - Rw[a, a].real
    if detector_omegas is None:
        detector_omegas = [omega_e] * nd
    for b in range(nd):
        omegas[ne + b] = detector_omegas[b]
    t = -Rw.real
    np.fill_diagonal(t, 0.0)
    t[ne:, ne:] = 0.0  # detector-detector coupling is dipole-squared small
    gamma = 2 * Rw.imag
    gamma[ne:, ne:] = 0.0
    gamma[ne:, ne:][np.diag_indices(nd)] = gamma_d
    gamma = 0.5 * (gamma + gamma.T)
    psd = bool(np.linalg.eigvalsh(gamma).min() > -1e-12 * max(
        np.abs(gamma).max(), 1e-300))
    if not psd:
        warnings.warn("Markovian rate matrix is not positive semidefinite")
    mu_d = np.array([table.sources[i].dipole_debye
                     for i in table.detector_idx])
    return MarkovParams(omegas=omegas, t=t, gamma=gamma, n_emitters=ne,
                        mu_d_debye=mu_d, psd=psd)


def markov_operators(params: MarkovParams, n_max: int = 2):
    N = len(params.omegas)
    basis = build_basis(["hardcore"] * N, n_max)
    ops = [basis.annihilation(s) for s in range(N)]
    return basis, ops


def markov_hamiltonian(params: MarkovParams, ops, frame_shift: float = 0.0,
                       drives=None):
    S = ops[0].shape[0]
    H = sparse.csr_matrix((S, S), dtype=complex)
    N = len(params.omegas)
    for a in range(N):
        H = H + (params.omegas[a] - frame_shift) * (_dag(ops[a]) @ ops[a])
    for a in range(N):
        for b in range(a + 1, N):
            if params.t[a, b] != 0.0:
                H = H + params.t[a, b] * (_dag(ops[a]) @ ops[b]
                                          + _dag(ops[b]) @ ops[a])
    if drives is not None:
        for a, eta in enumerate(drives):
            if eta:
                H = H + (-eta) * (ops[a] + _dag(ops[a]))
    return H.tocsr()


def markov_liouvillian(params: MarkovParams, n_max: int = 2,
                       frame_shift: float = 0.0, drives=None):
    basis, ops = markov_operators(params, n_max)
    H = markov_hamiltonian(params, ops, frame_shift, drives)
    N = len(params.omegas)
    cross = []
    for a in range(N):
        for b in range(N):
            if params.gamma[a, b] != 0.0:
                cross.append((ops[a], ops[b], params.gamma[a, b]))
    L = liouvillian_matrix(H, [], cross_collapses=cross)
    return L, basis, ops


def markov_spontaneous(params: MarkovParams, times) -> dict:
    """Emitter initially excited; absolute G1(t) at each detector."""
    L, basis, ops = markov_liouvillian(params, n_max=1)
    N = len(params.omegas)
    S = basis.size
    rho = np.zeros((S, S), dtype=complex)
    exc = [0] * N
    exc[0] = 1
    i1 = basis.index[tuple(exc)]
    rho[i1, i1] = 1.0
    traj = evolve(L, DensityState(rho=rho), times)
    out = {"times": np.asarray(times, float)}
    ne = params.n_emitters
    nd = N - ne
    for l in range(nd):
        nop = basis.number(ne + l).toarray()
        pop = np.array([np.real(np.trace(nop @ st.rho)) for st in traj])
        out[f"G1_{l}"] = params.prefactor(l) * pop
        out[f"pop_d{l}"] = pop
    nop_e = basis.number(0).toarray()
    out["pop_e0"] = np.array([np.real(np.trace(nop_e @ st.rho))
                              for st in traj])
    return out


def markov_steady_g2(params: MarkovParams, laser_omega: float, drives,
                     n_max: int = 2, pairs=None) -> dict:
    """Rotating-frame steady state: absolute G1 per detector and g2 pairs."""
    L, basis, ops = markov_liouvillian(params, n_max=n_max,
                                       frame_shift=laser_omega,
                                       drives=drives)
    ss = steady_state(L, basis)
    N = len(params.omegas)
    ne = params.n_emitters
    nd = N - ne
    out = {"G1": {}, "g2": {}, "G2": {}}
    for l in range(nd):
        nop = basis.number(ne + l).toarray()
        pop = float(np.real(np.trace(nop @ ss.rho)))
        out["G1"][l] = params.prefactor(l) * pop
    if pairs is None:
        pairs = [(i, j) for i in range(nd) for j in range(i + 1, nd)]
    for (i, j) in pairs:
        di, dj = ops[ne + i], ops[ne + j]
        op = (_dag(di) @ _dag(dj) @ dj @ di).toarray()
        val = float(np.real(np.trace(op @ ss.rho)))
        G2 = params.prefactor(i) * params.prefactor(j) * val
        out["G2"][(i, j)] = G2
        denom = out["G1"][i] * out["G1"][j]
        out["g2"][(i, j)] = G2 / denom if denom > 0 else np.nan
    return out
