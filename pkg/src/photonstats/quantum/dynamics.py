"""Density-matrix evolution and the single-excitation fast path."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import sparse
from scipy.integrate import solve_ivp
from scipy.linalg import expm

from ..em.materials import DomainError
from .basis import RestrictedBasis
from .liouvillian import _dag, site_operators
from .system import SystemSpec


@dataclass(eq=False)
class DensityState:
    rho: np.ndarray
    time: float = 0.0

    def trace(self) -> float:
        return float(np.trace(self.rho).real)

    def hermiticity_error(self) -> float:
        return float(np.abs(self.rho - self.rho.conj().T).max())

    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(0.5 * (self.rho + self.rho.conj().T)).min())

    def validate(self, trace_tol=1e-8, herm_tol=1e-10, eig_tol=1e-8):
        if abs(self.trace() - 1.0) > trace_tol:
            raise DomainError(f"trace deviates: {self.trace()}")
        if self.hermiticity_error() > herm_tol:
            raise DomainError("state not Hermitian")
        if self.min_eigenvalue() < -eig_tol:
            raise DomainError("state not positive semidefinite")


def vacuum_state(basis: RestrictedBasis) -> DensityState:
    rho = np.zeros((basis.size, basis.size), dtype=complex)
    rho[basis.vacuum_index(), basis.vacuum_index()] = 1.0
    return DensityState(rho=rho, time=0.0)


def evolve(L: sparse.spmatrix, rho0: DensityState, times,
           rtol: float = 1e-8, atol: float = 1e-12) -> list:
    """Adaptive integration of rho' = L rho, sampled at `times`."""
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or np.any(np.diff(times) <= 0):
        raise DomainError("times must be strictly ascending")
    if times[0] < rho0.time:
        raise DomainError("times must start at or after rho0.time")
    S = rho0.rho.shape[0]
    y0 = rho0.rho.reshape(-1)

    def rhs(t, y):
        return L @ y

    sol = solve_ivp(rhs, (rho0.time, times[-1]), y0, t_eval=times,
                    method="DOP853", rtol=rtol, atol=atol)
    if not sol.success:
        raise RuntimeError(f"integration failed: {sol.message}")
    return [DensityState(rho=sol.y[:, i].reshape(S, S), time=t)
            for i, t in enumerate(times)]


@dataclass(eq=False)
class AmplitudeTrajectory:
    """Single-excitation amplitudes per site over time."""
    times: np.ndarray
    amplitudes: np.ndarray        # (T, n_sites) complex
    site_labels: list
    spec: SystemSpec = None

    def site(self, label: str) -> np.ndarray:
        return self.amplitudes[:, self.site_labels.index(label)]


def effective_hamiltonian_1exc(spec: SystemSpec) -> np.ndarray:
    """Non-Hermitian site Hamiltonian on the single-excitation manifold."""
    ne = len(spec.emitters)
    nd = len(spec.detectors)
    m = spec.modes
    n = ne + nd + m.n_modes
    H = np.zeros((n, n), dtype=complex)
    for k, e in enumerate(spec.emitters):
        H[k, k] = e.omega_ev - m.lamb_shift[k]
    for l, d in enumerate(spec.detectors):
        H[ne + l, ne + l] = d.omega_ev - 0.5j * d.gamma_ev
    sl = slice(ne + nd, n)
    H[sl, sl] = m.H_tilde
    H[:ne, sl] = m.lambda_e
    H[sl, :ne] = m.lambda_e.T
    H[ne:ne + nd, sl] = m.lambda_d
    H[sl, ne:ne + nd] = m.lambda_d.T
    return H


def evolve_single_excitation(spec: SystemSpec, psi0, times,
                             omega_ref: float | None = None) -> AmplitudeTrajectory:
    """Propagate the excitation-one manifold with matrix exponentials.

    Exact for the effective non-Hermitian Hamiltonian (losses on the
    diagonal); refuses driven systems. Matrix-exponential stepping keeps
    amplitudes accurate far below the eigenvector-conditioning noise of a
    spectral decomposition, which matters for weak detector signals.
    """
    if spec.driven:
        raise DomainError("single-excitation path requires an undriven system")
    H = effective_hamiltonian_1exc(spec)
    n = H.shape[0]
    psi0 = np.asarray(psi0, dtype=complex).reshape(n)
    times = np.asarray(times, dtype=float)
    if np.any(np.diff(times) < 0):
        raise DomainError("times must be ascending")
    if omega_ref is None:
        omega_ref = float(np.mean(np.real(np.diag(H))))
    Hr = H - omega_ref * np.eye(n)
    out = np.empty((len(times), n), dtype=complex)
    cache = {}
    c = psi0.copy()
    t_cur = 0.0
    for i, t in enumerate(times):
        dt = t - t_cur
        if dt > 0:
            key = round(dt, 15)
            if key not in cache:
                cache[key] = expm(-1j * Hr * dt)
            c = cache[key] @ c
            t_cur = t
        out[i] = c * np.exp(-1j * omega_ref * t)
    ne = len(spec.emitters)
    nd = len(spec.detectors)
    labels = [f"e{k}" for k in range(ne)] + [f"d{l}" for l in range(nd)] \
        + [f"m{a}" for a in range(spec.modes.n_modes)]
    return AmplitudeTrajectory(times=times, amplitudes=out,
                               site_labels=labels, spec=spec)


def evolve_lab_frame_driven(spec: SystemSpec, basis: RestrictedBasis,
                            rho0: DensityState, times,
                            rtol=1e-8, atol=1e-12) -> list:
    """Lab-frame evolution with the explicitly time-dependent drive.

    Testbed-scale only: used to verify rotating-frame steady states
    against long-time lab-frame averages.
    """
    from .liouvillian import build_hamiltonian, collapse_operators, \
        liouvillian_matrix
    if spec.laser_omega is None:
        raise DomainError("needs a laser frequency")
    H0 = build_hamiltonian(spec, basis, include_drive=False)
    sig, det, mod = site_operators(spec, basis)
    S = basis.size
    up = sparse.csr_matrix((S, S), dtype=complex)
    for k, e in enumerate(spec.emitters):
        if e.drive_ev:
            up = up + (-e.drive_ev) * _dag(sig[k])
    for l, d in enumerate(spec.detectors):
        if d.drive_ev:
            up = up + (-d.drive_ev) * _dag(det[l])
    L0 = liouvillian_matrix(H0, collapse_operators(spec, basis))
    eye = sparse.identity(S, dtype=complex, format="csr")

    def com(A):
        return -1j * (sparse.kron(A, eye, format="csr")
                      - sparse.kron(eye, A.T, format="csr"))

    Lup = com(up.tocsr())
    Ldn = com(_dag(up).tocsr())
    wl = spec.laser_omega

    def rhs(t, y):
        return L0 @ y + np.exp(-1j * wl * t) * (Lup @ y) \
            + np.exp(1j * wl * t) * (Ldn @ y)

    times = np.asarray(times, dtype=float)
    sol = solve_ivp(rhs, (rho0.time, times[-1]), rho0.rho.reshape(-1),
                    t_eval=times, method="DOP853", rtol=rtol, atol=atol)
    if not sol.success:
        raise RuntimeError(f"integration failed: {sol.message}")
    return [DensityState(rho=sol.y[:, i].reshape(S, S), time=t)
            for i, t in enumerate(times)]
