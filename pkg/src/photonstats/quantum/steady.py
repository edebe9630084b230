"""Steady states: trace-constrained sparse solve and weak-drive hierarchy."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import splu

from ..em.materials import DomainError
from .basis import RestrictedBasis
from .dynamics import DensityState
from .liouvillian import _dag, build_hamiltonian, collapse_operators, site_operators
from .system import SystemSpec


class SteadyStateError(RuntimeError):
    pass


def steady_state(L: sparse.spmatrix, basis: RestrictedBasis,
                 tol: float = 1e-10, max_prop_time: float = 1e7) -> DensityState:
    """Solve L(rho) = 0 with unit trace via a trace-row replacement.

    Falls back to long-time propagation when the direct solve leaves a
    residual above `tol`.
    """
    S = basis.size
    D = S * S
    M = L.tolil(copy=True)
    trace_cols = np.arange(S) * (S + 1)
    row = np.zeros(D)
    row[trace_cols] = 1.0
    M[0, :] = row
    b = np.zeros(D, dtype=complex)
    b[0] = 1.0
    try:
        lu = splu(M.tocsc())
        x = lu.solve(b)
    except RuntimeError as exc:
        raise SteadyStateError(f"sparse solve failed: {exc}") from exc
    resid = np.abs(L @ x).sum()
    if resid > tol:
        # fallback: propagate toward stationarity
        from scipy.sparse.linalg import expm_multiply
        t_step = 10.0
        total = 0.0
        while resid > tol and total < max_prop_time:
            x = expm_multiply(L * t_step, x)
            tr = x[trace_cols].sum()
            x = x / tr
            resid = np.abs(L @ x).sum()
            total += t_step
            t_step *= 2
        if resid > tol:
            raise SteadyStateError(
                f"steady-state residual {resid:.2e} above tolerance {tol:.2e}")
    rho = x.reshape(S, S)
    rho = 0.5 * (rho + rho.conj().T)
    rho = rho / np.trace(rho).real
    return DensityState(rho=rho, time=np.inf)


def liouvillian_residual(L: sparse.spmatrix, state: DensityState) -> float:
    return float(np.abs(L @ state.rho.reshape(-1)).sum())


@dataclass(eq=False)
class WeakDriveSolution:
    """Steady-state amplitudes to second order in the drive.

    With purely lowering jump operators and a weak coherent drive, the
    normally-ordered detector correlators follow from the stationary
    amplitudes of the non-Hermitian (no-jump) Hamiltonian sector by
    sector; corrections are higher order in the drive.
    """
    basis: RestrictedBasis
    spec: SystemSpec
    c1: np.ndarray
    c2: np.ndarray | None

    def expectation_number(self, op_number: sparse.spmatrix) -> float:
        s1 = self.basis.sector_slices[1]
        val = np.real(np.vdot(self.c1, (op_number[s1[0]:s1[1], s1[0]:s1[1]]
                                        @ self.c1)))
        if self.c2 is not None:
            s2 = self.basis.sector_slices[2]
            val += np.real(np.vdot(self.c2, (op_number[s2[0]:s2[1],
                                                       s2[0]:s2[1]] @ self.c2)))
        return float(val)

    def pair_amplitude(self, op_i: sparse.spmatrix,
                       op_j: sparse.spmatrix) -> complex:
        """<vac| O_j O_i |psi_2> for two-excitation observables."""
        if self.c2 is None:
            raise DomainError("two-excitation sector not available")
        s2 = self.basis.sector_slices[2]
        S = self.basis.size
        full = np.zeros(S, dtype=complex)
        full[s2[0]:s2[1]] = self.c2
        v = op_j @ (op_i @ full)
        return complex(v[self.basis.vacuum_index()])


def weak_drive_steady(spec: SystemSpec, basis: RestrictedBasis) -> WeakDriveSolution:
    """Second-order weak-drive stationary amplitudes in the rotating frame."""
    if spec.frame != "rotating":
        raise DomainError("weak-drive solver requires the rotating frame")
    if not spec.driven:
        raise DomainError("weak-drive solver requires a drive")
    H = build_hamiltonian(spec, basis, include_drive=False)
    # effective non-Hermitian part: -(i/2) sum rate O^dag O
    for (O, rate) in collapse_operators(spec, basis):
        H = H - 0.5j * rate * (_dag(O) @ O)
    sig, det, mod = site_operators(spec, basis)
    S = basis.size
    up = sparse.csr_matrix((S, S), dtype=complex)
    for k, e in enumerate(spec.emitters):
        if e.drive_ev:
            up = up + (-e.drive_ev) * _dag(sig[k])
    for l, d in enumerate(spec.detectors):
        if d.drive_ev:
            up = up + (-d.drive_ev) * _dag(det[l])
    H = H.tocsc()
    up = up.tocsc()
    s0 = basis.sector_slices[0]
    s1 = basis.sector_slices[1]
    vac = np.zeros(s0[1] - s0[0], dtype=complex)
    vac[basis.vacuum_index() - s0[0]] = 1.0
    M1 = H[s1[0]:s1[1], s1[0]:s1[1]].toarray()
    V1 = up[s1[0]:s1[1], s0[0]:s0[1]].toarray() @ vac
    c1 = np.linalg.solve(M1, -V1)
    c2 = None
    if basis.n_max >= 2:
        s2 = basis.sector_slices[2]
        M2 = H[s2[0]:s2[1], s2[0]:s2[1]].toarray()
        V2 = up[s2[0]:s2[1], s1[0]:s1[1]].toarray() @ c1
        c2 = np.linalg.solve(M2, -V2)
    return WeakDriveSolution(basis=basis, spec=spec, c1=c1, c2=c2)
