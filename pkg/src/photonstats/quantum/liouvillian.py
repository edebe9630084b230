"""Hamiltonian and Lindblad-generator assembly on the restricted basis."""
from __future__ import annotations

import numpy as np
from scipy import sparse

from ..em.materials import DomainError
from .basis import RestrictedBasis, build_basis
from .system import SystemSpec

DEFAULT_DIM_CAP = 1_200_000_000  # cap on (state count)^2


def _dag(op):
    """Conjugate transpose of a sparse operator."""
    return op.conj().T.tocsr()



def site_kinds_for(spec: SystemSpec) -> list:
    ne = len(spec.emitters)
    nd = len(spec.detectors)
    nm = spec.modes.n_modes
    return ["hardcore"] * (ne + nd) + ["boson"] * nm


def basis_for(spec: SystemSpec, n_max: int) -> RestrictedBasis:
    return build_basis(site_kinds_for(spec), n_max)


def site_operators(spec: SystemSpec, basis: RestrictedBasis):
    """(sigma list, d list, a list) of annihilation operators."""
    ne = len(spec.emitters)
    nd = len(spec.detectors)
    nm = spec.modes.n_modes
    ops = [basis.annihilation(s) for s in range(ne + nd + nm)]
    return ops[:ne], ops[ne:ne + nd], ops[ne + nd:]


def build_hamiltonian(spec: SystemSpec, basis: RestrictedBasis,
                      include_drive: bool = True) -> sparse.csr_matrix:
    """Hermitian Hamiltonian of the mode network with sources and drives.

    Emitter bare frequencies carry the fitted Lamb-shift correction; in
    the rotating frame all frequencies are already laser-shifted.
    """
    sig, det, mod = site_operators(spec, basis)
    m = spec.modes
    S = basis.size
    H = sparse.csr_matrix((S, S), dtype=complex)
    for k, e in enumerate(spec.emitters):
        H = H + (e.omega_ev - m.lamb_shift[k]) * (_dag(sig[k]) @ sig[k])
    for l, d in enumerate(spec.detectors):
        H = H + d.omega_ev * (_dag(det[l]) @ det[l])
    Om = m.omega_matrix
    for a in range(m.n_modes):
        H = H + Om[a, a] * (_dag(mod[a]) @ mod[a])
        for b in range(a + 1, m.n_modes):
            if Om[a, b] != 0.0:
                H = H + Om[a, b] * (_dag(mod[a]) @ mod[b] + _dag(mod[b]) @ mod[a])
    for k in range(len(spec.emitters)):
        for a in range(m.n_modes):
            lam = m.lambda_e[k, a]
            if lam != 0.0:
                H = H + lam * (_dag(mod[a]) @ sig[k] + _dag(sig[k]) @ mod[a])
    for l in range(len(spec.detectors)):
        for a in range(m.n_modes):
            lam = m.lambda_d[l, a]
            if lam != 0.0:
                H = H + lam * (_dag(mod[a]) @ det[l] + _dag(det[l]) @ mod[a])
    if include_drive:
        if spec.driven and spec.frame != "rotating":
            raise DomainError("driven dynamics requires the rotating frame")
        for k, e in enumerate(spec.emitters):
            if e.drive_ev:
                H = H + (-e.drive_ev) * (sig[k] + _dag(sig[k]))
        for l, d in enumerate(spec.detectors):
            if d.drive_ev:
                H = H + (-d.drive_ev) * (det[l] + _dag(det[l]))
    return H.tocsr()


def collapse_operators(spec: SystemSpec, basis: RestrictedBasis):
    """(operator, rate) pairs: mode losses and detector linewidths."""
    sig, det, mod = site_operators(spec, basis)
    out = []
    for a, kap in enumerate(spec.modes.kappa):
        if kap > 0:
            out.append((mod[a], float(kap)))
    for l, d in enumerate(spec.detectors):
        out.append((det[l], float(d.gamma_ev)))
    return out


def liouvillian_matrix(H: sparse.spmatrix, collapses,
                       cross_collapses=()) -> sparse.csr_matrix:
    """Lindblad generator on row-major vectorized density matrices.

    collapses: iterable of (O, rate) for rate * (O rho O^dag - ...).
    cross_collapses: iterable of (O_i, O_j, gamma_ij) implementing
    gamma_ij * (O_i rho O_j^dag - 1/2 {O_j^dag O_i, rho}).
    """
    S = H.shape[0]
    eye = sparse.identity(S, dtype=complex, format="csr")
    L = -1j * (sparse.kron(H, eye, format="csr")
               - sparse.kron(eye, H.T, format="csr"))
    for (O, rate) in collapses:
        Od = _dag(O).tocsr()
        OdO = (Od @ O).tocsr()
        L = L + rate * (sparse.kron(O, O.conj(), format="csr")
                        - 0.5 * sparse.kron(OdO, eye, format="csr")
                        - 0.5 * sparse.kron(eye, OdO.T, format="csr"))
    for (Oi, Oj, g) in cross_collapses:
        if g == 0.0:
            continue
        Ojd = _dag(Oj).tocsr()
        OjdOi = (Ojd @ Oi).tocsr()
        L = L + g * (sparse.kron(Oi, Oj.conj(), format="csr")
                     - 0.5 * sparse.kron(OjdOi, eye, format="csr")
                     - 0.5 * sparse.kron(eye, OjdOi.T, format="csr"))
    return L.tocsr()


def build_liouvillian(spec: SystemSpec, basis: RestrictedBasis,
                      dim_cap: int = DEFAULT_DIM_CAP) -> sparse.csr_matrix:
    """Full Lindblad generator for the fitted network with detectors."""
    S = basis.size
    if S * S > dim_cap:
        raise DomainError(
            f"vectorized dimension {S}^2 = {S*S} exceeds cap {dim_cap}; "
            "reduce n_max or the mode count, or raise dim_cap")
    H = build_hamiltonian(spec, basis)
    return liouvillian_matrix(H, collapse_operators(spec, basis))
