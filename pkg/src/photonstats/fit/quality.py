"""Fit-quality evaluation and the static Lamb-shift correction."""
from __future__ import annotations

import numpy as np

from ..em.materials import DomainError
from ..em.response import ResponseTable
from .config import FitReport
from .model import model_response
from .params import FewModeParams


def fit_quality(params: FewModeParams, table: ResponseTable,
                window=None) -> FitReport:
    """Recompute per-block residuals of the exact model response.

    `window` restricts the evaluation to a frequency interval (the fit
    core); by default the whole table grid is used.
    """
    ne = params.n_emitters
    nd = params.n_detectors
    if ne != len(table.emitter_idx) or nd != len(table.detector_idx):
        raise DomainError("params/table dimension mismatch")
    pts = table.grid.points
    sel = np.ones(len(pts), dtype=bool)
    if window is not None:
        sel = (pts >= window[0] - 1e-12) & (pts <= window[1] + 1e-12)
    pts = pts[sel]
    Rm = model_response(params, pts)
    report = FitReport(nfev=0, converged=True)
    Te = table.R_ee[sel]
    Me = Rm[:, :ne, :ne]
    report.block_rms["ee"] = float(np.sqrt(
        np.sum(np.abs(Me - Te) ** 2) / np.sum(np.abs(Te) ** 2)))
    report.block_rms["ee_J"] = float(np.sqrt(
        np.sum((Me.imag - Te.imag) ** 2) / np.sum(Te.imag ** 2)))
    report.block_max_abs["ee"] = float(np.abs(Me - Te).max())
    if nd:
        Td = table.R_ed[sel]
        Md = Rm[:, :ne, ne:]
        report.block_rms["ed"] = float(np.sqrt(
            np.sum(np.abs(Md - Td) ** 2) / np.sum(np.abs(Td) ** 2)))
        report.block_max_abs["ed"] = float(np.abs(Md - Td).max())
    report.lamb_shift = list(np.asarray(params.lamb_shift, dtype=float))
    return report


def lamb_shift_correction(params: FewModeParams, table: ResponseTable,
                          omega_e) -> FewModeParams:
    """Static per-emitter frequency correction from the Re-part mismatch.

    delta_k = Re[target R_kk(omega_k)] - Re[model R_kk(omega_k)]; the
    quantum builder then uses the bare frequency omega_k - delta_k so the
    effective Lamb-shifted frequency matches the physical one.
    """
    omega_e = np.atleast_1d(np.asarray(omega_e, dtype=float))
    ne = params.n_emitters
    if len(omega_e) == 1 and ne > 1:
        omega_e = np.full(ne, omega_e[0])
    if len(omega_e) != ne:
        raise DomainError("one frequency per emitter required")
    pts = table.grid.points
    lo, hi = pts[0], pts[-1]
    if np.any(omega_e < lo) or np.any(omega_e > hi):
        raise DomainError("emitter frequency outside table grid")
    Rm = model_response(params, pts)
    delta = np.empty(ne)
    Te = table.R_ee
    for k in range(ne):
        t_re = np.interp(omega_e[k], pts, Te[:, k, k].real)
        m_re = np.interp(omega_e[k], pts, Rm[:, k, k].real)
        delta[k] = t_re - m_re
    out = FewModeParams(
        omega_matrix=params.omega_matrix.copy(), kappa=params.kappa.copy(),
        lambda_e=params.lambda_e.copy(), lambda_d=params.lambda_d.copy(),
        block_meta=params.block_meta, lamb_shift=delta,
        mu_e_debye=params.mu_e_debye, mu_d_debye=params.mu_d_debye)
    return out
