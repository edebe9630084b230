"""Mode-network response function and its block-perturbative form."""
from __future__ import annotations

import numpy as np

from ..accel import resolvent_rows
from ..em.geometry import FrequencyGrid
from ..em.materials import DomainError
from .params import FewModeParams


def model_response(params: FewModeParams, grid) -> np.ndarray:
    """R_mod(w) = Lambda (H - w)^-1 Lambda^T for each grid point.

    Returns (G, N, N) with N = n_emitters + n_detectors. Exact (full
    matrix inverse); the perturbative cross block lives in
    `perturbative_cross`.
    """
    pts = grid.points if isinstance(grid, FrequencyGrid) else np.asarray(grid, float)
    Lam = params.Lambda
    B = resolvent_rows(pts, params.H_tilde, np.ascontiguousarray(Lam.T.astype(complex)))
    return B @ Lam.T


def resolvent_block(H: np.ndarray, grid_points: np.ndarray,
                    LamT: np.ndarray) -> np.ndarray:
    """Rows of Lam (H - w)^-1 for an arbitrary complex-symmetric block."""
    return resolvent_rows(np.asarray(grid_points, float),
                          np.ascontiguousarray(H.astype(complex)),
                          np.ascontiguousarray(LamT.astype(complex)))


def perturbative_cross(params: FewModeParams, grid) -> np.ndarray:
    """R_ed to lowest order in the emitter/detector mode coupling block.

    R_ed(w) ~= -lambda_ee A_e(w) eps A_d(w) lambda_dd^T with A the block
    resolvents; valid when the cross-coupling is small.
    """
    if params.block_meta is None:
        raise DomainError("perturbative cross block requires block_meta")
    pts = grid.points if isinstance(grid, FrequencyGrid) else np.asarray(grid, float)
    bm = params.block_meta
    ne_m = bm.n_emitter_modes
    H = params.H_tilde
    He = H[:ne_m, :ne_m]
    lam_ee = params.lambda_e[:, :ne_m]
    U = resolvent_block(He, pts, lam_ee.T.astype(complex))     # (G, Ne, ne_m)
    out = np.zeros((len(pts), params.n_emitters, params.n_detectors),
                   dtype=complex)
    for g_idx, (a, b) in enumerate(bm.group_slices):
        dets = bm.detector_groups[g_idx]
        eps = params.omega_matrix[:ne_m, a:b]
        Hd = H[a:b, a:b]
        lam_dd = params.lambda_d[dets][:, a:b]                 # (ndet, ndm)
        Ad = resolvent_block(Hd, pts, lam_dd.T.astype(complex))  # (G, ndet, ndm)
        # -U eps Ad^T(lam): sum_ab U[,k,a] eps[a,beta] Ad[,l,beta]
        out[:, :, dets] = -np.einsum("gka,ab,glb->gkl", U, eps, Ad,
                                     optimize=True)
    return out


def model_spectral_density(params: FewModeParams, grid) -> np.ndarray:
    return model_response(params, grid).imag / np.pi
