"""Emitter-block fit: weighted nonlinear least squares on R_ee(w).

Two stages: a multistart fit with a diagonal mode matrix (sum of
Lorentzian poles), then a refinement with the full symmetric mode-mode
coupling matrix. Mode losses are bounded below by a grid-resolvability
floor: poles narrower than the frequency grid cannot be constrained by
the data and show up later as spurious transients in the dynamics.
"""
from __future__ import annotations

import numpy as np
from scipy.optimize import least_squares
from scipy.signal import find_peaks

from ..accel import resolvent_rows
from ..em.materials import DomainError
from ..em.response import ResponseTable
from .config import FitConfig, FitReport
from .params import FewModeParams


def _window_mask(grid_pts, window):
    if window is None:
        return np.ones(len(grid_pts), dtype=bool)
    return (grid_pts >= window[0] - 1e-12) & (grid_pts <= window[1] + 1e-12)


def _entries(ne):
    return [(i, j) for i in range(ne) for j in range(i, ne)]


class _EmitterProblem:
    """Residual/jacobian assembly shared by both stages."""

    def __init__(self, pts, target, ne, nm, re_diag_weight):
        self.pts = pts
        self.T = target                      # (G, ne, ne)
        self.ne = ne
        self.nm = nm
        self.entries = _entries(ne)
        self.iu, self.ju = np.triu_indices(nm)
        self.ntri = len(self.iu)
        self.scales = np.array([max(np.abs(target[:, i, j]).max(), 1e-300)
                                for (i, j) in self.entries])
        self.re_w = np.array([re_diag_weight if i == j else 1.0
                              for (i, j) in self.entries])

    # ---- full symmetric parameterization
    def unpack(self, theta):
        Om = np.zeros((self.nm, self.nm))
        Om[self.iu, self.ju] = theta[:self.ntri]
        Om = Om + Om.T - np.diag(np.diag(Om))
        s = theta[self.ntri:self.ntri + self.nm]
        lam = theta[self.ntri + self.nm:].reshape(self.ne, self.nm)
        return Om, s, lam

    def pack(self, Om, s, lam):
        return np.concatenate([Om[self.iu, self.ju], s, lam.ravel()])

    def _B(self, Om, s, lam):
        H = (Om - 0.5j * np.diag(s**2)).astype(complex)
        return resolvent_rows(self.pts, H,
                              np.ascontiguousarray(lam.T.astype(complex)))

    def resid(self, theta):
        Om, s, lam = self.unpack(theta)
        B = self._B(Om, s, lam)
        R = B @ lam.T
        out = []
        for k, (i, j) in enumerate(self.entries):
            r = (R[:, i, j] - self.T[:, i, j]) / self.scales[k]
            out.append(self.re_w[k] * r.real)
            out.append(r.imag)
        return np.concatenate(out)

    def jac(self, theta):
        Om, s, lam = self.unpack(theta)
        B = self._B(Om, s, lam)
        G = len(self.pts)
        P = len(theta)
        J = np.empty((2 * len(self.entries) * G, P))
        diag_mask = self.iu == self.ju
        for k, (i, j) in enumerate(self.entries):
            Bi, Bj = B[:, i, :], B[:, j, :]
            t_om = -(Bi[:, self.iu] * Bj[:, self.ju]
                     + Bi[:, self.ju] * Bj[:, self.iu])
            t_om[:, diag_mask] *= 0.5
            t_s = 1j * s[None, :] * Bi * Bj
            t_lam = np.zeros((G, self.ne, self.nm), dtype=complex)
            t_lam[:, i, :] += Bj
            t_lam[:, j, :] += Bi
            block = np.concatenate(
                [t_om, t_s, t_lam.reshape(G, -1)], axis=1) / self.scales[k]
            r0 = 2 * k * G
            J[r0:r0 + G] = self.re_w[k] * block.real
            J[r0 + G:r0 + 2 * G] = block.imag
        return J

    # ---- diagonal parameterization (stage 1)
    def d_unpack(self, td):
        nm = self.nm
        return td[:nm], td[nm:2 * nm], td[2 * nm:].reshape(self.ne, nm)

    def d_resid(self, td):
        om, s, lam = self.d_unpack(td)
        z = 1.0 / (om[None, :] - 0.5j * (s**2)[None, :] - self.pts[:, None])
        out = []
        for k, (i, j) in enumerate(self.entries):
            R = (z * (lam[i] * lam[j])[None, :]).sum(axis=1)
            r = (R - self.T[:, i, j]) / self.scales[k]
            out.append(self.re_w[k] * r.real)
            out.append(r.imag)
        return np.concatenate(out)

    def d_jac(self, td):
        om, s, lam = self.d_unpack(td)
        nm = self.nm
        G = len(self.pts)
        z = 1.0 / (om[None, :] - 0.5j * (s**2)[None, :] - self.pts[:, None])
        z2 = z * z
        J = np.empty((2 * len(self.entries) * G, len(td)))
        for k, (i, j) in enumerate(self.entries):
            ll = (lam[i] * lam[j])[None, :]
            t_om = -ll * z2
            t_s = 1j * (s[None, :]) * ll * z2
            t_lam = np.zeros((G, self.ne, nm), dtype=complex)
            t_lam[:, i, :] += lam[j][None, :] * z
            t_lam[:, j, :] += lam[i][None, :] * z
            block = np.concatenate(
                [t_om, t_s, t_lam.reshape(G, -1)], axis=1) / self.scales[k]
            r0 = 2 * k * G
            J[r0:r0 + G] = self.re_w[k] * block.real
            J[r0 + G:r0 + 2 * G] = block.imag
        return J


def _seed(problem, rng, jitter):
    """Mass-clustered pole positions with magnitude-matched couplings."""
    pts = problem.pts
    nm = problem.nm
    ne = problem.ne
    Jd = np.mean([np.abs(problem.T[:, i, i].imag) for i in range(ne)], axis=0) / np.pi
    w = Jd + 0.15 * Jd.max()
    cdf = np.cumsum(w)
    cdf /= cdf[-1]
    oms = np.interp((np.arange(nm) + 0.5) / nm, cdf, pts)
    if jitter:
        oms = oms + jitter * rng.standard_normal(nm) * (pts[-1] - pts[0]) / nm
        oms = np.clip(np.sort(oms), pts[0], pts[-1])
    gaps = np.clip(np.gradient(oms), 1e-3, None)
    kap = 2.5 * gaps
    lam = np.zeros((ne, nm))
    for i in range(ne):
        Ji = np.interp(oms, pts, np.abs(problem.T[:, i, i].imag) / np.pi)
        lam[i] = np.sqrt(np.pi * np.maximum(Ji, 1e-3 * Ji.max()) * kap / 2)
        if i > 0:
            cross = np.interp(oms, pts, problem.T[:, 0, i].imag)
            lam[i] *= np.where(cross >= 0, 1.0, -1.0)
    return oms, np.sqrt(kap), lam


def fit_emitter_block(table: ResponseTable, config: FitConfig):
    """Fit the emitter-mode block to the emitter rows/columns of `table`.

    Returns (FewModeParams restricted to emitter modes, FitReport).
    """
    config.validate()
    e_idx = table.emitter_idx
    if len(e_idx) == 0:
        raise DomainError("table contains no emitters")
    pts_all = table.grid.points
    mask = _window_mask(pts_all, config.window)
    pts = pts_all[mask]
    target = table.R_ee[mask]
    ne = len(e_idx)
    nm = config.n_emitter_modes
    prob = _EmitterProblem(pts, target, ne, nm,
                           config.weights.get("re_diag", 0.25))
    rng = np.random.default_rng(config.seed)
    s_min = np.sqrt(config.kappa_min_factor * (pts[1] - pts[0]))
    s_max = np.sqrt(20.0 * (pts[-1] - pts[0]))
    opt = config.optimizer

    if isinstance(config.warm_start, FewModeParams):
        ws = config.warm_start
        ne_m = (ws.block_meta.n_emitter_modes if ws.block_meta is not None
                else ws.n_modes)
        if ne_m != nm or ws.n_emitters != ne:
            raise DomainError("warm start shape mismatch")
        th0 = prob.pack(ws.omega_matrix[:nm, :nm],
                        np.sqrt(np.maximum(ws.kappa[:nm],
                                           s_min**2)),
                        ws.lambda_e[:, :nm])
        starts = [("full", th0)]
    else:
        starts = []
        for i in range(max(1, config.multistart_count)):
            om, s, lam = _seed(prob, rng, 0.0 if i == 0 else 0.5)
            starts.append(("diag", np.concatenate([om, np.clip(s, s_min, s_max),
                                                   lam.ravel()])))

    nfev = 0
    best_d = None
    lb_d = np.concatenate([np.full(nm, pts[0] - 1.5 * (pts[-1] - pts[0])),
                           np.full(nm, s_min), np.full(ne * nm, -np.inf)])
    ub_d = np.concatenate([np.full(nm, pts[-1] + 1.5 * (pts[-1] - pts[0])),
                           np.full(nm, s_max), np.full(ne * nm, np.inf)])
    full_start = None
    for kind, th0 in starts:
        if kind == "full":
            full_start = th0
            continue
        res = least_squares(prob.d_resid, th0, jac=prob.d_jac,
                            bounds=(lb_d, ub_d), method="trf",
                            max_nfev=opt.max_nfev, gtol=opt.gtol,
                            xtol=opt.xtol, ftol=opt.ftol, x_scale="jac")
        nfev += res.nfev
        if best_d is None or res.cost < best_d.cost:
            best_d = res
    if full_start is None:
        om, s, lam = prob.d_unpack(best_d.x)
        Om = np.diag(om)
        full_start = prob.pack(Om, s, lam)

    # bound mode frequencies and couplings to the physical window scale;
    # unbounded runaway directions (huge omega with compensating lambda)
    # leave the fit residual unchanged but poison the dynamics
    ntri = prob.ntri
    W = pts[-1] - pts[0]
    diag_mask = prob.iu == prob.ju
    lb_tri = np.where(diag_mask, pts[0] - 2.0 * W, -2.0 * W)
    ub_tri = np.where(diag_mask, pts[-1] + 2.0 * W, 2.0 * W)
    lam_cap = 10.0 * np.sqrt(np.abs(target).max() * W)
    lb = np.concatenate([lb_tri, np.full(nm, s_min),
                         np.full(ne * nm, -lam_cap)])
    ub = np.concatenate([ub_tri, np.full(nm, s_max),
                         np.full(ne * nm, lam_cap)])
    full_start = np.clip(full_start, lb + 1e-12, ub - 1e-12)
    res = least_squares(prob.resid, full_start, jac=prob.jac,
                        bounds=(lb, ub), method="trf",
                        max_nfev=2 * opt.max_nfev, gtol=opt.gtol,
                        xtol=opt.xtol, ftol=opt.ftol, x_scale="jac")
    nfev += res.nfev
    Om, s, lam = prob.unpack(res.x)

    mu_e = np.array([table.sources[i].dipole_debye for i in e_idx])
    params = FewModeParams(omega_matrix=Om, kappa=s**2, lambda_e=lam,
                           lambda_d=np.zeros((0, nm)), mu_e_debye=mu_e)
    Rm = (resolvent_rows(pts, params.H_tilde,
                         np.ascontiguousarray(lam.T.astype(complex))) @ lam.T)
    rms = np.sqrt(np.sum(np.abs(Rm - target) ** 2) / np.sum(np.abs(target) ** 2))
    rms_J = np.sqrt(np.sum((Rm.imag - target.imag) ** 2)
                    / np.sum(target.imag ** 2))
    report = FitReport(
        block_rms={"ee": float(rms), "ee_J": float(rms_J)},
        block_max_abs={"ee": float(np.abs(Rm - target).max())},
        nfev=nfev, converged=bool(res.status > 0),
        diagnostics={"cost": float(res.cost), "window": prob.pts[[0, -1]].tolist()})
    return params, report
