"""Single-excitation amplitude solution of spontaneous emission.

The emitter amplitude decays exponentially at the local spectral-density
rate; the detector amplitude combines a two-pole term with a truncated
frequency integral over the cross spectral density. The truncation range
controls accuracy non-uniformly, which the convergence scan quantifies.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import special
from scipy.interpolate import CubicSpline

from ..em.materials import DomainError
from ..em.response import ResponseTable
from ..units import UNITS


def _gl_nodes(a: float, b: float, t_max: float, period_hint: float,
              order: int = 10):
    """Composite Gauss-Legendre nodes resolving e^{-i w t_max} and the
    integrand's own oscillation."""
    min_scale = min(period_hint / 2.0, 2 * np.pi / max(t_max, 1e-6) / 2.0)
    n_pan = max(24, int(np.ceil((b - a) / max(min_scale, 1e-4))))
    x, w = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(a, b, n_pan + 1)
    mid = 0.5 * (edges[:-1] + edges[1:])
    half = 0.5 * np.diff(edges)
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


def _e1_scaled(x: float, p: complex, t: float) -> complex:
    """e^{-i p t} * exp1(i (x - p) t), stable for strongly damped poles.

    For Re[i(x-p)t] << 0 the two factors overflow/underflow separately;
    their product reduces to e^{-i x t} times the asymptotic series of
    e^z exp1(z).
    """
    z = 1j * (x - p) * t
    if z.real < -30.0:
        inv = 1.0 / z
        series = inv * (1.0 - inv * (1.0 - inv * (2.0 - 6.0 * inv)))
        return complex(np.exp(-1j * x * t) * series)
    return complex(np.exp(-1j * p * t) * special.exp1(z))


def _pole_segment(a: float, b: float, p: complex, t: float) -> complex:
    """int_a^b e^{-i w t} / (w - p) dw for Im p < 0, t >= 0 (exact)."""
    if t == 0.0:
        return complex(np.log(b - p) - np.log(a - p))
    val = _e1_scaled(a, p, t) - _e1_scaled(b, p, t)
    if a < p.real < b:
        # the antiderivative path crosses the exp1 branch cut once
        val = val - 2j * np.pi * np.exp(-1j * p * t)
    return complex(val)


def r_ed_integral(grid_points, J_ed, omega_complex: complex, delta: float,
                  omega_center: float | None = None) -> complex:
    """r(w) = int J_ed(w')/(w' - w) dw' over a window of width delta.

    The window is [max(grid_lo, w0 - delta/2), min(grid_hi, w0 + delta/2)]
    around omega_center (defaults to Re omega_complex). The pole must be
    off the integration path.
    """
    pts = np.asarray(grid_points, float)
    J = np.asarray(J_ed, float)
    w0 = float(omega_center if omega_center is not None
               else np.real(omega_complex))
    a = max(pts[0], w0 - delta / 2)
    b = min(pts[-1], w0 + delta / 2)
    if b <= a:
        raise DomainError("empty integration window")
    p = complex(omega_complex)
    if abs(p.imag) < 1e-14 and a <= p.real <= b:
        raise DomainError("pole on the real axis inside the support")
    spline = CubicSpline(pts, J)
    nodes, weights = _gl_nodes(a, b, 0.0, _period_hint(pts, J))
    Jq = spline(nodes)
    p_r = np.clip(p.real, a, b)
    J_at = float(spline(p_r))
    reg = np.sum(weights * (Jq - J_at) / (nodes - p))
    log_term = J_at * (np.log(b - p) - np.log(a - p))
    return complex(reg + log_term)


def _period_hint(pts, J) -> float:
    """Dominant oscillation period of J via zero-crossing spacing."""
    sgn = np.sign(J - J.mean() * 0)
    crossings = np.where(np.diff(np.signbit(J)))[0]
    if len(crossings) > 3:
        return float(2 * np.mean(np.diff(pts[crossings])))
    return float((pts[-1] - pts[0]) / 4)


@dataclass(eq=False)
class WWResult:
    times: np.ndarray
    alpha_e: np.ndarray
    alpha_d: np.ndarray
    G1: np.ndarray
    delta: float
    r_ed_e: complex
    r_ed_d: complex
    diagnostics: dict = field(default_factory=dict)


def ww_solve(table: ResponseTable, omega_e: float, detector, delta: float,
             times, units=UNITS) -> WWResult:
    """Amplitudes and detector intensity for an initially excited emitter.

    detector = (omega_d, Gamma_d, mu_d_debye). The cross spectral density
    is taken from the table's first emitter-detector pair.
    """
    omega_d, gamma_d, mu_d = detector
    pts = table.grid.points
    if not (pts[0] <= omega_e <= pts[-1]) or not (pts[0] <= omega_d <= pts[-1]):
        raise DomainError("frequencies must lie inside the table grid")
    e0 = table.emitter_idx[0]
    d0 = table.detector_idx[0]
    J_ee = table.J[:, e0, e0]
    J_ed = table.J[:, e0, d0]
    Jee_at = float(np.interp(omega_e, pts, J_ee))
    wt_e = omega_e - 1j * np.pi * Jee_at
    wt_d = omega_d - 0.5j * gamma_d
    if abs(wt_e - wt_d) < 1e-9:
        wt_d = wt_d - 1e-9j  # analytic limit via an offset difference quotient
    times = np.asarray(times, dtype=float)
    t_max = float(times.max())

    w0 = 0.5 * (omega_e + omega_d)
    a = max(pts[0], w0 - delta / 2)
    b = min(pts[-1], w0 + delta / 2)
    if b <= a:
        raise DomainError("empty integration window")
    spline = CubicSpline(pts, J_ed)
    nodes, weights = _gl_nodes(a, b, t_max, _period_hint(pts, J_ed))
    Jq = spline(nodes)

    r_e = r_ed_integral(pts, J_ed, wt_e, delta, omega_center=w0)
    r_d = r_ed_integral(pts, J_ed, wt_d, delta, omega_center=w0)

    alpha_e = np.exp(-1j * wt_e * times)
    two_pole = (r_d * np.exp(-1j * wt_d * times)
                - r_e * np.exp(-1j * wt_e * times)) / (wt_e - wt_d)

    # integral term with both poles subtracted for quadrature accuracy:
    # J/( (w-pe)(w-pd) ) = [J - J_e K_e - J_d K_d]/(...) + analytic parts,
    # using the partial-fraction split 1/((w-pe)(w-pd)).
    J_at_e = float(spline(np.clip(wt_e.real, a, b)))
    J_at_d = float(spline(np.clip(wt_d.real, a, b)))
    pref = 1.0 / (wt_e - wt_d)
    phase = np.exp(-1j * np.outer(times, nodes))
    reg_e = weights * (Jq - J_at_e) / (nodes - wt_e)
    reg_d = weights * (Jq - J_at_d) / (nodes - wt_d)
    int_e = phase @ reg_e
    int_d = phase @ reg_d
    seg_e = np.array([_pole_segment(a, b, wt_e, t) for t in times])
    seg_d = np.array([_pole_segment(a, b, wt_d, t) for t in times])
    integral = pref * ((int_e + J_at_e * seg_e) - (int_d + J_at_d * seg_d))

    alpha_d = two_pole + integral
    mu = units.dipole_enm(mu_d)
    G1 = (gamma_d / (2 * mu)) ** 2 * np.abs(alpha_d) ** 2
    return WWResult(times=times, alpha_e=alpha_e, alpha_d=alpha_d, G1=G1,
                    delta=delta, r_ed_e=r_e, r_ed_d=r_d,
                    diagnostics=dict(window=(a, b), n_nodes=len(nodes),
                                     Jee_at=Jee_at))


def ww_convergence(table: ResponseTable, omega_e: float, detector,
                   deltas, times, reference_G1) -> dict:
    """Mean absolute G1 error per Delta, plus the r_ed truncation curve."""
    reference_G1 = np.asarray(reference_G1, float)
    errors = []
    r_vals = []
    for d in deltas:
        res = ww_solve(table, omega_e, detector, d, times)
        errors.append(float(np.mean(np.abs(res.G1 - reference_G1))))
        r_vals.append(res.r_ed_e)
    r_vals = np.array(r_vals)
    r_asym = r_vals[-1]
    return dict(deltas=np.asarray(deltas, float), errors=np.array(errors),
                r_ed=r_vals, r_asymptote=r_asym,
                r_distance=np.abs(r_vals.real - r_asym.real))
