"""Pure-numpy reference implementations of the hot kernels.

Same signatures as the numba backend; selected via PHOTONSTATS_NUMBA=0
(see accel.py). Multipole sums use mantissa/exponent-scaled Hankel
recurrences so near-field evaluations stay finite at large l.
"""
from __future__ import annotations

import math

import numpy as np

_RENORM = 2.0**-512
_E_STEP = 512
_BIG = 1e150


def hankel_scaled(rho: float, lmax: int):
    """Spherical Hankel h1_l(rho), l=0..lmax, as (mantissa, exponent base 2)."""
    hm = np.empty(lmax + 1, dtype=np.complex128)
    he = np.zeros(lmax + 1, dtype=np.int64)
    phase = np.exp(1j * rho)
    prev = -1j * phase / rho
    hm[0] = prev
    if lmax == 0:
        return hm, he
    cur = -phase * (1.0 + 1j / rho) / rho
    hm[1] = cur
    e = 0
    for l in range(1, lmax):
        nxt = (2 * l + 1) / rho * cur - prev
        prev, cur = cur, nxt
        if abs(cur.real) + abs(cur.imag) > _BIG:
            prev *= _RENORM
            cur *= _RENORM
            e += _E_STEP
        hm[l + 1] = cur
        he[l + 1] = e
        # keep the l-th entry on the exponent it was stored with; zeta needs
        # h_{l-1} relative to h_l, handled by exponent difference at use site
    return hm, he


def sphere_pair_sum(kr1, kr2, cosg, bte_m, bte_e, btm_m, btm_e, lmax):
    """Scattering dyadic Green sum in the canonical frame.

    Point 1 on the +z axis at radius kr1 (in k units), point 2 in the
    xz half-plane (phi=0) at radius kr2 and polar angle gamma. Returns
    (G 3x3 complex without the ik/4pi prefactor, truncation estimate).
    """
    h1m, h1e = hankel_scaled(kr1, lmax)
    h2m, h2e = hankel_scaled(kr2, lmax)
    cosg = min(1.0, max(-1.0, cosg))
    sing = math.sqrt(max(0.0, 1.0 - cosg * cosg))

    G = np.zeros((3, 3), dtype=np.complex128)
    P_prev, P = 1.0, cosg
    pi_prev, pi_l = 0.0, 1.0
    last_mag = 0.0
    for l in range(1, lmax + 1):
        if l > 1:
            P_new = ((2 * l - 1) * cosg * P - (l - 1) * P_prev) / l
            P_prev, P = P, P_new
            pi_new = ((2 * l - 1) / (l - 1)) * cosg * pi_l - (l / (l - 1)) * pi_prev
            pi_prev, pi_l = pi_l, pi_new
        tau1 = l * cosg * pi_l - (l + 1) * pi_prev
        tau0 = -sing * pi_l
        Pl1 = sing * pi_l

        e1d = int(h1e[l - 1] - h1e[l])
        e2d = int(h2e[l - 1] - h2e[l])
        z1 = h1m[l]
        z2 = h2m[l]
        zeta1 = h1m[l - 1] * math.ldexp(1.0, e1d) - l * z1 / kr1
        zeta2 = h2m[l - 1] * math.ldexp(1.0, e2d) - l * z2 / kr2

        ll1 = l * (l + 1)
        cl = (2 * l + 1) / ll1

        term = np.zeros((3, 3), dtype=np.complex128)
        # TE (M x M), m=1 only
        f = bte_m[l] * cl * z1 * z2
        term[1, 1] += f * tau1
        term[0, 0] += f * pi_l * cosg
        term[0, 2] += f * pi_l * (-sing)
        eTE = int(bte_e[l] + h1e[l] + h2e[l])
        if eTE != 0:
            term *= math.ldexp(1.0, eTE)
        termN = np.zeros((3, 3), dtype=np.complex128)
        # TM m=0: z_hat (x) [ll1*(z2/kr2)*P*er2 + zeta2*tau0*eth2]
        g0 = btm_m[l] * (2 * l + 1) * (z1 / kr1)
        termN[2, 0] += g0 * (ll1 * (z2 / kr2) * P * sing + zeta2 * tau0 * cosg)
        termN[2, 2] += g0 * (ll1 * (z2 / kr2) * P * cosg + zeta2 * tau0 * (-sing))
        # TM m=1
        g1 = btm_m[l] * cl * zeta1
        termN[0, 0] += g1 * (ll1 * (z2 / kr2) * Pl1 * sing + zeta2 * tau1 * cosg)
        termN[0, 2] += g1 * (ll1 * (z2 / kr2) * Pl1 * cosg + zeta2 * tau1 * (-sing))
        termN[1, 1] += g1 * zeta2 * pi_l
        eTM = int(btm_e[l] + h1e[l] + h2e[l])
        if eTM != 0:
            termN *= math.ldexp(1.0, eTM)
        term += termN
        G += term
        last_mag = float(np.abs(term).max())

    denom = float(np.abs(G).max())
    est = last_mag / denom if denom > 0.0 else 0.0
    return G, est


def far_pair_sum(kr0, cosg, bte_m, bte_e, btm_m, btm_e, lmax):
    """Far-field scattering amplitude sum, source on axis at kr0.

    Same geometry as sphere_pair_sum with point 2 sent to infinity along
    angle gamma; the outgoing factor e^{i k r}/r is stripped and radial
    functions are replaced by their asymptotics (extra 1/k carried by the
    caller). Returns the 3x3 canonical amplitude matrix G_c(r0, far).
    """
    h1m, h1e = hankel_scaled(kr0, lmax)
    cosg = min(1.0, max(-1.0, cosg))
    sing = math.sqrt(max(0.0, 1.0 - cosg * cosg))
    G = np.zeros((3, 3), dtype=np.complex128)
    P_prev, P = 1.0, cosg
    pi_prev, pi_l = 0.0, 1.0
    # (-i)^(l+1) tracked incrementally
    as_h = -1j  # value for l=0: (-i)^(0+1)
    for l in range(1, lmax + 1):
        if l > 1:
            P_new = ((2 * l - 1) * cosg * P - (l - 1) * P_prev) / l
            P_prev, P = P, P_new
            pi_new = ((2 * l - 1) / (l - 1)) * cosg * pi_l - (l / (l - 1)) * pi_prev
            pi_prev, pi_l = pi_l, pi_new
        tau1 = l * cosg * pi_l - (l + 1) * pi_prev
        tau0 = -sing * pi_l
        Pl1 = sing * pi_l
        as_h *= -1j          # (-i)^(l+1)
        as_zeta = as_h * 1j  # (-i)^l

        e1d = int(h1e[l - 1] - h1e[l])
        z1 = h1m[l]
        zeta1 = h1m[l - 1] * math.ldexp(1.0, e1d) - l * z1 / kr0
        ll1 = l * (l + 1)
        cl = (2 * l + 1) / ll1

        term = np.zeros((3, 3), dtype=np.complex128)
        f = bte_m[l] * math.ldexp(1.0, int(bte_e[l] + h1e[l])) * cl * z1 * as_h
        term[1, 1] += f * tau1
        term[0, 0] += f * pi_l * cosg
        term[0, 2] += f * pi_l * (-sing)
        # TM m=0: radial component at point 2 vanishes asymptotically
        g0 = btm_m[l] * math.ldexp(1.0, int(btm_e[l] + h1e[l])) * (2 * l + 1) * (z1 / kr0)
        term[2, 0] += g0 * (as_zeta * tau0 * cosg)
        term[2, 2] += g0 * (as_zeta * tau0 * (-sing))
        g1 = btm_m[l] * math.ldexp(1.0, int(btm_e[l] + h1e[l])) * cl * zeta1
        term[0, 0] += g1 * (as_zeta * tau1 * cosg)
        term[0, 2] += g1 * (as_zeta * tau1 * (-sing))
        term[1, 1] += g1 * as_zeta * pi_l
        G += term
    return G


def resolvent_rows(wgrid, Hm, LamT):
    """B(w) = Lam (Hm - w)^-1 for each w; returns (G, ns, nm) complex.

    Hm is complex symmetric; LamT has shape (nm, ns).
    """
    nm = Hm.shape[0]
    G = wgrid.shape[0]
    ns = LamT.shape[1]
    out = np.empty((G, ns, nm), dtype=np.complex128)
    try:
        p, V = np.linalg.eig(Hm)
        cond = np.linalg.cond(V)
    except np.linalg.LinAlgError:
        cond = np.inf
    if np.isfinite(cond) and cond < 1e8:
        Vinv = np.linalg.inv(V)
        LamV = LamT.T @ V                       # (ns, nm)
        z = 1.0 / (p[None, :] - wgrid[:, None])  # (G, nm)
        out[:] = np.einsum("sa,ga,am->gsm", LamV, z, Vinv, optimize=True)
        return out
    eye = np.eye(nm, dtype=np.complex128)
    for g in range(G):
        A = Hm - wgrid[g] * eye
        out[g] = np.linalg.solve(A, LamT).T
    return out
