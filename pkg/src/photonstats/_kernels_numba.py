"""Numba-jitted hot kernels (default backend; see accel.py).

Mirrors _kernels_numpy function-for-function. Keep the two in sync: the
parity test suite compares them on random inputs.
"""
from __future__ import annotations

import math

import numpy as np
from numba import njit

_RENORM = 2.0**-512
_E_STEP = 512
_BIG = 1e150


@njit(cache=True)
def hankel_scaled(rho, lmax):
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
        prev = cur
        cur = nxt
        if abs(cur.real) + abs(cur.imag) > _BIG:
            prev *= _RENORM
            cur *= _RENORM
            e += _E_STEP
        hm[l + 1] = cur
        he[l + 1] = e
    return hm, he


@njit(cache=True)
def sphere_pair_sum(kr1, kr2, cosg, bte_m, bte_e, btm_m, btm_e, lmax):
    h1m, h1e = hankel_scaled(kr1, lmax)
    h2m, h2e = hankel_scaled(kr2, lmax)
    if cosg > 1.0:
        cosg = 1.0
    if cosg < -1.0:
        cosg = -1.0
    sing = math.sqrt(max(0.0, 1.0 - cosg * cosg))

    G = np.zeros((3, 3), dtype=np.complex128)
    P_prev = 1.0
    P = cosg
    pi_prev = 0.0
    pi_l = 1.0
    last_mag = 0.0
    for l in range(1, lmax + 1):
        if l > 1:
            P_new = ((2 * l - 1) * cosg * P - (l - 1) * P_prev) / l
            P_prev = P
            P = P_new
            pi_new = ((2 * l - 1) / (l - 1)) * cosg * pi_l - (l / (l - 1)) * pi_prev
            pi_prev = pi_l
            pi_l = pi_new
        tau1 = l * cosg * pi_l - (l + 1) * pi_prev
        tau0 = -sing * pi_l
        Pl1 = sing * pi_l

        z1 = h1m[l]
        z2 = h2m[l]
        zeta1 = h1m[l - 1] * math.ldexp(1.0, int(h1e[l - 1] - h1e[l])) - l * z1 / kr1
        zeta2 = h2m[l - 1] * math.ldexp(1.0, int(h2e[l - 1] - h2e[l])) - l * z2 / kr2

        ll1 = l * (l + 1)
        cl = (2 * l + 1) / ll1

        term = np.zeros((3, 3), dtype=np.complex128)
        fTE = math.ldexp(1.0, int(bte_e[l] + h1e[l] + h2e[l]))
        f = bte_m[l] * cl * z1 * z2 * fTE
        term[1, 1] += f * tau1
        term[0, 0] += f * pi_l * cosg
        term[0, 2] += f * pi_l * (-sing)
        fTM = math.ldexp(1.0, int(btm_e[l] + h1e[l] + h2e[l]))
        g0 = btm_m[l] * (2 * l + 1) * (z1 / kr1) * fTM
        term[2, 0] += g0 * (ll1 * (z2 / kr2) * P * sing + zeta2 * tau0 * cosg)
        term[2, 2] += g0 * (ll1 * (z2 / kr2) * P * cosg + zeta2 * tau0 * (-sing))
        g1 = btm_m[l] * cl * zeta1 * fTM
        term[0, 0] += g1 * (ll1 * (z2 / kr2) * Pl1 * sing + zeta2 * tau1 * cosg)
        term[0, 2] += g1 * (ll1 * (z2 / kr2) * Pl1 * cosg + zeta2 * tau1 * (-sing))
        term[1, 1] += g1 * zeta2 * pi_l

        last_mag = 0.0
        for i in range(3):
            for j in range(3):
                G[i, j] += term[i, j]
                m = abs(term[i, j].real) + abs(term[i, j].imag)
                if m > last_mag:
                    last_mag = m

    denom = 0.0
    for i in range(3):
        for j in range(3):
            m = abs(G[i, j].real) + abs(G[i, j].imag)
            if m > denom:
                denom = m
    est = last_mag / denom if denom > 0.0 else 0.0
    return G, est


@njit(cache=True)
def far_pair_sum(kr0, cosg, bte_m, bte_e, btm_m, btm_e, lmax):
    h1m, h1e = hankel_scaled(kr0, lmax)
    if cosg > 1.0:
        cosg = 1.0
    if cosg < -1.0:
        cosg = -1.0
    sing = math.sqrt(max(0.0, 1.0 - cosg * cosg))
    G = np.zeros((3, 3), dtype=np.complex128)
    P_prev = 1.0
    P = cosg
    pi_prev = 0.0
    pi_l = 1.0
    as_h = -1j + 0j
    for l in range(1, lmax + 1):
        if l > 1:
            P_new = ((2 * l - 1) * cosg * P - (l - 1) * P_prev) / l
            P_prev = P
            P = P_new
            pi_new = ((2 * l - 1) / (l - 1)) * cosg * pi_l - (l / (l - 1)) * pi_prev
            pi_prev = pi_l
            pi_l = pi_new
        tau1 = l * cosg * pi_l - (l + 1) * pi_prev
        tau0 = -sing * pi_l
        as_h = as_h * (-1j)
        as_zeta = as_h * 1j

        z1 = h1m[l]
        zeta1 = h1m[l - 1] * math.ldexp(1.0, int(h1e[l - 1] - h1e[l])) - l * z1 / kr0
        ll1 = l * (l + 1)
        cl = (2 * l + 1) / ll1

        fTE = math.ldexp(1.0, int(bte_e[l] + h1e[l]))
        f = bte_m[l] * cl * z1 * as_h * fTE
        G[1, 1] += f * tau1
        G[0, 0] += f * pi_l * cosg
        G[0, 2] += f * pi_l * (-sing)
        fTM = math.ldexp(1.0, int(btm_e[l] + h1e[l]))
        g0 = btm_m[l] * (2 * l + 1) * (z1 / kr0) * fTM
        G[2, 0] += g0 * (as_zeta * tau0 * cosg)
        G[2, 2] += g0 * (as_zeta * tau0 * (-sing))
        g1 = btm_m[l] * cl * zeta1 * fTM
        G[0, 0] += g1 * (as_zeta * tau1 * cosg)
        G[0, 2] += g1 * (as_zeta * tau1 * (-sing))
        G[1, 1] += g1 * as_zeta * pi_l
    return G


@njit(cache=True)
def resolvent_rows(wgrid, Hm, LamT):
    nm = Hm.shape[0]
    G = wgrid.shape[0]
    ns = LamT.shape[1]
    out = np.empty((G, ns, nm), dtype=np.complex128)
    A = np.empty((nm, nm), dtype=np.complex128)
    for g in range(G):
        for i in range(nm):
            for j in range(nm):
                A[i, j] = Hm[i, j]
            A[i, i] = A[i, i] - wgrid[g]
        X = np.linalg.solve(A, LamT)
        for s in range(ns):
            for m in range(nm):
                out[g, s, m] = X[m, s]
    return out
