"""Compiled inner loop for the four-branch gate evolution.

One pass advances the per-mode linear recurrence of all four spin
configurations and accumulates every phase and overlap integral, so the
long (10⁷–10⁸ step) gate pulses never materialise full trajectories.
"""

from __future__ import annotations

import numpy as np
from numba import njit

GAUSSIAN, FLAT_TOP = 0, 1


@njit(cache=True)
def _envelope(t, kind, F0, tau, tau_r):
    if kind == GAUSSIAN:
        return F0 * np.exp(-(t / tau) ** 2)
    edge = abs(t) - tau
    if edge <= 0.0:
        return F0
    return F0 * np.exp(-(edge / tau_r) ** 2)


@njit(cache=True)
def run_branches(A, c0, ch, c1, V, use_mid, t0, dt, n_steps,
                 kind, F0, tau, tau_r, drive_rate, U, vex, spins, Delta, g, hbar,
                 store_every, out_t, out_a):
    nc = 4
    geo = np.zeros((nc, 2))
    pop = np.zeros((nc, 2))
    drv = np.zeros((nc, 2))
    aa = np.zeros((nc, 2))
    tun = np.zeros(nc)
    peak = np.zeros((nc, 2))
    mincos = np.ones((nc, 2))
    pairs = np.zeros(6)
    # nonlinear combinations Σ_c s_c X_c per trap, s = (+1, -1, -1, +1):
    # 0 population, 1 spin-weighted population, 2 drive, 3 geometric, 4 trion
    nl = np.zeros((5, 2))
    nl_tun = 0.0
    x = np.zeros((5, nc, 2))
    xt = np.zeros(nc)
    z = np.zeros((nc, 2), dtype=np.complex128)
    a = np.zeros((nc, 2), dtype=np.complex128)
    a_prev = np.zeros((nc, 2), dtype=np.complex128)
    n_store = 0
    bad = -1
    p_prev = 0.0
    p_mid = 0.0
    p_next = _envelope(t0, kind, F0, tau, tau_r)
    for n in range(n_steps + 1):
        t = t0 + dt * n
        p_now = p_next
        if n > 0:
            # advance from sample n-1 (p_prev, p_mid) to n (p_now)
            for c in range(nc):
                for j in range(2):
                    z[c, j] = A[c, j] * z[c, j] + c0[c, j] * p_prev + ch[c, j] * p_mid + c1[c, j] * p_now
        for c in range(nc):
            a[c, 0] = z[c, 0] * V[c, 0, 0] + z[c, 1] * V[c, 0, 1]
            a[c, 1] = z[c, 0] * V[c, 1, 0] + z[c, 1] * V[c, 1, 1]
        w = dt if 0 < n < n_steps else 0.5 * dt
        f = drive_rate * p_now
        for c in range(nc):
            for k in range(2):
                ak = a[c, k]
                nk = ak.real * ak.real + ak.imag * ak.imag
                if not np.isfinite(nk):
                    bad = n
                if nk > peak[c, k]:
                    peak[c, k] = nk
                pop[c, k] += w * nk
                drv[c, k] += w * f * ak.imag
                x[0, c, k] = w * nk
                x[1, c, k] = w * nk * spins[c, k]
                x[2, c, k] = w * f * ak.imag
                x[3, c, k] = 0.0
                x[4, c, k] = 0.0
                if n > 0:
                    ap = a_prev[c, k]
                    inc = ap.imag * ak.real - ap.real * ak.imag
                    geo[c, k] += inc
                    x[3, c, k] = inc
                if spins[c, k] == 1 and g[k] != 0.0:
                    xd = Delta[k] - vex * nk
                    b = g[k] * g[k] * nk
                    r = np.sqrt(xd * xd + b)
                    if xd > 0.0:
                        gap = b / (r + xd)
                    else:
                        gap = r - xd
                    aa[c, k] += w * gap / (2.0 * hbar)
                    x[4, c, k] = w * gap / (2.0 * hbar)
                    cs = xd / r
                    if cs < mincos[c, k]:
                        mincos[c, k] = cs
            x01 = a[c, 0].real * a[c, 1].real + a[c, 0].imag * a[c, 1].imag
            tun[c] += w * 2.0 * x01
            xt[c] = w * 2.0 * x01
        for m in range(5):
            for k in range(2):
                nl[m, k] += (x[m, 0, k] - x[m, 1, k]) + (x[m, 3, k] - x[m, 2, k])
        nl_tun += (xt[0] - xt[1]) + (xt[3] - xt[2])
        q = 0
        for c1_ in range(nc):
            for c2_ in range(c1_ + 1, nc):
                s = 0.0
                for k in range(2):
                    d = a[c1_, k] - a[c2_, k]
                    s += d.real * d.real + d.imag * d.imag
                pairs[q] += w * s
                q += 1
        if bad >= 0:
            break
        if store_every > 0 and n % store_every == 0:
            out_t[n_store] = t
            for c in range(nc):
                out_a[n_store, c, 0] = a[c, 0]
                out_a[n_store, c, 1] = a[c, 1]
            n_store += 1
        for c in range(nc):
            a_prev[c, 0] = a[c, 0]
            a_prev[c, 1] = a[c, 1]
        if n < n_steps:
            p_prev = p_now
            if use_mid:
                p_mid = _envelope(t + 0.5 * dt, kind, F0, tau, tau_r)
            else:
                p_mid = 0.0
            p_next = _envelope(t0 + dt * (n + 1), kind, F0, tau, tau_r)
    return geo, pop, drv, aa, tun, peak, mincos, pairs, nl, nl_tun, n_store, bad
