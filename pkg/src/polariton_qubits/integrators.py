"""Fixed-step integrators for driven linear ODEs  y' = M y + B p(t).

The coupled-mode equations used throughout are linear with a constant
matrix, so one fixed RK4 step is itself a linear map.  Diagonalising M turns
the step into a scalar recurrence per eigenmode,

    z[n+1] = A z[n] + h (c0 f(t_n) + ch f(t_n + h/2) + c1 f(t_n + h)),

which is evaluated with an IIR filter instead of a Python loop.  The result
is the RK4 solution (to round-off), not an approximation of it.  An exact
exponential propagator with linearly interpolated forcing is offered for
coarse-step calibration scans.
"""

from __future__ import annotations

from collections.abc import Callable, Sequence

import numpy as np
from scipy.signal import lfilter

from .errors import NumericalError

Drive = Callable[[np.ndarray], np.ndarray]
Observer = Callable[[np.ndarray, np.ndarray], None]

# eigenvector matrices worse than this fall back to a plain step loop
_COND_LIMIT = 1e8


def rk4_step(f, t: float, y: np.ndarray, h: float) -> np.ndarray:
    """One classical RK4 step of y' = f(t, y)."""
    k1 = f(t, y)
    k2 = f(t + h / 2, y + h / 2 * k1)
    k3 = f(t + h / 2, y + h / 2 * k2)
    k4 = f(t + h, y + h * k3)
    return y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)


def rk4_coefficients(lam: np.ndarray, h: float):
    """Scalar RK4 recurrence coefficients for z' = lam z + f(t).

    Returns ``(A, c0, ch, c1)`` with one RK4 step equal to
    ``A z + h (c0 f0 + ch fh + c1 f1)``.
    """
    lam = np.asarray(lam, dtype=complex)

    def step(y, f0, fh, f1):
        k1 = lam * y + f0
        k2 = lam * (y + h / 2 * k1) + fh
        k3 = lam * (y + h / 2 * k2) + fh
        k4 = lam * (y + h * k3) + f1
        return y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)

    return step(1, 0, 0, 0), step(0, 1, 0, 0) / h, step(0, 0, 1, 0) / h, step(0, 0, 0, 1) / h


def _phi12(z: np.ndarray):
    z = np.asarray(z, dtype=complex)
    small = np.abs(z) < 1e-3
    zs = np.where(small, 1.0, z)
    phi1 = np.where(small, 1 + z / 2 + z**2 / 6 + z**3 / 24, np.expm1(zs) / zs)
    phi2 = np.where(small, 0.5 + z / 6 + z**2 / 24 + z**3 / 120,
                    (np.expm1(zs) - zs) / zs**2)
    return phi1, phi2


def exponential_coefficients(lam: np.ndarray, h: float):
    """Exact propagator coefficients for z' = lam z + f(t), f linear on a step.

    Returns ``(A, b0, b1)`` with ``z1 = A z0 + b0 f0 + b1 f1``.
    """
    lam = np.asarray(lam, dtype=complex)
    phi1, phi2 = _phi12(lam * h)
    return np.exp(lam * h), h * (phi1 - phi2), h * phi2


def integrate_linear(M: np.ndarray, B: np.ndarray, drive: Drive, t0: float, n_steps: int,
                     h: float, y0: np.ndarray | None = None, method: str = "rk4",
                     chunk: int = 1 << 18, store_every: int | None = 1,
                     observers: Sequence[Observer] = ()):
    """Integrate y' = M y + B p(t) on the grid t0 + h·k, k = 0..n_steps.

    Parameters
    ----------
    M : (n, n) complex array
    B : (n, m) complex array mapping the m drive channels onto the state.
    drive : callable
        Vectorised ``p(t) -> (len(t), m)`` array.
    method : {"rk4", "exponential"}
    store_every : int or None
        Keep every k-th state; ``None`` keeps only the final state.
    observers : callables
        Called as ``obs(t, y)`` on consecutive chunks.  Chunks overlap by one
        sample so trapezoid sums over chunks equal the sum over the full grid.

    Returns
    -------
    times, states, y_final
        Stored samples (``states`` has shape (k, n)) and the last state.
    """
    M = np.asarray(M, dtype=complex)
    B = np.asarray(B, dtype=complex)
    n = M.shape[0]
    y = np.zeros(n, complex) if y0 is None else np.asarray(y0, dtype=complex).copy()
    if method not in ("rk4", "exponential"):
        raise ValueError(f"unknown method {method!r}")

    lam, V = np.linalg.eig(M)
    if np.linalg.cond(V) > _COND_LIMIT:
        if method != "rk4":
            raise NumericalError("exponential propagator needs a diagonalisable matrix")
        return _integrate_loop(M, B, drive, t0, n_steps, h, y, store_every, observers)
    Vinv = np.linalg.inv(V)
    Bm = Vinv @ B
    z = Vinv @ y
    if method == "rk4":
        A, c0, ch, c1 = rk4_coefficients(lam, h)
    else:
        A, b0, b1 = exponential_coefficients(lam, h)

    stored_t, stored_y = [], []
    if store_every:
        stored_t.append(np.array([t0]))
        stored_y.append(y[None, :])
    start = 0
    while start < n_steps:
        L = min(chunk, n_steps - start)
        k = start + np.arange(L + 1)
        t = t0 + h * k
        f = drive(t) @ Bm.T
        if method == "rk4":
            fh = drive(t[:-1] + h / 2) @ Bm.T
            g = h * (c0 * f[:-1] + ch * fh + c1 * f[1:])
        else:
            g = b0 * f[:-1] + b1 * f[1:]
        zc = np.empty((L + 1, n), complex)
        zc[0] = z
        for j in range(n):
            zc[1:, j], _ = lfilter([1.0], [1.0, -A[j]], g[:, j], zi=[A[j] * z[j]])
        z = zc[-1]
        yc = zc @ V.T
        if not np.all(np.isfinite(yc)):
            bad = int(np.argmax(~np.all(np.isfinite(yc), axis=1)))
            raise NumericalError("non-finite state", time=float(t[bad]))
        for obs in observers:
            obs(t, yc)
        if store_every:
            sel = (k[1:] % store_every) == 0
            stored_t.append(t[1:][sel])
            stored_y.append(yc[1:][sel])
        start += L
    y_final = V @ z
    if store_every:
        return np.concatenate(stored_t), np.concatenate(stored_y), y_final
    return np.empty(0), np.empty((0, n), complex), y_final


def _integrate_loop(M, B, drive, t0, n_steps, h, y, store_every, observers):
    def rhs(t, yy, p):
        return M @ yy + B @ p

    ts = [t0]
    ys = [y.copy()]
    for k in range(n_steps):
        t = t0 + h * k
        p = drive(np.array([t, t + h / 2, t + h]))
        k1 = rhs(t, y, p[0])
        k2 = rhs(t, y + h / 2 * k1, p[1])
        k3 = rhs(t, y + h / 2 * k2, p[1])
        k4 = rhs(t, y + h * k3, p[2])
        y = y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        if not np.all(np.isfinite(y)):
            raise NumericalError("non-finite state", time=t + h)
        ts.append(t0 + h * (k + 1))
        ys.append(y.copy())
    t_all = np.array(ts)
    y_all = np.array(ys)
    for obs in observers:
        obs(t_all, y_all)
    if store_every:
        return t_all[::store_every], y_all[::store_every], y
    return np.empty(0), np.empty((0, len(y)), complex), y
