"""Single-spin rotation switched on by a polariton-induced Zeeman shift.

A weak in-plane r.f. field is tuned to E_z − V_ex·N.  It only rotates the
spin while the trap holds N polaritons; otherwise it is detuned by V_ex·N.
Fluctuations of N dephase the spin at the dispersive measurement rate.
The spin is integrated in the lab frame (no rotating-wave approximation).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .constants import HBAR, MU_B
from .errors import ConfigurationError, ConsistencyError, DomainError, SearchError
from .lattice_dynamics import PulseEnvelope, TrapLattice, flat_top_pulse, integrate_lattice

SIGMA_X = np.array([[0, 1], [1, 0]], complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], complex)


@dataclass(frozen=True)
class RFDrive:
    """In-plane r.f. field B_x cos(ω_rf t/ħ + phase); ``omega_rf`` is ħω in meV."""

    B_x: float
    omega_rf: float
    phase: float = 0.0

    def __post_init__(self):
        if self.B_x < 0:
            raise DomainError("B_x must be non-negative")


@dataclass(frozen=True)
class RotationSpec:
    """Spin, trap and pump parameters of one rotation.

    Energies in meV (``V_ex`` too), ``N_target`` the plateau polariton
    number.  ``F0`` of the pulse is fixed from ``N_target`` by
    :func:`pump_amplitude` when ``pulse.F0`` is zero.
    """

    E_z: float = 20.0
    V_ex: float = 0.002
    N_target: float = 500.0
    pulse: PulseEnvelope = field(default_factory=lambda: flat_top_pulse(0.0, 200.0, 5.0))
    gamma: float = 0.027
    gamma_t: float = 0.0135
    delta: float = 6.0
    g_factor: float = 2.0
    extra_dephasing: float = 0.0  # ps⁻¹, e.g. nuclear T2*

    def __post_init__(self):
        if not self.gamma >= self.gamma_t >= 0:
            raise DomainError("need γ ≥ γ_t ≥ 0")
        if self.delta <= 0:
            raise DomainError("pump must be red detuned (δ > 0)")

    @property
    def plateau_shift(self) -> float:
        return self.V_ex * self.N_target

    def resonant_pulse(self) -> PulseEnvelope:
        if self.pulse.F0 > 0 or self.pulse.kind == "zero":
            return self.pulse
        F0 = pump_amplitude(self.N_target, self.delta, self.gamma, self.gamma_t)
        return PulseEnvelope(self.pulse.kind, F0, self.pulse.tau, self.pulse.tau_r)


@dataclass(frozen=True)
class SpinTrajectory:
    times: np.ndarray = field(repr=False)
    bloch: np.ndarray = field(repr=False)  # (n, 3) lab-frame ⟨σ_x⟩, ⟨σ_y⟩, ⟨σ_z⟩
    polaritons: np.ndarray = field(repr=False)
    omega_rf: float = 0.0

    @property
    def rho(self) -> np.ndarray:
        s = self.bloch
        r = np.empty((len(s), 2, 2), complex)
        r[:, 0, 0] = (1 + s[:, 2]) / 2
        r[:, 1, 1] = (1 - s[:, 2]) / 2
        r[:, 0, 1] = (s[:, 0] - 1j * s[:, 1]) / 2
        r[:, 1, 0] = (s[:, 0] + 1j * s[:, 1]) / 2
        return r

    @property
    def p_up(self) -> np.ndarray:
        return (1 + self.bloch[:, 2]) / 2

    @property
    def p_down(self) -> np.ndarray:
        return (1 - self.bloch[:, 2]) / 2

    def rotating_frame(self) -> np.ndarray:
        """Bloch vectors in the frame rotating with the r.f. carrier."""
        w = self.omega_rf / HBAR * self.times
        c, s = np.cos(w), np.sin(w)
        x, y, z = self.bloch.T
        return np.stack([c * x + s * y, -s * x + c * y, z], axis=1)

    def csv_rows(self):
        """Rows ``(t_ps, p_up, p_down, sx, sy, sz)``."""
        for t, s in zip(self.times, self.bloch):
            yield (t, (1 + s[2]) / 2, (1 - s[2]) / 2, s[0], s[1], s[2])


def zeeman_splitting(g_factor: float, B0: float) -> float:
    """E_z = g μ_B B0 in meV."""
    return g_factor * MU_B * B0


def resonance_rf(E_z: float, V_ex: float, N: float) -> float:
    """ħω_rf = E_z − V_ex·N that makes the loaded trap resonant."""
    w = E_z - V_ex * N
    if w <= 0:
        raise DomainError(f"no positive r.f. frequency: E_z − V_ex·N = {w:.4g} meV")
    return w


def fluctuation_dephasing_rate(V_ex: float, N, gamma: float, delta: float):
    """Γ_φ = 2χ²Nκ/(Δω² + κ²/4) with χ = V_ex/ħ, κ = γ/ħ, Δω = δ/ħ (ps⁻¹)."""
    if delta <= 0:
        raise DomainError("δ must be positive")
    chi, kappa, dw = V_ex / HBAR, gamma / HBAR, delta / HBAR
    return 2 * chi**2 * np.asarray(N) * kappa / (dw**2 + kappa**2 / 4)


def fluctuation_error(rate: float, duration: float) -> float:
    """Dephasing error probability ½(1 − e^{−2Γ_φ t}) of an equatorial state."""
    return float(-np.expm1(-2 * rate * duration) / 2)


def pump_amplitude(N: float, delta: float, gamma: float, gamma_t: float) -> float:
    """Pump flux amplitude (ps^-1/2) giving steady occupation N."""
    return float(np.sqrt(N * (delta**2 + gamma**2 / 4) / (HBAR * gamma_t)))


def steady_occupation(F0: float, delta: float, gamma: float, gamma_t: float) -> float:
    return float(HBAR * gamma_t * F0**2 / (delta**2 + gamma**2 / 4))


def pi_time_field(t_pi: float, g_factor: float = 2.0) -> float:
    """B_x (T) whose resonant linear drive gives a π rotation in ``t_pi`` ps."""
    return 2 * np.pi * HBAR / (g_factor * MU_B * t_pi)


def polariton_number(spec: RotationSpec, t0: float, n_steps: int, dt: float) -> np.ndarray:
    """Trap occupation on the grid t0 + dt·k, k = 0..n_steps."""
    lattice = TrapLattice((spec.delta,), (), spec.gamma, spec.gamma_t)
    traj = integrate_lattice(lattice, [spec.resonant_pulse()], (t0, t0 + n_steps * dt), dt)
    return traj.populations[:, 0]


@njit(cache=True)
def _rotate(s, th):
    # Rodrigues rotation of s by the rotation vector th
    a = np.sqrt(th[0] * th[0] + th[1] * th[1] + th[2] * th[2])
    if a == 0.0:
        return s
    k = th / a
    c, si = np.cos(a), np.sin(a)
    kxs = np.array([k[1] * s[2] - k[2] * s[1], k[2] * s[0] - k[0] * s[2], k[0] * s[1] - k[1] * s[0]])
    kds = k[0] * s[0] + k[1] * s[1] + k[2] * s[2]
    return s * c + kxs * si + k * kds * (1.0 - c)


@njit(cache=True)
def _bloch_magnus(s0, t0, dt, n_steps, E_z, V_ex, N_half, omega_x, omega_rf, phase,
                  dephase_half, hbar, store_every, out):
    # ds/dt = Ω(t) × s − 2Γ_φ (s_x, s_y, 0) with Ω = (ω_x cos(ω_rf t + φ), 0, ω_z(t)).
    # Fourth-order Magnus step at the two Gauss nodes (an exact rotation, so the
    # Bloch norm is kept to round-off), dephasing Strang-split around it.
    # N_half, dephase_half: sampled on the half-step grid (2 n_steps + 1)
    s = s0.copy()
    out[0] = s
    k_store = 1
    r3 = np.sqrt(3.0)
    nodes = (0.5 - r3 / 6.0, 0.5 + r3 / 6.0)
    v = np.zeros((2, 3))
    for n in range(n_steps):
        n0, nh, n1 = N_half[2 * n], N_half[2 * n + 1], N_half[2 * n + 2]
        for j in range(2):
            x = nodes[j]
            # quadratic interpolation of N through t, t + h/2, t + h
            nn = (n0 * (2 * x - 1) * (x - 1) + nh * 4 * x * (1 - x) + n1 * x * (2 * x - 1))
            t = t0 + dt * (n + x)
            v[j, 0] = omega_x * np.cos(omega_rf * t + phase)
            v[j, 1] = 0.0
            v[j, 2] = (E_z - V_ex * nn) / hbar
        cr = np.array([v[0, 1] * v[1, 2] - v[0, 2] * v[1, 1],
                       v[0, 2] * v[1, 0] - v[0, 0] * v[1, 2],
                       v[0, 0] * v[1, 1] - v[0, 1] * v[1, 0]])
        th = 0.5 * dt * (v[0] + v[1]) + (r3 / 12.0) * dt * dt * cr
        e0 = np.exp(-dt * dephase_half[2 * n])
        s[0] *= e0
        s[1] *= e0
        s = _rotate(s, th)
        e1 = np.exp(-dt * dephase_half[2 * n + 2])
        s[0] *= e1
        s[1] *= e1
        if (n + 1) % store_every == 0:
            out[k_store] = s
            k_store += 1
    return k_store, s


def evolve_single_qubit(spec: RotationSpec, rf: RFDrive, t_span: tuple[float, float],
                        dt: float = 0.005, rho0: np.ndarray | None = None,
                        store_every: int = 100) -> SpinTrajectory:
    """Lab-frame spin master equation driven by the r.f. field and N(t).

    H = ½(E_z − V_ex N(t))σ_z + ½ g μ_B B_x cos(ω_rf t/ħ + phase) σ_x, with
    pure dephasing Γ_φ(t) D[σ_z] (coherences decay at 2Γ_φ).
    """
    w_max = max(spec.E_z, rf.omega_rf)
    if dt * w_max / HBAR >= 0.1:
        raise ConfigurationError(f"dt={dt} ps does not resolve the Larmor/r.f. period", key="dt")
    t0, t1 = t_span
    n_steps = int(round((t1 - t0) / dt))
    N_half = polariton_number(spec, t0, 2 * n_steps, dt / 2)
    deph = fluctuation_dephasing_rate(spec.V_ex, N_half, spec.gamma, spec.delta) + spec.extra_dephasing
    if rho0 is None:
        rho0 = np.array([[1, 0], [0, 0]], complex)
    s0 = np.real([np.trace(rho0 @ SIGMA_X), np.trace(rho0 @ SIGMA_Y), np.trace(rho0 @ SIGMA_Z)])
    omega_x = spec.g_factor * MU_B * rf.B_x / HBAR
    store_every = max(1, min(store_every, n_steps))
    out = np.empty((n_steps // store_every + 1, 3))
    kept, final = _bloch_magnus(s0.astype(float), float(t0), float(dt), n_steps, spec.E_z, spec.V_ex,
                      N_half, omega_x, rf.omega_rf / HBAR, rf.phase, deph, HBAR, store_every, out)
    times = t0 + dt * store_every * np.arange(kept)
    bloch, pols = out[:kept], N_half[::2 * store_every][:kept]
    if n_steps % store_every:
        times = np.append(times, t0 + dt * n_steps)
        bloch = np.vstack([bloch, final])
        pols = np.append(pols, N_half[-1])
    return SpinTrajectory(times, bloch, pols, rf.omega_rf)


def check_spin_state(rho: np.ndarray, tol: float = 1e-12) -> None:
    if abs(np.trace(rho) - 1) > tol or np.abs(rho - rho.conj().T).max() > tol:
        raise ConsistencyError("density matrix is not a unit-trace Hermitian matrix")
    if np.linalg.eigvalsh(rho).min() < -tol:
        raise ConsistencyError("density matrix has a negative eigenvalue")


def rotation_fidelity(rho: np.ndarray, target: np.ndarray,
                      compensate_z: bool = True) -> tuple[float, float]:
    """⟨ψ|ρ|ψ⟩ against a pure target, optionally after the best Z rotation.

    Returns ``(fidelity, z_phase)``; ``z_phase`` is the rotation removed.
    """
    rho = np.asarray(rho, dtype=complex)
    check_spin_state(rho, 1e-9)
    psi = np.asarray(target, dtype=complex)
    psi = psi / np.linalg.norm(psi)
    z_phase = 0.0
    if compensate_z:
        # ⟨ψ|Rz ρ Rz†|ψ⟩ = diag part + 2 Re(ψ0* ψ1 ρ10 e^{-iφ}); maximise over φ
        z_phase = float(np.angle(np.conj(psi[0]) * psi[1] * rho[1, 0]))
    rz = np.diag([np.exp(1j * z_phase / 2), np.exp(-1j * z_phase / 2)])
    r = rz @ rho @ rz.conj().T
    return float(np.real(np.conj(psi) @ r @ psi)), z_phase


def rotating_frame_rho(traj: SpinTrajectory) -> np.ndarray:
    s = traj.rotating_frame()
    return SpinTrajectory(traj.times, s, traj.polaritons).rho


def default_span(spec: RotationSpec, margin: float = 60.0) -> tuple[float, float]:
    half = spec.pulse.tau + 5 * spec.pulse.tau_r + margin
    return (-half, half)


def _rotation_angle(spec, B_x, omega_rf, t_span, dt) -> float:
    traj = evolve_single_qubit(spec, RFDrive(B_x, omega_rf), t_span, dt, store_every=10**9)
    sx, sy, sz = traj.rotating_frame()[-1]
    return float(np.arctan2(-sy, sz) % (2 * np.pi))


def calibrate_pi_field(spec: RotationSpec, omega_rf: float, t_span: tuple[float, float],
                       dt: float = 0.002, t_pi: float = 420.0, tol: float = 1e-6,
                       max_iter: int = 8) -> float:
    """B_x giving an exact π rotation of |½⟩ over the actual N(t) profile.

    Starts from the ideal-Rabi field for ``t_pi`` and refines by secant
    iteration on the accumulated rotation angle.
    """
    b0 = pi_time_field(t_pi, spec.g_factor)
    th0 = _rotation_angle(spec, b0, omega_rf, t_span, dt)
    b1 = b0 * np.pi / th0
    for _ in range(max_iter):
        th1 = _rotation_angle(spec, b1, omega_rf, t_span, dt)
        if abs(th1 - np.pi) < tol:
            return float(b1)
        b0, th0, b1 = b1, th1, b1 + (np.pi - th1) * (b1 - b0) / (th1 - th0)
    raise SearchError("π-field calibration did not converge", bounds=(b0, b1))


@dataclass(frozen=True)
class RotationResult:
    B_x: float
    B_x_ideal_rabi: float
    omega_rf: float
    fidelity: float
    z_phase: float
    fluctuation_error: float
    peak_transfer: float
    peak_time: float
    half_transfer_time: float
    trajectory: SpinTrajectory = field(repr=False)

    def as_dict(self) -> dict:
        return {k: getattr(self, k) for k in (
            "B_x", "B_x_ideal_rabi", "omega_rf", "fidelity", "z_phase",
            "fluctuation_error", "peak_transfer", "peak_time", "half_transfer_time")}


def pi_rotation(spec: RotationSpec, dt: float = 0.002, t_pi: float = 420.0,
                t_span: tuple[float, float] | None = None,
                store_every: int = 250) -> RotationResult:
    """Calibrated π rotation about x.

    Transfer times are measured from the pulse start (t = −τ); the fidelity
    is for (|½⟩+|−½⟩)/√2, which an x rotation by π leaves unchanged.
    """
    t_span = default_span(spec) if t_span is None else t_span
    w_rf = resonance_rf(spec.E_z, spec.V_ex, spec.N_target)
    B_x = calibrate_pi_field(spec, w_rf, t_span, dt, t_pi)
    rf = RFDrive(B_x, w_rf)
    flip = evolve_single_qubit(spec, rf, t_span, dt, store_every=store_every)
    plus = np.array([1, 1]) / np.sqrt(2)
    sup = evolve_single_qubit(spec, rf, t_span, dt, rho0=np.outer(plus, plus), store_every=10**9)
    fid, z_phase = rotation_fidelity(rotating_frame_rho(sup)[-1], plus)
    start = -spec.pulse.tau
    p = flip.p_down
    k = int(np.argmax(p))
    half = flip.times[int(np.argmax(p > 0.5))] - start
    rate = fluctuation_dephasing_rate(spec.V_ex, spec.N_target, spec.gamma, spec.delta)
    return RotationResult(B_x, pi_time_field(t_pi, spec.g_factor), w_rf, fid, z_phase,
                          fluctuation_error(float(rate), t_pi), float(p[k]),
                          float(flip.times[k] - start), float(half), flip)


def axis_swap_error(spec: RotationSpec, rf: RFDrive, t_span: tuple[float, float],
                    dt: float = 0.002, store_every: int = 250) -> float:
    """Largest deviation from x/y exchange when the r.f. phase is advanced by π/2.

    Starting from |½⟩, an x rotation at phase φ and a y rotation at φ + π/2
    must satisfy ⟨σ_x⟩_φ = ⟨σ_y⟩_{φ+π/2}, ⟨σ_y⟩_φ = −⟨σ_x⟩_{φ+π/2} and equal
    ⟨σ_z⟩ in the rotating frame, at every stored time.
    """
    a = evolve_single_qubit(spec, rf, t_span, dt, store_every=store_every).rotating_frame()
    shifted = RFDrive(rf.B_x, rf.omega_rf, rf.phase + np.pi / 2)
    b = evolve_single_qubit(spec, shifted, t_span, dt, store_every=store_every).rotating_frame()
    return float(max(np.abs(a[:, 0] - b[:, 1]).max(), np.abs(a[:, 1] + b[:, 0]).max(),
                     np.abs(a[:, 2] - b[:, 2]).max()))
