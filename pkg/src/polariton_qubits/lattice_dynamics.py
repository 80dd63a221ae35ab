"""Driven-dissipative coupled-mode dynamics of polariton traps.

Each trap j holds a coherent amplitude α_j obeying

    dα_j/dt = √(γ_t/ħ) F_j(t) − (iδ_j + γ/2)/ħ · α_j − (i/ħ) Σ_k U_jk α_k

with energies in meV and times in ps.  Neighbouring traps can be kept empty
by pumping them with a π/2-shifted copy of the target pump that destructively
interferes with the tunnelling path.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .constants import HBAR, JOULE_PER_MEV, CONSTANTS
from .errors import ConfigurationError, DomainError, SingularityError
from .integrators import integrate_linear


@dataclass(frozen=True)
class TrapLattice:
    """Graph of trap modes.

    ``couplings`` lists each undirected pair once as ``(i, j, U)``.
    """

    detunings: tuple[float, ...]
    couplings: tuple[tuple[int, int, float], ...]
    gamma: float
    gamma_t: float
    shape: tuple[int, int] | None = None

    def __post_init__(self):
        n = len(self.detunings)
        if not self.gamma >= self.gamma_t >= 0:
            raise DomainError("need γ ≥ γ_t ≥ 0")
        seen = set()
        for i, j, _ in self.couplings:
            if i == j:
                raise DomainError("self-coupling in adjacency")
            if not (0 <= i < n and 0 <= j < n):
                raise DomainError(f"coupling ({i}, {j}) outside lattice of {n} traps")
            key = (min(i, j), max(i, j))
            if key in seen:
                raise DomainError(f"duplicate coupling {key}")
            seen.add(key)

    @property
    def n_traps(self) -> int:
        return len(self.detunings)

    def coupling_matrix(self) -> np.ndarray:
        U = np.zeros((self.n_traps, self.n_traps))
        for i, j, u in self.couplings:
            U[i, j] = U[j, i] = u
        return U

    def neighbours(self, j: int) -> list[int]:
        out = [b for a, b, _ in self.couplings if a == j] + [a for a, b, _ in self.couplings if b == j]
        return sorted(out)

    def rate_matrix(self) -> np.ndarray:
        """Matrix M of dα/dt = M α + drive, in ps⁻¹."""
        d = np.asarray(self.detunings, dtype=float)
        return (np.diag(-1j * d - self.gamma / 2) - 1j * self.coupling_matrix()) / HBAR


def square_lattice(nx: int, ny: int, U: float, delta: float, gamma: float,
                   gamma_t: float) -> TrapLattice:
    """nx × ny traps with nearest-neighbour coupling U, row-major indexing."""
    couplings = []
    for r in range(ny):
        for c in range(nx):
            j = r * nx + c
            if c + 1 < nx:
                couplings.append((j, j + 1, U))
            if r + 1 < ny:
                couplings.append((j, j + nx, U))
    return TrapLattice(tuple([delta] * (nx * ny)), tuple(couplings), gamma, gamma_t, (nx, ny))


@dataclass(frozen=True)
class PulseEnvelope:
    """Pump amplitude F(t) in ps^-1/2.

    kinds: ``flat_top`` (Gaussian edges of width τ_r outside [−τ, τ]),
    ``gaussian`` (F0 e^{−t²/τ²}), ``constant`` and ``zero``.
    """

    kind: str = "zero"
    F0: float = 0.0
    tau: float = 1.0
    tau_r: float = 1.0
    scale: complex = 1.0

    def __post_init__(self):
        if self.kind not in ("flat_top", "gaussian", "constant", "zero"):
            raise DomainError(f"unknown pulse kind {self.kind!r}")
        if self.F0 < 0:
            raise DomainError("F0 must be non-negative")
        if self.tau <= 0 or self.tau_r <= 0:
            raise DomainError("τ and τ_r must be positive")

    def shape(self, t: np.ndarray) -> np.ndarray:
        """Real envelope without the complex scale factor."""
        t = np.asarray(t, dtype=float)
        if self.kind == "zero":
            return np.zeros_like(t)
        if self.kind == "constant":
            return np.full_like(t, self.F0)
        if self.kind == "gaussian":
            return self.F0 * np.exp(-(t / self.tau) ** 2)
        edge = np.clip(np.abs(t) - self.tau, 0.0, None)
        return self.F0 * np.exp(-(edge / self.tau_r) ** 2)

    def __call__(self, t: np.ndarray) -> np.ndarray:
        return self.scale * self.shape(t)

    def scaled(self, factor: complex) -> "PulseEnvelope":
        return PulseEnvelope(self.kind, self.F0, self.tau, self.tau_r, self.scale * factor)


def flat_top_pulse(F0: float, tau: float, tau_r: float) -> PulseEnvelope:
    return PulseEnvelope("flat_top", F0, tau, tau_r)


def gaussian_pulse(P0: float, tau: float) -> PulseEnvelope:
    return PulseEnvelope("gaussian", P0, tau)


def power_to_flux(power_W: float, wavelength_um: float) -> float:
    """Photon flux (ps⁻¹) carried by ``power_W`` watts at the given wavelength."""
    if wavelength_um <= 0:
        raise DomainError("wavelength must be positive")
    if power_W < 0:
        raise DomainError("power must be non-negative")
    photon_J = CONSTANTS.hc / wavelength_um * JOULE_PER_MEV
    return power_W / photon_J * 1e-12


@dataclass(frozen=True)
class AmplitudeTrajectory:
    times: np.ndarray = field(repr=False)
    amplitudes: np.ndarray = field(repr=False)

    def __post_init__(self):
        if not np.all(np.isfinite(self.amplitudes)):
            raise DomainError("non-finite amplitudes")

    @property
    def populations(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    @property
    def dt(self) -> float:
        return float(self.times[1] - self.times[0])

    def csv_rows(self):
        """Rows ``(t_ps, trap_index, re_alpha, im_alpha, population)``."""
        pops = self.populations
        for k, t in enumerate(self.times):
            for j in range(self.amplitudes.shape[1]):
                a = self.amplitudes[k, j]
                yield (t, j, a.real, a.imag, pops[k, j])


@dataclass(frozen=True)
class DensityGuard:
    """Low-density check n·a_B² ≤ limit with n the peak areal density."""

    a_B: float = 0.01
    area: float = 2.2619
    limit: float = 0.01

    def value(self, traj: AmplitudeTrajectory) -> float:
        return float(traj.populations.max() / self.area * self.a_B**2)

    def check(self, traj: AmplitudeTrajectory) -> bool:
        v = self.value(traj)
        if v > self.limit:
            warnings.warn(f"polariton density n·a_B² = {v:.3g} exceeds {self.limit}",
                          RuntimeWarning, stacklevel=2)
            return False
        return True


def check_step(dt: float, energies: Sequence[float]) -> None:
    emax = max(abs(e) for e in energies)
    if dt * emax / HBAR >= 0.1:
        raise ConfigurationError(
            f"dt={dt} ps too large: dt·max|E|/ħ = {dt * emax / HBAR:.3g} ≥ 0.1", key="dt")


def integrate_lattice(lattice: TrapLattice, pumps: Sequence[PulseEnvelope | None],
                      t_span: tuple[float, float], dt: float = 0.01,
                      y0: np.ndarray | None = None, store_every: int = 1) -> AmplitudeTrajectory:
    """Fixed-step RK4 solution of the coupled-mode equations."""
    n = lattice.n_traps
    if len(pumps) != n:
        raise DomainError(f"expected {n} pumps, got {len(pumps)}")
    umax = max((abs(u) for _, _, u in lattice.couplings), default=0.0)
    check_step(dt, list(lattice.detunings) + [umax, lattice.gamma])
    t0, t1 = t_span
    n_steps = int(round((t1 - t0) / dt))
    active = [(j, p) for j, p in enumerate(pumps) if p is not None and p.kind != "zero"]

    def drive(t):
        out = np.zeros((len(t), max(len(active), 1)), complex)
        for c, (_, p) in enumerate(active):
            out[:, c] = p(t)
        return out

    B = np.zeros((n, max(len(active), 1)), complex)
    for c, (j, _) in enumerate(active):
        B[j, c] = np.sqrt(lattice.gamma_t / HBAR)
    times, states, _ = integrate_linear(lattice.rate_matrix(), B, drive, t0, n_steps, dt,
                                        y0=y0, store_every=store_every)
    return AmplitudeTrajectory(times, states)


def steady_state(lattice: TrapLattice, pumps: Sequence[complex]) -> np.ndarray:
    """Exact stationary amplitudes for constant complex pump fluxes."""
    M = lattice.rate_matrix()
    f = np.sqrt(lattice.gamma_t / HBAR) * np.asarray(pumps, dtype=complex)
    if lattice.gamma <= 0 and np.linalg.cond(M) > 1e14:
        raise SingularityError("undamped resonant lattice has no steady state")
    return np.linalg.solve(M, -f)


def cancellation_pump(F_T: complex, U: float, delta: float, gamma: float) -> complex:
    """Neighbour pump iF_T·U/(iδ + γ/2) that cancels tunnelling from the target."""
    if delta == 0 and gamma == 0:
        raise SingularityError("cancellation pump needs γ > 0 or δ ≠ 0")
    return 1j * F_T * U / (1j * delta + gamma / 2)


def cancellation_pumps(lattice: TrapLattice, target: int, pulse: PulseEnvelope,
                       compensate: bool = True) -> list[PulseEnvelope | None]:
    """Target pump plus π/2-shifted pumps on its nearest neighbours."""
    pumps: list[PulseEnvelope | None] = [None] * lattice.n_traps
    pumps[target] = pulse
    if compensate:
        U = lattice.coupling_matrix()
        for j in lattice.neighbours(target):
            c = cancellation_pump(1.0, U[target, j], lattice.detunings[j], lattice.gamma)
            pumps[j] = pulse.scaled(c)
    return pumps


def plateau_ratio(traj: AmplitudeTrajectory, target: int, window: tuple[float, float]) -> float:
    """Largest Σ_{i≠T}|α_i|²/|α_T|² inside the time window."""
    sel = (traj.times >= window[0]) & (traj.times <= window[1])
    pops = traj.populations[sel]
    others = pops.sum(axis=1) - pops[:, target]
    return float(np.max(others / pops[:, target]))


@dataclass(frozen=True)
class CrosstalkError:
    """Neighbour-qubit error after a pumping sequence.

    ``phase`` is the summed conditional phase between the two neighbour spin
    states; ``decay`` the summed which-path exponent.
    """

    total: float
    phase_error: float
    dephasing_error: float
    phase: float
    decay: float


def crosstalk_dephasing(neighbour_populations: np.ndarray, dt: float, V_ex: float,
                        gamma: float, detuning: float) -> CrosstalkError:
    """Error imprinted on neighbour spins by stray polaritons.

    Parameters
    ----------
    neighbour_populations : array (n_t,) or (n_t, n_neighbours)
        |α_i(t)|² on a uniform grid of step ``dt`` (ps).
    V_ex : float
        Exchange energy (meV).
    gamma, detuning : float
        Neighbour LP linewidth and detuning (meV); set the which-path weight.

    Each neighbour spin picks up a conditional phase (2V_ex/ħ)∫|α_i|²dt and
    loses coherence through photons leaking out carrying which-spin
    information: the spin shifts the mode by ±V_ex, so the two conditional
    fields differ by |Δα|² = 4V_ex²|α|²/(δ² + γ²/4).  Errors are reported
    against the GHZ state of the neighbours; the phase and decay parts are
    combined into a monotone upper bound on 1 − F.
    """
    pops = np.asarray(neighbour_populations, dtype=float)
    if pops.ndim == 1:
        pops = pops[:, None]
    if not np.all(np.isfinite(pops)):
        raise DomainError("non-finite neighbour populations")
    integral = float(np.trapezoid(pops, dx=dt, axis=0).sum())
    phase = 2 * V_ex / HBAR * integral
    decay = gamma / (2 * HBAR) * 4 * V_ex**2 / (detuning**2 + gamma**2 / 4) * integral
    p_phase = float(np.sin(min(phase, np.pi) / 2) ** 2)
    p_deph = float(-np.expm1(-decay) / 2)
    total = 1 - (1 - p_phase) * (1 - p_deph)
    return CrosstalkError(total, p_phase, p_deph, phase, decay)
