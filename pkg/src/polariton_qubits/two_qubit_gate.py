"""Controlled-Z gate between two dot spins mediated by trapped polaritons.

Each dot spin shifts the polariton mode of its own trap by ±V_ex.  A pump
pulse drives coherent states in both (tunnel-coupled) traps, and each of
the four spin configurations acquires its own phase.  The part of those
phases that is not a sum of single-spin terms,

    Θ = φ(↑↑) + φ(↓↓) − φ(↑↓) − φ(↓↑),

is the entangling phase; Θ = π is a controlled-Z up to local Z rotations.
Photon loss leaks which-configuration information and is charged through
pairwise decoherence factors.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from itertools import combinations

import numpy as np
from scipy.optimize import brentq

from ._branch_kernel import FLAT_TOP, GAUSSIAN, run_branches
from .constants import HBAR
from .errors import ConsistencyError, DomainError, NumericalError, SearchError, SingularityError
from .integrators import exponential_coefficients, rk4_coefficients
from .lattice_dynamics import PulseEnvelope, check_step, gaussian_pulse, power_to_flux

# (σ_ℓ, σ_r) spin configurations, Pauli convention
CONFIGS = ((1, 1), (1, -1), (-1, 1), (-1, -1))
TRION_OFFSET = 20.0  # meV, LP resonance above the dot trion line


@dataclass(frozen=True)
class GateParams:
    """Two-trap gate parameters.  Energies in meV except ``V_ex`` (µeV)."""

    V_ex: float = 2.0
    U: float = 0.5
    delta_l: float = 10.0
    delta_r: float = 10.0
    Delta_l: float = 10.0
    Delta_r: float = 10.0
    g_l: float = 0.04
    g_r: float = 0.04
    t0: float = 2**-0.5
    gamma: float = 0.012
    gamma_t: float = 0.01
    Q: float = 76_000.0

    def __post_init__(self):
        if not self.gamma >= self.gamma_t >= 0:
            raise DomainError("need γ ≥ γ_t ≥ 0")

    @property
    def V_ex_meV(self) -> float:
        return self.V_ex * 1e-3

    def with_detuning(self, delta: float, trion_offset: float = TRION_OFFSET) -> "GateParams":
        """Same device pumped at a new detuning; trion detunings follow."""
        return replace(self, delta_l=delta, delta_r=delta,
                       Delta_l=trion_offset - delta, Delta_r=trion_offset - delta)

    @property
    def symmetric(self) -> bool:
        return (self.delta_l == self.delta_r and self.Delta_l == self.Delta_r
                and self.g_l == self.g_r)


def gate_params(delta: float, V_ex: float = 2.0, U: float = 0.5, g: float = 0.04,
                gamma: float = 0.012, gamma_t: float = 0.01, t0: float = 2**-0.5,
                Q: float = 76_000.0, trion_offset: float = TRION_OFFSET) -> GateParams:
    """Symmetric two-trap parameters with trion detuning Δ = offset − δ."""
    return GateParams(V_ex, U, delta, delta, trion_offset - delta, trion_offset - delta,
                      g, g, t0, gamma, gamma_t, Q)


@dataclass
class BranchTrajectory:
    """Coherent amplitudes and phase integrals of one spin configuration.

    Phases are per trap (index 0 = ℓ, 1 = r).  ``phi_g`` is Im∫α dα* in the
    interaction picture of the linear branch Hamiltonian plus ``phi_aa``;
    ``phi_d`` is the drive-term dynamic phase in the same frame.
    """

    spins: tuple[int, int]
    times: np.ndarray = field(repr=False)
    alpha: np.ndarray = field(repr=False)
    phi_g: np.ndarray
    phi_d: np.ndarray
    phi_aa: np.ndarray
    population_integral: np.ndarray
    peak_population: np.ndarray
    min_cos_theta: np.ndarray

    @property
    def s(self) -> int:
        return (self.spins[0] + self.spins[1]) // 2

    @property
    def phase(self) -> float:
        return float(self.phi_g.sum() + self.phi_d.sum())


@dataclass
class BranchSet:
    """All four spin configurations evolved under one pulse."""

    params: GateParams
    pulse: PulseEnvelope
    dt: float
    branches: dict
    overlap_integrals: dict  # (c1, c2) -> Σ_traps ∫|α^c1 − α^c2|² dt
    theta_g: float = 0.0
    theta_d: float = 0.0
    theta_aa: float = 0.0

    def three(self) -> tuple[BranchTrajectory, BranchTrajectory, BranchTrajectory]:
        """Branches s = +1, 0, −1 (s = 0 taken as ℓ up, r down)."""
        b = self.branches
        return b[(1, 1)], b[(1, -1)], b[(-1, -1)]

    def decoherence_exponents(self) -> np.ndarray:
        E = np.zeros((4, 4))
        for (i, ci), (j, cj) in combinations(enumerate(CONFIGS), 2):
            E[i, j] = E[j, i] = self.overlap_integrals[(ci, cj)]
        return E


def _branch_matrix(p: GateParams, spins) -> np.ndarray:
    v = p.V_ex_meV
    return np.array([[-1j * (p.delta_l + v * spins[0]) - p.gamma / 2, 1j * p.U],
                     [1j * p.U, -1j * (p.delta_r + v * spins[1]) - p.gamma / 2]]) / HBAR


def _pulse_window(pulse: PulseEnvelope, window: float) -> tuple[float, float]:
    if pulse.kind == "gaussian":
        return -window * pulse.tau, window * pulse.tau
    if pulse.kind == "flat_top":
        return -pulse.tau - window * pulse.tau_r, pulse.tau + window * pulse.tau_r
    raise DomainError("gate pulses must be gaussian or flat_top")


def evolve_branches(params: GateParams, pulse: PulseEnvelope,
                    t_span: tuple[float, float] | None = None, dt: float = 0.005,
                    method: str = "rk4", window: float = 3.0, max_stored: int = 4000) -> BranchSet:
    """Evolve the four spin configurations under one pump pulse.

    dα_ℓ/dt = √(γ_t/ħ)P(t) + (iU/ħ)α_r − (i(δ_ℓ + V_ex σ_ℓ) + γ/2)/ħ · α_ℓ
    and the mirrored r equation, starting from vacuum.  ``method="rk4"``
    is fixed-step RK4; ``"exponential"`` is the exact propagator for
    piecewise-linear drive, used for coarse calibration scans.
    """
    if method == "rk4":
        v = params.V_ex_meV
        check_step(dt, [abs(params.delta_l) + abs(v), abs(params.delta_r) + abs(v),
                        params.U, params.gamma])
    if t_span is None:
        t_span = _pulse_window(pulse, window)
    t0, t1 = t_span
    n_steps = int(round((t1 - t0) / dt))
    store_every = max(1, -(-n_steps // max_stored)) if max_stored else 0

    A = np.empty((4, 2), complex)
    c0 = np.empty((4, 2), complex)
    ch = np.zeros((4, 2), complex)
    c1 = np.empty((4, 2), complex)
    Vs = np.empty((4, 2, 2), complex)
    for c, spins in enumerate(CONFIGS):
        lam, V = np.linalg.eig(_branch_matrix(params, spins))
        if np.linalg.cond(V) > 1e8:
            raise NumericalError("branch matrix is not safely diagonalisable")
        b = np.linalg.inv(V) @ np.full(2, np.sqrt(params.gamma_t / HBAR))
        if method == "rk4":
            A[c], k0, kh, k1 = rk4_coefficients(lam, dt)
            c0[c], ch[c], c1[c] = dt * b * k0, dt * b * kh, dt * b * k1
        elif method == "exponential":
            A[c], k0, k1 = exponential_coefficients(lam, dt)
            c0[c], c1[c] = b * k0, b * k1
        else:
            raise ValueError(f"unknown method {method!r}")
        Vs[c] = V
    kind = {"gaussian": GAUSSIAN, "flat_top": FLAT_TOP}.get(pulse.kind)
    if kind is None or pulse.scale != 1:
        raise DomainError("gate pulses must be real gaussian or flat_top envelopes")
    n_store = n_steps // store_every + 1 if store_every else 0
    out_t = np.empty(n_store)
    out_a = np.empty((n_store, 4, 2), complex)
    spins = np.array(CONFIGS, dtype=np.int64)
    *acc, n_kept, bad = run_branches(
        A, c0, ch, c1, Vs, method == "rk4", float(t0), float(dt), n_steps,
        kind, float(pulse.F0), float(pulse.tau), float(pulse.tau_r),
        float(np.sqrt(params.gamma_t / HBAR)), float(params.U), float(params.V_ex_meV), spins,
        np.array([params.Delta_l, params.Delta_r], float),
        np.array([params.g_l, params.g_r], float), HBAR, store_every, out_t, out_a)
    if bad >= 0:
        raise NumericalError("non-finite branch amplitude", time=float(t0 + dt * bad))
    return _assemble(params, pulse, dt, acc, out_t[:n_kept], out_a[:n_kept])


def _assemble(p: GateParams, pulse: PulseEnvelope, dt: float, acc, times, alphas) -> BranchSet:
    geo, pop_all, drv, aa, tun, peak, mincos, pairs, nl, nl_tun = acc
    bare = np.array([p.delta_l, p.delta_r])
    branches = {}
    for c, spins in enumerate(CONFIGS):
        shift = p.V_ex_meV * np.asarray(spins, dtype=float)
        pop = pop_all[c]
        # Im∫α dα* in the interaction picture of the linear branch Hamiltonian:
        # the detuning and tunnelling expectations move from the dynamic
        # phase into the geometric one, leaving -∫<drive>/ħ as the dynamic phase
        quad = -(shift * pop) / HBAR + p.U * tun[c] / (2 * HBAR)
        phi_geo = geo[c] - bare / HBAR * pop + quad
        phi_dyn = -2 * drv[c]
        branches[spins] = BranchTrajectory(
            spins, times, alphas[:, c, :], phi_geo + aa[c], phi_dyn, aa[c].copy(),
            pop.copy(), peak[c].copy(), mincos[c].copy())
    overlaps = {pair: float(v) for pair, v in zip(combinations(CONFIGS, 2), pairs)}
    # entangling parts accumulated step by step (the single-branch phases are
    # ~1e8 rad, so differencing them afterwards would lose Θ to round-off)
    theta_aa = float(nl[4].sum())
    theta_d = float(-2 * nl[2].sum())
    theta_g = float((nl[3] - bare / HBAR * nl[0]).sum() - p.V_ex_meV / HBAR * nl[1].sum()
                    + p.U * nl_tun / HBAR) + theta_aa
    return BranchSet(p, pulse, dt, branches, overlaps, theta_g, theta_d, theta_aa)


def geometric_phase(alpha: np.ndarray) -> float:
    """Im Σ_traps ∫α dα* by the trapezoid rule on a uniform grid.

    ``alpha`` has shape (n_t,) or (n_t, n_traps).
    """
    a = np.asarray(alpha, dtype=complex)
    if a.ndim == 1:
        a = a[:, None]
    return float(np.imag(a[:-1] * np.conj(a[1:])).sum())


def dynamic_phase(alpha: np.ndarray, times: np.ndarray, params: GateParams,
                  pulse: PulseEnvelope, spins=(1, 1), drive_only: bool = False) -> float:
    """−(1/ħ)∫⟨H⟩dt for a two-trap coherent state in the pump frame.

    With ``drive_only=True`` only the drive term is kept: the dynamic phase
    in the interaction picture of the linear branch Hamiltonian, which is
    what :class:`BranchTrajectory` reports as ``phi_d``.
    """
    a = np.asarray(alpha, dtype=complex)
    dt = float(times[1] - times[0])
    v = params.V_ex_meV
    det = np.array([params.delta_l + v * spins[0], params.delta_r + v * spins[1]])
    pops = np.abs(a) ** 2
    f = np.sqrt(params.gamma_t / HBAR) * pulse(times).real
    energy = 2 * HBAR * f * a.imag.sum(axis=1)
    if not drive_only:
        energy = energy + pops @ det - params.U * 2 * np.real(np.conj(a[:, 0]) * a[:, 1])
    return float(-np.trapezoid(energy, dx=dt) / HBAR)


def trion_dressing_angle(Delta: float, V_ex: float, g: float, alpha) -> np.ndarray:
    """cos θ̃ = (Δ − V_ex|α|²)/√((Δ − V_ex|α|²)² + g²|α|²), energies in meV."""
    n = np.abs(np.asarray(alpha)) ** 2
    x = Delta - V_ex * n
    r = np.sqrt(x**2 + g**2 * n)
    if np.any(r == 0):
        raise SingularityError("trion dressing angle undefined")
    return x / r


def aa_phase(alpha: np.ndarray, dt: float, Delta: float, V_ex: float, g: float) -> float:
    """∫(ω/2)(1 − cos θ̃)dt with ω the generalised trion Rabi rate."""
    n = np.abs(np.asarray(alpha)) ** 2
    x = Delta - V_ex * n
    r = np.sqrt(x**2 + g**2 * n)
    return float(np.trapezoid(r - x, dx=dt) / (2 * HBAR))


def nonlinear_phase(phi_plus: float, phi_zero: float, phi_minus: float) -> float:
    """Θ = φ¹ + φ⁻¹ − 2φ⁰."""
    return phi_plus + phi_minus - 2 * phi_zero


@dataclass(frozen=True)
class PulsePhases:
    theta: float
    theta_g: float
    theta_d: float
    theta_aa: float
    local: np.ndarray  # per-configuration total phases
    exponents: np.ndarray  # 4×4 Σ∫|Δα|² dt


def pulse_phases(bs: BranchSet) -> PulsePhases:
    local = np.array([bs.branches[c].phase for c in CONFIGS])
    return PulsePhases(bs.theta_g + bs.theta_d, bs.theta_g, bs.theta_d, bs.theta_aa, local,
                       bs.decoherence_exponents())


def decoherence_factors(exponents: np.ndarray, gamma: float) -> np.ndarray:
    """D_jk = exp(−(γ/2ħ) Σ_traps ∫|α^j − α^k|² dt)."""
    return np.exp(-gamma / (2 * HBAR) * np.asarray(exponents))


CZ_TARGET = np.array([-1.0, 1.0, 1.0, 1.0]) / 2


def gate_density_matrix(theta: float, D: np.ndarray) -> np.ndarray:
    """Two-spin state after the gate, local Z phases removed.

    The input is the equal superposition of the four configurations; the
    remaining entangling phase Θ sits on |↑↑⟩.
    """
    phases = np.array([theta, 0.0, 0.0, 0.0])
    psi = np.exp(1j * phases) / 2
    return np.outer(psi, np.conj(psi)) * D


def gate_fidelity(theta: float, D: np.ndarray) -> float:
    """Overlap ⟨Φ0|ρ|Φ0⟩ with the controlled-Z output state."""
    rho = gate_density_matrix(theta, np.asarray(D, dtype=float))
    if np.linalg.eigvalsh(rho).min() < -1e-12:
        raise ConsistencyError("gate density matrix is not positive")
    return float(np.real(CZ_TARGET @ rho @ CZ_TARGET))


def stark_shift(g: float, t0: float, Delta: float) -> float:
    if Delta == 0:
        raise SingularityError("Stark shift diverges at Δ = 0")
    return t0**2 * g**2 / Delta


def cooperativity(g: float, gamma_p: float, kappa: float) -> float:
    """C0 = 4g²/(γ_p κ)."""
    if gamma_p <= 0 or kappa <= 0:
        raise SingularityError("cooperativity needs positive linewidths")
    return 4 * g**2 / (gamma_p * kappa)


def purcell_cooperativity(Q: float, volume: float, lam: float = 0.910, n: float = 3.6) -> float:
    """C0 = 3λ³Q/(4π²n³V), lengths in µm."""
    if volume <= 0:
        raise SingularityError("mode volume must be positive")
    return 3 * lam**3 * Q / (4 * np.pi**2 * n**3 * volume)


@dataclass
class PulseRecord:
    delta: float
    P0: float
    tau: float
    theta: float
    theta_g: float
    theta_d: float
    theta_aa: float
    min_cos_theta: float
    peak_population: float


@dataclass
class GateResult:
    """Outcome of a calibrated gate.  Phases in rad, gate time in ns."""

    theta: float
    theta_g: float
    theta_d: float
    theta_aa: float
    fidelity: float
    gate_time: float
    decoherence: np.ndarray = field(repr=False)
    pulses: list = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "Theta": self.theta, "Theta_g": self.theta_g, "Theta_d": self.theta_d,
            "Theta_aa": self.theta_aa, "F": self.fidelity, "gate_time_ns": self.gate_time,
            "D": self.decoherence.tolist(),
            "pulses": [vars(p) for p in self.pulses],
        }


def combine_pulses(records: list[tuple[GateParams, PulseEnvelope, PulsePhases, BranchSet]],
                   gamma: float) -> GateResult:
    """Accumulate phases and decoherence of consecutive pulses into one gate."""
    theta = sum(r[2].theta for r in records)
    th_g = sum(r[2].theta_g for r in records)
    th_d = sum(r[2].theta_d for r in records)
    th_aa = sum(r[2].theta_aa for r in records)
    E = sum(r[2].exponents for r in records)
    D = decoherence_factors(E, gamma)
    pulses = []
    for p, pulse, ph, bs in records:
        mincos = min(float(b.min_cos_theta.min()) for b in bs.branches.values())
        peak = max(float(b.peak_population.max()) for b in bs.branches.values())
        pulses.append(PulseRecord(p.delta_l, pulse.F0, pulse.tau, ph.theta, ph.theta_g,
                                  ph.theta_d, ph.theta_aa, mincos, peak))
    gate_time = sum(4 * pulse.tau for _, pulse, _, _ in records) * 1e-3
    return GateResult(theta, th_g, th_d, th_aa, gate_fidelity(theta, D), gate_time, D, pulses)


def peak_flux_amplitude(power_W: float, wavelength_um: float = 0.910) -> float:
    """P0 (ps^-1/2) of a pulse with the given peak power."""
    return float(np.sqrt(power_to_flux(power_W, wavelength_um)))


@dataclass(frozen=True)
class SearchSettings:
    tau_min: float = 50.0  # ps
    tau_max: float = 400_000.0
    coarse_dt: float = 0.25
    dt: float = 0.005
    window: float = 3.0
    tol: float = 1e-4
    max_refine: int = 4


def _evaluate(params, P0, tau, dt, method, window) -> tuple[PulsePhases, BranchSet]:
    bs = evolve_branches(params, gaussian_pulse(P0, tau), dt=dt, method=method, window=window,
                         max_stored=0 if method != "rk4" else 4000)
    return pulse_phases(bs), bs


def _calibrate(params: GateParams, P0: float, target: float, which: str,
               s: SearchSettings) -> tuple[float, PulsePhases, BranchSet]:
    """τ at fixed P0 with the chosen nonlinear phase equal to ``target``."""

    def coarse(tau):
        ph, _ = _evaluate(params, P0, tau, s.coarse_dt, "exponential", s.window)
        return getattr(ph, which)

    # bracket by doubling, checking |value| grows monotonically along the way
    taus, vals = [s.tau_min], [coarse(s.tau_min)]
    while abs(vals[-1]) < abs(target):
        if taus[-1] >= s.tau_max:
            raise SearchError(f"{which} target {target:.4g} not reached below τ={s.tau_max} ps",
                              bounds=(vals[0], vals[-1]))
        taus.append(min(2 * taus[-1], s.tau_max))
        vals.append(coarse(taus[-1]))
        if abs(vals[-1]) <= abs(vals[-2]) or np.sign(vals[-1]) != np.sign(target):
            raise SearchError(f"{which}(τ) is not monotone towards {target:.4g}",
                              bounds=(min(vals), max(vals)))
    if len(taus) == 1:
        raise SearchError(f"{which} target {target:.4g} already exceeded at τ={s.tau_min} ps",
                          bounds=(vals[0], vals[0]))
    lo, hi = taus[-2], taus[-1]
    tau = brentq(lambda x: coarse(x) - target, lo, hi, xtol=1e-9 * hi, rtol=1e-12)
    slope = (vals[-1] - vals[-2]) / (hi - lo)

    # fine RK4 confirmation, secant-corrected if needed
    prev = None
    for _ in range(s.max_refine):
        ph, bs = _evaluate(params, P0, tau, s.dt, "rk4", s.window)
        err = getattr(ph, which) - target
        if abs(err) < s.tol:
            return tau, ph, bs
        if prev is not None and prev[0] != tau:
            slope = (err - prev[1]) / (tau - prev[0])
        prev = (tau, err)
        tau = tau - err / slope
    raise SearchError(f"RK4 refinement of {which} did not converge (residual {err:.3g})",
                      bounds=(getattr(ph, which), target))


def search_pulse(params: GateParams, P0: float, strategy: str = "single_pulse",
                 delta2: float | None = None, settings: SearchSettings = SearchSettings(),
                 target: float = np.pi) -> GateResult:
    """Calibrate Gaussian pulse widths at fixed peak amplitude P0.

    ``single_pulse``: one pulse with Θ = target.
    ``geometric_two_pulse``: pulse 1 (detuning ``params.delta_l``) with
    |Θ_g| = target, then pulse 2 at ``delta2`` whose total phase cancels the
    dynamic part of pulse 1 modulo 2π.
    """
    if strategy == "single_pulse":
        sign = np.sign(_probe_sign(params, P0, "theta", settings))
        tau, ph, bs = _calibrate(params, P0, sign * target, "theta", settings)
        return combine_pulses([(params, gaussian_pulse(P0, tau), ph, bs)], params.gamma)
    if strategy != "geometric_two_pulse":
        raise ValueError(f"unknown strategy {strategy!r}")
    if delta2 is None:
        raise ValueError("geometric_two_pulse needs delta2")
    sign_g = np.sign(_probe_sign(params, P0, "theta_g", settings))
    tau1, ph1, bs1 = _calibrate(params, P0, sign_g * target, "theta_g", settings)
    p2 = params.with_detuning(delta2)
    sign2 = np.sign(_probe_sign(p2, P0, "theta", settings))
    goal2 = sign2 * np.mod(-sign2 * ph1.theta_d, 2 * np.pi)
    tau2, ph2, bs2 = _calibrate(p2, P0, goal2, "theta", settings)
    return combine_pulses([(params, gaussian_pulse(P0, tau1), ph1, bs1),
                           (p2, gaussian_pulse(P0, tau2), ph2, bs2)], params.gamma)


def _probe_sign(params, P0, which, s: SearchSettings) -> float:
    ph, _ = _evaluate(params, P0, s.tau_min, s.coarse_dt, "exponential", s.window)
    v = getattr(ph, which)
    if v == 0:
        raise SearchError(f"{which} vanishes identically; nothing to calibrate", bounds=(0.0, 0.0))
    return v


def evaluate_gate(params: GateParams, pulses: list[tuple[float, float, float]],
                  dt: float = 0.005, window: float = 3.0, method: str = "rk4") -> GateResult:
    """Gate result for given (δ, P0, τ) pulses without calibration."""
    records = []
    for delta, P0, tau in pulses:
        p = params.with_detuning(delta)
        ph, bs = _evaluate(p, P0, tau, dt, method, window)
        records.append((p, gaussian_pulse(P0, tau), ph, bs))
    return combine_pulses(records, params.gamma)
