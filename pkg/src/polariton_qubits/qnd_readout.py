"""Single-shot spin readout by Faraday rotation of a reflected probe.

An H-polarised probe excites the J=+1 and J=−1 polariton modes of the
target trap.  The electron spin shifts them by ±V_ex in opposite directions,
so the reflected light acquires a small V-polarised component whose sign
encodes the spin.  A Zeeman splitting 2V of the two modes adds a
spin-independent baseline; a strain splitting V_s mixes the two modes.
"""

from __future__ import annotations

import warnings
from dataclasses import asdict, dataclass, replace

import numpy as np
from scipy.special import erfc

from .constants import HBAR
from .errors import DomainError, SearchError
from .lattice_dynamics import (TrapLattice, cancellation_pumps, crosstalk_dephasing, flat_top_pulse,
                               integrate_lattice, steady_state)
from .trap_solver import hopfield_coefficients

SIDEDNESS = ("single_sided", "symmetric_two_sided")
MEASUREMENTS = ("phase", "intensity")


@dataclass(frozen=True)
class ReadoutConfig:
    """Probe, cavity and spin parameters of one readout (energies in meV).

    ``V_ex_plus``/``V_ex_minus`` are in µeV.  ``model_constant`` scales the
    discrimination argument of the Gaussian shot-noise model.
    """

    sidedness: str = "single_sided"
    delta: float = 0.3
    V: float = 0.05
    V_s: float = 0.0
    V_ex_plus: float = 2.0
    V_ex_minus: float = 2.0
    gamma: float = 0.027
    gamma_t: float = 0.027
    F_T: float = 41.1
    eta: float = 1.0
    measurement: str = "phase"
    U: float = 0.5
    ramp: float = 50.0
    model_constant: float = 1.0
    tau_start: float = 10.0
    tau_ratio: float = 1.05
    tau_cap: float = 1e7
    dt: float = 0.02

    def __post_init__(self):
        if self.sidedness not in SIDEDNESS:
            raise DomainError(f"sidedness must be one of {SIDEDNESS}")
        if self.measurement not in MEASUREMENTS:
            raise DomainError(f"measurement must be one of {MEASUREMENTS}")
        expected = self.gamma if self.sidedness == "single_sided" else self.gamma / 2
        if not np.isclose(self.gamma_t, expected, rtol=1e-12, atol=0):
            raise DomainError(f"{self.sidedness} cavity needs γ_t = {expected} meV")
        if not 0 < self.eta <= 1:
            raise DomainError("detector efficiency must be in (0, 1]")
        if self.gamma <= 0 or self.F_T < 0 or self.tau_ratio <= 1 or self.tau_start <= 0:
            raise DomainError("need γ > 0, F_T ≥ 0, τ ratio > 1, τ start > 0")

    @property
    def exchange(self) -> tuple[float, float]:
        return self.V_ex_plus * 1e-3, self.V_ex_minus * 1e-3


def readout_config(sidedness: str = "single_sided", delta: float = 0.3, V_ex: float = 2.0,
                   anisotropic: bool = True, rabi_splitting: float = 3.0, **kw) -> ReadoutConfig:
    """Config with γ_t fixed by the sidedness and V_ex,± from exciton fractions.

    The J=±1 exchange energies scale with the excitonic fraction r0², which
    the Zeeman shift V pushes up for one mode and down for the other.
    """
    gamma = kw.pop("gamma", 0.027)
    gamma_t = gamma if sidedness == "single_sided" else gamma / 2
    V = kw.get("V", 0.05)
    if anisotropic and V != 0:
        h = hopfield_coefficients(V, rabi_splitting / 2)
        vp, vm = V_ex * 2 * h.r0_sq_plus, V_ex * 2 * h.r0_sq_minus
    else:
        vp = vm = V_ex
    return ReadoutConfig(sidedness=sidedness, delta=delta, V_ex_plus=vp, V_ex_minus=vm,
                         gamma=gamma, gamma_t=gamma_t, **kw)


def _spin_sign(spin: float) -> int:
    if spin not in (0.5, -0.5, 1, -1):
        raise DomainError("spin must be ±1/2")
    return 1 if spin > 0 else -1


def mode_detunings(cfg: ReadoutConfig, spin: float | None, delta=None):
    """Probe detunings of the J=+1 and J=−1 modes; ``spin=None`` drops V_ex."""
    d = cfg.delta if delta is None else np.asarray(delta, dtype=float)
    s = 0 if spin is None else _spin_sign(spin)
    vp, vm = cfg.exchange
    return d + cfg.V + s * vp, d - cfg.V - s * vm


def _phase(x, gamma: float, gamma_t: float):
    # arg of r = γ_t/(γ/2 − ix) − 1; continuous unless the cavity is critically
    # coupled (two-sided), where r vanishes at resonance
    x = np.asarray(x, dtype=float)
    a = 2 * gamma_t - gamma
    if a == 0 and np.any(x == 0):
        raise DomainError("reflection vanishes on resonance: phase undefined")
    theta = np.arctan2(2 * x, a) + np.arctan(2 * x / gamma)
    if a <= 0 and x.ndim and x.size > 1 and np.any(np.diff(np.sign(x)) != 0):
        warnings.warn("probe crosses the zero of the reflection; phase continued by unwrapping",
                      RuntimeWarning, stacklevel=3)
        theta = np.unwrap(theta)
    return theta


def reflection_phase_angles(cfg: ReadoutConfig, spin: float, delta=None):
    """Reflection phases (θ₊, θ₋) of the J=±1 modes for spin ±½.

    For a single-sided cavity tan θ = γx/(γ²/4 − x²), tracked on the branch
    θ = 2 arctan(2x/γ) that is continuous in the detuning x.
    """
    xp, xm = mode_detunings(cfg, spin, delta)
    return _phase(xp, cfg.gamma, cfg.gamma_t), _phase(xm, cfg.gamma, cfg.gamma_t)


def baseline(cfg: ReadoutConfig, delta=None):
    """Spin-independent tilt from the Zeeman splitting alone (V_ex = 0)."""
    xp, xm = mode_detunings(cfg, None, delta)
    return (_phase(xp, cfg.gamma, cfg.gamma_t) - _phase(xm, cfg.gamma, cfg.gamma_t)) / 2


def faraday_signal(theta_plus, theta_minus, baseline_angle=0.0):
    """Polarisation tilt (θ₊ − θ₋)/2 with the baseline removed."""
    return (np.asarray(theta_plus) - np.asarray(theta_minus)) / 2 - baseline_angle


def tilt(cfg: ReadoutConfig, spin: float, delta=None):
    return faraday_signal(*reflection_phase_angles(cfg, spin, delta), baseline(cfg, delta))


def _mode_matrix(cfg: ReadoutConfig, spin: float | None) -> np.ndarray:
    xp, xm = mode_detunings(cfg, spin)
    return np.array([[xp, cfg.V_s], [cfg.V_s, xm]], dtype=float)


def reflected_field(cfg: ReadoutConfig, spin: float) -> np.ndarray:
    """Reflected circular components (J=+1, J=−1) for a unit H-polarised probe."""
    H = _mode_matrix(cfg, spin)
    r = cfg.gamma_t * np.linalg.inv(cfg.gamma / 2 * np.eye(2) - 1j * H) - np.eye(2)
    return r @ (np.ones(2) / np.sqrt(2))


def v_component(cfg: ReadoutConfig, spin: float) -> complex:
    c = reflected_field(cfg, spin)
    return complex((c[0] - c[1]) / np.sqrt(2))


def signal_separation(cfg: ReadoutConfig) -> float:
    """Distance between the two spin signals per unit probe amplitude.

    Without pinning this is the tilt difference; with pinning the distance
    between the V-polarised reflected amplitudes.
    """
    if cfg.V_s == 0:
        return float(abs(tilt(cfg, 0.5) - tilt(cfg, -0.5)))
    return abs(v_component(cfg, 0.5) - v_component(cfg, -0.5))


def shot_noise_error(N_det: float, separation: float, eta: float = 1.0,
                     model_constant: float = 1.0) -> float:
    """Homodyne error ½ erfc(c·√(2ηN)·|Δθ|/(2√2)) for two coherent phase states."""
    if N_det < 0:
        raise DomainError("N_det must be non-negative")
    arg = model_constant * np.sqrt(2 * eta * N_det) * abs(separation) / (2 * np.sqrt(2))
    return float(erfc(arg) / 2)


def intensity_error(N_det: float, cfg: ReadoutConfig) -> float:
    """Photon-count discrimination of |E_V|² under the Gaussian model.

    Poisson counts n± = ηN|E_V±|² with a threshold at equal tail weight give
    ½ erfc(c·|√n₊ − √n₋|/√2).
    """
    if N_det < 0:
        raise DomainError("N_det must be non-negative")
    n = [cfg.eta * N_det * abs(v_component(cfg, s)) ** 2 for s in (0.5, -0.5)]
    return float(erfc(cfg.model_constant * abs(np.sqrt(n[0]) - np.sqrt(n[1])) / np.sqrt(2)) / 2)


def _occupation_integral(cfg: ReadoutConfig, spin: float, tau: float) -> float:
    """∫₀^τ Σ|α|² dt for a probe switched on at t = 0 (exact)."""
    H = _mode_matrix(cfg, spin)
    w, v = np.linalg.eigh(H)
    drive = np.sqrt(cfg.gamma_t / HBAR) * cfg.F_T * np.ones(2) / np.sqrt(2)
    lam = (cfg.gamma / 2 + 1j * w) / HBAR
    amp = (v.T @ drive) / lam  # steady amplitudes in the eigenbasis
    tau = np.asarray(tau, dtype=float)[..., None]
    kr = 2 * lam.real
    integ = tau - 2 * ((1 - np.exp(-lam * tau)) / lam).real + (1 - np.exp(-kr * tau)) / kr
    return (np.abs(amp) ** 2 * integ).sum(axis=-1)


def detected_photons(cfg: ReadoutConfig, tau) -> np.ndarray:
    """N_det = η(γ_t/ħ)∫Σ|α|²dt, averaged over the two spin states."""
    occ = (_occupation_integral(cfg, 0.5, tau) + _occupation_integral(cfg, -0.5, tau)) / 2
    return cfg.eta * cfg.gamma_t / HBAR * occ


def mean_occupation(cfg: ReadoutConfig, tau: float) -> float:
    occ = (_occupation_integral(cfg, 0.5, tau) + _occupation_integral(cfg, -0.5, tau)) / 2
    return float(occ / tau)


def readout_error(cfg: ReadoutConfig, tau: float) -> float:
    n = float(detected_photons(cfg, tau)) / cfg.eta
    if cfg.measurement == "intensity":
        return intensity_error(n, cfg)
    return shot_noise_error(n, signal_separation(cfg), cfg.eta, cfg.model_constant)


def tau_grid(cfg: ReadoutConfig) -> np.ndarray:
    n = int(np.floor(np.log(cfg.tau_cap / cfg.tau_start) / np.log(cfg.tau_ratio))) + 1
    return cfg.tau_start * cfg.tau_ratio ** np.arange(n)


def measurement_time(cfg: ReadoutConfig, target_P_e: float = 1e-3) -> tuple[float, float]:
    """Smallest grid τ reaching ``target_P_e``; returns (τ, mean intracavity N)."""
    best = 0.5
    for tau in tau_grid(cfg):
        p = readout_error(cfg, tau)
        best = min(best, p)
        if p <= target_P_e:
            return float(tau), mean_occupation(cfg, tau)
    raise SearchError(f"P_e={target_P_e} not reached by τ={cfg.tau_cap} ps (best {best:.3g})",
                      bounds=(cfg.tau_start, cfg.tau_cap))


def pinning_scattering_fraction(V_s: float, delta: float, V: float, gamma: float,
                                pump_polarization: int = 1) -> float:
    """Fraction V_s²/((δ ± V)² + γ²/4) scattered into the other circular mode.

    A σ₊ pump (``+1``) scatters into J=−1 with δ+V, a σ₋ pump with δ−V.
    """
    if pump_polarization not in (1, -1):
        raise DomainError("pump polarization must be ±1")
    d = delta + pump_polarization * V
    den = d**2 + gamma**2 / 4
    if den == 0:
        raise DomainError("resonant lossless mode: fraction undefined")
    return float(V_s**2 / den)


def star_lattice(delta: float, U: float, gamma: float, gamma_t: float) -> TrapLattice:
    """Target trap 0 tunnel-coupled to four otherwise isolated neighbours."""
    return TrapLattice((delta,) * 5, tuple((0, j, U) for j in range(1, 5)), gamma, gamma_t)


def crosstalk_error(cfg: ReadoutConfig, tau: float, settle_decays: float = 25.0):
    """Neighbour-spin error from a cancellation-pumped probe of length τ.

    On the plateau the cancelled neighbours are exactly empty, so only the
    switch-on and switch-off transients are integrated.
    """
    edge = 4 * cfg.ramp
    settle = settle_decays * 2 * HBAR / cfg.gamma
    half = tau / 2
    columns, worst_delta = [], None
    for d in mode_detunings(cfg, None):
        lattice = star_lattice(float(d), cfg.U, cfg.gamma, cfg.gamma_t)
        pulse = flat_top_pulse(cfg.F_T / np.sqrt(2), half, cfg.ramp)
        pumps = cancellation_pumps(lattice, 0, pulse)
        start, stop = -half - edge, half + edge + settle
        if 2 * settle < tau:
            rise = integrate_lattice(lattice, pumps, (start, -half + settle), cfg.dt)
            y0 = steady_state(lattice, [p.F0 * p.scale if p else 0 for p in pumps])
            fall = integrate_lattice(lattice, pumps, (half - settle, stop), cfg.dt, y0=y0)
            segs = [rise.populations[:, 1:], fall.populations[:, 1:]]
        else:
            segs = [integrate_lattice(lattice, pumps, (start, stop), cfg.dt).populations[:, 1:]]
        columns.extend(segs)
        worst_delta = d if worst_delta is None else min(worst_delta, d, key=abs)
    n = max(len(c) for c in columns)
    pops = np.hstack([np.pad(c, ((0, n - len(c)), (0, 0))) for c in columns])
    V_ex = max(cfg.exchange)
    return crosstalk_dephasing(pops, cfg.dt, V_ex, cfg.gamma, float(worst_delta))


@dataclass(frozen=True)
class ReadoutBudget:
    theta_plus: tuple[float, float]
    theta_minus: tuple[float, float]
    tilt: float
    baseline: float
    tau_meas: float
    N_mean: float
    P_sn: float
    P_crosstalk: float
    P_pinning: float
    measurement: str
    sidedness: str
    delta: float
    V_s: float
    model_constant: float

    def __post_init__(self):
        for p in (self.P_sn, self.P_crosstalk, self.P_pinning):
            if not 0 <= p <= 1:
                raise DomainError(f"probability {p} outside [0, 1]")
        if self.tau_meas <= 0:
            raise DomainError("τ_meas must be positive")

    def as_dict(self) -> dict:
        return asdict(self)


def readout_budget(cfg: ReadoutConfig, target_P_e: float = 1e-3) -> ReadoutBudget:
    """Measurement time, mean occupation and every error channel of one row."""
    tau, n_mean = measurement_time(cfg, target_P_e)
    angles_up = tuple(float(a) for a in reflection_phase_angles(cfg, 0.5))
    angles_down = tuple(float(a) for a in reflection_phase_angles(cfg, -0.5))
    ct = crosstalk_error(cfg, tau)
    pin = min(1.0, pinning_scattering_fraction(cfg.V_s, cfg.delta, cfg.V, cfg.gamma, 1))
    return ReadoutBudget(
        theta_plus=(angles_up[0], angles_down[0]),
        theta_minus=(angles_up[1], angles_down[1]),
        tilt=float(tilt(cfg, 0.5)), baseline=float(baseline(cfg)),
        tau_meas=tau, N_mean=n_mean, P_sn=readout_error(cfg, tau),
        P_crosstalk=float(ct.total), P_pinning=pin, measurement=cfg.measurement,
        sidedness=cfg.sidedness, delta=cfg.delta, V_s=cfg.V_s,
        model_constant=cfg.model_constant)


def with_delta(cfg: ReadoutConfig, delta: float) -> ReadoutConfig:
    return replace(cfg, delta=delta)
