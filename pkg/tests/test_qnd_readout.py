import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import solve_ivp

from polariton_qubits import qnd_readout as qr
from polariton_qubits.constants import HBAR
from polariton_qubits.errors import DomainError, SearchError


def test_single_sided_phase_is_unit_modulus_reflection_argument():
    cfg = qr.readout_config(V=0.0, anisotropic=False, V_ex=0.0)
    x = np.linspace(-1.0, 1.0, 201)
    th, _ = qr.reflection_phase_angles(cfg, 0.5, x)
    r = cfg.gamma_t / (cfg.gamma / 2 - 1j * x) - 1
    assert np.allclose(np.abs(r), 1.0, atol=1e-14)
    assert np.allclose(np.exp(1j * th), r, atol=1e-12)
    assert np.allclose(th, 2 * np.arctan(2 * x / cfg.gamma), atol=1e-12)


def test_two_sided_resonant_phase_undefined():
    cfg = qr.readout_config("symmetric_two_sided", delta=0.0, V=0.0, V_ex=0.0, anisotropic=False)
    with pytest.raises(DomainError):
        qr.reflection_phase_angles(cfg, 0.5)


def test_exchange_separation_on_resonance():
    # both modes shift by ±V_ex: tilt = 2 atan(2V_ex/γ), separation twice that
    cfg = qr.readout_config(delta=0.0, V=0.0, anisotropic=False, V_ex=2.0)
    assert qr.signal_separation(cfg) == pytest.approx(4 * np.arctan(2 * 2e-3 / cfg.gamma), rel=1e-12)
    # small-angle limit 8 V_ex/γ
    small = qr.readout_config(delta=0.0, V=0.0, anisotropic=False, V_ex=0.02)
    assert qr.signal_separation(small) == pytest.approx(8 * 2e-5 / small.gamma, rel=1e-6)


@given(st.floats(-1.0, 1.0), st.floats(0.1, 10.0))
def test_tilt_antisymmetric_in_spin_without_zeeman(delta, v_ex):
    cfg = qr.readout_config(delta=delta, V=0.0, anisotropic=False, V_ex=v_ex)
    assert abs(float(qr.tilt(cfg, 0.5) + qr.tilt(cfg, -0.5))) < 1e-12


def test_anisotropic_exchange_uses_exciton_fractions():
    cfg = qr.readout_config(V=0.05, V_ex=2.0)
    vp, vm = cfg.exchange
    assert vp > 2e-3 > vm
    assert (vp + vm) == pytest.approx(4e-3, rel=1e-12)


@given(st.floats(0.0, 1e6), st.floats(1e-3, 1.0))
def test_shot_noise_error_bounded_and_decreasing(n, sep):
    p = qr.shot_noise_error(n, sep)
    assert 0.0 <= p <= 0.5
    assert qr.shot_noise_error(2 * n + 1, sep) <= p


def test_shot_noise_error_zero_photons_is_coin_flip():
    assert qr.shot_noise_error(0.0, 0.1) == 0.5
    with pytest.raises(DomainError):
        qr.shot_noise_error(-1.0, 0.1)


def test_pinning_fraction_formula_and_scaling():
    f = qr.pinning_scattering_fraction(0.01, 0.3, 0.05, 0.027)
    assert f == pytest.approx(1e-4 / (0.35**2 + 0.027**2 / 4), rel=1e-12)
    assert qr.pinning_scattering_fraction(0.0, 0.3, 0.05, 0.027) == 0.0
    assert qr.pinning_scattering_fraction(0.02, 0.3, 0.05, 0.027) == pytest.approx(4 * f, rel=1e-12)
    sigma_minus = qr.pinning_scattering_fraction(0.01, 0.3, 0.05, 0.027, -1)
    assert sigma_minus == pytest.approx(1e-4 / (0.25**2 + 0.027**2 / 4), rel=1e-12)


def _occupation_ode(cfg, spin, tau):
    H = qr._mode_matrix(cfg, spin)
    drive = np.sqrt(cfg.gamma_t / HBAR) * cfg.F_T / np.sqrt(2) * np.ones(2)

    def rhs(t, y):
        a = y[:2] + 1j * y[2:4]
        da = -(cfg.gamma / 2 * a + 1j * H @ a) / HBAR + drive
        return np.concatenate([da.real, da.imag, [np.sum(np.abs(a) ** 2)]])

    sol = solve_ivp(rhs, (0, tau), np.zeros(5), rtol=1e-10, atol=1e-8)
    return sol.y[4, -1]


@pytest.mark.parametrize("V_s", [0.0, 0.02])
def test_occupation_integral_matches_ode(V_s):
    cfg = qr.readout_config(delta=0.1, V_s=V_s, F_T=5.0)
    for tau in (3.0, 80.0):
        exact = qr._occupation_integral(cfg, 0.5, tau)
        assert exact == pytest.approx(_occupation_ode(cfg, 0.5, tau), rel=1e-6)


def test_measurement_time_is_first_grid_point_below_target():
    cfg = qr.readout_config(delta=0.1, F_T=41.1)
    tau, n_mean = qr.measurement_time(cfg, 1e-3)
    grid = qr.tau_grid(cfg)
    k = int(np.argmin(np.abs(grid - tau)))
    assert qr.readout_error(cfg, grid[k]) <= 1e-3
    assert k == 0 or qr.readout_error(cfg, grid[k - 1]) > 1e-3
    assert n_mean > 0


def test_measurement_time_unreachable_raises():
    cfg = qr.readout_config(delta=0.1, F_T=1e-3, tau_cap=100.0)
    with pytest.raises(SearchError):
        qr.measurement_time(cfg, 1e-3)


def test_intensity_mode_needs_pinning_contrast():
    cfg = qr.readout_config(delta=0.1, V_s=0.02, measurement="intensity")
    assert 0.0 <= qr.readout_error(cfg, 1000.0) < 0.5


@pytest.mark.parametrize("kw", [dict(sidedness="three_sided"), dict(measurement="photon"),
                                dict(eta=0.0), dict(eta=1.5)])
def test_invalid_readout_config(kw):
    with pytest.raises(DomainError):
        qr.readout_config(**kw)


def test_gamma_t_must_match_sidedness():
    with pytest.raises(DomainError):
        qr.ReadoutConfig(sidedness="symmetric_two_sided", gamma=0.027, gamma_t=0.027)
