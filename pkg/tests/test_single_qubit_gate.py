import numpy as np
import pytest
from hypothesis import given, strategies as st

from polariton_qubits import single_qubit_gate as sq
from polariton_qubits.constants import HBAR
from polariton_qubits.errors import ConfigurationError, ConsistencyError, DomainError
from polariton_qubits.lattice_dynamics import PulseEnvelope

ZERO = PulseEnvelope("zero")
PLUS = np.array([1, 1]) / np.sqrt(2)


def test_fluctuation_rate_reference_point():
    # 2χ²Nκ/(Δω² + κ²/4) evaluated by hand
    chi, kappa, dw = 0.002 / HBAR, 0.027 / HBAR, 6.0 / HBAR
    expected = 2 * chi**2 * 500 * kappa / (dw**2 + kappa**2 / 4)
    rate = sq.fluctuation_dephasing_rate(0.002, 500, 0.027, 6.0)
    assert rate == pytest.approx(expected, rel=1e-12)
    assert rate == pytest.approx(4.5e-6, rel=0.05)
    assert sq.fluctuation_error(rate, 420.0) == pytest.approx(0.002, abs=0.0005)


def test_fluctuation_rate_linear_in_N():
    assert sq.fluctuation_dephasing_rate(0.002, 0, 0.027, 6.0) == 0
    r1 = sq.fluctuation_dephasing_rate(0.002, 100, 0.027, 6.0)
    assert sq.fluctuation_dephasing_rate(0.002, 300, 0.027, 6.0) == pytest.approx(3 * r1)


@given(st.floats(1, 2000), st.floats(0.5, 10), st.floats(0.005, 0.05))
def test_pump_amplitude_inverts_steady_occupation(N, delta, gamma):
    F = sq.pump_amplitude(N, delta, gamma, gamma / 2)
    assert sq.steady_occupation(F, delta, gamma, gamma / 2) == pytest.approx(N)


def test_resonance_and_zeeman():
    assert sq.zeeman_splitting(2.0, 1.0) == pytest.approx(2 * 0.057884)
    assert sq.resonance_rf(20.0, 0.002, 500) == pytest.approx(19.0)
    with pytest.raises(DomainError):
        sq.resonance_rf(1.0, 0.002, 500)


def test_rf_drive_rejects_negative_field():
    with pytest.raises(DomainError):
        sq.RFDrive(-1.0, 20.0)


def test_rotation_fidelity_and_z_compensation():
    rho = np.outer(PLUS, PLUS)
    assert sq.rotation_fidelity(rho, PLUS)[0] == pytest.approx(1.0)
    phi = 0.7
    psi = np.array([np.exp(-1j * phi / 2), np.exp(1j * phi / 2)]) / np.sqrt(2)
    rho = np.outer(psi, psi.conj())
    F_raw, _ = sq.rotation_fidelity(rho, PLUS, compensate_z=False)
    F, z = sq.rotation_fidelity(rho, PLUS)
    assert F_raw == pytest.approx(np.cos(phi / 2) ** 2)
    assert F == pytest.approx(1.0)
    assert abs(z) == pytest.approx(phi)
    with pytest.raises(ConsistencyError):
        sq.rotation_fidelity(np.diag([1.2, -0.2]), PLUS)


def test_purity_conserved_without_drive_or_dephasing():
    spec = sq.RotationSpec(pulse=ZERO, gamma=0.0, gamma_t=0.0)
    tr = sq.evolve_single_qubit(spec, sq.RFDrive(0.0, 20.0), (0.0, 200.0), dt=0.002,
                                rho0=np.outer(PLUS, PLUS), store_every=500)
    assert np.abs(np.linalg.norm(tr.bloch, axis=1) - 1).max() < 1e-10


def test_unitary_pi_rotation_flips_spin():
    spec = sq.RotationSpec(pulse=ZERO, gamma=0.0, gamma_t=0.0)
    tr = sq.evolve_single_qubit(spec, sq.RFDrive(sq.pi_time_field(420.0), 20.0), (0.0, 420.0),
                                dt=0.002, store_every=10**6)
    assert tr.p_down[-1] > 1 - 1e-4


def test_two_pi_rotation_restores_populations():
    spec = sq.RotationSpec(pulse=ZERO, gamma=0.0, gamma_t=0.0)
    tr = sq.evolve_single_qubit(spec, sq.RFDrive(sq.pi_time_field(210.0), 20.0), (0.0, 420.0),
                                dt=0.002, store_every=10**6)
    assert tr.p_up[-1] == pytest.approx(1.0, abs=1e-3)


def test_axis_swap_under_quarter_period_phase():
    spec = sq.RotationSpec(pulse=ZERO, gamma=0.0, gamma_t=0.0)
    err = sq.axis_swap_error(spec, sq.RFDrive(sq.pi_time_field(420.0), 20.0), (0.0, 420.0))
    assert err < 1e-3


def test_fidelity_decreases_with_linewidth():
    # fixed pulse amplitude and r.f. drive; only γ (and γ_t = γ/2) changes
    F0 = sq.pump_amplitude(500, 6.0, 0.027, 0.0135)
    fids = []
    for gamma in (0.01, 0.027, 0.06):
        spec = sq.RotationSpec(pulse=PulseEnvelope("flat_top", F0, 200.0, 5.0), gamma=gamma,
                               gamma_t=gamma / 2)
        span = sq.default_span(spec)
        tr = sq.evolve_single_qubit(spec, sq.RFDrive(0.09, 19.0), span, dt=0.002,
                                    rho0=np.outer(PLUS, PLUS), store_every=10**6)
        fids.append(sq.rotation_fidelity(sq.rotating_frame_rho(tr)[-1], PLUS)[0])
    assert fids[0] > fids[1] > fids[2]


def test_calibrated_rotation_is_exact_pi():
    res = sq.pi_rotation(sq.RotationSpec())
    assert res.peak_transfer > 0.998
    assert res.B_x != res.B_x_ideal_rabi
    assert 0.997 <= res.fidelity <= 0.999


def test_coarse_step_rejected():
    with pytest.raises(ConfigurationError):
        sq.evolve_single_qubit(sq.RotationSpec(pulse=ZERO, gamma=0.0, gamma_t=0.0),
                               sq.RFDrive(0.1, 20.0), (0.0, 10.0), dt=0.01)


def test_spec_validation():
    with pytest.raises(DomainError):
        sq.RotationSpec(gamma=0.01, gamma_t=0.02)
    with pytest.raises(DomainError):
        sq.RotationSpec(delta=-1.0)
