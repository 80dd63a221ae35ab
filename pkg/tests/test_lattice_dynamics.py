import numpy as np
import pytest
from hypothesis import given, strategies as st

from polariton_qubits import lattice_dynamics as ld
from polariton_qubits.constants import HBAR
from polariton_qubits.errors import ConfigurationError, DomainError, SingularityError


def closed_form_occupation(F, delta, gamma, gamma_t):
    # |α|² = (γ_t/ħ)F² / ((δ/ħ)² + (γ/2ħ)²)
    return gamma_t * HBAR * F**2 / (delta**2 + gamma**2 / 4)


@given(st.floats(-2, 2), st.floats(0.005, 0.1), st.floats(0.1, 50))
def test_single_trap_steady_state_closed_form(delta, gamma, F):
    lat = ld.TrapLattice((delta,), (), gamma, gamma / 2)
    a = ld.steady_state(lat, [F])
    assert abs(a[0]) ** 2 == pytest.approx(closed_form_occupation(F, delta, gamma, gamma / 2),
                                           rel=1e-10)


@given(st.floats(-1, 1), st.floats(0.01, 0.1), st.floats(0.1, 1.0))
def test_cancellation_pump_empties_neighbour_exactly(delta, gamma, U):
    lat = ld.TrapLattice((delta, delta), ((0, 1, U),), gamma, gamma)
    F_T = 2.0
    a = ld.steady_state(lat, [F_T, ld.cancellation_pump(F_T, U, delta, gamma)])
    assert abs(a[1]) < 1e-12 * abs(a[0])
    assert abs(a[0]) ** 2 == pytest.approx(closed_form_occupation(F_T, delta, gamma, gamma))


def test_cancellation_pump_singular_without_loss_or_detuning():
    with pytest.raises(SingularityError):
        ld.cancellation_pump(1.0, 0.5, 0.0, 0.0)


@given(st.floats(0.1, 5), st.floats(0.1, 5))
def test_steady_state_is_linear_in_pumps(a, b):
    lat = ld.square_lattice(3, 1, 0.5, 0.2, 0.03, 0.015)
    p1, p2 = np.array([1.0, 0, 0]), np.array([0, 1j, 0.5])
    lhs = ld.steady_state(lat, a * p1 + b * p2)
    rhs = a * ld.steady_state(lat, p1) + b * ld.steady_state(lat, p2)
    assert np.allclose(lhs, rhs, rtol=1e-12, atol=1e-12)


def test_square_lattice_adjacency():
    lat = ld.square_lattice(3, 3, 0.5, 0.0, 0.03, 0.015)
    assert len(lat.couplings) == 12
    assert lat.neighbours(4) == [1, 3, 5, 7]
    assert lat.neighbours(0) == [1, 3]
    M = lat.coupling_matrix()
    assert np.array_equal(M, M.T)


def test_lattice_rejects_bad_graph():
    with pytest.raises(DomainError):
        ld.TrapLattice((0.0, 0.0), ((0, 0, 0.5),), 0.03, 0.015)
    with pytest.raises(DomainError):
        ld.TrapLattice((0.0, 0.0), ((0, 1, 0.5), (1, 0, 0.5)), 0.03, 0.015)
    with pytest.raises(DomainError):
        ld.TrapLattice((0.0,), (), 0.01, 0.02)


def test_time_integration_reaches_closed_form():
    lat = ld.TrapLattice((0.1,), (), 0.03, 0.015)
    pulse = ld.flat_top_pulse(1.5, 2000.0, 20.0)
    traj = ld.integrate_lattice(lat, [pulse], (-2100.0, 0.0), 0.01, store_every=1000)
    assert traj.populations[-1, 0] == pytest.approx(
        closed_form_occupation(1.5, 0.1, 0.03, 0.015), rel=1e-6)


def test_fig3_like_cancellation_and_negative_control():
    lat = ld.square_lattice(3, 3, 0.5, 0.0, 0.03, 0.015)
    pulse = ld.flat_top_pulse(1.51, 200.0, 50.0)
    ratios = []
    for comp in (True, False):
        pumps = ld.cancellation_pumps(lat, 4, pulse, compensate=comp)
        traj = ld.integrate_lattice(lat, pumps, (-450.0, 450.0), 0.01, store_every=100)
        ratios.append(ld.plateau_ratio(traj, 4, (-100.0, 100.0)))
    assert ratios[0] < 1e-2 < 1e-1 < ratios[1]


def test_step_guard_rejects_coarse_dt():
    lat = ld.TrapLattice((20.0,), (), 0.03, 0.015)
    with pytest.raises(ConfigurationError):
        ld.integrate_lattice(lat, [ld.flat_top_pulse(1, 10, 1)], (0, 10), dt=0.01)


def test_pulse_shapes():
    p = ld.flat_top_pulse(2.0, 10.0, 3.0)
    assert p(np.array([0.0, 10.0]))[1] == 2.0
    assert p(np.array([13.0]))[0] == pytest.approx(2.0 / np.e)
    g = ld.gaussian_pulse(1.0, 5.0)
    assert g(np.array([5.0]))[0] == pytest.approx(np.exp(-1))
    with pytest.raises(DomainError):
        ld.PulseEnvelope("square", 1.0)


def test_power_to_flux():
    # 1 W at 0.910 µm: P λ/(hc) photons per second
    expected = 1.0 * 0.910e-6 / (6.62607015e-34 * 299792458.0) * 1e-12
    assert ld.power_to_flux(1.0, 0.910) == pytest.approx(expected, rel=1e-5)


def test_crosstalk_dephasing_zero_population_is_zero():
    err = ld.crosstalk_dephasing(np.zeros((100, 4)), 0.1, 0.002, 0.027, 0.3)
    assert err.total == 0.0


@given(st.floats(0.1, 10))
def test_crosstalk_dephasing_grows_with_population(scale):
    pops = np.full((200, 2), 1e-3)
    small = ld.crosstalk_dephasing(pops, 0.1, 0.002, 0.027, 0.3).total
    large = ld.crosstalk_dephasing(pops * (1 + scale), 0.1, 0.002, 0.027, 0.3).total
    assert large > small > 0
