import numpy as np
import pytest
from hypothesis import given, strategies as st

from polariton_qubits import trap_solver as ts
from polariton_qubits.constants import CONSTANTS
from polariton_qubits.errors import DomainError


def free_grid(n, d, m_eff=4e-5):
    return ts.PotentialGrid(d, d, 0.0, 0.0, np.zeros((n, n)), m_eff)


def test_flat_grid_matches_exact_discrete_spectrum():
    # Dirichlet 5-point Laplacian on an n×n grid: λ_jk = κ(s_j + s_k),
    # s_j = (2 − 2cos(jπ/(n+1)))/d²
    n, d = 40, 0.05
    grid = free_grid(n, d)
    sol = ts.solve_eigenmodes(grid, k=3)
    kin = CONSTANTS.hbar2_over_2m0 / grid.m_eff
    s = lambda j: (2 - 2 * np.cos(j * np.pi / (n + 1))) / d**2
    assert sol.energies[0] == pytest.approx(kin * 2 * s(1), rel=1e-9)
    assert sol.energies[1] == pytest.approx(kin * (s(1) + s(2)), rel=1e-9)
    assert sol.energies[2] == pytest.approx(kin * (s(1) + s(2)), rel=1e-9)


def test_flat_grid_converges_to_hard_wall_box():
    # continuum box of side L = (n+1)d: E = (ħ²/2m)·2π²/L²
    n, d = 99, 0.02
    grid = free_grid(n, d)
    e0 = ts.solve_eigenmodes(grid, k=1).energies[0]
    L = (n + 1) * d
    assert e0 == pytest.approx(CONSTANTS.hbar2_over_2m0 / grid.m_eff * 2 * np.pi**2 / L**2,
                               rel=1e-3)


def test_eigenvectors_are_normalised():
    grid = ts.build_single_well_potential(0.5, 7.0, dx=0.05, padding=1.0)
    sol = ts.solve_eigenmodes(grid, k=2)
    for psi in sol.wavefunctions:
        assert np.sum(psi**2) * grid.dx * grid.dy == pytest.approx(1.0)
    assert sol.residual < 1e-6


def test_tunnel_coupling_decreases_with_separation():
    Us = [ts.coupled_trap_U(0.6, D, depth=7.0, dx=0.04) for D in (0.2, 0.4, 0.6)]
    assert Us[0] > Us[1] > Us[2] > 0


def test_tunnel_coupling_needs_two_levels():
    sol = ts.EigenSolution(np.array([1.0]), np.zeros((1, 2, 2)), 0.1, 0.1)
    with pytest.raises(DomainError):
        ts.tunnel_coupling(sol)


def test_mode_area_of_gaussian_is_pi_a2_over_2():
    x = np.arange(-8, 8.0001, 0.01)
    psi = ts.gaussian_mode(x, x, 1.2)
    assert ts.mode_area(psi, 0.01, 0.01) == pytest.approx(np.pi * 1.44 / 2, rel=1e-9)


def test_mode_area_rejects_zero_field():
    with pytest.raises(DomainError):
        ts.mode_area(np.zeros((3, 3)), 0.1, 0.1)


def test_mode_volume_chain():
    g = ts.mode_volume(a=1.2, lam=0.910, n1=3.0, n2=3.6, n_c=3.6)
    l_dbr = 0.910 / 2 * 3.0 * 3.6 / (3.6 * 0.6)
    assert g.dbr_length == pytest.approx(l_dbr)
    assert g.cavity_length == pytest.approx(0.910 + l_dbr)
    assert g.mode_volume == pytest.approx(np.pi * 1.44 / 2 * (0.910 + l_dbr) / 2)


def test_mode_volume_equal_indices_diverges():
    with pytest.raises(ZeroDivisionError):
        ts.mode_volume(n1=3.6, n2=3.6)


def test_hopfield_reference_values():
    h = ts.hopfield_coefficients(0.05, 1.5)
    assert h.r0_sq_plus == pytest.approx(0.508332, abs=1e-6)
    assert h.r0_sq_minus == pytest.approx(0.491668, abs=1e-6)


@given(st.floats(-2, 2), st.floats(0.1, 5))
def test_hopfield_fractions_are_complementary(V, wR):
    h = ts.hopfield_coefficients(V, wR)
    assert h.r0_sq_plus + h.t0_sq_plus == pytest.approx(1.0)
    assert h.r0_sq_minus + h.t0_sq_minus == pytest.approx(1.0)
    assert h.r0_sq_plus + h.r0_sq_minus == pytest.approx(1.0)
    assert 0 <= h.r0_sq_minus <= 0.5 + 1e-12 or V < 0


def test_hopfield_zero_shift_is_half_half():
    h = ts.hopfield_coefficients(0.0, 1.5)
    assert h.r0_sq_plus == h.r0_sq_minus == 0.5


@given(st.floats(0.1, 10), st.floats(0.1, 10), st.floats(0.1, 10))
def test_exchange_scales_inversely_with_area(v, a1, a2):
    assert ts.scale_exchange(v, a1, a2) * a2 == pytest.approx(v * a1)


def test_potential_rejects_coarse_grid():
    with pytest.raises(Exception):
        ts.build_coupled_well_potential(0.1, 0.5, 7.0, dx=0.2)
