import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.integrate import solve_ivp

from polariton_qubits.integrators import (exponential_coefficients, integrate_linear,
                                          rk4_coefficients, rk4_step)


@given(st.floats(-2, 0), st.floats(-3, 3), st.floats(0.01, 0.2))
def test_rk4_coefficients_reproduce_generic_step(re, im, h):
    lam = complex(re, im)
    f = lambda t: np.cos(3 * t) + 1j * t
    A, c0, ch, c1 = rk4_coefficients(np.array([lam]), h)
    y0, t = 0.3 - 0.2j, 0.7
    fast = A[0] * y0 + h * (c0[0] * f(t) + ch[0] * f(t + h / 2) + c1[0] * f(t + h))
    slow = rk4_step(lambda s, y: lam * y + f(s), t, np.array([y0]), h)[0]
    assert fast == pytest.approx(slow, abs=1e-13)


def test_exponential_propagator_is_exact_for_linear_forcing():
    lam, h = -0.3 + 2j, 0.5
    A, b0, b1 = exponential_coefficients(np.array([lam]), h)
    f0, f1 = 1.0 + 0.5j, -0.25 + 1j
    sol = solve_ivp(lambda t, y: lam * y + f0 + (f1 - f0) * t / h, (0, h), [0.2 + 0j],
                    rtol=1e-12, atol=1e-14)
    assert A[0] * 0.2 + b0[0] * f0 + b1[0] * f1 == pytest.approx(sol.y[0, -1], abs=1e-10)


def test_integrate_linear_matches_reference_solver():
    M = np.array([[-0.05 - 1j, 0.4j], [0.4j, -0.05 + 0.5j]])
    B = np.array([[1.0], [0.0]], complex)
    drive = lambda t: np.exp(-((t - 5) / 2) ** 2)[:, None] + 0j
    times, states, _ = integrate_linear(M, B, drive, 0.0, 2000, 0.01)
    ref = solve_ivp(lambda t, y: M @ y + B[:, 0] * np.exp(-((t - 5) / 2) ** 2),
                    (0, 20), np.zeros(2, complex), rtol=1e-11, atol=1e-13, t_eval=[20.0])
    assert np.allclose(states[-1], ref.y[:, -1], atol=1e-8)
    assert times[-1] == pytest.approx(20.0)
