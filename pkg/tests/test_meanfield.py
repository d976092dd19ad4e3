import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import expm

from scb_dyn.fock import TwoModeParams
from scb_dyn.meanfield import (
    OrderParameter,
    PhaseNumberState,
    compare_gp_to_exact,
    gp_to_phase_number,
    integrate_gp,
    integrate_phase_number,
    phase_number_to_gp,
    small_oscillation_frequency,
    small_oscillation_frequency_charge,
)
from scb_dyn.unitary import TimeGrid, extract_frequency

PSI0 = OrderParameter(np.sqrt(0.3) * np.exp(0.2j), np.sqrt(0.7))


def test_decoupled_phases():
    p = TwoModeParams(E=0, U1=0.7, U2=-1.3, K=0, N=1)
    tr = integrate_gp(p, PSI0, TimeGrid(0, 10, 11))
    np.testing.assert_allclose(tr.psi[:, 0], PSI0.psi1 * np.exp(-0.7j * tr.times), atol=1e-9)
    np.testing.assert_allclose(tr.psi[:, 1], PSI0.psi2 * np.exp(1.3j * tr.times), atol=1e-9)


def test_linear_case_matches_matrix_exponential():
    p = TwoModeParams(E=0, U1=0.4, U2=-0.2, K=0.9, N=1)
    M = np.array([[p.U1, -p.K], [-p.K, p.U2]])
    grid = TimeGrid(0, 20, 21)
    tr = integrate_gp(p, PSI0, grid)
    for t, psi in zip(grid.times, tr.psi):
        np.testing.assert_allclose(psi, expm(-1j * t * M) @ PSI0.as_array(), atol=1e-8)


def test_nonlinear_norm_conserved_over_many_periods():
    tol = 1e-10
    p = TwoModeParams(E=1.0, U1=0.0, U2=0.0, K=1.0, N=1)
    # linear splitting 2K gives a period of pi; run ~1000 periods
    tr = integrate_gp(p, PSI0, TimeGrid(0, 1000 * np.pi, 1001), tol)
    assert np.max(np.abs(tr.norm2 - 1)) <= 10 * tol


def test_integrate_gp_rejects_unnormalized():
    with pytest.raises(ValueError):
        integrate_gp(TwoModeParams(1, 0, 0, 1, 1), OrderParameter(1, 1), TimeGrid(0, 1, 2))


def test_phase_number_fixed_point():
    tr = integrate_phase_number(2.0, 1.0, PhaseNumberState(0, 0), TimeGrid(0, 10, 11))
    assert np.all(tr.n == 0) and np.all(tr.theta == 0)


def test_phase_number_decoupled():
    tr = integrate_phase_number(3.0, 0.0, PhaseNumberState(0.4, 0.1), TimeGrid(0, 10, 11))
    np.testing.assert_allclose(tr.n, 0.4)
    np.testing.assert_allclose(tr.theta, 0.1 + 1.5 * 0.4 * tr.times, rtol=1e-10)
    # unwrapped storage: theta grows past pi
    assert tr.theta[-1] > np.pi
    assert np.all(np.abs(tr.theta_wrapped) <= np.pi)


def test_small_theta_frequency():
    grid = TimeGrid(0, 20 * 2 * np.pi, 4001)
    tr = integrate_phase_number(2.0, 1.0, PhaseNumberState(0.0, 0.01), grid)
    assert extract_frequency(tr.times, tr.n) == pytest.approx(1.0, rel=0.01)


@settings(max_examples=20, deadline=None)
@given(st.floats(0.2, 5), st.floats(0.2, 5), st.floats(-1, 1), st.floats(-2.5, 2.5))
def test_pendulum_first_integral(E, E_J, n0, theta0):
    tol = 1e-10
    tr = integrate_phase_number(E, E_J, PhaseNumberState(n0, theta0), TimeGrid(0, 30, 61), tol)
    h = tr.first_integral(E, E_J)
    assert np.max(np.abs(h - h[0])) <= 10 * tol * max(1.0, abs(h[0]))


def test_small_oscillation_frequency():
    assert small_oscillation_frequency(2, 1) == 1
    assert small_oscillation_frequency(0, 5) == 0
    assert small_oscillation_frequency(8, 2) == pytest.approx(2 * np.sqrt(2))
    assert small_oscillation_frequency_charge(0.5, 1) == small_oscillation_frequency(2, 1)
    with pytest.raises(ValueError):
        small_oscillation_frequency(-1, 1)


def test_gp_to_phase_number_examples():
    s = gp_to_phase_number(OrderParameter(np.sqrt(0.5), np.sqrt(0.5)), 100, 50)
    assert s.n == pytest.approx(0, abs=1e-12) and s.theta == 0
    s = gp_to_phase_number(OrderParameter(np.sqrt(0.51), np.sqrt(0.49) * np.exp(1j * np.pi / 4)), 100, 50)
    assert s.n == pytest.approx(1, abs=1e-12)
    assert s.theta == pytest.approx(-np.pi / 4, abs=1e-12)
    with pytest.raises(ValueError):
        gp_to_phase_number(OrderParameter(1, 0), 100, 50)


@given(st.floats(0.01, 0.99), st.floats(-3, 3), st.floats(-3, 3), st.integers(2, 10**6))
def test_phase_number_round_trip(frac, th1, th2, N):
    psi = OrderParameter(np.sqrt(frac) * np.exp(1j * th1), np.sqrt(1 - frac) * np.exp(1j * th2))
    n_bar1 = N // 2
    back = phase_number_to_gp(gp_to_phase_number(psi, N, n_bar1), N, n_bar1)
    glob = np.exp(1j * th2)
    np.testing.assert_allclose(back.as_array() * glob, psi.as_array(), atol=1e-12 * max(1, N / 1e3))


def test_compare_trivial_and_linear():
    rep = compare_gp_to_exact(TwoModeParams(0, 0.3, 0.1, 0, 10), PSI0, TimeGrid(0, 5, 11))
    assert rep.max_deviation <= 1e-12
    rep = compare_gp_to_exact(TwoModeParams(0, 0.3, -0.1, 0.7, 20), PSI0, TimeGrid(0, 10, 41))
    assert rep.max_deviation <= 1e-6
    assert rep.rms_deviation <= rep.max_deviation


def test_compare_nonlinear_is_descriptive():
    rep = compare_gp_to_exact(TwoModeParams(0.05, 0, 0, 1.0, 50), PSI0, TimeGrid(0, 10, 21), method="eig")
    assert rep.deviation[0] <= 1e-12
    assert np.all(np.isfinite(rep.deviation))


def test_compare_rejects_large_N():
    with pytest.raises(ValueError):
        compare_gp_to_exact(TwoModeParams(0, 0, 0, 1, 501), PSI0, TimeGrid(0, 1, 2))
