import csv
import io
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from infharm.errors import ArgumentError, InfeasibleConstantError, WrongRegimeError
from infharm.reductions import (
    BALL_PROFILE,
    cylinder_constant,
    cylinder_kink,
    cylinder_pendulum,
    equator,
    integrate,
    pendulum_energy,
    reconstruct,
    reconstruct_and_verify,
    solve_ball_profile,
)
from strategies import finite


@pytest.fixture(scope="module")
def pendulum_fine():
    return cylinder_pendulum(1, 2.0, step=1e-4)


# -- ball profiles ----------------------------------------------------------------------


def test_ball_profile_invariant():
    sol = solve_ball_profile(2, 3.0, (0.5, 1.0), step=1e-4)
    assert sol.parameter[0] == pytest.approx(0.5) and sol.parameter[-1] == 1.0
    assert np.all(np.diff(sol.parameter) > 0)
    assert np.max(sol.invariant_residual()) < 1e-8
    assert not sol.events


def test_ball_profile_step_halving():
    a = solve_ball_profile(2, 3.0, step=1e-4)
    b = solve_ball_profile(2, 3.0, step=5e-5)
    assert np.max(np.abs(a.value - b.value[::2])) < 1e-9


def test_ball_profile_turning_point():
    sol = solve_ball_profile(2, 2.0, (0.5, 1.0), step=1e-4)
    assert len(sol.events) == 1 and sol.events[0].startswith("turning point")
    assert 0.68 < sol.parameter[0] < 0.70
    assert np.max(sol.invariant_residual()) < 1e-8


def test_ball_profile_infeasible_constant():
    with pytest.raises(InfeasibleConstantError):
        solve_ball_profile(2, 0.5)


@pytest.mark.parametrize("bad", [dict(n=1, C=1.0), dict(n=2, C=3.0, r_range=(0.0, 1.0))])
def test_ball_profile_argument_checks(bad):
    with pytest.raises(ArgumentError):
        solve_ball_profile(**bad)


@settings(max_examples=15, deadline=None)
@given(st.integers(2, 4), st.floats(0.0, 4.0, **finite))
def test_ball_profile_invariant_any_constant(n, extra):
    sol = solve_ball_profile(n, (n - 1) + extra, (0.6, 1.0), step=1e-3)
    assert np.max(sol.invariant_residual()) < 1e-8


def test_equator_energy_not_constant():
    sol = equator(2)
    inv = sol.invariant()
    np.testing.assert_allclose(inv, 1.0 / sol.parameter**2)
    assert np.ptp(inv) > 1.0
    assert np.max(sol.invariant_residual()) == 0.0


# -- cylinder ----------------------------------------------------------------------------


def test_kink_values():
    sol = cylinder_kink(1, 0.0, (-1.0, 1.0), step=0.5)
    i = int(np.argmin(np.abs(sol.parameter)))
    assert sol.value[i] == 0.0 and sol.derivative[i] == 1.0
    assert sol.invariant()[i] == 1.0
    far = cylinder_kink(2, 0.0, (0.0, 20.0), step=1.0)
    assert far.value[-1] == pytest.approx(math.pi / 2, abs=1e-15)


def test_kink_invariant_exact():
    sol = cylinder_kink(1, 0.0, (-5.0, 5.0), step=10.0 / 999)
    assert len(sol.parameter) == 1000
    assert np.max(sol.invariant_residual()) < 1e-12


@settings(max_examples=50, deadline=None)
@given(st.integers(-4, 4).filter(bool), st.floats(-3, 3, **finite))
def test_kink_invariant_any_k(k, A):
    sol = cylinder_kink(k, A, (-3.0, 3.0), step=0.01)
    assert np.max(sol.invariant_residual()) < 1e-12 * k * k


def test_k_must_be_nonzero_integer():
    with pytest.raises(ArgumentError):
        cylinder_kink(0)
    with pytest.raises(ArgumentError):
        cylinder_constant(1.5, 0.3)


def test_pendulum_invariant(pendulum_fine):
    assert np.max(pendulum_fine.invariant_residual()) < 1e-8


def test_pendulum_coarse_step_invariant():
    sol = cylinder_pendulum(1, 2.0, 0.0, step=1e-3)
    assert np.max(sol.invariant_residual()) < 1e-7
    half = cylinder_pendulum(1, 2.0, 0.0, s_max=sol.parameter[-1], step=5e-4)
    assert np.max(np.abs(sol.value - half.value[::2])) < 1e-9


def test_pendulum_period_returns_to_start(pendulum_fine):
    sol = pendulum_fine
    T = sol.period
    # closed form: T = integral_0^{2 pi} da / sqrt(C - sin^2 a)
    a = np.linspace(0.0, 2 * math.pi, 200_001)
    integrand = 1.0 / np.sqrt(2.0 - np.sin(a) ** 2)
    exact = float(np.sum((integrand[1:] + integrand[:-1]) / 2 * np.diff(a)))
    assert abs(T - exact) < 1e-6
    d_at_T = np.interp(T, sol.parameter, sol.derivative)
    assert abs(d_at_T - sol.derivative[0]) < 1e-6


def test_pendulum_energy_over_ten_periods():
    sol = cylinder_pendulum(1, 2.0, step=1e-3, periods=10)
    E = pendulum_energy(2 * sol.value, 2 * sol.derivative, 1)
    assert np.max(np.abs(E - E[0])) < 1e-8


def test_pendulum_wrong_regime():
    for C in (0.5, 1.0):
        with pytest.raises(WrongRegimeError, match="kink"):
            cylinder_pendulum(1, C)


def _drift(step):
    sol = cylinder_pendulum(1, 2.0, 0.0, s_max=10.0, step=step)
    return float(np.max(sol.invariant_residual()))


def test_rk4_fourth_order_drift():
    assert _drift(0.1) / _drift(0.025) >= 200


def test_pendulum_tracks_kink_near_separatrix():
    k = 1
    pend = cylinder_pendulum(k, k * k * (1 + 1e-4), 0.0, s_max=1.0 / k, step=1e-4)
    kink = np.arctan(np.exp(k * pend.parameter)) * 2 - math.pi / 2
    assert np.max(np.abs(pend.value - kink)) < 0.01


def test_integrate_rejects_bad_step():
    with pytest.raises(ArgumentError):
        integrate(lambda t, y: y, [1.0], 0.0, 1.0, 0.0)


def test_integrate_exponential_order():
    errs = []
    for h in (0.1, 0.05):
        _, ys, _ = integrate(lambda t, y: [y[0]], [1.0], 0.0, 1.0, h)
        errs.append(abs(ys[-1, 0] - math.e))
    assert 14 < errs[0] / errs[1] < 18


# -- reconstruction -------------------------------------------------------------------------


@pytest.mark.parametrize(
    "make",
    [
        lambda: cylinder_kink(1, 0.0),
        lambda: cylinder_kink(2, 0.5, (-2.0, 2.0)),
        lambda: cylinder_pendulum(1, 2.0, step=1e-3),
        lambda: cylinder_constant(2, math.pi / 3),
        lambda: equator(2),
        lambda: equator(3),
        lambda: solve_ball_profile(2, 3.0),
        lambda: solve_ball_profile(3, 4.0, step=1e-3),
    ],
    ids=["kink", "kink_k2", "pendulum", "constant", "equator2", "equator3", "ball2", "ball3"],
)
def test_reconstruct_and_verify(make):
    summary = reconstruct_and_verify(make())
    assert summary.max_inf_laplacian < 1e-6
    assert summary.max_energy_error < 1e-6


def test_constant_branch_energy():
    sol = cylinder_constant(2, math.pi / 3)
    assert sol.conserved_constant == pytest.approx(3.0)
    phi, g, h, pts = reconstruct(sol)
    assert len(pts) == 50 * 50


def test_kink_grid_shape():
    _, _, _, pts = reconstruct(cylinder_kink(1))
    assert len(pts) >= 50 * 50


def test_csv_export(tmp_path):
    sol = cylinder_kink(1, 0.0, (-1.0, 1.0), step=0.5)
    out = tmp_path / "kink.csv"
    text = sol.to_csv(out)
    assert out.read_text() == text
    rows = list(csv.reader(io.StringIO(text)))
    assert rows[0] == ["parameter", "value", "derivative", "invariant_residual"]
    assert len(rows) == 1 + len(sol.parameter)
    assert float(rows[1][0]) == -1.0


def test_solution_records_parameters():
    sol = solve_ball_profile(2, 3.0, step=1e-3)
    assert sol.kind == BALL_PROFILE
    assert sol.params["n"] == 2 and sol.params["step"] == 1e-3
    assert len(sol.samples) == len(sol.parameter)
