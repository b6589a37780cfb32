import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from yosida.core import Grid, SampledCurve, WindowError
from yosida.kernels import decay_weights, exp_filter
from yosida.operators import EvolutionProblem, scalar_cubic, soft_threshold, zero
from yosida.solver import (SolverConfig, converge_study, solve, solve_halfline, solve_limit,
                           solve_line, yosida_derivative_halfline, yosida_derivative_line)


def cos_problem(omega=-1.0):
    return EvolutionProblem(zero(1), omega=omega, forcing=lambda t: np.cos(t))


def lam_level_cos(t, lam):
    # Fourier oracle for A = 0, omega = -1, f = cos: u_lam = Re[(1+i lam)/(1+i(1+lam)) e^{it}]
    c = (1 + 1j * lam) / (1 + 1j * (1 + lam))
    return (c * np.exp(1j * t)).real


def steady_cos(t):
    return (np.cos(t) + np.sin(t)) / 2


# -- Yosida derivatives


def test_halfline_derivative_of_constant_is_zero():
    u = SampledCurve.from_function(lambda t: np.full_like(t, 0.7), Grid(0.0, 2.0, 201))
    assert np.max(np.abs(yosida_derivative_halfline(u, [0.7], 0.1).values)) == 0.0


@pytest.mark.parametrize("lam", [0.05, 0.5])
def test_halfline_derivative_of_identity(lam):
    g = Grid(0.0, 3.0, 3001)
    d = yosida_derivative_halfline(SampledCurve.from_function(lambda t: t, g), [0.0], lam)
    assert np.max(np.abs(d.values[:, 0] - (1 - np.exp(-g.times / lam)))) <= 1e-10


def test_halfline_derivative_tends_to_classical():
    g = Grid(0.0, 2.0, 20001)
    u = SampledCurve.from_function(lambda t: t, g)
    lams = (0.2, 0.1, 0.05, 0.02)
    errs = [abs(yosida_derivative_halfline(u, [0.0], lam)(1.0)[0] - 1.0) for lam in lams]
    assert errs[0] > errs[1] > errs[2]
    assert all(e <= math.exp(-1 / lam) + 1e-12 for e, lam in zip(errs, lams))


@settings(max_examples=40, deadline=None)
@given(st.floats(-3, 3), st.floats(-3, 3), st.floats(0.01, 2.0), st.integers(50, 400))
def test_exponential_recurrence_exact_on_affine(a, b, lam, n):
    # memory of an affine curve in closed form:
    # (1/lam) int_0^t e^{-tau/lam} (a(t - tau) + b) dtau
    g = Grid(0.0, 2.0, n)
    t = g.times
    E, w0, w1 = decay_weights(g.dt / lam)
    vals = a * t + b
    C = exp_filter(vals, E, w0, w1, 0.0)
    s = 1 - np.exp(-t / lam)
    exact = (a * t + b) * s - a * (lam * s - t * np.exp(-t / lam))
    assert np.max(np.abs(C - exact)) <= 1e-12 * (1 + abs(a) + abs(b))


def test_line_derivative_of_constant_is_zero():
    u = SampledCurve.from_function(lambda t: np.full_like(t, 2.0), Grid(-20.0, 5.0, 2501))
    assert np.max(np.abs(yosida_derivative_line(u, 0.1).values)) <= 500 * np.finfo(float).eps * 2.0 / 0.1


@pytest.mark.parametrize("lam", [0.1, 0.01])
def test_line_derivative_matches_symbol(lam):
    g = Grid(-10.0, 10.0, 40001)
    u = SampledCurve.from_function(np.cos, g)
    d, tail = yosida_derivative_line(u, lam, return_tail=True)
    pred = ((1j / (1 + 1j * lam)) * np.exp(1j * d.grid.times)).real
    # piecewise-linear sampling of cos costs dt^2/8 per unit of the kernel, divided by lam
    assert np.all(np.abs(d.values[:, 0] - pred) <= 1e-6 + tail + g.dt ** 2 / (8 * lam))


def test_line_derivative_tends_to_minus_sin():
    g = Grid(-5.0, 5.0, 200001)
    u = SampledCurve.from_function(np.cos, g)
    errs = []
    for lam in (0.04, 0.02, 0.01):
        d = yosida_derivative_line(u, lam)
        errs.append(np.max(np.abs(d.values[:, 0] + np.sin(d.grid.times))))
    assert errs[0] > errs[1] > errs[2] and errs[2] < 0.03


def test_line_derivative_short_window_raises():
    u = SampledCurve.from_function(np.cos, Grid(0.0, 1.0, 101))
    with pytest.raises(WindowError):
        yosida_derivative_line(u, 0.5)


# -- half line


def test_halfline_exponential_decay():
    p = EvolutionProblem(zero(1), omega=-1.0, u0=[1.0], line_kind="half_line")
    g = Grid.from_step(0.0, 5.0, 1e-3)
    r = solve_halfline(p, SolverConfig(0.01, g))
    assert np.max(np.abs(r.u.values[:, 0] - np.exp(-g.times))) <= 0.05
    assert r.residual <= 1e-10


def test_halfline_against_dense_grid():
    # oracle: the same equation on a 4x finer grid
    p = EvolutionProblem(scalar_cubic(0.5, 2.0), omega=-0.5, u0=[1.5], line_kind="half_line",
                         forcing=lambda t: 0.3 * np.cos(t))
    r1 = solve_halfline(p, SolverConfig(0.05, Grid.from_step(0.0, 4.0, 4e-3)))
    r2 = solve_halfline(p, SolverConfig(0.05, Grid.from_step(0.0, 4.0, 1e-3)))
    ts = r1.u.grid.times
    assert np.max(np.abs(r1.u(ts) - r2.u(ts))) <= 1e-4


def test_halfline_stationary_point():
    p = EvolutionProblem(scalar_cubic(), omega=0.0, u0=[0.0], line_kind="half_line")
    r = solve_halfline(p, SolverConfig(0.05, Grid.from_step(0.0, 2.0, 0.01)))
    assert np.max(np.abs(r.u.values)) == 0.0 and r.residual <= 1e-12


def test_halfline_soft_threshold_reaches_zero():
    p = EvolutionProblem(soft_threshold(1.0), omega=0.0, u0=[2.0], line_kind="half_line")
    g = Grid.from_step(0.0, 4.0, 1e-3)
    for lam in (0.05, 0.01):
        r = solve_halfline(p, SolverConfig(lam, g))
        # the approximant is max(2 - lam - t, 0), exact up to the node containing the kink
        exact = np.maximum(2 - lam - g.times, 0.0)
        assert np.max(np.abs(r.u.values[:, 0] - exact)) <= g.dt
        assert np.max(np.abs(r.u.values[:, 0] - np.maximum(2 - g.times, 0))) <= lam + g.dt


def test_halfline_bit_reproducible():
    p = EvolutionProblem(scalar_cubic(0.5), omega=-0.5, u0=[1.0], line_kind="half_line")
    cfg = SolverConfig(0.02, Grid.from_step(0.0, 3.0, 4e-3))
    assert np.array_equal(solve_halfline(p, cfg).u.values, solve_halfline(p, cfg).u.values)


# -- whole line


def test_line_matches_lambda_level_oracle():
    g = Grid.from_step(-30.0, 30.0, 0.002)
    for lam in (0.1, 0.02):
        r = solve_line(cos_problem(), SolverConfig(lam, g))
        u = r.valid_u()
        err = np.max(np.abs(u.values[:, 0] - lam_level_cos(u.grid.times, lam)))
        assert err <= 1e-5 + r.tail_error_bound
        assert r.contraction_estimate <= 1 / (1 + lam) + 0.02


def test_line_constant_forcing_is_exact():
    p = EvolutionProblem(zero(2), omega=-2.0, forcing=lambda t: np.array([[3.0, -1.0]]))
    r = solve_line(p, SolverConfig(0.1, Grid.from_step(-20.0, 5.0, 0.01)))
    assert np.max(np.abs(r.valid_u().values - np.array([1.5, -0.5]))) <= 1e-8


def test_line_zero_forcing_gives_zero():
    p = EvolutionProblem(soft_threshold(1.0), omega=-1.0)
    r = solve_line(p, SolverConfig(0.1, Grid.from_step(-20.0, 5.0, 0.01)))
    assert np.max(np.abs(r.u.values)) == 0.0


def test_line_refuses_nonnegative_omega():
    p = EvolutionProblem(zero(1), omega=0.0, forcing=np.cos)
    with pytest.raises(ValueError):
        solve_line(p, SolverConfig(0.1, Grid.from_step(-20.0, 5.0, 0.01)))


@settings(max_examples=15, deadline=None)
@given(st.floats(0.2, 2.0), st.floats(-2.0, -0.5), st.sampled_from(["soft", "cubic", "zero"]))
def test_line_uniform_bound(amp, omega, kind):
    # families with J(0) = 0: sup |u_lam| <= sup|f| / |omega|
    fam = {"soft": soft_threshold(0.3), "cubic": scalar_cubic(), "zero": zero(1)}[kind]
    p = EvolutionProblem(fam, omega=omega, forcing=lambda t: amp * np.cos(1.3 * t))
    r = solve_line(p, SolverConfig(0.1, Grid.from_step(-50.0, 5.0, 0.02)))
    assert r.valid_u().sup_norm() <= amp / abs(omega) + 1e-9 + r.tail_error_bound
    assert r.contraction_estimate <= 1 / (1 - 0.1 * omega) + 0.02


def test_omega_zero_halfline_bound():
    # x0 = 0 stationary for A = 0; f integrable on the horizon
    f = lambda t: np.exp(-t) * np.sin(3 * t)
    p = EvolutionProblem(zero(1), omega=0.0, forcing=f, u0=[0.0], line_kind="half_line")
    g = Grid.from_step(0.0, 10.0, 1e-3)
    ts = np.linspace(0, 10, 200001)
    l1 = float(np.trapezoid(np.abs(f(ts)), ts))
    for lam in (0.1, 0.02):
        r = solve_halfline(p, SolverConfig(lam, g))
        assert r.u.sup_norm() <= l1 + lam * 1.0


# -- convergence drivers


def test_converge_study_ratio_two():
    lams = [0.2, 0.1, 0.05, 0.025]
    tab = converge_study(cos_problem(), lams, SolverConfig(0.2, Grid.from_step(-30.0, 30.0, 0.002)),
                         reference=lambda t: steady_cos(t)[:, None])
    assert tab.decreasing
    # oracle: sup over t of the difference of two symbols is the modulus of the difference
    pred = [abs((1 + 1j * a) / (1 + 1j * (1 + a)) - (1 + 1j * b) / (1 + 1j * (1 + b)))
            for a, b in zip(lams, lams[1:])]
    for c, q in zip(tab.cauchy[:-1], pred):
        assert c == pytest.approx(q, rel=1e-3)
    for ratio in tab.ratios:
        assert 1.4 <= ratio <= 2.6
    assert tab.ref_error == sorted(tab.ref_error, reverse=True)


def test_converge_study_stationary():
    p = EvolutionProblem(scalar_cubic(), omega=-1.0)
    tab = converge_study(p, [0.2, 0.1, 0.05], SolverConfig(0.2, Grid.from_step(-20.0, 2.0, 0.01)))
    assert tab.cauchy[:-1] == [0.0, 0.0] and tab.decreasing


def test_converge_study_cubic_halfline_decreasing():
    p = EvolutionProblem(scalar_cubic(), omega=0.0, u0=[1.5], line_kind="half_line")
    tab = converge_study(p, [0.2, 0.1, 0.05, 0.025], SolverConfig(0.2, Grid.from_step(0.0, 4.0, 2e-3)))
    assert tab.decreasing


def test_converge_study_validates_input():
    cfg = SolverConfig(0.2, Grid.from_step(-20.0, 2.0, 0.01))
    with pytest.raises(ValueError):
        converge_study(cos_problem(), [0.2, 0.1], cfg)
    with pytest.raises(ValueError):
        converge_study(cos_problem(), [0.1, 0.2, 0.05], cfg)


def test_solve_limit_linear_oracle():
    lam = 0.02
    r = solve_limit(cos_problem(), SolverConfig(lam, Grid.from_step(-30.0, 30.0, 0.004)), lam)
    u = r.valid_u()
    assert np.max(np.abs(u.values[:, 0] - steady_cos(u.grid.times))) <= 2 * lam
    R = r.valid_extrapolated()
    true = np.max(np.abs(R.values[:, 0] - steady_cos(R.grid.times)))
    assert true <= r.candidate_error() + r.tail_error_bound
    assert r.meta["integral_solution_candidate"]


def test_solve_limit_zero_forcing():
    p = EvolutionProblem(soft_threshold(1.0), omega=-1.0)
    r = solve_limit(p, SolverConfig(0.05, Grid.from_step(-20.0, 2.0, 0.01)), 0.05)
    assert np.max(np.abs(r.extrapolated.values)) == 0.0 and r.candidate_error() == 0.0


def test_solve_limit_soft_threshold_halfline():
    p = EvolutionProblem(soft_threshold(1.0), omega=0.0, u0=[2.0], line_kind="half_line")
    r = solve_limit(p, SolverConfig(0.01, Grid.from_step(0.0, 3.0, 1e-3)), 0.01)
    R = r.extrapolated
    true = np.max(np.abs(R.values[:, 0] - np.maximum(2 - R.grid.times, 0)))
    assert true <= r.candidate_error()


def test_solve_dispatches_on_line_kind():
    p = EvolutionProblem(zero(1), omega=-1.0, u0=[1.0], line_kind="half_line")
    r = solve(p, SolverConfig(0.05, Grid.from_step(0.0, 1.0, 0.01)))
    assert r.valid_window == (0.0, 1.0)
