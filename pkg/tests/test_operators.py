from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from yosida.core import Space
from yosida.operators import (ControlData, EvolutionProblem, ParameterRangeError, PerturbedControl,
                              abs_A_estimate, check_t_stability, linear_matrix, make_family,
                              resolve_forced, resolve_perturbed, rotation_damped, scalar_cubic,
                              soft_threshold, yosida_op, zero)

KINDS = ("euclidean", "sup", "one")


def builtins():
    out = [zero(2), rotation_damped(-0.3, 1.5),
           linear_matrix([[-1.0, 0.5], [0.0, -2.0]], "sup"),
           linear_matrix([[-1.0]], mod_amp=0.5, mod_freq=2.0)]
    for kind in KINDS:
        out += [soft_threshold(0.7, 3, kind), scalar_cubic(0.5, 1.0, 0.2, 3, kind)]
    return out


def test_scalar_family_formulas():
    for a in (-2.0, -0.5, 0.0):
        for w in (-1.0, 0.0, 0.5):
            p = EvolutionProblem(linear_matrix([[a]]) if a else zero(1), omega=w)
            for lam in (0.01, 0.3):
                if lam * abs(w) >= 0.9:
                    continue
                x = np.array([1.7])
                assert resolve_perturbed(p, 0.0, lam, x)[0] == pytest.approx(
                    1.7 / (1 - lam * (a + w)), rel=1e-14)
                assert yosida_op(p, 0.0, lam, x)[0] == pytest.approx(
                    (a + w) * 1.7 / (1 - lam * (a + w)), rel=1e-12, abs=1e-14)


def test_unperturbed_matches_family():
    fam = scalar_cubic(0.3, 1.0, 0.1)
    p = EvolutionProblem(fam, omega=0.0)
    x = np.array([0.8])
    assert np.array_equal(resolve_perturbed(p, 0.4, 0.2, x), fam.resolve(0.4, 0.2, x))


def test_soft_threshold_perturbed_example():
    p = EvolutionProblem(soft_threshold(1.0), omega=-1.0)
    assert resolve_perturbed(p, 0.0, 0.5, [2.0])[0] == pytest.approx(1.0, abs=1e-15)
    assert yosida_op(p, 0.0, 0.3, [0.0])[0] == 0.0


def test_yosida_vanishes_at_fixed_points():
    p = EvolutionProblem(scalar_cubic(), omega=0.0)
    assert yosida_op(p, 0.0, 0.1, [0.0])[0] == 0.0


def test_forced_resolvent_solves_the_equation():
    # y = J(x) means y - lam*(A y + w y + f) = x
    p = EvolutionProblem(scalar_cubic(), omega=-0.5, forcing=lambda t: np.cos(t))
    lam, x, t = 0.2, np.array([1.3]), 0.7
    y = resolve_forced(p, t, lam, x)[0]
    assert y - lam * (-y ** 3 - 0.5 * y + np.cos(t)) == pytest.approx(1.3, abs=1e-12)


def test_lambda_range_errors():
    p = EvolutionProblem(zero(1), omega=-2.0)
    assert p.lambda_max == pytest.approx(0.45)
    with pytest.raises(ParameterRangeError):
        resolve_perturbed(p, 0.0, 0.5, [1.0])
    with pytest.raises(ParameterRangeError):
        resolve_perturbed(p, 0.0, -0.1, [1.0])


def test_non_dissipative_matrix_rejected():
    with pytest.raises(ValueError):
        linear_matrix([[0.5]])
    with pytest.raises(ValueError):
        rotation_damped(0.1, 1.0)
    with pytest.raises(ValueError):
        make_family("nope")


def test_cubic_resolvent_against_polynomial_roots():
    # oracle: the unique real root of lam y^3 + y - b from numpy.roots
    fam = scalar_cubic()
    rng = np.random.default_rng(3)
    for b, lam in zip(rng.normal(scale=10, size=50), 10 ** rng.uniform(-4, 1, 50)):
        r = np.roots([lam, 0.0, 1.0, -b])
        real = r[np.abs(r.imag) < 1e-7].real
        assert real.size == 1
        y = fam.resolve(0.0, lam, [b])[0]
        assert y == pytest.approx(real[0], rel=1e-9, abs=1e-12)
        assert abs(y + lam * y ** 3 - b) <= 1e-12 * (1 + abs(b))


def test_nonexpansive_on_random_pairs():
    rng = np.random.default_rng(0)
    for fam in builtins():
        d = fam.space.dim
        for lam in (1e-3, 0.1, 1.0, 10.0):
            X = rng.normal(scale=3, size=(1000, d))
            Y = rng.normal(scale=3, size=(1000, d))
            t = rng.uniform(-5, 5)
            JX, JY = fam.resolve(t, lam, X), fam.resolve(t, lam, Y)
            nrm = fam.space.norms
            assert np.all(nrm(JX - JY) <= nrm(X - Y) * (1 + 1e-12) + 1e-12), (fam.label, lam)


@settings(max_examples=150, deadline=None)
@given(st.sampled_from(range(len(builtins()))),
       st.lists(st.floats(-5, 5), min_size=3, max_size=3),
       st.floats(1e-3, 2.0), st.floats(1e-3, 2.0), st.floats(-3, 3))
def test_resolvent_identity(k, x, lam, mu, t):
    # J_lam x = J_mu(mu/lam x + (1 - mu/lam) J_lam x)
    fam = builtins()[k]
    x = np.array(x[:fam.space.dim])
    jl = fam.resolve(t, lam, x)
    rhs = fam.resolve(t, mu, mu / lam * x + (1 - mu / lam) * jl)
    assert np.max(np.abs(jl - rhs)) <= 1e-10 * (1 + np.max(np.abs(x)) * max(1, mu / lam))


def test_abs_A_examples():
    p = EvolutionProblem(linear_matrix([[-2.0]]), omega=0.0)
    r = abs_A_estimate(p, 0.0, [1.5])
    assert r.estimate == pytest.approx(3.0, rel=1e-5) and r.monotone and r.in_hat_D
    p = EvolutionProblem(soft_threshold(1.0), omega=0.0)
    assert abs_A_estimate(p, 0.0, [0.0]).estimate == 0.0
    r = abs_A_estimate(p, 0.0, [2.0], lam_seq=[1.5, 1.0, 0.1, 1e-3, 1e-6])
    assert r.estimate == pytest.approx(1.0, abs=1e-12)


def test_abs_A_flags_points_outside_domain():
    # a resolvent that projects onto [-1, 1] has generator outside the domain beyond 1
    proj = replace(soft_threshold(1.0), resolve_fn=lambda t, lam, x: np.clip(x, -1.0, 1.0))
    r = abs_A_estimate(EvolutionProblem(proj), 0.0, [2.0])
    assert not r.in_hat_D


@settings(max_examples=60, deadline=None)
@given(st.sampled_from(range(len(builtins()))), st.lists(st.floats(-4, 4), min_size=3, max_size=3),
       st.floats(-1.0, 1.0), st.floats(-3, 3))
def test_shifted_abs_A_bound(k, x, w, t):
    # |(A + w I)x| <= |Ax| + |w| |x|
    fam = builtins()[k]
    x = np.array(x[:fam.space.dim])
    p = EvolutionProblem(fam, omega=w)
    lams = 0.5 * np.logspace(-1, -6, 11)
    plain = abs_A_estimate(p, t, x, lams).estimate
    shifted = abs_A_estimate(p, t, x, lams, shifted=True).estimate
    assert shifted <= plain + abs(w) * fam.space.norm(x) + 1e-9 * (1 + plain)


@settings(max_examples=60, deadline=None)
@given(st.sampled_from([3] + [5, 7, 9]), st.lists(st.floats(-4, 4), min_size=3, max_size=3),
       st.floats(-5, 5), st.floats(-5, 5), st.floats(1e-3, 1.0))
def test_hat_D_constant_bound(k, x, t0, s, lam):
    # ||A_lam(t0)x - A_lam(s)x|| <= 2 sup|h| L(||x||) + 2 sup|g| ||A_lam(t0)x||
    fam = builtins()[k]
    x = np.array(x[:fam.space.dim])
    grid = np.linspace(-20, 20, 4001)
    c = fam.control
    hsup = float(np.max(np.linalg.norm(c.h_at(grid), axis=-1)))
    gsup = float(np.max(np.linalg.norm(c.g_at(grid), axis=-1)))
    a0 = fam.yosida(t0, lam, x)
    lhs = fam.space.norm(a0 - fam.yosida(s, lam, x))
    rhs = 2 * hsup * float(c.L_at(fam.space.norm(x))) + 2 * gsup * fam.space.norm(a0)
    assert lhs <= rhs + 1e-9


def test_perturbed_control_without_g_keeps_L():
    c = ControlData(h=np.sin, L=lambda r: 2 * np.asarray(r))
    pc = PerturbedControl(c, -0.5)
    assert pc.L_omega(3.0) == 6.0
    assert pc.h_diff(0.0, np.pi / 2) == pytest.approx(1.0)


def test_control_validate():
    with pytest.raises(ValueError):
        ControlData(h=np.sin, L=lambda r: -np.asarray(r) + 1).validate([0.0], [1.0, 2.0])
    ControlData(h=np.sin, L=lambda r: np.asarray(r)).validate([0.0, 1.0], [1.0, 2.0])


def test_t_stability_autonomous_passes():
    rng = np.random.default_rng(5)
    for fam in (soft_threshold(1.0, 2), rotation_damped(-0.2, 1.0)):
        p = EvolutionProblem(fam, omega=-0.5)
        cert = check_t_stability(p, rng.uniform(0, 10, 8), rng.normal(size=(8, 2)), [0.05, 0.5])
        assert cert.passed and cert.worst_margin >= -cert.tolerance_budget


def test_t_stability_time_scaled_passes():
    # A(t)u = -(1 + 0.5 sin t)u with h = 1 + 0.5 sin t and L(r) = r
    fam = linear_matrix([[-1.0]], mod_amp=0.5)
    p = EvolutionProblem(fam, omega=0.0)
    rng = np.random.default_rng(6)
    cert = check_t_stability(p, rng.uniform(0, 10, 10), rng.normal(scale=2, size=(10, 1)),
                             [0.01, 0.1, 0.5])
    assert cert.passed and len(cert.samples) == 3 * 3 * 90


def test_t_stability_wrong_control_fails():
    fam = linear_matrix([[-1.0]], mod_amp=0.5)
    wrong = replace(fam, control=ControlData(h=lambda t: np.zeros(np.shape(t)),
                                             L=lambda r: np.zeros(np.shape(r))))
    rng = np.random.default_rng(6)
    cert = check_t_stability(EvolutionProblem(wrong), rng.uniform(0, 10, 10),
                             rng.normal(scale=2, size=(10, 1)), [0.1, 0.5])
    assert not cert.passed and cert.worst_margin < 0
