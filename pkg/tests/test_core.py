import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from yosida.core import (BracketValue, DimensionError, Grid, SampledCurve, Space, WindowError,
                         bracket, bracket_minus, bracket_plus, eval_curve, norm)

KINDS = ("euclidean", "sup", "one")
finite = st.floats(-10, 10, allow_nan=False, allow_infinity=False)


def vec(n):
    return st.lists(finite, min_size=n, max_size=n).map(np.array)


def test_norm_examples():
    assert norm([3, 4], Space(2)) == 5.0
    assert norm([3, -4], Space(2, "sup")) == 4.0
    assert norm([3, -4], Space(2, "one")) == 7.0


def test_norm_dimension_mismatch():
    with pytest.raises(DimensionError):
        norm([1, 2, 3], Space(2))


def test_space_validation():
    with pytest.raises(ValueError):
        Space(0)
    with pytest.raises(ValueError):
        Space(2, "frobenius")


@settings(max_examples=200, deadline=None)
@given(st.sampled_from(KINDS), vec(3), vec(3), finite)
def test_norm_axioms(kind, x, y, a):
    sp = Space(3, kind)
    assert norm(np.zeros(3), sp) == 0.0
    assert norm(x + y, sp) <= norm(x, sp) + norm(y, sp) + 1e-12
    assert math.isclose(norm(a * x, sp), abs(a) * norm(x, sp), rel_tol=1e-12, abs_tol=1e-12)


def test_bracket_examples():
    b = bracket([1, 2], [1, 2], Space(2))
    assert math.isclose(b.plus, math.sqrt(5), rel_tol=1e-15)
    assert bracket([0, 1], [1, 0], Space(2)).plus == 0.0
    b = bracket([1, -1], [2, 2], Space(2, "sup"))
    assert (b.plus, b.minus) == (1.0, -1.0)


def _quotient(y, x, sp, a):
    return (norm(x + a * y, sp) - norm(x, sp)) / a


def test_bracket_sup_example_against_difference_quotient():
    # oracle: one-sided difference quotients, extrapolated in alpha
    sp = Space(2, "sup")
    x, y = np.array([2.0, 2.0]), np.array([1.0, -1.0])
    q4, q6 = _quotient(y, x, sp, 1e-4), _quotient(y, x, sp, 1e-6)
    plus = 2 * q6 - q4 if abs(q4 - q6) > 0 else q6
    assert abs(plus - bracket(y, x, sp).plus) < 1e-8
    qm4, qm6 = -_quotient(-y, x, sp, 1e-4), -_quotient(-y, x, sp, 1e-6)
    assert abs((2 * qm6 - qm4) - bracket(y, x, sp).minus) < 1e-8


def test_bracket_at_zero():
    for kind in KINDS:
        sp = Space(2, kind)
        b = bracket([1.0, -2.0], [0.0, 0.0], sp)
        assert b.plus == norm([1.0, -2.0], sp) and b.minus == -b.plus


@settings(max_examples=300, deadline=None)
@given(st.sampled_from(KINDS), vec(3), vec(3))
def test_bracket_properties(kind, x, y):
    sp = Space(3, kind)
    b = bracket(y, x, sp)
    ny = norm(y, sp)
    assert b.minus <= b.plus + 1e-12
    assert abs(b.plus) <= ny + 1e-9 and abs(b.minus) <= ny + 1e-9
    assert isinstance(b, BracketValue)


@settings(max_examples=200, deadline=None)
@given(st.sampled_from(KINDS), vec(3), vec(3))
def test_bracket_matches_difference_quotient(kind, x, y):
    # plus is the right derivative of the norm along y: quotients decrease to it
    sp = Space(3, kind)
    b = bracket(y, x, sp)
    for a in (1e-2, 1e-3, 1e-4):
        q = _quotient(y, x, sp, a)
        assert q >= b.plus - 1e-7 * (1 + norm(y, sp))
        assert norm(x + a * y, sp) >= norm(x, sp) + a * b.minus - 1e-9


@settings(max_examples=100, deadline=None)
@given(st.sampled_from(KINDS), vec(3).filter(lambda v: np.min(np.abs(v)) > 0.5
                                             and len(set(np.round(np.abs(v), 3))) == 3), vec(3))
def test_bracket_quotient_converges_for_smooth_directions(kind, x, y):
    # generic x (distinct nonzero entries): the norm is differentiable, error O(alpha)
    sp = Space(3, kind)
    b = bracket(y, x, sp)
    errs = [abs(_quotient(y, x, sp, a) - b.plus) for a in (1e-3, 1e-5)]
    assert errs[1] <= 1e-3 * (1 + norm(y, sp)) and errs[1] <= errs[0] + 1e-9


PAIRS = [(0.1, 0.1), (0.1, 0.5), (0.5, 0.2), (1.0, 1.0), (2.0, 0.3)]
TESTED = sorted({l for p in PAIRS for l in p} | {l * m / (l + m) for l, m in PAIRS})


def _combined_holds(x1, x2, y1, y2, F, sp, tol=1e-9):
    d = norm(x1 - x2, sp)
    for lam, mu in PAIRS:
        lhs = (lam + mu) * d
        rhs = lam * norm(x2 - x1 - mu * y2, sp) + mu * norm(x1 - x2 - lam * y1, sp) + lam * mu * F
        if lhs > rhs + tol * (1 + abs(lhs)):
            return False
    return True


@settings(max_examples=300, deadline=None)
@given(vec(2), vec(2), vec(2), vec(2), st.sampled_from(KINDS))
def test_lambda_plus_mu_inequality(x1, x2, y1, y2, kind):
    # F is the smallest scalar making the one-parameter inequality hold at every tested lambda
    sp = Space(2, kind)
    d, e = x1 - x2, y1 - y2
    F = max((norm(d, sp) - norm(d - lam * e, sp)) / lam for lam in TESTED)
    assert _combined_holds(x1, x2, y1, y2, F, sp)


@settings(max_examples=200, deadline=None)
@given(vec(3), vec(3), st.floats(0, 3), st.sampled_from(KINDS))
def test_lambda_plus_mu_inequality_dissipative_pairs(x1, x2, c, kind):
    # y = -c x - x^3 componentwise is dissipative in every lp norm, so F = 0 works
    sp = Space(3, kind)
    A = lambda x: -c * x - x ** 3
    y1, y2 = A(x1), A(x2)
    d = norm(x1 - x2, sp)
    assert all(d <= norm(x1 - x2 - lam * (y1 - y2), sp) * (1 + 1e-12) + 1e-12 for lam in TESTED)
    assert _combined_holds(x1, x2, y1, y2, 0.0, sp)


def test_vectorized_brackets_match_scalar():
    rng = np.random.default_rng(1)
    for kind in KINDS:
        sp = Space(3, kind)
        X, Y = rng.normal(size=(20, 3)), rng.normal(size=(20, 3))
        P, M = bracket_plus(Y, X, sp), bracket_minus(Y, X, sp)
        for k in range(20):
            b = bracket(Y[k], X[k], sp)
            assert (P[k], M[k]) == (b.plus, b.minus)


def test_grid_invariants():
    g = Grid(0.0, 1.0, 11)
    assert g.dt == pytest.approx(0.1)
    with pytest.raises(ValueError):
        Grid(1.0, 0.0, 5)
    with pytest.raises(ValueError):
        Grid(0.0, 1.0, 1)
    assert g.sub(2, 4).n_points == 3
    assert Grid.from_step(-1.0, 1.0, 0.5).n_points == 5


def test_eval_curve_examples():
    c = SampledCurve(Grid(0.0, 1.0, 2), [[0.0], [2.0]])
    assert eval_curve(c, 0.5)[0] == 1.0
    c = SampledCurve.from_function(np.sin, Grid(0.0, 1.0, 11))
    assert eval_curve(c, 0.3)[0] == c.values[3, 0]
    with pytest.raises(WindowError):
        eval_curve(c, 1.5)


def test_interpolation_error_bound_quadratic():
    g = Grid(0.0, 2.0, 41)
    c = SampledCurve.from_function(lambda t: t ** 2, g)
    mids = g.times[:-1] + 0.5 * g.dt
    err = np.abs(eval_curve(c, mids)[:, 0] - mids ** 2)
    assert np.all(err <= g.dt ** 2 * 2 / 8 + 1e-15)


@settings(max_examples=50, deadline=None)
@given(finite, finite, st.floats(0, 1))
def test_interpolation_exact_on_affine(a, b, s):
    g = Grid(-1.0, 3.0, 17)
    c = SampledCurve.from_function(lambda t: a * t + b, g)
    t = -1.0 + 4.0 * s
    assert abs(eval_curve(c, t)[0] - (a * t + b)) <= 1e-12 * (1 + abs(a) + abs(b))


def test_nonuniform_samples_rejected():
    with pytest.raises(ValueError):
        SampledCurve.from_samples([0.0, 0.1, 0.3], [[0.0], [1.0], [2.0]])


def test_curve_values_immutable():
    c = SampledCurve(Grid(0.0, 1.0, 3), [[0.0], [1.0], [2.0]])
    with pytest.raises(ValueError):
        c.values[0, 0] = 5.0
