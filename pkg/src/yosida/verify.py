"""Numerical certificates for inequalities satisfied by computed solutions.

Each checker evaluates both sides of an inequality at sampled points and
returns a Certificate whose budget itemizes the slack that is justified
by known error sources (solution error, quadrature, oracle accuracy,
roundoff). Budgets are computed from the inputs, never tuned.

For stability-type bounds two modes exist. With limit candidates (results
of solve_limit) the left side uses the extrapolated curves and the budget
carries their error estimates. With plain approximants u_lam the budget
carries the gap between the limit bound and the exact bound satisfied by
the discrete approximants, which is obtained by marching the discrete
comparison recurrence.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .certificate import Certificate, Sample
from .core import SampledCurve, Space, bracket_plus
from .kernels import decay_weights, exp_filter, rate_weights
from .operators import ORACLE_TOL, EvolutionProblem, PerturbedControl, _rows_at, resolve_perturbed
from .solver import SolveResult, SolverConfig, solve_line

__all__ = [
    "Certificate", "Sample", "SamplingPlan", "check_integral_solution",
    "check_stability_line", "check_stability_halfline", "check_half_whole_comparison",
    "check_ap_transfer", "find_almost_periods", "shift_sup", "check_boundedness",
    "stability_bound", "whole_line_bound", "omega_zero_bound",
]

EPS = np.finfo(float).eps


def _roundoff(scale: float) -> float:
    return 1e3 * EPS * (1.0 + scale)


def _trap(y: np.ndarray, dt: float) -> float:
    if y.size < 2:
        return 0.0
    return float(dt * (np.sum(y) - 0.5 * (y[0] + y[-1])))


def _trap_pair(y: np.ndarray, dt: float) -> tuple[float, float]:
    """Trapezoid value on the nodes and its change against every other node."""
    fine = _trap(y, dt)
    n = y.size - 1
    if n < 2:
        return fine, 0.0
    m = n - n % 2
    coarse = _trap(y[:m + 1:2], 2 * dt) + _trap(y[m:], dt)
    return fine, abs(fine - coarse)


# ---------------------------------------------------------------------------
# integral solutions


@dataclass(frozen=True)
class SamplingPlan:
    """Random (r, t, s, z) tuples for the integral-solution inequality.

    r < t are grid nodes of the tested window with t - r <= max_span;
    s is uniform over the window; z is uniform in the cube of half-width
    z_radius (default 1.5 sup|u| + 0.5). Test pairs are x = J z,
    y = (J z - z)/lam_probe for the resolvent J of A(s) + omega at
    lam_probe (default 1e-3 * lambda_max, or 1e-3 if that is infinite).
    """

    n_samples: int = 200
    seed: int = 0
    max_span: float = 2.0
    z_radius: float | None = None
    lam_probe: float | None = None

    def __post_init__(self):
        if self.n_samples < 1:
            raise ValueError("empty sampling plan")
        if not self.max_span > 0:
            raise ValueError("max_span must be positive")


def _segment_min_norm(V: np.ndarray) -> np.ndarray:
    """Euclidean distance from 0 to each segment [V_k, V_{k+1}]."""
    d = np.diff(V, axis=0)
    dd = np.sum(d * d, axis=1)
    with np.errstate(invalid="ignore", divide="ignore"):
        th = np.where(dd > 0, -np.sum(V[:-1] * d, axis=1) / dd, 0.0)
    th = np.clip(th, 0.0, 1.0)
    return np.linalg.norm(V[:-1] + th[:, None] * d, axis=1)


def _jump_excess(V: np.ndarray, W: np.ndarray, space: Space) -> np.ndarray:
    """Per interval, a bound on sup (|w| - [w, v]_+) over the linear interpolants.

    Since [w, .]_+ <= |w|, this bounds how far the bracket at any perturbed
    v can exceed the computed one. It vanishes where v = 0. In one
    dimension the excess is 2 max(0, -sign(v) w) with the sign of v on the
    interval, maximal at an endpoint unless v changes sign inside;
    elsewhere the bound 2|w| is used.
    """
    nW = space.norms(W)
    big = 2.0 * np.maximum(nW[:-1], nW[1:])
    zero = ~np.any(V[:-1] != 0, axis=1) & ~np.any(V[1:] != 0, axis=1)
    if space.dim == 1:
        sgn = np.sign(V[:-1, 0] + V[1:, 0])
        ends = 2.0 * np.maximum(0.0, np.maximum(-sgn * W[:-1, 0], -sgn * W[1:, 0]))
        cross = V[:-1, 0] * V[1:, 0] < 0
        out = np.where(cross, big, ends)
    else:
        out = big
    return np.where(zero, 0.0, out)


def _jump_measure(V: np.ndarray, eps: float, dt: float, space: Space) -> np.ndarray:
    """Per interval, a bound on int |[w, v + e]_+ - [w, v]_+| / (2 sup|w|) for |e| <= eps.

    v is the linear interpolant of the nodes V. In one dimension the
    bracket can only change where |v| <= eps; for the euclidean norm
    |v/|v| - v'/|v'|| <= 2 eps/|v|; other norms get the whole interval.
    """
    n = V.shape[0] - 1
    if eps == 0:
        return np.zeros(n)
    if space.dim == 1:
        v0, v1 = V[:-1, 0], V[1:, 0]
        d = v1 - v0
        flat = np.abs(d) < 1e-300
        with np.errstate(divide="ignore", invalid="ignore"):
            ta = np.where(flat, 0.0, (-eps - v0) / d)
            tb = np.where(flat, 1.0, (eps - v0) / d)
        lo = np.clip(np.minimum(ta, tb), 0.0, 1.0)
        hi = np.clip(np.maximum(ta, tb), 0.0, 1.0)
        frac = np.where(flat, (np.abs(v0) <= eps).astype(float), hi - lo)
        return dt * frac
    if space.norm_kind == "euclidean":
        with np.errstate(divide="ignore"):
            return dt * np.minimum(1.0, eps / _segment_min_norm(V))
    return np.full(n, dt)


def _bracket_flags(V: np.ndarray, space: Space) -> np.ndarray:
    """Intervals on which the bracket [w, v]_+ may be discontinuous in v."""
    zero = ~np.any(V[:-1] != 0, axis=1) & ~np.any(V[1:] != 0, axis=1)
    if space.dim == 1:
        flags = V[:-1, 0] * V[1:, 0] <= 0
    elif space.norm_kind == "euclidean":
        step = space.norms(np.diff(V, axis=0))
        flags = _segment_min_norm(V) <= 10 * step
    elif space.norm_kind == "sup":
        a = np.argmax(np.abs(V), axis=1)
        flags = (a[:-1] != a[1:]) | np.any(V[:-1] * V[1:] <= 0, axis=1)
    else:
        flags = np.any(V[:-1] * V[1:] <= 0, axis=1)
    # on a segment where v vanishes identically the bracket is the constant |w|
    return flags & ~zero


def _integrate_bracket_term(V, W, smooth, dt, omega, space, sub: int = 256):
    """int [W, V]_+ + omega|V| + smooth over the linear interpolants.

    Intervals where the bracket may jump are integrated on `sub` subnodes;
    their leftover error is at most (dt/sub) sup|W| each. Elsewhere the
    trapezoid error is estimated by comparison with the double step.
    Returns (value, quadrature error bound, node integrand).
    """
    g = bracket_plus(W, V, space) + omega * space.norms(V) + smooth
    pieces = 0.5 * dt * (g[:-1] + g[1:])
    flags = _bracket_flags(V, space)
    err = 0.0
    th = np.linspace(0.0, 1.0, sub + 1)[:, None]
    nW = space.norms(W)
    for k in np.nonzero(flags)[0]:
        Vs = V[k] + th * (V[k + 1] - V[k])
        Ws = W[k] + th * (W[k + 1] - W[k])
        gs = bracket_plus(Ws, Vs, space) + omega * space.norms(Vs) + smooth[k] + th[:, 0] * (smooth[k + 1] - smooth[k])
        pieces[k] = _trap(gs, dt / sub)
        err += dt / sub * max(nW[k], nW[k + 1])
    n = pieces.size
    for j in range(0, n - 1, 2):
        if not (flags[j] or flags[j + 1]):
            err += abs(pieces[j] + pieces[j + 1] - dt * (g[j] + g[j + 2]))
    return float(np.sum(pieces)), err, g


def _interp_error(c: SampledCurve) -> float:
    """Estimate of the linear-interpolation error between nodes: max second difference / 8."""
    if c.values.shape[0] < 3:
        return 0.0
    return float(np.max(c.space.norms(np.diff(c.values, n=2, axis=0)))) / 8.0


def _solution_curve(u, solution_error):
    if isinstance(u, SampledCurve):
        return u, float(solution_error or 0.0) + _interp_error(u)
    if not isinstance(u, SolveResult):
        raise TypeError("u must be a SolveResult or a SampledCurve")
    if u.extrapolated is not None:
        c = u.valid_extrapolated()
        return c, u.candidate_error(True) + u.tail_error_bound + _interp_error(c)
    if solution_error is None:
        if u.error_estimate is None:
            raise ValueError("solution error unknown: pass solution_error or use solve_limit")
        solution_error = u.candidate_error(False)
    c = u.valid_u()
    return c, float(solution_error) + u.tail_error_bound + _interp_error(c)


def check_integral_solution(u, p: EvolutionProblem, plan: SamplingPlan | None = None,
                            solution_error: float | None = None) -> Certificate:
    """Certify the integral-solution inequality on sampled tuples.

    For [x, y] in A(s) + omega I and r <= t:

        |u(t) - x| - |u(r) - x| <= int_r^t [y + f, u - x]_+ + omega |u - x|
                                   + L^w(|x|) int_r^t |h^w(v) - h^w(s)|
                                   + |y| int_r^t |g(v) - g(s)|.

    Control differences are anchored at s, the time the test pair belongs
    to. Budget components (maxima over samples):
      solution    eps (2 + |omega|(t - r)) + int (|y + f| - [y + f, u - x]_+)
                  over the set where the bracket may jump because of the
                  solution error eps (eps includes the interpolation error
                  between nodes); only an increase of the right side matters
      quadrature  trapezoid change against the double step where the
                  integrand is smooth, plus the leftover jump error of the
                  refined intervals
      oracle      resolvent-oracle error propagated through x and y
      roundoff
    """
    plan = plan or SamplingPlan()
    curve, eps = _solution_curve(u, solution_error)
    space = p.space
    ts = curve.times
    vals = curve.values
    n = ts.size
    if n < 3:
        raise ValueError("tested window has fewer than 3 nodes")
    dt = curve.grid.dt
    sup_u = curve.sup_norm()
    lam_probe = plan.lam_probe
    if lam_probe is None:
        lam_probe = 1e-3 * (p.lambda_max if math.isfinite(p.lambda_max) else 1.0)
    z_radius = plan.z_radius if plan.z_radius is not None else 1.5 * sup_u + 0.5
    pc = PerturbedControl(p.family.control, p.omega)
    rng = np.random.default_rng(plan.seed)
    max_nodes = max(1, int(round(plan.max_span / dt)))
    F = p.forcing_at(ts)
    samples = []
    comp = {"solution": 0.0, "quadrature": 0.0, "oracle": 0.0, "roundoff": 0.0}
    for _ in range(plan.n_samples):
        i_r = int(rng.integers(0, n - 1))
        i_t = i_r + int(rng.integers(1, min(max_nodes, n - 1 - i_r) + 1))
        s = float(rng.uniform(ts[0], ts[-1]))
        z = rng.uniform(-z_radius, z_radius, size=space.dim)
        x = np.asarray(resolve_perturbed(p, s, lam_probe, z), dtype=float).reshape(-1)
        y = (x - z) / lam_probe
        sl = slice(i_r, i_t + 1)
        V = vals[sl] - x
        W = y + F[sl]
        nu = ts[sl]
        nx = space.norm(x)
        ny = space.norm(y)
        smooth = pc.L_omega(nx) * pc.h_diff(nu, s) + ny * pc.g_diff(nu, s)
        rhs, quad, integrand = _integrate_bracket_term(V, W, smooth, dt, p.omega, space)
        nV = space.norms(V)
        lhs = float(nV[-1] - nV[0])
        span = float(nu[-1] - nu[0])
        jump = float(np.sum(_jump_measure(V, eps, dt, space) * _jump_excess(V, W, space)))
        sol = eps * (2.0 + abs(p.omega) * span) + jump
        dx = ORACLE_TOL * (1.0 + space.norm(z))
        orc = dx * (2.0 + span * (abs(p.omega) + 2.0 / lam_probe))
        rnd = _roundoff(float(np.max(np.abs(integrand))) * span + sup_u + nx)
        for key, val in (("solution", sol), ("quadrature", quad), ("oracle", orc), ("roundoff", rnd)):
            comp[key] = max(comp[key], val)
        samples.append(Sample({"r": float(ts[i_r]), "t": float(ts[i_t]), "s": s, "z": z.tolist()},
                              lhs, rhs))
    return Certificate(
        name="integral_solution", samples=samples, budget=comp,
        params={"lam_probe": lam_probe, "seed": plan.seed, "n_samples": plan.n_samples,
                "solution_error": eps, "window": [float(ts[0]), float(ts[-1])],
                "max_span": plan.max_span},
        notes=["test pairs quantified over A(s) + omega I for all sampled s",
               "control differences anchored at s"])


# ---------------------------------------------------------------------------
# stability bounds


def _forcing_diff_norms(f1, f2, t, space: Space) -> np.ndarray:
    t = np.atleast_1d(np.asarray(t, dtype=float))
    a = np.zeros((t.size, space.dim)) if f1 is None else _rows_at(f1, t)
    b = np.zeros((t.size, space.dim)) if f2 is None else _rows_at(f2, t)
    return space.norms(np.broadcast_to(a - b, (t.size, space.dim)))


def _line_history_integral(fn, omega: float, t0: float, m: int = 16) -> tuple[float, float]:
    """int_0^inf e^{omega r} fn(t0 - r) dr by composite Gauss-Legendre with one doubling."""
    from .resolvents import gl_panels

    length = 45.0 / abs(omega)

    def rule(npan):
        nodes, w = gl_panels(np.linspace(0.0, length, npan + 1), m)
        return float(np.dot(w * np.exp(omega * nodes), fn(t0 - nodes)))

    npan = int(math.ceil(length / 0.25))
    a, b = rule(npan), rule(2 * npan)
    return b, abs(b - a)


def _exp_bound_curve(dfn, omega: float, grid, start_value: float) -> tuple[np.ndarray, float]:
    """R(t) = e^{omega(t - t0)} R(t0) + int_t0^t e^{omega(t-v)} dfn(v) dv on the grid nodes.

    The integral is exact for the linear interpolant of dfn; the error of
    that interpolation is estimated by repeating on a twice finer grid.
    """
    ts = grid.times
    dt = grid.dt
    coarse = exp_filter(dfn(ts), *rate_weights(omega, dt), start_value)
    tf = np.linspace(ts[0], ts[-1], 2 * ts.size - 1)
    fine = exp_filter(dfn(tf), *rate_weights(omega, dt / 2), start_value)[::2]
    return fine, float(np.max(np.abs(fine - coarse)))


def _bound_march(lam: float, omega: float, grid, dF: np.ndarray, delta: float,
                 line: bool, gap: float = 0.0, freeze: bool = True) -> np.ndarray:
    """Exact majorant of |u1 - u2| for two discrete approximants.

    Nonexpansiveness of the resolvent and positivity of the convolution
    weights give d_k <= q(lam dF_k + m_k + C(d)_k) + delta, where m_k is
    the memory gap (e^{-t/lam} gap on the half line, 0 on the line). The
    majorant solves this recurrence with equality, node by node.
    """
    q = 1.0 / (1.0 - lam * omega)
    E, w0, w1 = decay_weights(grid.dt / lam)
    b = q * w1
    ts = grid.times
    decay = np.exp(-(ts - ts[0]) / lam)
    B = np.empty(ts.size)
    if line:
        if freeze:
            if not q < 1:
                raise ValueError("line bound needs omega < 0")
            B[0] = (q * lam * dF[0] + delta) / (1.0 - q)
            C = B[0]
        else:
            B[0] = q * lam * dF[0] + delta
            C = 0.0
    else:
        B[0] = q * (lam * dF[0] + gap) + delta
        C = 0.0
    mem = 0.0 if line else gap
    for k in range(1, ts.size):
        K = E * C + w0 * B[k - 1]
        B[k] = (q * (lam * dF[k] + decay[k] * mem + K) + delta) / (1.0 - b)
        C = K + w1 * B[k]
    return B


def _same_setup(u1: SolveResult, u2: SolveResult, omega: float) -> None:
    if u1.u.grid != u2.u.grid:
        raise ValueError("mismatched problems: solutions live on different grids")
    if u1.lam != u2.lam:
        raise ValueError("mismatched problems: different lam")
    for r in (u1, u2):
        if "omega" in r.meta and r.meta["omega"] != omega:
            raise ValueError(f"mismatched problems: solution has omega={r.meta['omega']}, "
                             f"check uses {omega}")


def _limit_mode(u1: SolveResult, u2: SolveResult, limit: bool | None) -> bool:
    has = u1.extrapolated is not None and u2.extrapolated is not None
    if limit is None:
        return has
    if limit and not has:
        raise ValueError("limit mode needs results of solve_limit")
    return limit


def _window_indices(grid, window) -> slice:
    return slice(grid.index_of(window[0]), grid.index_of(window[1]) + 1)


def _node_samples(ts, lhs, rhs, stride: int = 1) -> list:
    return [Sample({"t": float(t)}, float(a), float(b))
            for t, a, b in zip(ts[::stride], lhs[::stride], rhs[::stride])]


def check_stability_line(u1: SolveResult, u2: SolveResult, f1, f2, omega: float,
                         limit: bool | None = None) -> Certificate:
    """|u1(t) - u2(t)| <= int_0^inf e^{omega r} |f1(t - r) - f2(t - r)| dr on the common window.

    u1, u2 solve the same whole-line problem with forcings f1, f2.
    """
    if not omega < 0:
        raise ValueError("whole-line stability needs omega < 0")
    _same_setup(u1, u2, omega)
    space = u1.u.space
    grid = u1.u.grid
    window = (max(u1.valid_window[0], u2.valid_window[0]), min(u1.valid_window[1], u2.valid_window[1]))
    dfn = lambda t: _forcing_diff_norms(f1, f2, t, space)
    start, start_err = _line_history_integral(dfn, omega, grid.t_start)
    R, interp_err = _exp_bound_curve(dfn, omega, grid, start)
    budget = {"quadrature": start_err + interp_err}
    sel = _window_indices(grid, window)
    sup = max(u1.u.sup_norm(), u2.u.sup_norm())
    if _limit_mode(u1, u2, limit):
        d = space.norms(u1.extrapolated.values - u2.extrapolated.values)
        budget["solution"] = (u1.candidate_error(True) + u2.candidate_error(True)
                              + u1.tail_error_bound + u2.tail_error_bound)
        mode = "limit"
    else:
        d = space.norms(u1.u.values - u2.u.values)
        delta = u1.residual + u2.residual + 2 * ORACLE_TOL * (1.0 + sup)
        freeze = u1.meta.get("left_extension", "freeze") == "freeze"
        B = _bound_march(u1.lam, omega, grid, dfn(grid.times), delta, line=True, freeze=freeze)
        budget["lambda"] = float(np.max(np.maximum(B[sel] - R[sel], 0.0)))
        mode = "approximant"
    budget["roundoff"] = _roundoff(sup)
    return Certificate(
        name="stability_line", samples=_node_samples(grid.times[sel], d[sel], R[sel]),
        budget=budget, params={"omega": omega, "lam": u1.lam, "mode": mode,
                               "window": list(window), "dt": grid.dt})


def check_stability_halfline(u1: SolveResult, u2: SolveResult, f1, f2, x1, x2, omega: float,
                             limit: bool | None = None) -> Certificate:
    """|u1(t) - u2(t)| <= e^{omega t}|x1 - x2| + int_0^t e^{omega(t-v)} |f1(v) - f2(v)| dv.

    Time is measured from the common grid start.
    """
    _same_setup(u1, u2, omega)
    space = u1.u.space
    grid = u1.u.grid
    gap = space.norm(np.asarray(x1, dtype=float) - np.asarray(x2, dtype=float))
    dfn = lambda t: _forcing_diff_norms(f1, f2, t, space)
    R, interp_err = _exp_bound_curve(dfn, omega, grid, 0.0)
    R = R + np.exp(omega * (grid.times - grid.t_start)) * gap
    budget = {"quadrature": interp_err}
    sup = max(u1.u.sup_norm(), u2.u.sup_norm())
    if _limit_mode(u1, u2, limit):
        d = space.norms(u1.extrapolated.values - u2.extrapolated.values)
        budget["solution"] = u1.candidate_error(True) + u2.candidate_error(True)
        mode = "limit"
    else:
        d = space.norms(u1.u.values - u2.u.values)
        delta = u1.residual + u2.residual + 2 * ORACLE_TOL * (1.0 + sup)
        B = _bound_march(u1.lam, omega, grid, dfn(grid.times), delta, line=False, gap=gap)
        budget["lambda"] = float(np.max(np.maximum(B - R, 0.0)))
        mode = "approximant"
    budget["roundoff"] = _roundoff(sup)
    return Certificate(
        name="stability_halfline", samples=_node_samples(grid.times, d, R),
        budget=budget, params={"omega": omega, "lam": u1.lam, "mode": mode, "dt": grid.dt,
                               "initial_gap": gap})


def line_memory_at(res: SolveResult, t: float) -> np.ndarray:
    """(1/lam) int_0^inf e^{-s/lam} u(t - s) ds for a whole-line approximant (history as solved)."""
    u = res.u
    E, w0, w1 = decay_weights(u.grid.dt / res.lam)
    freeze = res.meta.get("left_extension", "freeze") == "freeze"
    init = u.values[0] if freeze else np.zeros(u.space.dim)
    conv = exp_filter(u.values, E, w0, w1, init)
    return conv[u.grid.index_of(t)]


def check_half_whole_comparison(u_line: SolveResult, u_half: SolveResult, omega: float,
                                limit: bool | None = None) -> Certificate:
    """|u(t) - v(t)| <= e^{omega(t - a)} |u(a) - x0| for t >= a.

    u solves the whole-line problem, v the half-line problem started at
    x0 = v's initial value at its grid start a. Both must share lam and dt.
    """
    gl, gh = u_line.u.grid, u_half.u.grid
    if not math.isclose(gl.dt, gh.dt, rel_tol=1e-12):
        raise ValueError("mismatched problems: different time steps")
    if u_line.lam != u_half.lam:
        raise ValueError("mismatched problems: different lam")
    space = u_line.u.space
    a = gh.t_start
    x0 = np.asarray(u_half.meta["u0"], dtype=float)
    i_a = gl.index_of(a)
    t_end = min(gl.t_end, gh.t_end)
    lo = max(a, u_line.valid_window[0])
    i_lo_h = gh.index_of(lo) if lo > a else 0
    n = gh.index_of(t_end) + 1
    sel_h = slice(i_lo_h, n)
    sel_l = slice(i_a + i_lo_h, i_a + n)
    ts = gh.times[sel_h]
    sup = max(u_line.u.sup_norm(), u_half.u.sup_norm())
    use_limit = _limit_mode(u_line, u_half, limit)
    line_vals = (u_line.extrapolated if use_limit else u_line.u).values
    half_vals = (u_half.extrapolated if use_limit else u_half.u).values
    ua = line_vals[i_a]
    gap = space.norm(ua - x0)
    R = np.exp(omega * (ts - a)) * gap
    d = space.norms(line_vals[sel_l] - half_vals[sel_h])
    budget = {}
    if use_limit:
        budget["solution"] = (u_line.candidate_error(True) + u_half.candidate_error(True)
                              + u_line.tail_error_bound)
        mode = "limit"
    else:
        mem = line_memory_at(u_line, a)
        delta = u_line.residual + u_half.residual + 2 * ORACLE_TOL * (1.0 + sup)
        B = _bound_march(u_line.lam, omega, gh.sub(0, n - 1), np.zeros(n), delta, line=False,
                         gap=space.norm(mem - x0))
        budget["lambda"] = float(np.max(np.maximum(B[sel_h] - R, 0.0)))
        budget["tail"] = float(u_line.tail_bound[i_a]) if u_line.tail_bound is not None else 0.0
        mode = "approximant"
    budget["roundoff"] = _roundoff(sup)
    return Certificate(
        name="half_whole_comparison", samples=_node_samples(ts, d, R), budget=budget,
        params={"omega": omega, "lam": u_line.lam, "mode": mode, "start": a, "initial_gap": gap})


# ---------------------------------------------------------------------------
# almost periodicity through shift transfer


def shift_sup(f, s, space: Space, tau=None) -> tuple[np.ndarray, bool]:
    """Upper bounds of sup_t |f(t + s) - f(t)| per shift, and whether they are certified.

    Closed-form bounds are used when f provides shift_sup_bound; otherwise
    the sup is sampled over tau (default [0, 400] with step 0.01), which can
    underestimate it.
    """
    s = np.atleast_1d(np.asarray(s, dtype=float))
    bound = getattr(f, "shift_sup_bound", None)
    if bound is not None:
        vals = bound(s, space.norm_kind)
        if vals is not None:
            return np.asarray(vals, dtype=float), True
    tau = np.arange(0.0, 400.0, 0.01) if tau is None else np.asarray(tau, dtype=float)
    base = _rows_at(f, tau)
    out = np.array([float(np.max(space.norms(_rows_at(f, tau + si) - base))) for si in s])
    return out, False


def find_almost_periods(f, eps: float, s_max: float, s_min: float = 0.0, ds: float = 1e-3,
                        space: Space | None = None, tau=None) -> list[dict]:
    """eps-almost-periods of f in [s_min, s_max], one per connected run of the scan.

    Each run of shifts s with sup_t |f(t + s) - f(t)| <= eps is reported by
    its best shift. The run attached to s = 0 is trivial and skipped.
    """
    if not eps > 0:
        raise ValueError("eps must be positive")
    space = space or Space(getattr(f, "dim", 1))
    s = np.arange(s_min, s_max + 0.5 * ds, ds)
    vals, certified = shift_sup(f, s, space, tau)
    ok = vals <= eps
    out = []
    i = 0
    while i < s.size:
        if not ok[i]:
            i += 1
            continue
        j = i
        while j + 1 < s.size and ok[j + 1]:
            j += 1
        if not (i == 0 and s[0] <= ds):
            k = i + int(np.argmin(vals[i:j + 1]))
            out.append({"shift": float(s[k]), "eps": float(vals[k]),
                        "run": [float(s[i]), float(s[j])], "certified": certified})
        i = j + 1
    return out


def check_ap_transfer(p: EvolutionProblem, shifts, cfg: SolverConfig | None = None,
                      result: SolveResult | None = None) -> Certificate:
    """sup_t |u(t + s) - u(t)| <= sup_t |f(t + s) - f(t)| / |omega| for each shift s.

    Needs an autonomous family. Shifts are rounded to multiples of the grid
    step, so the shifted approximant is again an approximant for the
    shifted forcing and the discrete bound holds with the same constant;
    the budget then covers the truncated history (tail bounds), the
    fixed-point defect and, for limit candidates, the solution error.
    """
    if not p.family.autonomous:
        raise ValueError(f"family {p.family.label!r} is not autonomous")
    if not p.omega < 0:
        raise ValueError("almost-periodicity transfer needs omega < 0")
    if result is None:
        if cfg is None:
            raise ValueError("pass cfg or a precomputed result")
        result = solve_line(p, cfg)
    space = p.space
    f = p.forcing
    grid = result.u.grid
    dt = grid.dt
    use_limit = result.extrapolated is not None
    vals = (result.extrapolated if use_limit else result.u).values
    i0, i1 = grid.index_of(result.valid_window[0]), grid.index_of(result.valid_window[1])
    tail = result.tail_bound if result.tail_bound is not None else np.zeros(grid.n_points)
    samples = []
    sol = tail_b = samp = 0.0
    q = result.meta.get("q", 1.0 / (1.0 - result.lam * p.omega))
    defect = (result.residual + ORACLE_TOL * (1.0 + result.u.sup_norm())) / (1.0 - q) if q < 1 else 0.0
    for s in np.atleast_1d(np.asarray(shifts, dtype=float)):
        k = int(round(s / dt))
        s_grid = k * dt
        if i1 - i0 <= k:
            raise ValueError(f"shift {s} does not fit in the valid window")
        diff = space.norms(vals[i0 + k:i1 + 1] - vals[i0:i1 + 1 - k])
        lhs = float(np.max(diff))
        if f is None:
            rhs_f, certified = 0.0, True
        else:
            b, certified = shift_sup(f, [s_grid], space)
            rhs_f = float(b[0])
            if not certified:
                tau = np.arange(grid.t_start - 45.0 / abs(p.omega), grid.t_end, dt)
                dd = space.norms(_rows_at(f, tau + s_grid) - _rows_at(f, tau))
                samp = max(samp, float(np.max(np.abs(np.diff(dd)))) / (2 * abs(p.omega)))
        tail_b = max(tail_b, float(tail[i0]) * 2)
        if use_limit:
            sol = max(sol, 2.0 * (result.candidate_error(True) + result.tail_error_bound))
        samples.append(Sample({"shift": float(s), "grid_shift": s_grid, "certified_rhs": certified},
                              lhs, rhs_f / abs(p.omega)))
    budget = {"tail": tail_b, "defect": defect, "roundoff": _roundoff(result.u.sup_norm())}
    if use_limit:
        budget["solution"] = sol
    if samp:
        budget["sampling"] = samp
    return Certificate(name="ap_transfer", samples=samples, budget=budget,
                       params={"omega": p.omega, "lam": result.lam, "dt": dt,
                               "window": list(result.valid_window),
                               "mode": "limit" if use_limit else "approximant"})


# ---------------------------------------------------------------------------
# boundedness across a lam sweep


def stability_bound(omega: float, f_sup: float, u_zero_gap: float = 0.0) -> float:
    """sup|u| <= |f|_inf/|omega| (+ initial gap) when 0 is a stationary point of every A(t)."""
    if not omega < 0:
        raise ValueError("needs omega < 0")
    return f_sup / abs(omega) + u_zero_gap


def whole_line_bound(x0_norm: float, K1: float, omega: float, lam: float) -> float:
    """|u_lam(t)| <= |x0| + K2 (lam q + 1/|omega|), K2 = |omega||x0| + K1, q = 1/(1 - lam omega).

    K1 bounds |A(t)x0| (plus |f|_inf with a forcing) for a fixed x0 in the
    generalized domain.
    """
    if not omega < 0:
        raise ValueError("needs omega < 0")
    K2 = abs(omega) * x0_norm + K1
    q = 1.0 / (1.0 - lam * omega)
    return x0_norm + K2 * (lam * q + 1.0 / abs(omega))


def omega_zero_bound(initial_gap: float, f_l1: float, f_sup: float, lam: float) -> float:
    """|u_lam(t) - x0| <= |x0 - u0| + int |f| + lam |f|_inf for omega = 0, f(t) in A(t)x0."""
    return initial_gap + f_l1 + lam * f_sup


def check_boundedness(results, bound=None, center=None, growth: float = 1.05,
                      window=None) -> Certificate:
    """Sup norms and difference quotients along a lam sweep (decreasing lam).

    Certifies sup_{i+1} <= growth * sup_i between successive lam, and
    sup_i <= bound(lam_i) when a bound (number or callable of lam) is given.
    Sup norms are of u_lam - center (default 0) over the common window.
    """
    results = list(getattr(results, "results", results))
    if len(results) < 2:
        raise ValueError("need at least two results")
    lams = [r.lam for r in results]
    if any(b >= a for a, b in zip(lams, lams[1:])):
        raise ValueError("results must be ordered by strictly decreasing lam")
    if window is None:
        window = (max(r.valid_window[0] for r in results), min(r.valid_window[1] for r in results))
    space = results[0].u.space
    sups, quotients = [], []
    for r in results:
        c = r.u.restrict(*window)
        v = c.values if center is None else c.values - np.asarray(center, dtype=float)
        sups.append(float(np.max(space.norms(v))))
        quotients.append(float(np.max(space.norms(np.diff(c.values, axis=0)))) / c.grid.dt)
    samples = [Sample({"lam_prev": a, "lam": b, "kind": "growth"}, sb, growth * sa)
               for a, b, sa, sb in zip(lams, lams[1:], sups, sups[1:])]
    if bound is not None:
        for lam, s in zip(lams, sups):
            rhs = float(bound(lam)) if callable(bound) else float(bound)
            samples.append(Sample({"lam": lam, "kind": "bound"}, s, rhs))
    defect = max(r.residual for r in results)
    return Certificate(
        name="boundedness", samples=samples,
        budget={"defect": defect, "roundoff": _roundoff(max(sups))},
        params={"lams": lams, "sups": sups, "difference_quotients": quotients,
                "window": list(window), "growth": growth})
