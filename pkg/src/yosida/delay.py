"""Functional differential equations with finite delay.

u'(t) in A(t)u(t) + omega u(t) + G(t, u_t), with u_t(theta) = u(t + theta)
on [-r, 0], is solved on the whole line as the fixed point of
v -> (whole-line solution with forcing f(t) = G(t, v_t)). The map
contracts with factor beta/|omega| when G is beta-Lipschitz in the
history sup-norm and beta < -omega.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from .certificate import Certificate, Sample
from .core import Grid, SampledCurve, WindowError, eval_curve
from .kernels import exp_filter, rate_weights
from .operators import EvolutionProblem, OperatorFamily, _rows_at
from .solver import SolveResult, SolverConfig, SolverError, solve_halfline, solve_line
from .verify import line_memory_at

EPS = np.finfo(float).eps


@dataclass(frozen=True, eq=False)
class HistoryFunctional:
    """G(t, phi) = coef * (history term) + forcing(t).

    kinds:
      point_delay  history term phi(-r)
      distributed  history term int_{-r}^{0} k(theta) phi(theta) dtheta, with the
                   sampled kernel weights normalized to absolute sum 1
      custom       history term map(t, theta, phi_values) for a user map whose
                   Lipschitz constant is declared through beta
    coef is a scalar or a (dim, dim) matrix; beta must bound |coef| times
    the Lipschitz constant of the history term.
    """

    r: float
    kind: str = "point_delay"
    beta: float = 0.0
    coef: float | np.ndarray = 1.0
    kernel: Callable | None = None
    forcing: Callable | None = None
    map: Callable | None = None
    dim: int = 1

    def __post_init__(self):
        if not self.r > 0:
            raise ValueError(f"delay length r must be positive, got {self.r}")
        if self.kind not in ("point_delay", "distributed", "custom"):
            raise ValueError(f"unknown functional kind {self.kind!r}")
        if self.kind == "distributed" and self.kernel is None:
            raise ValueError("distributed functional needs a kernel")
        if self.kind == "custom" and self.map is None:
            raise ValueError("custom functional needs a map")
        if not self.beta >= 0:
            raise ValueError("beta must be >= 0")
        if self.kind != "custom" and self.coef_norm() > self.beta * (1 + 1e-12):
            raise ValueError(f"declared beta={self.beta} is below |coef|={self.coef_norm()}")

    def coef_norm(self) -> float:
        c = np.asarray(self.coef, dtype=float)
        if c.ndim == 0:
            return abs(float(c))
        return float(np.linalg.norm(c, 2))

    def _apply_coef(self, v: np.ndarray) -> np.ndarray:
        c = np.asarray(self.coef, dtype=float)
        return c * v if c.ndim == 0 else v @ c.T

    def weights(self, dt: float) -> np.ndarray:
        """Kernel weights at lags 0, dt, ..., r (distributed kind), absolute sum 1."""
        m = int(round(self.r / dt))
        if abs(m * dt - self.r) > 1e-9 * max(1.0, self.r):
            raise WindowError(f"delay r={self.r} is not a multiple of dt={dt}")
        theta = -dt * np.arange(m + 1)
        w = np.full(m + 1, dt)
        w[0] = w[-1] = 0.5 * dt
        a = w * np.asarray(self.kernel(theta), dtype=float)
        total = np.sum(np.abs(a))
        if total == 0:
            raise ValueError("kernel vanishes on the sampled lags")
        return a / total

    def history_term(self, curve: SampledCurve, t_nodes=None) -> np.ndarray:
        """History term at the nodes of curve; history before the window is frozen."""
        g = curve.grid
        dt = g.dt
        vals = curve.values
        n = g.n_points
        idx = np.arange(n) if t_nodes is None else np.asarray(t_nodes)
        if self.kind == "point_delay":
            m = int(round(self.r / dt))
            if abs(m * dt - self.r) > 1e-9 * max(1.0, self.r):
                # off-grid delay: interpolate, clamping to the frozen history
                ts = g.times[idx] - self.r
                return eval_curve(curve, np.clip(ts, g.t_start, g.t_end))
            return vals[np.maximum(idx - m, 0)]
        if self.kind == "distributed":
            a = self.weights(dt)
            m = a.size - 1
            padded = np.concatenate([np.repeat(vals[:1], m, axis=0), vals], axis=0)
            out = np.empty((idx.size, vals.shape[1]))
            for c in range(vals.shape[1]):
                full = np.convolve(padded[:, c], a, mode="valid")
                out[:, c] = full[idx]
            return out
        m = int(round(self.r / dt))
        theta = -dt * np.arange(m, -1, -1)
        out = []
        for k in idx:
            seg = vals[np.maximum(np.arange(k - m, k + 1), 0)]
            out.append(np.asarray(self.map(g.times[k], theta, seg), dtype=float).reshape(-1))
        return np.array(out)

    def apply(self, curve: SampledCurve) -> np.ndarray:
        """G(t, u_t) at every node of curve, shape (n, dim)."""
        h = self.history_term(curve)
        out = h if self.kind == "custom" else self._apply_coef(h)
        if self.forcing is not None:
            out = out + _rows_at(self.forcing, curve.times)
        return out

    def validate(self, dt: float, n_pairs: int = 50, seed: int = 0) -> float:
        """Largest observed |G(t, phi1) - G(t, phi2)| / |phi1 - phi2|_sup; raises if above beta."""
        rng = np.random.default_rng(seed)
        m = int(round(self.r / dt))
        grid = Grid(0.0, m * dt, m + 1)
        worst = 0.0
        from .core import Space
        space = Space(self.dim)
        for _ in range(n_pairs):
            p1 = rng.normal(size=(m + 1, self.dim))
            p2 = rng.normal(size=(m + 1, self.dim))
            c1 = SampledCurve(grid, p1, space)
            c2 = SampledCurve(grid, p2, space)
            g1 = self.apply(c1)[-1:]
            g2 = self.apply(c2)[-1:]
            num = float(space.norms(g1 - g2)[0])
            den = float(np.max(space.norms(p1 - p2)))
            worst = max(worst, num / den)
        if worst > self.beta * (1 + 1e-9):
            raise ValueError(f"observed Lipschitz ratio {worst:.4g} exceeds declared beta={self.beta}")
        return worst


@dataclass(frozen=True, eq=False)
class DelayProblem:
    family: OperatorFamily
    omega: float
    functional: HistoryFunctional
    label: str = ""

    def __post_init__(self):
        if not self.omega < 0:
            raise ValueError(f"delay problems need omega < 0, got {self.omega}")
        if not self.functional.beta < -self.omega:
            raise ValueError(f"hypothesis violated: need beta < -omega, got beta={self.functional.beta}, "
                             f"omega={self.omega}")

    @property
    def contraction(self) -> float:
        return self.functional.beta / abs(self.omega)

    def line_problem(self, forcing) -> EvolutionProblem:
        return EvolutionProblem(self.family, self.omega, forcing, label=self.label)


def segment(u: SampledCurve, t: float, r: float) -> SampledCurve:
    """History segment phi(theta) = u(t + theta) on [-r, 0]."""
    if t - r < u.grid.t_start - 1e-12 or t > u.grid.t_end + 1e-12:
        raise WindowError(f"segment [{t - r}, {t}] is not inside the window "
                          f"[{u.grid.t_start}, {u.grid.t_end}]")
    m = max(1, int(round(r / u.grid.dt)))
    theta = np.linspace(-r, 0.0, m + 1)
    return SampledCurve(Grid(-r, 0.0, m + 1), eval_curve(u, t + theta), u.space)


def fde_tail(dp: DelayProblem, lam: float, D: float, tail_tol: float, n_scan: int = 2000):
    """(rho, M) with |window solution - true solution| <= M e^{-rho (t - t0)}.

    D bounds the mismatch of the frozen history. With kappa = |omega| q the
    forcing gain kernel is q lam delta + q^2 e^{-kappa s}; an exponential
    ansatz closes when gamma(rho) = beta e^{rho r}(q lam + q^2/(kappa - rho)) < 1,
    giving M = q D/(1 - gamma). rho is chosen to reach tail_tol soonest.
    """
    q = 1.0 / (1.0 - lam * dp.omega)
    kappa = abs(dp.omega) * q
    beta, r = dp.functional.beta, dp.functional.r
    rhos = kappa * (np.arange(1, n_scan) / n_scan)
    gamma = beta * np.exp(rhos * r) * (q * lam + q * q / (kappa - rhos))
    ok = gamma < 1
    if not np.any(ok):
        raise ValueError("delayed feedback too strong for a tail bound at this lam")
    M = q * D / (1.0 - gamma[ok])
    T = np.log(np.maximum(M / tail_tol, 1.0)) / rhos[ok]
    k = int(np.argmin(T))
    return float(rhos[ok][k]), float(M[k])


def solve_fde(dp: DelayProblem, cfg: SolverConfig, tol: float | None = None,
              max_outer: int = 200, initial: SampledCurve | None = None) -> SolveResult:
    """Outer fixed-point iteration v -> solve_line(f = G(., v_.)).

    Inner solves are warm-started from the previous iterate and run to
    max(picard_tol, 1e-5 * last outer change); the last solve always runs
    to picard_tol. Iteration stops when the outer sup-change is at most
    tol (default 10 * picard_tol). An inner solve to tolerance e lands
    within e of the exact image, so a change c_k carries an error of at
    most e_k + e_{k-1}. Successive change ratios are recorded where both
    changes exceed 100 (e_k + e_{k-1}) and must not exceed
    beta/|omega| + 0.05.
    """
    tol = 10 * cfg.picard_tol if tol is None else tol
    grid = cfg.grid
    space_dim = dp.family.space.dim
    if dp.functional.dim != space_dim:
        raise ValueError("functional dimension does not match the family")
    v = initial if initial is not None else SampledCurve(grid, np.zeros((grid.n_points, space_dim)),
                                                        dp.family.space)
    changes, ratios, inner_iters, inner_tols = [], [], [], []
    kappa = dp.contraction
    res = None
    inner_tol = cfg.picard_tol
    prev_change = None
    converged = False
    for it in range(max_outer):
        forcing = SampledCurve(grid, dp.functional.apply(v), dp.family.space)
        p = dp.line_problem(forcing)
        inner_cfg = replace(cfg, picard_tol=inner_tol)
        res = solve_line(p, inner_cfg, initial=v if it > 0 or initial is not None else None)
        inner_iters.append(res.iterations)
        inner_tols.append(inner_tol)
        change = float(np.max(res.u.space.norms(res.u.values - v.values)))
        changes.append(change)
        noise = inner_tol + (inner_tols[-2] if it > 0 else 0.0)
        if prev_change is not None and min(prev_change, change) > 100 * noise:
            ratios.append(change / prev_change)
        prev_change = change
        v = res.u
        if change <= tol and inner_tol <= cfg.picard_tol:
            converged = True
            break
        inner_tol = max(cfg.picard_tol, 1e-5 * change)
    if not converged:
        raise SolverError(f"outer iteration did not reach {tol:.2e} in {max_outer} steps "
                          f"(last change {changes[-1]:.2e})")
    worst = max(ratios) if ratios else 0.0
    if worst > kappa + 0.05:
        raise SolverError(f"outer contraction {worst:.4f} exceeds beta/|omega| + 0.05 = {kappa + 0.05:.4f}")
    D = 2.0 * res.u.sup_norm() if cfg.left_extension == "freeze" else res.u.sup_norm()
    rho, M = fde_tail(dp, cfg.lam, D, cfg.tail_tol)
    tail = M * np.exp(-rho * (grid.times - grid.t_start))
    ok = np.nonzero(tail <= cfg.tail_tol)[0]
    if ok.size < 2:
        raise WindowError(f"window too short for the delayed tail: decay rate {rho:.3g}, "
                          f"constant {M:.3g}, tail_tol {cfg.tail_tol}")
    i0 = int(ok[0])
    outer_err = changes[-1] * kappa / (1.0 - kappa)
    res.tail_bound = tail
    res.tail_error_bound = float(tail[i0])
    res.valid_window = (float(grid.times[i0]), grid.t_end)
    res.meta = dict(res.meta, outer_changes=changes, outer_ratios=ratios, outer_iterations=len(changes),
                    inner_tolerances=inner_tols,
                    inner_iterations=inner_iters, contraction_bound=kappa, outer_error=outer_err,
                    tail_rate=rho, tail_constant=M, label=dp.label)
    return res


def solve_fde_limit(dp: DelayProblem, cfg: SolverConfig, lam_min: float, **kw) -> SolveResult:
    """solve_fde at lam_min, 2 lam_min, 4 lam_min with a first-order Richardson combination.

    Same estimates as the evolution solver's limit driver with three values
    of lam: the order cannot be observed, so the change against the next
    combination is taken at first order (divisor 1). There is no
    grid-halving part (the delay term is sampled on the grid).
    """
    lams = [lam_min, 2 * lam_min, 4 * lam_min]
    res = [solve_fde(dp, cfg.with_lam(l), **kw) for l in lams]
    a = max(r.valid_window[0] for r in res)
    g = cfg.grid
    sel = slice(g.index_of(a), g.n_points)
    u1, u2, u4 = (r.u.values for r in res)
    norms = res[0].u.space.norms
    R1 = 2 * u1 - u2
    R2 = 2 * u2 - u4
    out = res[0]
    out.valid_window = (a, g.t_end)
    out.error_estimate = float(np.max(norms(u1[sel] - u2[sel])))
    out.extrapolated = SampledCurve(g, R1, out.u.space)
    out.extrapolation_error = float(np.max(norms(R1[sel] - R2[sel])))
    out.tail_error_bound = max(r.tail_bound[sel.start] for r in res)
    out.meta = dict(out.meta, lams=lams)
    return out


def fde_residual(u: SampledCurve, dp: DelayProblem, tail_tol: float = 1e-8):
    """For A = 0: |u(t) - int_0^inf e^{omega s} G(t - s, u_{t-s}) ds| on the nodes past the history tail.

    Returns (times, residual, tail) where tail bounds the effect of the
    frozen history on the convolution.
    """
    g = dp.functional.apply(u)
    dt = u.grid.dt
    w = abs(dp.omega)
    conv = exp_filter(g, *rate_weights(dp.omega, dt), g[0] / w)
    res = u.space.norms(u.values - conv)
    G_sup = float(np.max(u.space.norms(g)))
    tail = 2 * G_sup / w * np.exp(dp.omega * (u.times - u.grid.t_start))
    keep = tail <= tail_tol
    return u.times[keep], res[keep], tail[keep]


def method_of_steps(dp: DelayProblem, u_line: SolveResult, start: float, n_blocks: int,
                    history: SampledCurve | None = None, block_tol: float | None = None,
                    max_block_iter: int = 100) -> SampledCurve:
    """Re-solve from `start` onward in blocks of length r with the half-line solver.

    The history on [start - r, start] comes from u_line (or `history`), and
    the first block starts from the whole-line memory at `start`, so that
    the exact discrete whole-line solution is reproduced. Within a block the
    forcing G(t, v_t) is iterated until it stops changing (one pass for a
    point delay, whose forcing only sees earlier blocks).
    """
    grid = u_line.u.grid
    dt = grid.dt
    lam = u_line.lam
    r = dp.functional.r
    m = int(round(r / dt))
    if abs(m * dt - r) > 1e-9 * max(1.0, r):
        raise WindowError("method of steps needs r to be a multiple of dt")
    i_s = grid.index_of(start)
    if i_s - m < 0:
        raise WindowError("history before start is not inside the solution window")
    if i_s + n_blocks * m > grid.n_points - 1:
        raise WindowError("requested blocks run past the solution window")
    block_tol = block_tol if block_tol is not None else 10 * max(u_line.residual, 1e-14)
    src = history if history is not None else u_line.u
    vals = np.array(src.values[:i_s + 1] if history is None else eval_curve(src, grid.times[:i_s + 1]))
    memory = line_memory_at(u_line, start) if history is None else None
    if memory is None:
        # memory of a replaced history: rerun the line convolution over it
        from .kernels import decay_weights
        E, w0, w1 = decay_weights(dt / lam)
        memory = exp_filter(vals, E, w0, w1, vals[0])[-1]
    space = u_line.u.space
    out = [vals]
    k0 = i_s
    for _ in range(n_blocks):
        bgrid = grid.sub(k0, k0 + m)
        guess = np.repeat(out[-1][-1:], m + 1, axis=0)
        for _it in range(max_block_iter):
            full = np.concatenate(out + [guess[1:]], axis=0)
            fcurve = SampledCurve(grid.sub(0, full.shape[0] - 1), full, space)
            F = dp.functional.apply(fcurve)[k0:k0 + m + 1]
            p = EvolutionProblem(dp.family, dp.omega, SampledCurve(bgrid, F, space), u0=memory,
                                 line_kind="half_line")
            hb = solve_halfline(p, SolverConfig(lam, bgrid, picard_tol=max(1e-9, u_line.residual * 10)))
            change = float(np.max(space.norms(hb.u.values - guess)))
            guess = hb.u.values
            if change <= block_tol:
                break
        else:
            raise SolverError("block iteration did not settle")
        out.append(guess[1:])
        memory = np.asarray(hb.meta["memory_end"], dtype=float)
        k0 += m
    vals = np.concatenate(out, axis=0)
    return SampledCurve(grid.sub(0, vals.shape[0] - 1), vals, space)


def check_fde_agreement(dp: DelayProblem, u_line: SolveResult, start: float | None = None,
                        n_blocks: int | None = None, history: SampledCurve | None = None) -> Certificate:
    """Method-of-steps re-solve from u_line's history reproduces u_line.

    The samples compare the two curves node by node after `start` (default:
    the first node with a full history inside the valid window). The budget
    covers the outer fixed-point error of u_line (amplified by at most
    1/(1 - beta/|omega|)), inner defects and roundoff.
    """
    grid = u_line.u.grid
    r = dp.functional.r
    m = int(round(r / grid.dt))
    if start is None:
        i = grid.index_of(u_line.valid_window[0]) + m
        start = float(grid.times[i])
    i_s = grid.index_of(start)
    if n_blocks is None:
        n_blocks = (grid.n_points - 1 - i_s) // m
    if n_blocks < 1:
        raise WindowError("no room for a block after start")
    v = method_of_steps(dp, u_line, start, n_blocks, history=history)
    sel = slice(i_s, i_s + n_blocks * m + 1)
    space = u_line.u.space
    d = space.norms(u_line.u.values[sel] - v.values[sel])
    ts = grid.times[sel]
    kappa = dp.contraction
    outer = u_line.meta.get("outer_changes", [0.0])[-1]
    budget = {"outer": 2 * outer / (1 - kappa),
              "inner": 20 * max(u_line.residual, 1e-14) / (1 - kappa),
              "roundoff": 1e3 * EPS * (1 + u_line.u.sup_norm())}
    stride = max(1, ts.size // 2000)
    samples = [Sample({"t": float(t)}, float(a), 0.0) for t, a in zip(ts[::stride], d[::stride])]
    k = int(np.argmax(d))
    samples.append(Sample({"t": float(ts[k]), "kind": "max"}, float(d[k]), 0.0))
    return Certificate(name="fde_agreement", samples=samples, budget=budget,
                       params={"start": start, "n_blocks": n_blocks, "r": r, "lam": u_line.lam,
                               "sup_difference": float(d.max())})
