"""Yosida-approximant solvers on the half line and the whole line.

The time derivative is replaced by its resolvent surrogate with the
one-sided kernel (1/lam) e^{-s/lam}. The approximate problem becomes a
fixed-point equation

    u(t) = J^w_lam(t)(lam f(t) + w(t)),   J^w_lam = resolvent of A + omega,

with w(t) = e^{-t/lam} u0 + (1/lam) int_0^t e^{-tau/lam} u(t - tau) dtau on
the half line and w(t) = (1/lam) int_0^inf e^{-s/lam} u(t - s) ds on the
whole line. The convolutions are computed exactly for piecewise-linear
samples, so the only discretization is the linear interpolation of u.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .core import Grid, SampledCurve, WindowError
from .kernels import decay_weights, exp_filter
from .operators import EvolutionProblem

EPS = np.finfo(float).eps


class SolverError(RuntimeError):
    """A solve did not reach its stated accuracy."""


@dataclass(frozen=True)
class SolverConfig:
    lam: float
    grid: Grid
    picard_tol: float = 1e-10
    picard_max_iter: int = 200_000
    tail_tol: float = 1e-8
    left_extension: str = "freeze"

    def __post_init__(self):
        if not self.lam > 0:
            raise ValueError(f"lam must be positive, got {self.lam}")
        if not self.picard_tol > 0 or not self.tail_tol > 0:
            raise ValueError("tolerances must be positive")
        if self.picard_max_iter < 1:
            raise ValueError("picard_max_iter must be >= 1")
        if self.left_extension not in ("freeze", "zero"):
            raise ValueError(f"left_extension must be freeze or zero, got {self.left_extension!r}")

    def with_lam(self, lam: float) -> "SolverConfig":
        return replace(self, lam=float(lam))


@dataclass
class SolveResult:
    """A computed approximant u_lam with its diagnostics.

    tail_bound holds, per node, the bound on the error caused by the
    truncated history (zero on the half line). For results of solve_limit,
    error_estimate bounds |u_lam - u| from the Cauchy column and
    extrapolated holds the first-order Richardson combination.
    """

    u: SampledCurve
    lam: float
    residual: float
    iterations: int
    contraction_estimate: float
    tail_error_bound: float
    valid_window: tuple
    tail_bound: np.ndarray | None = None
    error_estimate: float | None = None
    extrapolated: SampledCurve | None = None
    extrapolation_error: float | None = None
    discretization_error: float | None = None
    extrapolated_discretization_error: float | None = None
    meta: dict = field(default_factory=dict)

    def candidate_error(self, extrapolated: bool = True) -> float:
        """Total error estimate of the limit candidate (lam part plus grid part)."""
        if extrapolated:
            if self.extrapolation_error is None:
                raise ValueError("no extrapolation error estimate available")
            return self.extrapolation_error + (self.extrapolated_discretization_error or 0.0)
        if self.error_estimate is None:
            raise ValueError("no error estimate available")
        return self.error_estimate + (self.discretization_error or 0.0)

    def valid_u(self) -> SampledCurve:
        return self.u.restrict(*self.valid_window)

    def valid_extrapolated(self) -> SampledCurve:
        if self.extrapolated is None:
            raise ValueError("result carries no extrapolated curve")
        return self.extrapolated.restrict(*self.valid_window)


def _weights(cfg: SolverConfig) -> tuple[float, float, float]:
    return decay_weights(cfg.grid.dt / cfg.lam)


def yosida_derivative_halfline(u: SampledCurve, u0, lam: float) -> SampledCurve:
    """(1/lam)(u(s) - u0 - (1/lam) int_0^s e^{-tau/lam}(u(s - tau) - u0) dtau), s from the grid start."""
    if not lam > 0:
        raise ValueError("lam must be positive")
    u0 = u.space.check(u0).reshape(-1)
    v = u.values - u0
    E, w0, w1 = decay_weights(u.grid.dt / lam)
    conv = exp_filter(v, E, w0, w1, np.zeros(u.space.dim))
    return u.with_values((v - conv) / lam)


def line_tail_factor(u: SampledCurve, left_extension: str) -> float:
    """Sup of |u(t_start) extension - true history| assumed for pollution bounds."""
    sup = u.sup_norm()
    return 2.0 * sup if left_extension == "freeze" else sup


def yosida_derivative_line(u: SampledCurve, lam: float, tail_tol: float = 1e-8,
                           left_extension: str = "freeze", return_tail: bool = False):
    """(1/lam)(u(t) - (1/lam) int_0^inf e^{-s/lam} u(t - s) ds) on the valid sub-window.

    History before the window is replaced by u(t_start) (freeze) or 0; the
    resulting error is at most (D/lam) e^{-(t - t_start)/lam} with D from
    line_tail_factor. Nodes where that exceeds tail_tol are dropped.
    """
    if not lam > 0:
        raise ValueError("lam must be positive")
    g = u.grid
    if g.t_end - g.t_start < 10 * lam * math.log(1 / tail_tol):
        raise WindowError(f"window of length {g.t_end - g.t_start} is shorter than "
                          f"10*lam*ln(1/tail_tol) = {10 * lam * math.log(1 / tail_tol)}")
    E, w0, w1 = decay_weights(g.dt / lam)
    init = u.values[0] if left_extension == "freeze" else np.zeros(u.space.dim)
    conv = exp_filter(u.values, E, w0, w1, init)
    deriv = (u.values - conv) / lam
    D = line_tail_factor(u, left_extension)
    tail = (D / lam) * np.exp(-(g.times - g.t_start) / lam)
    ok = np.nonzero(tail <= tail_tol)[0]
    i0 = int(ok[0])
    out = SampledCurve(g.sub(i0), deriv[i0:], u.space)
    if return_tail:
        return out, tail[i0:]
    return out


def _forcing_samples(p: EvolutionProblem, grid: Grid) -> np.ndarray:
    return p.forcing_at(grid.times)


def solve_halfline(p: EvolutionProblem, cfg: SolverConfig) -> SolveResult:
    """March u_lam(t) = J^w_lam(t)(lam f(t) + e^{-t/lam} u0 + conv) node by node.

    Only the newest node enters the convolution implicitly, with weight w1.
    The node equation y = J_{lq}(a + b y), b = q*w1, is solved exactly as
    y = J_{lq/(1-b)}(a/(1-b)), which follows from the resolvent equation
    y - lq*A y = a + b y. The fixpoint defect of the whole curve is
    recomputed afterwards and must not exceed picard_tol.
    """
    if p.u0 is None:
        raise ValueError("half-line solve needs u0")
    lam = cfg.lam
    p.check_lambda(lam)
    g = cfg.grid
    fam = p.family
    q = 1.0 / (1.0 - lam * p.omega)
    lq = lam * q
    E, w0, w1 = _weights(cfg)
    b = q * w1
    if not b < 1:
        raise SolverError(f"step dt={g.dt} too large for lam={lam}, omega={p.omega}: "
                          f"implicit weight {b} >= 1")
    lam_node = lq / (1.0 - b)
    if lam_node > fam.lambda_max:
        raise SolverError(f"node resolvent parameter {lam_node} exceeds family lambda_max")
    ts = g.times
    F = _forcing_samples(p, g)
    u0 = p.u0
    decay = np.exp(-(ts - g.t_start) / lam)
    dim = p.space.dim
    u = np.empty((g.n_points, dim))
    resolve = fam.resolve_fn
    u[0] = resolve(ts[0], lq, q * (lam * F[0] + u0))
    C = np.zeros(dim)
    scale = q / (1.0 - b)
    for k in range(1, g.n_points):
        K = E * C + w0 * u[k - 1]
        u[k] = resolve(ts[k], lam_node, scale * (lam * F[k] + decay[k] * u0 + K))
        C = K + w1 * u[k]
    conv = exp_filter(u, E, w0, w1, np.zeros(dim))
    arg = q * (lam * F + decay[:, None] * u0 + conv)
    defect = p.space.norms(u - resolve(ts, lq, arg))
    k_bad = int(np.argmax(defect))
    residual = float(defect[k_bad])
    if residual > cfg.picard_tol:
        raise SolverError(f"node {k_bad} (t={ts[k_bad]}): fixpoint defect {residual:.3e} "
                          f"exceeds picard_tol {cfg.picard_tol:.1e}")
    memory = decay[-1] * u0 + conv[-1]
    return SolveResult(
        u=SampledCurve(g, u, p.space), lam=lam, residual=residual, iterations=g.n_points,
        contraction_estimate=b, tail_error_bound=0.0, valid_window=(g.t_start, g.t_end),
        tail_bound=np.zeros(g.n_points),
        meta={"line_kind": "half_line", "u0": u0.tolist(), "memory_end": memory.tolist(),
              "omega": p.omega, "label": p.label},
    )


def solve_line(p: EvolutionProblem, cfg: SolverConfig,
               initial: SampledCurve | None = None) -> SolveResult:
    """Picard iteration for the whole-line fixed point u = F(u).

    F(u)(t) = J_{lq}(t)(q (lam f(t) + (1/lam) int_0^inf e^{-s/lam} u(t-s) ds)),
    q = 1/(1 - lam*omega) < 1. Iteration starts from 0 (or from `initial`)
    and stops once the sup-change is at most picard_tol*(1-q)/q, which
    makes the distance to the discrete fixed point at most picard_tol.
    """
    if not p.omega < 0:
        raise ValueError(f"whole-line solves need omega < 0, got {p.omega}")
    lam = cfg.lam
    p.check_lambda(lam)
    g = cfg.grid
    fam = p.family
    q = 1.0 / (1.0 - lam * p.omega)
    lq = lam * q
    E, w0, w1 = _weights(cfg)
    ts = g.times
    F = _forcing_samples(p, g)
    dim = p.space.dim
    resolve = fam.resolve_fn
    norms = p.space.norms
    freeze = cfg.left_extension == "freeze"
    u = np.zeros((g.n_points, dim)) if initial is None else np.array(initial.values, dtype=float)
    if u.shape != (g.n_points, dim):
        raise ValueError("initial iterate does not match the grid")
    stop = cfg.picard_tol * (1.0 - q) / q
    prev_change = None
    ratio_max = 0.0
    change = np.inf
    it = 0
    while it < cfg.picard_max_iter:
        it += 1
        conv = exp_filter(u, E, w0, w1, u[0] if freeze else np.zeros(dim))
        u_new = resolve(ts, lq, q * (lam * F + conv))
        change = float(np.max(norms(u_new - u)))
        floor = 1e3 * EPS * (1.0 + float(np.max(norms(u_new))))
        if prev_change is not None and prev_change > floor and change > floor:
            ratio_max = max(ratio_max, change / prev_change)
        prev_change = change
        u = u_new
        if change <= stop:
            break
    else:
        raise SolverError(f"Picard iteration did not reach {stop:.2e} in {cfg.picard_max_iter} "
                          f"iterations (last change {change:.2e})")
    if ratio_max > q + 0.02:
        raise SolverError(f"measured contraction {ratio_max:.4f} exceeds q + 0.02 = {q + 0.02:.4f}; "
                          f"the resolvent oracle is not nonexpansive")
    conv = exp_filter(u, E, w0, w1, u[0] if freeze else np.zeros(dim))
    residual = float(np.max(norms(resolve(ts, lq, q * (lam * F + conv)) - u)))
    D = 2.0 * float(np.max(norms(u))) if freeze else float(np.max(norms(u)))
    kappa = -p.omega * q
    tail = q * D * np.exp(-kappa * (ts - g.t_start))
    ok = np.nonzero(tail <= cfg.tail_tol)[0]
    if ok.size < 2:
        raise WindowError(f"window [{g.t_start}, {g.t_end}] too short for tail_tol={cfg.tail_tol}: "
                          f"pollution decays at rate {kappa:.3g}")
    i0 = int(ok[0])
    return SolveResult(
        u=SampledCurve(g, u, p.space), lam=lam, residual=residual, iterations=it,
        contraction_estimate=ratio_max, tail_error_bound=float(tail[i0]),
        valid_window=(float(ts[i0]), g.t_end), tail_bound=tail,
        meta={"line_kind": "whole_line", "omega": p.omega, "q": q, "label": p.label,
              "left_extension": cfg.left_extension},
    )


def solve(p: EvolutionProblem, cfg: SolverConfig, **kw) -> SolveResult:
    """Dispatch on the problem's line kind."""
    if p.line_kind == "half_line":
        return solve_halfline(p, cfg)
    return solve_line(p, cfg, **kw)


def _common_window(results) -> tuple[float, float]:
    a = max(r.valid_window[0] for r in results)
    b = min(r.valid_window[1] for r in results)
    if not b > a:
        raise WindowError("results have no common valid window")
    return a, b


def _sup_diff(c1: SampledCurve, c2: SampledCurve, window) -> float:
    ts = c1.restrict(*window).times
    return float(np.max(c1.space.norms(c1(ts) - c2(ts))))


@dataclass
class ConvergenceTable:
    """Rows (lam_i, sup|u_i - u_{i+1}|, sup|u_i - u_ref|) on the common valid window."""

    lams: list
    cauchy: list
    ref_error: list
    window: tuple
    results: list

    @property
    def decreasing(self) -> bool:
        c = self.cauchy[:-1]
        return all(b < a for a, b in zip(c, c[1:])) or all(v == 0 for v in c)

    @property
    def ratios(self) -> list:
        c = self.cauchy[:-1]
        return [a / b if b > 0 else math.inf for a, b in zip(c, c[1:])]

    def rows(self) -> list:
        return [{"lam": l, "cauchy": c, "ref_error": r}
                for l, c, r in zip(self.lams, self.cauchy, self.ref_error)]


def converge_study(p: EvolutionProblem, lam_list, cfg: SolverConfig,
                   reference=None) -> ConvergenceTable:
    """Solve for each lam (decreasing) and tabulate Cauchy differences.

    The last row has no successor, so its Cauchy entry is nan. reference is
    an optional vectorized callable t -> (n, dim).
    """
    lams = [float(v) for v in lam_list]
    if len(lams) < 3:
        raise ValueError("converge_study needs at least 3 values of lam")
    if any(b >= a for a, b in zip(lams, lams[1:])):
        raise ValueError("lam_list must be strictly decreasing")
    results = []
    for lam in lams:
        try:
            results.append(solve(p, cfg.with_lam(lam)))
        except (SolverError, ValueError) as exc:
            raise type(exc)(f"lam={lam}: {exc}") from exc
    window = _common_window(results)
    cauchy = [_sup_diff(a.u, b.u, window) for a, b in zip(results, results[1:])] + [math.nan]
    if reference is not None:
        ts = results[0].u.restrict(*window).times
        ref = np.asarray(reference(ts), dtype=float).reshape(ts.size, -1)
        ref_err = [float(np.max(p.space.norms(r.u(ts) - ref))) for r in results]
    else:
        ref_err = [math.nan] * len(lams)
    return ConvergenceTable(lams, cauchy, ref_err, window, results)


def _coarse(grid: Grid) -> Grid:
    """Every other node of grid (dropping the last node if the count is even)."""
    m = (grid.n_points - 1) // 2
    return Grid(grid.t_start, grid.t_start + 2 * m * grid.dt, m + 1)


def solve_limit(p: EvolutionProblem, cfg: SolverConfig, lam_min: float) -> SolveResult:
    """u_{lam_min} with error estimates for the lam -> 0 limit.

    Solves at lam_min, 2, 4 and 8 times lam_min (as far as admissible).
    Assuming first-order behavior in lam, |u_lam - u| is estimated by
    |u_lam - u_{2 lam}|; the Richardson combination R_1 = 2u_lam - u_{2lam}
    is returned as `extrapolated`. Its error is estimated from the change
    against the next combination R_2, divided by 2^p - 1 where the observed
    order p in [1, 2] comes from the ratio of successive changes (p = 1 when
    only three values of lam are admissible). Where the limit has kinks the
    combination stays first order and p drops towards 1. The grid error is
    estimated separately by re-solving on every other node (second order
    in dt, so a third of the change).
    """
    lam_min = float(lam_min)
    lams = [lam_min, 2 * lam_min, 4 * lam_min, 8 * lam_min]
    lams = [l for l in lams if l <= p.lambda_max and l * abs(p.omega) < 1]
    if len(lams) < 2:
        raise ValueError(f"2*lam_min={2 * lam_min} is outside the admissible range")

    def run(lam, grid):
        try:
            return solve(p, replace(cfg, lam=lam, grid=grid))
        except (SolverError, ValueError) as exc:
            raise type(exc)(f"lam={lam}: {exc}") from exc

    results = [run(lam, cfg.grid) for lam in lams]
    cgrid = _coarse(cfg.grid)
    coarse = [run(lam, cgrid) for lam in lams[:2]]
    window = _common_window(results + coarse)
    base = results[0]
    u1, u2 = base.u.values, results[1].u.values
    err = _sup_diff(base.u, results[1].u, window)
    R1 = 2 * u1 - u2
    extrap_err = None
    order = None
    if len(results) >= 3:
        R2 = 2 * u2 - results[2].u.values
        c12 = SampledCurve(base.u.grid, R1 - R2, p.space).restrict(*window).sup_norm()
        order = 1.0
        if len(results) == 4 and c12 > 0:
            R3 = 2 * results[2].u.values - results[3].u.values
            c23 = SampledCurve(base.u.grid, R2 - R3, p.space).restrict(*window).sup_norm()
            order = float(np.clip(np.log2(c23 / c12), 1.0, 2.0)) if c23 > 0 else 1.0
        extrap_err = c12 / (2.0 ** order - 1.0)
    n_c = cgrid.n_points
    fine_on_coarse = slice(0, 2 * n_c - 1, 2)
    c_window = SampledCurve(cgrid, coarse[0].u.values, p.space).restrict(*window)
    i0 = cgrid.index_of(c_window.grid.t_start)
    i1 = cgrid.index_of(c_window.grid.t_end)
    sel = slice(i0, i1 + 1)
    d_u = u1[fine_on_coarse][sel] - coarse[0].u.values[sel]
    Rc = 2 * coarse[0].u.values - coarse[1].u.values
    d_R = R1[fine_on_coarse][sel] - Rc[sel]
    out = replace(base)
    out.valid_window = window
    out.error_estimate = err
    out.extrapolated = SampledCurve(base.u.grid, R1, p.space)
    out.extrapolation_error = extrap_err
    out.discretization_error = float(np.max(p.space.norms(d_u))) / 3.0
    out.extrapolated_discretization_error = float(np.max(p.space.norms(d_R))) / 3.0
    out.tail_error_bound = max(r.tail_bound[r.u.grid.index_of(window[0])] for r in results)
    out.meta = dict(base.meta, integral_solution_candidate=True, lams=lams, observed_order=order)
    return out
