"""Resolvents of exponential-kernel integral equations and Bessel-kernel integrals.

One-dimensional resolvents use the exact piecewise-linear recurrence of
the solver. Two-dimensional resolvents have the kernel

    k(a, b) = I0(2 sqrt(gamma*delta*a*b))

(whose Laplace transform is 1/(PQ - gamma*delta)) and are evaluated by
Gauss-Legendre cubature with node doubling until the change is within
budget. Infinite quadrants are integrated in the variables X = sqrt(x),
Y = sqrt(y), where the kernel I0(2XY/c) e^{-aX^2 - bY^2} becomes a smooth
Gaussian-like bump instead of a ridge.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import RectBivariateSpline

from .certificate import Certificate, Sample
from .core import SampledCurve
from .kernels import rate_weights, exp_filter
from .special import bessel_i0, bessel_i0e, bessel_i1_over_x, bessel_i1e_over_x

EPS = np.finfo(float).eps


class QuadratureError(RuntimeError):
    """Cubature did not converge within its budget."""


@dataclass(frozen=True)
class QuadratureBudget:
    abs_tol: float = 1e-12
    rel_tol: float = 1e-11
    max_subdivisions: int = 3

    def __post_init__(self):
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise ValueError("tolerances must be positive")
        if self.max_subdivisions < 1:
            raise ValueError("max_subdivisions must be >= 1")

    def accepts(self, change: float, scale: float) -> bool:
        return change <= max(self.abs_tol, self.rel_tol * scale)


# ---------------------------------------------------------------------------
# one-dimensional resolvents


def resolve_conv_infinite(f: SampledCurve, alpha: float, beta: float,
                          return_tail: bool = False):
    """Solution of u = f + alpha int_0^inf e^{-beta tau} u(t - tau) dtau.

    The resolvent is Rf = f + alpha int_0^inf e^{-(beta-alpha) tau} f(t - tau) dtau,
    a positive operator for 0 < alpha < beta. History before the window is
    frozen at f(t_start); the induced error at t is at most
    alpha * 2|f|_inf e^{-(beta-alpha)(t - t_start)} / (beta - alpha).
    """
    if not alpha < beta:
        raise ValueError(f"need alpha < beta, got alpha={alpha}, beta={beta}")
    if not alpha > 0:
        raise ValueError(f"need alpha > 0, got {alpha}")
    kappa = beta - alpha
    g = f.grid
    E, a, b = rate_weights(-kappa, g.dt)
    conv = exp_filter(f.values, E, a, b, f.values[0] / kappa)
    out = f.with_values(f.values + alpha * conv)
    if not return_tail:
        return out
    tail = alpha * 2 * f.sup_norm() / kappa * np.exp(-kappa * (g.times - g.t_start))
    return out, tail


def conv_infinite_residual(u: SampledCurve, f: SampledCurve, alpha: float, beta: float) -> np.ndarray:
    """Pointwise norm of u - f - alpha int_0^inf e^{-beta tau} u(t - tau) dtau (frozen history)."""
    E, a, b = rate_weights(-beta, u.grid.dt)
    conv = exp_filter(u.values, E, a, b, u.values[0] / beta)
    return u.space.norms(u.values - f.values - alpha * conv)


def resolve_conv_finite(f: SampledCurve, alpha: float, beta: float, a: float | None = None) -> SampledCurve:
    """Solution of u = f + alpha int_a^t e^{-beta(t - tau)} u(tau) dtau.

    Equals f + alpha int_a^t e^{(alpha - beta)(t - tau)} f(tau) dtau; it
    majorizes every g with g <= f + alpha int_a^t e^{-beta(t-tau)} g.
    Before a the output equals f.
    """
    if not alpha > 0:
        raise ValueError(f"need alpha > 0, got {alpha}")
    g = f.grid
    a = g.t_start if a is None else a
    i0 = g.index_of(a)
    E, wa, wb = rate_weights(alpha - beta, g.dt)
    vals = f.values.copy()
    tail = f.values[i0:]
    conv = exp_filter(tail, E, wa, wb, np.zeros(f.space.dim))
    vals[i0:] = tail + alpha * conv
    return f.with_values(vals)


def conv_finite_residual(u: SampledCurve, f: SampledCurve, alpha: float, beta: float,
                         a: float | None = None) -> np.ndarray:
    g = u.grid
    a = g.t_start if a is None else a
    i0 = g.index_of(a)
    E, wa, wb = rate_weights(-beta, g.dt)
    res = np.zeros(g.n_points)
    conv = exp_filter(u.values[i0:], E, wa, wb, np.zeros(u.space.dim))
    res[i0:] = u.space.norms(u.values[i0:] - f.values[i0:] - alpha * conv)
    return res


# ---------------------------------------------------------------------------
# two-dimensional fields and resolvents


@dataclass(frozen=True, eq=False)
class Field2D:
    """Scalar field sampled on a tensor grid t x s; values[i, j] = F(t_i, s_j)."""

    t: np.ndarray
    s: np.ndarray
    values: np.ndarray
    error: float = 0.0

    def __post_init__(self):
        t = np.asarray(self.t, dtype=float)
        s = np.asarray(self.s, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if v.shape != (t.size, s.size):
            raise ValueError(f"values shape {v.shape} does not match grid ({t.size}, {s.size})")
        for arr in (t, s, v):
            arr.setflags(write=False)
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "s", s)
        object.__setattr__(self, "values", v)

    @classmethod
    def from_function(cls, fn, t, s) -> "Field2D":
        t = np.asarray(t, dtype=float)
        s = np.asarray(s, dtype=float)
        return cls(t, s, np.broadcast_to(fn(t[:, None], s[None, :]), (t.size, s.size)))

    def as_function(self, degree: int = 5):
        """Interpolating spline (t, s) -> value; arguments outside the grid are clamped to its edge."""
        kt = min(degree, self.t.size - 1)
        ks = min(degree, self.s.size - 1)
        spline = RectBivariateSpline(self.t, self.s, self.values, kx=kt, ky=ks, s=0)
        t0, t1, s0, s1 = self.t[0], self.t[-1], self.s[0], self.s[-1]

        def fn(tq, sq):
            tq, sq = np.broadcast_arrays(np.asarray(tq, dtype=float), np.asarray(sq, dtype=float))
            vals = spline.ev(np.clip(tq, t0, t1).ravel(), np.clip(sq, s0, s1).ravel())
            return vals.reshape(tq.shape)

        return fn


@dataclass(frozen=True)
class Resolve2DParams:
    """Coefficients of F - delta int e^{alpha(t-tau)} F dtau - gamma int e^{beta(s-sigma)} F dsigma = G."""

    alpha: float
    beta: float
    gamma: float
    delta: float
    T: float = 1.0

    def __post_init__(self):
        if self.gamma < 0 or self.delta < 0:
            raise ValueError("gamma and delta must be >= 0")
        if not self.T > 0:
            raise ValueError("T must be positive")


def gl01(m: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes and weights on [0, 1]."""
    x, w = np.polynomial.legendre.leggauss(m)
    return 0.5 * (x + 1.0), 0.5 * w


def gl_panels(breaks, m: int) -> tuple[np.ndarray, np.ndarray]:
    """Composite Gauss-Legendre rule over consecutive breakpoints."""
    breaks = np.asarray(breaks, dtype=float)
    xi, wi = gl01(m)
    h = np.diff(breaks)
    nodes = (breaks[:-1, None] + h[:, None] * xi[None, :]).ravel()
    weights = (h[:, None] * wi[None, :]).ravel()
    return nodes, weights


def _kernel_2d(a, b, c, alpha_d, beta_g, gamma, delta):
    """[gamma d_a k + delta d_b k + 2c k](a, b) e^{alpha_d a + beta_g b}, k = I0(2 sqrt(c a b))."""
    ab = a * b
    z = 2.0 * np.sqrt(c * ab)
    i1x = bessel_i1_over_x(z)
    core = 2.0 * c * (bessel_i0(z) + (gamma * b + delta * a) * i1x)
    return core * np.exp(alpha_d * a + beta_g * b)


def _resolve_2d_gl(Gf, P: Resolve2DParams, t, s, m: int, block: int = 8) -> np.ndarray:
    xi, wi = gl01(m)
    c = P.gamma * P.delta
    ad = P.alpha + P.delta
    bg = P.beta + P.gamma
    # nodes x = t_i xi_p, weights t_i w_p; kernel arguments a = t_i - x
    X = t[:, None] * xi[None, :]
    WX = t[:, None] * wi[None, :]
    AX = t[:, None] * (1.0 - xi)[None, :]
    Y = s[:, None] * xi[None, :]
    WY = s[:, None] * wi[None, :]
    BY = s[:, None] * (1.0 - xi)[None, :]
    F = np.asarray(Gf(t[:, None], s[None, :]), dtype=float) * np.ones((t.size, s.size))
    if P.gamma > 0:
        Gty = Gf(t[:, None, None], Y[None, :, :])
        F = F + P.gamma * np.einsum("ijq,jq->ij", Gty, WY * np.exp(bg * BY))
    if P.delta > 0:
        Gxs = Gf(X[:, :, None], s[None, None, :])
        F = F + P.delta * np.einsum("ipj,ip->ij", Gxs, WX * np.exp(ad * AX))
    if c > 0:
        b_all = BY.ravel()
        y_all = Y.ravel()
        wy_all = WY.ravel()
        for i0 in range(0, t.size, block):
            sl = slice(i0, min(i0 + block, t.size))
            a_blk = AX[sl].ravel()
            K = _kernel_2d(a_blk[:, None], b_all[None, :], c, ad, bg, P.gamma, P.delta)
            Gxy = Gf(X[sl].ravel()[:, None], y_all[None, :])
            W = WX[sl].ravel()[:, None] * wy_all[None, :]
            nb = a_blk.size // m
            F[sl] += (K * Gxy * W).reshape(nb, m, s.size, m).sum(axis=(1, 3))
    return F


def resolve_2d(G, params: Resolve2DParams, budget: QuadratureBudget | None = None,
               n: int = 64, m0: int = 12) -> Field2D:
    """Resolvent of the doubled-variable equation on [0, T]^2.

    F = G + gamma int_0^s e^{(beta+gamma)(s-y)} G(t,y) dy
          + delta int_0^t e^{(alpha+delta)(t-x)} G(x,s) dx
          + int_0^t int_0^s [gamma d_a k + delta d_b k + 2 gamma delta k](t-x, s-y)
                e^{(alpha+delta)(t-x) + (beta+gamma)(s-y)} G(x,y) dy dx.

    G is a vectorized callable G(t, s) or a Field2D (interpolated). The
    output lives on G's grid for a Field2D, otherwise on an n x n grid.
    Gauss-Legendre order doubles until the change is within budget.
    """
    budget = budget or QuadratureBudget()
    if isinstance(G, Field2D):
        t, s = G.t, G.s
        Gf = G.as_function()
    else:
        t = np.linspace(0.0, params.T, n)
        s = t.copy()
        Gf = G
    if max(t.size, s.size) > 128:
        raise ValueError(f"grid too large for the O(n^4) resolvent: {t.size} x {s.size} > 128")
    m = m0
    prev = _resolve_2d_gl(Gf, params, t, s, m)
    for _ in range(budget.max_subdivisions):
        m *= 2
        cur = _resolve_2d_gl(Gf, params, t, s, m)
        change = float(np.max(np.abs(cur - prev)))
        if budget.accepts(change, float(np.max(np.abs(cur)))):
            return Field2D(t, s, cur, error=change)
        prev = cur
    raise QuadratureError(f"2D resolvent did not converge with {m} nodes per axis")


def cumulative_weights(x: np.ndarray, order: int = 8) -> np.ndarray:
    """W with int_{x_0}^{x_k} phi ~ sum_l W[k, l] phi(x_l), by local Lagrange interpolation."""
    x = np.asarray(x, dtype=float)
    n = x.size
    p = min(order, n)
    gx, gw = np.polynomial.legendre.leggauss(p)
    step = np.zeros((n - 1, n))
    for i in range(n - 1):
        start = min(max(i - p // 2 + 1, 0), n - p)
        idx = np.arange(start, start + p)
        half = 0.5 * (x[i + 1] - x[i])
        pts = 0.5 * (x[i + 1] + x[i]) + half * gx
        for jj, j in enumerate(idx):
            others = np.delete(x[idx], jj)
            basis = np.prod((pts[:, None] - others[None, :]) / (x[j] - others[None, :]), axis=1)
            step[i, j] = half * np.dot(gw, basis)
    return np.vstack([np.zeros(n), np.cumsum(step, axis=0)])


def residual_2d(F: Field2D, G, params: Resolve2DParams, order: int = 8) -> np.ndarray:
    """F - delta int_0^t e^{alpha(t-tau)} F dtau - gamma int_0^s e^{beta(s-sigma)} F dsigma - G.

    The integrals use composite local-Lagrange quadrature of the given order
    on the samples of F only, independent of how F was computed.
    """
    t, s = F.t, F.s
    Wt = cumulative_weights(t, order) * np.exp(params.alpha * (t[:, None] - t[None, :]))
    Ws = cumulative_weights(s, order) * np.exp(params.beta * (s[:, None] - s[None, :]))
    Gv = G.values if isinstance(G, Field2D) else np.broadcast_to(
        G(t[:, None], s[None, :]), F.values.shape)
    return F.values - params.delta * (Wt @ F.values) - params.gamma * (F.values @ Ws.T) - Gv


# ---------------------------------------------------------------------------
# the T_{lam,mu} resolvent on the whole plane


@dataclass(frozen=True)
class TlmParams:
    """T v = (mu/L)(1/lam) int e^{-tau/lam} v(t - tau, s) + (lam/L)(1/mu) int e^{-tau/mu} v(t, s - tau),
    with L = lam + mu - lam*mu*omega and omega < 0."""

    lam: float
    mu: float
    omega: float

    def __post_init__(self):
        if not self.omega < 0:
            raise ValueError(f"need omega < 0, got {self.omega}")
        # L > 0 and both decay rates are positive for every lam, mu > 0
        if not (self.lam > 0 and self.mu > 0):
            raise ValueError(f"need lam, mu > 0, got lam={self.lam}, mu={self.mu}")

    @property
    def Lam(self) -> float:
        return self.lam + self.mu - self.lam * self.mu * self.omega

    @property
    def delta(self) -> float:
        return self.mu / (self.lam * self.Lam)

    @property
    def gamma(self) -> float:
        return self.lam / (self.mu * self.Lam)

    @property
    def decay_x(self) -> float:
        """-(alpha + delta) = (1 - mu*omega)/L."""
        return (1.0 - self.mu * self.omega) / self.Lam

    @property
    def decay_y(self) -> float:
        return (1.0 - self.lam * self.omega) / self.Lam

    @property
    def norm_bound(self) -> float:
        return self.Lam / (self.lam * self.mu * abs(self.omega))


def _tlm_rules(P: TlmParams, refine: int = 1):
    """Nodes and weights for the three integral terms of the T_{lam,mu} resolvent."""
    m = 12
    ax, by = P.decay_x, P.decay_y
    Lam = P.Lam
    c = 1.0 / Lam ** 2
    # one-dimensional terms: delta int e^{-ax x} u(t-x, s) dx and gamma int e^{-by y} u(t, s-y) dy
    rules = []
    for rate, coef in ((ax, P.delta), (by, P.gamma)):
        length = 42.0 / rate
        h = min(0.5, 1.0 / rate) / refine
        nodes, w = gl_panels(np.linspace(0.0, length, int(math.ceil(length / h)) + 1), m)
        rules.append((nodes, coef * w * np.exp(-rate * nodes)))
    # two-dimensional term in X = sqrt(x), Y = sqrt(y)
    Q = np.array([[ax, -1.0 / Lam], [-1.0 / Lam, by]])
    eig = np.linalg.eigvalsh(Q)
    R = math.sqrt(45.0 / eig[0])
    h = min(0.5, 0.75 / math.sqrt(eig[1])) / refine
    Xn, Xw = gl_panels(np.linspace(0.0, R, int(math.ceil(R / h)) + 1), m)
    XX, YY = np.meshgrid(Xn, Xn, indexing="ij")
    z = 2.0 * XX * YY / Lam
    dens = 2.0 * c * (bessel_i0e(z) + (P.gamma * YY ** 2 + P.delta * XX ** 2) * bessel_i1e_over_x(z))
    W2 = 4.0 * XX * YY * dens * np.exp(z - ax * XX ** 2 - by * YY ** 2) * Xw[:, None] * Xw[None, :]
    keep = W2 > 1e-20 * W2.max()
    rule2 = (XX[keep] ** 2, YY[keep] ** 2, W2[keep])
    return rules[0], rules[1], rule2


def _apply_rules(u, rules, t, s, chunk: int = 16):
    (xn, xw), (yn, yw), (x2, y2, w2) = rules
    t = np.atleast_1d(np.asarray(t, dtype=float))
    s = np.atleast_1d(np.asarray(s, dtype=float))
    out = np.empty((t.size, s.size))
    for i, ti in enumerate(t):
        for j0 in range(0, s.size, chunk):
            sj = s[j0:j0 + chunk]
            v = np.asarray(u(ti, sj), dtype=float) * np.ones(sj.size)
            v = v + u(ti - xn[None, :], sj[:, None]) @ xw
            v = v + u(ti, sj[:, None] - yn[None, :]) @ yw
            v = v + u(ti - x2[None, :], sj[:, None] - y2[None, :]) @ w2
            out[i, j0:j0 + chunk] = v
    return out


def resolve_Tlm(u, lam: float, mu: float, omega: float, t, s,
                budget: QuadratureBudget | None = None) -> Field2D:
    """v = (I - T_{lam,mu})^{-1} u at the points t x s.

    u is a vectorized callable u(t, s) on the whole plane, or a Field2D
    (clamped outside its grid). The resolvent has the same kernel as the
    doubled-variable equation with alpha = -1/lam, beta = -1/mu,
    delta = mu/(lam L), gamma = lam/(mu L), now over infinite ranges.
    Positive u give positive v; |v|_inf <= L/(lam mu |omega|) |u|_inf.
    """
    P = TlmParams(lam, mu, omega)
    budget = budget or QuadratureBudget(abs_tol=1e-11, rel_tol=1e-11, max_subdivisions=2)
    uf = u.as_function() if isinstance(u, Field2D) else u
    prev = _apply_rules(uf, _tlm_rules(P, 1), t, s)
    refine = 1
    for _ in range(budget.max_subdivisions):
        refine *= 2
        cur = _apply_rules(uf, _tlm_rules(P, refine), t, s)
        change = float(np.max(np.abs(cur - prev)))
        if budget.accepts(change, float(np.max(np.abs(cur)))):
            return Field2D(np.atleast_1d(t), np.atleast_1d(s), cur, error=change)
        prev = cur
    raise QuadratureError("T_{lam,mu} resolvent did not converge within budget")


def apply_Tlm(v, lam: float, mu: float, omega: float, t, s, panels_per_unit: int = 4) -> Field2D:
    """T_{lam,mu} v at the points t x s, straight from the definition of T."""
    P = TlmParams(lam, mu, omega)
    m = 16
    out = []
    t = np.atleast_1d(np.asarray(t, dtype=float))
    s = np.atleast_1d(np.asarray(s, dtype=float))
    rules = []
    for scale, coef in ((lam, P.mu / P.Lam), (mu, P.lam / P.Lam)):
        length = 40.0 * scale
        npan = int(math.ceil(length * panels_per_unit)) + 8
        nodes, w = gl_panels(np.linspace(0.0, length, npan + 1), m)
        rules.append((nodes, coef * w * np.exp(-nodes / scale) / scale))
    (xn, xw), (yn, yw) = rules
    for ti in t:
        row = v(ti - xn[None, :], s[:, None]) @ xw + v(ti, s[:, None] - yn[None, :]) @ yw
        out.append(row)
    return Field2D(t, s, np.array(out))


# ---------------------------------------------------------------------------
# Bessel-kernel integral identities (the exponential convention here has omega > 0)


@dataclass(frozen=True)
class BesselIntegralParams:
    """(lam, mu, omega) with omega > 0 and L = lam + mu + lam*mu*omega."""

    lam: float
    mu: float
    omega: float

    def __post_init__(self):
        if not (self.lam > 0 and self.mu > 0 and self.omega > 0):
            raise ValueError("lam, mu, omega must all be positive in this convention")

    @property
    def Lam(self) -> float:
        return self.lam + self.mu + self.lam * self.mu * self.omega

    @property
    def p(self) -> float:
        return 1.0 + self.lam * self.omega

    @property
    def q(self) -> float:
        return 1.0 + self.mu * self.omega

    def as_dict(self) -> dict:
        return {"lam": self.lam, "mu": self.mu, "omega": self.omega}


def _tensor(fn, xb, yb, m: int = 16) -> float:
    xn, xw = gl_panels(xb, m)
    yn, yw = gl_panels(yb, m)
    vals = fn(xn[:, None], yn[None, :])
    return float(xw @ vals @ yw)


def _refined(fn, xb, yb, m: int = 16) -> tuple[float, float]:
    """Integral with its change under halving every panel."""
    coarse = _tensor(fn, xb, yb, m)
    xb2 = np.sort(np.concatenate([xb, 0.5 * (xb[1:] + xb[:-1])]))
    yb2 = np.sort(np.concatenate([yb, 0.5 * (yb[1:] + yb[:-1])]))
    fine = _tensor(fn, xb2, yb2, m)
    return fine, abs(fine - coarse) + 64 * EPS * abs(fine)


def _breaks(a: float, b: float, h: float) -> np.ndarray:
    return np.linspace(a, b, max(2, int(math.ceil((b - a) / h)) + 1))


def _quadrant_radius(p: float, q: float, c: float = 1.0) -> float:
    """Radius in sqrt-coordinates beyond which I0(2 c XY) e^{-pX^2 - qY^2} < e^{-60}."""
    eig = np.linalg.eigvalsh(np.array([[p, -c], [-c, q]]))
    if eig[0] <= 0:
        raise ValueError("kernel is not integrable over the quadrant for these parameters")
    return math.sqrt(60.0 / eig[0])


def _bessel_density(X, Y, p: float, q: float):
    """4XY I0(2XY) e^{-pX^2 - qY^2}: the measure I0(2 sqrt(xy)) e^{-px-qy} dx dy in sqrt-coordinates."""
    z = 2.0 * X * Y
    return 4.0 * X * Y * bessel_i0e(z) * np.exp(z - p * X * X - q * Y * Y)


def _split_diagonal(fn, A: float, h: float = 0.25, m: int = 16) -> tuple[float, float]:
    """Integral of fn(X, Y) over [0, A]^2 for fn with a kink on X = Y.

    Each triangle is mapped to a rectangle (Y = X v or X = Y v) on which
    the integrand is smooth.
    """
    xb = _breaks(0.0, A, h)
    vb = _breaks(0.0, 1.0, 1.0 / 32)
    lo, e1 = _refined(lambda X, v: X * fn(X, X * v), xb, vb, m)
    up, e2 = _refined(lambda Y, v: Y * fn(Y * v, Y), xb, vb, m)
    return lo + up, e1 + e2


def some_integral_value(item: int, **kw) -> tuple[float, float]:
    """Value and quadrature-error estimate of one Bessel-kernel integral.

    item 1: (1/R^2) int_[0,R]^2 I0(2 sqrt(xy)) e^{-x-y} |x - y|
    item 2: int_quadrant I0(2 sqrt(xy)) e^{-(1+lam w)x - (1+mu w)y}
    item 3: lam mu int_quadrant |x - y| I0(2 sqrt(xy)) e^{-x-y} e^{-w(lam x + mu y)}
    item 4: (1/R) int_[0,R]^2 I0(2 sqrt(xy)) e^{-x-y}
    item 5: (1/R^2) int_[0,R]^2 I0(2 sqrt(xy)) e^{-x-y}
    item 6: (1/R^2) int_[0,R]^2 d_y I0(2 sqrt(xy)) e^{-x-y} |x - y|
    item 7: (lam mu / L^3) int over the quadrant minus [0,t]^2 of
            I0(2 sqrt(xy)/L) e^{-(1+lam w)x/L - (1+mu w)y/L}
    item 8: same weight over the whole quadrant times g(n, x, y)
    """
    if item in (1, 4, 5, 6):
        R = float(kw["R"])
        A = math.sqrt(R)
        if item == 1:
            val, err = _split_diagonal(
                lambda X, Y: _bessel_density(X, Y, 1.0, 1.0) * np.abs(X * X - Y * Y), A)
            return val / R ** 2, err / R ** 2
        if item == 6:
            def fn(X, Y):
                z = 2.0 * X * Y
                dens = 4.0 * X * Y * 2.0 * X * X * bessel_i1e_over_x(z) * np.exp(z - X * X - Y * Y)
                return dens * np.abs(X * X - Y * Y)
            val, err = _split_diagonal(fn, A)
            return val / R ** 2, err / R ** 2
        b = _breaks(0.0, A, 0.25)
        val, err = _refined(lambda X, Y: _bessel_density(X, Y, 1.0, 1.0), b, b)
        norm = R if item == 4 else R ** 2
        return val / norm, err / norm
    P = kw["params"]
    p, q = P.p, P.q
    if item == 2:
        A = _quadrant_radius(p, q)
        b = _breaks(0.0, A, 0.25)
        return _refined(lambda X, Y: _bessel_density(X, Y, p, q), b, b)
    if item == 3:
        # e^{-x-y} e^{-w(lam x + mu y)} = e^{-px - qy}
        A = _quadrant_radius(p, q)
        val, err = _split_diagonal(
            lambda X, Y: _bessel_density(X, Y, p, q) * np.abs(X * X - Y * Y), A)
        return P.lam * P.mu * val, P.lam * P.mu * err
    pref = P.lam * P.mu / P.Lam
    A = _quadrant_radius(p, q)
    if item == 7:
        # x = L x' turns the weight into (lam mu / L) I0(2 sqrt(x'y')) e^{-p x' - q y'}
        tau = math.sqrt(float(kw["t"]) / P.Lam)
        if tau >= A:
            return 0.0, 0.0
        b_in = _breaks(0.0, tau, 0.25)
        b_out = _breaks(tau, A, 0.25)
        dens = lambda X, Y: _bessel_density(X, Y, p, q)
        v1, e1 = _refined(dens, b_out, _breaks(0.0, A, 0.25))
        v2, e2 = _refined(dens, b_in, b_out)
        return pref * (v1 + v2), pref * (e1 + e2)
    if item == 8:
        g = kw["g"]
        n = kw["n"]
        Lam = P.Lam
        b = _breaks(0.0, A, 0.25)
        fn = lambda X, Y: _bessel_density(X, Y, p, q) * g(n, Lam * X * X, Lam * Y * Y)
        v, e = _refined(fn, b, b)
        return pref * v, pref * e
    raise ValueError(f"item must be in 1..8, got {item}")


def default_g(n: float, x, y):
    """Bounded family tending to 0 uniformly on compacts: 1 - e^{-(x+y)/n}."""
    return -np.expm1(-(np.asarray(x) + np.asarray(y)) / n)


_DEFAULTS = {
    1: {"R_list": [5.0, 10.0, 20.0, 40.0]},
    2: {"triples": [(1.0, 1.0, 1.0), (0.5, 0.25, 2.0)], "rel_tol": 1e-6},
    3: {"lam0": 1.0, "mu0": 0.5, "omega": 1.0, "halvings": 5},
    4: {"R_list": [1.0, 10.0]},
    5: {"R_list": [5.0, 10.0, 20.0, 40.0]},
    6: {"R_list": [5.0, 10.0, 20.0, 40.0]},
    7: {"t_list": [1.0, 2.0, 4.0, 8.0, 16.0],
        "pairs": [(0.5, 0.5), (1.0, 0.25), (2.0, 2.0), (0.1, 3.0)], "omega": 1.0},
    8: {"n_list": [1.0, 2.0, 4.0, 8.0, 16.0],
        "pairs": [(0.5, 0.5), (1.0, 0.25), (2.0, 2.0)], "omega": 1.0},
}


_OPTIONAL = {1: {"references", "ref_rel_tol"}, 5: {"references", "ref_rel_tol"},
             6: {"references", "ref_rel_tol"}, 8: {"g"}}


def _decrease_samples(label, keys, values, errors):
    """Strict decrease certified: f_prev - f_next must exceed both quadrature errors."""
    out = []
    for k in range(len(values) - 1):
        out.append(Sample({"step": f"{label}={keys[k]}->{keys[k + 1]}",
                           "value": values[k + 1], "reference": values[k]},
                          values[k + 1] + errors[k] + errors[k + 1], values[k]))
    return out


def verify_some_integrals(item: int, params: dict | None = None) -> Certificate:
    """Certify one of the Bessel-kernel integral facts numerically.

    Identities are checked as equalities within a relative tolerance,
    bounds directly, and limit statements as strict decrease along a
    finite sequence (optionally against reference values).
    """
    if item not in _DEFAULTS:
        raise ValueError(f"item must be in 1..8, got {item}")
    cfg = dict(_DEFAULTS[item])
    extra = set(params or {}) - set(cfg) - _OPTIONAL.get(item, set())
    if extra:
        raise ValueError(f"unknown parameters for item {item}: {sorted(extra)}")
    cfg.update(params or {})
    samples = []
    quad = 0.0
    notes = []
    if item == 2:
        for lam, mu, w in cfg["triples"]:
            P = BesselIntegralParams(lam, mu, w)
            val, err = some_integral_value(2, params=P)
            exact = 1.0 / (w * P.Lam)
            quad = max(quad, err)
            samples.append(Sample({**P.as_dict(), "value": val, "reference": exact},
                                  abs(val - exact), cfg["rel_tol"] * exact))
    elif item == 4:
        for R in cfg["R_list"]:
            val, err = some_integral_value(4, R=R)
            quad = max(quad, err)
            samples.append(Sample({"R": R, "value": val, "reference": 1.0}, val, 1.0))
    elif item in (1, 5, 6):
        Rs = cfg["R_list"]
        vals, errs = zip(*(some_integral_value(item, R=R) for R in Rs))
        samples += _decrease_samples("R", Rs, vals, errs)
        quad = max(errs)
        refs = cfg.get("references")
        if refs:
            tol = cfg.get("ref_rel_tol", 1e-6)
            for R, v in zip(Rs, vals):
                ref = refs[str(R)] if isinstance(refs, dict) and str(R) in refs else refs[R]
                samples.append(Sample({"R": R, "value": v, "reference": ref},
                                      abs(v - ref), tol * abs(ref)))
        notes.append("limit certified as strict decrease along the R sequence")
    elif item == 3:
        vals, errs, keys = [], [], []
        for k in range(cfg["halvings"]):
            P = BesselIntegralParams(cfg["lam0"] / 2 ** k, cfg["mu0"] / 2 ** k, cfg["omega"])
            v, e = some_integral_value(3, params=P)
            vals.append(v)
            errs.append(e)
            keys.append(f"({P.lam},{P.mu})")
        samples += _decrease_samples("lam,mu", keys, vals, errs)
        quad = max(errs)
        notes.append("limit certified as strict decrease along (lam, mu) = (lam0, mu0)/2^k")
    elif item in (7, 8):
        seq_key = "t_list" if item == 7 else "n_list"
        seq = cfg[seq_key]
        sups, sup_errs = [], []
        for x in seq:
            best, best_err = -1.0, 0.0
            for lam, mu in cfg["pairs"]:
                P = BesselIntegralParams(lam, mu, cfg["omega"])
                if item == 7:
                    v, e = some_integral_value(7, params=P, t=x)
                    w = cfg["omega"]
                    strip = lam * mu / (P.Lam ** 2 * w) * (math.exp(-w * x / P.p) + math.exp(-w * x / P.q))
                    samples.append(Sample({"t": x, "lam": lam, "mu": mu, "value": v,
                                           "reference": strip}, v, strip))
                else:
                    v, e = some_integral_value(8, params=P, n=x, g=cfg.get("g", default_g))
                if v > best:
                    best, best_err = v, e
            sups.append(best)
            sup_errs.append(best_err)
            quad = max(quad, best_err)
        samples += _decrease_samples(seq_key[0], seq, sups, sup_errs)
        notes.append("uniformity certified through the sup over the sampled (lam, mu) pairs")
    return Certificate(name=f"some_integrals_item_{item}", samples=samples,
                       budget={"quadrature": quad},
                       params={"item": item, **{k: v for k, v in cfg.items() if k != "g"}},
                       notes=notes)


# ---------------------------------------------------------------------------
# interchange of integration order


def _sample_min(fn, T: float, n: int = 41) -> float:
    x = np.linspace(0.0, T, n)
    return float(np.min(fn(x[:, None], x[None, :])))


def _interchange_sides(f, g, T: float, m: int, variant: str) -> tuple[float, float]:
    xi, wi = gl01(m)
    # left: int_0^T int_0^t int_0^t f(x, y) g(t - x, t - y) dx dy dt
    tt = T * xi
    lhs = 0.0
    for tk, wk in zip(tt, T * wi):
        x = tk * xi
        w = tk * wi
        vals = f(x[:, None], x[None, :]) * g(tk - x[:, None], tk - x[None, :])
        lhs += wk * float(w @ vals @ w)
    # right: int_0^T dx int dy int_{max(x,y)-x}^{T-x} f(x, y) g(u, u + x - y) du
    X, V, U = np.meshgrid(T * xi, xi, xi, indexing="ij")
    WX, WV, WU = np.meshgrid(T * wi, wi, wi, indexing="ij")
    rhs = 0.0
    # triangle y > x: y = x + (T - x) v, u from y - x to T - x
    y = X + (T - X) * V
    lo = y - X
    u = lo + (T - X - lo) * U
    jac = (T - X) * (T - X - lo)
    rhs += float(np.sum(WX * WV * WU * jac * f(X, y) * g(u, u + X - y)))
    if variant == "corrected":
        # triangle y < x: y = x v, u from 0 to T - x
        y = X * V
        u = (T - X) * U
        jac = X * (T - X)
        rhs += float(np.sum(WX * WV * WU * jac * f(X, y) * g(u, u + X - y)))
    return lhs, rhs


def check_interchange(f, g, T: float, variant: str = "corrected", m: int = 24) -> Certificate:
    """Compare int_0^T int_0^t int_0^t f(x,y) g(t-x,t-y) with its reordered form.

    The reordered triple integral runs over x in [0,T], y in [0,T] and
    u in [max(x,y) - x, T - x] of f(x,y) g(u, u + x - y); with y over all
    of [0,T] it is an identity (variant="corrected"). variant="literal"
    keeps only y in [x, T], which drops part of the domain and can make
    the inequality fail.
    """
    if variant not in ("corrected", "literal"):
        raise ValueError("variant must be 'corrected' or 'literal'")
    f = f.as_function() if isinstance(f, Field2D) else f
    g = g.as_function() if isinstance(g, Field2D) else g
    if _sample_min(f, T) < 0 or _sample_min(g, T) < 0:
        raise ValueError("negativity detected in the inputs")
    l1, r1 = _interchange_sides(f, g, T, m, variant)
    l2, r2 = _interchange_sides(f, g, T, 2 * m, variant)
    quad = abs(l2 - l1) + abs(r2 - r1) + 64 * EPS * (abs(l2) + abs(r2))
    return Certificate(name=f"interchange_{variant}",
                       samples=[Sample({"T": T}, l2, r2)],
                       budget={"quadrature": quad},
                       params={"T": T, "variant": variant, "nodes": 2 * m})


SOME_INTEGRALS_COLUMNS = ("item", "params", "value", "reference", "margin", "pass")


def some_integrals_rows(cert: Certificate) -> list[dict]:
    """One table row per sample of a verify_some_integrals certificate."""
    item = cert.params["item"]
    budget = cert.tolerance_budget
    rows = []
    for smp in cert.samples:
        params = {k: v for k, v in smp.inputs.items() if k not in ("value", "reference")}
        rows.append({"item": item,
                     "params": ";".join(f"{k}={v}" for k, v in params.items()),
                     "value": smp.inputs.get("value", smp.lhs),
                     "reference": smp.inputs.get("reference", smp.rhs),
                     "margin": smp.margin,
                     "pass": smp.margin >= -budget})
    return rows
