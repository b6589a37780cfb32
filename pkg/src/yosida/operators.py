"""Time-dependent m-dissipative operator families given by their resolvents.

A family A(t) is represented only through J_lam(t) = (I - lam*A(t))^{-1}.
Multivalued operators (like the subdifferential of |.|) are handled the
same way; graph elements are reconstructed as pairs (J_lam z, A_lam z).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from .certificate import Certificate, Sample
from .core import SampledCurve, Space, eval_curve

# relative accuracy the built-in resolvent oracles are held to
ORACLE_TOL = 1e-12


class ParameterRangeError(ValueError):
    """lam outside the admissible range for a family or problem."""


def _as_rows(vals, n: int | None = None) -> np.ndarray:
    v = np.asarray(vals, dtype=float)
    if v.ndim == 0:
        v = v.reshape(1, 1)
    elif v.ndim == 1:
        v = v[:, None] if n is not None and v.shape[0] == n else v[None, :]
    return v


def _rows_at(fn, t) -> np.ndarray:
    """Evaluate a vectorized t -> vector callable as an (n, k) array."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    if isinstance(fn, SampledCurve):
        return eval_curve(fn, t)
    v = np.asarray(fn(t), dtype=float)
    if v.ndim == 0:
        v = np.full((t.size, 1), float(v))
    elif v.ndim == 1:
        v = v[:, None] if v.shape[0] == t.size else np.broadcast_to(v, (t.size, v.size)).copy()
    return v


@dataclass(frozen=True, eq=False)
class ControlData:
    """Moduli of time dependence of a family.

    h and g are vectorized functions of t (or SampledCurves); L is a
    nondecreasing function of r >= 0. g absent means the regime where the
    family's t-dependence is controlled by h and L alone.
    """

    h: Callable
    L: Callable
    g: Callable | None = None
    L_h: float = 0.0
    L_g: float = 0.0

    def h_at(self, t) -> np.ndarray:
        return _rows_at(self.h, t)

    def g_at(self, t) -> np.ndarray:
        if self.g is None:
            return np.zeros((np.atleast_1d(t).size, 1))
        return _rows_at(self.g, t)

    def L_at(self, r) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        return np.broadcast_to(np.asarray(self.L(r), dtype=float), r.shape).astype(float)

    def validate(self, ts, rs) -> None:
        """Raise if the declared data are unbounded on ts or L is not monotone on rs."""
        ts = np.atleast_1d(np.asarray(ts, dtype=float))
        if not np.all(np.isfinite(self.h_at(ts))):
            raise ValueError("h is not finite on the sampled times")
        if self.g is not None:
            if not np.all(np.isfinite(self.g_at(ts))):
                raise ValueError("g is not finite on the sampled times")
            if not np.isfinite(self.L_g):
                raise ValueError("g present but L_g is not finite")
        rs = np.sort(np.abs(np.atleast_1d(np.asarray(rs, dtype=float))))
        Ls = self.L_at(np.concatenate([[0.0], rs]))
        if Ls[0] < 0:
            raise ValueError("L(0) must be >= 0")
        if np.any(np.diff(Ls) < -1e-12 * (1 + np.abs(Ls[1:]))):
            raise ValueError("L is not nondecreasing on the sampled arguments")


def constant_control() -> ControlData:
    """Control of an autonomous family: h constant and L = 0."""
    return ControlData(h=lambda t: np.zeros(np.shape(t)), L=lambda r: np.zeros(np.shape(r)))


@dataclass(frozen=True, eq=False)
class PerturbedControl:
    """Controls of A(t) + omega*I.

    The h-difference is measured in the 1-norm of the pair (h, |omega| g).
    L^omega(r) = L(r) + r when g is present; without g the shift does not
    change L.
    """

    control: ControlData
    omega: float

    def h_diff(self, t1, t2) -> np.ndarray:
        c = self.control
        d = np.linalg.norm(c.h_at(t1) - c.h_at(t2), axis=-1)
        if c.g is not None:
            d = d + abs(self.omega) * self.g_diff(t1, t2)
        return d

    def g_diff(self, t1, t2) -> np.ndarray:
        c = self.control
        if c.g is None:
            return np.zeros(np.broadcast(np.atleast_1d(t1), np.atleast_1d(t2)).shape)
        return np.linalg.norm(c.g_at(t1) - c.g_at(t2), axis=-1)

    def L_omega(self, r) -> np.ndarray:
        base = self.control.L_at(r)
        if self.control.g is None:
            return base
        return base + np.asarray(r, dtype=float)


@dataclass(frozen=True, eq=False)
class OperatorFamily:
    """Resolvent oracle of a family of m-dissipative operators.

    resolve_fn(t, lam, x) must accept a scalar t with x of shape (dim,) or
    (n, dim), or an array t of shape (n,) with x of shape (n, dim).
    """

    space: Space
    resolve_fn: Callable
    control: ControlData
    label: str
    lambda_max: float = np.inf
    autonomous: bool = False
    params: dict = field(default_factory=dict)

    def resolve(self, t, lam: float, x) -> np.ndarray:
        lam = float(lam)
        if not lam > 0 or lam > self.lambda_max:
            raise ParameterRangeError(
                f"{self.label}: lam={lam} outside (0, {self.lambda_max}]")
        x = self.space.check(x)
        return self.resolve_fn(t, lam, x)

    def yosida(self, t, lam: float, x) -> np.ndarray:
        x = self.space.check(x)
        return (self.resolve(t, lam, x) - x) / lam


@dataclass(frozen=True, eq=False)
class EvolutionProblem:
    """u'(t) in A(t)u + omega*u + f(t) on the half line (with u0) or the whole line."""

    family: OperatorFamily
    omega: float = 0.0
    forcing: Callable | SampledCurve | None = None
    u0: np.ndarray | None = None
    line_kind: str = "whole_line"
    label: str = ""

    def __post_init__(self):
        if self.line_kind not in ("half_line", "whole_line"):
            raise ValueError(f"line_kind must be half_line or whole_line, got {self.line_kind!r}")
        if self.u0 is not None:
            object.__setattr__(self, "u0", self.family.space.check(self.u0).reshape(-1).copy())
        if self.line_kind == "half_line" and self.u0 is None:
            raise ValueError("half-line problems need an initial value u0")
        if self.line_kind == "whole_line" and self.family.control.g is not None:
            if not self.family.control.L_g < -self.omega:
                raise ValueError(f"need L_g < -omega for whole-line problems, "
                                 f"got L_g={self.family.control.L_g}, omega={self.omega}")

    @property
    def space(self) -> Space:
        return self.family.space

    @property
    def lambda_max(self) -> float:
        """Largest lam accepted: 0.9/|omega| unless the family is stricter."""
        lm = np.inf if self.omega == 0 else 0.9 / abs(self.omega)
        if np.isfinite(self.family.lambda_max):
            # the shifted resolvent uses lam/(1 - lam*omega) on the family
            fam = self.family.lambda_max
            lm = min(lm, fam / (1.0 + fam * self.omega) if 1.0 + fam * self.omega > 0 else np.inf)
        return lm

    def check_lambda(self, lam: float) -> None:
        if not lam > 0:
            raise ParameterRangeError(f"lam must be positive, got {lam}")
        if lam * abs(self.omega) >= 1:
            raise ParameterRangeError(f"need lam*|omega| < 1, got lam={lam}, omega={self.omega}")
        if lam > self.lambda_max * (1 + 1e-12):
            raise ParameterRangeError(f"lam={lam} exceeds lambda_max={self.lambda_max}")

    def forcing_at(self, t) -> np.ndarray:
        """Forcing values as an (n, dim) array; zero if there is no forcing."""
        t = np.atleast_1d(np.asarray(t, dtype=float))
        if self.forcing is None:
            return np.zeros((t.size, self.space.dim))
        v = _rows_at(self.forcing, t)
        if v.shape[1] != self.space.dim:
            v = np.broadcast_to(v, (t.size, self.space.dim)).copy()
        return v

    def with_forcing(self, forcing) -> "EvolutionProblem":
        return replace(self, forcing=forcing)

    def with_u0(self, u0, line_kind: str = "half_line") -> "EvolutionProblem":
        return replace(self, u0=u0, line_kind=line_kind)


def resolve_perturbed(p: EvolutionProblem, t, lam: float, x) -> np.ndarray:
    """Resolvent of A(t) + omega*I: J_{lam/(1-lam*omega)}(t)(x/(1-lam*omega))."""
    p.check_lambda(lam)
    q = 1.0 / (1.0 - lam * p.omega)
    return p.family.resolve(t, lam * q, q * p.space.check(x))


def resolve_forced(p: EvolutionProblem, t, lam: float, x) -> np.ndarray:
    """Resolvent of A(t) + f(t) + omega*I.

    Adding a single-valued f(t) to A(t) shifts the argument: the resolvent
    of A + f at mu is y -> J_mu(y + mu*f(t)).
    """
    p.check_lambda(lam)
    q = 1.0 / (1.0 - lam * p.omega)
    x = p.space.check(x)
    if p.forcing is not None:
        f = p.forcing_at(t)
        x = x + lam * (f if x.ndim == 2 else f[0])
    return p.family.resolve(t, lam * q, q * x)


def yosida_op(p: EvolutionProblem, t, lam: float, x) -> np.ndarray:
    """Yosida approximation of A(t) + omega*I."""
    x = p.space.check(x)
    return (resolve_perturbed(p, t, lam, x) - x) / lam


@dataclass(frozen=True)
class AbsAReport:
    """Values of ||A_lam x|| along a decreasing lam sequence."""

    estimate: float
    lams: tuple
    values: tuple
    monotone: bool
    in_hat_D: bool


def abs_A_estimate(p: EvolutionProblem, t: float, x, lam_seq=None, shifted: bool = False) -> AbsAReport:
    """Estimate |A(t)x| = lim ||A_lam x|| as lam -> 0.

    For dissipative A the sequence is nondecreasing as lam decreases, so the
    sup over the sequence is the estimate. With shifted=True and omega > 0
    the shifted operator is only omega-dissipative; then (1 - lam*omega)
    times the norm is the monotone quantity and is used instead. Membership in the generalized
    domain is judged from the growth over the last decade of lam: for x
    outside the domain closure ||A_lam x|| grows like 1/lam.
    """
    if lam_seq is None:
        top = p.lambda_max if np.isfinite(p.lambda_max) else 1.0
        top = min(top, p.family.lambda_max)
        lam_seq = top * np.logspace(-1, -6, 11)
    lams = np.asarray(lam_seq, dtype=float)
    if np.any(np.diff(lams) >= 0):
        raise ValueError("lam_seq must be strictly decreasing")
    x = p.space.check(x).reshape(-1)
    vals = []
    for lam in lams:
        if shifted:
            y = yosida_op(p, t, lam, x)
            damp = 1.0 - lam * p.omega if p.omega > 0 else 1.0
        else:
            y = p.family.yosida(t, lam, x)
            damp = 1.0
        vals.append(damp * p.space.norm(np.asarray(y).reshape(-1)))
    vals = np.array(vals)
    scale = 1e-9 * (1.0 + np.max(vals))
    monotone = bool(np.all(np.diff(vals) >= -scale))
    # compare the last value with the one a decade of lam earlier
    j = int(np.searchsorted(-lams, -lams[-1] * 10.0))
    j = min(j, len(lams) - 2)
    ref = vals[j]
    in_hat_D = bool(vals[-1] <= 3.0 * ref + scale) if ref > 0 else bool(vals[-1] <= scale * 1e3)
    return AbsAReport(float(np.max(vals)), tuple(lams.tolist()), tuple(vals.tolist()),
                      monotone, in_hat_D)


def check_t_stability(p: EvolutionProblem, sample_ts, sample_zs, lam_list) -> Certificate:
    """Check the controlled t-dependence inequality on resolvent-generated pairs.

    For each generating lam, pairs (x_i, y_i) = (J_lam(t_i) z_i, A_lam(t_i) z_i)
    lie in the graph of A(t_i). Every ordered pair (i, j) is tested at every
    lam in lam_list for

        (1 - lam*w)|x1-x2| <= |x1 - x2 - lam(y1 + w x1 - y2 - w x2)|
                             + lam |h^w(t1) - h^w(t2)| L^w(|x2|)
                             + lam |g(t1) - g(t2)| |y2 + w x2|.

    Only resolvent-generated pairs are sampled, not the whole graph.
    """
    fam = p.family
    if fam.control is None:
        raise ValueError("family has no control data")
    ts = np.atleast_1d(np.asarray(sample_ts, dtype=float))
    zs = np.asarray(sample_zs, dtype=float).reshape(ts.size, -1)
    zs = p.space.check(zs)
    lams = [float(v) for v in lam_list]
    if ts.size < 2 or not lams:
        raise ValueError("need at least two sample points and one lam")
    for lam in lams:
        p.check_lambda(lam)
    w = p.omega
    pc = PerturbedControl(fam.control, w)
    nrm = p.space.norms
    ii, jj = np.array([(i, j) for i, j in itertools.permutations(range(ts.size), 2)]).T
    samples = []
    oracle = 0.0
    for lam_gen in lams:
        x = np.array([fam.resolve(t, lam_gen, z) for t, z in zip(ts, zs)])
        y = (x - zs) / lam_gen
        x1, x2, y1, y2 = x[ii], x[jj], y[ii], y[jj]
        t1, t2 = ts[ii], ts[jj]
        hd = pc.h_diff(t1, t2)
        gd = pc.g_diff(t1, t2)
        Lw = pc.L_omega(nrm(x2))
        e_x = ORACLE_TOL * (1.0 + np.max(nrm(zs)))
        for lam in lams:
            lhs = (1 - lam * w) * nrm(x1 - x2)
            rhs = (nrm(x1 - x2 - lam * (y1 + w * x1 - y2 - w * x2))
                   + lam * hd * Lw + lam * gd * nrm(y2 + w * x2))
            oracle = max(oracle, 4 * e_x * (1 + abs(w) * lam + lam / lam_gen))
            for k in range(ii.size):
                samples.append(Sample(
                    {"t1": t1[k], "t2": t2[k], "lam_gen": lam_gen, "lam": lam},
                    float(lhs[k]), float(rhs[k])))
    scale = max(1.0, float(np.max(nrm(zs))))
    return Certificate(
        name="t_stability",
        samples=samples,
        budget={"oracle": oracle, "arithmetic": 64 * np.finfo(float).eps * scale},
        params={"family": fam.label, "omega": w, "lams": lams, "n_points": int(ts.size)},
        notes=["pairs are resolvent-generated only; the assumption quantifies over the whole graph"],
    )


# ---------------------------------------------------------------------------
# built-in families


def _log_norm(M: np.ndarray, kind: str) -> float:
    """Logarithmic norm of M; M is dissipative for the norm iff this is <= 0."""
    M = np.asarray(M, dtype=float)
    if kind == "euclidean":
        return float(np.max(np.linalg.eigvalsh(0.5 * (M + M.T))))
    off = np.abs(M - np.diag(np.diag(M)))
    if kind == "sup":
        return float(np.max(np.diag(M) + off.sum(axis=1)))
    return float(np.max(np.diag(M) + off.sum(axis=0)))


def _op_norm(M: np.ndarray, kind: str) -> float:
    M = np.asarray(M, dtype=float)
    if kind == "euclidean":
        return float(np.linalg.norm(M, 2))
    if kind == "sup":
        return float(np.max(np.abs(M).sum(axis=1)))
    return float(np.max(np.abs(M).sum(axis=0)))


def zero(dim: int = 1, norm_kind: str = "euclidean") -> OperatorFamily:
    """A = 0: every resolvent is the identity."""
    return OperatorFamily(Space(dim, norm_kind), lambda t, lam, x: np.array(x, dtype=float),
                          constant_control(), "zero", autonomous=True,
                          params={"dim": dim, "norm_kind": norm_kind})


def linear_matrix(M, norm_kind: str = "euclidean", mod_amp: float = 0.0,
                  mod_freq: float = 1.0, label: str = "linear_matrix") -> OperatorFamily:
    """A(t) = s(t) M with s(t) = 1 + mod_amp*sin(mod_freq*t), M dissipative.

    With |mod_amp| < 1 every s(t)M is dissipative. The t-dependence is
    controlled by h = s and L(r) = ||M|| r.
    """
    M = np.atleast_2d(np.asarray(M, dtype=float))
    d = M.shape[0]
    if M.shape != (d, d):
        raise ValueError(f"M must be square, got shape {M.shape}")
    if not abs(mod_amp) < 1:
        raise ValueError("need |mod_amp| < 1 so that s(t) > 0")
    mu = _log_norm(M, norm_kind)
    if mu > 1e-12:
        raise ValueError(f"M is not dissipative in the {norm_kind} norm (log norm {mu:.3g})")
    eye = np.eye(d)
    autonomous = mod_amp == 0.0

    def scale(t):
        return 1.0 + mod_amp * np.sin(mod_freq * np.asarray(t, dtype=float))

    def resolve(t, lam, x):
        x = np.asarray(x, dtype=float)
        if autonomous or np.ndim(t) == 0:
            s = float(scale(t)) if not autonomous else 1.0
            if d == 1:
                return x / (1.0 - lam * s * M[0, 0])
            inv = np.linalg.inv(eye - lam * s * M)
            return x @ inv.T
        s = scale(t)
        if d == 1:
            return x / (1.0 - lam * s * M[0, 0])[:, None]
        mats = eye[None] - lam * s[:, None, None] * M[None]
        return np.linalg.solve(mats, x[..., None])[..., 0]

    if autonomous:
        control = constant_control()
    else:
        nM = _op_norm(M, norm_kind)
        control = ControlData(h=scale, L=lambda r, nM=nM: nM * np.asarray(r, dtype=float),
                              L_h=abs(mod_amp * mod_freq))
    return OperatorFamily(Space(d, norm_kind), resolve, control, label, autonomous=autonomous,
                          params={"M": M.tolist(), "norm_kind": norm_kind,
                                  "mod_amp": mod_amp, "mod_freq": mod_freq})


def rotation_damped(a: float, theta: float) -> OperatorFamily:
    """M = a I + theta [[0, -1], [1, 0]] with a < 0, dissipative in the euclidean norm."""
    if not a < 0:
        raise ValueError("rotation_damped needs a < 0")
    M = np.array([[a, -theta], [theta, a]])
    fam = linear_matrix(M, "euclidean", label="rotation_damped")
    return replace(fam, params={"a": a, "theta": theta})


def soft_threshold(c: float = 1.0, dim: int = 1, norm_kind: str = "euclidean") -> OperatorFamily:
    """A = -c * subdifferential of |.| coordinatewise; the resolvent shrinks by lam*c.

    Shrinkage is 1-Lipschitz in each coordinate, hence nonexpansive in all
    three norms.
    """
    if not c > 0:
        raise ValueError("soft_threshold needs c > 0")

    def resolve(t, lam, x):
        x = np.asarray(x, dtype=float)
        return np.sign(x) * np.maximum(np.abs(x) - lam * c, 0.0)

    return OperatorFamily(Space(dim, norm_kind), resolve, constant_control(), "soft_threshold",
                          autonomous=True, params={"c": c, "dim": dim, "norm_kind": norm_kind})


def _cubic_root(b: np.ndarray, lam: float) -> np.ndarray:
    """Unique real y with y + lam*y**3 = b, elementwise.

    Newton from an upper bound of |y| decreases monotonically to the root
    (the map is convex on the positive half line); bisection is the fallback.
    """
    s = np.sign(b)
    a = np.abs(b)
    y = np.minimum(a, np.cbrt(a / lam))
    tol = ORACLE_TOL * (1.0 + a)
    for _ in range(100):
        phi = y + lam * y ** 3 - a
        if np.all(np.abs(phi) <= tol):
            break
        y = np.maximum(y - phi / (1.0 + 3.0 * lam * y * y), 0.0)
    phi = y + lam * y ** 3 - a
    bad = np.abs(phi) > tol
    if np.any(bad):
        lo = np.zeros_like(a[bad])
        hi = np.minimum(a[bad], np.cbrt(a[bad] / lam))
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            up = mid + lam * mid ** 3 > a[bad]
            hi = np.where(up, mid, hi)
            lo = np.where(up, lo, mid)
        y = y.copy()
        y[bad] = 0.5 * (lo + hi)
    return s * y


def scalar_cubic(h_amp: float = 0.0, h_freq: float = 1.0, h_offset: float = 0.0,
                 dim: int = 1, norm_kind: str = "euclidean") -> OperatorFamily:
    """A(t)u = -u**3 + h_c(t) coordinatewise, h_c(t) = h_offset + h_amp*sin(h_freq*t).

    Since y -> y + lam*y**3 is coordinatewise monotone the inequality holds
    with h = h_c and L = ||(1, ..., 1)||, the norm of the direction h_c acts in.
    """
    autonomous = h_amp == 0.0

    def h_c(t):
        return h_offset + h_amp * np.sin(h_freq * np.asarray(t, dtype=float))

    def resolve(t, lam, x):
        x = np.asarray(x, dtype=float)
        h = h_c(t)
        if np.ndim(h) == 1 and x.ndim == 2:
            h = h[:, None]
        return _cubic_root(x + lam * h, lam)

    space = Space(dim, norm_kind)
    ones = space.norm(np.ones(dim))
    control = ControlData(h=h_c, L=lambda r: np.full(np.shape(r), ones), L_h=abs(h_amp * h_freq))
    return OperatorFamily(space, resolve, control, "scalar_cubic",
                          autonomous=autonomous,
                          params={"h_amp": h_amp, "h_freq": h_freq, "h_offset": h_offset,
                                  "dim": dim, "norm_kind": norm_kind})


FAMILIES = {
    "zero": zero,
    "linear_matrix": linear_matrix,
    "rotation_damped": rotation_damped,
    "soft_threshold": soft_threshold,
    "scalar_cubic": scalar_cubic,
}


def make_family(label: str, **params) -> OperatorFamily:
    """Build a catalogue family by label."""
    try:
        ctor = FAMILIES[label]
    except KeyError:
        raise ValueError(f"unknown family {label!r}; known: {sorted(FAMILIES)}") from None
    return ctor(**params)
