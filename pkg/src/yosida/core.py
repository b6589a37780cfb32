"""Finite-dimensional normed spaces, duality brackets and sampled curves.

Everything else in the package computes on these objects. Curves live on
uniform grids only, which is what makes the exact exponential-kernel
recurrences in the solver possible.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

NORM_KINDS = ("euclidean", "sup", "one")

# absolute tolerance for ties in argmax sets and for "zero" coordinates
TIE_TOL = 1e-12


class DimensionError(ValueError):
    """A vector does not match the dimension of its space."""


class WindowError(ValueError):
    """A time lies outside the window of a curve."""


@dataclass(frozen=True)
class Space:
    """R^dim with one of three norms."""

    dim: int
    norm_kind: str = "euclidean"

    def __post_init__(self):
        if int(self.dim) != self.dim or self.dim < 1:
            raise ValueError(f"dim must be a positive integer, got {self.dim}")
        if self.norm_kind not in NORM_KINDS:
            raise ValueError(f"norm_kind must be one of {NORM_KINDS}, got {self.norm_kind!r}")

    def check(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.ndim == 0:
            x = x.reshape(1)
        if x.shape[-1] != self.dim:
            raise DimensionError(f"expected trailing dimension {self.dim}, got shape {x.shape}")
        return x

    def norms(self, x) -> np.ndarray:
        """Norm along the last axis (works on stacks of vectors)."""
        x = self.check(x)
        if self.norm_kind == "euclidean":
            if self.dim == 1:
                return np.abs(x[..., 0])
            return np.sqrt(np.sum(x * x, axis=-1))
        if self.norm_kind == "sup":
            return np.max(np.abs(x), axis=-1)
        return np.sum(np.abs(x), axis=-1)

    def norm(self, x) -> float:
        x = self.check(x)
        if x.ndim != 1:
            raise DimensionError(f"norm expects a single vector, got shape {x.shape}")
        return float(self.norms(x))


def norm(x, space: Space) -> float:
    return space.norm(x)


@dataclass(frozen=True)
class BracketValue:
    """Upper and lower one-sided derivatives of the norm at x in direction y."""

    plus: float
    minus: float


def bracket_plus(y, x, space: Space) -> np.ndarray:
    """Vectorized [y, x]_+ along the last axis."""
    return _brackets(y, x, space)[0]


def bracket_minus(y, x, space: Space) -> np.ndarray:
    """Vectorized [y, x]_- along the last axis."""
    return _brackets(y, x, space)[1]


def bracket(y, x, space: Space) -> BracketValue:
    y = space.check(y)
    x = space.check(x)
    if y.ndim != 1 or x.ndim != 1:
        raise DimensionError("bracket expects single vectors; use bracket_plus for stacks")
    plus, minus = _brackets(y, x, space)
    return BracketValue(float(plus), float(minus))


def _brackets(y, x, space: Space):
    y = space.check(y)
    x = space.check(x)
    y, x = np.broadcast_arrays(y, x)
    kind = space.norm_kind
    ny = space.norms(y)
    if kind == "euclidean":
        nx = space.norms(x)
        zero = nx <= TIE_TOL
        safe = np.where(zero, 1.0, nx)
        val = np.sum(x * y, axis=-1) / safe
        plus = np.where(zero, ny, val)
        minus = np.where(zero, -ny, val)
        return plus, minus
    ax = np.abs(x)
    sgn = np.sign(x)
    if kind == "sup":
        m = np.max(ax, axis=-1, keepdims=True)
        zero = m[..., 0] <= TIE_TOL
        active = ax >= m - TIE_TOL
        sy = sgn * y
        plus = np.max(np.where(active, sy, -np.inf), axis=-1)
        minus = np.min(np.where(active, sy, np.inf), axis=-1)
        plus = np.where(zero, ny, plus)
        minus = np.where(zero, -ny, minus)
        return plus, minus
    small = ax <= TIE_TOL
    lead = np.sum(np.where(small, 0.0, sgn * y), axis=-1)
    free = np.sum(np.where(small, np.abs(y), 0.0), axis=-1)
    return lead + free, lead - free


@dataclass(frozen=True)
class Grid:
    """Uniform time grid with n_points nodes on [t_start, t_end]."""

    t_start: float
    t_end: float
    n_points: int

    def __post_init__(self):
        if not np.isfinite(self.t_start) or not np.isfinite(self.t_end):
            raise ValueError("grid bounds must be finite")
        if not self.t_end > self.t_start:
            raise ValueError(f"need t_end > t_start, got [{self.t_start}, {self.t_end}]")
        if int(self.n_points) != self.n_points or self.n_points < 2:
            raise ValueError(f"n_points must be an integer >= 2, got {self.n_points}")

    @classmethod
    def from_step(cls, t_start: float, t_end: float, dt: float) -> "Grid":
        """Grid whose spacing is dt, with t_end rounded to a whole number of steps."""
        if dt <= 0:
            raise ValueError("dt must be positive")
        n = int(round((t_end - t_start) / dt))
        return cls(float(t_start), float(t_start + n * dt), n + 1)

    @property
    def dt(self) -> float:
        return (self.t_end - self.t_start) / (self.n_points - 1)

    @property
    def times(self) -> np.ndarray:
        return self.t_start + self.dt * np.arange(self.n_points)

    def index_of(self, t: float) -> int:
        """Index of the node at time t; raises if t is not a node."""
        k = (t - self.t_start) / self.dt
        kr = int(round(k))
        if abs(k - kr) > 1e-9 or kr < 0 or kr >= self.n_points:
            raise WindowError(f"t={t} is not a node of {self}")
        return kr

    def sub(self, i0: int, i1: int | None = None) -> "Grid":
        """Subgrid of nodes i0..i1 inclusive."""
        i1 = self.n_points - 1 if i1 is None else i1
        if not 0 <= i0 < i1 <= self.n_points - 1:
            raise ValueError(f"bad subgrid indices {i0}, {i1}")
        dt = self.dt
        return Grid(self.t_start + i0 * dt, self.t_start + i1 * dt, i1 - i0 + 1)


@dataclass(frozen=True, eq=False)
class SampledCurve:
    """Vector-valued function of time, piecewise linear between grid nodes."""

    grid: Grid
    values: np.ndarray
    space: Space = field(default=None)

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.ndim == 1:
            v = v[:, None]
        space = self.space if self.space is not None else Space(v.shape[1])
        if v.ndim != 2 or v.shape[0] != self.grid.n_points:
            raise ValueError(f"values must have {self.grid.n_points} rows, got shape {v.shape}")
        if v.shape[1] != space.dim:
            raise DimensionError(f"values have dimension {v.shape[1]}, space has {space.dim}")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "space", space)

    @classmethod
    def from_function(cls, fn, grid: Grid, space: Space | None = None) -> "SampledCurve":
        """Sample a vectorized callable t -> (n, dim) or (n,) at the grid nodes."""
        vals = np.asarray(fn(grid.times), dtype=float)
        if vals.ndim == 1:
            vals = vals[:, None]
        return cls(grid, vals, space)

    @classmethod
    def from_samples(cls, times, values, space: Space | None = None) -> "SampledCurve":
        """Build from explicit times; nonuniform spacing is rejected."""
        times = np.asarray(times, dtype=float)
        if times.ndim != 1 or times.size < 2:
            raise ValueError("need at least two sample times")
        grid = Grid(float(times[0]), float(times[-1]), times.size)
        if np.max(np.abs(times - grid.times)) > 1e-9 * max(1.0, np.max(np.abs(times))):
            raise ValueError("sample times are not uniformly spaced")
        return cls(grid, values, space)

    @property
    def times(self) -> np.ndarray:
        return self.grid.times

    @property
    def window(self) -> tuple[float, float]:
        return (self.grid.t_start, self.grid.t_end)

    def norms(self) -> np.ndarray:
        return self.space.norms(self.values)

    def sup_norm(self) -> float:
        return float(np.max(self.norms()))

    def __call__(self, t):
        return eval_curve(self, t)

    def restrict(self, t_a: float, t_b: float) -> "SampledCurve":
        """Restriction to the nodes inside [t_a, t_b]."""
        ts = self.times
        tol = 1e-9 * self.grid.dt
        idx = np.nonzero((ts >= t_a - tol) & (ts <= t_b + tol))[0]
        if idx.size < 2:
            raise WindowError(f"[{t_a}, {t_b}] contains fewer than two nodes")
        g = self.grid.sub(int(idx[0]), int(idx[-1]))
        return SampledCurve(g, self.values[idx[0]: idx[-1] + 1], self.space)

    def with_values(self, values) -> "SampledCurve":
        return SampledCurve(self.grid, values, self.space)


def eval_curve(c: SampledCurve, t):
    """Piecewise-linear evaluation; scalar t gives a vector, array t gives (n, dim)."""
    t_arr = np.asarray(t, dtype=float)
    scalar = t_arr.ndim == 0
    t1 = np.atleast_1d(t_arr)
    g = c.grid
    slack = 1e-12 * max(1.0, abs(g.t_start), abs(g.t_end))
    if np.any(t1 < g.t_start - slack) or np.any(t1 > g.t_end + slack) or np.any(np.isnan(t1)):
        bad = t1[(t1 < g.t_start - slack) | (t1 > g.t_end + slack) | np.isnan(t1)][0]
        raise WindowError(f"t={bad} outside curve window [{g.t_start}, {g.t_end}]")
    pos = (t1 - g.t_start) / g.dt
    k = np.clip(np.floor(pos).astype(int), 0, g.n_points - 2)
    theta = np.clip(pos - k, 0.0, 1.0)[:, None]
    v = c.values
    out = v[k] * (1.0 - theta) + v[k + 1] * theta
    # exact node values, no rounding from the blend
    on_node = theta[:, 0] == 0.0
    out[on_node] = v[k[on_node]]
    return out[0] if scalar else out
