"""Closed-form forcing terms addressable from scenario configs."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class Forcing:
    """Vectorized forcing t -> (n, dim).

    kinds:
      zero        f = 0
      constant    f = value (list of length dim)
      trig        f_i = sum of amp*cos(freq*t + phase) over terms with component i
      damped      f = amp*exp(-rate*|t|)*cos(freq*t) in every component
      lorentzian  f = amp/(1 + (t/width)**2) in every component
    """

    kind: str = "zero"
    dim: int = 1
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in ("zero", "constant", "trig", "damped", "lorentzian"):
            raise ValueError(f"unknown forcing kind {self.kind!r}")

    def __call__(self, t):
        t = np.atleast_1d(np.asarray(t, dtype=float))
        out = np.zeros((t.size, self.dim))
        p = self.params
        if self.kind == "constant":
            out[:] = np.broadcast_to(np.asarray(p["value"], dtype=float), (self.dim,))
        elif self.kind == "trig":
            for term in p["terms"]:
                comp = int(term.get("component", 0))
                out[:, comp] += term.get("amp", 1.0) * np.cos(term.get("freq", 1.0) * t
                                                              + term.get("phase", 0.0))
        elif self.kind == "damped":
            v = p.get("amp", 1.0) * np.exp(-p.get("rate", 1.0) * np.abs(t)) * np.cos(p.get("freq", 0.0) * t)
            out[:] = v[:, None]
        elif self.kind == "lorentzian":
            v = p.get("amp", 1.0) / (1.0 + (t / p.get("width", 1.0)) ** 2)
            out[:] = v[:, None]
        return out

    def sup_bound(self) -> float:
        """An upper bound for sup_t |f(t)| in every norm of R^dim."""
        p = self.params
        if self.kind == "zero":
            return 0.0
        if self.kind == "constant":
            return float(np.sum(np.abs(np.broadcast_to(np.asarray(p["value"], dtype=float), (self.dim,)))))
        if self.kind == "trig":
            return float(sum(abs(term.get("amp", 1.0)) for term in p["terms"]))
        return abs(p.get("amp", 1.0)) * self.dim

    def shift_sup_bound(self, s, norm_kind: str = "euclidean"):
        """Upper bound for sup_t |f(t + s) - f(t)| over the whole line, or None.

        For trig terms |cos(w(t+s)+p) - cos(wt+p)| <= 2|sin(ws/2)|, with
        equality in the sup when frequencies are rationally independent.
        Kinds without a closed form return None.
        """
        s = np.atleast_1d(np.asarray(s, dtype=float))
        if self.kind in ("zero", "constant"):
            return np.zeros(s.size)
        if self.kind != "trig":
            return None
        comp = np.zeros((s.size, self.dim))
        for term in self.params["terms"]:
            c = int(term.get("component", 0))
            comp[:, c] += 2.0 * abs(term.get("amp", 1.0)) * np.abs(np.sin(0.5 * term.get("freq", 1.0) * s))
        if norm_kind == "sup":
            return comp.max(axis=1)
        if norm_kind == "one":
            return comp.sum(axis=1)
        return np.sqrt(np.sum(comp ** 2, axis=1))

    def l1_bound(self) -> float:
        """Upper bound for the integral of |f| over [0, inf) (inf if not integrable)."""
        p = self.params
        if self.kind == "zero":
            return 0.0
        if self.kind == "damped":
            return abs(p.get("amp", 1.0)) * self.dim / p.get("rate", 1.0)
        if self.kind == "lorentzian":
            return abs(p.get("amp", 1.0)) * self.dim * p.get("width", 1.0) * np.pi / 2
        return np.inf

    def to_dict(self) -> dict:
        return {"kind": self.kind, "dim": self.dim, **self.params}


def make_forcing(spec: dict | None, dim: int = 1) -> Forcing:
    if spec is None:
        return Forcing("zero", dim)
    spec = dict(spec)
    kind = spec.pop("kind", "zero")
    dim = int(spec.pop("dim", dim))
    return Forcing(kind, dim, spec)
