"""Outcome record of one numerical inequality or identity check."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field


@dataclass(frozen=True)
class Sample:
    """One tested instance: margin = rhs - lhs, so negative means violated."""

    inputs: dict
    lhs: float
    rhs: float

    @property
    def margin(self) -> float:
        return self.rhs - self.lhs


@dataclass
class Certificate:
    """Sampled check of an inequality with an itemized tolerance budget.

    The check passes iff the worst margin is at least minus the total budget.
    """

    name: str
    samples: list
    budget: dict = field(default_factory=dict)
    params: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)

    def __post_init__(self):
        if not self.samples:
            raise ValueError(f"certificate {self.name!r} has no samples")
        for key, val in self.budget.items():
            if not (val >= 0 and math.isfinite(val)):
                raise ValueError(f"budget component {key!r} must be finite and >= 0, got {val}")

    @property
    def margins(self) -> list:
        return [s.margin for s in self.samples]

    @property
    def worst_index(self) -> int:
        m = self.margins
        return min(range(len(m)), key=m.__getitem__)

    @property
    def worst_margin(self) -> float:
        return self.samples[self.worst_index].margin

    @property
    def tolerance_budget(self) -> float:
        return float(sum(self.budget.values()))

    @property
    def passed(self) -> bool:
        return bool(self.worst_margin >= -self.tolerance_budget)

    @property
    def n_violations(self) -> int:
        tol = self.tolerance_budget
        return sum(1 for m in self.margins if m < -tol)

    def to_dict(self, include_samples: bool = False) -> dict:
        worst = self.samples[self.worst_index]
        out = {
            "name": self.name,
            "params": _clean(self.params),
            "n_samples": len(self.samples),
            "n_violations": self.n_violations,
            "worst_margin": _num(self.worst_margin),
            "worst_sample": {"inputs": _clean(worst.inputs), "lhs": _num(worst.lhs),
                             "rhs": _num(worst.rhs)},
            "budget": {k: _num(v) for k, v in self.budget.items()},
            "tolerance_budget": _num(self.tolerance_budget),
            "pass": self.passed,
            "notes": list(self.notes),
        }
        if include_samples:
            out["samples"] = [
                {"inputs": _clean(s.inputs), "lhs": _num(s.lhs), "rhs": _num(s.rhs),
                 "margin": _num(s.margin)}
                for s in self.samples
            ]
        return out

    def to_json(self, include_samples: bool = False) -> str:
        return json.dumps(self.to_dict(include_samples), sort_keys=True, indent=2)


def _num(x):
    x = float(x)
    if math.isfinite(x):
        return x
    return "inf" if x > 0 else ("-inf" if x < 0 else "nan")


def _clean(obj):
    """Make params JSON-safe with deterministic float text."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, bool) or obj is None or isinstance(obj, str):
        return obj
    if isinstance(obj, int):
        return obj
    try:
        import numpy as np
        if isinstance(obj, np.ndarray):
            return [_clean(v) for v in obj.tolist()]
        if isinstance(obj, np.integer):
            return int(obj)
    except ImportError:  # pragma: no cover
        pass
    try:
        return _num(obj)
    except (TypeError, ValueError):
        return str(obj)
