"""Seeded random trials for the stability checkers and their corruption tests."""

from dataclasses import replace

import numpy as np

from yosida.core import Grid, SampledCurve
from yosida.forcing import Forcing
from yosida.operators import (EvolutionProblem, linear_matrix, rotation_damped, scalar_cubic,
                              soft_threshold, zero)
from yosida.solver import SolverConfig, solve_halfline, solve_line
from yosida.verify import (check_half_whole_comparison, check_stability_halfline,
                           check_stability_line)

LAM = 0.05


def families():
    return [zero(2), rotation_damped(-0.3, 1.5),
            linear_matrix([[-1.0, 0.5], [0.0, -2.0]], "sup"),
            linear_matrix([[-1.0, 0.0], [0.0, -0.5]], mod_amp=0.5, mod_freq=2.0),
            soft_threshold(0.7, 2, "euclidean"), soft_threshold(0.4, 2, "sup"),
            scalar_cubic(0.5, 1.0, 0.2, 2, "one"), scalar_cubic(0.3, 1.0, 0.0, 2, "euclidean")]


def random_trig(rng, dim=2, n_terms=3):
    terms = [{"amp": float(rng.uniform(-1, 1)), "freq": float(rng.uniform(0.2, 3.0)),
              "phase": float(rng.uniform(0, 2 * np.pi)), "component": int(rng.integers(dim))}
             for _ in range(n_terms)]
    return Forcing("trig", dim, {"terms": terms})


def line_trial(seed):
    rng = np.random.default_rng(seed)
    fams = families()
    fam = fams[int(rng.integers(len(fams)))]
    omega = -float(rng.uniform(0.5, 1.5))
    f1, f2 = random_trig(rng), random_trig(rng)
    cfg = SolverConfig(LAM, Grid.from_step(-25.0, 5.0, 0.01), tail_tol=1e-6)
    r1 = solve_line(EvolutionProblem(fam, omega=omega, forcing=f1), cfg)
    r2 = solve_line(EvolutionProblem(fam, omega=omega, forcing=f2), cfg)
    return (r1, r2, f1, f2, omega), check_stability_line(r1, r2, f1, f2, omega)


def halfline_trial(seed):
    rng = np.random.default_rng(seed)
    fams = families()
    fam = fams[int(rng.integers(len(fams)))]
    omega = float(rng.uniform(-1.5, 0.25))
    f1, f2 = random_trig(rng), random_trig(rng)
    x1, x2 = rng.normal(size=2), rng.normal(size=2)
    cfg = SolverConfig(LAM, Grid.from_step(0.0, 4.0, 0.005))
    r1 = solve_halfline(EvolutionProblem(fam, omega=omega, forcing=f1, u0=x1), cfg)
    r2 = solve_halfline(EvolutionProblem(fam, omega=omega, forcing=f2, u0=x2), cfg)
    return (r1, r2, f1, f2, x1, x2, omega), check_stability_halfline(r1, r2, f1, f2, x1, x2, omega)


def comparison_trial(seed):
    rng = np.random.default_rng(seed)
    fams = families()
    fam = fams[int(rng.integers(len(fams)))]
    omega = -float(rng.uniform(0.5, 1.5))
    f = random_trig(rng)
    r_line = solve_line(EvolutionProblem(fam, omega=omega, forcing=f),
                        SolverConfig(LAM, Grid.from_step(-25.0, 5.0, 0.01), tail_tol=1e-6))
    a = round(float(rng.uniform(-5.0, 0.0)), 2)
    x0 = rng.normal(size=2)
    r_half = solve_halfline(EvolutionProblem(fam, omega=omega, forcing=f, u0=x0),
                            SolverConfig(LAM, Grid.from_step(a, 5.0, 0.01)))
    return (r_line, r_half, omega), check_half_whole_comparison(r_line, r_half, omega)


def corrupt_at(res, t, size, direction):
    """Copy of res with size * direction added to u (and its limit candidate) at node t."""
    k = res.u.grid.index_of(t)
    e = np.asarray(direction, dtype=float)
    out = replace(res)
    vals = res.u.values.copy()
    vals[k] += size * e
    out.u = SampledCurve(res.u.grid, vals, res.u.space)
    if res.extrapolated is not None:
        ext = res.extrapolated.values.copy()
        ext[k] += size * e
        out.extrapolated = SampledCurve(res.extrapolated.grid, ext, res.u.space)
    return out


def _vals(res):
    return (res.extrapolated if res.extrapolated is not None else res.u).values


def _direction(res, other_vals, k, space):
    d = _vals(res)[k] - other_vals[k]
    n = space.norm(d)
    if n > 0:
        return d / n
    e = np.zeros(space.dim)
    e[0] = 1.0
    return e / space.norm(e)


def corruption_size(cert):
    """Push the worst sample 10 budgets past its bound."""
    return cert.worst_margin + 10.0 * cert.tolerance_budget


def corrupted_line(args, cert):
    r1, r2, f1, f2, omega = args
    t = cert.samples[cert.worst_index].inputs["t"]
    k = r1.u.grid.index_of(t)
    d = _direction(r1, _vals(r2), k, r1.u.space)
    bad = corrupt_at(r1, t, corruption_size(cert), d)
    return check_stability_line(bad, r2, f1, f2, omega)


def corrupted_halfline(args, cert):
    r1, r2, f1, f2, x1, x2, omega = args
    t = cert.samples[cert.worst_index].inputs["t"]
    k = r1.u.grid.index_of(t)
    d = _direction(r1, _vals(r2), k, r1.u.space)
    bad = corrupt_at(r1, t, corruption_size(cert), d)
    return check_stability_halfline(bad, r2, f1, f2, x1, x2, omega)


def corrupted_comparison(args, cert):
    r_line, r_half, omega = args
    t = cert.samples[cert.worst_index].inputs["t"]
    k_half = r_half.u.grid.index_of(t)
    k_line = r_line.u.grid.index_of(t)
    line_vals = _vals(r_line)
    own = _vals(r_half)
    d = own[k_half] - line_vals[k_line]
    space = r_half.u.space
    n = space.norm(d)
    if n == 0:
        d = np.eye(space.dim)[0]
        n = space.norm(d)
    bad = corrupt_at(r_half, t, corruption_size(cert), d / n)
    return check_half_whole_comparison(r_line, bad, omega)
