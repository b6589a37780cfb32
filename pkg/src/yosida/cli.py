"""Scenario runner: parse JSON configs, solve, certify and write CSV/JSON reports.

Config schema (version 1):

    {
      "version": 1,
      "seed": 0,
      "scenarios": [
        {
          "name": "linear_cosine",
          "problem": {
            "family": {"label": "zero", "params": {}},
            "omega": -1.0,
            "forcing": {"kind": "trig", "terms": [{"amp": 1.0, "freq": 1.0}]},
            "line_kind": "whole_line",          # or "half_line" with "u0"
            "u0": null
          },
          "solver": {
            "lam": 0.01,                          # single lam
            "limit": true,                        # solve at lam, 2lam, 4lam and extrapolate
            "lams": [0.2, 0.1, 0.05, 0.025],      # optional sweep (convergence table)
            "grid": {"t_start": -30, "t_end": 30, "dt": 0.002},
            "picard_tol": 1e-10, "tail_tol": 1e-8, "left_extension": "freeze",
            "output_stride": 1
          },
          "delay": {                              # optional: functional equation
            "kind": "point_delay", "r": 1.0, "beta": 0.5, "coef": 0.5,
            "kernel": {"kind": "uniform"}         # distributed only; or exponential + rate
          },
          "checks": [{"name": "reference"}, {"name": "integral_solution", "n_samples": 200}]
        }
      ]
    }

Checks: reference, integral_solution, boundedness, stability_line,
stability_halfline, half_whole, ap_transfer; for delay scenarios
fde_contraction, fde_residual, fde_agreement.

Each scenario writes into <out>/<name>/: solution.csv, convergence.csv
(when lams is given) and one certificate JSON per check. The summary
index <out>/summary.csv lists every certificate with its budget.
Exit codes: 0 all certificates pass, 1 a certificate failed or a check
could not run, 2 configuration error.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from .certificate import Certificate, Sample
from .core import Grid, SampledCurve
from .delay import (DelayProblem, HistoryFunctional, check_fde_agreement, fde_residual,
                    solve_fde, solve_fde_limit)
from .forcing import make_forcing
from .operators import EvolutionProblem, make_family
from .resolvents import (SOME_INTEGRALS_COLUMNS, some_integrals_rows, verify_some_integrals)
from .solver import SolverConfig, converge_study, solve, solve_limit
from .verify import (SamplingPlan, check_ap_transfer, check_boundedness, check_half_whole_comparison,
                     check_integral_solution, check_stability_halfline, check_stability_line,
                     find_almost_periods, stability_bound)

CONFIG_VERSION = 1
EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2
CHECKS = ("reference", "integral_solution", "boundedness", "stability_line", "stability_halfline",
          "half_whole", "ap_transfer")
DELAY_CHECKS = ("fde_contraction", "fde_residual", "fde_agreement")
SUMMARY_COLUMNS = ("scenario", "check", "pass", "worst_margin", "tolerance_budget", "n_samples",
                   "n_violations", "seed", "file")


class ConfigError(ValueError):
    pass


def fmt(x) -> str:
    """Shortest round-trip decimal for floats; plain text otherwise."""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (dict, list)):
        return json.dumps(x, sort_keys=True)
    return str(x)


def write_csv(path: Path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])


def write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, sort_keys=True, indent=2) + "\n")


# ---------------------------------------------------------------------------
# config parsing


@dataclass
class Scenario:
    name: str
    problem: EvolutionProblem
    cfg: SolverConfig
    limit: bool
    lams: list | None
    checks: list
    seed: int
    stride: int = 1
    delay: DelayProblem | None = None
    spec: dict = field(default_factory=dict)


def _kernel(spec: dict | None):
    spec = dict(spec or {"kind": "uniform"})
    kind = spec.get("kind", "uniform")
    if kind == "uniform":
        return lambda th: np.ones_like(th)
    if kind == "exponential":
        rate = float(spec.get("rate", 1.0))
        return lambda th: np.exp(rate * th)
    raise ConfigError(f"unknown kernel kind {kind!r}")


def _grid(spec: dict) -> Grid:
    try:
        return Grid.from_step(float(spec["t_start"]), float(spec["t_end"]), float(spec["dt"]))
    except KeyError as exc:
        raise ConfigError(f"grid needs t_start, t_end and dt (missing {exc})") from None


def parse_scenario(spec: dict, seed: int) -> Scenario:
    name = spec.get("name")
    if not name or not isinstance(name, str) or "/" in name:
        raise ConfigError("every scenario needs a plain-text name")
    try:
        pspec = spec["problem"]
        fspec = pspec.get("family", {"label": "zero"})
        family = make_family(fspec["label"], **fspec.get("params", {}))
        omega = float(pspec.get("omega", 0.0))
        forcing = make_forcing(pspec.get("forcing"), family.space.dim)
        line_kind = pspec.get("line_kind", "whole_line")
        u0 = pspec.get("u0")
        sspec = spec.get("solver", {})
        grid = _grid(sspec.get("grid", {}))
        lam = float(sspec.get("lam", 0.01))
        cfg = SolverConfig(lam, grid, picard_tol=float(sspec.get("picard_tol", 1e-10)),
                           tail_tol=float(sspec.get("tail_tol", 1e-8)),
                           left_extension=sspec.get("left_extension", "freeze"))
        lams = sspec.get("lams")
        if lams is not None:
            lams = [float(v) for v in lams]
            if len(lams) < 3 or any(b >= a for a, b in zip(lams, lams[1:])):
                raise ConfigError("lams must list at least 3 strictly decreasing values")
        checks = list(spec.get("checks", []))
        delay = None
        if "delay" in spec:
            d = spec["delay"]
            fn = HistoryFunctional(r=float(d["r"]), kind=d.get("kind", "point_delay"),
                                   beta=float(d["beta"]), coef=d.get("coef", d["beta"]),
                                   kernel=_kernel(d.get("kernel")) if d.get("kind") == "distributed" else None,
                                   forcing=forcing, dim=family.space.dim)
            delay = DelayProblem(family, omega, fn, label=name)
            problem = EvolutionProblem(family, omega, forcing, label=name)
            allowed = DELAY_CHECKS
        else:
            problem = EvolutionProblem(family, omega, forcing, u0=u0, line_kind=line_kind, label=name)
            problem.check_lambda(lam)
            for l in lams or []:
                problem.check_lambda(l)
            allowed = CHECKS
        for c in checks:
            if not isinstance(c, dict) or c.get("name") not in allowed:
                raise ConfigError(f"unknown check {c!r}; known: {list(allowed)}")
        stride = int(sspec.get("output_stride", 1))
        if stride < 1:
            raise ConfigError("output_stride must be >= 1")
    except ConfigError as exc:
        raise ConfigError(f"scenario {name!r}: {exc}") from None
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"scenario {name!r}: {exc}") from None
    return Scenario(name, problem, cfg, bool(sspec.get("limit", False)), lams, checks, seed,
                    stride, delay, spec)


def shipped_configs() -> list[str]:
    root = resources.files("yosida") / "scenarios"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".json"))


def load_config(path_or_name: str, seed: int | None = None) -> list[Scenario]:
    """Read a config file, or a shipped scenario set by name."""
    p = Path(path_or_name)
    try:
        if p.is_file():
            text = p.read_text()
        elif path_or_name in shipped_configs():
            text = (resources.files("yosida") / "scenarios" / f"{path_or_name}.json").read_text()
        else:
            raise ConfigError(f"no config file or shipped scenario set named {path_or_name!r}; "
                              f"shipped: {shipped_configs()}")
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path_or_name}: invalid JSON ({exc})") from None
    if not isinstance(data, dict) or data.get("version") != CONFIG_VERSION:
        raise ConfigError(f"{path_or_name}: config needs \"version\": {CONFIG_VERSION}")
    seed = int(data.get("seed", 0)) if seed is None else int(seed)
    specs = data.get("scenarios")
    if not isinstance(specs, list) or not specs:
        raise ConfigError(f"{path_or_name}: config needs a non-empty scenario list")
    scenarios = [parse_scenario(s, seed) for s in specs]
    names = [s.name for s in scenarios]
    if len(set(names)) != len(names):
        raise ConfigError("scenario names must be unique")
    return scenarios


# ---------------------------------------------------------------------------
# checks


def linear_reference(problem: EvolutionProblem):
    """Bounded whole-line solution of u' = (M + omega) u + f for linear families and trig/constant f."""
    fam = problem.family
    d = fam.space.dim
    if fam.label == "zero":
        M = np.zeros((d, d))
    elif fam.label in ("linear_matrix", "rotation_damped") and fam.autonomous:
        a, th = fam.params.get("a"), fam.params.get("theta")
        M = np.array(fam.params["M"]) if "M" in fam.params else np.array([[a, -th], [th, a]])
    else:
        return None
    f = problem.forcing
    if getattr(f, "kind", None) not in ("zero", "constant", "trig"):
        return None
    B = M + problem.omega * np.eye(d)

    def ref(t):
        t = np.atleast_1d(np.asarray(t, dtype=float))
        out = np.zeros((t.size, d))
        if f.kind == "constant":
            out[:] = -np.linalg.solve(B, np.broadcast_to(np.asarray(f.params["value"], float), (d,)))
        elif f.kind == "trig":
            for term in f.params["terms"]:
                e = np.zeros(d)
                e[int(term.get("component", 0))] = term.get("amp", 1.0)
                xi = term.get("freq", 1.0)
                v = np.linalg.solve(1j * xi * np.eye(d) - B, e)
                out += (np.exp(1j * (xi * t + term.get("phase", 0.0)))[:, None] * v[None]).real
        return out

    return ref


def _candidate(res):
    """(curve, error) of the limit candidate or the approximant itself."""
    if res.extrapolated is not None:
        return res.extrapolated, res.candidate_error(True)
    return res.u, 0.0


def check_reference(sc: Scenario, res) -> Certificate:
    ref = linear_reference(sc.problem)
    if ref is None:
        raise ConfigError("reference check needs a linear autonomous family with zero, constant "
                          "or trig forcing")
    curve, err = _candidate(res)
    win = curve.restrict(*res.valid_window)
    d = win.space.norms(win.values - ref(win.times))
    stride = max(1, win.times.size // 2000)
    samples = [Sample({"t": float(t)}, float(v), 0.0) for t, v in zip(win.times[::stride], d[::stride])]
    k = int(np.argmax(d))
    samples.append(Sample({"t": float(win.times[k]), "kind": "max"}, float(d[k]), 0.0))
    budget = {"solution": err, "tail": res.tail_error_bound}
    if res.extrapolated is None:
        budget["lambda"] = float(sc.problem.forcing.sup_bound() * 2 * res.lam)
    return Certificate("reference", samples, budget,
                       params={"lam": res.lam, "window": list(res.valid_window), "sup_error": float(d.max())})


def _second(sc: Scenario, c: dict, forcing_key="forcing2", u0_key=None):
    f2 = make_forcing(c.get(forcing_key), sc.problem.space.dim) if forcing_key in c else sc.problem.forcing
    p2 = sc.problem.with_forcing(f2)
    if u0_key is not None and u0_key in c:
        p2 = p2.with_u0(c[u0_key])
    return p2


def _solve(sc: Scenario, p: EvolutionProblem):
    return solve_limit(p, sc.cfg, sc.cfg.lam) if sc.limit else solve(p, sc.cfg)


def run_check(sc: Scenario, c: dict, res, table) -> Certificate:
    name = c["name"]
    p = sc.problem
    if name == "reference":
        return check_reference(sc, res)
    if name == "integral_solution":
        plan = SamplingPlan(n_samples=int(c.get("n_samples", 200)), seed=sc.seed,
                            max_span=float(c.get("max_span", 2.0)))
        return check_integral_solution(res, p, plan)
    if name == "boundedness":
        if table is None:
            raise ConfigError("boundedness needs a lams sweep")
        bound = c.get("bound")
        if bound == "stability":
            bound = stability_bound(p.omega, p.forcing.sup_bound())
        return check_boundedness(table, bound=bound)
    if name == "stability_line":
        p2 = _second(sc, c)
        return check_stability_line(res, _solve(sc, p2), p.forcing, p2.forcing, p.omega)
    if name == "stability_halfline":
        p2 = _second(sc, c, u0_key="u0_2")
        return check_stability_halfline(res, _solve(sc, p2), p.forcing, p2.forcing, p.u0, p2.u0, p.omega)
    if name == "half_whole":
        start = float(c.get("start", 0.0))
        grid = sc.cfg.grid
        hgrid = grid.sub(grid.index_of(start))
        ph = p.with_u0(c.get("x0", [0.0] * p.space.dim))
        hcfg = SolverConfig(sc.cfg.lam, hgrid, picard_tol=sc.cfg.picard_tol, tail_tol=sc.cfg.tail_tol)
        half = solve_limit(ph, hcfg, sc.cfg.lam) if sc.limit else solve(ph, hcfg)
        return check_half_whole_comparison(res, half, p.omega)
    if name == "ap_transfer":
        found = find_almost_periods(p.forcing, float(c.get("eps", 0.05)), float(c.get("s_max", 200.0)),
                                    ds=float(c.get("ds", 1e-3)), space=p.space)
        if not found:
            return Certificate("ap_transfer", [Sample({"found": 0}, 1.0, 0.0)],
                               params={"almost_periods": [], "reason": "no almost-period found"})
        cert = check_ap_transfer(p, [a["shift"] for a in found], result=res)
        cert.params["almost_periods"] = found
        return cert
    raise ConfigError(f"unknown check {name!r}")


def run_delay_check(sc: Scenario, c: dict, res) -> Certificate:
    dp = sc.delay
    name = c["name"]
    if name == "fde_contraction":
        bound = dp.contraction + 0.05
        ratios = res.meta["outer_ratios"]
        samples = [Sample({"iteration": i + 2}, float(r), bound) for i, r in enumerate(ratios)]
        if not samples:
            samples = [Sample({"iteration": 0}, 0.0, bound)]
        return Certificate("fde_contraction", samples,
                           params={"contraction_bound": dp.contraction, "outer_changes": res.meta["outer_changes"]})
    if name == "fde_residual":
        if dp.family.label != "zero":
            raise ConfigError("fde_residual needs the zero family")
        curve, err = _candidate(res)
        ts, r, tail = fde_residual(curve.restrict(*res.valid_window), dp)
        tol = float(c.get("tol", 1e-3))
        stride = max(1, ts.size // 2000)
        samples = [Sample({"t": float(t)}, float(v), tol) for t, v in zip(ts[::stride], r[::stride])]
        k = int(np.argmax(r))
        samples.append(Sample({"t": float(ts[k]), "kind": "max"}, float(r[k]), tol))
        return Certificate("fde_residual", samples, {"tail": float(tail.max())},
                           params={"tol": tol, "solution_error": err, "sup_residual": float(r.max())})
    if name == "fde_agreement":
        return check_fde_agreement(dp, res, n_blocks=c.get("n_blocks"))
    raise ConfigError(f"unknown check {name!r}")


# ---------------------------------------------------------------------------
# scenario execution


def _solution_rows(res, stride: int):
    curve, err = _candidate(res)
    win = curve.restrict(*res.valid_window)
    i0 = res.u.grid.index_of(res.valid_window[0])
    tail = res.tail_bound if res.tail_bound is not None else np.zeros(res.u.grid.n_points)
    for k in range(0, win.times.size, stride):
        yield [win.times[k], *win.values[k], err + float(tail[i0 + k])]


def run_scenario(sc: Scenario, out: Path, what: str = "run") -> list[dict]:
    """Solve and certify one scenario; returns summary rows."""
    d = out / sc.name
    d.mkdir(parents=True, exist_ok=True)
    rows = []

    def record(check, cert):
        fname = f"{check}.json"
        body = cert.to_dict()
        body["scenario"] = sc.name
        body["seed"] = sc.seed
        write_json(d / fname, body)
        rows.append({"scenario": sc.name, "check": check, "pass": cert.passed,
                     "worst_margin": cert.worst_margin, "tolerance_budget": cert.tolerance_budget,
                     "n_samples": len(cert.samples), "n_violations": cert.n_violations,
                     "seed": sc.seed, "file": f"{sc.name}/{fname}"})

    def error(check, exc):
        rows.append({"scenario": sc.name, "check": check, "pass": False, "worst_margin": math.nan,
                     "tolerance_budget": math.nan, "n_samples": 0, "n_violations": 0,
                     "seed": sc.seed, "file": f"error: {exc}"})

    dim = sc.problem.space.dim
    header = ["t", *[f"u{i}" for i in range(dim)], "budget"]
    if sc.delay is not None:
        try:
            res = solve_fde_limit(sc.delay, sc.cfg, sc.cfg.lam) if sc.limit else solve_fde(sc.delay, sc.cfg)
        except (ValueError, RuntimeError) as exc:
            error("solve", exc)
            return rows
        write_csv(d / "solution.csv", header, _solution_rows(res, sc.stride))
        for c in sc.checks:
            try:
                record(c["name"], run_delay_check(sc, c, res))
            except (ValueError, RuntimeError) as exc:
                error(c["name"], exc)
        return rows

    table = None
    if sc.lams is not None:
        try:
            table = converge_study(sc.problem, sc.lams, sc.cfg)
        except (ValueError, RuntimeError) as exc:
            error("sweep", exc)
            return rows
        crow = []
        for r, row in zip(table.results, table.rows()):
            budget = 2 * r.residual + r.tail_bound[r.u.grid.index_of(table.window[0])]
            crow.append([row["lam"], row["cauchy"], row["ref_error"], budget])
        write_csv(d / "convergence.csv", ["lam", "cauchy", "ref_error", "budget"], crow)
    if what == "sweep":
        return rows
    try:
        res = _solve(sc, sc.problem)
    except (ValueError, RuntimeError) as exc:
        error("solve", exc)
        return rows
    write_csv(d / "solution.csv", header, _solution_rows(res, sc.stride))
    for c in sc.checks:
        try:
            record(c["name"], run_check(sc, c, res, table))
        except (ValueError, RuntimeError) as exc:
            error(c["name"], exc)
    return rows


def _run_one(args):
    sc_spec, seed, out, what = args
    return run_scenario(parse_scenario(sc_spec, seed), Path(out), what)


def run_all(scenarios: list[Scenario], out: Path, jobs: int = 1, what: str = "run") -> int:
    out.mkdir(parents=True, exist_ok=True)
    if jobs > 1 and len(scenarios) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            parts = list(ex.map(_run_one, [(s.spec, s.seed, str(out), what) for s in scenarios]))
    else:
        parts = [run_scenario(s, out, what) for s in scenarios]
    rows = [r for part in parts for r in part]
    write_summary(out, rows)
    bad = [r for r in rows if not r["pass"]]
    for r in bad:
        print(f"FAIL {r['scenario']}/{r['check']}: {r['file']}", file=sys.stderr)
    return EXIT_FAIL if bad else EXIT_OK


def write_summary(out: Path, rows: list[dict]) -> None:
    write_csv(out / "summary.csv", SUMMARY_COLUMNS, ([r[c] for c in SUMMARY_COLUMNS] for r in rows))


# ---------------------------------------------------------------------------
# integral identities


def parse_items(text: str) -> list[int]:
    if text == "all":
        return list(range(1, 9))
    try:
        items = [int(v) for v in text.split(",")]
    except ValueError:
        raise ConfigError(f"bad item selector {text!r}") from None
    for i in items:
        if not 1 <= i <= 8:
            raise ConfigError(f"item {i} is not one of 1..8")
    return items


def verify_integrals(items: list[int], out: Path, params: dict | None = None) -> int:
    out.mkdir(parents=True, exist_ok=True)
    rows, summary = [], []
    for item in items:
        p = (params or {}).get(str(item))
        try:
            cert = verify_some_integrals(item, p)
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"item {item}: {exc}") from None
        body = cert.to_dict(include_samples=True)
        write_json(out / f"item{item}.json", body)
        for r in some_integrals_rows(cert):
            rows.append([r[c] for c in SOME_INTEGRALS_COLUMNS] + [cert.tolerance_budget])
        summary.append({"scenario": "some_integrals", "check": f"item{item}", "pass": cert.passed,
                        "worst_margin": cert.worst_margin, "tolerance_budget": cert.tolerance_budget,
                        "n_samples": len(cert.samples), "n_violations": cert.n_violations, "seed": 0,
                        "file": f"item{item}.json"})
    write_csv(out / "some_integrals.csv", list(SOME_INTEGRALS_COLUMNS) + ["budget"], rows)
    write_summary(out, summary)
    return EXIT_OK if all(r["pass"] for r in summary) else EXIT_FAIL


# ---------------------------------------------------------------------------
# report


def report(out: Path) -> int:
    """Rebuild summary.csv from the certificate JSONs under out and print it."""
    rows = []
    for path in sorted(out.rglob("*.json")):
        body = json.loads(path.read_text())
        if "pass" not in body or "name" not in body:
            continue
        rows.append({"scenario": body.get("scenario", path.parent.name), "check": path.stem,
                     "pass": body["pass"], "worst_margin": body["worst_margin"],
                     "tolerance_budget": body["tolerance_budget"], "n_samples": body["n_samples"],
                     "n_violations": body["n_violations"], "seed": body.get("seed", 0),
                     "file": str(path.relative_to(out))})
    if not rows:
        raise ConfigError(f"no certificates under {out}")
    write_summary(out, rows)
    for r in rows:
        status = "PASS" if r["pass"] else "FAIL"
        print(f"{status} {r['scenario']}/{r['check']} margin={fmt(r['worst_margin'])} "
              f"budget={fmt(r['tolerance_budget'])}")
    return EXIT_OK if all(r["pass"] for r in rows) else EXIT_FAIL


# ---------------------------------------------------------------------------
# entry point


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="yosida", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)
    for name, hlp in (("run", "solve and certify every scenario"),
                      ("sweep", "convergence tables for scenarios with a lams list"),
                      ("delay", "solve and certify the delay scenarios")):
        p = sub.add_parser(name, help=hlp)
        p.add_argument("--config", required=True, help="config file or shipped scenario set name")
        p.add_argument("--out", default="out")
        p.add_argument("--seed", type=int, default=None, help="overrides the config seed")
        p.add_argument("--jobs", type=int, default=1)
    p = sub.add_parser("verify-integrals", help="Bessel-kernel integral table")
    p.add_argument("--items", default="all", help="comma list of items 1..8, or all")
    p.add_argument("--config", default=None, help="JSON with per-item parameter overrides")
    p.add_argument("--out", default="out")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--jobs", type=int, default=1)
    p = sub.add_parser("report", help="rebuild and print the summary index")
    p.add_argument("--out", default="out")
    p.add_argument("--config", default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--jobs", type=int, default=1)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    out = Path(args.out)
    try:
        if args.command in ("run", "sweep", "delay"):
            scenarios = load_config(args.config, args.seed)
            if args.command == "delay":
                scenarios = [s for s in scenarios if s.delay is not None]
                if not scenarios:
                    raise ConfigError("config has no delay scenarios")
            if args.command == "sweep":
                scenarios = [s for s in scenarios if s.lams is not None]
                if not scenarios:
                    raise ConfigError("config has no scenario with a lams list")
            return run_all(scenarios, out, max(1, args.jobs), "sweep" if args.command == "sweep" else "run")
        if args.command == "verify-integrals":
            params = None
            if args.config is not None:
                try:
                    params = json.loads(Path(args.config).read_text())
                except (OSError, json.JSONDecodeError) as exc:
                    raise ConfigError(f"{args.config}: {exc}") from None
                if not isinstance(params, dict):
                    raise ConfigError(f"{args.config}: expected an object keyed by item number")
            return verify_integrals(parse_items(args.items), out, params)
        return report(out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
