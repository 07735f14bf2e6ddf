"""Command-line front end.

    barrierlab <verify-lemmas|build-barrier|verify-barrier|simulate|compare|transform|report>
               --config <path> [--out <dir>]

Every command reads one JSON config (validated against a schema before
any computation), writes machine-readable artifacts into the output
directory (--out, else "out_dir" from the config, else the config's
directory), and is deterministic given the config.  Exit codes:
0 = pass, 1 = a computation ran and failed its criterion, 2 = config
error, 3 = the solver grid was too small for the support.
"""
from __future__ import annotations

import json
import math
import sys
from pathlib import Path

import click
import jsonschema
import numpy as np

from . import barriers, residual, solver, transform
from .envelope import EnvelopeCalculus
from .reports import atomic_write_csv, atomic_write_json
from .solver import GridTooSmallError, HorizonError, InstabilityError
from .weights import DomainError, ProblemSpec, SpecError, validate_doubling

EXIT_FAIL = 1
EXIT_CONFIG = 2
EXIT_GRID = 3

_WEIGHT_SCHEMA = {
    "type": "object",
    "properties": {
        "kind": {"enum": ["power", "zygmund"]},
        "alpha": {"type": "number"},
        "beta": {"type": "number"},
        "c": {"type": "number"},
        "alpha1": {"type": "number"},
        "alpha2": {"type": "number"},
    },
    "required": ["kind", "alpha"],
}

_SCHEMA = {
    "type": "object",
    "properties": {
        "problem": {
            "type": "object",
            "properties": {
                "N": {"type": "integer", "minimum": 2},
                "p": {"type": "number"},
                "m": {"type": "number"},
                "weight": _WEIGHT_SCHEMA,
            },
            "required": ["N", "p", "m", "weight"],
        },
        "out_dir": {"type": "string"},
        "lemmas": {
            "type": "object",
            "properties": {
                "decades": {"type": "number", "minimum": 6},
                "per_decade": {"type": "integer", "minimum": 4},
                "tol_rel": {"type": "number", "exclusiveMinimum": 0},
            },
        },
        "barrier": {
            "type": "object",
            "properties": {
                "kind": {"enum": ["super", "sub"]},
                "lambda": {"type": "number", "exclusiveMinimum": 0},
            },
            "required": ["kind"],
        },
        "residual": {
            "type": "object",
            "properties": {
                "n_r_inner": {"type": "integer", "minimum": 2},
                "n_r_outer": {"type": "integer", "minimum": 2},
                "n_t": {"type": "integer", "minimum": 2},
                "t_span_factor": {"type": "number", "minimum": 1},
                "band_delta": {"type": "number", "exclusiveMinimum": 0},
                "tol": {"type": "number", "exclusiveMinimum": 0},
                "params_file": {"type": "string"},
                "csv": {"type": "boolean"},
            },
        },
        "grid": {
            "type": "object",
            "properties": {
                "r_max": {"type": "number", "exclusiveMinimum": 0},
                "n_cells": {"type": "integer", "minimum": 4},
            },
            "required": ["r_max", "n_cells"],
        },
        "t_end": {"type": "number", "exclusiveMinimum": 0},
        "cfl": {"type": "number", "exclusiveMinimum": 0, "maximum": 1},
        "u0": {
            "type": "object",
            "properties": {
                "type": {"enum": ["zero", "parabolic"]},
                "amplitude": {"type": "number", "exclusiveMinimum": 0},
                "radius": {"type": "number", "exclusiveMinimum": 0},
            },
            "required": ["type"],
        },
        "compare": {
            "type": "object",
            "properties": {
                "sub_eps": {"type": "number", "exclusiveMinimum": 0},
                "sub_ell": {"type": "number", "exclusiveMinimum": 0},
                "c_tol": {"type": "number", "exclusiveMinimum": 0},
            },
        },
        "transform": {
            "type": "object",
            "properties": {
                "s_min": {"type": "number", "exclusiveMinimum": 0},
                "s_max": {"type": "number", "exclusiveMinimum": 0},
                "per_decade": {"type": "integer", "minimum": 4},
                "bound_factor": {"type": "number", "minimum": 1},
                "s_lo": {"type": "number", "exclusiveMinimum": 0},
            },
        },
        "snapshots": {"type": "integer", "minimum": 2},
    },
}


class ConfigError(Exception):
    pass


def _load_config(path, need_problem=True):
    try:
        with open(path) as f:
            cfg = json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        raise ConfigError(f"cannot read config: {e}") from None
    try:
        jsonschema.validate(cfg, _SCHEMA)
    except jsonschema.ValidationError as e:
        raise ConfigError(f"config schema: {e.message}") from None
    problem = None
    if need_problem:
        if "problem" not in cfg:
            raise ConfigError("config missing 'problem'")
        try:
            problem = ProblemSpec.from_dict(cfg["problem"])
        except SpecError as e:
            raise ConfigError(str(e)) from None
    return cfg, problem


def _out_dir(out, cfg, config_path):
    if out:
        d = Path(out)
    elif "out_dir" in cfg:
        d = Path(cfg["out_dir"])
    else:
        d = Path(config_path).resolve().parent
    d.mkdir(parents=True, exist_ok=True)
    return d


def _u0_from_config(cfg):
    spec = cfg.get("u0", {"type": "parabolic", "amplitude": 1.0, "radius": 1.0})
    if spec["type"] == "zero":
        return (lambda r: np.zeros_like(r)), 0.0, 0.0
    amp = float(spec.get("amplitude", 1.0))
    rad = float(spec.get("radius", 1.0))
    return solver.parabolic_cap(amp, rad), amp, rad


def _echo_params(params, problem):
    pm3 = problem.p + problem.m - 3.0
    click.echo(f"kind    = {params.kind}")
    click.echo(f"r0      = {params.r0!r}   sets the matching radius; "
               f"G(r0) against its threshold/ceiling")
    click.echo(f"nu0     = {params.nu0!r}   C^1 matching: nu0 = 1 - r0 G'(r0)/(p G(r0))")
    click.echo(f"C_star  = {params.C_star!r}   C*^-(p+m-3) = {params.C_star ** -pm3!r} "
               f"against its {'ceiling' if params.kind == 'super' else 'defining max'}")
    click.echo(f"Gamma   = {params.Gamma!r}   "
               + ("floor max(mu2 a2 C*^(p+m-3)/(p-a2), 1)" if params.kind == "super"
                  else "equality 2^(a2(p-1)/(p-a2)) G(r0)/log t0"))
    click.echo(f"t0      = {params.t0!r}   log t0 = {math.log(params.t0)!r}")
    for k, v in sorted(params.mus.items()):
        click.echo(f"{k:7s} = {v!r}")
    if params.lam is not None:
        click.echo(f"lambda  = {params.lam!r}")


@click.group()
def main():
    """Barrier laboratory for weighted doubly degenerate diffusion."""


def _command(fn):
    """Shared option plumbing and error-to-exit-code mapping."""
    @click.option("--config", "config_path", required=True,
                  type=click.Path(exists=False))
    @click.option("--out", "out", default=None, type=click.Path())
    def wrapper(config_path, out, __fn=fn):
        try:
            code = __fn(config_path, out)
        except ConfigError as e:
            click.echo(f"config error: {e}", err=True)
            sys.exit(EXIT_CONFIG)
        except (SpecError, DomainError, residual.ResidualConfigError) as e:
            click.echo(f"config error: {e}", err=True)
            sys.exit(EXIT_CONFIG)
        except GridTooSmallError as e:
            click.echo(f"grid too small: {e}", err=True)
            sys.exit(EXIT_GRID)
        except (InstabilityError, HorizonError, barriers.ConstructionError,
                transform.RangeTooShortError) as e:
            click.echo(f"failed: {e}", err=True)
            sys.exit(EXIT_FAIL)
        sys.exit(code)
    wrapper.__name__ = fn.__name__
    return wrapper


@main.command("verify-lemmas")
@_command
def cmd_verify_lemmas(config_path, out):
    """Run the doubling validation and the sandwich-lemma suite."""
    cfg, problem = _load_config(config_path)
    lcfg = cfg.get("lemmas", {})
    from .weights import default_grid
    grid = default_grid(lcfg.get("decades", 6), lcfg.get("per_decade", 64))
    tol = lcfg.get("tol_rel", 1e-6)
    doubling = validate_doubling(problem.weight, grid, tol_rel=tol)
    calc = EnvelopeCalculus(problem)
    lemmas = calc.lemma_suite(grid, tol_rel=tol)
    report = {
        "doubling": doubling.to_dict(),
        "lemmas": lemmas.to_dict(),
        "pass": doubling.passed and lemmas.passed,
    }
    d = _out_dir(out, cfg, config_path)
    atomic_write_json(d / "lemma_report.json", report)
    click.echo(f"lemma report: pass={report['pass']} -> {d / 'lemma_report.json'}")
    return 0 if report["pass"] else EXIT_FAIL


def _select_params(cfg, problem, calc):
    bcfg = cfg.get("barrier", {"kind": "super"})
    if bcfg["kind"] == "super":
        return barriers.select_super(problem, calc)
    return barriers.select_sub(problem, bcfg.get("lambda", 1.0), calc)


@main.command("build-barrier")
@_command
def cmd_build_barrier(config_path, out):
    """Select and persist a certified barrier constant set."""
    cfg, problem = _load_config(config_path)
    calc = EnvelopeCalculus(problem)
    params = _select_params(cfg, problem, calc)
    _echo_params(params, problem)
    d = _out_dir(out, cfg, config_path)
    atomic_write_json(d / "barrier_params.json",
                      {"problem": problem.to_dict(), "params": params.to_dict()})
    click.echo(f"-> {d / 'barrier_params.json'}")
    return 0


@main.command("verify-barrier")
@_command
def cmd_verify_barrier(config_path, out):
    """Certify the residual sign of a barrier on the standard grid."""
    cfg, problem = _load_config(config_path)
    calc = EnvelopeCalculus(problem)
    rcfg = cfg.get("residual", {})
    if "params_file" in rcfg:
        with open(rcfg["params_file"]) as f:
            params = barriers.BarrierParams.from_dict(json.load(f)["params"])
    else:
        params = _select_params(cfg, problem, calc)
    spec = residual.ResidualGridSpec(
        n_r_inner=rcfg.get("n_r_inner", 400),
        n_r_outer=rcfg.get("n_r_outer", 400),
        n_t=rcfg.get("n_t", 40),
        t_span_factor=rcfg.get("t_span_factor", 1e6),
        band_delta=rcfg.get("band_delta", 1e-3),
    )
    want_csv = rcfg.get("csv", True)
    rep = residual.verify(params, calc, spec, tol_residual=rcfg.get("tol", 1e-8),
                          keep_samples=want_csv)
    d = _out_dir(out, cfg, config_path)
    atomic_write_json(d / "residual_report.json", rep.to_dict())
    if want_csv:
        r, t, rho = rep.samples
        atomic_write_csv(d / "residual.csv", ["r", "t", "residual"], [r, t, rho])
    click.echo(f"residual worst={rep.worst_value:.3e} at {rep.worst_location} "
               f"pass={rep.passed}")
    return 0 if rep.passed else EXIT_FAIL


def _run_simulation(cfg, problem, calc, enlarge_params=None):
    if "grid" not in cfg or "t_end" not in cfg:
        raise ConfigError("simulate/compare need 'grid' and 't_end'")
    gcfg = cfg["grid"]
    t_end = float(cfg["t_end"])
    cfl = float(cfg.get("cfl", 0.4))
    r_max = float(gcfg["r_max"])
    if enlarge_params is not None:
        edge = float(barriers.barrier_support_radius(enlarge_params, calc, t_end))
        r_max = max(r_max, 1.1 * edge)
    grid = solver.RadialGrid(r_max=r_max, n_cells=int(gcfg["n_cells"]))
    u0, amp, rad = _u0_from_config(cfg)
    if rad >= grid.r_max:
        raise ConfigError("u0 support must sit strictly inside the grid")
    n_snap = cfg.get("snapshots", 61)
    snaps = np.concatenate([[0.0], np.geomspace(max(t_end * 1e-6, 1e-12),
                                                t_end, n_snap - 1)])
    sol = solver.simulate(problem, u0, grid, t_end, cfl=cfl,
                          snapshot_times=snaps)
    return sol, amp, rad


def _write_trajectory(d, sol):
    k, n = sol.fields.shape
    tcol = np.repeat(sol.times, n)
    rcol = np.tile(sol.grid.centers(), k)
    atomic_write_csv(d / "trajectory.csv", ["t", "r", "U"],
                     [tcol, rcol, sol.fields.ravel()])


@main.command("simulate")
@_command
def cmd_simulate(config_path, out):
    """Integrate the radial equation and measure decay/support rates."""
    cfg, problem = _load_config(config_path)
    calc = EnvelopeCalculus(problem)
    sol, _, _ = _run_simulation(cfg, problem, calc)
    d = _out_dir(out, cfg, config_path)
    _write_trajectory(d, sol)
    code = 0
    if sol.supnorm_history[-1] > 0:
        try:
            atomic_write_json(d / "decay_report.json",
                              solver.measure_decay(sol, calc).to_dict())
            atomic_write_json(d / "support_report.json",
                              solver.measure_support(sol, calc).to_dict())
        except HorizonError as e:
            click.echo(f"measurement skipped: {e}", err=True)
            code = EXIT_FAIL
    click.echo(f"simulated {sol.steps_total} steps ({sol.backend} backend) "
               f"-> {d / 'trajectory.csv'}")
    return code


@main.command("compare")
@_command
def cmd_compare(config_path, out):
    """Simulate and compare against fitted super/sub barriers."""
    cfg, problem = _load_config(config_path)
    calc = EnvelopeCalculus(problem)
    u0, amp, rad = _u0_from_config(cfg)
    if amp <= 0:
        raise ConfigError("compare needs nonzero initial data")
    sup = barriers.fit_super_above(problem, M=amp, L=rad, calc=calc)
    ccfg = cfg.get("compare", {})
    ell = ccfg.get("sub_ell", rad / 2.0)
    eps = ccfg.get("sub_eps", amp * (1.0 - (ell / rad) ** 2))
    sub = barriers.fit_sub_below(problem, eps=eps, ell=ell, calc=calc)

    sol, _, _ = _run_simulation(cfg, problem, calc, enlarge_params=sup)
    d = _out_dir(out, cfg, config_path)
    _write_trajectory(d, sol)
    c_tol = ccfg.get("c_tol", 1.0)
    rep_s = solver.compare_to_barrier(sol, sup, calc, c_tol=c_tol)
    rep_b = solver.compare_to_barrier(sol, sub, calc, c_tol=c_tol)
    atomic_write_json(d / "comparison_super.json",
                      {"params": sup.to_dict(), **rep_s.to_dict()})
    atomic_write_json(d / "comparison_sub.json",
                      {"params": sub.to_dict(), **rep_b.to_dict()})
    code = 0 if (rep_s.passed and rep_b.passed) else EXIT_FAIL
    try:
        atomic_write_json(d / "decay_report.json",
                          solver.measure_decay(sol, calc).to_dict())
        atomic_write_json(d / "support_report.json",
                          solver.measure_support(sol, calc).to_dict())
    except HorizonError as e:
        click.echo(f"measurement skipped: {e}", err=True)
    click.echo(f"super ordering pass={rep_s.passed}, sub ordering pass={rep_b.passed}")
    return code


@main.command("transform")
@_command
def cmd_transform(config_path, out):
    """Build the density transform and check its asymptotics."""
    cfg, problem = _load_config(config_path)
    tcfg = cfg.get("transform", {})
    calc = EnvelopeCalculus(problem)
    res = transform.build_transform(
        problem,
        s_min=tcfg.get("s_min", 1e-4),
        s_max=tcfg.get("s_max", 1e8),
        per_decade=tcfg.get("per_decade", 256),
    )
    rep = transform.asymptotics_report(res, calc,
                                       s_lo=tcfg.get("s_lo", 1e3),
                                       bound_factor=tcfg.get("bound_factor", 10.0))
    d = _out_dir(out, cfg, config_path)
    atomic_write_csv(d / "transform.csv", ["s", "r_hat", "r_hat_s", "rho"],
                     [res.s, res.r_hat, res.r_hat_s, res.rho])
    atomic_write_json(d / "asymptotics.json",
                      {**res.to_dict(), "asymptotics": rep.to_dict()})
    click.echo(f"r* = {res.r_star!r} (anchor r_hat(1) echoed in CSV), "
               f"rho0 = {res.rho0!r}, bands pass={rep.passed}")
    return 0 if rep.passed else EXIT_FAIL


@main.command("report")
@_command
def cmd_report(config_path, out):
    """Aggregate the JSON artifacts in the output directory."""
    cfg, _ = _load_config(config_path, need_problem=False)
    d = _out_dir(out, cfg, config_path)
    summary = {}
    for name in ("lemma_report", "barrier_params", "residual_report",
                 "decay_report", "support_report", "comparison_super",
                 "comparison_sub", "asymptotics"):
        f = d / f"{name}.json"
        if f.exists():
            with open(f) as fh:
                summary[name] = json.load(fh)
    atomic_write_json(d / "report.json", summary)
    click.echo(f"aggregated {len(summary)} artifacts -> {d / 'report.json'}")
    return 0


if __name__ == "__main__":
    main()
