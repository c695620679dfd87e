"""Batch front end: config-driven classification, decomposition,
gradientization, simulation, and stationary-density pipelines with
deterministic JSON reports."""
from __future__ import annotations

import argparse
import copy
import json
import os
import sys
import tempfile
import time
from pathlib import Path

import numpy as np

from . import __version__
from .dynamics import (euler_maruyama_ensemble, graham_estimate,
                       integrate_rk4, lyapunov_check, orthogonality_residual,
                       stationary_density, write_trajectory_csv)
from .fields import FieldEvalError, eval_field, jacobian
from .gradientize import (GeneralSolveConfig, GradientizeError, MatrixFamily,
                          solve_consistency_constant, solve_general,
                          solve_symmetrizer, transform_field)
from .homotopy import OneForm, QuadratureRule, decompose, potential
from .integrability import Verdict, circle_loop, classify
from .sampling import sample_ball
from .zoo import REGISTRY, SystemSpec, analytic_potential, build_system

SCHEMA = "gradiform/1"

DEFAULT_CONFIG = {
    "system": {"name": "lorenz", "params": {}},
    "samples": {"count": 64, "radius": 1.5, "seed": 12345},
    "quadrature_order": 64,
    "tolerances": {"closedness": 1e-8, "solver": 1e-8, "consistency": 1e-6},
    "solver": {"family_degree": 1, "max_iter": 200, "collocation": 32,
               "run_general": False},
    "simulation": {"dt": 1e-3, "steps": 2000, "eps": [0.05], "ensemble": 8,
                   "master_seed": 2024, "burn_in_fraction": 0.2,
                   "x0_radius": 0.5, "grid_bins": 40,
                   "grid_range": [-2.0, 2.0]},
    "potential_source": "homotopy",
}


class ConfigError(ValueError):
    pass


def _merge(defaults, overrides, path=""):
    out = copy.deepcopy(defaults)
    for key, val in overrides.items():
        where = f"{path}.{key}" if path else key
        if key not in defaults:
            raise ConfigError(f"unknown config key {where!r}")
        if isinstance(defaults[key], dict) and key != "system":
            if not isinstance(val, dict):
                raise ConfigError(f"{where} must be an object")
            out[key] = _merge(defaults[key], val, where)
        else:
            out[key] = copy.deepcopy(val)
    return out


def load_config(path=None, overrides=()):
    """Resolve the run config: file, then --set overrides, then env seed."""
    cfg = copy.deepcopy(DEFAULT_CONFIG)
    if path is not None:
        try:
            with open(path) as fh:
                user = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}")
        if not isinstance(user, dict):
            raise ConfigError("config root must be a JSON object")
        cfg = _merge(cfg, user)
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"--set needs key=value, got {item!r}")
        key, _, raw = item.partition("=")
        try:
            val = json.loads(raw)
        except json.JSONDecodeError:
            val = raw
        node = cfg
        parts = key.split(".")
        for part in parts[:-1]:
            if part not in node or not isinstance(node[part], dict):
                raise ConfigError(f"unknown config key {key!r}")
            node = node[part]
        leaf = parts[-1]
        if leaf not in node and not (parts[0] == "system"
                                     and parts[1:2] == ["params"]):
            raise ConfigError(f"unknown config key {key!r}")
        node[leaf] = val
    env_seed = os.environ.get("GRADIFORM_SEED")
    if env_seed is not None:
        try:
            cfg["simulation"]["master_seed"] = int(env_seed)
        except ValueError:
            raise ConfigError(f"GRADIFORM_SEED must be an integer, "
                              f"got {env_seed!r}")
    _validate(cfg)
    return cfg


def _validate(cfg):
    if cfg["system"]["name"] not in REGISTRY:
        raise ConfigError(f"unknown system {cfg['system']['name']!r}; "
                          f"known: {sorted(REGISTRY)}")
    if cfg["samples"]["count"] < 1:
        raise ConfigError("samples.count must be at least 1")
    if cfg["quadrature_order"] < 1:
        raise ConfigError("quadrature_order must be at least 1")
    sim = cfg["simulation"]
    if not sim["dt"] > 0:
        raise ConfigError("simulation.dt must be positive")
    if not isinstance(sim["eps"], list) or not sim["eps"]:
        raise ConfigError("simulation.eps must be a nonempty list")
    if cfg["potential_source"] not in ("homotopy", "gradientize"):
        raise ConfigError("potential_source must be 'homotopy' or "
                          "'gradientize'")


def _system(cfg):
    spec = SystemSpec(name=cfg["system"]["name"],
                      params=dict(cfg["system"]["params"]),
                      dim=0)
    try:
        return build_system(spec), spec
    except (ValueError, TypeError) as exc:
        raise ConfigError(str(exc))


def _samples(cfg, dim):
    s = cfg["samples"]
    return sample_ball(dim, s["count"], s["radius"], s["seed"])


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        f = float(obj)
        return f if np.isfinite(f) else None  # masked/failed entries
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


def cmd_classify(cfg):
    field, _ = _system(cfg)
    samples = _samples(cfg, field.dim)
    loops = []
    if field.dim >= 2:
        loops.append(circle_loop(radius=min(1.0, cfg["samples"]["radius"]),
                                 dim=field.dim))
    quad = QuadratureRule.gauss_legendre(cfg["quadrature_order"])
    report = classify(field, samples, tol=cfg["tolerances"]["closedness"],
                      loops=loops, quad=quad)
    return {
        "verdict": report.verdict.value,
        "max_asymmetry": report.max_asymmetry,
        "frobenius_defect_max": report.frobenius_defect_max,
        "loop_integrals": [{"loop": name, "value": val}
                           for name, val in report.loop_integrals],
    }


def cmd_decompose(cfg):
    field, _ = _system(cfg)
    samples = _samples(cfg, field.dim)
    quad = QuadratureRule.gauss_legendre(cfg["quadrature_order"])
    form = OneForm(field)
    rows = []
    max_res = 0.0
    max_radial = 0.0
    for x in samples:
        d = decompose(form, x, quad)
        max_res = max(max_res, d.reconstruction_residual)
        max_radial = max(max_radial,
                         abs(float(np.dot(d.antiexact_part, d.point))))
        rows.append({
            "point": d.point,
            "potential": d.potential,
            "exact_part": d.exact_part,
            "antiexact_part": d.antiexact_part,
            "reconstruction_residual": d.reconstruction_residual,
        })
    return {
        "n_samples": len(rows),
        "max_reconstruction_residual": max_res,
        "max_radial_annihilation_violation": max_radial,
        "max_exact_norm": max(float(np.max(np.abs(r["exact_part"])))
                              for r in rows),
        "max_antiexact_norm": max(float(np.max(np.abs(r["antiexact_part"])))
                                  for r in rows),
        "decompositions": rows,
    }


def _constant_report(rep):
    return {
        "verdict": rep.verdict.value,
        "nullspace_dim": len(rep.nullspace_basis),
        "nullspace_basis": [B for B in rep.nullspace_basis],
        "chosen_D": rep.chosen_D,
        "necessary_residual": rep.necessary_residual,
        "transformed_asymmetry": rep.transformed_asymmetry,
        "consistency_residual": rep.consistency_residual,
        "det_precondition_gap": rep.det_precondition_gap,
        "identity_solves_necessary": rep.identity_solves_necessary,
    }


def cmd_gradientize(cfg):
    field, _ = _system(cfg)
    tol = cfg["tolerances"]["solver"]
    origin = np.zeros(field.dim)
    J0 = jacobian(field, origin)
    samples = sample_ball(field.dim, cfg["solver"]["collocation"],
                          cfg["samples"]["radius"], cfg["samples"]["seed"])
    jac_spread = max(float(np.max(np.abs(jacobian(field, x) - J0)))
                     for x in samples)
    consistency_rep = solve_consistency_constant(J0, tol=tol)
    symmetrizer_rep = solve_symmetrizer(J0, tol=tol)
    out = {
        "jacobian_at_origin": J0,
        "jacobian_is_constant": jac_spread <= 1e-10 * (1 + np.max(np.abs(J0))),
        "consistency_equation": _constant_report(consistency_rep),
        "symmetrizer": _constant_report(symmetrizer_rep),
    }
    if cfg["solver"]["run_general"]:
        family = MatrixFamily(dim=field.dim,
                              degree=cfg["solver"]["family_degree"])
        gcfg = GeneralSolveConfig(samples=samples,
                                  max_iter=cfg["solver"]["max_iter"])
        grep = solve_general(field, family, gcfg)
        out["general"] = {
            "residual_norm": grep.residual_norm,
            "consistency_residual": grep.consistency_residual,
            "iterations": grep.iterations,
            "converged": grep.converged,
            "theta_final": grep.theta_final,
        }
    return out


def cmd_simulate(cfg, traj_dir=None):
    field, _ = _system(cfg)
    sim = cfg["simulation"]
    quad = QuadratureRule.gauss_legendre(cfg["quadrature_order"])
    source = cfg["potential_source"]
    if source == "gradientize":
        rep = solve_symmetrizer(jacobian(field, np.zeros(field.dim)),
                                tol=cfg["tolerances"]["solver"])
        if rep.chosen_D is None:
            raise ConfigError(
                "potential_source=gradientize but no gradientizing matrix "
                f"was found (verdict {rep.verdict.value})")
        flow = transform_field(field, rep.chosen_D)
    else:
        flow = field
    form = OneForm(flow)

    def candidate(x):  # descends along xdot = g when the form is closed
        return -potential(form, x, quad)

    x0s = sample_ball(field.dim, sim["ensemble"], sim["x0_radius"],
                      sim["master_seed"])
    rows = []
    n_monotone = 0
    for idx, x0 in enumerate(x0s):
        traj = integrate_rk4(flow, x0, sim["dt"], sim["steps"])
        rep_l = lyapunov_check(candidate, traj)
        ortho = orthogonality_residual(flow, candidate, np.eye(field.dim),
                                       traj.states[-1])
        n_monotone += rep_l.monotone
        rows.append({
            "x0": x0,
            "completed": traj.completed,
            "max_increase": rep_l.max_increase,
            "monotone": rep_l.monotone,
            "orthogonality_residual_at_end": ortho,
        })
        if traj_dir is not None:
            Path(traj_dir).mkdir(parents=True, exist_ok=True)
            write_trajectory_csv(traj,
                                 Path(traj_dir) / f"trajectory_{idx:03d}.csv")
    return {
        "potential_source": source,
        "n_trajectories": len(rows),
        "n_monotone": n_monotone,
        "trajectories": rows,
    }


def cmd_graham(cfg):
    field, spec = _system(cfg)
    sim = cfg["simulation"]
    lo, hi = sim["grid_range"]
    ranges = [(lo, hi)] * field.dim
    bins = sim["grid_bins"]
    analytic = analytic_potential(spec)
    blocks = []
    for eps in sim["eps"]:
        x0s = sample_ball(field.dim, sim["ensemble"], sim["x0_radius"],
                          sim["master_seed"])
        ens = euler_maruyama_ensemble(field, eps, x0s, sim["dt"],
                                      sim["steps"],
                                      master_seed=sim["master_seed"])
        burn = int(sim["burn_in_fraction"] * (sim["steps"] + 1))
        density = stationary_density(ens, bins=bins, ranges=ranges,
                                     burn_in=burn)
        estimate = graham_estimate(density, eps)
        block = {
            "eps": eps,
            "total_samples": density.total,
            "n_clipped": density.n_clipped,
            "occupied_cells": int(np.sum(density.counts > 0)),
            "estimate": estimate,
            "grid_edges": density.edges,
        }
        if analytic is not None and field.dim == 1:
            centers = density.centers(0)
            ref = np.array([analytic(np.array([c])) for c in centers])
            ref = ref - np.min(ref[np.isfinite(estimate)]) \
                if np.any(np.isfinite(estimate)) else ref
            diff = np.abs(estimate - (ref - np.nanmin(
                ref[np.isfinite(estimate)])))
            block["sup_error_vs_analytic"] = float(np.nanmax(diff)) \
                if np.any(np.isfinite(diff)) else None
        blocks.append(block)
    return {"estimates": blocks}


def cmd_zoo_list(cfg):
    return {"systems": [
        {"name": name, "defaults": entry["defaults"],
         "dim": entry["dim"],
         "has_analytic_potential": entry["potential"] is not None}
        for name, entry in sorted(REGISTRY.items())]}


COMMANDS = {
    "classify": cmd_classify,
    "decompose": cmd_decompose,
    "gradientize": cmd_gradientize,
    "simulate": cmd_simulate,
    "graham": cmd_graham,
    "zoo-list": cmd_zoo_list,
}


def _write_report(report, out_path):
    text = json.dumps(_jsonable(report), indent=2, sort_keys=True) + "\n"
    if out_path is None:
        sys.stdout.write(text)
        return
    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=out_path.parent,
                               prefix=out_path.name + ".")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, out_path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def build_parser():
    parser = argparse.ArgumentParser(
        prog="gradiform",
        description="Potential decomposition and gradientization toolkit")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", default=None,
                       help="JSON config file (defaults used when omitted)")
        p.add_argument("--set", action="append", default=[], metavar="K=V",
                       help="override a config key after file parse")
        p.add_argument("--out", default=None,
                       help="write the JSON report here instead of stdout")
        if name == "simulate":
            p.add_argument("--traj-dir", default=None,
                           help="export one CSV per trajectory")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config, args.set)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    t0 = time.perf_counter()
    try:
        if args.command == "simulate":
            payload = cmd_simulate(cfg, traj_dir=args.traj_dir)
        else:
            payload = COMMANDS[args.command](cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (FieldEvalError, GradientizeError, np.linalg.LinAlgError,
            ValueError) as exc:
        print(f"numerical abort: {exc}", file=sys.stderr)
        return 3
    report = {
        "schema": SCHEMA,
        "tool_version": __version__,
        "command": args.command,
        "config": cfg,
        "result": payload,
        "timings": {"wall_clock_s": time.perf_counter() - t0},
    }
    _write_report(report, args.out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
