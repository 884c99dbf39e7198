"""Command-line entry point, JSON configuration, and run persistence.

Usage:

    fracvar <command> --config <path> [--out <dir>] [--threads <k>]

Commands: verify (operator identity suite), eig (first eigenpair), solve
(cone minimization), mpass (two-solution pipeline), sweep (sublinear
regime sweep plus threshold bisection when bracketed), appendix (scaling
limit of the quasilinear form).

The configuration is strict JSON: unknown keys are fatal (a silent typo in
a hypothesis parameter would invalidate regime conclusions), ranges are
validated with the offending key named, and the persisted snapshot has all
defaults materialized. Every run directory receives a manifest listing the
config snapshot, per-stage wall-clock timings, and a sha256 inventory of
the produced files; reruns with the same config and seed reproduce the
inventory bit for bit.

Field files use the FVFD binary format: magic "FVFD", little-endian u32
dimension, little-endian u32 node count, then the nodal values as
little-endian 8-byte floats. Exit codes: 0 success, 1 solver failure
(classified in the report), 2 configuration error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import struct
import sys
import time
from pathlib import Path

import numpy as np

from . import experiments as ex
from .coeffs import COEFFICIENT_FAMILIES, REACTION_FAMILIES
from .fracops import QuadratureParams
from .grid import DomainSpec, Field, Grid
from .solvers import SolverOptions
from .spectral import eigenpair_to_csv

__all__ = ["ConfigError", "parse_config", "run_command", "write_field", "read_field", "main"]

ARTIFACT_VERSION = "0.1.0"
COMMANDS = ("verify", "eig", "solve", "mpass", "sweep", "appendix")


class ConfigError(ValueError):
    """Invalid run configuration; the message names the offending key."""


# ---------------------------------------------------------------------------
# configuration schema
# ---------------------------------------------------------------------------

_SECTIONS = {
    "domain": {"bounds", "nodes"},
    "operator": {"s", "rho0", "rho_tail", "tail_correction", "near_cells",
                 "n_theta", "nyquist_stabilization"},
    "coefficient": {"family", "params"},
    "reaction": {"family", "params"},
    "forcing": {"kind", "scale", "path"},
    "solver": {"max_iter", "tol_g", "armijo_factor", "armijo_slope",
               "ball_radius", "cone_projection", "path_points",
               "path_step_cap", "respline_every", "tol_active"},
    "sweep": {"values"},
}
_TOP_KEYS = set(_SECTIONS) | {"output_dir", "seed", "threads"}


def _reject_unknown(section: str, data: dict, allowed: set):
    for key in data:
        if key not in allowed:
            raise ConfigError(f'unknown key "{key}" in section "{section}"')


def _require(data: dict, section: str, key: str):
    if key not in data:
        raise ConfigError(f'missing required key "{section}.{key}"')
    return data[key]


def parse_config(path) -> dict:
    """Load, validate, and materialize a run configuration.

    Returns a plain dict with every default filled in; this materialized
    form is what gets persisted in the run manifest.
    """
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}")
    except json.JSONDecodeError as err:
        raise ConfigError(f"config is not valid JSON: {err}")
    if not isinstance(raw, dict):
        raise ConfigError("config root must be a JSON object")
    _reject_unknown("<root>", raw, _TOP_KEYS)

    dom = _require(raw, "<root>", "domain")
    _reject_unknown("domain", dom, _SECTIONS["domain"])
    bounds = _require(dom, "domain", "bounds")
    nodes = _require(dom, "domain", "nodes")
    try:
        spec = DomainSpec(bounds=tuple(tuple(b) for b in bounds), nodes=tuple(nodes))
    except (TypeError, ValueError) as err:
        raise ConfigError(f"domain: {err}")

    op = dict(raw.get("operator", {}))
    _reject_unknown("operator", op, _SECTIONS["operator"])
    s = float(_require(op, "operator", "s"))
    if not 0.0 < s < 1.0:
        raise ConfigError(f'"operator.s" must lie in (0, 1), got {s}')
    try:
        quad = QuadratureParams(
            rho0=float(op.get("rho0", 0.5)),
            rho_tail=op.get("rho_tail"),
            tail_correction=bool(op.get("tail_correction", True)),
            near_cells=int(op.get("near_cells", 8)),
            n_theta=int(op.get("n_theta", 2048)),
            nyquist_stabilization=float(op.get("nyquist_stabilization", 0.12)),
        )
    except ValueError as err:
        raise ConfigError(f"operator: {err}")

    coeff = dict(raw.get("coefficient", {"family": "power"}))
    _reject_unknown("coefficient", coeff, _SECTIONS["coefficient"])
    cfam = coeff.get("family", "power")
    if cfam not in COEFFICIENT_FAMILIES:
        raise ConfigError(
            f'"coefficient.family" must be one of {COEFFICIENT_FAMILIES}, got {cfam!r}'
        )
    cpar = dict(coeff.get("params",
                          {"A": 1.0, "B": 2.0, "p": 1.5} if cfam == "power" else {"c": 1.0}))

    reac = dict(raw.get("reaction", {"family": "saturating"}))
    _reject_unknown("reaction", reac, _SECTIONS["reaction"])
    rfam = reac.get("family", "saturating")
    if rfam not in REACTION_FAMILIES:
        raise ConfigError(
            f'"reaction.family" must be one of {REACTION_FAMILIES}, got {rfam!r}'
        )
    rpar = dict(reac.get("params", {"nu": 1.0} if rfam == "saturating" else {"kappa": 1.0}))

    forcing = dict(raw.get("forcing", {"kind": "zero"}))
    _reject_unknown("forcing", forcing, _SECTIONS["forcing"])
    kind = forcing.get("kind", "zero")
    if kind not in ("zero", "eigenfunction", "file"):
        raise ConfigError(f'"forcing.kind" must be zero|eigenfunction|file, got {kind!r}')
    if kind == "eigenfunction":
        forcing.setdefault("scale", 1.0)
    if kind == "file" and "path" not in forcing:
        raise ConfigError('"forcing.path" is required for forcing.kind = "file"')

    sol = dict(raw.get("solver", {}))
    _reject_unknown("solver", sol, _SECTIONS["solver"])
    try:
        solver = SolverOptions(
            max_iter=int(sol.get("max_iter", 5000)),
            tol_g=float(sol.get("tol_g", 1e-6)),
            armijo_factor=float(sol.get("armijo_factor", 0.5)),
            armijo_slope=float(sol.get("armijo_slope", 1e-4)),
            ball_radius=sol.get("ball_radius"),
            cone_projection=bool(sol.get("cone_projection", True)),
            path_points=int(sol.get("path_points", 41)),
            path_step_cap=sol.get("path_step_cap"),
            respline_every=int(sol.get("respline_every", 10)),
            tol_active=float(sol.get("tol_active", 1e-10)),
        )
    except ValueError as err:
        raise ConfigError(f"solver: {err}")

    sweep = dict(raw.get("sweep", {"values": []}))
    _reject_unknown("sweep", sweep, _SECTIONS["sweep"])
    values = [float(v) for v in sweep.get("values", [])]

    seed = int(raw.get("seed", 0))
    threads = int(raw.get("threads", 1))
    if threads < 1:
        raise ConfigError(f'"threads" must be at least 1, got {threads}')

    return {
        "domain": spec.to_dict(),
        "operator": {
            "s": s, "rho0": quad.rho0, "rho_tail": quad.rho_tail,
            "tail_correction": quad.tail_correction, "near_cells": quad.near_cells,
            "n_theta": quad.n_theta,
            "nyquist_stabilization": quad.nyquist_stabilization,
        },
        "coefficient": {"family": cfam, "params": cpar},
        "reaction": {"family": rfam, "params": rpar},
        "forcing": forcing,
        "solver": {
            "max_iter": solver.max_iter, "tol_g": solver.tol_g,
            "armijo_factor": solver.armijo_factor, "armijo_slope": solver.armijo_slope,
            "ball_radius": solver.ball_radius, "cone_projection": solver.cone_projection,
            "path_points": solver.path_points, "path_step_cap": solver.path_step_cap,
            "respline_every": solver.respline_every, "tol_active": solver.tol_active,
        },
        "sweep": {"values": values},
        "output_dir": raw.get("output_dir", "fracvar-out"),
        "seed": seed,
        "threads": threads,
    }


def regime_config_from(materialized: dict, threads: int | None = None) -> ex.RegimeConfig:
    """Build the experiments-facing config from a materialized dict."""
    op = materialized["operator"]
    return ex.RegimeConfig(
        domain=DomainSpec.from_dict(materialized["domain"]),
        s=op["s"],
        quadrature=QuadratureParams(
            rho0=op["rho0"], rho_tail=op["rho_tail"],
            tail_correction=op["tail_correction"], near_cells=op["near_cells"],
            n_theta=op["n_theta"], nyquist_stabilization=op["nyquist_stabilization"],
        ),
        coefficient=(materialized["coefficient"]["family"],
                     materialized["coefficient"]["params"]),
        reaction=(materialized["reaction"]["family"], materialized["reaction"]["params"]),
        forcing=materialized["forcing"],
        solver=SolverOptions(**materialized["solver"]),
        sweep=tuple(materialized["sweep"]["values"]),
        seed=materialized["seed"],
        threads=threads if threads is not None else materialized["threads"],
    )


# ---------------------------------------------------------------------------
# field binary format
# ---------------------------------------------------------------------------

_FVFD_MAGIC = b"FVFD"


def write_field(path, fld: Field) -> None:
    """Write the nodal values in the FVFD binary format."""
    with open(path, "wb") as fh:
        fh.write(_FVFD_MAGIC)
        fh.write(struct.pack("<I", fld.grid.dimension))
        fh.write(struct.pack("<I", fld.grid.n_nodes))
        fh.write(fld.values.astype("<f8").tobytes())


def read_field(path, grid: Grid) -> Field:
    """Read an FVFD file back onto a grid; header mismatches are fatal."""
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != _FVFD_MAGIC:
            raise ValueError(f"bad field magic {magic!r}, expected {_FVFD_MAGIC!r}")
        d = struct.unpack("<I", fh.read(4))[0]
        n = struct.unpack("<I", fh.read(4))[0]
        payload = fh.read()
    if d != grid.dimension:
        raise ValueError(f"field dimension {d} does not match grid dimension {grid.dimension}")
    if n != grid.n_nodes:
        raise ValueError(f"field has {n} nodes, grid has {grid.n_nodes}")
    if len(payload) != 8 * n:
        raise ValueError(f"field payload has {len(payload)} bytes, expected {8 * n}")
    return Field(grid, np.frombuffer(payload, dtype="<f8").copy())


# ---------------------------------------------------------------------------
# deterministic serialization helpers
# ---------------------------------------------------------------------------


def _fmt(x) -> str:
    if isinstance(x, (np.floating, np.integer, np.bool_)):
        x = x.item()
    if isinstance(x, float):
        return repr(x)
    return str(x)


def _write_csv(path, header: list[str], rows: list[list]) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _write_json(path, obj) -> None:
    with open(path, "w", newline="\n") as fh:
        json.dump(_jsonable(obj), fh, indent=2, sort_keys=True, allow_nan=True)
        fh.write("\n")


def _sha256(path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _solution_csv_rows(grid: Grid, values: np.ndarray):
    header = (["x"] if grid.dimension == 1 else ["x", "y"]) + ["u"]
    rows = [[float(c) for c in node] + [float(v)] for node, v in zip(grid.nodes, values)]
    return header, rows


def _report_payload(report) -> dict:
    data = report.to_dict()
    data["solution_min"] = float(np.min(report.solution.values))
    return data


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def _cmd_verify(cfg, rcfg, outdir, files):
    report = ex.verify_identities(rcfg)
    rows = [[c.name, c.value, c.tolerance, int(c.passed)] for c in report.checks]
    _write_csv(outdir / "identities.csv", ["check", "value", "tolerance", "passed"], rows)
    files.append("identities.csv")
    _write_json(outdir / "report.json", {
        "all_passed": report.all_passed,
        "checks": [{"name": c.name, "value": c.value, "tolerance": c.tolerance,
                    "passed": c.passed} for c in report.checks],
    })
    files.append("report.json")
    return 0 if report.all_passed else 1


def _cmd_eig(cfg, rcfg, outdir, files):
    prep = ex.prepare(rcfg)
    eigenpair_to_csv(prep.eigenpair, outdir / "eigenpair.csv")
    files.append("eigenpair.csv")
    _write_json(outdir / "report.json", {
        "lambda1": prep.eigenpair.value,
        "residual": prep.eigenpair.residual,
        "iterations": prep.eigenpair.iterations,
    })
    files.append("report.json")
    return 0


def _cmd_solve(cfg, rcfg, outdir, files):
    prep = ex.prepare(rcfg)
    h = ex.build_forcing(prep)
    reaction = ex._reaction_with(rcfg)
    report = ex._solve_once(prep, reaction, h)
    header, rows = _solution_csv_rows(prep.grid, report.solution.values)
    _write_csv(outdir / "solution.csv", header, rows)
    files.append("solution.csv")
    write_field(outdir / "solution.fvfd", report.solution)
    files.append("solution.fvfd")
    _write_json(outdir / "report.json", {
        "lambda1": prep.lambda1, "run": _report_payload(report),
    })
    files.append("report.json")
    return 0 if report.classification != "failed" else 1


def _cmd_mpass(cfg, rcfg, outdir, files):
    if rcfg.reaction[0] not in ("cubic_saturating", "linear"):
        raise ConfigError(
            f"mpass needs a linear-growth reaction family, got {rcfg.reaction[0]!r}")
    if not rcfg.sweep:
        scale = float(rcfg.forcing.get("scale", 0.0)) if rcfg.forcing["kind"] == "eigenfunction" else 0.0
        rcfg = ex.RegimeConfig(**{**_regime_kwargs(rcfg), "sweep": (scale,)})
    report = ex.run_linear_regime(rcfg)
    payload = {"lambda1": report.lambda1,
               "audit": {"verdicts": report.audit.verdicts,
                         "witnesses": _jsonable(report.audit.witnesses)},
               "runs": []}
    status = 0
    for run in report.runs:
        entry = {
            "h_scale": run.h_scale,
            "minimizer": _report_payload(run.minimizer),
            "geometry_ok": run.geometry_ok,
            "ray_t_star": run.ray.t_star,
        }
        if run.pass_report is not None:
            entry["mountain_pass"] = _report_payload(run.pass_report)
            entry["distance"] = run.distance
            entry["distinct"] = run.distinct
            if run.pass_report.classification == "failed":
                status = 1
        else:
            status = 1
        payload["runs"].append(entry)
        tag = f"{run.h_scale:g}".replace(".", "p").replace("-", "m")
        header, rows = _solution_csv_rows(run.minimizer.solution.grid,
                                          run.minimizer.solution.values)
        _write_csv(outdir / f"minimizer_{tag}.csv", header, rows)
        files.append(f"minimizer_{tag}.csv")
        if run.pass_report is not None:
            header, rows = _solution_csv_rows(run.pass_report.solution.grid,
                                              run.pass_report.solution.values)
            _write_csv(outdir / f"mountain_pass_{tag}.csv", header, rows)
            files.append(f"mountain_pass_{tag}.csv")
    _write_json(outdir / "report.json", payload)
    files.append("report.json")
    return status


def _cmd_sweep(cfg, rcfg, outdir, files):
    if rcfg.reaction[0] != "saturating":
        raise ConfigError(
            f"sweep needs the sublinear reaction family, got {rcfg.reaction[0]!r}")
    prep = ex.prepare(rcfg)
    report = ex.run_sublinear_regime(rcfg, prep)
    rows = []
    status = 0
    for run in report.runs:
        rep = run.report
        rows.append([run.nu, rep.classification, rep.energy, rep.kkt_residual,
                     rep.l2_norm, rep.hs_norm,
                     rep.ball_margin if rep.ball_margin is not None else float("nan")])
        if rep.classification == "failed":
            status = 1
    _write_csv(outdir / "sweep.csv",
               ["nu", "classification", "energy", "kkt_residual", "l2_norm",
                "hs_norm", "ball_margin"], rows)
    files.append("sweep.csv")
    payload = {
        "lambda1": report.lambda1,
        "audit": {"verdicts": report.audit.verdicts,
                  "witnesses": _jsonable(report.audit.witnesses)},
        "classifications": [r.report.classification for r in report.runs],
    }
    kinds = {r.report.classification == "trivial" for r in report.runs}
    if kinds == {True, False}:
        payload["nu_threshold"] = ex.find_nu_threshold(rcfg, prep)
    _write_json(outdir / "report.json", payload)
    files.append("report.json")
    return status


def _cmd_appendix(cfg, rcfg, outdir, files):
    report = ex.appendix_convergence(rcfg)
    rows = [[t, v, e] for t, v, e in zip(report.scales, report.values, report.rel_errors)]
    _write_csv(outdir / "appendix.csv", ["scale_t", "form_value", "rel_error"], rows)
    files.append("appendix.csv")
    _write_json(outdir / "report.json", {
        "limit": report.limit,
        "final_rel_error": report.final_rel_error,
        "nonincreasing_from_2": report.nonincreasing_from_2,
    })
    files.append("report.json")
    return 0


def _regime_kwargs(rcfg: ex.RegimeConfig) -> dict:
    return {
        "domain": rcfg.domain, "s": rcfg.s, "quadrature": rcfg.quadrature,
        "coefficient": rcfg.coefficient, "reaction": rcfg.reaction,
        "forcing": rcfg.forcing, "solver": rcfg.solver, "sweep": rcfg.sweep,
        "seed": rcfg.seed, "threads": rcfg.threads,
    }


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    return obj


_DISPATCH = {
    "verify": _cmd_verify,
    "eig": _cmd_eig,
    "solve": _cmd_solve,
    "mpass": _cmd_mpass,
    "sweep": _cmd_sweep,
    "appendix": _cmd_appendix,
}


def run_command(materialized: dict, command: str, out_dir=None,
                threads: int | None = None) -> int:
    """Execute one command; writes outputs plus the manifest, returns the
    exit status (0 ok, 1 solver failure recorded in the report)."""
    if command not in _DISPATCH:
        raise ConfigError(f"unknown command {command!r}; choose from {COMMANDS}")
    outdir = Path(out_dir if out_dir is not None else materialized["output_dir"])
    outdir.mkdir(parents=True, exist_ok=True)
    rcfg = regime_config_from(materialized, threads=threads)

    files: list[str] = []
    timings: dict = {}
    t0 = time.perf_counter()
    status = _DISPATCH[command](materialized, rcfg, outdir, files)
    timings["command_seconds"] = time.perf_counter() - t0

    manifest = {
        "artifact_version": ARTIFACT_VERSION,
        "command": command,
        "config": materialized,
        "timings": timings,
        "files": {name: _sha256(outdir / name) for name in sorted(files)},
    }
    _write_json(outdir / "manifest.json", manifest)
    return status


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="fracvar",
        description="variational solver for the quasilinear nonlocal boundary value problem",
    )
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", required=True, help="path to the JSON run configuration")
    parser.add_argument("--out", default=None, help="output directory (default from config)")
    parser.add_argument("--threads", type=int, default=None,
                        help="sweep concurrency (default FRACVAR_THREADS or config)")
    args = parser.parse_args(argv)

    threads = args.threads
    if threads is None:
        env = os.environ.get("FRACVAR_THREADS")
        threads = int(env) if env else None

    try:
        materialized = parse_config(args.config)
    except ConfigError as err:
        print(f"fracvar: config error: {err}", file=sys.stderr)
        return 2
    try:
        status = run_command(materialized, args.command, out_dir=args.out, threads=threads)
    except ConfigError as err:
        print(f"fracvar: config error: {err}", file=sys.stderr)
        return 2
    out = Path(args.out if args.out is not None else materialized["output_dir"])
    print(f"fracvar {args.command}: exit {status}, outputs in {out}")
    return status


if __name__ == "__main__":
    sys.exit(main())
