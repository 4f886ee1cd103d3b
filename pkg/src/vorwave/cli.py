"""Command line front end.

Every subcommand writes its artifacts under one output directory and
finishes by dropping a ``manifest.json`` recording the configuration,
tool version, timestamps, and input hashes. Timestamps live only in the
manifest: the numeric artifacts (reports, tables, branch files, CSVs)
are byte-identical across reruns with the same inputs.

Exit codes: 0 all good (and every requested audit passed), 1 an audit
reported a failed diagnostic, 2 configuration or input trouble, 3 the
numerics gave up.
"""

from __future__ import annotations

import argparse
import datetime
import hashlib
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import __version__
from .audit import Tolerances, audit_wave
from .config import RunConfig
from .continuation import continue_branch, load_point, point_filename, \
    save_branch
from .errors import ConfigError, InputError, SolverError
from .fields import WaveField, reconstruct
from .gerstner import TrochoidalWave
from .laminar import critical_lambda, gamma_small_criterion, \
    gamma_smallest_criterion, laminar_depth, laminar_head
from .solver import find_bifurcation


def _write_json(path, payload):
    with open(path, "w") as fh:
        json.dump(payload, fh, sort_keys=True, indent=1)
        fh.write("\n")


def _sha256(path):
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _utcnow():
    return datetime.datetime.now(datetime.timezone.utc).isoformat()


def _thread_count():
    raw = os.environ.get("VORWAVE_THREADS")
    if raw is None:
        return min(4, os.cpu_count() or 1)
    try:
        count = int(raw)
    except ValueError:
        count = 0
    if count < 1:
        raise ConfigError(
            "VORWAVE_THREADS must be a positive integer, got %r" % raw)
    return count


class Manifest:
    """Provenance sidecar for one run; the only file carrying wall time."""

    def __init__(self, command, config_payload):
        self.payload = {
            "command": command,
            "version": __version__,
            "started": _utcnow(),
            "config": config_payload,
            "inputs": {},
        }

    def add_input(self, path):
        self.payload["inputs"][str(path)] = _sha256(path)

    def write(self, outdir):
        self.payload["finished"] = _utcnow()
        _write_json(Path(outdir) / "manifest.json", self.payload)


def _resolve_outdir(cfg, out_flag):
    out = out_flag or (cfg.outdir if cfg else None)
    if out is None:
        raise ConfigError("no output directory: pass --out or set "
                          "config.outdir")
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _field_filename(index):
    return point_filename(index).replace(".json", ".csv")


def _report_filename(index):
    return "report_%04d.json" % index


# -- subcommand bodies -------------------------------------------------------


def _run_dispersion(cfg, outdir):
    vf = cfg.build_vorticity()
    lam_c = critical_lambda(vf, cfg.g)
    lams = np.linspace(lam_c / 20.0, lam_c, 21)
    table = [{"lambda": float(lam),
              "Q": float(laminar_head(vf, float(lam), cfg.g))}
             for lam in lams]
    payload = {
        "lambda_c": lam_c,
        "Qtilde_table": table,
        "criteria": {
            "gammasmall": asdict(gamma_small_criterion(vf, cfg.g, cfg.L)),
            "gammasmallest": asdict(
                gamma_smallest_criterion(vf, cfg.g, cfg.L)),
        },
    }
    _write_json(outdir / "dispersion.json", payload)
    return 0


def _run_bifurcate(cfg, outdir):
    vf = cfg.build_vorticity()
    lam_star = float(find_bifurcation(vf, cfg.g, cfg.L, cfg.m,
                                      beta=cfg.grid.stretching))
    payload = {
        "lambda_star": lam_star,
        "lambda_c": critical_lambda(vf, cfg.g),
        "Q_star": float(laminar_head(vf, lam_star, cfg.g)),
        "depth": float(laminar_depth(vf, lam_star)),
    }
    _write_json(outdir / "bifurcation.json", payload)
    return 0


def _make_branch(cfg):
    grid = cfg.build_grid()
    vf = cfg.build_vorticity()
    cont = cfg.continuation
    return continue_branch(grid, vf, cfg.g, cont.steps, ds0=cont.ds0,
                           ds_max=cont.ds_max, eps_stag=cont.eps_stag,
                           trough_margin=cont.trough_margin)


def _run_continue(cfg, outdir):
    branch = _make_branch(cfg)
    save_branch(branch, outdir / "branch")
    return 0


def _branch_point_files(outdir, point):
    """(index, path) pairs for stored branch points, oldest first."""
    branch_json = outdir / "branch" / "branch.json"
    if not branch_json.exists():
        raise ConfigError("no branch under %s; run `continue` (or "
                          "`pipeline`) first" % outdir)
    with open(branch_json) as fh:
        index = json.load(fh)["points"]
    if point is not None:
        matches = [row for row in index if row["index"] == point]
        if not matches:
            raise ConfigError("branch has no point %d (it holds %d points)"
                              % (point, len(index)))
        index = matches
    return [(row["index"], outdir / "branch" / row["file"])
            for row in index]


def _run_reconstruct(cfg, outdir, point):
    fields_dir = outdir / "fields"
    fields_dir.mkdir(exist_ok=True)
    for idx, path in _branch_point_files(outdir, point):
        grid, vf, g, h, Q = load_point(path)
        wf = reconstruct(grid, vf, g, h, Q)
        wf.to_csv(fields_dir / _field_filename(idx))
    return 0


def _audit_one(wf, tol, reports_dir, index):
    report = audit_wave(wf, tol=tol)
    _write_json(reports_dir / _report_filename(index), report.as_json())
    return report.passed()


def _run_audit(cfg, outdir, field_csv, point, manifest):
    tol = cfg.build_tolerances()
    if field_csv is not None:
        if not Path(field_csv).is_file():
            raise ConfigError("field CSV %s does not exist" % field_csv)
        manifest.add_input(field_csv)
        wf = WaveField.from_csv(field_csv, vf=cfg.build_vorticity())
        report = audit_wave(wf, tol=tol)
        _write_json(outdir / "report.json", report.as_json())
        return 0 if report.passed() else 1
    reports_dir = outdir / "reports"
    reports_dir.mkdir(exist_ok=True)
    all_pass = True
    for idx, path in _branch_point_files(outdir, point):
        grid, vf, g, h, Q = load_point(path)
        wf = reconstruct(grid, vf, g, h, Q)
        all_pass = _audit_one(wf, tol, reports_dir, idx) and all_pass
    return 0 if all_pass else 1


def _run_gerstner(args, outdir):
    g = args.cfg.g if args.cfg is not None else 9.81
    wave = TrochoidalWave(args.k, args.eps, g=g)
    wave.to_csv(outdir / "gerstner.csv")
    _write_json(outdir / "gerstner_report.json", wave.mini_report())
    return 0


def _run_pipeline(cfg, outdir):
    _run_bifurcate(cfg, outdir)
    branch = _make_branch(cfg)
    save_branch(branch, outdir / "branch")
    (outdir / "fields").mkdir(exist_ok=True)
    reports_dir = outdir / "reports"
    reports_dir.mkdir(exist_ok=True)
    tol = cfg.build_tolerances()

    def work(pt):
        wf = reconstruct(branch.grid, branch.vf, branch.g, pt.h, pt.Q)
        wf.to_csv(outdir / "fields" / _field_filename(pt.index))
        return _audit_one(wf, tol, reports_dir, pt.index)

    with ThreadPoolExecutor(max_workers=_thread_count()) as pool:
        outcomes = list(pool.map(work, branch.points))
    summary = {
        "points": len(branch.points),
        "stop_reason": branch.stop_reason,
        "lambda_star": branch.lam_star,
        "audits_passed": int(sum(outcomes)),
        "all_pass": bool(all(outcomes)),
    }
    _write_json(outdir / "pipeline.json", summary)
    return 0 if all(outcomes) else 1


# -- argument plumbing -------------------------------------------------------


def build_parser():
    parser = argparse.ArgumentParser(
        prog="vorwave",
        description="steady rotational water waves: solve, continue, audit")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, help_text, *, config_required=True, with_point=False):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=config_required,
                       help="path to the run configuration JSON")
        p.add_argument("--out", help="output directory (overrides "
                                     "config.outdir)")
        if with_point:
            p.add_argument("--point", type=int, default=None,
                           help="restrict to one branch point index")
        return p

    add("dispersion", "laminar dispersion table and shear criteria")
    add("bifurcate", "locate the laminar bifurcation point")
    add("continue", "trace a branch of nontrivial waves")
    add("reconstruct", "rebuild field CSVs from stored branch points",
        with_point=True)
    audit_p = add("audit", "run every diagnostic on stored or given fields",
                  with_point=True)
    audit_p.add_argument("field", nargs="?", default=None,
                         help="audit this field CSV instead of the branch")
    gerstner_p = add("gerstner", "sample the closed-form trochoidal wave",
                     config_required=False)
    gerstner_p.add_argument("--k", type=float, default=1.0,
                            help="wavenumber (default 1.0)")
    gerstner_p.add_argument("--eps", type=float, default=0.5,
                            help="steepness in (0,1) (default 0.5)")
    add("pipeline", "bifurcate, continue, then reconstruct and audit "
                    "every point")
    return parser


def run(args):
    cfg = None
    if args.config is not None:
        cfg = RunConfig.from_file(args.config)
    args.cfg = cfg
    outdir = _resolve_outdir(cfg, args.out)

    config_payload = cfg.raw if cfg is not None else {
        "k": args.k, "eps": args.eps}
    manifest = Manifest(args.command, config_payload)
    if args.config is not None:
        manifest.add_input(args.config)

    try:
        if args.command == "dispersion":
            status = _run_dispersion(cfg, outdir)
        elif args.command == "bifurcate":
            status = _run_bifurcate(cfg, outdir)
        elif args.command == "continue":
            status = _run_continue(cfg, outdir)
        elif args.command == "reconstruct":
            status = _run_reconstruct(cfg, outdir, args.point)
        elif args.command == "audit":
            status = _run_audit(cfg, outdir, args.field, args.point,
                                manifest)
        elif args.command == "gerstner":
            status = _run_gerstner(args, outdir)
        else:
            status = _run_pipeline(cfg, outdir)
    finally:
        # A failed solve still leaves a provenance record next to
        # whatever artifacts were written before it died.
        manifest.write(outdir)
    return status


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return run(args)
    except ConfigError as exc:
        print("vorwave: config error: %s" % exc, file=sys.stderr)
        return 2
    except InputError as exc:
        print("vorwave: input error: %s" % exc, file=sys.stderr)
        return 2
    except SolverError as exc:
        print("vorwave: solver error: %s" % exc, file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
