"""Pseudo-arclength continuation of the nontrivial wave branch.

The branch starts at the trivial (laminar) wave at the bifurcation value of
the squared surface speed, takes one amplitude-controlled step onto the
nontrivial branch, and then advances with secant tangents and an adaptive
arclength step. Stop rules watch for the approach to stagnation and for the
trough vortex-force criterion g - gamma(0) * u > 0 turning non-positive.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import NumericsError, SolverError
from .grid import StripGrid
from .solver import (amplitude, bifurcation_mode, discrete_laminar,
                     find_bifurcation, newton_solve, solver_hp)
from .vorticity import VorticityFunction, vorticity_from_config

TROUGH_BAND = 1e-8


@dataclass
class BranchPoint:
    index: int
    h: np.ndarray
    Q: float
    amplitude: float
    ds: float
    newton_iterations: int


@dataclass
class Branch:
    grid: StripGrid
    vf: VorticityFunction
    g: float
    lam_star: float
    points: list[BranchPoint] = field(default_factory=list)
    stop_reason: str = ""

    @property
    def amplitudes(self):
        return np.array([pt.amplitude for pt in self.points])


def _scaled_norm(dh, dQ):
    return float(np.sqrt(np.sum(dh[:, 1:] ** 2) / dh[:, 1:].size + dQ ** 2))


def _scaled_dot(ah, aQ, bh, bQ):
    return float(ah[:, 1:].ravel() @ bh[:, 1:].ravel()) / ah[:, 1:].size + aQ * bQ


def trough_criterion_value(grid, vf, g, h):
    """g - gamma(0) * u evaluated at the trough (q = L, p = 0)."""
    hp_surface = float(h[-1, -grid.ws.size:] @ grid.ws)
    u_trough = -1.0 / hp_surface
    return g - vf.gamma_surface * u_trough


def near_stagnation(grid, h, eps_stag):
    """True when max u = -1/max h_p has come within eps_stag of zero."""
    return float(np.max(solver_hp(grid, h))) >= 1.0 / eps_stag


def continue_branch(grid, vf, g, steps, *, lam_star=None, ds0=0.005,
                    ds_max=0.04, eps_stag=None, trough_margin=0.0,
                    max_retries=8):
    """Continue the branch for up to `steps` nontrivial points.

    Returns a Branch whose first point is always the trivial wave. Stop
    reasons: "max-steps", "near-stagnation" (the offending point is not a
    valid wave and is discarded), "trough-criterion" (the point is kept),
    "newton-failure" (after `max_retries` halvings of the step).
    """
    if steps < 0:
        raise NumericsError("steps must be nonnegative")
    if lam_star is None:
        lam_star = find_bifurcation(vf, g, grid.L, grid.m)
    if eps_stag is None:
        eps_stag = 0.05 * np.sqrt(lam_star)

    hcol, Q_triv, _ = discrete_laminar(grid, vf, g, lam_star)
    h_triv = np.tile(hcol, (grid.nq, 1))
    branch = Branch(grid, vf, g, float(lam_star))
    branch.points.append(BranchPoint(0, h_triv, float(Q_triv), 0.0, 0.0, 0))
    if steps == 0:
        branch.stop_reason = "max-steps"
        return branch

    trough_cut = trough_margin + TROUGH_BAND * max(1.0, g)
    phi = bifurcation_mode(grid, vf, g, lam_star)
    cosq = np.cos(np.pi * grid.q / grid.L)

    def accept(res, ds_used):
        if near_stagnation(grid, res.h, eps_stag):
            branch.stop_reason = "near-stagnation"
            return False
        a = amplitude(res.h)
        if a <= branch.points[-1].amplitude:
            raise NumericsError(
                "amplitude %.6g did not increase past %.6g along the branch"
                % (a, branch.points[-1].amplitude))
        branch.points.append(BranchPoint(len(branch.points), res.h,
                                         float(res.Q), a, ds_used,
                                         res.iterations))
        if trough_criterion_value(grid, vf, g, res.h) <= trough_cut:
            branch.stop_reason = "trough-criterion"
            return False
        return True

    # first step: amplitude-controlled departure from the trivial wave
    ds = ds0
    res = None
    for _ in range(max_retries):
        seed = h_triv + ds * cosq[:, None] * phi[None, :]
        seed[:, 0] = 0.0
        try:
            res = newton_solve(grid, vf, g, seed, Q_triv,
                               mode="fixed_amplitude", amplitude_target=ds)
            break
        except SolverError:
            res = None
            ds *= 0.5
    if res is None:
        branch.stop_reason = "newton-failure"
        return branch
    if not accept(res, ds):
        return branch
    if res.iterations <= 4:
        ds = min(ds * 1.3, ds_max)

    tangent = None
    while len(branch.points) - 1 < steps:
        prev, cur = branch.points[-2], branch.points[-1]
        t_h = cur.h - prev.h
        t_Q = cur.Q - prev.Q
        nrm = _scaled_norm(t_h, t_Q)
        if nrm == 0.0:
            raise NumericsError("degenerate secant tangent")
        t_h = t_h / nrm
        t_Q = t_Q / nrm
        if tangent is not None and _scaled_dot(t_h, t_Q, *tangent) < 0.0:
            t_h, t_Q = -t_h, -t_Q
        tangent = (t_h, t_Q)

        res = None
        for _ in range(max_retries):
            try:
                res = newton_solve(grid, vf, g, cur.h + ds * t_h,
                                   cur.Q + ds * t_Q, mode="arclength",
                                   base=(cur.h, cur.Q), tangent=tangent,
                                   ds=ds)
                break
            except SolverError:
                res = None
                ds *= 0.5
        if res is None:
            branch.stop_reason = "newton-failure"
            return branch
        if not accept(res, ds):
            return branch
        if res.iterations <= 4:
            ds = min(ds * 1.3, ds_max)

    branch.stop_reason = "max-steps"
    return branch


# -- serialization -----------------------------------------------------------

def point_filename(index):
    return "point_%04d.json" % index


def save_branch(branch, outdir):
    """Write branch.json plus one point_NNNN.json per stored wave.

    Key order is sorted and floats use repr, so identical branches produce
    identical bytes.
    """
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    grid, vf = branch.grid, branch.vf
    vort = vf.to_config()
    common = {
        "L": grid.L, "m": grid.m, "nq": grid.nq, "npts": grid.npts,
        "beta": grid.beta, "g": branch.g, "vorticity": vort,
    }
    index = []
    for pt in branch.points:
        payload = dict(common)
        payload.update({
            "index": pt.index,
            "Q": pt.Q,
            "amplitude": pt.amplitude,
            "h": [float(x) for x in pt.h.ravel()],
        })
        name = point_filename(pt.index)
        with open(outdir / name, "w") as fh:
            json.dump(payload, fh, sort_keys=True, indent=1)
        index.append({
            "index": pt.index, "file": name, "amplitude": pt.amplitude,
            "Q": pt.Q, "ds": pt.ds, "newton_iterations": pt.newton_iterations,
        })
    summary = dict(common)
    summary.update({
        "lambda_star": branch.lam_star,
        "stop_reason": branch.stop_reason,
        "points": index,
    })
    with open(outdir / "branch.json", "w") as fh:
        json.dump(summary, fh, sort_keys=True, indent=1)
    return outdir / "branch.json"


def load_point(path):
    """Rebuild (grid, vf, g, h, Q) from a point_NNNN.json file."""
    with open(path) as fh:
        data = json.load(fh)
    grid = StripGrid(data["L"], data["m"], data["nq"], data["npts"],
                     data["beta"])
    vf = vorticity_from_config(data["vorticity"], data["m"])
    h = np.array(data["h"], dtype=float).reshape(grid.nq, grid.npts)
    return grid, vf, float(data["g"]), h, float(data["Q"])
