"""Laminar (trivial) flows and the closed-form criteria built on them.

A laminar flow is x-independent with a flat surface. Bernoulli's law with
v = 0 gives the profile u0(s) = -sqrt(lambda + 2*Gamma(s)) in terms of
s = -psi, where lambda = u0(0)^2 is the squared surface speed. Its depth and
total head are

    d(lambda) = int_{-m}^0 ds / sqrt(lambda + 2 Gamma(s)),
    head(lambda) = lambda/2 + g * d(lambda),

the head being strictly convex on lambda > -2 min Gamma with a unique
minimizer lambda_c. The surface-vorticity smallness criteria and the Froude
criteria below are pure arithmetic on these quantities.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad, simpson
from scipy.optimize import brentq

from .errors import InputError, NumericsError
from .fd import fd_weights

_QUAD_OPTS = dict(epsabs=1e-12, epsrel=1e-12, limit=500)


def _admissible_floor(vf):
    return -2.0 * vf.Gamma_min()


def _require_admissible(vf, lam):
    floor = _admissible_floor(vf)
    if not lam > floor + 1e-12:
        raise InputError(
            "lambda=%g at or below the singular threshold %g" % (lam, floor))
    return floor


def _quad_checked(fn, a, b, what):
    val, err = quad(fn, a, b, **_QUAD_OPTS)
    if err > 1e-9 * max(1.0, abs(val)):
        raise NumericsError("quadrature for %s did not converge "
                            "(estimate %g, error %g)" % (what, val, err))
    return val


def laminar_depth(vf, lam):
    """d(lambda) = int_{-m}^0 ds/sqrt(lambda + 2 Gamma(s))."""
    _require_admissible(vf, lam)
    return _quad_checked(
        lambda s: (lam + 2.0 * vf.Gamma(s)) ** -0.5, -vf.m, 0.0, "depth")


def laminar_head(vf, lam, g):
    """Total head of the laminar flow with squared surface speed lambda."""
    return 0.5 * lam + g * laminar_depth(vf, lam)


def head_slope(vf, lam, g):
    """d(head)/d(lambda) = 1/2 - (g/2) int (lambda+2Gamma)^(-3/2)."""
    _require_admissible(vf, lam)
    integral = _quad_checked(
        lambda s: (lam + 2.0 * vf.Gamma(s)) ** -1.5, -vf.m, 0.0, "head slope")
    return 0.5 - 0.5 * g * integral


def head_curvature(vf, lam, g):
    """d2(head)/d(lambda)2 = (3g/4) int (lambda+2Gamma)^(-5/2) > 0."""
    _require_admissible(vf, lam)
    integral = _quad_checked(
        lambda s: (lam + 2.0 * vf.Gamma(s)) ** -2.5, -vf.m, 0.0,
        "head curvature")
    return 0.75 * g * integral


def critical_lambda(vf, g):
    """The unique minimizer lambda_c of the laminar head.

    The slope is increasing (the head is strictly convex), tends to -inf at
    the singular edge of the admissible range and to 1/2 at large lambda, so
    a sign-change bracket always exists; it is found by stepping off the edge
    and doubling, then resolved by Brent's method.
    """
    floor = _admissible_floor(vf)
    scale = max((g * vf.m) ** (2.0 / 3.0), abs(floor), 1e-9)
    left = None
    delta = 1e-4 * scale
    for _ in range(60):
        lam = floor + delta
        try:
            if head_slope(vf, lam, g) < 0.0:
                left = lam
                break
        except NumericsError:
            pass
        delta *= 0.25
    if left is None:
        raise NumericsError("no negative head slope near the admissible edge")
    right = None
    span = scale
    for _ in range(60):
        lam = left + span
        if head_slope(vf, lam, g) > 0.0:
            right = lam
            break
        span *= 2.0
    if right is None:
        raise NumericsError(
            "failed to bracket the head minimum within 60 doublings")
    return brentq(lambda lam: head_slope(vf, lam, g), left, right,
                  xtol=1e-15 * scale, rtol=4.0 * np.finfo(float).eps)


@dataclass(frozen=True)
class LaminarFlow:
    """A trivial flow: vorticity function, squared surface speed, depth, head."""

    vf: object
    lam: float
    g: float
    d: float
    Q: float

    def u0(self, s):
        """Velocity profile as a function of s = -psi in [-m, 0]."""
        return -np.sqrt(self.lam + 2.0 * np.asarray(self.vf.Gamma(s)))

    def height(self, p):
        """Height above the bed as a function of p in [-m, 0].

        h(p) = int_{-m}^p ds/sqrt(lambda + 2 Gamma(s)); h(0) = d. Computed by
        per-interval quadrature on the requested nodes.
        """
        p = np.atleast_1d(np.asarray(p, dtype=float))
        order = np.argsort(p)
        vals = np.empty_like(p)
        prev_p, prev_h = -self.vf.m, 0.0
        integrand = lambda s: (self.lam + 2.0 * self.vf.Gamma(s)) ** -0.5
        for idx in order:
            vals[idx] = prev_h + _quad_checked(
                integrand, prev_p, p[idx], "height")
            prev_p, prev_h = p[idx], vals[idx]
        return vals


def laminar_flow(vf, lam, g):
    """Construct the laminar flow at the given squared surface speed."""
    d = laminar_depth(vf, lam)
    return LaminarFlow(vf, float(lam), float(g), d, 0.5 * lam + g * d)


# -- surface-vorticity smallness criteria ----------------------------------

_BOUNDARY_BAND = 1e-12


@dataclass(frozen=True)
class CriterionResult:
    name: str
    lhs: float
    rhs: float
    status: str          # pass | fail | boundary
    margin: float        # rhs - lhs (positive is passing)
    note: str = ""

    @property
    def passed(self):
        return self.status == "pass"


def _strict_less(name, lhs, rhs, note=""):
    margin = rhs - lhs
    band = _BOUNDARY_BAND * max(1.0, abs(lhs), abs(rhs))
    if abs(margin) <= band:
        status = "boundary"
    elif margin > 0:
        status = "pass"
    else:
        status = "fail"
    return CriterionResult(name, lhs, rhs, status, margin, note)


def gamma_small_criterion(vf, g, L, lam_c=None):
    """Surface-vorticity smallness: gamma(0)^2 < g^2/(2gL + lambda_c)."""
    if lam_c is None:
        lam_c = critical_lambda(vf, g)
    lhs = vf.gamma_surface ** 2
    rhs = g * g / (2.0 * g * L + lam_c)
    return _strict_less("gammasmall", lhs, rhs)


def gamma_smallest_criterion(vf, g, L, lam_c=None):
    """Refined smallness test using only g, L, m, and gamma(0).

    Evaluates 1/sqrt(1 - 2L*gamma0^2/g) - 1/sqrt(1 - 2L*gamma0^2/g
    - 2*gamma0^3*m/g^2) < 1. Fails with a reason when a radicand is
    nonpositive. For constant vorticity this is equivalent to the
    gamma_small criterion; the cross-check is reported in the note.
    """
    gamma0 = vf.gamma_surface
    r1 = 1.0 - 2.0 * L * gamma0 ** 2 / g
    r2 = r1 - 2.0 * gamma0 ** 3 * vf.m / g ** 2
    if r1 <= 0.0 or r2 <= 0.0:
        result = CriterionResult("gammasmallest", math.inf, 1.0, "fail",
                                 -math.inf, "radicand nonpositive")
    else:
        lhs = 1.0 / math.sqrt(r1) - 1.0 / math.sqrt(r2)
        result = _strict_less("gammasmallest", lhs, 1.0)
    if vf.kind == "constant":
        small = gamma_small_criterion(vf, g, L, lam_c=lam_c)
        agree = (small.status == result.status
                 or "boundary" in (small.status, result.status))
        note = (result.note + "; " if result.note else "") + \
            "constant-vorticity cross-check with gammasmall: %s" % (
                "agrees" if agree else "DISAGREES")
        result = CriterionResult(result.name, result.lhs, result.rhs,
                                 result.status, result.margin, note)
    return result


# -- Froude criteria for solitary upstream profiles ------------------------

@dataclass(frozen=True)
class FroudeInputs:
    """A normalized upstream shear profile and a Froude number.

    y runs over [-d, 0], u holds samples of the profile (negative), and the
    normalization g * int dy/u^2 = 1 must hold within 1e-6.
    """

    y: np.ndarray
    u: np.ndarray
    F: float
    g: float

    def __post_init__(self):
        y = np.asarray(self.y, dtype=float)
        u = np.asarray(self.u, dtype=float)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "u", u)
        if y.ndim != 1 or y.size < 5 or y.shape != u.shape:
            raise InputError("profile needs >= 5 matching samples")
        if abs(y[-1]) > 1e-12 or y[0] >= 0:
            raise InputError("y must run over [-d, 0] ending at 0")
        if np.any(np.diff(y) <= 0):
            raise InputError("y must be increasing")
        if np.any(u >= 0):
            raise InputError("upstream profile must be negative")
        norm = self.g * simpson(1.0 / u ** 2, x=y)
        if abs(norm - 1.0) > 1e-6:
            raise InputError(
                "profile not normalized: g*int dy/u^2 = %.8f" % norm)

    @property
    def d(self):
        return -float(self.y[0])


@dataclass(frozen=True)
class FroudeReport:
    shear_product: float    # |u_y * u| at the surface
    F_bound: float          # F must stay below this for the slope criterion
    small: CriterionResult       # F^2 < g / shear_product
    all_amplitude: CriterionResult   # shear_product < g/4


def froude_criteria(inputs):
    """Evaluate both solitary-wave Froude criteria for a given profile.

    The surface derivative uses a one-sided 3-point difference (second
    order). When the all-amplitude bound holds, any Froude number below 2
    passes, which covers the whole solitary branch.
    """
    y, u, F, g = inputs.y, inputs.u, inputs.F, inputs.g
    w = fd_weights(y[-3:], y[-1], 1)
    uy0 = float(u[-3:] @ w)
    S = abs(uy0 * u[-1])
    F_bound = math.inf if S == 0.0 else math.sqrt(g / S)
    small = _strict_less("froude-small", F ** 2,
                         math.inf if S == 0.0 else g / S)
    all_amp = _strict_less("froude-all-amplitude", S, 0.25 * g)
    return FroudeReport(S, F_bound, small, all_amp)


def gamma_tilde(gamma, d, u_surface):
    """Dimensionless constant-vorticity parameter gamma*d/|u(0)|."""
    return gamma * d / abs(u_surface)
