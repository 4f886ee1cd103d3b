"""Newton solver for the height-function system and bifurcation detection.

Unknowns are the height values h(q_i, p_j) for j >= 1 (the bed row is pinned
to zero) together with the head Q when a closure equation is active. The
interior equation is

    (1 + h_q^2) h_pp - 2 h_q h_p h_pq + h_p^2 h_qq + gamma(-p) h_p^3 = 0,

with the Bernoulli condition (1 + h_q^2)/(2 h_p^2) + g h - Q = 0 on p = 0,
h = 0 on p = -m, and even symmetry in q enforced by reflection stencils.
The sign convention is pinned by the laminar identity H'' + gamma H'^3 = 0.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.linalg import eigh_tridiagonal, eigvalsh_tridiagonal
from scipy.optimize import brentq
from scipy.sparse.linalg import splu

from .errors import (BifurcationNotFoundError, InputError, NoConvergenceError,
                     NumericsError, StagnationApproachError, StagnationError)
from .fd import dq_even, dqq_even
from .grid import StripGrid, stretched_nodes
from .laminar import critical_lambda, laminar_flow

HP_FLOOR = 1e-8
MAX_HALVINGS = 30


def solver_hp(grid, h):
    """h_p with the solver's stencils: centered inside, one-sided at the
    bed and surface rows."""
    hp = np.empty_like(h)
    hp[:, 1:-1] = (grid.w1[1:-1, 0] * h[:, :-2]
                   + grid.w1[1:-1, 1] * h[:, 1:-1]
                   + grid.w1[1:-1, 2] * h[:, 2:])
    wd = grid.ws.size
    hp[:, 0] = h[:, :wd] @ grid.wb
    hp[:, -1] = h[:, -wd:] @ grid.ws
    return hp


def amplitude(h):
    """Crest-minus-trough surface height difference."""
    return float(h[0, -1] - h[-1, -1])


def _gamma_column(grid, vf):
    return vf.gamma(-grid.p)


def residual_parts(grid, vf, g, h, Q):
    """Interior residual (nq, npts-2) and surface residual (nq,).

    Raises StagnationError if h_p <= 0 anywhere: the formulation is only
    meaningful while u = -1/h_p stays negative.
    """
    hp = solver_hp(grid, h)
    if np.min(hp) <= 0.0:
        raise StagnationError(
            "h_p <= 0 at %d nodes: relative flow reaches stagnation"
            % int(np.sum(hp <= 0.0)))
    hq = dq_even(h, grid.dq)
    hqq = dqq_even(h, grid.dq)
    hpq = dq_even(hp, grid.dq)
    hpp = (grid.w2[1:-1, 0] * h[:, :-2]
           + grid.w2[1:-1, 1] * h[:, 1:-1]
           + grid.w2[1:-1, 2] * h[:, 2:])
    gam = _gamma_column(grid, vf)[1:-1]
    hqc, hpc, hpqc, hqqc = hq[:, 1:-1], hp[:, 1:-1], hpq[:, 1:-1], hqq[:, 1:-1]
    R = ((1.0 + hqc ** 2) * hpp - 2.0 * hqc * hpc * hpqc
         + hpc ** 2 * hqqc + gam * hpc ** 3)
    S = (1.0 + hq[:, -1] ** 2) / (2.0 * hp[:, -1] ** 2) + g * h[:, -1] - Q
    return R, S


def pack_residual(R, S):
    return np.concatenate([R, S[:, None]], axis=1).ravel()


def _reflect(idx, n):
    idx = np.abs(idx)
    return np.where(idx > n - 1, 2 * (n - 1) - idx, idx)


def jacobian_blocks(grid, vf, g, h, Q):
    """Sparse d(residual)/dh over the j >= 1 unknowns, plus d(residual)/dQ.

    Row/column order matches pack_residual: n(i,j) = i*(npts-1) + (j-1).
    """
    nq, npts, dq = grid.nq, grid.npts, grid.dq
    hp = solver_hp(grid, h)
    hq = dq_even(h, grid.dq)
    hqq = dqq_even(h, grid.dq)
    hpq = dq_even(hp, grid.dq)
    hpp = (grid.w2[1:-1, 0] * h[:, :-2]
           + grid.w2[1:-1, 1] * h[:, 1:-1]
           + grid.w2[1:-1, 2] * h[:, 2:])
    gam = _gamma_column(grid, vf)[1:-1]

    hqc, hpc, hpqc, hqqc = hq[:, 1:-1], hp[:, 1:-1], hpq[:, 1:-1], hqq[:, 1:-1]
    A1 = 1.0 + hqc ** 2
    A2 = 2.0 * hqc * hpp - 2.0 * hpc * hpqc
    A3 = -2.0 * hqc * hpqc + 2.0 * hpc * hqqc + 3.0 * gam * hpc ** 2
    A4 = hpc ** 2
    A5 = -2.0 * hqc * hpc

    I, J = np.meshgrid(np.arange(nq), np.arange(1, npts - 1), indexing="ij")
    row_int = I * (npts - 1) + (J - 1)
    rows, cols, vals = [], [], []
    for di in (-1, 0, 1):
        ii = _reflect(I + di, nq)
        for dj in (-1, 0, 1):
            jj = J + dj
            if di == 0:
                c = A1 * grid.w2[J, 1 + dj] + A3 * grid.w1[J, 1 + dj]
                if dj == 0:
                    c = c + A4 * (-2.0 / dq ** 2)
            else:
                c = di * A5 * grid.w1[J, 1 + dj] / (2.0 * dq)
                if dj == 0:
                    c = c + A4 / dq ** 2 + di * A2 / (2.0 * dq)
            keep = jj >= 1
            rows.append(row_int[keep])
            cols.append((ii * (npts - 1) + (jj - 1))[keep])
            vals.append(c[keep])

    # surface rows: S = (1+hq^2)/(2 hp^2) + g h - Q at p = 0
    i = np.arange(nq)
    row_s = i * (npts - 1) + (npts - 2)
    hq_s, hp_s = hq[:, -1], hp[:, -1]
    dS_dhp = -(1.0 + hq_s ** 2) / hp_s ** 3
    wd = grid.ws.size
    for k in range(wd):
        rows.append(row_s)
        cols.append(i * (npts - 1) + (npts - 1 - wd + k))
        vals.append(dS_dhp * grid.ws[k])
    dS_dhq = hq_s / hp_s ** 2
    for di in (-1, 1):
        ii = _reflect(i + di, nq)
        rows.append(row_s)
        cols.append(ii * (npts - 1) + (npts - 2))
        vals.append(di * dS_dhq / (2.0 * dq))
    rows.append(row_s)
    cols.append(i * (npts - 1) + (npts - 2))
    vals.append(np.full(nq, g))

    n = nq * (npts - 1)
    J_hh = sparse.coo_matrix(
        (np.concatenate(vals),
         (np.concatenate(rows), np.concatenate(cols))),
        shape=(n, n)).tocsc()
    dF_dQ = np.zeros(n)
    dF_dQ[row_s] = -1.0
    return J_hh, dF_dQ


@dataclass
class SolverResult:
    h: np.ndarray
    Q: float
    iterations: int
    residual_norm: float


def _tolerance(Q):
    return 1e-10 * max(1.0, abs(Q))


def _min_hp(grid, h):
    return float(np.min(solver_hp(grid, h)))


def _scaled_dot(dh, dQ, th, tQ):
    return float(dh.ravel() @ th.ravel()) / dh.size + dQ * tQ


def newton_solve(grid, vf, g, h0, Q0, mode="fixed_q", *, amplitude_target=None,
                 base=None, tangent=None, ds=None, max_iter=50):
    """Damped Newton iteration on the discrete height system.

    mode "fixed_q" holds Q; "fixed_amplitude" appends the closure
    a(h) = amplitude_target; "arclength" appends the pseudo-arclength
    condition built from `base` (h, Q) and `tangent` (t_h, t_Q) with step ds.
    Steps are halved whenever the candidate would push min h_p below the
    positivity floor or fails to reduce the residual norm.
    """
    if mode == "fixed_amplitude" and amplitude_target is None:
        raise InputError("fixed_amplitude mode needs amplitude_target")
    if mode == "arclength" and (base is None or tangent is None or ds is None):
        raise InputError("arclength mode needs base, tangent, and ds")
    if mode not in ("fixed_q", "fixed_amplitude", "arclength"):
        raise InputError("unknown solve mode %r" % mode)

    npts = grid.npts
    h = np.array(h0, dtype=float)
    h[:, 0] = 0.0
    Q = float(Q0)

    def closure(hc, Qc):
        if mode == "fixed_amplitude":
            return amplitude(hc) - amplitude_target
        if mode == "arclength":
            return _scaled_dot(hc[:, 1:] - base[0][:, 1:], Qc - base[1],
                               tangent[0][:, 1:], tangent[1]) - ds
        return None

    def full_residual(hc, Qc):
        R, S = residual_parts(grid, vf, g, hc, Qc)
        F = pack_residual(R, S)
        extra = closure(hc, Qc)
        if extra is not None:
            F = np.append(F, extra)
        return F

    F = full_residual(h, Q)
    for it in range(max_iter + 1):
        nrm = float(np.max(np.abs(F)))
        tol = _tolerance(Q)
        if nrm < tol:
            return SolverResult(h, Q, it, nrm)
        if it == max_iter:
            raise NoConvergenceError(
                "residual %.3g after %d Newton iterations" % (nrm, max_iter))

        J_hh, dF_dQ = jacobian_blocks(grid, vf, g, h, Q)
        if mode == "fixed_q":
            delta = splu(J_hh).solve(-F)
            dh_flat, dQ = delta, 0.0
        else:
            n = J_hh.shape[0]
            r = np.zeros(n)
            if mode == "fixed_amplitude":
                r[0 * (npts - 1) + (npts - 2)] = 1.0
                r[(grid.nq - 1) * (npts - 1) + (npts - 2)] = -1.0
                corner = 0.0
            else:
                r = tangent[0][:, 1:].ravel() / n
                corner = tangent[1]
            J = sparse.bmat(
                [[J_hh, dF_dQ[:, None]], [r[None, :], np.array([[corner]])]],
                format="csc")
            delta = splu(J).solve(-F)
            dh_flat, dQ = delta[:-1], float(delta[-1])

        dh = np.zeros_like(h)
        dh[:, 1:] = dh_flat.reshape(grid.nq, npts - 1)

        step = 1.0
        floor_blocked = False
        accepted = False
        for _ in range(MAX_HALVINGS + 1):
            hc = h + step * dh
            Qc = Q + step * dQ
            if _min_hp(grid, hc) <= HP_FLOOR:
                floor_blocked = True
                step *= 0.5
                continue
            floor_blocked = False
            Fc = full_residual(hc, Qc)
            nc = float(np.max(np.abs(Fc)))
            if nc < nrm or nc < _tolerance(Qc):
                h, Q, F = hc, Qc, Fc
                accepted = True
                break
            step *= 0.5
        if not accepted:
            if floor_blocked:
                raise StagnationApproachError(
                    "line search blocked by the h_p positivity floor")
            raise NoConvergenceError(
                "line search failed to reduce the residual below %.3g" % nrm)
    raise NoConvergenceError("unreachable")  # pragma: no cover


# -- trivial (laminar) point on the discrete grid ---------------------------

def discrete_laminar(grid, vf, g, lam, max_iter=25):
    """Column heights of the discrete laminar root at head Q = head(lam).

    The q-independent reduction of the height system is a small dense Newton
    problem; solving it directly avoids the full-strip Jacobian, which is
    nearly singular when lam sits at a bifurcation point.
    """
    flow = laminar_flow(vf, lam, g)
    npts = grid.npts
    hcol = flow.height(grid.p)
    hcol[0] = 0.0
    Q = flow.Q
    gam = _gamma_column(grid, vf)

    def col_residual(hc):
        hp = (grid.w1[1:-1, 0] * hc[:-2] + grid.w1[1:-1, 1] * hc[1:-1]
              + grid.w1[1:-1, 2] * hc[2:])
        hpp = (grid.w2[1:-1, 0] * hc[:-2] + grid.w2[1:-1, 1] * hc[1:-1]
               + grid.w2[1:-1, 2] * hc[2:])
        hps = hc[-grid.ws.size:] @ grid.ws
        if min(np.min(hp), hps) <= 0.0:
            raise StagnationError("h_p <= 0 in the laminar column")
        F = np.empty(npts - 1)
        F[:-1] = hpp + gam[1:-1] * hp ** 3
        F[-1] = 1.0 / (2.0 * hps ** 2) + g * hc[-1] - Q
        return F, hp, hps

    for it in range(max_iter):
        F, hp, hps = col_residual(hcol)
        if np.max(np.abs(F)) < _tolerance(Q):
            return hcol, Q, it
        Jd = np.zeros((npts - 1, npts - 1))
        for t in range(npts - 2):
            j = t + 1
            coeff = grid.w2[j] + 3.0 * gam[j] * hp[t] ** 2 * grid.w1[j]
            for k, jj in enumerate(range(j - 1, j + 2)):
                if jj >= 1:
                    Jd[t, jj - 1] += coeff[k]
        Jd[-1, -grid.ws.size:] += -grid.ws / hps ** 3
        Jd[-1, -1] += g
        hcol[1:] += np.linalg.solve(Jd, -F)
    raise NoConvergenceError("laminar column Newton did not converge")


# -- bifurcation from the trivial branch ------------------------------------

def _mode_weights(p):
    """Closed-form 3-point first/second-derivative weights on the nodes."""
    hm = np.diff(p)[:-1]
    hp = np.diff(p)[1:]
    w1 = np.stack([-hp / (hm * (hm + hp)),
                   (hp - hm) / (hm * hp),
                   hm / (hp * (hm + hp))], axis=1)
    w2 = np.stack([2.0 / (hm * (hm + hp)),
                   -2.0 / (hm * hp),
                   2.0 / (hp * (hm + hp))], axis=1)
    return w1, w2


def _mode_operator(vf, g, k, lam, p, Gamma, gam):
    """Tridiagonal (sub, diag, sup) of the transverse linearization.

    Rows cover nodes p[1:]; the bed value is eliminated and the surface row
    uses a mirrored ghost node carrying the Robin condition
    phi'(0) = g H'(0)^3 phi(0).
    """
    n = p.size
    Hp2 = 1.0 / (lam + 2.0 * Gamma)
    w1, w2 = _mode_weights(p)
    adv = 3.0 * gam[1:-1] * Hp2[1:-1]
    sub = np.empty(n - 2)
    diag = np.empty(n - 1)
    sup = np.empty(n - 2)
    sub[:-1] = (w2[1:, 0] + adv[1:] * w1[1:, 0])
    diag[:-1] = (w2[:, 1] + adv * w1[:, 1]) - k ** 2 * Hp2[1:-1]
    sup[:] = (w2[:, 2] + adv * w1[:, 2])
    dlast = p[-1] - p[-2]
    R = g * Hp2[-1] ** 1.5
    sub[-1] = 2.0 / dlast ** 2
    diag[-1] = (2.0 * R / dlast - 2.0 / dlast ** 2
                + 3.0 * gam[-1] * Hp2[-1] * R - k ** 2 * Hp2[-1])
    return sub, diag, sup


def _largest_eigenvalue(sub, diag, sup):
    offprod = sup * sub
    if np.all(offprod > 0.0):
        n = diag.size
        return float(eigvalsh_tridiagonal(
            diag, np.sqrt(offprod), select="i",
            select_range=(n - 1, n - 1))[0])
    A = np.diag(diag) + np.diag(sub, -1) + np.diag(sup, 1)
    return float(np.max(np.linalg.eigvals(A).real))


def find_bifurcation(vf, g, L, m, lam_range=None, *, npts=4001, beta=0.5):
    """Squared surface speed lam* where a cos(pi q / L) mode branches off.

    Root of the largest eigenvalue of the transverse mode operator on a fine
    dedicated vertical grid; always strictly below lambda_c.
    """
    lam_c = critical_lambda(vf, g)
    floor = -2.0 * vf.Gamma_min()
    if lam_range is None:
        lam_range = (floor + 1e-4 * (lam_c - floor), lam_c)
    lo, hi = lam_range
    if not (floor < lo < hi <= lam_c + 1e-12):
        raise InputError("lambda range must sit inside (floor, lambda_c]")
    p = stretched_nodes(m, npts, beta)
    Gamma = vf.Gamma(p)
    gam = vf.gamma(-p)
    k = np.pi / L

    def mu(lam):
        return _largest_eigenvalue(*_mode_operator(vf, g, k, lam, p, Gamma, gam))

    mu_lo, mu_hi = mu(lo), mu(hi)
    if not (mu_lo > 0.0 > mu_hi):
        raise BifurcationNotFoundError(
            "largest mode eigenvalue does not change sign on [%g, %g] "
            "(mu(lo)=%.3g, mu(hi)=%.3g)" % (lo, hi, mu_lo, mu_hi))
    lam_star = brentq(mu, lo, hi, xtol=1e-9 * max(1.0, hi),
                      rtol=4.0 * np.finfo(float).eps)
    if not lam_star < lam_c:
        raise BifurcationNotFoundError("detected lam* is not below lambda_c")
    return float(lam_star)


def bifurcation_mode(grid, vf, g, lam_star):
    """Vertical mode shape phi on grid.p, normalized to phi(0) = 1/2.

    Eigenvector of the solver-grid mode operator for its largest eigenvalue
    (near zero at lam_star); used only to seed Newton, so the fine-grid /
    solver-grid discretization mismatch is harmless.
    """
    p = grid.p
    Gamma = vf.Gamma(p)
    gam = vf.gamma(-p)
    k = np.pi / grid.L
    sub, diag, sup = _mode_operator(vf, g, k, lam_star, p, Gamma, gam)
    offprod = sup * sub
    if np.all(offprod > 0.0):
        e = np.sqrt(offprod)
        n = diag.size
        _, vecs = eigh_tridiagonal(diag, e, select="i",
                                   select_range=(n - 1, n - 1))
        v_sym = vecs[:, 0]
        # undo the diagonal similarity that symmetrized the tridiagonal
        scale = np.ones(n)
        scale[1:] = np.cumprod(np.sqrt(sup / sub))
        v = v_sym / scale
    else:
        A = np.diag(diag) + np.diag(sub, -1) + np.diag(sup, 1)
        eigvals, eigvecs = np.linalg.eig(A)
        v = eigvecs[:, np.argmax(eigvals.real)].real
    if abs(v[-1]) < 1e-12 * np.max(np.abs(v)):
        raise NumericsError("mode shape vanishes at the surface")
    phi = np.concatenate([[0.0], v])
    phi *= 0.5 / phi[-1]
    return phi


def seed_wave(grid, vf, g, lam_star, a0):
    """Initial guess (h0, Q0) on the nontrivial branch at amplitude a0.

    The discrete laminar column plus a0 * cos(pi q / L) times the mode shape;
    the cosine sign puts the crest at q = 0 and the trough at q = L.
    """
    hcol, Q, _ = discrete_laminar(grid, vf, g, lam_star)
    phi = bifurcation_mode(grid, vf, g, lam_star)
    h0 = hcol[None, :] + a0 * np.cos(np.pi * grid.q / grid.L)[:, None] * phi[None, :]
    h0[:, 0] = 0.0
    return h0, Q
