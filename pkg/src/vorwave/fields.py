"""Physical-space fields on the strip: velocities, pressure, vorticity.

Everything is evaluated at the (q, p) nodes and reported there; q is the
horizontal coordinate x, and y = h(q, p) - d with d the mean depth. Physical
derivatives use the chain rule of the height map: for a quantity F stored on
the strip,

    F_x = F_q - (h_q / h_p) F_p,      F_y = F_p / h_p,

where F_q respects the even/odd symmetry of F across q = 0 and q = L. The
surface value of h_p uses the same four-point window as the interior solver's
Bernoulli row, which makes the reconstructed surface pressure agree with the
converged residual to Newton tolerance rather than to truncation order.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

from .errors import InputError, StagnationError
from .fd import ColumnOps, dq_even, dq_odd, dqq_even

CSV_COLUMNS = ("q", "p", "x", "y", "u", "v", "P", "psi", "omega",
               "ux", "uy", "vx", "vy", "uxx", "uxy")
_META_RE = re.compile(
    r"^#\s*vorwave field\s+g=(?P<g>\S+)\s+Q=(?P<Q>\S+)\s+d=(?P<d>\S+)\s*$")


@dataclass
class SurfaceTrace:
    """Velocity and its derivatives along the free surface p = 0."""
    u: np.ndarray
    v: np.ndarray
    ux: np.ndarray
    vx: np.ndarray
    uy: np.ndarray
    uxx: np.ndarray
    uxy: np.ndarray


class WaveField:
    """Velocities, pressure, and derivatives of one computed wave.

    Instances come from `reconstruct` (given a solved height field) or
    `WaveField.from_csv`. The stored arrays are authoritative; h_q and h_p are
    rebuilt from h so the derivative closures dx/dy work on either path.
    """

    def __init__(self, q, p, g, Q, d, h, u, v, P, psi, omega,
                 ux, uy, vx, vy, uxx, uxy, vf=None):
        self.q = np.asarray(q, dtype=float)
        self.p = np.asarray(p, dtype=float)
        self.g = float(g)
        self.Q = float(Q)
        self.d = float(d)
        self.vf = vf
        self.h = h
        self.u, self.v, self.P, self.psi, self.omega = u, v, P, psi, omega
        self.ux, self.uy, self.vx, self.vy = ux, uy, vx, vy
        self.uxx, self.uxy = uxx, uxy
        self.dq = float(self.q[1] - self.q[0])
        self.ops = ColumnOps(self.p)
        self.hp = self.ops.d1(h)
        if np.min(self.hp) <= 0.0:
            raise StagnationError("h_p <= 0 in a reconstructed field")
        self.hq = dq_even(h, self.dq)
        self.y = h - self.d
        self.eta = h[:, -1] - self.d
        self.eta_x = dq_even(self.eta, self.dq)
        self.eta_xx = dqq_even(self.eta, self.dq)

    @property
    def L(self):
        return float(self.q[-1])

    @property
    def m(self):
        return float(-self.p[0])

    @property
    def nq(self):
        return self.q.size

    @property
    def npts(self):
        return self.p.size

    def dx(self, F, parity):
        """x-derivative of a strip quantity with the given q-parity."""
        if parity == "even":
            Fq = dq_even(F, self.dq)
        elif parity == "odd":
            Fq = dq_odd(F, self.dq)
        else:
            raise InputError("parity must be 'even' or 'odd'")
        return Fq - self.hq / self.hp * self.ops.d1(F)

    def dy(self, F):
        """y-derivative of a strip quantity."""
        return self.ops.d1(F) / self.hp

    def speed_squared(self):
        return self.u ** 2 + self.v ** 2

    def surface_trace(self):
        s = slice(None), -1
        return SurfaceTrace(self.u[s], self.v[s], self.ux[s], self.vx[s],
                            self.uy[s], self.uxx[s], self.uxy[s])

    def euler_residuals(self):
        """Residuals of the steady momentum balance at every node."""
        Px = self.dx(self.P, "even")
        Py = self.dy(self.P)
        e1 = self.u * self.ux + self.v * self.uy + Px
        e2 = self.u * self.vx + self.v * self.vy + Py + self.g
        return e1, e2

    def divergence(self):
        return self.ux + self.vy

    def to_csv(self, path):
        """Write the field as CSV, one node per row in i-major order."""
        nq, npts = self.nq, self.npts
        cols = {
            "q": np.repeat(self.q, npts), "p": np.tile(self.p, nq),
            "x": np.repeat(self.q, npts), "y": self.y.ravel(),
            "u": self.u.ravel(), "v": self.v.ravel(), "P": self.P.ravel(),
            "psi": self.psi.ravel(), "omega": self.omega.ravel(),
            "ux": self.ux.ravel(), "uy": self.uy.ravel(),
            "vx": self.vx.ravel(), "vy": self.vy.ravel(),
            "uxx": self.uxx.ravel(), "uxy": self.uxy.ravel(),
        }
        data = np.column_stack([cols[name] for name in CSV_COLUMNS])
        with open(path, "w") as fh:
            fh.write("# vorwave field g=%.17g Q=%.17g d=%.17g\n"
                     % (self.g, self.Q, self.d))
            fh.write(",".join(CSV_COLUMNS) + "\n")
            np.savetxt(fh, data, fmt="%.17g", delimiter=",")

    @classmethod
    def from_csv(cls, path, vf=None):
        """Load a field written by to_csv; stored values stay authoritative."""
        with open(path) as fh:
            meta = _META_RE.match(fh.readline())
            if meta is None:
                raise InputError("missing or malformed metadata line in %s" % path)
            header = fh.readline().strip()
            if header != ",".join(CSV_COLUMNS):
                raise InputError("unexpected column header in %s" % path)
            data = np.loadtxt(fh, delimiter=",", ndmin=2)
        if data.shape[1] != len(CSV_COLUMNS):
            raise InputError("wrong column count in %s" % path)
        g = float(meta.group("g"))
        q_col, p_col = data[:, 0], data[:, 1]
        block = np.nonzero(q_col != q_col[0])[0]
        npts = int(block[0]) if block.size else data.shape[0]
        if data.shape[0] % npts != 0:
            raise InputError("row count is not a whole number of columns")
        nq = data.shape[0] // npts
        q = q_col[::npts].copy()
        p = p_col[:npts].copy()
        if np.any(np.diff(q) <= 0) or np.any(np.diff(p) <= 0):
            raise InputError("nodes out of order in %s" % path)
        grids = {name: data[:, idx].reshape(nq, npts)
                 for idx, name in enumerate(CSV_COLUMNS)}
        y = grids["y"]
        d = float(-y[0, 0])
        h = y + d
        u, v, P = grids["u"], grids["v"], grids["P"]
        Q = float(P[0, -1] + 0.5 * (u[0, -1] ** 2 + v[0, -1] ** 2)
                  + g * (y[0, -1] + d))
        Q_meta = float(meta.group("Q"))
        if abs(Q - Q_meta) > 1e-9 * max(1.0, abs(Q_meta)):
            raise InputError(
                "surface Bernoulli head %.12g disagrees with metadata %.12g"
                % (Q, Q_meta))
        return cls(q, p, g, Q_meta, d, h, u, v, P, grids["psi"],
                   grids["omega"], grids["ux"], grids["uy"], grids["vx"],
                   grids["vy"], grids["uxx"], grids["uxy"], vf=vf)


def reconstruct(grid, vf, g, h, Q):
    """Build the physical fields from a solved height field.

    u = -1/h_p, v = -h_q/h_p, psi = -p, and the pressure comes from the
    Bernoulli law with atmospheric pressure zero.
    """
    h = np.asarray(h, dtype=float)
    if h.shape != (grid.nq, grid.npts):
        raise InputError("height array does not match the grid")
    ops = grid.ops
    hp = ops.d1(h)
    if np.min(hp) <= 0.0:
        raise StagnationError("h_p <= 0: the field has a stagnation point")
    hq = dq_even(h, grid.dq)
    d = float(np.trapezoid(h[:, -1], dx=grid.dq) / grid.L)

    u = -1.0 / hp
    v = -hq / hp
    psi = np.tile(-grid.p, (grid.nq, 1))
    Gamma = vf.Gamma(grid.p)
    P = Q - 0.5 * (u ** 2 + v ** 2) - g * h + Gamma[None, :]

    def dx(F, parity):
        Fq = dq_even(F, grid.dq) if parity == "even" else dq_odd(F, grid.dq)
        return Fq - hq / hp * ops.d1(F)

    def dy(F):
        return ops.d1(F) / hp

    ux = dx(u, "even")
    uy = dy(u)
    vx = dx(v, "odd")
    vy = dy(v)
    omega = vx - uy
    uxx = dx(ux, "odd")
    uxy = dy(ux)
    return WaveField(grid.q, grid.p, g, float(Q), d, h, u, v, P, psi, omega,
                     ux, uy, vx, vy, uxx, uxy, vf=vf)
