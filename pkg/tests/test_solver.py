"""Solver tests: residual correctness, Jacobian exactness, Newton behavior,
and bifurcation detection against independent oracles.

The closed-form anchors used here:

* gamma = 0, uniform vertical grid, h = p + m: every second derivative in the
  interior equation vanishes and the surface row is algebraic, so the residual
  is zero up to roundoff and Newton accepts the input without a step.
* gamma = 0 dispersion: the mode equation phi'' = k^2 phi / lam with
  phi(-m) = 0 and phi'(0) = g lam^{-3/2} phi(0) has the classical root
  g tanh(k m / sqrt(lam)) = k lam.
* constant gamma: the same mode problem integrates numerically as an ODE, so
  a shooting method gives an oracle independent of the tridiagonal assembly.
"""

import numpy as np
import pytest
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

from vorwave.errors import (BifurcationNotFoundError, InputError,
                            NoConvergenceError, StagnationError)
from vorwave.fd import dq_even
from vorwave.grid import StripGrid
from vorwave.laminar import critical_lambda, laminar_flow
from vorwave.solver import (amplitude, bifurcation_mode, discrete_laminar,
                            find_bifurcation, jacobian_blocks, newton_solve,
                            pack_residual, residual_parts, seed_wave)
from vorwave.vorticity import VorticityFunction

G = 9.81
L = np.pi
M = 1.0


def residual_norm(grid, vf, g, h, Q):
    R, S = residual_parts(grid, vf, g, h, Q)
    return float(np.max(np.abs(pack_residual(R, S))))


class TestResidual:
    def test_exact_zero_for_linear_profile(self):
        vf = VorticityFunction.constant(0.0, m=M)
        grid = StripGrid(L, M, 16, 12, beta=0.0)
        h = np.tile(grid.p + M, (grid.nq, 1))
        R, S = residual_parts(grid, vf, G, h, 0.5 + G * M)
        assert np.max(np.abs(R)) < 1e-11
        assert np.max(np.abs(S)) < 1e-11

    def test_laminar_residual_second_order(self):
        vf = VorticityFunction.constant(-0.5, m=M)
        flow = laminar_flow(vf, 2.0, G)
        norms = []
        for npts in (17, 33, 65):
            grid = StripGrid(L, M, 6, npts, beta=0.5)
            h = np.tile(flow.height(grid.p), (grid.nq, 1))
            norms.append(residual_norm(grid, vf, G, h, flow.Q))
        orders = np.log2(np.array(norms[:-1]) / np.array(norms[1:]))
        assert np.all(orders > 1.7)
        assert np.all(orders < 2.4)

    def test_perturbation_response_is_linear(self):
        # away from the bifurcation point the linearization is invertible,
        # so the residual of laminar + eps*mode grows like eps, not eps^2
        vf = VorticityFunction.constant(-0.5, m=M)
        grid = StripGrid(L, M, 12, 20, beta=0.5)
        hcol, Q, _ = discrete_laminar(grid, vf, G, 1.5)
        base = np.tile(hcol, (grid.nq, 1))
        bump = np.cos(np.pi * grid.q / L)[:, None] * (grid.p + M)[None, :]
        norms = []
        for eps in (1e-6, 2e-6, 4e-6):
            norms.append(residual_norm(grid, vf, G, base + eps * bump, Q))
        ratios = np.array(norms[1:]) / np.array(norms[:-1])
        assert np.all(np.abs(ratios - 2.0) < 0.3)

    def test_stagnation_error_on_nonpositive_hp(self):
        vf = VorticityFunction.constant(0.0, m=M)
        grid = StripGrid(L, M, 8, 10, beta=0.0)
        h = np.tile(grid.p + M, (grid.nq, 1))
        h[:, -1] = h[:, -2] - 0.05
        with pytest.raises(StagnationError):
            residual_parts(grid, vf, G, h, 5.0)


class TestJacobian:
    @pytest.mark.parametrize("gamma", [0.0, -0.8])
    def test_matches_directional_finite_difference(self, gamma):
        vf = VorticityFunction.constant(gamma, m=M)
        grid = StripGrid(L, M, 10, 14, beta=0.5)
        lam = 2.5
        hcol, Q, _ = discrete_laminar(grid, vf, G, lam)
        h = np.tile(hcol, (grid.nq, 1))
        h += 0.02 * np.cos(np.pi * grid.q / L)[:, None] * (grid.p + M)[None, :]
        h[:, 0] = 0.0
        J, dF_dQ = jacobian_blocks(grid, vf, G, h, Q)
        rng = np.random.default_rng(7)
        for _ in range(3):
            dh = rng.standard_normal(h.shape)
            dh[:, 0] = 0.0
            dQ = float(rng.standard_normal())
            eps = 1e-7
            Fp = pack_residual(*residual_parts(grid, vf, G, h + eps * dh, Q + eps * dQ))
            Fm = pack_residual(*residual_parts(grid, vf, G, h - eps * dh, Q - eps * dQ))
            fd = (Fp - Fm) / (2.0 * eps)
            an = J @ dh[:, 1:].ravel() + dF_dQ * dQ
            scale = max(1.0, float(np.max(np.abs(an))))
            assert np.max(np.abs(fd - an)) / scale < 1e-6


class TestNewton:
    def test_exact_root_accepted_without_a_step(self):
        vf = VorticityFunction.constant(0.0, m=M)
        grid = StripGrid(L, M, 12, 10, beta=0.0)
        h = np.tile(grid.p + M, (grid.nq, 1))
        res = newton_solve(grid, vf, G, h, 0.5 + G * M, mode="fixed_q")
        assert res.iterations == 0
        assert np.array_equal(res.h, h)

    def test_laminar_seed_converges_fast_and_stays_laminar(self):
        vf = VorticityFunction.constant(-1.0, m=M)
        flow = laminar_flow(vf, 1.0, G)
        grid = StripGrid(L, M, 10, 24, beta=0.5)
        h0 = np.tile(flow.height(grid.p), (grid.nq, 1))
        res = newton_solve(grid, vf, G, h0, flow.Q, mode="fixed_q")
        assert res.iterations <= 5
        # the solution is a column profile: no q-dependence appears
        assert np.max(np.std(res.h, axis=0)) < 1e-12
        hcol, _, _ = discrete_laminar(grid, vf, G, 1.0)
        assert np.max(np.abs(res.h[0] - hcol)) < 1e-10

    def test_seeded_mode_gives_wave_with_positive_v(self):
        vf = VorticityFunction.constant(0.0, m=M)
        lam_star = find_bifurcation(vf, G, L, M)
        grid = StripGrid(L, M, 24, 20, beta=0.5)
        h0, Q0 = seed_wave(grid, vf, G, lam_star, 1e-3)
        res = newton_solve(grid, vf, G, h0, Q0, mode="fixed_amplitude",
                           amplitude_target=1e-3)
        assert abs(amplitude(res.h) - 1e-3) < 1e-9
        hq = dq_even(res.h, grid.dq)
        # v = -h_q/h_p > 0 strictly inside the half period, above the bed
        assert np.all(hq[1:-1, 1:] < 0.0)
        assert np.all(hq[0] == 0.0)
        assert np.all(hq[-1] == 0.0)

    def test_absurd_head_fails_to_converge(self):
        vf = VorticityFunction.constant(0.0, m=M)
        grid = StripGrid(L, M, 8, 10, beta=0.5)
        h = np.tile(laminar_flow(vf, 4.0, G).height(grid.p), (grid.nq, 1))
        with pytest.raises(NoConvergenceError):
            newton_solve(grid, vf, G, h, -40.0, mode="fixed_q", max_iter=4)

    def test_initial_stagnation_propagates(self):
        vf = VorticityFunction.constant(0.0, m=M)
        grid = StripGrid(L, M, 8, 10, beta=0.0)
        h = np.tile(grid.p + M, (grid.nq, 1))
        h[:, -1] = h[:, -2] - 0.05
        with pytest.raises(StagnationError):
            newton_solve(grid, vf, G, h, 5.0, mode="fixed_q")

    def test_mode_argument_validation(self):
        vf = VorticityFunction.constant(0.0, m=M)
        grid = StripGrid(L, M, 8, 10, beta=0.0)
        h = np.tile(grid.p + M, (grid.nq, 1))
        with pytest.raises(InputError):
            newton_solve(grid, vf, G, h, 5.0, mode="fixed_amplitude")
        with pytest.raises(InputError):
            newton_solve(grid, vf, G, h, 5.0, mode="arclength")
        with pytest.raises(InputError):
            newton_solve(grid, vf, G, h, 5.0, mode="downhill")

    def test_arclength_step_satisfies_closure(self):
        vf = VorticityFunction.constant(-0.3, m=M)
        lam_star = find_bifurcation(vf, G, L, M)
        grid = StripGrid(L, M, 16, 16, beta=0.5)
        h0, Q0 = seed_wave(grid, vf, G, lam_star, 0.02)
        first = newton_solve(grid, vf, G, h0, Q0, mode="fixed_amplitude",
                             amplitude_target=0.02)
        hcol, Qt, _ = discrete_laminar(grid, vf, G, lam_star)
        t_h = first.h - np.tile(hcol, (grid.nq, 1))
        t_Q = first.Q - Qt
        n = t_h[:, 1:].size
        nrm = np.sqrt(float(np.sum(t_h[:, 1:] ** 2)) / n + t_Q ** 2)
        t_h /= nrm
        t_Q /= nrm
        ds = 0.03
        res = newton_solve(grid, vf, G, first.h + ds * t_h, first.Q + ds * t_Q,
                           mode="arclength", base=(first.h, first.Q),
                           tangent=(t_h, t_Q), ds=ds)
        assert amplitude(res.h) > amplitude(first.h)
        closure = (float((res.h - first.h)[:, 1:].ravel()
                         @ t_h[:, 1:].ravel()) / n
                   + (res.Q - first.Q) * t_Q)
        assert abs(closure - ds) < 1e-9


class TestDiscreteLaminar:
    def test_head_is_exact_and_heights_second_order(self):
        vf = VorticityFunction.constant(-1.0, m=M)
        flow = laminar_flow(vf, 1.0, G)
        errs = []
        for npts in (17, 33):
            grid = StripGrid(L, M, 6, npts, beta=0.5)
            hcol, Q, _ = discrete_laminar(grid, vf, G, 1.0)
            assert Q == pytest.approx(flow.Q, rel=1e-12)
            errs.append(np.max(np.abs(hcol - flow.height(grid.p))))
        assert 3.0 < errs[0] / errs[1] < 5.5


class TestBifurcation:
    def test_irrotational_matches_dispersion_relation(self):
        vf = VorticityFunction.constant(0.0, m=M)
        k = np.pi / L
        lam_ref = brentq(lambda lam: G * np.tanh(k * M / np.sqrt(lam)) - k * lam,
                         1e-6, critical_lambda(vf, G), xtol=1e-14)
        lam_star = find_bifurcation(vf, G, L, M)
        assert lam_star == pytest.approx(lam_ref, rel=1e-6)
        assert lam_star < critical_lambda(vf, G)

    def test_constant_vorticity_matches_shooting_oracle(self):
        gamma = -0.7
        vf = VorticityFunction.constant(gamma, m=M)
        k = np.pi / L
        lam_c = critical_lambda(vf, G)

        def shoot(lam):
            def rhs(p, y):
                w = lam + 2.0 * gamma * p
                return [y[1], -3.0 * gamma / w * y[1] + k ** 2 / w * y[0]]
            sol = solve_ivp(rhs, (-M, 0.0), [0.0, 1.0], rtol=1e-11,
                            atol=1e-13, dense_output=False)
            phi, dphi = sol.y[0, -1], sol.y[1, -1]
            return dphi - G * lam ** (-1.5) * phi

        lams = np.linspace(0.05, lam_c - 1e-9, 60)
        vals = np.array([shoot(x) for x in lams])
        flips = np.nonzero(np.sign(vals[:-1]) != np.sign(vals[1:]))[0]
        assert flips.size == 1
        lam_ref = brentq(shoot, lams[flips[0]], lams[flips[0] + 1], xtol=1e-12)
        lam_star = find_bifurcation(vf, G, L, M)
        assert lam_star == pytest.approx(lam_ref, rel=1e-5)

    def test_long_waves_approach_critical_lambda(self):
        vf = VorticityFunction.constant(0.0, m=M)
        lam_c = critical_lambda(vf, G)
        stars = [find_bifurcation(vf, G, Lx, M) for Lx in (L, 2 * L, 4 * L)]
        assert stars[0] < stars[1] < stars[2] < lam_c

    def test_short_waves_keep_positive_lambda(self):
        vf = VorticityFunction.constant(0.0, m=M)
        lam_small = find_bifurcation(vf, G, 0.3, M)
        assert 0.0 < lam_small < find_bifurcation(vf, G, L, M)

    def test_range_without_sign_change_raises(self):
        vf = VorticityFunction.constant(0.0, m=M)
        with pytest.raises(BifurcationNotFoundError):
            find_bifurcation(vf, G, L, M, lam_range=(4.45, 4.58))

    def test_invalid_range_rejected(self):
        vf = VorticityFunction.constant(0.0, m=M)
        with pytest.raises(InputError):
            find_bifurcation(vf, G, L, M, lam_range=(-1.0, 2.0))

    def test_mode_shape_matches_closed_form(self):
        vf = VorticityFunction.constant(0.0, m=M)
        lam_star = find_bifurcation(vf, G, L, M)
        grid = StripGrid(L, M, 8, 40, beta=0.5)
        phi = bifurcation_mode(grid, vf, G, lam_star)
        ref = np.sinh(np.pi / L * (grid.p + M) / np.sqrt(lam_star))
        ref *= 0.5 / ref[-1]
        assert np.max(np.abs(phi - ref)) < 1e-5
        assert phi[0] == 0.0
        assert phi[-1] == pytest.approx(0.5)
        assert np.all(np.diff(phi) > -1e-12)

    def test_seed_amplitude_is_the_requested_one(self):
        vf = VorticityFunction.constant(-0.3, m=M)
        lam_star = find_bifurcation(vf, G, L, M)
        grid = StripGrid(L, M, 12, 14, beta=0.5)
        h0, Q0 = seed_wave(grid, vf, G, lam_star, 0.015)
        assert amplitude(h0) == pytest.approx(0.015, rel=1e-12)
        assert np.all(h0[:, 0] == 0.0)
        assert Q0 > 0.0
