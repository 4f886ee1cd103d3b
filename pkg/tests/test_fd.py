"""Finite-difference building blocks: weights, parity stencils, column ops."""

import numpy as np
import pytest

from vorwave.fd import (ColumnOps, derivative_matrix, dq_even, dq_odd,
                        dqq_even, fd_weights)


def test_weights_match_classic_stencils():
    h = 0.5
    nodes = np.array([-h, 0.0, h])
    np.testing.assert_allclose(fd_weights(nodes, 0.0, 1),
                               np.array([-1.0, 0.0, 1.0]) / (2 * h))
    np.testing.assert_allclose(fd_weights(nodes, 0.0, 2),
                               np.array([1.0, -2.0, 1.0]) / h ** 2)
    onesided = np.array([0.0, h, 2 * h])
    np.testing.assert_allclose(fd_weights(onesided, 0.0, 1),
                               np.array([-1.5, 2.0, -0.5]) / h)
    four = np.array([0.0, h, 2 * h, 3 * h])
    np.testing.assert_allclose(fd_weights(four, 0.0, 1),
                               np.array([-11.0 / 6, 3.0, -1.5, 1.0 / 3]) / h,
                               atol=1e-14)


def test_weights_exact_on_polynomials():
    rng = np.random.default_rng(7)
    for _ in range(25):
        nodes = np.sort(rng.uniform(-2, 2, size=5))
        if np.min(np.diff(nodes)) < 1e-3:
            continue
        x0 = rng.uniform(nodes[0], nodes[-1])
        coeffs = rng.uniform(-1, 1, size=5)
        poly = np.polynomial.Polynomial(coeffs)
        for order in (1, 2, 3):
            w = fd_weights(nodes, x0, order)
            got = w @ poly(nodes)
            np.testing.assert_allclose(got, poly.deriv(order)(x0),
                                       rtol=0, atol=1e-9)


def test_weights_reject_too_high_order():
    with pytest.raises(ValueError):
        fd_weights(np.array([0.0, 1.0, 2.0]), 0.0, 3)


def _order_from_errors(errors, factor=2.0):
    return np.log(errors[:-1] / errors[1:]) / np.log(factor)


@pytest.mark.parametrize("op,fn,dfn", [
    (dq_even, lambda q: np.cos(2 * q), lambda q: -2 * np.sin(2 * q)),
    (dq_odd, lambda q: np.sin(2 * q), lambda q: 2 * np.cos(2 * q)),
    (dqq_even, lambda q: np.cos(2 * q), lambda q: -4 * np.cos(2 * q)),
])
def test_parity_stencils_second_order(op, fn, dfn):
    errors = []
    for n in (33, 65, 129):
        q = np.linspace(0.0, np.pi, n)
        dq = q[1] - q[0]
        got = op(fn(q)[:, None], dq)[:, 0]
        errors.append(np.max(np.abs(got - dfn(q))))
    orders = _order_from_errors(np.array(errors))
    assert np.all(orders > 1.8) and np.all(orders < 2.3)


def test_even_derivative_vanishes_at_ends_exactly():
    q = np.linspace(0.0, np.pi, 41)
    F = np.cosh(np.cos(q))[:, None]
    d = dq_even(F, q[1] - q[0])
    assert d[0, 0] == 0.0 and d[-1, 0] == 0.0


def test_odd_endpoint_uses_reflection():
    # For an odd function F with F[0] = 0, the reflected centered stencil at
    # the end reduces to (F[1] - (-F[1])) / (2 dq) = F[1]/dq.
    q = np.linspace(0.0, 1.0, 11)
    F = (q ** 3 - q ** 5)[:, None]
    d = dq_odd(F, q[1] - q[0])
    assert d[0, 0] == pytest.approx(F[1, 0] / (q[1] - q[0]))
    assert d[-1, 0] == pytest.approx(-F[-2, 0] / (q[1] - q[0]))


def _stretched_nodes(n, m=1.0, beta=0.5):
    zeta = np.linspace(0.0, 1.0, n)
    return -m + m * ((1 - beta) * zeta + beta * np.sin(np.pi * zeta / 2))


def test_column_ops_second_order_on_stretched_grid():
    errors = []
    for n in (25, 49, 97):
        p = _stretched_nodes(n)
        ops = ColumnOps(p)
        F = np.exp(p)[None, :].repeat(4, axis=0)
        errors.append(np.max(np.abs(ops.d1(F) - np.exp(p))))
    orders = _order_from_errors(np.array(errors))
    assert np.all(orders > 1.8)


def test_column_ops_twice_applied_keeps_second_order():
    # d1 composed with itself must stay O(dp^2) everywhere, including the
    # end rows; this is why every node carries the same wide sliding window.
    errors = []
    for n in (25, 49, 97):
        p = _stretched_nodes(n)
        ops = ColumnOps(p)
        F = np.sin(2 * p + 0.3)[None, :].repeat(4, axis=0)
        got = ops.d1(ops.d1(F))
        errors.append(np.max(np.abs(got + 4 * np.sin(2 * p + 0.3))))
    orders = _order_from_errors(np.array(errors))
    assert np.all(orders > 1.7)


def test_derivative_matrix_polynomial_exactness():
    rng = np.random.default_rng(3)
    x = np.sort(rng.uniform(-1, 1, size=12))
    poly = np.polynomial.Polynomial([0.3, -1.2, 0.7, 0.05])
    for order in (1, 2, 3):
        D = derivative_matrix(x, order)
        np.testing.assert_allclose(D @ poly(x), poly.deriv(order)(x),
                                   rtol=0, atol=1e-8)
