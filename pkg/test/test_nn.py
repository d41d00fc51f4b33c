#
# This file is part of BuzzScope.
#
# SPDX-License-Identifier: BSD-2-Clause

import unittest

import numpy as np

from buzzscope.errors import ShapeError, ConfigError, DomainError, NumericHealthError
from buzzscope.nn import *

H = 1e-6


def rel_error(a, b):
    a, b = np.ravel(a), np.ravel(b)
    den  = np.linalg.norm(a) + np.linalg.norm(b)
    return 0.0 if den == 0 else np.linalg.norm(a - b)/den

def numeric_grad(f, x):
    """Central differences of the scalar f() with respect to every entry of x (modified in place)."""
    grad = np.zeros_like(x)
    for i in np.ndindex(x.shape):
        old  = x[i]
        x[i] = old + H
        fp   = f()
        x[i] = old - H
        fm   = f()
        x[i] = old
        grad[i] = (fp - fm)/(2*H)
    return grad

def conv(w, b):
    return Conv1dParams(weight=np.asarray(w, dtype=np.float64), bias=np.asarray(b, dtype=np.float64))


class TestConv1d(unittest.TestCase):
    def test_identity(self):
        x = np.arange(10.0).reshape(1, 1, 10)
        np.testing.assert_array_equal(conv1d_forward(x, conv([[[0, 1, 0]]], [0])), x)

    def test_box(self):
        x = np.ones((1, 1, 5))
        np.testing.assert_array_equal(conv1d_forward(x, conv([[[1, 1, 1]]], [0]))[0, 0], [2, 3, 3, 3, 2])

    def test_bias_only(self):
        x = np.random.default_rng(0).normal(size=(2, 3, 7))
        y = conv1d_forward(x, conv(np.zeros((4, 3, 5)), [1, 2, 3, 4]))
        self.assertEqual(y.shape, (2, 4, 7))
        np.testing.assert_array_equal(y[1, 2], np.full(7, 3.0))

    def test_linearity(self):
        rng  = np.random.default_rng(1)
        p    = conv(rng.normal(size=(2, 3, 3)), np.zeros(2))
        a, b = rng.normal(size=(2, 1, 3, 16))
        np.testing.assert_allclose(conv1d_forward(2*a + 3*b, p),
                                   2*conv1d_forward(a, p) + 3*conv1d_forward(b, p), atol=1e-12)

    def test_errors(self):
        with self.assertRaises(ConfigError):
            conv(np.zeros((1, 1, 4)), [0])
        with self.assertRaises(ShapeError):
            conv1d_forward(np.zeros((1, 2, 8)), conv(np.zeros((1, 1, 3)), [0]))
        with self.assertRaises(ShapeError):
            conv1d_forward(np.zeros((2, 8)), conv(np.zeros((1, 1, 3)), [0]))

    def test_non_finite(self):
        x = np.zeros((1, 1, 8))
        x[0, 0, 3] = np.nan
        with self.assertRaises(NumericHealthError) as cm:
            conv1d_forward(x, conv([[[1, 1, 1]]], [0]))
        self.assertIn("conv1d", str(cm.exception))

    def test_gradients(self):
        rng = np.random.default_rng(2)
        for _ in range(100):
            b, c, o = rng.integers(1, 3), rng.integers(1, 4), rng.integers(1, 4)
            k, n    = int(rng.choice([1, 3, 5])), int(rng.integers(4, 17))
            x = rng.normal(size=(b, c, n))
            p = conv(rng.normal(size=(o, c, k)), rng.normal(size=o))
            r = rng.normal(size=(b, o, n))
            f = lambda: float(np.sum(conv1d_forward(x, p)*r))
            grad_x, grad_w, grad_b = conv1d_backward(x, p, r)
            self.assertLess(rel_error(grad_x, numeric_grad(f, x)), 1e-6)
            self.assertLess(rel_error(grad_w, numeric_grad(f, p.weight)), 1e-6)
            self.assertLess(rel_error(grad_b, numeric_grad(f, p.bias)), 1e-6)


class TestLayers(unittest.TestCase):
    def test_maxpool(self):
        x = np.array([[[1.0, 3.0, 2.0, 2.0]]])
        y, argmax = maxpool1d(x, 2)
        np.testing.assert_array_equal(y[0, 0], [3, 2])
        np.testing.assert_array_equal(argmax[0, 0] + 2*np.arange(2), [1, 2])

    def test_maxpool_backward(self):
        rng = np.random.default_rng(3)
        x   = rng.normal(size=(2, 3, 12))
        _, argmax = maxpool1d(x, 3)
        grad = maxpool1d_backward(np.ones((2, 3, 4)), argmax, 3)
        np.testing.assert_array_equal(grad.reshape(2, 3, 4, 3).sum(axis=3), np.ones((2, 3, 4)))
        r = rng.normal(size=(2, 3, 4))
        f = lambda: float(np.sum(maxpool1d(x, 3)[0]*r))
        self.assertLess(rel_error(maxpool1d_backward(r, argmax, 3), numeric_grad(f, x)), 1e-6)

    def test_maxpool_factors(self):
        x = np.arange(6.0).reshape(1, 1, 6)
        np.testing.assert_array_equal(maxpool1d(x, 1)[0], x)
        with self.assertRaises(ConfigError):
            maxpool1d(x, 0)
        with self.assertRaises(ShapeError):
            maxpool1d(x, 4)

    def test_upsample(self):
        x = np.array([[[1.0, 2.0]]])
        np.testing.assert_array_equal(upsample1d_nearest(x, 3)[0, 0], [1, 1, 1, 2, 2, 2])
        rng = np.random.default_rng(4)
        x   = rng.normal(size=(2, 2, 5))
        r   = rng.normal(size=(2, 2, 10))
        f   = lambda: float(np.sum(upsample1d_nearest(x, 2)*r))
        self.assertLess(rel_error(upsample1d_backward(r, 2), numeric_grad(f, x)), 1e-6)

    def test_concat(self):
        a = np.ones((2, 3, 8))
        b = np.zeros((2, 2, 8))
        y = concat_channels(a, b)
        self.assertEqual(y.shape, (2, 5, 8))
        ga, gb = concat_backward(y, 3)
        np.testing.assert_array_equal(ga, a)
        np.testing.assert_array_equal(gb, b)
        np.testing.assert_array_equal(concat_channels(a, np.zeros((2, 0, 8))), a)
        with self.assertRaises(ShapeError):
            concat_channels(a, np.zeros((2, 2, 4)))

    def test_pointwise(self):
        rng = np.random.default_rng(5)
        x   = rng.normal(size=(2, 2, 6))
        r   = rng.normal(size=(2, 2, 6))
        f   = lambda: float(np.sum(relu(x)*r))
        self.assertLess(rel_error(relu_backward(x, r), numeric_grad(f, x)), 1e-6)
        f   = lambda: float(np.sum(sigmoid(x)*r))
        self.assertLess(rel_error(sigmoid_backward(sigmoid(x), r), numeric_grad(f, x)), 1e-6)
        self.assertEqual(float(sigmoid(np.zeros((1, 1, 1)))[0, 0, 0]), 0.5)


class TestDice(unittest.TestCase):
    def targets(self, alpha, n=10000):
        g = np.zeros(n)
        g[np.random.default_rng(6).permutation(n)[:int(alpha*n)]] = 1
        return g

    def test_limits(self):
        for alpha in [0.001, 0.01, 0.1, 0.3]:
            g = self.targets(alpha)
            loss, _ = dice_loss(np.zeros_like(g), g, smooth=1e-6)
            self.assertGreaterEqual(loss, 1 - 1e-3)
            self.assertLessEqual(loss, 1.0)
            loss, _ = dice_loss(np.ones_like(g), g, smooth=1e-6)
            self.assertLess(abs(loss - (1 - 2*alpha/(1 + alpha))), 1e-9)
            self.assertGreater(loss, 1 - 2*alpha)
            spaced = np.zeros_like(g)
            spaced[::int(1/alpha)] = 1
            loss, _ = dice_loss(np.roll(spaced, 1), spaced, smooth=1e-6)
            self.assertGreater(loss, 1 - 2*alpha)
            loss, _ = dice_loss(g, g)
            self.assertEqual(loss, 0.0)

    def test_default_smoothing(self):
        # smooth=1 adds one pseudo-count: p = 0 gives 1 - 1/(alpha*N + 1) instead of 1.
        n = 10000
        for alpha in [0.001, 0.01, 0.1]:
            g    = self.targets(alpha, n)
            ones = alpha*n
            loss, _ = dice_loss(np.zeros_like(g), g)
            self.assertAlmostEqual(loss, 1 - 1/(ones + 1), places=12)
            self.assertLess(loss, 1.0)
            loss, _ = dice_loss(np.ones_like(g), g)
            self.assertAlmostEqual(loss, 1 - (2*ones + 1)/(n + ones + 1), places=12)
        self.assertAlmostEqual(dice_loss(np.zeros(n), self.targets(0.001, n))[0], 10/11, places=12)
        # With 10 positives the pseudo-count drops the all-ones loss below 1 - 2*alpha.
        loss, _ = dice_loss(np.ones(n), self.targets(0.001, n))
        self.assertLess(loss, 1 - 2*0.001)
        self.assertGreater(dice_loss(np.ones(n), self.targets(0.1, n))[0], 1 - 2*0.1)

    def test_empty_target(self):
        loss, grad = dice_loss(np.zeros(100), np.zeros(100))
        self.assertEqual(loss, 0.0)
        self.assertTrue(np.isfinite(grad).all())

    def test_range_and_permutation(self):
        rng = np.random.default_rng(7)
        for _ in range(50):
            p = rng.uniform(size=200)
            g = (rng.uniform(size=200) < 0.2).astype(np.float64)
            loss, _ = dice_loss(p, g)
            self.assertTrue(0.0 <= loss <= 1.0)
            perm = rng.permutation(200)
            self.assertAlmostEqual(dice_loss(p[perm], g[perm])[0], loss, places=12)

    def test_gradient(self):
        rng = np.random.default_rng(8)
        for smooth in [1.0, 1e-3]:
            p = rng.uniform(0.05, 0.95, size=(2, 1, 30))
            g = (rng.uniform(size=(2, 1, 30)) < 0.3).astype(np.float64)
            _, grad = dice_loss(p, g, smooth)
            f = lambda: dice_loss(p, g, smooth)[0]
            self.assertLess(rel_error(grad, numeric_grad(f, p)), 1e-4)

    def test_domain(self):
        with self.assertRaises(DomainError):
            dice_loss(np.array([0.5, 1.5]), np.array([0.0, 1.0]))
        with self.assertRaises(DomainError):
            dice_loss(np.array([-0.1, 0.5]), np.array([0.0, 1.0]))
        with self.assertRaises(ShapeError):
            dice_loss(np.zeros(3), np.zeros(4))
        with self.assertRaises(NumericHealthError):
            dice_loss(np.array([np.nan, 0.5]), np.array([0.0, 1.0]))


class TestAdam(unittest.TestCase):
    def test_zero_gradient(self):
        params = [np.array([1.0, -2.0])]
        state  = AdamState.init(params, lr=0.1)
        new, state = adam_step(params, [np.zeros(2)], state)
        np.testing.assert_array_equal(new[0], params[0])
        self.assertEqual(state.step, 1)

    def test_first_step(self):
        params = [np.zeros(1)]
        state  = AdamState.init(params, lr=0.1)
        new, _ = adam_step(params, [np.ones(1)], state)
        self.assertAlmostEqual(float(new[0][0]), -0.1, places=6)

    def test_minimizes_quadratic(self):
        params = [np.array([3.0, -4.0])]
        state  = AdamState.init(params, lr=0.05)
        for _ in range(2000):
            params, state = adam_step(params, [2*params[0]], state)
        self.assertLess(np.abs(params[0]).max(), 5e-2)

    def test_deterministic(self):
        rng    = np.random.default_rng(9)
        grads  = [[rng.normal(size=3)] for _ in range(10)]
        runs   = []
        for _ in range(2):
            params = [np.ones(3)]
            state  = AdamState.init(params)
            for g in grads:
                params, state = adam_step(params, g, state)
            runs.append(params[0])
        np.testing.assert_array_equal(runs[0], runs[1])

    def test_shape_mismatch(self):
        params = [np.zeros(3)]
        with self.assertRaises(ShapeError):
            adam_step(params, [np.zeros(4)], AdamState.init(params))
