import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from raycam.losses import (
    LossConfig,
    asymmetric_angular_loss,
    combined_angular_loss,
    confidence_loss,
    curriculum_probability,
    fd_gradcheck,
    radial_loss,
    total_loss,
    wrap_angle,
)


class TestAsymmetric:
    def test_overestimate_branch(self):
        lv = asymmetric_angular_loss(np.array([2.0]), np.array([1.0]), 0.7)
        assert abs(lv.value - 0.7) < 1e-15

    def test_underestimate_branch(self):
        lv = asymmetric_angular_loss(np.array([0.0]), np.array([1.0]), 0.7)
        assert abs(lv.value - 0.3) < 1e-15

    def test_alpha_half_is_half_mae(self):
        lv = asymmetric_angular_loss(np.array([1.0, 3.0]), np.array([2.0, 2.0]), 0.5)
        assert lv.value == 0.5  # MAE is 1

    def test_alpha_half_equals_half_mae_random(self):
        rng = np.random.default_rng(0)
        pred = rng.normal(size=(13, 7))
        gt = rng.normal(size=(13, 7))
        lv = asymmetric_angular_loss(pred, gt, 0.5)
        assert abs(lv.value - 0.5 * np.abs(pred - gt).mean()) < 1e-15

    def test_quantile_identity(self):
        rng = np.random.default_rng(1)
        pred = rng.normal(size=50)
        gt = rng.normal(size=50)
        for alpha in (0.1, 0.3, 0.7, 0.9):
            a = asymmetric_angular_loss(pred, gt, alpha)
            b = asymmetric_angular_loss(pred, gt, 1.0 - alpha)
            # identity holds for the mean since it holds pointwise
            assert abs(a.value + b.value - np.abs(pred - gt).mean()) < 1e-12

    def test_gradient_values(self):
        lv = asymmetric_angular_loss(np.array([2.0, 0.0, 1.0]),
                                     np.array([1.0, 1.0, 1.0]), 0.7)
        assert np.allclose(lv.grad, [0.7 / 3, -0.3 / 3, 0.0])

    def test_tie_subgradient_zero(self):
        lv = asymmetric_angular_loss(np.array([1.0]), np.array([1.0]), 0.7)
        assert lv.value == 0.0
        assert lv.grad[0] == 0.0

    def test_minimizer_is_alpha_quantile(self):
        # brute-force scan over constant predictions; with overshoot weighted
        # by alpha the minimizer sits where P(gt >= c) = alpha, the alpha
        # upper-tail quantile (= the 1-alpha quantile in the lower convention)
        rng = np.random.default_rng(7)
        gt = rng.normal(size=1000)
        grid = np.sort(gt)
        for alpha in (0.25, 0.5, 0.7, 0.9):
            vals = [
                asymmetric_angular_loss(np.full_like(gt, c), gt, alpha).value
                for c in grid
            ]
            best = grid[int(np.argmin(vals))]
            q = np.quantile(gt, 1.0 - alpha)
            spacing = np.max(np.diff(grid))
            assert abs(best - q) <= spacing

    def test_empty_mask(self):
        with pytest.raises(ValueError, match="no valid pixels"):
            asymmetric_angular_loss(np.ones(3), np.ones(3), 0.5,
                                    mask=np.zeros(3, dtype=bool))

    def test_bad_alpha(self):
        with pytest.raises(ValueError):
            asymmetric_angular_loss(np.ones(1), np.ones(1), 1.5)

    @given(st.floats(-10, 10), st.floats(-10, 10),
           st.floats(0, 1), st.floats(0.1, 5))
    @settings(max_examples=50, deadline=None)
    def test_positive_homogeneity(self, p, g, alpha, scale):
        # loss is degree-1 homogeneous in (pred - gt)
        base = asymmetric_angular_loss(np.array([p]), np.array([g]), alpha).value
        scaled = asymmetric_angular_loss(
            np.array([g + scale * (p - g)]), np.array([g]), alpha
        ).value
        assert abs(scaled - scale * base) < 1e-9 * max(1.0, abs(base))


class TestWrap:
    def test_wrap_range(self):
        d = wrap_angle(np.linspace(-10, 10, 1001))
        assert np.all(d > -math.pi - 1e-12)
        assert np.all(d <= math.pi + 1e-12)

    def test_wrap_near_pi(self):
        d = wrap_angle(np.array([(math.pi - 0.1) - (-math.pi + 0.1)]))
        assert abs(abs(d[0]) - 0.2) < 1e-12


class TestCombined:
    def test_perfect(self):
        t = np.full((4, 4), 0.5)
        p = np.full((4, 4), 1.0)
        lv = combined_angular_loss(t, p, t, p)
        assert lv.value == 0.0

    def test_polar_error_one(self):
        gt_t = np.full((4, 4), 0.5)
        pred_t = gt_t + 1.0
        phi = np.full((4, 4), 0.3)
        lv = combined_angular_loss(pred_t, phi, gt_t, phi)
        assert abs(lv.value - 0.75 * 0.7) < 1e-12

    def test_azimuth_wraps(self):
        theta = np.full((1, 1), 1.0)
        pred_phi = np.full((1, 1), math.pi - 0.1)
        gt_phi = np.full((1, 1), -math.pi + 0.1)
        lv = combined_angular_loss(theta, pred_phi, theta, gt_phi)
        # wrapped error is 0.2, symmetric alpha=0.5 weight, (1-beta)=0.25
        assert abs(lv.value - 0.25 * 0.5 * 0.2) < 1e-12


class TestRadial:
    def test_perfect(self):
        x = np.ones((3, 3))
        assert radial_loss(x, x).value == 0.0

    def test_example(self):
        lv = radial_loss(np.array([1.0, 1.0]), np.array([0.0, 2.0]))
        assert lv.value == 1.0

    def test_fd(self):
        rng = np.random.default_rng(2)
        gt = rng.normal(size=(5, 5))
        pred = gt + rng.normal(size=(5, 5))
        dev, _ = fd_gradcheck(lambda x: radial_loss(x, gt), pred,
                              epsilon=1e-6, kink_distance=np.abs(pred - gt))
        assert dev < 1e-6


class TestConfidence:
    def test_sigma_equals_error(self):
        pred = np.array([1.3, 0.2])
        gt = np.array([1.0, 0.5])
        sigma = np.abs(pred - gt)
        assert confidence_loss(pred, gt, sigma).value == 0.0

    def test_example(self):
        lv = confidence_loss(np.array([0.3]), np.array([0.0]), np.array([0.0]))
        assert abs(lv.value - 0.3) < 1e-15

    def test_detached_from_radius(self):
        rng = np.random.default_rng(3)
        pred = rng.normal(size=(4, 4))
        gt = rng.normal(size=(4, 4))
        sigma = np.abs(rng.normal(size=(4, 4))) + 0.1
        lv = confidence_loss(pred, gt, sigma)
        assert np.all(lv.grad["log_radius"] == 0.0)

    def test_sigma_gradient_fd(self):
        rng = np.random.default_rng(4)
        pred = rng.normal(size=(4, 4))
        gt = rng.normal(size=(4, 4))
        sigma = np.abs(rng.normal(size=(4, 4))) + 0.5
        err = np.abs(pred - gt)

        def fn(s):
            lv = confidence_loss(pred, gt, s)
            from raycam.losses import LossValue

            return LossValue(lv.value, lv.grad["sigma"])

        dev, _ = fd_gradcheck(fn, sigma, epsilon=1e-6,
                              kink_distance=np.abs(err - sigma))
        assert dev < 1e-6


class TestTotal:
    def make_instance(self, seed=5, n=8):
        rng = np.random.default_rng(seed)
        gt_theta = rng.uniform(0.2, math.pi - 0.2, (n, n))
        gt_phi = rng.uniform(-3.0, 3.0, (n, n))
        pred_theta = gt_theta + rng.normal(0, 0.2, (n, n))
        pred_phi = gt_phi + rng.normal(0, 0.2, (n, n))
        gt_logr = rng.normal(1.0, 0.5, (n, n))
        pred_logr = gt_logr + rng.normal(0, 0.3, (n, n))
        sigma = np.abs(rng.normal(0.3, 0.1, (n, n))) + 1e-3
        return pred_theta, pred_phi, gt_theta, gt_phi, pred_logr, gt_logr, sigma

    def test_all_perfect(self):
        t = np.full((3, 3), 1.0)
        p = np.full((3, 3), 0.5)
        r = np.full((3, 3), 2.0)
        s = np.full((3, 3), 1e-12)
        lv = total_loss(t, p, t, p, r, r, s)
        assert lv.value < 1e-11

    def test_eta_weighting(self):
        # angular perfect, radial error 1, confidence perfect
        t = np.full((2, 2), 1.0)
        p = np.full((2, 2), 0.5)
        gt_r = np.zeros((2, 2))
        pred_r = np.ones((2, 2))
        sigma = np.ones((2, 2))  # sigma equals the radial error
        lv = total_loss(t, p, t, p, pred_r, gt_r, sigma)
        assert abs(lv.value - 2.0) < 1e-12

    def test_fd_theta_and_radius(self):
        from raycam.losses import LossValue

        args = self.make_instance()
        pred_theta, pred_phi, gt_theta, gt_phi, pred_logr, gt_logr, sigma = args
        cfg = LossConfig()

        dev_t, _ = fd_gradcheck(
            lambda x: LossValue(
                total_loss(x, pred_phi, gt_theta, gt_phi,
                           pred_logr, gt_logr, sigma, cfg).value,
                total_loss(x, pred_phi, gt_theta, gt_phi,
                           pred_logr, gt_logr, sigma, cfg).grad["theta"]),
            pred_theta, epsilon=1e-6,
            kink_distance=np.abs(pred_theta - gt_theta))
        assert dev_t < 1e-5

        # the confidence term is detached from the radius: probe the value
        # with its radial input frozen, as a detached graph would see it
        la = combined_angular_loss(pred_theta, pred_phi, gt_theta, gt_phi, cfg)
        lc = confidence_loss(pred_logr, gt_logr, sigma)

        def through_radius(x):
            lr = radial_loss(x, gt_logr)
            return LossValue(la.value + cfg.eta * lr.value + cfg.gamma * lc.value,
                             cfg.eta * lr.grad)

        dev_r, _ = fd_gradcheck(
            through_radius, pred_logr, epsilon=1e-6,
            kink_distance=np.abs(pred_logr - gt_logr))
        assert dev_r < 1e-5
        full = total_loss(pred_theta, pred_phi, gt_theta, gt_phi,
                          pred_logr, gt_logr, sigma, cfg)
        assert np.allclose(full.grad["log_radius"],
                           through_radius(pred_logr).grad)

    def test_gradient_is_linear_combination(self):
        args = self.make_instance(seed=6)
        pred_theta, pred_phi, gt_theta, gt_phi, pred_logr, gt_logr, sigma = args
        cfg = LossConfig()
        lt = total_loss(*args, cfg)
        la = combined_angular_loss(pred_theta, pred_phi, gt_theta, gt_phi, cfg)
        lr = radial_loss(pred_logr, gt_logr)
        lc = confidence_loss(pred_logr, gt_logr, sigma)
        expect = la.value + cfg.eta * lr.value + cfg.gamma * lc.value
        assert abs(lt.value - expect) < 1e-12
        assert np.allclose(lt.grad["log_radius"], cfg.eta * lr.grad)
        assert np.allclose(lt.grad["sigma"], cfg.gamma * lc.grad["sigma"])


class TestCurriculum:
    def test_step_zero(self):
        assert curriculum_probability(0) == 1.0

    def test_step_1e5(self):
        assert abs(curriculum_probability(10 ** 5) - (1.0 - math.tanh(1.0))) < 1e-12
        assert abs(curriculum_probability(10 ** 5) - 0.23840584) < 1e-7

    def test_monotone_and_limit(self):
        steps = [0, 10, 1000, 10 ** 5, 10 ** 6, 10 ** 7]
        vals = [curriculum_probability(s) for s in steps]
        assert all(a >= b for a, b in zip(vals, vals[1:]))
        assert vals[-1] < 1e-8

    def test_negative_step(self):
        with pytest.raises(ValueError):
            curriculum_probability(-1)


class TestFdGradcheck:
    def test_quadratic_exact(self):
        from raycam.losses import LossValue

        def quad(x):
            return LossValue(float(np.sum(x * x)), 2.0 * x)

        dev, skipped = fd_gradcheck(quad, np.linspace(-1, 1, 9))
        assert dev < 1e-8
        assert skipped == 0

    def test_kink_skipped(self):
        pred = np.array([1.0 + 1e-7, 2.0])
        gt = np.array([1.0, 1.0])
        dev, skipped = fd_gradcheck(
            lambda x: asymmetric_angular_loss(x, gt, 0.7),
            pred, epsilon=1e-6, kink_distance=np.abs(pred - gt))
        assert skipped >= 1

    def test_rejects_dict_gradient(self):
        t = np.ones((2, 2))
        with pytest.raises(TypeError):
            fd_gradcheck(lambda x: combined_angular_loss(x, t, t, t), t)


class TestConfig:
    def test_defaults(self):
        cfg = LossConfig()
        assert cfg.alpha_theta == 0.7
        assert cfg.alpha_phi == 0.5
        assert cfg.beta == 0.75
        assert cfg.eta == 2.0
        assert cfg.gamma == 0.1

    def test_validation(self):
        with pytest.raises(ValueError):
            LossConfig(alpha_theta=1.2)
        with pytest.raises(ValueError):
            LossConfig(eta=-1.0)
