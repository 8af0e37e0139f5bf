"""Training objectives as standalone scalar functions with analytic gradients.

All losses reduce by the *mean* over valid pixels so the mixing weights are
resolution-invariant. Subgradients at exact ties are 0. Azimuth differences
are wrapped into (-pi, pi] before the loss.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


@dataclass
class LossConfig:
    alpha_theta: float = 0.7   # polar quantile
    alpha_phi: float = 0.5     # azimuth quantile (symmetric)
    beta: float = 0.75         # polar/azimuth mix
    eta: float = 2.0           # radial weight
    gamma: float = 0.1         # confidence weight

    def __post_init__(self):
        for name in ("alpha_theta", "alpha_phi", "beta"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValueError(f"{name} must be in [0, 1]")
        if self.eta < 0 or self.gamma < 0:
            raise ValueError("eta and gamma must be non-negative")


@dataclass
class LossValue:
    value: float
    grad: np.ndarray | dict


def _prep(pred, gt, mask):
    pred = np.asarray(pred, dtype=np.float64)
    gt = np.asarray(gt, dtype=np.float64)
    if pred.shape != gt.shape:
        raise ValueError("pred and gt shapes differ")
    if mask is None:
        mask = np.ones(pred.shape, dtype=bool)
    mask = np.asarray(mask, dtype=bool)
    if mask.shape != pred.shape:
        raise ValueError("mask shape differs from pred")
    n = int(mask.sum())
    if n == 0:
        raise ValueError("no valid pixels")
    return pred, gt, mask, n


def wrap_angle(diff):
    """Wrap angle differences into (-pi, pi]."""
    return math.pi - np.mod(math.pi - np.asarray(diff, dtype=np.float64), 2.0 * math.pi)


def asymmetric_angular_loss(pred, gt, alpha, mask=None, wrap=False) -> LossValue:
    """Quantile (pinball) loss: alpha-weighted overshoot, (1-alpha) undershoot.

    alpha = 0.5 gives exactly 0.5 * mean absolute error.
    """
    if not 0.0 <= alpha <= 1.0:
        raise ValueError("alpha must be in [0, 1]")
    pred, gt, mask, n = _prep(pred, gt, mask)
    diff = pred - gt
    if wrap:
        diff = wrap_angle(diff)
    over = mask & (diff > 0)
    under = mask & (diff < 0)
    value = (alpha * diff[over].sum() - (1.0 - alpha) * diff[under].sum()) / n
    grad = np.zeros_like(pred)
    grad[over] = alpha / n
    grad[under] = -(1.0 - alpha) / n
    return LossValue(float(value), grad)


def combined_angular_loss(pred_theta, pred_phi, gt_theta, gt_phi,
                          cfg: LossConfig = LossConfig(), mask=None) -> LossValue:
    """beta-weighted polar quantile loss plus azimuth symmetric loss."""
    lt = asymmetric_angular_loss(pred_theta, gt_theta, cfg.alpha_theta, mask)
    lp = asymmetric_angular_loss(pred_phi, gt_phi, cfg.alpha_phi, mask, wrap=True)
    value = cfg.beta * lt.value + (1.0 - cfg.beta) * lp.value
    return LossValue(value, {"theta": cfg.beta * lt.grad,
                             "phi": (1.0 - cfg.beta) * lp.grad})


def radial_loss(pred_log_r, gt_log_r, mask=None) -> LossValue:
    """Mean absolute error between predicted and reference log-radius."""
    pred, gt, mask, n = _prep(pred_log_r, gt_log_r, mask)
    diff = pred - gt
    value = np.abs(diff[mask]).sum() / n
    grad = np.zeros_like(pred)
    grad[mask] = np.sign(diff[mask]) / n
    return LossValue(float(value), grad)


def confidence_loss(pred_log_r, gt_log_r, sigma, mask=None) -> LossValue:
    """Mean | |log-radius error| - sigma |; the radial inputs are constants
    (detached): the gradient is with respect to sigma only."""
    pred, gt, mask, n = _prep(pred_log_r, gt_log_r, mask)
    sigma = np.asarray(sigma, dtype=np.float64)
    if sigma.shape != pred.shape:
        raise ValueError("sigma shape differs from pred")
    err = np.abs(pred - gt)
    diff = err - sigma
    value = np.abs(diff[mask]).sum() / n
    gsigma = np.zeros_like(sigma)
    gsigma[mask] = -np.sign(diff[mask]) / n
    return LossValue(float(value), {"sigma": gsigma,
                                    "log_radius": np.zeros_like(pred)})


def total_loss(pred_theta, pred_phi, gt_theta, gt_phi,
               pred_log_r, gt_log_r, sigma,
               cfg: LossConfig = LossConfig(), mask=None) -> LossValue:
    """Angular + eta * radial + gamma * confidence."""
    la = combined_angular_loss(pred_theta, pred_phi, gt_theta, gt_phi, cfg, mask)
    lr = radial_loss(pred_log_r, gt_log_r, mask)
    lc = confidence_loss(pred_log_r, gt_log_r, sigma, mask)
    value = la.value + cfg.eta * lr.value + cfg.gamma * lc.value
    grads = {
        "theta": la.grad["theta"],
        "phi": la.grad["phi"],
        "log_radius": cfg.eta * lr.grad,  # confidence term is detached from radius
        "sigma": cfg.gamma * lc.grad["sigma"],
    }
    return LossValue(value, grads)


def curriculum_probability(step: int) -> float:
    """Probability of feeding reference camera data at an optimization step:
    1 - tanh(step / 1e5), monotonically non-increasing."""
    if step < 0:
        raise ValueError("step must be non-negative")
    return 1.0 - math.tanh(step / 1e5)


def fd_gradcheck(fn, x, epsilon=1e-6, kink_distance=None):
    """Central finite differences against an analytic gradient.

    ``fn(x) -> LossValue`` with an ndarray gradient matching ``x``.
    Coordinates within 10 * epsilon of a non-differentiable kink (per the
    ``kink_distance`` array) are skipped. Returns (max_abs_deviation,
    skipped_count); never asserts.
    """
    x = np.asarray(x, dtype=np.float64)
    analytic = fn(x).grad
    if isinstance(analytic, dict):
        raise TypeError("fd_gradcheck expects a single-tensor gradient")
    skip = np.zeros(x.shape, dtype=bool)
    if kink_distance is not None:
        skip = np.asarray(kink_distance) < 10.0 * epsilon
    max_dev = 0.0
    skipped = 0
    it = np.ndindex(x.shape)
    for idx in it:
        if skip[idx]:
            skipped += 1
            continue
        xp = x.copy()
        xp[idx] += epsilon
        xm = x.copy()
        xm[idx] -= epsilon
        fd = (fn(xp).value - fn(xm).value) / (2.0 * epsilon)
        max_dev = max(max_dev, abs(fd - analytic[idx]))
    return max_dev, skipped
