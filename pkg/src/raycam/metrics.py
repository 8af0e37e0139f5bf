"""Evaluation suite: scale/shift-invariant depth accuracy, point-cloud
F-score AUC, ray angular-error AUC, and classical depth metrics.

Nearest neighbors come from a uniform spatial hash that returns exact nearest
distances (brute force remains available as an independent oracle). Both AUC
curves use inclusive thresholds (error <= t) sampled on an even grid that
includes 0 and the cap, integrated by the trapezoid rule; identical inputs
therefore score exactly 100.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .spherical import PointCloud, RayField


class AlignmentError(ValueError):
    pass


@dataclass
class EvalConfig:
    max_distance: float = 10.0          # per-dataset depth cap, meters
    f_tau_max: float | None = None      # default max_distance / 20
    rho_t_max_deg: float = 15.0         # 15 / 20 / 30 by dataset group
    curve_samples: int = 128

    def __post_init__(self):
        if self.f_tau_max is None:
            self.f_tau_max = self.max_distance / 20.0
        if self.f_tau_max <= 0 or self.rho_t_max_deg <= 0:
            raise ValueError("thresholds must be positive")
        if self.curve_samples < 2:
            raise ValueError("curve_samples must be >= 2")

    def to_dict(self):
        return {
            "max_distance": self.max_distance,
            "f_tau_max": self.f_tau_max,
            "rho_t_max_deg": self.rho_t_max_deg,
            "curve_samples": self.curve_samples,
        }


@dataclass
class MetricsReport:
    delta1: float
    delta2: float
    delta3: float
    delta1_ssi: float
    a_rel: float
    rmse: float
    rmse_log: float
    log10: float
    f_auc: float | None
    rho_auc: float | None
    config: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "delta1": self.delta1,
            "delta2": self.delta2,
            "delta3": self.delta3,
            "delta1_ssi": self.delta1_ssi,
            "a_rel": self.a_rel,
            "rmse": self.rmse,
            "rmse_log": self.rmse_log,
            "log10": self.log10,
            "f_auc": self.f_auc,
            "rho_auc": self.rho_auc,
            "config": self.config,
        }


def _masked(pred, gt, mask):
    pred = np.asarray(pred, dtype=np.float64)
    gt = np.asarray(gt, dtype=np.float64)
    if pred.shape != gt.shape:
        raise ValueError("pred and gt shapes differ")
    if mask is None:
        mask = np.ones(pred.shape, dtype=bool)
    return pred[mask], gt[mask]


def ssi_align(pred, gt, mask=None) -> tuple[float, float]:
    """Closed-form least squares of s * pred + t ~= gt over valid pixels."""
    p, g = _masked(pred, gt, mask)
    if p.size < 2:
        raise AlignmentError("alignment needs at least 2 valid pixels")
    n = p.size
    sp, sg = p.sum(), g.sum()
    spp, spg = (p * p).sum(), (p * g).sum()
    det = n * spp - sp * sp
    if abs(det) < 1e-12 * max(1.0, spp) * n:
        raise AlignmentError("alignment singular: prediction has no spread")
    s = (n * spg - sp * sg) / det
    t = (sg * spp - sp * spg) / det
    return float(s), float(t)


def delta_metrics(pred, gt, mask=None, aligned=False):
    """Percentage of pixels with max(p/g, g/p) < 1.25^i for i = 1, 2, 3.

    With ``aligned=True`` the prediction is first mapped by the closed-form
    scale-and-shift alignment and clamped below at 1e-6.
    """
    p, g = _masked(pred, gt, mask)
    if aligned:
        s, t = ssi_align(pred, gt, mask)
        p = np.clip(s * p + t, 1e-6, None)
    ratio = np.maximum(p / g, g / p)
    return tuple(float(100.0 * np.mean(ratio < 1.25 ** i)) for i in (1, 2, 3))


def standard_suite(pred, gt, mask=None, max_distance=float("inf")):
    """(A.Rel %, RMSE, RMSE_log, log10); excludes gt <= 0 or gt > max_distance."""
    pred = np.asarray(pred, dtype=np.float64)
    gt = np.asarray(gt, dtype=np.float64)
    if mask is None:
        mask = np.ones(pred.shape, dtype=bool)
    mask = mask & (gt > 0) & (gt <= max_distance)
    p, g = pred[mask], gt[mask]
    if p.size == 0:
        raise ValueError("no valid pixels")
    a_rel = float(100.0 * np.mean(np.abs(p - g) / g))
    rmse = float(np.sqrt(np.mean((p - g) ** 2)))
    with np.errstate(divide="ignore", invalid="ignore"):
        ok = p > 0
        rmse_log = float(np.sqrt(np.mean((np.log(p[ok]) - np.log(g[ok])) ** 2)))
        log10 = float(np.mean(np.abs(np.log10(p[ok]) - np.log10(g[ok]))))
    return a_rel, rmse, rmse_log, log10


# --------------------------------------------------------------------------
# Nearest neighbors
# --------------------------------------------------------------------------

def nn_distances_bruteforce(query: np.ndarray, ref: np.ndarray,
                            chunk: int = 512) -> np.ndarray:
    """O(N*M) nearest-neighbor distances; the oracle path."""
    query = np.asarray(query, dtype=np.float64).reshape(-1, 3)
    ref = np.asarray(ref, dtype=np.float64).reshape(-1, 3)
    out = np.empty(len(query))
    for i in range(0, len(query), chunk):
        q = query[i:i + chunk]
        d2 = ((q[:, None, :] - ref[None, :, :]) ** 2).sum(-1)
        out[i:i + chunk] = np.sqrt(d2.min(axis=1))
    return out


class _HashGrid:
    """Uniform spatial hash over 3D points; exact nearest distances."""

    def __init__(self, points: np.ndarray, cell: float):
        self.points = np.asarray(points, dtype=np.float64).reshape(-1, 3)
        self.cell = float(cell)
        self.table: dict[tuple, list[int]] = {}
        keys = np.floor(self.points / self.cell).astype(np.int64)
        for i, key in enumerate(map(tuple, keys)):
            self.table.setdefault(key, []).append(i)
        lo = keys.min(axis=0)
        hi = keys.max(axis=0)
        self.max_shell = int(np.max(hi - lo)) + 1

    def _shell_indices(self, center, s):
        cx, cy, cz = center
        idx: list[int] = []
        if s == 0:
            return self.table.get((cx, cy, cz), [])
        rng = range(-s, s + 1)
        for dx in rng:
            for dy in rng:
                for dz in rng:
                    if max(abs(dx), abs(dy), abs(dz)) != s:
                        continue
                    idx.extend(self.table.get((cx + dx, cy + dy, cz + dz), []))
        return idx

    def nearest_distance(self, q: np.ndarray) -> float:
        center = tuple(int(v) for v in np.floor(q / self.cell))
        best = math.inf
        for s in range(0, self.max_shell + 2):
            idx = self._shell_indices(center, s)
            if idx:
                d = np.linalg.norm(self.points[idx] - q, axis=1).min()
                best = min(best, d)
            # points in shells > s are at least s * cell away
            if best <= s * self.cell:
                break
        return best


def nn_distances(query: np.ndarray, ref: np.ndarray) -> np.ndarray:
    """Nearest-neighbor distance from each query point into ``ref``."""
    query = np.asarray(query, dtype=np.float64).reshape(-1, 3)
    ref = np.asarray(ref, dtype=np.float64).reshape(-1, 3)
    if len(ref) == 0 or len(query) == 0:
        raise ValueError("point clouds must be non-empty")
    if len(ref) <= 64:
        return nn_distances_bruteforce(query, ref)
    extent = np.max(ref.max(axis=0) - ref.min(axis=0))
    cell = max(extent / max(len(ref) ** (1.0 / 3.0), 1.0), 1e-12)
    grid = _HashGrid(ref, cell)
    return np.array([grid.nearest_distance(q) for q in query])


def fscore(pred: PointCloud, gt: PointCloud, tau: float):
    """(precision, recall, f1) at distance threshold tau (inclusive)."""
    d_pred = nn_distances(pred.points, gt.points)
    d_gt = nn_distances(gt.points, pred.points)
    return fscore_from_distances(d_pred, d_gt, tau)


def fscore_from_distances(d_pred, d_gt, tau):
    precision = float(np.mean(d_pred <= tau))
    recall = float(np.mean(d_gt <= tau))
    if precision + recall == 0.0:
        return precision, recall, 0.0
    return precision, recall, 2.0 * precision * recall / (precision + recall)


def f_auc(pred: PointCloud, gt: PointCloud, cfg: EvalConfig) -> float:
    """Trapezoidal AUC of f1(tau) for tau in [0, f_tau_max], as a percentage."""
    d_pred = nn_distances(pred.points, gt.points)
    d_gt = nn_distances(gt.points, pred.points)
    taus = np.linspace(0.0, cfg.f_tau_max, cfg.curve_samples)
    f1 = np.array([fscore_from_distances(d_pred, d_gt, t)[2] for t in taus])
    return float(100.0 * np.trapezoid(f1, taus) / cfg.f_tau_max)


def ray_angular_errors(pred: RayField, gt: RayField) -> np.ndarray:
    """Per-pixel angle (radians) between prediction and reference rays."""
    if pred.dirs.shape != gt.dirs.shape:
        raise ValueError("ray field shapes differ")
    valid = pred.valid & gt.valid
    dots = np.einsum("...i,...i->...", pred.dirs, gt.dirs)[valid]
    return np.arccos(np.clip(dots, -1.0, 1.0))


def rho_auc(pred: RayField, gt: RayField, cfg: EvalConfig) -> float:
    """AUC of the angular-error recall curve up to rho_t_max_deg, percentage."""
    eps = ray_angular_errors(pred, gt)
    if eps.size == 0:
        raise ValueError("no jointly valid pixels")
    t_max = math.radians(cfg.rho_t_max_deg)
    ts = np.linspace(0.0, t_max, cfg.curve_samples)
    curve = np.array([np.mean(eps <= t) for t in ts])
    return float(100.0 * np.trapezoid(curve, ts) / t_max)


def evaluate(pred_radius, gt_radius, mask=None,
             pred_rays: RayField | None = None, gt_rays: RayField | None = None,
             pred_points: PointCloud | None = None, gt_points: PointCloud | None = None,
             cfg: EvalConfig = EvalConfig()) -> MetricsReport:
    """Assemble the full report from dense range maps and optional geometry."""
    d1, d2, d3 = delta_metrics(pred_radius, gt_radius, mask)
    d1_ssi = delta_metrics(pred_radius, gt_radius, mask, aligned=True)[0]
    a_rel, rmse, rmse_log, log10 = standard_suite(
        pred_radius, gt_radius, mask, cfg.max_distance
    )
    f_score_auc = None
    if pred_points is not None and gt_points is not None:
        f_score_auc = f_auc(pred_points, gt_points, cfg)
    ray_auc = None
    if pred_rays is not None and gt_rays is not None:
        ray_auc = rho_auc(pred_rays, gt_rays, cfg)
    return MetricsReport(d1, d2, d3, d1_ssi, a_rel, rmse, rmse_log, log10,
                         f_score_auc, ray_auc, cfg.to_dict())
