"""Camera augmentation: deformation fields between cameras sharing an optical
center, and forward warping by softmax splatting with inverse-depth importance.

Splatting deposits each source pixel onto the 4 bilinear neighbors of its
target location with weight bilinear * exp(lambda * importance), accumulated
in fixed raster order so outputs are bit-reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cameras import Camera, CameraSamplingSpec, sample_camera
from .spherical import DepthMap, RadiusMap, ShapeMismatchError, depth_to_radius

DEFAULT_LAMBDA = 50.0
HOLE_EPS = 1e-12


@dataclass
class DeformationField:
    """Per-pixel flow (du, dv) in pixels from source to target camera."""

    width: int
    height: int
    flow: np.ndarray
    valid: np.ndarray


@dataclass
class DistortedSample:
    rgb: np.ndarray
    radius: RadiusMap
    holes: np.ndarray
    target_camera: Camera
    source_camera: Camera


def deformation_field(src: Camera, tgt: Camera, depth: DepthMap) -> DeformationField:
    """Unproject source depth to 3D, reproject through the target camera."""
    if (depth.height, depth.width) != (src.height, src.width):
        raise ShapeMismatchError("depth size does not match source camera")
    rays = src.ray_field()
    radius = depth_to_radius(depth, rays)
    pts = rays.dirs * radius.r[..., None]
    pix_tgt, ok_proj = tgt.project(pts.reshape(-1, 3))
    pix_tgt = pix_tgt.reshape(depth.height, depth.width, 2)
    ok_proj = ok_proj.reshape(depth.height, depth.width)
    uu, vv = np.meshgrid(
        np.arange(src.width) + 0.5, np.arange(src.height) + 0.5
    )
    flow = pix_tgt - np.stack([uu, vv], axis=-1)
    valid = radius.valid & ok_proj
    flow = np.where(valid[..., None], flow, 0.0)
    return DeformationField(src.width, src.height, flow, valid)


def softmax_splat(values: np.ndarray, flow: DeformationField,
                  importance: np.ndarray, lam: float = DEFAULT_LAMBDA,
                  out_size: tuple[int, int] | None = None):
    """Forward-warp ``values`` (H, W) or (H, W, C) along ``flow``.

    ``importance`` should be pre-normalized to [0, 1]; ``lam`` >= 0 controls
    how strongly high-importance (near) pixels win collisions. Returns
    (warped, hole_mask) where holes are pixels with no accumulated weight.
    """
    vals = np.asarray(values, dtype=np.float64)
    squeeze = vals.ndim == 2
    if squeeze:
        vals = vals[..., None]
    h, w = vals.shape[:2]
    if (flow.height, flow.width) != (h, w):
        raise ShapeMismatchError("flow size does not match values")
    imp = np.asarray(importance, dtype=np.float64)
    if imp.shape != (h, w):
        raise ShapeMismatchError("importance size does not match values")
    if lam < 0:
        raise ValueError("lambda must be non-negative")
    out_h, out_w = out_size if out_size is not None else (h, w)

    uu, vv = np.meshgrid(np.arange(w) + 0.5, np.arange(h) + 0.5)
    tx = (uu + flow.flow[..., 0]).ravel()
    ty = (vv + flow.flow[..., 1]).ravel()
    ok = flow.valid.ravel()

    j0 = np.floor(tx - 0.5).astype(np.int64)
    i0 = np.floor(ty - 0.5).astype(np.int64)
    fx = tx - 0.5 - j0
    fy = ty - 0.5 - i0
    base_w = np.exp(lam * imp.ravel())

    num = np.zeros((out_h, out_w, vals.shape[2]))
    den = np.zeros((out_h, out_w))
    flat_vals = vals.reshape(-1, vals.shape[2])
    for di, dj, wgt in (
        (0, 0, (1 - fy) * (1 - fx)),
        (0, 1, (1 - fy) * fx),
        (1, 0, fy * (1 - fx)),
        (1, 1, fy * fx),
    ):
        ii = i0 + di
        jj = j0 + dj
        keep = ok & (ii >= 0) & (ii < out_h) & (jj >= 0) & (jj < out_w) & (wgt > 0)
        idx = ii[keep] * out_w + jj[keep]
        contrib = wgt[keep] * base_w[keep]
        np.add.at(den.ravel(), idx, contrib)
        np.add.at(num.reshape(-1, vals.shape[2]), idx,
                  contrib[:, None] * flat_vals[keep])
    holes = den <= HOLE_EPS
    out = np.where(holes[..., None], 0.0, num / np.where(holes, 1.0, den)[..., None])
    if squeeze:
        out = out[..., 0]
    return out, holes


def normalized_inverse_depth(depth: DepthMap) -> np.ndarray:
    """Min-max normalized 1/depth over valid pixels; 0 elsewhere."""
    inv = np.zeros_like(depth.z, dtype=np.float64)
    ok = depth.valid & (depth.z > 0)
    inv[ok] = 1.0 / depth.z[ok]
    if np.any(ok):
        lo, hi = inv[ok].min(), inv[ok].max()
        if hi > lo:
            inv[ok] = (inv[ok] - lo) / (hi - lo)
        else:
            inv[ok] = 1.0
    return inv


def make_distorted_sample(rgb: np.ndarray, depth: DepthMap, src: Camera,
                          spec: CameraSamplingSpec, lam: float = DEFAULT_LAMBDA,
                          rng: np.random.Generator | None = None) -> DistortedSample:
    """Sample a target camera, warp the image and the radius map onto it.

    The radius map is invariant to the camera model (shared center and
    orientation), so the warped radius remains metrically correct ground
    truth for the target camera. Depth is expected dense; hole filling is the
    caller's responsibility.
    """
    if rng is None:
        rng = np.random.default_rng(spec.seed)
    tgt = sample_camera(spec, src, rng)
    flow = deformation_field(src, tgt, depth)
    importance = normalized_inverse_depth(depth)
    radius_src = depth_to_radius(depth, src.ray_field())
    warped_rgb, holes_rgb = softmax_splat(
        np.asarray(rgb, dtype=np.float64), flow, importance, lam
    )
    warped_r, holes_r = softmax_splat(radius_src.r, flow, importance, lam)
    holes = holes_rgb | holes_r
    radius = RadiusMap(src.width, src.height, warped_r, ~holes)
    return DistortedSample(warped_rgb, radius, holes, tgt, src)
