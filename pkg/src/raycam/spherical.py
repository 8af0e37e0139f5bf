"""Fully spherical output space: dense field containers and conversions.

The toolkit keeps scene range as Euclidean radius (distance from the camera
center) rather than perpendicular depth; the two are related by z = r*cos(theta)
with theta the polar angle of the pixel's viewing ray. Depth-based quantities
are ill-defined for rays at or beyond the xy-plane, so conversions mask rather
than clamp near cos(theta) = 0.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

# Rays closer than this to the xy-plane have no usable depth->radius conversion.
COS_THETA_CUTOFF = 1e-6


class ShapeMismatchError(ValueError):
    """Raised when dense fields of incompatible sizes are combined."""


def _check_hw(name: str, arr: np.ndarray, height: int, width: int) -> None:
    if arr.shape[:2] != (height, width):
        raise ShapeMismatchError(
            f"{name}: expected leading shape {(height, width)}, got {arr.shape}"
        )


@dataclass
class RayField:
    """Per-pixel unit viewing directions with a validity mask.

    ``dirs`` has shape (H, W, 3) with the camera looking along +z, +x right,
    +y down. Invalid pixels are those outside the camera's representable field
    of view or where unprojection failed.
    """

    width: int
    height: int
    dirs: np.ndarray
    valid: np.ndarray

    def __post_init__(self):
        _check_hw("dirs", self.dirs, self.height, self.width)
        _check_hw("valid", self.valid, self.height, self.width)


@dataclass
class AngularField:
    """Per-pixel spherical angles: polar theta in [0, pi], azimuth phi in (-pi, pi]."""

    width: int
    height: int
    theta: np.ndarray
    phi: np.ndarray
    valid: np.ndarray

    def __post_init__(self):
        for name in ("theta", "phi", "valid"):
            _check_hw(name, getattr(self, name), self.height, self.width)


@dataclass
class RadiusMap:
    """Per-pixel Euclidean distance from the camera center, meters."""

    width: int
    height: int
    r: np.ndarray
    valid: np.ndarray

    def __post_init__(self):
        _check_hw("r", self.r, self.height, self.width)
        _check_hw("valid", self.valid, self.height, self.width)


@dataclass
class DepthMap:
    """Per-pixel perpendicular depth, meters. May be negative for rays with theta > pi/2."""

    width: int
    height: int
    z: np.ndarray
    valid: np.ndarray

    def __post_init__(self):
        _check_hw("z", self.z, self.height, self.width)
        _check_hw("valid", self.valid, self.height, self.width)


@dataclass
class PointCloud:
    """A bag of 3D points in meters, optionally tagged with source pixels (N, 2)."""

    points: np.ndarray
    pixels: np.ndarray | None = None

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=np.float64).reshape(-1, 3)
        if self.pixels is not None:
            self.pixels = np.asarray(self.pixels).reshape(-1, 2)


@dataclass
class ConfidenceMap:
    """Per-pixel positive confidence scale (inverse-confidence convention)."""

    width: int
    height: int
    sigma: np.ndarray

    def __post_init__(self):
        _check_hw("sigma", self.sigma, self.height, self.width)


def rays_to_angles(rays: RayField) -> AngularField:
    """Spherical angles of a ray field: theta = arccos(z), phi = atan2(y, x)."""
    x, y, z = rays.dirs[..., 0], rays.dirs[..., 1], rays.dirs[..., 2]
    theta = np.arccos(np.clip(z, -1.0, 1.0))
    phi = np.arctan2(y, x)
    return AngularField(rays.width, rays.height, theta, phi, rays.valid.copy())


def angles_to_rays(angles: AngularField) -> RayField:
    st = np.sin(angles.theta)
    dirs = np.stack(
        [st * np.cos(angles.phi), st * np.sin(angles.phi), np.cos(angles.theta)],
        axis=-1,
    )
    return RayField(angles.width, angles.height, dirs, angles.valid.copy())


def spherical_to_cartesian(angles: AngularField, radius: RadiusMap) -> PointCloud:
    """Point = r * (sin t cos p, sin t sin p, cos t) per valid pixel."""
    if (angles.height, angles.width) != (radius.height, radius.width):
        raise ShapeMismatchError("angles and radius sizes differ")
    valid = angles.valid & radius.valid
    vv, uu = np.nonzero(valid)
    t = angles.theta[vv, uu]
    p = angles.phi[vv, uu]
    r = radius.r[vv, uu]
    st = np.sin(t)
    pts = np.stack([r * st * np.cos(p), r * st * np.sin(p), r * np.cos(t)], axis=-1)
    return PointCloud(pts, pixels=np.stack([uu, vv], axis=-1))


def cartesian_to_spherical(
    pc: PointCloud, width: int, height: int
) -> tuple[AngularField, RadiusMap]:
    """Inverse of :func:`spherical_to_cartesian` on r > 0.

    Points are scattered back onto a (height, width) grid via their source
    pixels; ``pc.pixels`` is required for the assignment.
    """
    pts = pc.points
    r = np.linalg.norm(pts, axis=-1)
    if np.any(r == 0.0):
        raise ValueError("origin point: zero-norm points have no angles")
    if pc.pixels is None:
        raise ValueError("point cloud carries no pixel assignment")
    theta = np.arccos(np.clip(pts[:, 2] / r, -1.0, 1.0))
    phi = np.arctan2(pts[:, 1], pts[:, 0])
    uu = pc.pixels[:, 0].astype(int)
    vv = pc.pixels[:, 1].astype(int)
    tmap = np.zeros((height, width))
    pmap = np.zeros((height, width))
    rmap = np.zeros((height, width))
    valid = np.zeros((height, width), dtype=bool)
    tmap[vv, uu] = theta
    pmap[vv, uu] = phi
    rmap[vv, uu] = r
    valid[vv, uu] = True
    return (
        AngularField(width, height, tmap, pmap, valid),
        RadiusMap(width, height, rmap, valid.copy()),
    )


def depth_to_radius(depth: DepthMap, rays: RayField) -> RadiusMap:
    """r = z / cos(theta); pixels with cos(theta) <= cutoff become invalid."""
    if (depth.height, depth.width) != (rays.height, rays.width):
        raise ShapeMismatchError("depth and rays sizes differ")
    cos_t = rays.dirs[..., 2]
    ok = depth.valid & rays.valid & (cos_t > COS_THETA_CUTOFF)
    r = np.zeros_like(depth.z, dtype=np.float64)
    np.divide(depth.z, cos_t, out=r, where=ok)
    return RadiusMap(depth.width, depth.height, r, ok)


def radius_to_depth(radius: RadiusMap, rays: RayField) -> DepthMap:
    """z = r * cos(theta); stays valid across the xy-plane (depth may be <= 0)."""
    if (radius.height, radius.width) != (rays.height, rays.width):
        raise ShapeMismatchError("radius and rays sizes differ")
    ok = radius.valid & rays.valid
    z = np.where(ok, radius.r * rays.dirs[..., 2], 0.0)
    return DepthMap(radius.width, radius.height, z, ok)
