"""Parametric camera zoo: forward projection, unprojection, dense ray fields.

Conventions: +z is the optical axis, +x right, +y down (image raster order).
Integer pixel (u, v) samples the continuous image point (u + 0.5, v + 0.5).
``project`` returns continuous pixel coordinates; out-of-domain points are
reported through per-point validity flags, never exceptions, and invalid
pixels are set to (-1, -1) so no NaN escapes.

Models with a polynomial radial profile (Kannala-Brandt, Fisheye624, the
radial part of Mei) are inverted by safeguarded Newton iteration with a
bisection fallback, bracketed by the first stationary point of the profile:
the representable field of view of those models is parameter-dependent and is
detected, not assumed.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field, fields as dc_fields

import numpy as np

from .spherical import RayField

NEWTON_TOL = 1e-10
NEWTON_ITERS = 50


class CameraError(ValueError):
    pass


class UnknownModelError(CameraError):
    """Camera JSON named a family this toolkit does not know."""


def _as_points(points) -> np.ndarray:
    pts = np.asarray(points, dtype=np.float64)
    return pts.reshape(-1, 3)


def _as_pixels(pixels) -> np.ndarray:
    pix = np.asarray(pixels, dtype=np.float64)
    return pix.reshape(-1, 2)


def _normalize(v: np.ndarray) -> np.ndarray:
    n = np.linalg.norm(v, axis=-1, keepdims=True)
    n = np.where(n > 0, n, 1.0)
    return v / n


def _finish_projection(u, v, valid, width, height):
    inside = (u >= 0.0) & (u <= width) & (v >= 0.0) & (v <= height)
    valid = valid & inside & np.isfinite(u) & np.isfinite(v)
    pix = np.stack([np.where(valid, u, -1.0), np.where(valid, v, -1.0)], axis=-1)
    return pix, valid


def _finish_rays(dirs, valid):
    valid = valid & np.all(np.isfinite(dirs), axis=-1)
    dirs = np.where(valid[..., None], _normalize(np.nan_to_num(dirs)), 0.0)
    return dirs, valid


def _first_stationary_theta(poly_k: np.ndarray) -> float:
    """Smallest theta > 0 where d/dtheta [theta + sum k_i theta^(2i+1)] vanishes.

    Returns pi when the profile is monotone on (0, pi].
    """
    # derivative is a polynomial in t = theta^2: 1 + 3 k1 t + 5 k2 t^2 + ...
    deriv = [1.0] + [(2 * i + 3) * k for i, k in enumerate(poly_k)]
    if not any(c != 0.0 for c in deriv[1:]):
        return math.pi
    roots = np.roots(deriv[::-1])
    best = math.pi
    for r in roots:
        if abs(r.imag) < 1e-12 and r.real > 0:
            best = min(best, math.sqrt(r.real))
    return best


def _eval_odd_poly(poly_k, theta):
    t2 = theta * theta
    d = np.ones_like(theta)
    acc = np.ones_like(theta)
    for k in poly_k:
        acc = acc * t2
        d = d + k * acc
    return theta * d


def _eval_odd_poly_deriv(poly_k, theta):
    t2 = theta * theta
    d = np.ones_like(theta)
    acc = np.ones_like(theta)
    for i, k in enumerate(poly_k):
        acc = acc * t2
        d = d + (2 * i + 3) * k * acc
    return d


def invert_odd_poly(poly_k, r_target, theta_max, tol=NEWTON_TOL, iters=NEWTON_ITERS):
    """Solve d(theta) = r on [0, theta_max] by safeguarded Newton.

    d(theta) = theta + sum_i k_i theta^(2i+1), monotone on the bracket.
    Returns (theta, converged); targets beyond d(theta_max) never converge.
    """
    r = np.asarray(r_target, dtype=np.float64)
    r_max = float(_eval_odd_poly(poly_k, np.asarray(theta_max)))
    in_range = (r >= 0.0) & (r <= r_max)
    lo = np.zeros_like(r)
    hi = np.full_like(r, theta_max)
    theta = np.clip(r, 0.0, theta_max)
    res = _eval_odd_poly(poly_k, theta) - r
    for _ in range(iters):
        done = np.abs(res) < tol
        if np.all(done | ~in_range):
            break
        lo = np.where(res < 0, theta, lo)
        hi = np.where(res > 0, theta, hi)
        deriv = _eval_odd_poly_deriv(poly_k, theta)
        with np.errstate(divide="ignore", invalid="ignore"):
            step = np.where(deriv != 0, res / deriv, np.inf)
        cand = theta - step
        bad = ~np.isfinite(cand) | (cand <= lo) | (cand >= hi)
        cand = np.where(bad, 0.5 * (lo + hi), cand)
        theta = np.where(done, theta, cand)
        res = _eval_odd_poly(poly_k, theta) - r
    converged = in_range & (np.abs(res) < tol)
    return theta, converged


def bisect_odd_poly(poly_k, r_target, theta_max, tol=1e-12, iters=200):
    """Pure-bisection oracle for the same radial inversion problem."""
    r = np.asarray(r_target, dtype=np.float64)
    lo = np.zeros_like(r)
    hi = np.full_like(r, theta_max)
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        res = _eval_odd_poly(poly_k, mid) - r
        lo = np.where(res < 0, mid, lo)
        hi = np.where(res >= 0, mid, hi)
        if np.max(hi - lo) < tol:
            break
    return 0.5 * (lo + hi)


@dataclass
class Camera:
    width: int
    height: int

    FAMILY = "base"

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise CameraError("image size must be at least 1x1")
        self._validate()

    def _validate(self):
        fx = getattr(self, "fx", None)
        fy = getattr(self, "fy", None)
        if fx is not None and fx <= 0:
            raise CameraError("fx must be positive")
        if fy is not None and fy <= 0:
            raise CameraError("fy must be positive")

    # -- interface -----------------------------------------------------------
    def project(self, points):
        raise NotImplementedError

    def unproject(self, pixels):
        raise NotImplementedError

    def ray_field(self) -> RayField:
        """Unproject every pixel center (u + 0.5, v + 0.5)."""
        uu, vv = np.meshgrid(
            np.arange(self.width) + 0.5, np.arange(self.height) + 0.5
        )
        pix = np.stack([uu.ravel(), vv.ravel()], axis=-1)
        dirs, valid = self.unproject(pix)
        return RayField(
            self.width,
            self.height,
            dirs.reshape(self.height, self.width, 3),
            valid.reshape(self.height, self.width),
        )

    # -- JSON schema ---------------------------------------------------------
    def to_dict(self) -> dict:
        params = {
            f.name: getattr(self, f.name)
            for f in dc_fields(self)
            if f.name not in ("width", "height")
        }
        return {
            "model": self.FAMILY,
            "width": self.width,
            "height": self.height,
            "params": params,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Camera":
        family = data.get("model")
        if family not in CAMERA_FAMILIES:
            raise UnknownModelError(f"unknown camera model {family!r}")
        klass = CAMERA_FAMILIES[family]
        try:
            return klass(width=int(data["width"]), height=int(data["height"]),
                         **{k: float(v) for k, v in data.get("params", {}).items()})
        except TypeError as exc:
            raise CameraError(f"bad parameters for {family}: {exc}") from exc

    def save_json(self, path):
        tmp = f"{os.fspath(path)}.tmp{os.getpid()}"
        with open(tmp, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2)
            fh.write("\n")
        os.replace(tmp, path)


def load_camera_json(path) -> Camera:
    with open(path) as fh:
        return Camera.from_dict(json.load(fh))


@dataclass
class Pinhole(Camera):
    fx: float = 1.0
    fy: float = 1.0
    cx: float = 0.0
    cy: float = 0.0

    FAMILY = "pinhole"

    def project(self, points):
        p = _as_points(points)
        x, y, z = p[:, 0], p[:, 1], p[:, 2]
        valid = z > 0
        zs = np.where(valid, z, 1.0)
        u = self.fx * x / zs + self.cx
        v = self.fy * y / zs + self.cy
        return _finish_projection(u, v, valid, self.width, self.height)

    def unproject(self, pixels):
        pix = _as_pixels(pixels)
        mx = (pix[:, 0] - self.cx) / self.fx
        my = (pix[:, 1] - self.cy) / self.fy
        dirs = np.stack([mx, my, np.ones_like(mx)], axis=-1)
        return _finish_rays(dirs, np.ones(len(pix), dtype=bool))


@dataclass
class KannalaBrandt(Camera):
    fx: float = 1.0
    fy: float = 1.0
    cx: float = 0.0
    cy: float = 0.0
    k1: float = 0.0
    k2: float = 0.0
    k3: float = 0.0
    k4: float = 0.0

    FAMILY = "kannala_brandt"

    @property
    def _poly(self):
        return (self.k1, self.k2, self.k3, self.k4)

    @property
    def theta_max(self) -> float:
        return _first_stationary_theta(np.array(self._poly))

    def project(self, points):
        p = _as_points(points)
        x, y, z = p[:, 0], p[:, 1], p[:, 2]
        rho = np.hypot(x, y)
        theta = np.arctan2(rho, z)
        valid = theta <= self.theta_max
        d = _eval_odd_poly(self._poly, theta)
        rho_safe = np.where(rho > 0, rho, 1.0)
        u = self.fx * d * np.where(rho > 0, x / rho_safe, 0.0) + self.cx
        v = self.fy * d * np.where(rho > 0, y / rho_safe, 0.0) + self.cy
        return _finish_projection(u, v, valid, self.width, self.height)

    def unproject(self, pixels):
        pix = _as_pixels(pixels)
        mx = (pix[:, 0] - self.cx) / self.fx
        my = (pix[:, 1] - self.cy) / self.fy
        r = np.hypot(mx, my)
        theta, ok = invert_odd_poly(self._poly, r, self.theta_max)
        r_safe = np.where(r > 0, r, 1.0)
        st = np.sin(theta)
        dirs = np.stack(
            [
                np.where(r > 0, st * mx / r_safe, 0.0),
                np.where(r > 0, st * my / r_safe, 0.0),
                np.cos(theta),
            ],
            axis=-1,
        )
        return _finish_rays(dirs, ok)


@dataclass
class UCM(Camera):
    """Unified camera model with sphere offset xi."""

    fx: float = 1.0
    fy: float = 1.0
    cx: float = 0.0
    cy: float = 0.0
    xi: float = 0.0

    FAMILY = "ucm"

    def project(self, points):
        p = _as_points(points)
        x, y, z = p[:, 0], p[:, 1], p[:, 2]
        d = np.linalg.norm(p, axis=-1)
        xi = self.xi
        w = min(xi, 1.0 / xi) if xi > 0 else 0.0
        valid = (z > -w * d) if xi > 0 else (z > 0)
        denom = xi * d + z
        denom = np.where(np.abs(denom) > 1e-15, denom, 1e-15)
        u = self.fx * x / denom + self.cx
        v = self.fy * y / denom + self.cy
        return _finish_projection(u, v, valid, self.width, self.height)

    def unproject(self, pixels):
        pix = _as_pixels(pixels)
        mx = (pix[:, 0] - self.cx) / self.fx
        my = (pix[:, 1] - self.cy) / self.fy
        r2 = mx * mx + my * my
        xi = self.xi
        disc = 1.0 + (1.0 - xi * xi) * r2
        valid = disc >= 0.0
        factor = (xi + np.sqrt(np.clip(disc, 0.0, None))) / (1.0 + r2)
        dirs = np.stack([factor * mx, factor * my, factor - xi], axis=-1)
        return _finish_rays(dirs, valid)


@dataclass
class EUCM(Camera):
    """Enhanced unified camera model; alpha=0, beta=1 reduces to pinhole."""

    fx: float = 1.0
    fy: float = 1.0
    cx: float = 0.0
    cy: float = 0.0
    alpha: float = 0.0
    beta: float = 1.0

    FAMILY = "eucm"

    def _validate(self):
        super()._validate()
        if not 0.0 <= self.alpha <= 1.0:
            raise CameraError("EUCM alpha must be in [0, 1]")
        if self.beta <= 0.0:
            raise CameraError("EUCM beta must be positive")

    def project(self, points):
        p = _as_points(points)
        x, y, z = p[:, 0], p[:, 1], p[:, 2]
        a = self.alpha
        d = np.sqrt(self.beta * (x * x + y * y) + z * z)
        w = a / (1.0 - a) if a <= 0.5 else (1.0 - a) / a
        valid = z > -w * d if a > 0 else z > 0
        denom = a * d + (1.0 - a) * z
        denom = np.where(np.abs(denom) > 1e-15, denom, 1e-15)
        u = self.fx * x / denom + self.cx
        v = self.fy * y / denom + self.cy
        return _finish_projection(u, v, valid, self.width, self.height)

    def unproject(self, pixels):
        pix = _as_pixels(pixels)
        mx = (pix[:, 0] - self.cx) / self.fx
        my = (pix[:, 1] - self.cy) / self.fy
        r2 = mx * mx + my * my
        a, b = self.alpha, self.beta
        disc = 1.0 - (2.0 * a - 1.0) * b * r2
        valid = disc >= 0.0
        mz = (1.0 - b * a * a * r2) / (
            a * np.sqrt(np.clip(disc, 0.0, None)) + (1.0 - a)
        )
        dirs = np.stack([mx, my, mz], axis=-1)
        return _finish_rays(dirs, valid)


@dataclass
class DoubleSphere(Camera):
    fx: float = 1.0
    fy: float = 1.0
    cx: float = 0.0
    cy: float = 0.0
    xi: float = 0.0
    alpha: float = 0.0

    FAMILY = "double_sphere"

    def _validate(self):
        super()._validate()
        if not 0.0 <= self.alpha <= 1.0:
            raise CameraError("DoubleSphere alpha must be in [0, 1]")

    def project(self, points):
        p = _as_points(points)
        x, y, z = p[:, 0], p[:, 1], p[:, 2]
        xi, a = self.xi, self.alpha
        d1 = np.linalg.norm(p, axis=-1)
        zs = xi * d1 + z
        d2 = np.sqrt(x * x + y * y + zs * zs)
        w1 = a / (1.0 - a) if a <= 0.5 else (1.0 - a) / a
        w2 = (w1 + xi) / math.sqrt(2.0 * w1 * xi + xi * xi + 1.0)
        valid = z > -w2 * d1
        denom = a * d2 + (1.0 - a) * zs
        denom = np.where(np.abs(denom) > 1e-15, denom, 1e-15)
        u = self.fx * x / denom + self.cx
        v = self.fy * y / denom + self.cy
        return _finish_projection(u, v, valid, self.width, self.height)

    def unproject(self, pixels):
        pix = _as_pixels(pixels)
        mx = (pix[:, 0] - self.cx) / self.fx
        my = (pix[:, 1] - self.cy) / self.fy
        r2 = mx * mx + my * my
        xi, a = self.xi, self.alpha
        disc = 1.0 - (2.0 * a - 1.0) * r2
        valid = disc >= 0.0
        mz = (1.0 - a * a * r2) / (a * np.sqrt(np.clip(disc, 0.0, None)) + 1.0 - a)
        scale = (mz * xi + np.sqrt(mz * mz + (1.0 - xi * xi) * r2)) / (mz * mz + r2)
        dirs = np.stack([scale * mx, scale * my, scale * mz - xi], axis=-1)
        return _finish_rays(dirs, valid)


def _radial_tangential(mx, my, k1, k2, t1, t2):
    r2 = mx * mx + my * my
    radial = 1.0 + k1 * r2 + k2 * r2 * r2
    dx = 2.0 * t1 * mx * my + t2 * (r2 + 2.0 * mx * mx)
    dy = t1 * (r2 + 2.0 * my * my) + 2.0 * t2 * mx * my
    return mx * radial + dx, my * radial + dy


@dataclass
class Mei(Camera):
    """Unified model plus radial-tangential distortion on the normalized plane."""

    fx: float = 1.0
    fy: float = 1.0
    cx: float = 0.0
    cy: float = 0.0
    xi: float = 0.0
    k1: float = 0.0
    k2: float = 0.0
    t1: float = 0.0
    t2: float = 0.0

    FAMILY = "mei"

    def _ucm(self):
        # identity intrinsics: the helper operates on m-plane coordinates
        return UCM(self.width, self.height, 1.0, 1.0, 0.0, 0.0, self.xi)

    def project(self, points):
        p = _as_points(points)
        x, y, z = p[:, 0], p[:, 1], p[:, 2]
        xi = self.xi
        d = np.linalg.norm(p, axis=-1)
        w = min(xi, 1.0 / xi) if xi > 0 else 0.0
        valid = (z > -w * d) if xi > 0 else (z > 0)
        denom = xi * d + z
        denom = np.where(np.abs(denom) > 1e-15, denom, 1e-15)
        mx, my = x / denom, y / denom
        dx, dy = _radial_tangential(mx, my, self.k1, self.k2, self.t1, self.t2)
        u = self.fx * dx + self.cx
        v = self.fy * dy + self.cy
        return _finish_projection(u, v, valid, self.width, self.height)

    def unproject(self, pixels):
        pix = _as_pixels(pixels)
        dx = (pix[:, 0] - self.cx) / self.fx
        dy = (pix[:, 1] - self.cy) / self.fy
        mx, my, ok = _undistort_plane(
            dx, dy, self.k1, self.k2, self.t1, self.t2, 0.0, 0.0, 0.0, 0.0
        )
        dirs, valid = self._ucm().unproject(
            np.stack([mx, my], axis=-1)
        )
        return dirs, valid & ok


def _undistort_plane(dx, dy, k1, k2, t1, t2, s1, s2, s3, s4,
                     tol=NEWTON_TOL, iters=NEWTON_ITERS):
    """Invert radial/tangential/thin-prism distortion by fixed-point iteration."""
    mx, my = dx.copy(), dy.copy()
    for _ in range(iters):
        r2 = mx * mx + my * my
        radial = 1.0 + k1 * r2 + k2 * r2 * r2
        ex = 2.0 * t1 * mx * my + t2 * (r2 + 2.0 * mx * mx) + s1 * r2 + s2 * r2 * r2
        ey = t1 * (r2 + 2.0 * my * my) + 2.0 * t2 * mx * my + s3 * r2 + s4 * r2 * r2
        nx = (dx - ex) / radial
        ny = (dy - ey) / radial
        if np.max(np.abs(nx - mx)) < tol and np.max(np.abs(ny - my)) < tol:
            mx, my = nx, ny
            break
        mx, my = nx, ny
    # converged where re-distorting lands back on the target
    r2 = mx * mx + my * my
    radial = 1.0 + k1 * r2 + k2 * r2 * r2
    ex = 2.0 * t1 * mx * my + t2 * (r2 + 2.0 * mx * mx) + s1 * r2 + s2 * r2 * r2
    ey = t1 * (r2 + 2.0 * my * my) + 2.0 * t2 * mx * my + s3 * r2 + s4 * r2 * r2
    ok = (np.abs(mx * radial + ex - dx) < 1e-9) & (np.abs(my * radial + ey - dy) < 1e-9)
    return mx, my, ok


@dataclass
class Fisheye624(Camera):
    """Six odd radial terms on the polar angle, then tangential (t1, t2) and
    thin-prism (s1..s4) terms applied on the distorted normalized coordinates.
    The parameter grouping follows the {k}6 / {t}2 / {s}4 split; no claim of
    bit-compatibility with any vendor tooling is made.
    """

    fx: float = 1.0
    fy: float = 1.0
    cx: float = 0.0
    cy: float = 0.0
    k1: float = 0.0
    k2: float = 0.0
    k3: float = 0.0
    k4: float = 0.0
    k5: float = 0.0
    k6: float = 0.0
    t1: float = 0.0
    t2: float = 0.0
    s1: float = 0.0
    s2: float = 0.0
    s3: float = 0.0
    s4: float = 0.0

    FAMILY = "fisheye624"

    @property
    def _poly(self):
        return (self.k1, self.k2, self.k3, self.k4, self.k5, self.k6)

    @property
    def theta_max(self) -> float:
        return _first_stationary_theta(np.array(self._poly))

    def _extra(self, mx, my):
        r2 = mx * mx + my * my
        ex = (2.0 * self.t1 * mx * my + self.t2 * (r2 + 2.0 * mx * mx)
              + self.s1 * r2 + self.s2 * r2 * r2)
        ey = (self.t1 * (r2 + 2.0 * my * my) + 2.0 * self.t2 * mx * my
              + self.s3 * r2 + self.s4 * r2 * r2)
        return ex, ey

    def project(self, points):
        p = _as_points(points)
        x, y, z = p[:, 0], p[:, 1], p[:, 2]
        rho = np.hypot(x, y)
        theta = np.arctan2(rho, z)
        valid = theta <= self.theta_max
        rd = _eval_odd_poly(self._poly, theta)
        rho_safe = np.where(rho > 0, rho, 1.0)
        mx = rd * np.where(rho > 0, x / rho_safe, 0.0)
        my = rd * np.where(rho > 0, y / rho_safe, 0.0)
        ex, ey = self._extra(mx, my)
        u = self.fx * (mx + ex) + self.cx
        v = self.fy * (my + ey) + self.cy
        return _finish_projection(u, v, valid, self.width, self.height)

    def unproject(self, pixels):
        pix = _as_pixels(pixels)
        dx = (pix[:, 0] - self.cx) / self.fx
        dy = (pix[:, 1] - self.cy) / self.fy
        mx, my, ok = _undistort_plane(
            dx, dy, 0.0, 0.0, self.t1, self.t2,
            self.s1, self.s2, self.s3, self.s4,
        )
        r = np.hypot(mx, my)
        theta, conv = invert_odd_poly(self._poly, r, self.theta_max)
        r_safe = np.where(r > 0, r, 1.0)
        st = np.sin(theta)
        dirs = np.stack(
            [
                np.where(r > 0, st * mx / r_safe, 0.0),
                np.where(r > 0, st * my / r_safe, 0.0),
                np.cos(theta),
            ],
            axis=-1,
        )
        return _finish_rays(dirs, ok & conv)


@dataclass
class Equirectangular(Camera):
    """Longitude/latitude panorama; hfov = 2*pi, vfov = pi covers the sphere."""

    hfov: float = 2.0 * math.pi
    vfov: float = math.pi

    FAMILY = "equirectangular"

    def _validate(self):
        if not 0.0 < self.hfov <= 2.0 * math.pi:
            raise CameraError("hfov must be in (0, 2*pi]")
        if not 0.0 < self.vfov <= math.pi:
            raise CameraError("vfov must be in (0, pi]")

    def project(self, points):
        p = _as_points(points)
        x, y, z = p[:, 0], p[:, 1], p[:, 2]
        n = np.linalg.norm(p, axis=-1)
        valid = n > 0
        a = np.arctan2(x, z)
        b = np.arcsin(np.clip(np.where(valid, y / np.where(valid, n, 1.0), 0.0), -1, 1))
        valid &= (np.abs(a) <= self.hfov / 2) & (np.abs(b) <= self.vfov / 2)
        u = (a / self.hfov + 0.5) * self.width
        v = (b / self.vfov + 0.5) * self.height
        return _finish_projection(u, v, valid, self.width, self.height)

    def unproject(self, pixels):
        pix = _as_pixels(pixels)
        a = (pix[:, 0] / self.width - 0.5) * self.hfov
        b = (pix[:, 1] / self.height - 0.5) * self.vfov
        dirs = np.stack(
            [np.sin(a) * np.cos(b), np.sin(b), np.cos(a) * np.cos(b)], axis=-1
        )
        return _finish_rays(dirs, np.ones(len(pix), dtype=bool))


CAMERA_FAMILIES: dict[str, type] = {
    c.FAMILY: c
    for c in (
        Pinhole,
        KannalaBrandt,
        UCM,
        EUCM,
        DoubleSphere,
        Mei,
        Fisheye624,
        Equirectangular,
    )
}


def project(cam: Camera, points):
    return cam.project(points)


def unproject(cam: Camera, pixels):
    return cam.unproject(pixels)


def ray_field(cam: Camera) -> RayField:
    return cam.ray_field()


# --------------------------------------------------------------------------
# Randomized camera sampling for augmentation
# --------------------------------------------------------------------------

@dataclass
class FamilySpec:
    model: str
    weight: float
    ranges: dict = field(default_factory=dict)  # param -> (lo, hi)


@dataclass
class CameraSamplingSpec:
    families: list
    seed: int = 0

    def __post_init__(self):
        if not self.families:
            raise CameraError("no camera families")
        total = sum(f.weight for f in self.families)
        if abs(total - 1.0) > 1e-9:
            raise CameraError(f"family weights sum to {total}, expected 1")
        for f in self.families:
            if f.model not in CAMERA_FAMILIES:
                raise UnknownModelError(f"unknown camera model {f.model!r}")
            for name, (lo, hi) in f.ranges.items():
                if lo > hi:
                    raise CameraError(f"range for {name} has lo > hi")

    def to_dict(self):
        return {
            "seed": self.seed,
            "families": [
                {"model": f.model, "weight": f.weight,
                 "ranges": {k: list(v) for k, v in f.ranges.items()}}
                for f in self.families
            ],
        }

    @classmethod
    def from_dict(cls, data):
        fams = [
            FamilySpec(f["model"], float(f["weight"]),
                       {k: (float(v[0]), float(v[1])) for k, v in f.get("ranges", {}).items()})
            for f in data["families"]
        ]
        return cls(fams, seed=int(data.get("seed", 0)))


def sample_camera(spec: CameraSamplingSpec, base: Camera,
                  rng: np.random.Generator | None = None) -> Camera:
    """Pick a family by weight and draw each listed parameter uniformly.

    Unlisted parameters keep their neutral defaults (distortion terms 0, EUCM
    beta 1); focal lengths and principal point come from ``base``. The draw is
    deterministic given the spec seed when no generator is passed in.
    """
    if rng is None:
        rng = np.random.default_rng(spec.seed)
    weights = np.array([f.weight for f in spec.families])
    idx = int(rng.choice(len(weights), p=weights / weights.sum()))
    fam = spec.families[idx]
    klass = CAMERA_FAMILIES[fam.model]
    params: dict[str, float] = {}
    if fam.model != "equirectangular":
        for name in ("fx", "fy", "cx", "cy"):
            params[name] = float(getattr(base, name))
    valid_names = {f.name for f in dc_fields(klass)}
    for name in sorted(fam.ranges):
        if name not in valid_names:
            raise CameraError(f"{fam.model} has no parameter {name!r}")
        lo, hi = fam.ranges[name]
        params[name] = float(rng.uniform(lo, hi))
    return klass(width=base.width, height=base.height, **params)


def augmentation_sampling_spec(seed: int = 0) -> CameraSamplingSpec:
    """Camera families and uniform parameter ranges used to synthesize
    distorted training views from pinhole imagery.

    The Kannala-Brandt rows drop their (tiny) tangential ranges: the
    Kannala-Brandt model here is radial-only.
    """
    k6 = ["k1", "k2", "k3", "k4", "k5", "k6"]
    t2 = ["t1", "t2"]
    s4 = ["s1", "s2", "s3", "s4"]
    return CameraSamplingSpec(
        [
            FamilySpec("eucm", 0.1, {"alpha": (0.0, 1.0), "beta": (0.25, 4.0)}),
            FamilySpec("fisheye624", 0.15,
                       {**{k: (0.1, 0.5) for k in k6},
                        **{t: (-0.005, 0.005) for t in t2},
                        **{s: (-0.01, 0.01) for s in s4}}),
            FamilySpec("fisheye624", 0.15,
                       {**{k: (-0.5, -0.1) for k in k6},
                        **{t: (-0.005, 0.005) for t in t2},
                        **{s: (-0.01, 0.01) for s in s4}}),
            FamilySpec("kannala_brandt", 0.2,
                       {k: (-0.05, 0.05) for k in ("k1", "k2", "k3")}),
            FamilySpec("kannala_brandt", 0.4,
                       {k: (-0.5, 0.5) for k in ("k1", "k2", "k3")}),
        ],
        seed=seed,
    )


def validation_sampling_spec(seed: int = 13) -> CameraSamplingSpec:
    """Camera families and ranges used to generate the distorted small-FoV
    validation imagery (default seed 13)."""
    k6 = ["k1", "k2", "k3", "k4", "k5", "k6"]
    t2 = ["t1", "t2"]
    s4 = ["s1", "s2", "s3", "s4"]
    return CameraSamplingSpec(
        [
            FamilySpec("eucm", 0.1, {"alpha": (0.0, 1.0), "beta": (0.25, 4.0)}),
            FamilySpec("fisheye624", 0.35,
                       {**{k: (0.6, 0.8) for k in k6},
                        **{t: (-0.01, 0.01) for t in t2},
                        **{s: (-0.01, 0.01) for s in s4}}),
            FamilySpec("fisheye624", 0.35,
                       {**{k: (-0.6, -0.4) for k in k6},
                        **{t: (-0.01, 0.01) for t in t2},
                        **{s: (-0.01, 0.01) for s in s4}}),
            FamilySpec("fisheye624", 0.2,
                       {**{k: (-0.2, 0.2) for k in k6},
                        **{t: (-0.05, 0.05) for t in t2},
                        **{s: (-0.05, 0.05) for s in s4}}),
        ],
        seed=seed,
    )
