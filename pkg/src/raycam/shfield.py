"""Ray-field representation over a truncated real spherical-harmonics basis.

A camera's pencil of rays is encoded by a small coefficient tensor over the
real SH basis (degree 1..L, no constant term) evaluated on a pole-and-FoV
domain. The basis models the *residual* of each ray over an equiangular base
grid, so all-zero coefficients reconstruct the base grid identically and the
domain parameters carry the mean ray direction.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.linalg
from scipy.special import lpmv

from .spherical import AngularField, RayField

TWO_PI = 2.0 * math.pi


class FitError(ValueError):
    pass


@dataclass(frozen=True)
class SHDomain:
    """Pole (generalized principal point, pixels), horizontal FoV (radians),
    and grid size. The vertical FoV is never stored: it is derived from the
    horizontal one under the square-pixel assumption, capped at pi."""

    cx: float
    cy: float
    hfov: float
    width: int
    height: int

    def __post_init__(self):
        if not 0.0 < self.hfov <= TWO_PI:
            raise ValueError("hfov must be in (0, 2*pi]")
        if not (0.0 <= self.cx <= self.width and 0.0 <= self.cy <= self.height):
            raise ValueError("pole must lie inside the image")

    @property
    def vfov(self) -> float:
        return min(self.hfov * self.height / self.width, math.pi)

    def to_dict(self):
        return {"cx": self.cx, "cy": self.cy, "hfov": self.hfov,
                "width": self.width, "height": self.height}

    @classmethod
    def from_dict(cls, d):
        return cls(float(d["cx"]), float(d["cy"]), float(d["hfov"]),
                   int(d["width"]), int(d["height"]))


@dataclass(frozen=True)
class SHBasis:
    """Real spherical harmonics for l = 1..degree, m = -l..l (no constant)."""

    degree: int

    def __post_init__(self):
        if self.degree < 1:
            raise ValueError("degree must be >= 1")

    @property
    def functions(self) -> tuple:
        return tuple(
            (l, m) for l in range(1, self.degree + 1) for m in range(-l, l + 1)
        )

    @property
    def count(self) -> int:
        return (self.degree + 1) ** 2 - 1


def real_sph_harm(l: int, m: int, theta: np.ndarray, phi: np.ndarray) -> np.ndarray:
    """Orthonormal real spherical harmonic without Condon-Shortley phase."""
    am = abs(m)
    norm = math.sqrt(
        (2 * l + 1) / (4.0 * math.pi)
        * math.factorial(l - am) / math.factorial(l + am)
    )
    # lpmv carries the (-1)^m Condon-Shortley phase; cancel it
    plm = lpmv(am, l, np.cos(theta)) * ((-1.0) ** am)
    if m == 0:
        return norm * plm
    if m > 0:
        return math.sqrt(2.0) * norm * plm * np.cos(m * phi)
    return math.sqrt(2.0) * norm * plm * np.sin(am * phi)


def eval_basis(basis: SHBasis, angles: AngularField) -> np.ndarray:
    """Stack of basis values, shape (H, W, K)."""
    theta = np.asarray(angles.theta, dtype=np.float64)
    if np.any(theta < -1e-12) or np.any(theta > math.pi + 1e-12):
        raise ValueError("angle out of range: theta must lie in [0, pi]")
    phi = np.asarray(angles.phi, dtype=np.float64)
    cols = [real_sph_harm(l, m, theta, phi) for l, m in basis.functions]
    return np.stack(cols, axis=-1)


def base_rays(domain: SHDomain) -> np.ndarray:
    """Equiangular base ray per pixel center, shape (H, W, 3), unit norm."""
    u = np.arange(domain.width) + 0.5
    v = np.arange(domain.height) + 0.5
    a = (u - domain.cx) / domain.width * domain.hfov
    b = (v - domain.cy) / domain.height * domain.vfov
    aa, bb = np.meshgrid(a, b)
    rays = np.stack(
        [np.sin(aa) * np.cos(bb), np.sin(bb), np.cos(aa) * np.cos(bb)], axis=-1
    )
    n = np.linalg.norm(rays, axis=-1, keepdims=True)
    return rays / n


def base_grid(domain: SHDomain) -> AngularField:
    """Spherical angles (theta, phi) of the base rays."""
    rays = base_rays(domain)
    theta = np.arccos(np.clip(rays[..., 2], -1.0, 1.0))
    phi = np.arctan2(rays[..., 1], rays[..., 0])
    valid = np.ones((domain.height, domain.width), dtype=bool)
    return AngularField(domain.width, domain.height, theta, phi, valid)


@lru_cache(maxsize=16)
def _basis_matrix(domain: SHDomain, degree: int) -> np.ndarray:
    """(H*W, K) basis table, cached per (domain, degree)."""
    Y = eval_basis(SHBasis(degree), base_grid(domain))
    Y = Y.reshape(-1, (degree + 1) ** 2 - 1)
    Y.setflags(write=False)
    return Y


@dataclass
class SHCoefficients:
    """K x 3 coefficient matrix (one column per Cartesian ray component)."""

    coeffs: np.ndarray
    domain: SHDomain
    degree: int

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=np.float64)
        k = (self.degree + 1) ** 2 - 1
        if self.coeffs.shape != (k, 3):
            raise ValueError(f"coeffs must have shape ({k}, 3)")
        if not np.all(np.isfinite(self.coeffs)):
            raise ValueError("coefficients must be finite")

    def to_dict(self):
        return {
            "degree": self.degree,
            "domain": self.domain.to_dict(),
            "coeffs": self.coeffs.tolist(),
        }

    @classmethod
    def from_dict(cls, d):
        return cls(np.array(d["coeffs"], dtype=np.float64),
                   SHDomain.from_dict(d["domain"]), int(d["degree"]))

    def save_json(self, path, extra: dict | None = None):
        payload = self.to_dict()
        if extra:
            payload.update(extra)
        tmp = f"{os.fspath(path)}.tmp{os.getpid()}"
        with open(tmp, "w") as fh:
            json.dump(payload, fh, indent=2)
            fh.write("\n")
        os.replace(tmp, path)


def load_coefficients_json(path) -> SHCoefficients:
    with open(path) as fh:
        return SHCoefficients.from_dict(json.load(fh))


def reconstruct(h: SHCoefficients) -> RayField:
    """Residual-over-base inverse transform: normalize(base + Y @ coeffs)."""
    dom = h.domain
    raw = base_rays(dom) + (
        _basis_matrix(dom, h.degree) @ h.coeffs
    ).reshape(dom.height, dom.width, 3)
    norm = np.linalg.norm(raw, axis=-1)
    valid = norm >= 1e-6
    dirs = np.where(valid[..., None], raw / np.where(norm > 0, norm, 1.0)[..., None], 0.0)
    return RayField(dom.width, dom.height, dirs, valid)


def _gauge_direction(degree: int) -> np.ndarray:
    """Coefficients reproducing the direction field itself: Y @ g = (x, y, z).

    x, y, z are sqrt(4*pi/3) times Y(1,1), Y(1,-1), Y(1,0) respectively, so
    adding g to any solution rescales base + Y c without changing the
    normalized reconstruction.
    """
    k = (degree + 1) ** 2 - 1
    g = np.zeros((k, 3))
    a = math.sqrt(4.0 * math.pi / 3.0)
    # l=1 functions are ordered m = -1, 0, 1 at indices 0, 1, 2
    g[2, 0] = a  # Y(1,1) -> x
    g[0, 1] = a  # Y(1,-1) -> y
    g[1, 2] = a  # Y(1,0) -> z
    return g


def fit_coeffs(target: RayField, domain: SHDomain, degree: int,
               tied: bool = False) -> tuple[SHCoefficients, float]:
    """Least-squares coefficients reproducing a target ray field.

    The reconstruction is normalized, so only the *direction* of
    base + Y c matters. Minimizing over a free per-pixel scale s gives
    min_s ||s*t - m||^2 = ||(I - t t^T) m||^2, which is linear in c: the fit
    is one rank-revealing least-squares solve. Any field produced by
    :func:`reconstruct` is therefore fitted exactly, and refitting returns
    the same coefficients. Returns (coefficients, residual RMS per pixel).

    The direction field (x, y, z) is itself a combination of the l=1
    harmonics, so a global rescale of base + Y c moves the coefficients
    without changing the reconstruction -- and the rescale limit
    base + Y c = 0 is always an exact minimizer of the projected residual.
    The fit therefore solves on the hyperplane orthogonal to the rescale
    direction, which excludes the collapsed solution, makes the all-zero
    solution canonical for a base-grid target, and leaves exactly one
    representative per reconstruction.

    ``tied`` shares one coefficient per harmonic across all three Cartesian
    channels; the default fits each channel independently.
    """
    if (target.height, target.width) != (domain.height, domain.width):
        raise ValueError("domain size does not match target")
    k = (degree + 1) ** 2 - 1
    mask = target.valid.ravel()
    n_valid = int(mask.sum())
    if n_valid < k:
        raise FitError(f"underdetermined fit: {n_valid} valid pixels < {k} basis functions")
    Y = _basis_matrix(domain, degree)[mask]
    base = base_rays(domain).reshape(-1, 3)[mask]
    t = target.dirs.reshape(-1, 3)[mask]
    # per-pixel projector onto the plane orthogonal to the target ray
    P = np.eye(3)[None, :, :] - t[:, :, None] * t[:, None, :]
    rhs = -np.einsum("nab,nb->na", P, base).reshape(-1)
    if tied:
        A = np.einsum("na,nj->naj", P.sum(axis=2), Y).reshape(-1, k)
        sol = _solve_truncated(A, rhs)[0]
        c = np.tile(sol[:, None], (1, 3))
        resid = A @ sol - rhs
    else:
        A = np.einsum("nab,nj->najb", P, Y).reshape(-1, 3 * k)
        g = _gauge_direction(degree).reshape(-1)
        Z = scipy.linalg.null_space(g[None, :] / np.linalg.norm(g))
        y = _solve_truncated(A @ Z, rhs)[0]
        sol = Z @ y
        c = sol.reshape(k, 3)
        resid = A @ sol - rhs
    rms = float(np.sqrt(np.sum(resid * resid) / n_valid))
    return SHCoefficients(c, domain, degree), rms


def _solve_truncated(A: np.ndarray, rhs: np.ndarray, rcond: float = 1e-10):
    """Minimum-norm least squares via SVD with a relative rank cutoff.

    Returns (solution, orthonormal basis of the truncated null space).
    """
    u, s, vt = np.linalg.svd(A, full_matrices=False)
    keep = s > rcond * s[0]
    sol = vt[keep].T @ ((u[:, keep].T @ rhs) / s[keep])
    return sol, vt[~keep].T


def estimate_domain(target: RayField) -> SHDomain:
    """Recover pole and horizontal FoV from a ray field.

    The pole is the sub-pixel argmax of the ray z-component (quadratic
    refinement over the 3x3 neighborhood). The horizontal FoV is the max over
    valid pixels of |horizontal ray angle| * width / |horizontal pixel
    distance to the pole|, the inverse of the equiangular pixel-to-angle map.
    """
    z = np.where(target.valid, target.dirs[..., 2], -np.inf)
    if not np.any(z > 0):
        raise ValueError("pole not found: no valid forward-facing pixel")
    v0, u0 = np.unravel_index(np.argmax(z), z.shape)

    def refine(f_m, f_0, f_p):
        denom = f_m - 2.0 * f_0 + f_p
        if denom >= -1e-18:
            return 0.0
        return float(np.clip(0.5 * (f_m - f_p) / denom, -0.5, 0.5))

    du = dv = 0.0
    if 0 < u0 < target.width - 1 and np.isfinite(z[v0, u0 - 1]) and np.isfinite(z[v0, u0 + 1]):
        du = refine(z[v0, u0 - 1], z[v0, u0], z[v0, u0 + 1])
    if 0 < v0 < target.height - 1 and np.isfinite(z[v0 - 1, u0]) and np.isfinite(z[v0 + 1, u0]):
        dv = refine(z[v0 - 1, u0], z[v0, u0], z[v0 + 1, u0])
    cx = u0 + 0.5 + du
    cy = v0 + 0.5 + dv

    # read the angular scale off the pixels farthest from the pole: near the
    # pole the angle/distance ratio reflects local focal length, not the FoV
    uu = np.arange(target.width) + 0.5
    dist = np.abs(uu[None, :] - cx) * np.ones((target.height, 1))
    a = np.abs(np.arctan2(target.dirs[..., 0], target.dirs[..., 2]))
    usable = target.valid & (dist > 0.0)
    d_max = float(np.max(np.where(usable, dist, 0.0)))
    far = usable & (dist >= d_max - 1.0)
    est = np.where(far, a * target.width / np.where(dist > 0, dist, 1.0), 0.0)
    hfov = float(np.clip(np.max(est), 1e-9, TWO_PI))
    return SHDomain(cx, cy, hfov, target.width, target.height)
