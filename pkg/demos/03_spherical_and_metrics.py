"""Spherical output space and the evaluation suite.

Depth along the optical axis degenerates for rays near the xy-plane: a ray
at 90 degrees has unbounded depth at finite distance, and behind the camera
depth changes sign. Radial distance along the ray is positive and finite
everywhere, so scenes are represented as (azimuth, polar, log-radius). This
script round-trips the two parameterizations on a full panorama, shows the
xy-plane edge case, then scores a perturbed prediction with the metric
suite: threshold accuracies (raw and scale/shift-invariant), point-cloud
F-score AUC, and ray angular AUC.
"""

import numpy as np

import raycam as rc
from raycam.spherical import RadiusMap, RayField


def main():
    cam = rc.Equirectangular(128, 64, hfov=2 * np.pi, vfov=np.pi)
    rays = cam.ray_field()
    rng = np.random.default_rng(0)
    r = rng.uniform(0.5, 5.0, (64, 128))
    radius = RadiusMap(128, 64, r, np.ones((64, 128), dtype=bool))

    depth = rc.radius_to_depth(radius, rays)
    back = rc.depth_to_radius(depth, rays)
    ok = depth.valid & back.valid
    print(f"radius -> depth -> radius on a 360 panorama: "
          f"{ok.mean():.0%} convertible pixels (depth only covers the "
          f"forward hemisphere), max |dr| {np.abs(back.r[ok] - r[ok]).max():.1e}")

    side = RayField(1, 1, np.array([[[1.0, 0.0, 0.0]]]),
                    np.ones((1, 1), dtype=bool))
    d_side = rc.radius_to_depth(
        RadiusMap(1, 1, np.array([[2.0]]), np.ones((1, 1), dtype=bool)), side)
    print(f"a ray in the xy-plane at radius 2.0 has depth {d_side.z[0, 0]}: "
          f"the radial parameterization keeps the point, depth loses it")

    angles = rc.rays_to_angles(rays)
    cloud = rc.spherical_to_cartesian(angles, radius)
    print(f"point cloud from the spherical representation: "
          f"{cloud.points.shape[0]} points")

    gt = radius.r
    pred = gt * rng.uniform(0.95, 1.05, gt.shape)  # 5% multiplicative noise
    pred_cloud = rc.spherical_to_cartesian(
        angles, RadiusMap(128, 64, pred, radius.valid))

    report = rc.evaluate(pred, gt, radius.valid, rays, rays,
                         pred_cloud, cloud)
    print("\nnoisy prediction:")
    for key, val in report.to_dict().items():
        if isinstance(val, float):
            print(f"  {key:10s} {val:8.3f}")

    pred_affine = 2.0 * pred + 1.0  # an affine corruption on top of the noise
    d1_raw = rc.delta_metrics(pred_affine, gt)[0]
    d1_ssi = rc.delta_metrics(pred_affine, gt, aligned=True)[0]
    print(f"\nafter the affine corruption: delta1 {d1_raw:.1f} raw "
          f"vs {d1_ssi:.1f} with scale/shift alignment")


if __name__ == "__main__":
    main()
