import json
import math

import numpy as np
import pytest

import raycam as rc
from raycam.cameras import (
    CAMERA_FAMILIES,
    FamilySpec,
    bisect_odd_poly,
    invert_odd_poly,
)


def make_cameras():
    return {
        "pinhole": rc.Pinhole(640, 480, fx=400, fy=400, cx=320, cy=240),
        "kannala_brandt": rc.KannalaBrandt(
            640, 480, fx=280, fy=280, cx=320, cy=240,
            k1=0.05, k2=-0.02, k3=0.01, k4=-0.002,
        ),
        "ucm": rc.UCM(640, 480, fx=400, fy=400, cx=320, cy=240, xi=0.8),
        "eucm": rc.EUCM(640, 480, fx=400, fy=400, cx=320, cy=240, alpha=0.6, beta=1.2),
        "double_sphere": rc.DoubleSphere(
            640, 480, fx=350, fy=350, cx=320, cy=240, xi=-0.2, alpha=0.6
        ),
        "mei": rc.Mei(
            640, 480, fx=400, fy=400, cx=320, cy=240,
            xi=0.9, k1=0.05, k2=-0.01, t1=0.001, t2=-0.001,
        ),
        "fisheye624": rc.Fisheye624(
            640, 480, fx=280, fy=280, cx=320, cy=240,
            k1=0.03, k2=-0.01, k3=0.005, t1=0.001, t2=-0.001,
            s1=0.0005, s3=-0.0005,
        ),
        "equirectangular": rc.Equirectangular(
            640, 480, hfov=2 * math.pi, vfov=math.pi
        ),
    }


CLOSED_FORM = {"pinhole", "ucm", "eucm", "double_sphere", "equirectangular"}


class TestProjectExamples:
    def test_pinhole_principal_point(self):
        cam = rc.Pinhole(100, 100, fx=100, fy=100, cx=50, cy=50)
        pix, ok = cam.project([[0, 0, 1]])
        assert ok[0]
        assert np.allclose(pix[0], (50, 50))

    def test_pinhole_off_image(self):
        cam = rc.Pinhole(100, 100, fx=100, fy=100, cx=50, cy=50)
        pix, ok = cam.project([[1, 0, 1]])
        # formula gives (150, 50), outside the 100x100 image
        assert not ok[0]
        assert np.allclose(pix[0], (-1, -1))

    def test_eucm_alpha0_matches_pinhole(self):
        pin = rc.Pinhole(100, 100, fx=100, fy=100, cx=50, cy=50)
        eucm = rc.EUCM(100, 100, fx=100, fy=100, cx=50, cy=50, alpha=0.0, beta=1.0)
        pt = [[0.2, 0.1, 1.0]]
        pa, oa = pin.project(pt)
        pb, ob = eucm.project(pt)
        assert oa[0] and ob[0]
        assert np.allclose(pa, pb, atol=1e-12)

    def test_invalid_never_nan(self):
        for cam in make_cameras().values():
            pix, ok = cam.project([[0, 0, -5], [1e3, 0, -1], [0, 0, 0]])
            assert np.all(np.isfinite(pix))
            assert np.all(pix[~ok] == -1.0)


class TestUnprojectExamples:
    def test_equirect_center(self):
        cam = rc.Equirectangular(360, 180)
        dirs, ok = cam.unproject([[180, 90]])
        assert ok[0]
        assert np.allclose(dirs[0], (0, 0, 1), atol=1e-12)

    def test_kb_equidistant_degenerate(self):
        f = 100.0
        cam = rc.KannalaBrandt(400, 400, fx=f, fy=f, cx=200, cy=200)
        r = 80.0
        dirs, ok = cam.unproject([[200 + r, 200]])
        assert ok[0]
        theta = np.arccos(dirs[0, 2])
        assert abs(theta - r / f) < 1e-9

    def test_kb_newton_vs_bisection_oracle(self):
        cam = rc.KannalaBrandt(400, 400, fx=100, fy=100, cx=200, cy=200, k1=0.1)
        r = np.array([0.5])
        theta, ok = invert_odd_poly(cam._poly, r, cam.theta_max)
        assert ok[0]
        oracle = bisect_odd_poly(cam._poly, r, cam.theta_max)
        assert abs(theta[0] - oracle[0]) < 1e-9

    def test_newton_vs_bisection_grid(self):
        # agreement wherever both converge, across several profiles
        polys = [(0.1, 0, 0, 0), (0.05, -0.02, 0.01, -0.002), (-0.2, 0.03, 0, 0)]
        for poly in polys:
            from raycam.cameras import _first_stationary_theta

            tmax = _first_stationary_theta(np.array(poly))
            from raycam.cameras import _eval_odd_poly

            r = np.linspace(0, float(_eval_odd_poly(poly, np.asarray(tmax))), 200)
            theta, ok = invert_odd_poly(poly, r, tmax)
            oracle = bisect_odd_poly(poly, r, tmax)
            assert np.all(np.abs(theta[ok] - oracle[ok]) < 1e-9)


class TestRayField:
    def test_pinhole_center_ray(self):
        cam = rc.Pinhole(101, 101, fx=200, fy=200, cx=50.5, cy=50.5)
        rf = cam.ray_field()
        assert rf.valid.all()
        center = rf.dirs[50, 50]
        assert np.dot(center, (0, 0, 1)) > np.cos(math.radians(1.0) / cam.fx)

    def test_equirect_full_sphere_symmetry(self):
        cam = rc.Equirectangular(128, 64)
        rf = cam.ray_field()
        assert rf.valid.all()
        assert abs(rf.dirs[..., 2].mean()) < 1e-2

    def test_unit_norm(self):
        for cam in make_cameras().values():
            rf = cam.ray_field()
            norms = np.linalg.norm(rf.dirs[rf.valid], axis=-1)
            assert np.all(np.abs(norms - 1.0) < 1e-6)
            assert np.all(np.isfinite(rf.dirs))


class TestRoundTrip:
    @pytest.mark.parametrize("name", sorted(make_cameras()))
    def test_roundtrip(self, name):
        cam = make_cameras()[name]
        rng = np.random.default_rng(7)
        pix = np.stack(
            [rng.uniform(0, cam.width, 10000), rng.uniform(0, cam.height, 10000)],
            axis=-1,
        )
        dirs, ok = cam.unproject(pix)
        assert ok.sum() >= 9000
        back, ok2 = cam.project(dirs[ok])
        err = np.abs(back[ok2] - pix[ok][ok2]).max()
        tol = 1e-6 if name in CLOSED_FORM else 1e-4
        assert err < tol

    def test_fisheye624_sampled_roundtrip(self):
        # round trip through a randomly drawn wide-angle fisheye
        spec = rc.CameraSamplingSpec(
            [FamilySpec("fisheye624",
                        1.0,
                        {**{k: (-0.5, -0.1) for k in
                            ("k1", "k2", "k3", "k4", "k5", "k6")},
                         **{t: (-0.005, 0.005) for t in ("t1", "t2")},
                         **{s: (-0.01, 0.01) for s in ("s1", "s2", "s3", "s4")}})],
            seed=3,
        )
        base = rc.Pinhole(640, 480, fx=300, fy=300, cx=320, cy=240)
        cam = rc.sample_camera(spec, base)
        rng = np.random.default_rng(11)
        pix = np.stack(
            [rng.uniform(0, 640, 10000), rng.uniform(0, 480, 10000)], axis=-1
        )
        dirs, ok = cam.unproject(pix)
        back, ok2 = cam.project(dirs[ok])
        assert np.abs(back[ok2] - pix[ok][ok2]).max() < 1e-4


class TestReductions:
    def test_eucm_alpha0_is_pinhole(self):
        pin = rc.Pinhole(640, 480, fx=400, fy=400, cx=320, cy=240)
        eucm = rc.EUCM(640, 480, fx=400, fy=400, cx=320, cy=240, alpha=0.0, beta=1.0)
        a, b = pin.ray_field(), eucm.ray_field()
        assert np.array_equal(a.valid, b.valid)
        assert np.abs(a.dirs - b.dirs).max() < 1e-9

    def test_double_sphere_reduces_to_pinhole(self):
        pin = rc.Pinhole(640, 480, fx=400, fy=400, cx=320, cy=240)
        ds = rc.DoubleSphere(640, 480, fx=400, fy=400, cx=320, cy=240,
                             xi=0.0, alpha=0.0)
        a, b = pin.ray_field(), ds.ray_field()
        assert np.abs(a.dirs - b.dirs).max() < 1e-9


class TestValidation:
    def test_bad_focal(self):
        with pytest.raises(rc.CameraError):
            rc.Pinhole(10, 10, fx=-1, fy=1)

    def test_bad_alpha(self):
        with pytest.raises(rc.CameraError):
            rc.EUCM(10, 10, fx=1, fy=1, alpha=1.5)
        with pytest.raises(rc.CameraError):
            rc.DoubleSphere(10, 10, fx=1, fy=1, alpha=-0.1)

    def test_bad_beta(self):
        with pytest.raises(rc.CameraError):
            rc.EUCM(10, 10, fx=1, fy=1, alpha=0.5, beta=0.0)

    def test_bad_fov(self):
        with pytest.raises(rc.CameraError):
            rc.Equirectangular(10, 10, hfov=7.0)
        with pytest.raises(rc.CameraError):
            rc.Equirectangular(10, 10, vfov=4.0)

    def test_bad_size(self):
        with pytest.raises(rc.CameraError):
            rc.Pinhole(0, 10, fx=1, fy=1)


class TestJson:
    def test_roundtrip_all_models(self, tmp_path):
        for name, cam in make_cameras().items():
            path = tmp_path / f"{name}.json"
            cam.save_json(path)
            loaded = rc.load_camera_json(path)
            assert loaded == cam

    def test_lossless_f64(self, tmp_path):
        cam = rc.Pinhole(33, 17, fx=1.0 / 3.0, fy=math.pi, cx=0.1, cy=2e-17)
        path = tmp_path / "cam.json"
        cam.save_json(path)
        loaded = rc.load_camera_json(path)
        assert loaded.fx == cam.fx and loaded.fy == cam.fy
        assert loaded.cx == cam.cx and loaded.cy == cam.cy

    def test_unknown_model_rejected(self):
        with pytest.raises(rc.UnknownModelError):
            rc.Camera.from_dict({"model": "orthographic", "width": 4, "height": 4})

    def test_schema_shape(self):
        d = make_cameras()["eucm"].to_dict()
        assert set(d) == {"model", "width", "height", "params"}
        json.dumps(d)  # must be serializable


class TestSampling:
    def base(self):
        return rc.Pinhole(640, 480, fx=300, fy=300, cx=320, cy=240)

    def test_single_pinhole_returns_base(self):
        spec = rc.CameraSamplingSpec([FamilySpec("pinhole", 1.0)])
        cam = rc.sample_camera(spec, self.base())
        assert cam == self.base()

    def test_eucm_ranges_always_respected(self):
        spec = rc.CameraSamplingSpec(
            [FamilySpec("eucm", 1.0, {"alpha": (0.0, 1.0), "beta": (0.25, 4.0)})]
        )
        rng = np.random.default_rng(0)
        for _ in range(50):
            cam = rc.sample_camera(spec, self.base(), rng)
            assert 0.0 <= cam.alpha <= 1.0
            assert 0.25 <= cam.beta <= 4.0

    def test_deterministic(self):
        spec = rc.validation_sampling_spec(seed=13)
        a = rc.sample_camera(spec, self.base())
        b = rc.sample_camera(spec, self.base())
        assert a == b

    def test_empty_spec(self):
        with pytest.raises(rc.CameraError, match="no camera families"):
            rc.CameraSamplingSpec([])

    def test_weights_must_sum_to_one(self):
        with pytest.raises(rc.CameraError):
            rc.CameraSamplingSpec([FamilySpec("pinhole", 0.7)])

    def test_unlisted_params_neutral(self):
        spec = rc.CameraSamplingSpec(
            [FamilySpec("kannala_brandt", 1.0, {"k1": (-0.1, 0.1)})]
        )
        cam = rc.sample_camera(spec, self.base())
        assert cam.k2 == cam.k3 == cam.k4 == 0.0

    def test_spec_json_roundtrip(self):
        spec = rc.augmentation_sampling_spec(seed=5)
        again = rc.CameraSamplingSpec.from_dict(
            json.loads(json.dumps(spec.to_dict()))
        )
        assert again.to_dict() == spec.to_dict()

    def test_preset_weights(self):
        for spec in (rc.augmentation_sampling_spec(), rc.validation_sampling_spec()):
            assert abs(sum(f.weight for f in spec.families) - 1.0) < 1e-9
