"""Batch command-line front end with stable file contracts.

Exit codes: 0 ok, 2 input/schema error, 3 numerical failure (underdetermined
or singular), 4 shape mismatch. Every run writes a manifest next to its
outputs; re-running a manifest (``raycam --manifest path``) reproduces
byte-identical outputs. All file writes are atomic (temp file + rename), so
failure paths leave no partial outputs.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .cameras import (
    Camera,
    CameraError,
    CameraSamplingSpec,
    UnknownModelError,
    load_camera_json,
)
from .losses import (
    LossConfig,
    asymmetric_angular_loss,
    combined_angular_loss,
    confidence_loss,
    fd_gradcheck,
    radial_loss,
    total_loss,
)
from .metrics import AlignmentError, EvalConfig, evaluate
from .shfield import (
    FitError,
    SHCoefficients,
    estimate_domain,
    fit_coeffs,
    load_coefficients_json,
    reconstruct,
)
from .spherical import DepthMap, PointCloud, RayField, ShapeMismatchError, depth_to_radius, rays_to_angles, spherical_to_cartesian, RadiusMap
from .tensorio import TensorFormatError, read_mask, read_tensor, write_mask, write_tensor
from .warp import DEFAULT_LAMBDA, deformation_field, make_distorted_sample, normalized_inverse_depth, softmax_splat

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_NUMERICAL = 3
EXIT_SHAPE = 4

log = logging.getLogger("raycam")


def _setup_logging():
    level = os.environ.get("RAYCAM_LOG", "warn").lower()
    levels = {"error": logging.ERROR, "warn": logging.WARNING,
              "info": logging.INFO, "debug": logging.DEBUG}
    logging.basicConfig(level=levels.get(level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")


def _write_json(path, payload):
    tmp = f"{os.fspath(path)}.tmp{os.getpid()}"
    with open(tmp, "w") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")
    os.replace(tmp, path)


def _write_manifest(args, outputs, inputs, extra=None):
    manifest = {
        "tool_version": __version__,
        "subcommand": args.command,
        "argv": args.raw_argv,
        "seed": args.seed,
        "inputs": [os.fspath(p) for p in inputs],
        "outputs": [os.fspath(p) for p in outputs],
    }
    if extra:
        manifest["config"] = extra
    path = args.manifest or f"{outputs[0]}.manifest.json"
    _write_json(path, manifest)


def _read_rayfield(dirs_path, mask_path) -> RayField:
    dirs = read_tensor(dirs_path).astype(np.float64)
    if dirs.ndim != 3 or dirs.shape[2] != 3:
        raise TensorFormatError("ray dirs tensor must have shape (H, W, 3)")
    if mask_path:
        mask = read_mask(mask_path)
        if mask.shape != dirs.shape[:2]:
            raise ShapeMismatchError("mask shape does not match dirs")
    else:
        mask = np.ones(dirs.shape[:2], dtype=bool)
    return RayField(dirs.shape[1], dirs.shape[0], dirs, mask)


# --------------------------------------------------------------------------
# Subcommands
# --------------------------------------------------------------------------

def _rays_one(cam_path, out_dirs, out_mask):
    cam = load_camera_json(cam_path)
    rf = cam.ray_field()
    write_tensor(out_dirs, rf.dirs)
    write_mask(out_mask, rf.valid)


def cmd_rays(args):
    cams = args.camera
    if len(cams) == 1 and not args.out_dir:
        out_dirs = args.out_dirs or "rays_dirs.ryf"
        out_mask = args.out_mask or "rays_mask.ryf"
        _rays_one(cams[0], out_dirs, out_mask)
        _write_manifest(args, [out_dirs, out_mask], cams)
        return EXIT_OK
    out_dir = Path(args.out_dir or ".")
    out_dir.mkdir(parents=True, exist_ok=True)
    jobs = []
    for cam_path in cams:
        stem = Path(cam_path).stem
        jobs.append((cam_path, out_dir / f"{stem}_dirs.ryf", out_dir / f"{stem}_mask.ryf"))
    if args.jobs > 1:
        with ThreadPoolExecutor(max_workers=args.jobs) as pool:
            list(pool.map(lambda j: _rays_one(*j), jobs))
    else:
        for j in jobs:
            _rays_one(*j)
    outputs = [p for _, d, m in jobs for p in (d, m)]
    _write_manifest(args, outputs, cams)
    return EXIT_OK


def cmd_fit_sh(args):
    if args.degree < 1:
        log.error("degree must be >= 1")
        return EXIT_INPUT
    target = _read_rayfield(args.rays, args.mask)
    domain = estimate_domain(target)
    coeffs, rms = fit_coeffs(target, domain, args.degree, tied=args.tied)
    coeffs.save_json(args.out, extra={"residual_rms": rms})
    _write_manifest(args, [args.out], [args.rays] + ([args.mask] if args.mask else []),
                    extra={"degree": args.degree, "tied": args.tied,
                           "residual_rms": rms})
    return EXIT_OK


def cmd_recon_sh(args):
    coeffs = load_coefficients_json(args.coeffs)
    rf = reconstruct(coeffs)
    write_tensor(args.out_dirs, rf.dirs)
    write_mask(args.out_mask, rf.valid)
    _write_manifest(args, [args.out_dirs, args.out_mask], [args.coeffs])
    return EXIT_OK


def cmd_roundtrip(args):
    cam = load_camera_json(args.camera)
    rng = np.random.default_rng(args.seed)
    pix = np.stack(
        [rng.uniform(0, cam.width, args.samples),
         rng.uniform(0, cam.height, args.samples)], axis=-1
    )
    dirs, ok = cam.unproject(pix)
    back, ok2 = cam.project(dirs[ok])
    err = np.abs(back[ok2] - pix[ok][ok2])
    report = {
        "model": cam.FAMILY,
        "samples": args.samples,
        "valid_fraction": float(ok.mean()),
        "max_error_px": float(err.max()) if err.size else 0.0,
        "mean_error_px": float(err.mean()) if err.size else 0.0,
    }
    _write_json(args.out, report)
    _write_manifest(args, [args.out], [args.camera])
    return EXIT_OK


def cmd_eval(args):
    pred = read_tensor(args.pred).astype(np.float64)
    gt = read_tensor(args.gt).astype(np.float64)
    if pred.shape != gt.shape:
        raise ShapeMismatchError(
            f"pred shape {pred.shape} does not match gt shape {gt.shape}"
        )
    cam = load_camera_json(args.camera)
    if (cam.height, cam.width) != pred.shape:
        raise ShapeMismatchError("camera size does not match tensors")
    cfg = EvalConfig()
    if args.eval_config:
        with open(args.eval_config) as fh:
            cfg = EvalConfig(**json.load(fh))
    gt_rays = cam.ray_field()
    pred_rays = _read_rayfield(args.pred_rays, None) if args.pred_rays else gt_rays
    mask = gt_rays.valid & (gt > 0)
    angles = rays_to_angles(gt_rays)
    gt_pc = spherical_to_cartesian(
        angles, RadiusMap(cam.width, cam.height, gt, mask)
    )
    pred_pc = spherical_to_cartesian(
        rays_to_angles(pred_rays), RadiusMap(cam.width, cam.height, pred, mask)
    )
    report = evaluate(pred, gt, mask, pred_rays, gt_rays, pred_pc, gt_pc, cfg)
    _write_json(args.out, report.to_dict())
    inputs = [args.pred, args.gt, args.camera]
    _write_manifest(args, [args.out], inputs, extra=cfg.to_dict())
    return EXIT_OK


def _load_png(path):
    from PIL import Image

    return np.asarray(Image.open(path).convert("RGB"), dtype=np.float64)


def _save_png(path, arr):
    from PIL import Image

    img = Image.fromarray(np.clip(np.round(arr), 0, 255).astype(np.uint8))
    tmp = f"{os.fspath(path)}.tmp{os.getpid()}.png"
    img.save(tmp, format="PNG")
    os.replace(tmp, path)


def _load_depth(path, cam):
    z = read_tensor(path).astype(np.float64)
    if z.shape != (cam.height, cam.width):
        raise ShapeMismatchError("depth shape does not match camera")
    return DepthMap(cam.width, cam.height, z, z > 0)


def cmd_warp(args):
    src = load_camera_json(args.src_camera)
    tgt = load_camera_json(args.tgt_camera)
    rgb = _load_png(args.image)
    if rgb.shape[:2] != (src.height, src.width):
        raise ShapeMismatchError("image size does not match source camera")
    depth = _load_depth(args.depth, src)
    flow = deformation_field(src, tgt, depth)
    importance = normalized_inverse_depth(depth)
    warped_rgb, holes_rgb = softmax_splat(rgb, flow, importance, args.lam)
    radius_src = depth_to_radius(depth, src.ray_field())
    warped_r, holes_r = softmax_splat(radius_src.r, flow, importance, args.lam)
    holes = holes_rgb | holes_r
    _save_png(args.out_image, warped_rgb)
    write_tensor(args.out_radius, warped_r)
    write_mask(args.out_holes, holes)
    outputs = [args.out_image, args.out_radius, args.out_holes]
    _write_manifest(args, outputs,
                    [args.image, args.depth, args.src_camera, args.tgt_camera],
                    extra={"lambda": args.lam})
    return EXIT_OK


def cmd_gen_distort(args):
    src = load_camera_json(args.camera)
    rgb = _load_png(args.image)
    if rgb.shape[:2] != (src.height, src.width):
        raise ShapeMismatchError("image size does not match camera")
    depth = _load_depth(args.depth, src)
    with open(args.spec) as fh:
        spec = CameraSamplingSpec.from_dict(json.load(fh))
    rng = np.random.default_rng(args.seed if args.seed is not None else spec.seed)
    sample = make_distorted_sample(rgb, depth, src, spec, args.lam, rng)
    prefix = args.out_prefix
    out_image = f"{prefix}.png"
    out_radius = f"{prefix}_radius.ryf"
    out_holes = f"{prefix}_holes.ryf"
    out_camera = f"{prefix}_camera.json"
    _save_png(out_image, sample.rgb)
    write_tensor(out_radius, sample.radius.r)
    write_mask(out_holes, sample.holes)
    sample.target_camera.save_json(out_camera)
    outputs = [out_image, out_radius, out_holes, out_camera]
    _write_manifest(args, outputs, [args.image, args.depth, args.camera, args.spec],
                    extra={"lambda": args.lam, "seed": args.seed})
    return EXIT_OK


def cmd_loss_check(args):
    rng = np.random.default_rng(args.seed)
    n = args.size
    cfg = LossConfig()
    gt_theta = rng.uniform(0.0, np.pi, (n, n))
    gt_phi = rng.uniform(-np.pi, np.pi, (n, n))
    pred_theta = np.clip(gt_theta + rng.normal(0, 0.2, (n, n)), 0, np.pi)
    pred_phi = gt_phi + rng.normal(0, 0.2, (n, n))
    gt_logr = rng.normal(1.0, 0.5, (n, n))
    pred_logr = gt_logr + rng.normal(0, 0.3, (n, n))
    sigma = np.abs(rng.normal(0.3, 0.1, (n, n))) + 1e-3

    la = combined_angular_loss(pred_theta, pred_phi, gt_theta, gt_phi, cfg)
    lr = radial_loss(pred_logr, gt_logr)
    lc = confidence_loss(pred_logr, gt_logr, sigma)
    lt = total_loss(pred_theta, pred_phi, gt_theta, gt_phi,
                    pred_logr, gt_logr, sigma, cfg)

    eps = 1e-6
    dev_t, skip_t = fd_gradcheck(
        lambda x: _scalar_grad(total_loss(x, pred_phi, gt_theta, gt_phi,
                                          pred_logr, gt_logr, sigma, cfg), "theta"),
        pred_theta, eps, kink_distance=np.abs(pred_theta - gt_theta))
    # the confidence term is detached from the radius: probe with its radial
    # input frozen, as a detached graph would see it
    def _through_radius(x):
        from .losses import LossValue

        lr_x = radial_loss(x, gt_logr)
        return LossValue(la.value + cfg.eta * lr_x.value + cfg.gamma * lc.value,
                         cfg.eta * lr_x.grad)

    dev_r, skip_r = fd_gradcheck(
        _through_radius, pred_logr, eps,
        kink_distance=np.abs(pred_logr - gt_logr))
    report = {
        "angular": la.value,
        "radial": lr.value,
        "confidence": lc.value,
        "total": lt.value,
        "fd_max_deviation": max(dev_t, dev_r),
        "skipped_kinks": int(skip_t + skip_r),
    }
    _write_json(args.out, report)
    _write_manifest(args, [args.out], [],
                    extra={"size": n, "loss_config": vars(cfg)})
    return EXIT_OK


def _scalar_grad(loss_value, key):
    from .losses import LossValue

    return LossValue(loss_value.value, loss_value.grad[key])


# --------------------------------------------------------------------------
# Parser and dispatch
# --------------------------------------------------------------------------

def build_parser():
    p = argparse.ArgumentParser(prog="raycam", description=__doc__)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--manifest", default=None,
                   help="manifest output path; with no subcommand, re-run this manifest")
    sub = p.add_subparsers(dest="command")

    s = sub.add_parser("rays", help="render a camera's dense ray field")
    s.add_argument("--camera", action="append", required=True)
    s.add_argument("--out-dirs")
    s.add_argument("--out-mask")
    s.add_argument("--out-dir")
    s.set_defaults(func=cmd_rays)

    s = sub.add_parser("fit-sh", help="fit harmonic coefficients to a ray field")
    s.add_argument("--rays", required=True)
    s.add_argument("--mask")
    s.add_argument("--degree", type=int, default=3)
    s.add_argument("--tied", action="store_true")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_fit_sh)

    s = sub.add_parser("recon-sh", help="reconstruct a ray field from coefficients")
    s.add_argument("--coeffs", required=True)
    s.add_argument("--out-dirs", required=True)
    s.add_argument("--out-mask", required=True)
    s.set_defaults(func=cmd_recon_sh)

    s = sub.add_parser("roundtrip", help="project/unproject self-consistency report")
    s.add_argument("--camera", required=True)
    s.add_argument("--samples", type=int, default=10000)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_roundtrip)

    s = sub.add_parser("eval", help="compute the metrics report")
    s.add_argument("--pred", required=True)
    s.add_argument("--gt", required=True)
    s.add_argument("--camera", required=True)
    s.add_argument("--pred-rays")
    s.add_argument("--eval-config")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_eval)

    s = sub.add_parser("warp", help="forward-warp an image to a target camera")
    s.add_argument("--image", required=True)
    s.add_argument("--depth", required=True)
    s.add_argument("--src-camera", required=True)
    s.add_argument("--tgt-camera", required=True)
    s.add_argument("--lam", type=float, default=DEFAULT_LAMBDA)
    s.add_argument("--out-image", required=True)
    s.add_argument("--out-radius", required=True)
    s.add_argument("--out-holes", required=True)
    s.set_defaults(func=cmd_warp)

    s = sub.add_parser("gen-distort", help="synthesize a distorted-camera sample")
    s.add_argument("--image", required=True)
    s.add_argument("--depth", required=True)
    s.add_argument("--camera", required=True)
    s.add_argument("--spec", required=True)
    s.add_argument("--lam", type=float, default=DEFAULT_LAMBDA)
    s.add_argument("--out-prefix", required=True)
    s.set_defaults(func=cmd_gen_distort)

    s = sub.add_parser("loss-check", help="loss components and gradient check")
    s.add_argument("--size", type=int, default=8)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_loss_check)

    return p


def main(argv=None) -> int:
    _setup_logging()
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code not in (0, None) else 0
    if args.command is None:
        if not args.manifest:
            parser.print_usage()
            return EXIT_INPUT
        try:
            with open(args.manifest) as fh:
                manifest = json.load(fh)
            rerun_argv = manifest["argv"]
        except (OSError, json.JSONDecodeError, KeyError) as exc:
            log.error("cannot re-run manifest: %s", exc)
            return EXIT_INPUT
        return main(rerun_argv)
    args.raw_argv = argv
    try:
        return args.func(args)
    except ShapeMismatchError as exc:
        log.error("shape mismatch: %s", exc)
        return EXIT_SHAPE
    except (FitError, AlignmentError, np.linalg.LinAlgError) as exc:
        log.error("numerical failure: %s", exc)
        return EXIT_NUMERICAL
    except (UnknownModelError, CameraError, TensorFormatError, ValueError,
            KeyError, OSError, json.JSONDecodeError) as exc:
        log.error("input error: %s", exc)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
