"""Command-line interface: the pipeline as composable subcommands.

Conventions shared by every subcommand:

* the resolved configuration is echoed to stderr before any work starts
* diagnostics go to stderr, machine-readable reports to stdout as JSON
* exit 0 on success, 2 for invalid arguments or malformed inputs, 1 for
  operating-system failures (missing files, permissions, full disk)
* identical flags, inputs and seeds produce byte-identical outputs
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from .fusion import FusionKernel, bidirectional_fuse, fusion_residual
from .errors import InvalidArgumentError
from .geometry import (
    FACE_IDS,
    CubemapFaceSet,
    EquirectRaster,
    c2e,
    e2c,
    face_intrinsics,
    sample_face_at_dirs,
)
from .io import (
    export_splat_ply,
    load_png,
    load_trajectory,
    read_pfm,
    read_scaffold,
    save_png,
    save_trajectory,
    write_pfm,
    write_scaffold,
)
from .metrics import (
    DepthEvalMask,
    abs_rel,
    align_sim3,
    cam_mc,
    delta_acc,
    rot_err,
    silog,
    subsample_every,
    trans_err,
)
from .render import render
from .scaffold import LiftParams, scaffold_from_pano
from .synthetic import MOTIONS, gradient_pano, make_trajectory, room_pano, simple_intrinsics, sphere_pano

_KERNELS = {
    "zero": FusionKernel.zero,
    "identity": FusionKernel.identity,
    "gaussian5": lambda: FusionKernel.gaussian(5, 1.0),
}


def _echo_config(args: argparse.Namespace) -> None:
    cfg = {k: v for k, v in sorted(vars(args).items()) if k != "func"}
    print("config: " + json.dumps(cfg, sort_keys=True, default=str), file=sys.stderr)


def _emit_report(report: dict) -> None:
    print(json.dumps(report, sort_keys=True))


def _load_rgb_pano(path: str) -> EquirectRaster:
    arr = load_png(path)
    if arr.ndim != 3:
        raise InvalidArgumentError(f"{path}: expected a color image")
    h, w = arr.shape[:2]
    if w != 2 * h:
        raise InvalidArgumentError(f"{path}: aspect must be 2:1, got {w}x{h}")
    return EquirectRaster(arr)


def _load_face_dir(dirname: str) -> CubemapFaceSet:
    """Read the six face PNGs plus intrinsics.json written by pano2cube."""
    meta_path = os.path.join(dirname, "intrinsics.json")
    if not os.path.exists(meta_path):
        raise InvalidArgumentError(f"missing intrinsics.json in {dirname}")
    with open(meta_path, "r", encoding="utf-8") as fh:
        try:
            meta = json.load(fh)
        except json.JSONDecodeError as exc:
            raise InvalidArgumentError(f"{meta_path}: {exc}") from exc
    try:
        face_size, fov_deg = int(meta["face_size"]), float(meta["fov_deg"])
    except KeyError as exc:
        raise InvalidArgumentError(f"{meta_path}: missing key {exc}") from exc

    faces = np.empty((6, face_size, face_size, 3))
    for idx, name in enumerate(FACE_IDS):
        path = os.path.join(dirname, f"{name}.png")
        if not os.path.exists(path):
            raise InvalidArgumentError(f"missing face file: {name}.png")
        img = load_png(path)
        if img.shape != (face_size, face_size, 3):
            raise InvalidArgumentError(
                f"{path}: expected {face_size}x{face_size} color face, got {img.shape}"
            )
        faces[idx] = img
    return CubemapFaceSet(
        faces=faces, intrinsics=face_intrinsics(face_size, fov_deg), fov_deg=fov_deg
    )


def cmd_pano2cube(args: argparse.Namespace) -> int:
    pano = _load_rgb_pano(args.input)
    faces = e2c(pano, args.face_size, args.fov)
    os.makedirs(args.out, exist_ok=True)
    for idx, name in enumerate(FACE_IDS):
        save_png(os.path.join(args.out, f"{name}.png"), faces.faces[idx])
    K = faces.intrinsics
    meta = {
        "face_size": args.face_size,
        "fov_deg": args.fov,
        "focal": K.focal,
        "cx": K.cx,
        "cy": K.cy,
        "face_order": list(FACE_IDS),
    }
    with open(os.path.join(args.out, "intrinsics.json"), "w", encoding="utf-8") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"wrote 6 faces of {args.face_size}px to {args.out}", file=sys.stderr)
    return 0


def cmd_cube2pano(args: argparse.Namespace) -> int:
    if args.width % 2 != 0:
        raise InvalidArgumentError(f"--width must be even, got {args.width}")
    faces = _load_face_dir(args.faces)
    pano = c2e(faces, args.width, args.width // 2)
    save_png(args.out, pano.data)
    print(f"wrote {args.width}x{args.width // 2} pano to {args.out}", file=sys.stderr)
    return 0


def cmd_scaffold(args: argparse.Namespace) -> int:
    pano = _load_rgb_pano(args.pano)
    depth = read_pfm(args.depth)
    if depth.ndim != 2:
        raise InvalidArgumentError(f"{args.depth}: depth must be single-channel")
    params = LiftParams(opacity=args.opacity, scale_mult=args.scale_mult)
    sc = scaffold_from_pano(pano, EquirectRaster(depth[:, :, None]), args.face_size, args.fov, params)
    write_scaffold(sc, args.out)
    report = {"count": len(sc), "culled": sc.culled_count}
    if args.ply:
        result = export_splat_ply(sc, args.ply)
        report["ply_bytes"] = result.byte_count
        report["ply_clamped_opacities"] = result.clamped_opacities
    _emit_report(report)
    return 0


def cmd_render(args: argparse.Namespace) -> int:
    sc = read_scaffold(args.scaffold)
    traj = load_trajectory(args.traj)
    if len(traj) == 0:
        raise InvalidArgumentError("trajectory has no frames")
    os.makedirs(args.out, exist_ok=True)
    for frame, pose in zip(traj.frames, traj.poses):
        view = render(sc, pose, traj.intrinsics, width=args.width, height=args.height)
        stem = os.path.join(args.out, f"frame_{frame:04d}")
        save_png(f"{stem}_color.png", view.color)
        save_png(f"{stem}_alpha.png", view.alpha, bits=16)
        write_pfm(f"{stem}_depth.pfm", view.depth)
    print(f"rendered {len(traj)} frames to {args.out}", file=sys.stderr)
    return 0


def _paired_pfm_files(pred_dir: str, gt_dir: str) -> list[tuple[str, str]]:
    pred = sorted(f for f in os.listdir(pred_dir) if f.endswith(".pfm"))
    gt = sorted(f for f in os.listdir(gt_dir) if f.endswith(".pfm"))
    if not gt:
        raise InvalidArgumentError(f"no .pfm files in {gt_dir}")
    if pred != gt:
        raise InvalidArgumentError(
            f"prediction and ground-truth file names differ: {pred} vs {gt}"
        )
    return [(os.path.join(pred_dir, f), os.path.join(gt_dir, f)) for f in pred]


def cmd_eval_depth(args: argparse.Namespace) -> int:
    rows = []
    for pred_path, gt_path in _paired_pfm_files(args.pred, args.gt):
        pred, gt = read_pfm(pred_path), read_pfm(gt_path)
        mask = DepthEvalMask.from_gt(gt, min_depth=args.min, max_depth=args.max)
        rows.append(
            [
                abs_rel(pred, gt, mask),
                delta_acc(pred, gt, mask, n=1),
                delta_acc(pred, gt, mask, n=2),
                delta_acc(pred, gt, mask, n=3),
                silog(pred, gt, mask, lam=args.lam),
            ]
        )
    mean = np.mean(np.asarray(rows), axis=0)
    _emit_report(
        {
            "AbsRel": mean[0],
            "delta1": mean[1],
            "delta2": mean[2],
            "delta3": mean[3],
            "SILog": mean[4],
            "images": len(rows),
        }
    )
    return 0


def cmd_eval_traj(args: argparse.Namespace) -> int:
    est, gt = load_trajectory(args.est), load_trajectory(args.gt)
    if args.every > 1:
        est, gt = subsample_every(est, args.every), subsample_every(gt, args.every)
    if args.align == "sim3":
        est = align_sim3(est, gt)
    _emit_report(
        {
            "RotErr": rot_err(est, gt),
            "TransErr": trans_err(est, gt),
            "CamMC": cam_mc(est, gt),
            "frames": len(gt),
        }
    )
    return 0


def cmd_synth(args: argparse.Namespace) -> int:
    if args.scene == "room":
        rgb, depth = room_pano(args.size)
    elif args.scene == "sphere":
        rgb, depth = sphere_pano(args.size, radius=args.radius)
    else:
        rgb, depth = gradient_pano(args.size, seed=args.seed)
    os.makedirs(args.out, exist_ok=True)
    save_png(os.path.join(args.out, "pano.png"), rgb.data)
    write_pfm(os.path.join(args.out, "depth.pfm"), depth.data)
    print(f"wrote {args.scene} pano ({args.size}x{args.size // 2}) to {args.out}", file=sys.stderr)
    return 0


def cmd_fuse(args: argparse.Namespace) -> int:
    faces = _load_face_dir(args.faces)
    kernel = _KERNELS[args.kernel]()
    fused = bidirectional_fuse(faces, kernel)
    residual, latent = fusion_residual(faces, kernel)
    os.makedirs(args.out, exist_ok=True)
    for idx, name in enumerate(FACE_IDS):
        save_png(os.path.join(args.out, f"{name}.png"), fused.faces[idx])
    write_pfm(os.path.join(args.out, "latent.pfm"), latent)
    res_set = CubemapFaceSet(
        faces=residual, intrinsics=faces.intrinsics, fov_deg=faces.fov_deg
    )
    _emit_report(
        {
            "kernel": args.kernel,
            "overlap_max_disagreement": _overlap_disagreement(res_set),
            "residual_max_abs": float(np.abs(residual).max()),
        }
    )
    return 0


def _overlap_disagreement(res_set: CubemapFaceSet) -> float:
    """Max residual gap between adjacent lateral faces on shared directions.

    Sampling band: azimuth within 2 degrees of each shared boundary,
    elevation sweep well inside the face. Faces with fov <= 90 have no
    shared directions; report 0 for them.
    """
    if res_set.fov_deg <= 90.0:
        return 0.0
    u_ang = np.radians(np.linspace(43.0, 47.0, 21))
    v_ang = np.radians(np.linspace(-40.0, 40.0, 17))
    uu, vv = np.meshgrid(u_ang, v_ang)
    base = np.stack([np.tan(uu), np.tan(vv), np.ones_like(uu)], axis=-1)
    base /= np.linalg.norm(base, axis=-1, keepdims=True)
    worst = 0.0
    pairs = [("front", "right"), ("right", "back"), ("back", "left"), ("left", "front")]
    for yaw_steps, (near, far) in enumerate(pairs):
        c, s = [(1, 0), (0, 1), (-1, 0), (0, -1)][yaw_steps]
        dirs = np.stack(
            [
                base[..., 0] * c + base[..., 2] * s,
                base[..., 1],
                base[..., 2] * c - base[..., 0] * s,
            ],
            axis=-1,
        )
        on_a, cov_a = sample_face_at_dirs(res_set, near, dirs)
        on_b, cov_b = sample_face_at_dirs(res_set, far, dirs)
        both = cov_a & cov_b
        if both.any():
            worst = max(worst, float(np.abs(on_a[both] - on_b[both]).max()))
    return worst


def cmd_traj_make(args: argparse.Namespace) -> int:
    K = simple_intrinsics(args.width, args.height, args.hfov)
    traj = make_trajectory(args.motion, args.frames, K, extent=args.extent)
    save_trajectory(args.out, traj)
    print(f"wrote {args.frames}-frame {args.motion} trajectory to {args.out}", file=sys.stderr)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="panoscaffold",
        description="Panoramic scaffold pipeline: project, lift, fuse, render, evaluate.",
    )
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")

    p = sub.add_parser("pano2cube", help="split an equirect pano into six face images")
    p.add_argument("--input", required=True, help="2:1 equirectangular PNG")
    p.add_argument("--face-size", type=int, required=True, help="face side length in pixels")
    p.add_argument("--fov", type=float, default=95.0, help="per-face field of view in degrees")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_pano2cube)

    p = sub.add_parser("cube2pano", help="reassemble an equirect pano from face images")
    p.add_argument("--faces", required=True, help="directory written by pano2cube")
    p.add_argument("--width", type=int, required=True, help="output pano width (even)")
    p.add_argument("--out", required=True, help="output PNG path")
    p.set_defaults(func=cmd_cube2pano)

    p = sub.add_parser("scaffold", help="lift a pano + depth map into a gaussian scaffold")
    p.add_argument("--pano", required=True, help="2:1 color PNG")
    p.add_argument("--depth", required=True, help="ray-distance depth PFM (same aspect)")
    p.add_argument("--face-size", type=int, required=True)
    p.add_argument("--fov", type=float, default=95.0)
    p.add_argument("--opacity", type=float, default=0.8, help="opacity for every gaussian")
    p.add_argument("--scale-mult", type=float, default=1.0, help="isotropic scale multiplier")
    p.add_argument("--out", required=True, help="output scaffold path")
    p.add_argument("--ply", default=None, help="optional splat PLY export path")
    p.set_defaults(func=cmd_scaffold)

    p = sub.add_parser("render", help="render a scaffold along a trajectory")
    p.add_argument("--scaffold", required=True)
    p.add_argument("--traj", required=True, help="trajectory JSON")
    p.add_argument("--width", type=int, default=None, help="override render width")
    p.add_argument("--height", type=int, default=None, help="override render height")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("eval-depth", help="depth metrics over paired PFM directories")
    p.add_argument("--pred", required=True, help="directory of predicted .pfm files")
    p.add_argument("--gt", required=True, help="directory of ground-truth .pfm files")
    p.add_argument("--min", type=float, default=0.1, help="evaluation range lower bound")
    p.add_argument("--max", type=float, default=10.0, help="evaluation range upper bound")
    p.add_argument("--lambda", dest="lam", type=float, default=1.0, help="silog variance weight")
    p.set_defaults(func=cmd_eval_depth)

    p = sub.add_parser("eval-traj", help="trajectory metrics between two JSON files")
    p.add_argument("--est", required=True)
    p.add_argument("--gt", required=True)
    p.add_argument("--every", type=int, default=10, help="keep every k-th stored frame")
    p.add_argument("--align", choices=("none", "sim3"), default="none")
    p.set_defaults(func=cmd_eval_traj)

    p = sub.add_parser("synth", help="generate an analytic pano + depth fixture")
    p.add_argument("scene", choices=("room", "gradient", "sphere"))
    p.add_argument("--size", type=int, default=1024, help="pano width (height = width/2)")
    p.add_argument("--seed", type=int, default=0, help="gradient scene seed")
    p.add_argument("--radius", type=float, default=2.0, help="sphere scene radius")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("fuse", help="cross-face fusion through the shared equirect latent")
    p.add_argument("--faces", required=True, help="directory written by pano2cube")
    p.add_argument("--kernel", choices=sorted(_KERNELS), default="gaussian5")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_fuse)

    p = sub.add_parser("traj", help="trajectory utilities")
    traj_sub = p.add_subparsers(dest="traj_command", required=True, metavar="subcommand")
    pm = traj_sub.add_parser("make", help="emit a canonical evaluation trajectory")
    pm.add_argument("--motion", choices=MOTIONS, required=True)
    pm.add_argument("--frames", type=int, required=True)
    pm.add_argument("--extent", type=float, default=1.0)
    pm.add_argument("--width", type=int, default=512)
    pm.add_argument("--height", type=int, default=512)
    pm.add_argument("--hfov", type=float, default=90.0)
    pm.add_argument("--out", required=True, help="output JSON path")
    pm.set_defaults(func=cmd_traj_make)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code else 0
    _echo_config(args)
    try:
        return args.func(args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return 1


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    sys.exit(main())
