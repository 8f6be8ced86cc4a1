"""Depth-accuracy and trajectory-consistency metrics, plus pose selection.

All depth metrics are plain means over a validity mask; all trajectory
metrics are per-frame means over paired pose lists. No alignment is
applied unless explicitly requested via align_sim3.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgumentError
from .geometry import CameraIntrinsics
from .render import CameraPose

DEFAULT_MIN_DEPTH = 0.1
DEFAULT_MAX_DEPTH = 10.0


@dataclass(frozen=True)
class DepthEvalMask:
    """Validity raster for depth evaluation plus the range that built it."""

    valid: np.ndarray
    min_depth: float = DEFAULT_MIN_DEPTH
    max_depth: float = DEFAULT_MAX_DEPTH

    def __post_init__(self):
        object.__setattr__(self, "valid", np.asarray(self.valid, dtype=bool))
        if not (0 < self.min_depth < self.max_depth):
            raise InvalidArgumentError(
                f"need 0 < min_depth < max_depth, got [{self.min_depth}, {self.max_depth}]"
            )

    @classmethod
    def from_gt(
        cls,
        gt: np.ndarray,
        min_depth: float = DEFAULT_MIN_DEPTH,
        max_depth: float = DEFAULT_MAX_DEPTH,
    ) -> "DepthEvalMask":
        gt = np.asarray(gt, dtype=np.float64)
        valid = np.isfinite(gt) & (gt >= min_depth) & (gt <= max_depth)
        return cls(valid=valid, min_depth=min_depth, max_depth=max_depth)


def _masked_pair(pred, gt, mask, require_positive_pred: bool):
    pred = np.asarray(pred, dtype=np.float64)
    gt = np.asarray(gt, dtype=np.float64)
    if pred.shape != gt.shape:
        raise InvalidArgumentError(f"pred {pred.shape} and gt {gt.shape} shapes differ")
    if mask is None:
        valid = np.ones(gt.shape, dtype=bool)
    elif isinstance(mask, DepthEvalMask):
        valid = mask.valid
    else:
        valid = np.asarray(mask, dtype=bool)
    if valid.shape != gt.shape:
        raise InvalidArgumentError(f"mask {valid.shape} does not match rasters {gt.shape}")
    p, g = pred[valid], gt[valid]
    if p.size == 0:
        raise InvalidArgumentError("mask selects no pixels")
    if np.any(g <= 0):
        raise InvalidArgumentError("ground-truth depth must be positive on the mask")
    if require_positive_pred and np.any(p <= 0):
        raise InvalidArgumentError("predicted depth must be positive on the mask")
    return p, g


def abs_rel(pred, gt, mask=None) -> float:
    """Mean of |pred - gt| / gt over valid pixels."""
    p, g = _masked_pair(pred, gt, mask, require_positive_pred=False)
    return float(np.mean(np.abs(p - g) / g))


def delta_acc(pred, gt, mask=None, n: int = 1) -> float:
    """Percentage of valid pixels with max(pred/gt, gt/pred) < 1.25**n."""
    if n not in (1, 2, 3):
        raise InvalidArgumentError(f"n must be 1, 2, or 3, got {n}")
    p, g = _masked_pair(pred, gt, mask, require_positive_pred=True)
    ratio = np.maximum(p / g, g / p)
    return float(100.0 * np.mean(ratio < 1.25**n))


def silog(pred, gt, mask=None, lam: float = 1.0) -> float:
    """Scale-invariant log error sqrt(mean(g^2) - lam*mean(g)^2), g = log(pred/gt).

    With lam = 1 the value is invariant to uniform rescaling of pred.
    """
    if not (0.0 <= lam <= 1.0):
        raise InvalidArgumentError(f"lambda must be in [0, 1], got {lam}")
    p, g = _masked_pair(pred, gt, mask, require_positive_pred=True)
    r = np.log(p) - np.log(g)
    return float(np.sqrt(max(np.mean(r * r) - lam * np.mean(r) ** 2, 0.0)))


@dataclass(frozen=True)
class Trajectory:
    """Ordered camera poses with strictly increasing frame indices."""

    frames: tuple
    poses: tuple
    intrinsics: CameraIntrinsics

    def __post_init__(self):
        frames = tuple(int(i) for i in self.frames)
        poses = tuple(self.poses)
        if len(frames) != len(poses):
            raise InvalidArgumentError(
                f"{len(frames)} frame indices but {len(poses)} poses"
            )
        if any(b <= a for a, b in zip(frames, frames[1:])):
            raise InvalidArgumentError("frame indices must be strictly increasing")
        object.__setattr__(self, "frames", frames)
        object.__setattr__(self, "poses", poses)

    def __len__(self) -> int:
        return len(self.poses)

    def to_json_dict(self) -> dict:
        k = self.intrinsics
        return {
            "intrinsics": {
                "focal": k.focal,
                "cx": k.cx,
                "cy": k.cy,
                "width": k.width,
                "height": k.height,
            },
            "frames": [
                {
                    "index": idx,
                    "rotation": [float(v) for v in pose.rotation.reshape(9)],
                    "translation": [float(v) for v in pose.translation],
                }
                for idx, pose in zip(self.frames, self.poses)
            ],
        }

    @classmethod
    def from_json_dict(cls, obj: dict) -> "Trajectory":
        try:
            k = obj["intrinsics"]
            intrinsics = CameraIntrinsics(
                focal=float(k["focal"]),
                cx=float(k["cx"]),
                cy=float(k["cy"]),
                width=int(k["width"]),
                height=int(k["height"]),
            )
            frames = []
            poses = []
            for frame in obj["frames"]:
                frames.append(int(frame["index"]))
                rotation = np.array(frame["rotation"], dtype=np.float64)
                translation = np.array(frame["translation"], dtype=np.float64)
                if rotation.shape != (9,) or translation.shape != (3,):
                    raise InvalidArgumentError(
                        "frame needs 9 rotation floats (row-major) and 3 translation floats"
                    )
                poses.append(CameraPose(rotation=rotation.reshape(3, 3), translation=translation))
        except (KeyError, TypeError) as exc:
            raise InvalidArgumentError(f"malformed trajectory JSON: {exc}") from exc
        return cls(frames=tuple(frames), poses=tuple(poses), intrinsics=intrinsics)

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2)

    @classmethod
    def from_json(cls, text: str) -> "Trajectory":
        try:
            obj = json.loads(text)
        except json.JSONDecodeError as exc:
            raise InvalidArgumentError(f"trajectory is not valid JSON: {exc}") from exc
        return cls.from_json_dict(obj)


def _paired_poses(est: Trajectory, gt: Trajectory):
    if len(est) != len(gt):
        raise InvalidArgumentError(
            f"trajectory lengths differ: est {len(est)} vs gt {len(gt)}"
        )
    if len(est) == 0:
        raise InvalidArgumentError("trajectories must contain at least one frame")
    return est.poses, gt.poses


def _geodesic_angle(Ra: np.ndarray, Rb: np.ndarray) -> float:
    cos = (np.trace(Ra @ Rb.T) - 1.0) / 2.0
    return float(np.arccos(np.clip(cos, -1.0, 1.0)))


def rot_err(est: Trajectory, gt: Trajectory) -> float:
    """Mean per-frame geodesic rotation angle, radians."""
    ep, gp = _paired_poses(est, gt)
    return float(np.mean([_geodesic_angle(a.rotation, b.rotation) for a, b in zip(ep, gp)]))


def trans_err(est: Trajectory, gt: Trajectory) -> float:
    """Mean per-frame L2 translation error, meters."""
    ep, gp = _paired_poses(est, gt)
    return float(
        np.mean([np.linalg.norm(a.translation - b.translation) for a, b in zip(ep, gp)])
    )


def cam_mc(est: Trajectory, gt: Trajectory) -> float:
    """Mean per-frame Frobenius norm of the 3x4 [R|T] difference."""
    ep, gp = _paired_poses(est, gt)
    diffs = [
        np.linalg.norm(
            np.hstack([a.rotation, a.translation[:, None]])
            - np.hstack([b.rotation, b.translation[:, None]])
        )
        for a, b in zip(ep, gp)
    ]
    return float(np.mean(diffs))


def subsample_every(traj: Trajectory, k: int) -> Trajectory:
    """Keep frames whose index is divisible by k, order preserved."""
    if int(k) != k or k < 1:
        raise InvalidArgumentError(f"k must be an integer >= 1, got {k}")
    kept = [(i, p) for i, p in zip(traj.frames, traj.poses) if i % k == 0]
    return Trajectory(
        frames=tuple(i for i, _ in kept),
        poses=tuple(p for _, p in kept),
        intrinsics=traj.intrinsics,
    )


def select_memory_frame(bank, target: CameraPose, beta: float = 1.0):
    """Frame id minimizing ||T_b - T_t|| + beta * geodesic(R_b, R_t); ties -> lowest id."""
    if beta < 0:
        raise InvalidArgumentError(f"beta must be >= 0, got {beta}")
    entries = list(bank)
    if not entries:
        raise InvalidArgumentError("memory bank is empty")
    best_id = None
    best_score = None
    for frame_id, pose in entries:
        score = float(np.linalg.norm(pose.translation - target.translation))
        score += beta * _geodesic_angle(pose.rotation, target.rotation)
        if (
            best_score is None
            or score < best_score
            or (score == best_score and frame_id < best_id)
        ):
            best_id, best_score = frame_id, score
    return best_id


def align_sim3(est: Trajectory, gt: Trajectory) -> Trajectory:
    """Similarity-align est to gt over camera centers (Umeyama closed form).

    Returns est with each pose's world gauge replaced: centers map through
    the fitted x -> s*S*x + t, rotations compose with S on the world side.
    """
    ep, gp = _paired_poses(est, gt)
    if len(ep) < 3:
        raise InvalidArgumentError("sim3 alignment needs at least 3 frames")
    src = np.stack([p.camera_center for p in ep])
    dst = np.stack([p.camera_center for p in gp])
    mu_s, mu_d = src.mean(axis=0), dst.mean(axis=0)
    xs, xd = src - mu_s, dst - mu_d
    var_s = np.mean(np.sum(xs * xs, axis=1))
    if var_s == 0:
        raise InvalidArgumentError("est camera centers are coincident; sim3 is degenerate")
    cov = xd.T @ xs / len(ep)
    U, D, Vt = np.linalg.svd(cov)
    sign = np.eye(3)
    if np.linalg.det(U) * np.linalg.det(Vt) < 0:
        sign[2, 2] = -1.0
    S = U @ sign @ Vt
    scale = np.trace(np.diag(D) @ sign) / var_s
    t = mu_d - scale * (S @ mu_s)

    poses = []
    for pose in ep:
        R_new = pose.rotation @ S.T
        center = scale * (S @ pose.camera_center) + t
        poses.append(CameraPose(rotation=R_new, translation=-(R_new @ center)))
    return Trajectory(frames=est.frames, poses=tuple(poses), intrinsics=est.intrinsics)


def format_report(report: dict) -> str:
    """Aligned two-column text rendering of a flat metric dict."""
    width = max(len(k) for k in report)
    return "\n".join(f"{k.ljust(width)}  {report[k]:.6f}" for k in report)
