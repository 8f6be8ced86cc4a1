"""CPU splat renderer: perspective EWA projection + tiled alpha compositing.

Each 3D Gaussian is projected to a screen-space Gaussian through the
local affine (Jacobian) approximation of the pinhole map, dilated by a
small low-pass term, then composited front to back with early
termination. Everything is float64 and deterministic: splats get a
global stable depth sort, and per-pixel accumulation order never depends
on thread count.

Camera convention: x_cam = R @ x_world + T (world-to-camera). Image y
increases with camera y (downward-looking +v), matching the face rasters.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numba
import numpy as np

from ._raster import build_tile_lists, composite_tiles
from .errors import InvalidArgumentError
from .geometry import CameraIntrinsics
from .rotation import quat_to_rotmat
from .scaffold import Gaussian, GaussianScaffold

NEAR_CLIP = 0.05
LOWPASS_PX2 = 0.3
SIGMA_CUTOFF = 3.0
TILE = 16
STOP_TRANSMITTANCE = 1e-4
MAX_CONTRIBUTION = 0.99
FRUSTUM_CLAMP = 1.3


@dataclass(frozen=True)
class CameraPose:
    """World-to-camera rigid transform: x_cam = rotation @ x_world + translation."""

    rotation: np.ndarray
    translation: np.ndarray

    def __post_init__(self):
        R = np.asarray(self.rotation, dtype=np.float64).reshape(3, 3)
        T = np.asarray(self.translation, dtype=np.float64).reshape(3)
        if not np.all(np.isfinite(R)) or not np.all(np.isfinite(T)):
            raise InvalidArgumentError("pose must be finite")
        if np.abs(R @ R.T - np.eye(3)).max() > 1e-9:
            raise InvalidArgumentError("pose rotation must be orthonormal")
        if np.linalg.det(R) < 0:
            raise InvalidArgumentError("pose rotation must have det +1")
        object.__setattr__(self, "rotation", R)
        object.__setattr__(self, "translation", T)

    @classmethod
    def identity(cls) -> "CameraPose":
        return cls(rotation=np.eye(3), translation=np.zeros(3))

    @property
    def camera_center(self) -> np.ndarray:
        """Camera position in world coordinates: -R^T T."""
        return -(self.rotation.T @ self.translation)


@dataclass(frozen=True)
class RenderedView:
    """color is premultiplied by alpha; depth is alpha-weighted mean camera z
    (0 where nothing rendered)."""

    color: np.ndarray
    alpha: np.ndarray
    depth: np.ndarray

    def __post_init__(self):
        if self.color.ndim != 3 or self.color.shape[2] != 3:
            raise InvalidArgumentError("color must be (H, W, 3)")
        if self.alpha.shape != self.color.shape[:2] or self.depth.shape != self.alpha.shape:
            raise InvalidArgumentError("alpha/depth must be (H, W) matching color")
        if np.any(self.alpha < 0) or np.any(self.alpha > 1):
            raise InvalidArgumentError("alpha must lie in [0, 1]")
        if np.any(self.color > self.alpha[:, :, None]):
            raise InvalidArgumentError("premultiplied color cannot exceed alpha")


def _apply_thread_env():
    """Honor O2S_THREADS (0 = all cores), clamped to what numba has."""
    raw = os.environ.get("O2S_THREADS", "").strip()
    if not raw:
        return
    try:
        requested = int(raw)
    except ValueError:
        raise InvalidArgumentError(f"O2S_THREADS must be an integer, got {raw!r}") from None
    if requested < 0:
        raise InvalidArgumentError(f"O2S_THREADS must be >= 0, got {requested}")
    available = numba.config.NUMBA_NUM_THREADS
    numba.set_num_threads(available if requested == 0 else max(1, min(requested, available)))


def _project_batch(
    centers: np.ndarray,
    scales: np.ndarray,
    quats: np.ndarray,
    pose: CameraPose,
    K: CameraIntrinsics,
):
    """Vectorized EWA projection.

    Returns (keep_idx, mean2d, cov2d_flat, z) where cov2d_flat holds
    (c00, c01, c11) for the kept subset. Culls z <= NEAR_CLIP.
    """
    R = pose.rotation
    cam = centers @ R.T + pose.translation
    keep = np.flatnonzero(cam[:, 2] > NEAR_CLIP)
    cam = cam[keep]
    x, y, z = cam[:, 0], cam[:, 1], cam[:, 2]
    f = K.focal

    mean2d = np.stack([f * x / z + K.cx, f * y / z + K.cy], axis=-1)

    # World-frame covariance Rq diag(s^2) Rq^T, then into the camera frame.
    rq = quat_to_rotmat(quats[keep])
    m = rq * (scales[keep] ** 2)[:, None, :]
    sigma_world = m @ np.swapaxes(rq, 1, 2)
    v = np.einsum("ij,njk,lk->nil", R, sigma_world, R)

    # J rows: (f/z, 0, -f x/z^2) and (0, f/z, -f y/z^2). The linearization
    # point is clamped to 1.3x the frustum so a splat grazing the camera
    # plane keeps a bounded footprint (its center still projects far off
    # screen, which culls it); splats whose center is on screen satisfy
    # |x/z| < lim and are untouched.
    lim_x = FRUSTUM_CLAMP * max(K.cx, K.width - K.cx) / f
    lim_y = FRUSTUM_CLAMP * max(K.cy, K.height - K.cy) / f
    a = f / z
    b = -f * np.clip(x / z, -lim_x, lim_x) / z
    c = -f * np.clip(y / z, -lim_y, lim_y) / z
    v00, v01, v02 = v[:, 0, 0], v[:, 0, 1], v[:, 0, 2]
    v11, v12, v22 = v[:, 1, 1], v[:, 1, 2], v[:, 2, 2]
    c00 = a * a * v00 + 2 * a * b * v02 + b * b * v22 + LOWPASS_PX2
    c01 = a * a * v01 + a * c * v02 + a * b * v12 + b * c * v22
    c11 = a * a * v11 + 2 * a * c * v12 + c * c * v22 + LOWPASS_PX2
    return keep, mean2d, np.stack([c00, c01, c11], axis=-1), z


def project_gaussian(g: Gaussian, pose: CameraPose, K: CameraIntrinsics):
    """Screen-space footprint of one Gaussian: (mean2d, cov2d, z), or None if culled."""
    keep, mean2d, cov, z = _project_batch(
        g.center[None, :], g.scale[None, :], g.rotation[None, :], pose, K
    )
    if keep.size == 0:
        return None
    c00, c01, c11 = cov[0]
    return mean2d[0], np.array([[c00, c01], [c01, c11]]), float(z[0])


def render(
    scaffold: GaussianScaffold,
    pose: CameraPose,
    K: CameraIntrinsics,
    width: int | None = None,
    height: int | None = None,
) -> RenderedView:
    """Rasterize a scaffold into color / alpha / expected-depth images.

    Splats are depth-sorted (stable: ties keep scaffold order), binned
    into 16x16 pixel tiles, and composited front to back with per-pixel
    early termination at transmittance < 1e-4. Contributions are clamped
    to 0.99 and truncated at the 3-sigma screen-space bounding box.
    """
    width = int(K.width if width is None else width)
    height = int(K.height if height is None else height)
    if width < 1 or height < 1:
        raise InvalidArgumentError(f"image size must be >= 1, got {width}x{height}")

    empty = RenderedView(
        color=np.zeros((height, width, 3)),
        alpha=np.zeros((height, width)),
        depth=np.zeros((height, width)),
    )
    if len(scaffold) == 0:
        return empty

    keep, mean2d, cov, z = _project_batch(
        scaffold.centers, scaffold.scales, scaffold.rotations, pose, K
    )
    if keep.size == 0:
        return empty

    c00, c01, c11 = cov[:, 0], cov[:, 1], cov[:, 2]
    det = c00 * c11 - c01 * c01
    valid = (det > 0) & np.isfinite(det)

    # 3-sigma extent from the major eigenvalue of the 2x2 covariance.
    mid = 0.5 * (c00 + c11)
    lam_max = mid + np.sqrt(np.maximum(mid * mid - det, 0.0))
    radius = SIGMA_CUTOFF * np.sqrt(lam_max)

    x0 = np.floor(mean2d[:, 0] - radius).astype(np.int64)
    x1 = np.ceil(mean2d[:, 0] + radius).astype(np.int64)
    y0 = np.floor(mean2d[:, 1] - radius).astype(np.int64)
    y1 = np.ceil(mean2d[:, 1] + radius).astype(np.int64)
    np.clip(x0, 0, width - 1, out=x0)
    np.clip(x1, 0, width - 1, out=x1)
    np.clip(y0, 0, height - 1, out=y0)
    np.clip(y1, 0, height - 1, out=y1)
    on_screen = (
        valid
        & (mean2d[:, 0] + radius > 0)
        & (mean2d[:, 0] - radius < width)
        & (mean2d[:, 1] + radius > 0)
        & (mean2d[:, 1] - radius < height)
    )
    sub = np.flatnonzero(on_screen)
    if sub.size == 0:
        return empty

    order = sub[np.argsort(z[sub], kind="stable")]
    inv_det = 1.0 / det[order]
    con_a = c11[order] * inv_det
    con_b = c01[order] * inv_det
    con_c = c00[order] * inv_det

    tiles_x = (width + TILE - 1) // TILE
    tiles_y = (height + TILE - 1) // TILE
    offsets, lists = build_tile_lists(
        x0[order] // TILE, x1[order] // TILE, y0[order] // TILE, y1[order] // TILE,
        tiles_x, tiles_y,
    )

    _apply_thread_env()
    src = keep[order]
    color, alpha, depth = composite_tiles(
        width,
        height,
        TILE,
        tiles_x,
        offsets,
        lists,
        np.ascontiguousarray(mean2d[order]),
        con_a,
        con_b,
        con_c,
        np.ascontiguousarray(scaffold.opacities[src]),
        np.ascontiguousarray(z[order]),
        np.ascontiguousarray(scaffold.colors[src]),
        x0[order],
        x1[order],
        y0[order],
        y1[order],
        STOP_TRANSMITTANCE,
        MAX_CONTRIBUTION,
    )
    return RenderedView(color=color, alpha=alpha, depth=depth)
