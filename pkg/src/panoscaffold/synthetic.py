"""Analytic test scenes and camera paths.

Scenes are defined directly on the view sphere: color is a smooth
low-order function of ray direction (plus a gentle wall-anchored tint for
the room), depth is closed-form ray distance. That keeps every fixture
free of sampling noise — resampled versions can be checked against the
same formulas at any resolution.
"""

from __future__ import annotations

import numpy as np

from .errors import InvalidArgumentError
from .geometry import (
    CameraIntrinsics,
    CubemapFaceSet,
    DepthFaceSet,
    EquirectRaster,
    dir_from_equirect,
    face_intrinsics,
    face_rotations,
    _tan_half_fov,
)
from .metrics import Trajectory
from .render import CameraPose

MOTIONS = ("forward", "backward", "left", "right", "orbit", "lemniscate")


def _palette(dirs: np.ndarray) -> np.ndarray:
    """Smooth RGB in roughly [0.08, 0.92] from unit directions."""
    x, y, z = dirs[..., 0], dirs[..., 1], dirs[..., 2]
    r = 0.46 + 0.28 * x + 0.10 * y * z
    g = 0.50 - 0.22 * z + 0.12 * x * y
    b = 0.48 + 0.20 * y + 0.14 * x * z
    return np.stack([r, g, b], axis=-1)


def _wall_tint(points: np.ndarray) -> np.ndarray:
    """Low-amplitude texture anchored to world positions (continuous everywhere)."""
    return (
        0.04
        * np.sin(2.1 * points[..., 0])
        * np.cos(1.7 * points[..., 1])
        * np.cos(1.3 * points[..., 2])
    )


def room_ray_depth(dirs: np.ndarray, half_size: float = 2.0) -> np.ndarray:
    """Ray distance from the origin to a cube room's walls at +-half_size."""
    if not (half_size > 0):
        raise InvalidArgumentError(f"half_size must be positive, got {half_size}")
    d = np.asarray(dirs, dtype=np.float64)
    d = d / np.linalg.norm(d, axis=-1, keepdims=True)
    return half_size / np.max(np.abs(d), axis=-1)


def _pano_dirs(width: int) -> np.ndarray:
    if width % 2 != 0 or width < 4:
        raise InvalidArgumentError(f"pano width must be even and >= 4, got {width}")
    height = width // 2
    xs = np.arange(width, dtype=np.float64) + 0.5
    ys = np.arange(height, dtype=np.float64) + 0.5
    gx, gy = np.meshgrid(xs, ys)
    theta = (gx / width) * 2 * np.pi - np.pi
    phi = np.pi / 2 - (gy / height) * np.pi
    return dir_from_equirect(theta, phi)


def room_pano(width: int, half_size: float = 2.0):
    """(rgb, ray-depth) equirect rasters of a cube room seen from its center."""
    dirs = _pano_dirs(width)
    t = room_ray_depth(dirs, half_size)
    color = _palette(dirs) + _wall_tint(dirs * t[..., None])[..., None]
    return EquirectRaster(color), EquirectRaster(t[:, :, None])


def sphere_pano(width: int, radius: float = 2.0):
    """(rgb, ray-depth) rasters of the inside of a textured sphere."""
    if not (radius > 0):
        raise InvalidArgumentError(f"radius must be positive, got {radius}")
    dirs = _pano_dirs(width)
    color = _palette(dirs) + _wall_tint(dirs * radius)[..., None]
    depth = np.full(dirs.shape[:-1], float(radius))
    return EquirectRaster(color), EquirectRaster(depth[:, :, None])


def gradient_pano(width: int, seed: int = 0):
    """(rgb, ray-depth) rasters from seeded low-order direction polynomials."""
    dirs = _pano_dirs(width)
    x, y, z = dirs[..., 0], dirs[..., 1], dirs[..., 2]
    monomials = np.stack(
        [np.ones_like(x), x, y, z, x * y, x * z, y * z, x * x, y * y, z * z], axis=-1
    )
    rng = np.random.default_rng(seed)
    coeffs = rng.uniform(-1.0, 1.0, size=(4, 10))
    fields = monomials @ coeffs.T  # (..., 4): three color channels + depth shape
    bound = np.sum(np.abs(coeffs), axis=1)
    normalized = fields / bound
    color = 0.5 + 0.35 * normalized[..., :3]
    depth = 2.0 + 0.6 * normalized[..., 3]
    return EquirectRaster(color), EquirectRaster(depth[:, :, None])


def room_faces(face_size: int, fov_deg: float = 95.0, half_size: float = 2.0):
    """Analytic per-face (rgb CubemapFaceSet, z-depth DepthFaceSet) of the room.

    Depth is exact per pixel ray: the hit point of camera ray (ax, ay, 1)
    scaled by t has camera z == t, so z-depth = half_size / max|world ray|.
    """
    K = face_intrinsics(face_size, fov_deg)
    xs = (np.arange(face_size, dtype=np.float64) + 0.5 - K.cx) / K.focal
    ys = (np.arange(face_size, dtype=np.float64) + 0.5 - K.cy) / K.focal
    gx, gy = np.meshgrid(xs, ys)
    rays_cam = np.stack([gx, gy, np.ones_like(gx)], axis=-1)

    rgb = np.empty((6, face_size, face_size, 3))
    depth = np.empty((6, face_size, face_size, 1))
    for idx, fr in enumerate(face_rotations()):
        rays_world = rays_cam @ fr.rotation.T
        t = half_size / np.max(np.abs(rays_world), axis=-1)
        hits = rays_world * t[..., None]
        unit = rays_world / np.linalg.norm(rays_world, axis=-1, keepdims=True)
        rgb[idx] = _palette(unit) + _wall_tint(hits)[..., None]
        depth[idx, :, :, 0] = t
    return (
        CubemapFaceSet(faces=rgb, intrinsics=K, fov_deg=fov_deg),
        DepthFaceSet(faces=depth, intrinsics=K, fov_deg=fov_deg),
    )


def simple_intrinsics(width: int, height: int, hfov_deg: float = 90.0) -> CameraIntrinsics:
    """Centered pinhole intrinsics from a horizontal field of view."""
    if width < 1 or height < 1:
        raise InvalidArgumentError(f"image size must be >= 1, got {width}x{height}")
    if not (0 < hfov_deg < 180):
        raise InvalidArgumentError(f"hfov_deg must be in (0, 180), got {hfov_deg}")
    focal = (width / 2) / _tan_half_fov(hfov_deg)
    return CameraIntrinsics(focal=focal, cx=width / 2, cy=height / 2, width=width, height=height)


def _look_rotation(forward: np.ndarray) -> np.ndarray:
    """World-to-camera rotation with camera +z along ``forward``, world +y up."""
    f = np.asarray(forward, dtype=np.float64)
    f = f / np.linalg.norm(f)
    up = np.array([0.0, 1.0, 0.0])
    right = np.cross(up, f)
    n = np.linalg.norm(right)
    if n < 1e-12:
        raise InvalidArgumentError("view direction may not be vertical")
    right /= n
    down = np.cross(f, right)
    return np.stack([right, down, f])


def _pose_at(rotation: np.ndarray, center: np.ndarray) -> CameraPose:
    return CameraPose(rotation=rotation, translation=-(rotation @ center))


def make_trajectory(
    motion: str,
    n_frames: int,
    intrinsics: CameraIntrinsics,
    extent: float = 1.0,
) -> Trajectory:
    """Canonical evaluation paths.

    Linear motions translate the camera by up to ``extent`` meters with
    identity rotation. ``orbit`` is a circle of radius ``extent`` about
    the origin, always facing it; ``lemniscate`` is a Bernoulli figure
    eight of half-width ``extent`` in the horizontal plane, heading along
    the direction of travel.
    """
    if motion not in MOTIONS:
        raise InvalidArgumentError(f"motion must be one of {MOTIONS}, got {motion!r}")
    if int(n_frames) != n_frames or n_frames < 1:
        raise InvalidArgumentError(f"n_frames must be an integer >= 1, got {n_frames}")
    if not (extent > 0):
        raise InvalidArgumentError(f"extent must be positive, got {extent}")

    poses = []
    if motion in ("forward", "backward", "left", "right"):
        axis = {
            "forward": np.array([0.0, 0.0, 1.0]),
            "backward": np.array([0.0, 0.0, -1.0]),
            "left": np.array([-1.0, 0.0, 0.0]),
            "right": np.array([1.0, 0.0, 0.0]),
        }[motion]
        eye = np.eye(3)
        for k in range(n_frames):
            frac = 0.0 if n_frames == 1 else k / (n_frames - 1)
            poses.append(_pose_at(eye, axis * (extent * frac)))
    elif motion == "orbit":
        for k in range(n_frames):
            psi = 2 * np.pi * k / n_frames
            center = np.array([extent * np.sin(psi), 0.0, -extent * np.cos(psi)])
            poses.append(_pose_at(_look_rotation(-center), center))
    else:  # lemniscate of Bernoulli, parameterized by angle
        for k in range(n_frames):
            psi = 2 * np.pi * k / n_frames
            s, c = np.sin(psi), np.cos(psi)
            den = 1.0 + s * s
            center = np.array([extent * c / den, 0.0, extent * s * c / den])
            dx = -s * (3.0 - s * s) / den**2
            dz = ((c * c - s * s) * (1.0 + s * s) - 2.0 * s * s * c * c) / den**2
            poses.append(_pose_at(_look_rotation(np.array([dx, 0.0, dz])), center))

    return Trajectory(frames=tuple(range(n_frames)), poses=tuple(poses), intrinsics=intrinsics)
