"""Equirectangular <-> cubemap projection with an expanded-FoV camera model.

Conventions (fixed, load-bearing for every consumer of this module):

* World frame: right-handed, +y up, +z forward.
* A direction for longitude ``theta`` and latitude ``phi`` is
  ``q = (sin(theta)*cos(phi), sin(phi), cos(theta)*cos(phi))``, so
  ``theta = 0`` looks along +z and ``phi = +pi/2`` is the +y pole.
* Equirect rasters are 2:1; ``theta = 0`` at the horizontal center,
  increasing rightward; ``phi = +pi/2`` at the top row.
* Pixel ``(i, j)`` (column, row) samples the continuous coordinate
  ``(i + 0.5, j + 0.5)``.
* Face cameras share the panorama center. Pixel coordinates follow the
  pinhole map ``p = K * R_i^T * q`` with ``K = [[f, 0, cx], [0, f, cy]]``
  and ``f = (face_size/2) / tan(fov/2)``; the image y axis is the camera
  y axis, so with the identity front-face rotation, world-up maps to
  increasing row index.
* Face order is front(+z), right(+x), back(-z), left(-x), up(+y),
  down(-y); each rotation is camera-to-world and maps camera-forward
  (0, 0, 1) onto the face axis; the front rotation is the identity.

Longitude sampling wraps; latitude sampling clamps at the poles. All
resampling is bilinear unless a caller explicitly asks for nearest
(depth maps must not be blended across discontinuities).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgumentError, UncoveredDirectionError

FACE_IDS = ("front", "right", "back", "left", "up", "down")

# Camera-to-world rotation per face: columns are the camera x/y/z axes in
# world coordinates. The equatorial faces are pure yaws, so all four share
# the front face's vertical orientation.
_FACE_ROTATIONS = {
    "front": np.array([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]),
    "right": np.array([[0.0, 0.0, 1.0], [0.0, 1.0, 0.0], [-1.0, 0.0, 0.0]]),
    "back": np.array([[-1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, -1.0]]),
    "left": np.array([[0.0, 0.0, -1.0], [0.0, 1.0, 0.0], [1.0, 0.0, 0.0]]),
    "up": np.array([[1.0, 0.0, 0.0], [0.0, 0.0, 1.0], [0.0, -1.0, 0.0]]),
    "down": np.array([[1.0, 0.0, 0.0], [0.0, 0.0, -1.0], [0.0, 1.0, 0.0]]),
}

_POLE_EPS = 1e-12


def _tan_half_fov(fov_deg: float) -> float:
    """tan(fov/2) with fov in degrees, exact at the canonical 90-deg case.

    math.tan(math.radians(45)) is 1 - 1ulp because pi/4 is not
    representable; the 90-deg cubemap focal must be exactly size/2.
    """
    half = fov_deg / 2
    if half == 45.0:
        return 1.0
    return math.tan(math.radians(half))


def _lerp(a, b, t):
    # a + t*(b - a): exact when a == b, which keeps constants bitwise
    # stable through resampling chains.
    return a + t * (b - a)


@dataclass(frozen=True)
class CameraIntrinsics:
    """Pinhole intrinsics with square pixels (fx == fy == focal)."""

    focal: float
    cx: float
    cy: float
    width: int
    height: int

    def __post_init__(self):
        if not (self.focal > 0):
            raise InvalidArgumentError(f"focal must be positive, got {self.focal}")
        if not (0 <= self.cx < self.width and 0 <= self.cy < self.height):
            raise InvalidArgumentError(
                f"principal point ({self.cx}, {self.cy}) outside "
                f"{self.width}x{self.height} image"
            )

    def matrix(self) -> np.ndarray:
        """3x3 K matrix."""
        return np.array(
            [[self.focal, 0.0, self.cx], [0.0, self.focal, self.cy], [0.0, 0.0, 1.0]]
        )


@dataclass(frozen=True)
class FaceRotation:
    """A named cubemap face and its camera-to-world rotation."""

    face_id: str
    rotation: np.ndarray

    def __post_init__(self):
        r = np.asarray(self.rotation, dtype=np.float64)
        if r.shape != (3, 3) or np.abs(r.T @ r - np.eye(3)).max() > 1e-12:
            raise InvalidArgumentError(f"rotation for {self.face_id!r} is not orthonormal")
        object.__setattr__(self, "rotation", r)


@dataclass(frozen=True)
class EquirectRaster:
    """An equirectangular raster: (height, width, channels) float array, 2:1."""

    data: np.ndarray

    def __post_init__(self):
        d = np.asarray(self.data)
        if d.ndim == 2:
            d = d[:, :, None]
        if d.ndim != 3 or not np.issubdtype(d.dtype, np.floating):
            raise InvalidArgumentError("equirect data must be a float (H, W, C) array")
        if d.shape[1] != 2 * d.shape[0]:
            raise InvalidArgumentError(
                f"equirect raster must be 2:1, got {d.shape[1]}x{d.shape[0]}"
            )
        object.__setattr__(self, "data", d)

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def channels(self) -> int:
        return self.data.shape[2]


@dataclass(frozen=True)
class CubemapFaceSet:
    """Six square face rasters sharing one intrinsics model.

    ``faces`` is (6, h, h, C) in canonical face order (see FACE_IDS).
    """

    faces: np.ndarray
    intrinsics: CameraIntrinsics
    fov_deg: float

    def __post_init__(self):
        f = np.asarray(self.faces)
        if f.ndim == 3:
            f = f[:, :, :, None]
        if f.ndim != 4 or f.shape[0] != 6 or f.shape[1] != f.shape[2]:
            raise InvalidArgumentError("faces must be a (6, h, h, C) array")
        if not np.issubdtype(f.dtype, np.floating):
            raise InvalidArgumentError("face data must be floating point")
        if f.shape[1] != self.intrinsics.width or f.shape[1] != self.intrinsics.height:
            raise InvalidArgumentError("face size does not match intrinsics")
        if not (0 < self.fov_deg < 180):
            raise InvalidArgumentError(f"fov_deg must be in (0, 180), got {self.fov_deg}")
        expected = (f.shape[1] / 2) / _tan_half_fov(self.fov_deg)
        if abs(self.intrinsics.focal - expected) > 1e-9 * expected:
            raise InvalidArgumentError(
                f"focal {self.intrinsics.focal} inconsistent with fov {self.fov_deg} "
                f"(expected {expected})"
            )
        object.__setattr__(self, "faces", f)

    @property
    def face_size(self) -> int:
        return self.faces.shape[1]

    @property
    def channels(self) -> int:
        return self.faces.shape[3]

    def face(self, face_id: str) -> np.ndarray:
        """Raster of one face, (h, h, C)."""
        return self.faces[FACE_IDS.index(face_id)]


class DepthFaceSet(CubemapFaceSet):
    """A 1-channel face set holding metric z-depth; values <= 0 mark invalid pixels."""

    def __post_init__(self):
        super().__post_init__()
        if self.faces.shape[3] != 1:
            raise InvalidArgumentError("depth face set must have exactly 1 channel")
        if not np.all(np.isfinite(self.faces)):
            raise InvalidArgumentError("depth values must be finite (use <= 0 as sentinel)")


def face_intrinsics(face_size: int, fov_deg: float) -> CameraIntrinsics:
    """Shared intrinsics for a square cubemap face.

    Args:
        face_size: face width == height in pixels; even and >= 2.
        fov_deg: horizontal == vertical field of view, in (0, 180).

    Returns:
        CameraIntrinsics with focal = (face_size/2)/tan(fov/2) and the
        principal point at the face center.
    """
    if int(face_size) != face_size or face_size < 2 or face_size % 2 != 0:
        raise InvalidArgumentError(f"face_size must be even and >= 2, got {face_size}")
    if not (0 < fov_deg < 180):
        raise InvalidArgumentError(f"fov_deg must be in (0, 180), got {fov_deg}")
    face_size = int(face_size)
    focal = (face_size / 2) / _tan_half_fov(fov_deg)
    return CameraIntrinsics(
        focal=focal, cx=face_size / 2, cy=face_size / 2, width=face_size, height=face_size
    )


def face_rotations() -> tuple[FaceRotation, ...]:
    """The six face rotations in canonical order (front rotation is identity)."""
    return tuple(FaceRotation(fid, _FACE_ROTATIONS[fid]) for fid in FACE_IDS)


def dir_from_equirect(theta, phi) -> np.ndarray:
    """Unit direction(s) for longitude/latitude; theta wraps, phi clamps.

    Broadcasts over array inputs; the result has shape ``(..., 3)``.
    """
    theta = np.mod(np.asarray(theta, dtype=np.float64) + np.pi, 2 * np.pi) - np.pi
    phi = np.clip(np.asarray(phi, dtype=np.float64), -np.pi / 2, np.pi / 2)
    cos_phi = np.cos(phi)
    return np.stack(
        np.broadcast_arrays(np.sin(theta) * cos_phi, np.sin(phi), np.cos(theta) * cos_phi),
        axis=-1,
    )


def equirect_from_dir(q) -> tuple[np.ndarray, np.ndarray]:
    """Longitude/latitude of direction(s) ``q``; inverse of dir_from_equirect.

    theta is in [-pi, pi) and defined as 0 at the poles; phi is in
    [-pi/2, pi/2]. Raises for (near-)zero vectors.
    """
    q = np.asarray(q, dtype=np.float64)
    x, y, z = q[..., 0], q[..., 1], q[..., 2]
    hyp = np.hypot(x, z)
    if np.any(np.sqrt(hyp * hyp + y * y) < _POLE_EPS):
        raise InvalidArgumentError("cannot take angles of a zero direction")
    at_pole = hyp < _POLE_EPS
    theta = np.where(at_pole, 0.0, np.arctan2(x, z))
    theta = np.where(theta >= np.pi, -np.pi, theta)  # fold the atan2(+0, -1) == pi case
    phi = np.arctan2(y, hyp)
    if q.ndim == 1:
        return float(theta), float(phi)
    return theta, phi


def equirect_pix_from_angles(theta, phi, width: int, height: int):
    """Continuous equirect raster coordinates (u, v) for angles."""
    u = (theta + np.pi) / (2 * np.pi) * width
    v = (np.pi / 2 - phi) / np.pi * height
    return u, v


def equirect_angles_from_pix(u, v, width: int, height: int):
    """Angles for continuous equirect raster coordinates (u, v)."""
    theta = np.asarray(u, dtype=np.float64) / width * (2 * np.pi) - np.pi
    phi = np.pi / 2 - np.asarray(v, dtype=np.float64) / height * np.pi
    return theta, phi


def sample_equirect(data: np.ndarray, u, v, nearest: bool = False) -> np.ndarray:
    """Sample an equirect (H, W, C) raster at continuous coordinates.

    Wraps in longitude, clamps in latitude; bilinear unless ``nearest``.
    """
    h, w = data.shape[:2]
    fx = np.asarray(u, dtype=np.float64) - 0.5
    fy = np.asarray(v, dtype=np.float64) - 0.5
    if nearest:
        xi = np.mod(np.round(fx).astype(np.int64), w)
        yi = np.clip(np.round(fy).astype(np.int64), 0, h - 1)
        return data[yi, xi]
    x0 = np.floor(fx)
    y0 = np.floor(fy)
    tx = (fx - x0)[..., None]
    ty = (fy - y0)[..., None]
    x0i = np.mod(x0.astype(np.int64), w)
    x1i = np.mod(x0i + 1, w)
    y0i = np.clip(y0.astype(np.int64), 0, h - 1)
    y1i = np.clip(y0.astype(np.int64) + 1, 0, h - 1)
    top = _lerp(data[y0i, x0i], data[y0i, x1i], tx)
    bot = _lerp(data[y1i, x0i], data[y1i, x1i], tx)
    return _lerp(top, bot, ty)


def sample_face(data: np.ndarray, x, y, nearest: bool = False) -> np.ndarray:
    """Sample a face (h, w, C) raster at continuous coordinates, clamping at edges."""
    h, w = data.shape[:2]
    fx = np.asarray(x, dtype=np.float64) - 0.5
    fy = np.asarray(y, dtype=np.float64) - 0.5
    if nearest:
        xi = np.clip(np.round(fx).astype(np.int64), 0, w - 1)
        yi = np.clip(np.round(fy).astype(np.int64), 0, h - 1)
        return data[yi, xi]
    x0 = np.floor(fx)
    y0 = np.floor(fy)
    tx = (fx - x0)[..., None]
    ty = (fy - y0)[..., None]
    x0i = np.clip(x0.astype(np.int64), 0, w - 1)
    x1i = np.clip(x0.astype(np.int64) + 1, 0, w - 1)
    y0i = np.clip(y0.astype(np.int64), 0, h - 1)
    y1i = np.clip(y0.astype(np.int64) + 1, 0, h - 1)
    top = _lerp(data[y0i, x0i], data[y0i, x1i], tx)
    bot = _lerp(data[y1i, x0i], data[y1i, x1i], tx)
    return _lerp(top, bot, ty)


def _face_pixel_dirs(K: CameraIntrinsics, rotation: np.ndarray) -> np.ndarray:
    """World-frame (unnormalized) ray directions through every face pixel center."""
    xs = (np.arange(K.width, dtype=np.float64) + 0.5 - K.cx) / K.focal
    ys = (np.arange(K.height, dtype=np.float64) + 0.5 - K.cy) / K.focal
    gx, gy = np.meshgrid(xs, ys)
    cam = np.stack([gx, gy, np.ones_like(gx)], axis=-1)
    return cam @ rotation.T


def _angles_of_dirs(d: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """(theta, phi) of direction arrays; scale-invariant, no validation."""
    x, y, z = d[..., 0], d[..., 1], d[..., 2]
    hyp = np.hypot(x, z)
    theta = np.where(hyp < _POLE_EPS, 0.0, np.arctan2(x, z))
    theta = np.where(theta >= np.pi, -np.pi, theta)
    phi = np.arctan2(y, hyp)
    return theta, phi


def e2c(
    src: EquirectRaster, face_size: int, fov_deg: float = 95.0, nearest: bool = False
) -> CubemapFaceSet:
    """Project an equirect raster onto six cubemap faces.

    Each face pixel samples the panorama along the ray
    ``R_i * K^-1 * (i+0.5, j+0.5, 1)``. With ``fov_deg`` above 90 the
    faces overlap by (fov - 90)/2 beyond each nominal face boundary.

    Args:
        src: source raster (any channel count).
        face_size: output face size in pixels (even, >= 2).
        fov_deg: per-face field of view; 95 gives the expanded anchors.
        nearest: sample nearest-neighbor instead of bilinear (for depth).
    """
    if not isinstance(src, EquirectRaster):
        src = EquirectRaster(np.asarray(src))
    K = face_intrinsics(face_size, fov_deg)
    out = np.empty((6, face_size, face_size, src.channels), dtype=np.float64)
    for idx, fr in enumerate(face_rotations()):
        dirs = _face_pixel_dirs(K, fr.rotation)
        theta, phi = _angles_of_dirs(dirs)
        u, v = equirect_pix_from_angles(theta, phi, src.width, src.height)
        out[idx] = sample_equirect(src.data, u, v, nearest=nearest)
    return CubemapFaceSet(faces=out, intrinsics=K, fov_deg=fov_deg)


def face_margins(faces: CubemapFaceSet, dirs: np.ndarray) -> np.ndarray:
    """Angular margin of directions inside each face's frustum.

    Returns a (6, ...) array: per-axis angular distance (radians) from the
    nearest frustum edge, positive inside, negative outside; -inf behind
    the camera. A direction is covered by a face iff its margin is >= 0.
    """
    half = math.radians(faces.fov_deg) / 2
    margins = np.empty((6,) + dirs.shape[:-1], dtype=np.float64)
    for idx, fr in enumerate(face_rotations()):
        cam = dirs @ fr.rotation  # == dirs @ R^-T == R^T applied to each dir
        x, y, z = cam[..., 0], cam[..., 1], cam[..., 2]
        behind = z <= 0
        zs = np.where(behind, 1.0, z)
        off_axis = np.maximum(np.abs(np.arctan2(x, zs)), np.abs(np.arctan2(y, zs)))
        margins[idx] = np.where(behind, -np.inf, half - off_axis)
    return margins


def sample_face_at_dirs(
    faces: CubemapFaceSet, face_id: str, dirs: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Sample one face along world directions.

    Returns (values, covered) where covered marks directions inside the
    face's frustum; values outside the frustum are edge-clamped samples
    and only meaningful where covered.
    """
    idx = FACE_IDS.index(face_id)
    rot = face_rotations()[idx].rotation
    K = faces.intrinsics
    cam = dirs @ rot
    x, y, z = cam[..., 0], cam[..., 1], cam[..., 2]
    zs = np.where(z <= 0, np.inf, z)
    px = K.focal * x / zs + K.cx
    py = K.focal * y / zs + K.cy
    half = math.radians(faces.fov_deg) / 2
    covered = (z > 0) & (
        np.maximum(np.abs(np.arctan2(x, np.where(z <= 0, 1.0, z))),
                   np.abs(np.arctan2(y, np.where(z <= 0, 1.0, z)))) <= half
    )
    values = sample_face(faces.faces[idx], np.where(z > 0, px, 0.0), np.where(z > 0, py, 0.0))
    return values, covered


def sample_blended_at_dirs(faces: CubemapFaceSet, dirs: np.ndarray) -> np.ndarray:
    """Blend all covering faces along world directions.

    Weights are each covering face's angular margin from its frustum edge,
    normalized to sum to 1; at 90 degrees this degenerates to the
    nearest-face partition. Directions covered with zero total margin
    (exact boundary hits) fall back to uniform weights over the covering
    faces. Raises UncoveredDirectionError if any direction is covered by
    no face (possible only below 90 degrees fov).
    """
    margins = face_margins(faces, dirs)
    covered = margins >= 0
    cover_count = covered.sum(axis=0)
    if np.any(cover_count == 0):
        n_unc = int((cover_count == 0).sum())
        solid_angle = 4 * np.pi * n_unc / max(cover_count.size, 1)
        raise UncoveredDirectionError(n_unc, float(solid_angle))

    weights = np.where(covered, margins, 0.0)
    # Exact boundary hits can cover with zero total margin; fall back to
    # uniform weights over the covering faces there.
    degenerate = weights.sum(axis=0) <= 0
    if np.any(degenerate):
        weights = np.where(degenerate[None] & covered, 1.0, weights)

    # Blend relative to the first covering face's sample: the anchor term
    # carries the value and the weighted sum only carries differences, so
    # any constant input comes back bitwise (every difference is exactly
    # zero) while general inputs see the same algebraic combination.
    K = faces.intrinsics
    shape = dirs.shape[:-1]
    channels = faces.faces.shape[-1]
    anchor = np.zeros(shape + (channels,), dtype=np.float64)
    have_anchor = np.zeros(shape, dtype=bool)
    num = np.zeros(shape + (channels,), dtype=np.float64)
    den = np.zeros(shape, dtype=np.float64)
    for idx, fr in enumerate(face_rotations()):
        w = weights[idx]
        active = w > 0
        if not np.any(active):
            continue
        cam = dirs @ fr.rotation
        x, y, z = cam[..., 0], cam[..., 1], cam[..., 2]
        safe = z > 0
        zs = np.where(safe, z, 1.0)
        px = np.where(safe, K.focal * x / zs + K.cx, 0.0)
        py = np.where(safe, K.focal * y / zs + K.cy, 0.0)
        vals = sample_face(faces.faces[idx], px, py)
        newly = active & ~have_anchor
        anchor[newly] = vals[newly]
        have_anchor |= active
        num += (vals - anchor) * w[..., None]
        den += w
    return anchor + num / den[..., None]


def c2e(src: CubemapFaceSet, out_width: int, out_height: int) -> EquirectRaster:
    """Resample a cubemap face set back onto an equirect raster.

    Every output pixel blends all faces whose frustum contains its
    direction (two or three in the expanded-FoV overlap regions); blend
    weights are non-negative and sum to one.
    """
    if out_width != 2 * out_height:
        raise InvalidArgumentError(
            f"output must be 2:1, got {out_width}x{out_height}"
        )
    u = np.arange(out_width, dtype=np.float64) + 0.5
    v = np.arange(out_height, dtype=np.float64) + 0.5
    gu, gv = np.meshgrid(u, v)
    theta, phi = equirect_angles_from_pix(gu, gv, out_width, out_height)
    dirs = dir_from_equirect(theta, phi)
    return EquirectRaster(sample_blended_at_dirs(src, dirs))
