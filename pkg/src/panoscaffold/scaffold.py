"""Lifting per-face RGB + depth rasters into an explicit 3D Gaussian scaffold.

One Gaussian per valid-depth pixel per face. Centers are unprojected along
the pixel ray (``K^-1 * u * d + delta`` in camera coordinates, then rotated
into the shared world frame); color comes from the RGB face, opacity and
the isotropic one-pixel-footprint scale from LiftParams. Pixels whose
depth is <= 0 (the invalid sentinel) are culled. Gaussian order is
face-major, row-major, so a scaffold is addressable by provenance.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import GeometryMismatchError, InvalidArgumentError, InvalidDepthError
from .geometry import (
    FACE_IDS,
    CameraIntrinsics,
    CubemapFaceSet,
    DepthFaceSet,
    EquirectRaster,
    e2c,
    face_rotations,
)

_DEPTH_CONVENTIONS = ("ray", "z")


@dataclass(frozen=True)
class LiftParams:
    """Deterministic stand-ins for the per-Gaussian predicted parameters.

    opacity: constant alpha for every Gaussian.
    scale_mult: isotropic scale is scale_mult * depth / focal — the
        footprint of one pixel at the Gaussian's depth, times this factor.
    delta: positional offset added in camera coordinates before rotation.
    depth_convention: how panoramic depth is stored; "ray" (distance along
        the ray, the panorama standard) or "z" (already per-face z-depth).
    """

    opacity: float = 0.8
    scale_mult: float = 1.0
    delta: tuple[float, float, float] = (0.0, 0.0, 0.0)
    depth_convention: str = "ray"

    def __post_init__(self):
        if not (0.0 <= self.opacity <= 1.0):
            raise InvalidArgumentError(f"opacity must be in [0, 1], got {self.opacity}")
        if not (self.scale_mult > 0):
            raise InvalidArgumentError(f"scale_mult must be positive, got {self.scale_mult}")
        if len(self.delta) != 3:
            raise InvalidArgumentError("delta must have 3 components")
        if self.depth_convention not in _DEPTH_CONVENTIONS:
            raise InvalidArgumentError(
                f"depth_convention must be one of {_DEPTH_CONVENTIONS}, "
                f"got {self.depth_convention!r}"
            )


@dataclass(frozen=True)
class Gaussian:
    """A single 3D Gaussian primitive (quaternion is wxyz)."""

    center: np.ndarray
    opacity: float
    scale: np.ndarray
    rotation: np.ndarray
    color: np.ndarray

    def __post_init__(self):
        center = np.asarray(self.center, dtype=np.float64).reshape(3)
        scale = np.asarray(self.scale, dtype=np.float64).reshape(3)
        rotation = np.asarray(self.rotation, dtype=np.float64).reshape(4)
        color = np.asarray(self.color, dtype=np.float64).reshape(3)
        if not (0.0 <= self.opacity <= 1.0):
            raise InvalidArgumentError(f"opacity must be in [0, 1], got {self.opacity}")
        if not np.all(scale > 0):
            raise InvalidArgumentError("scale components must be positive")
        if abs(np.linalg.norm(rotation) - 1.0) > 1e-9:
            raise InvalidArgumentError("rotation quaternion must be unit length")
        if np.any(color < 0) or np.any(color > 1):
            raise InvalidArgumentError("color channels must be in [0, 1]")
        for name, v in (("center", center), ("scale", scale), ("color", color)):
            if not np.all(np.isfinite(v)):
                raise InvalidArgumentError(f"{name} must be finite")
        object.__setattr__(self, "center", center)
        object.__setattr__(self, "scale", scale)
        object.__setattr__(self, "rotation", rotation)
        object.__setattr__(self, "color", color)


@dataclass(frozen=True)
class SourceLayout:
    """Provenance of a scaffold lifted from a full face set."""

    face_size: int
    fov_deg: float
    face_order: tuple[str, ...] = FACE_IDS


class GaussianScaffold:
    """An ordered, immutable collection of Gaussians (structure-of-arrays).

    Field arrays are float64: centers (N,3), opacities (N,), scales (N,3),
    rotations (N,4) wxyz quaternions, colors (N,3). Indexing returns a
    Gaussian view; iteration and len() behave like the ordered list the
    fields represent.
    """

    def __init__(
        self,
        centers: np.ndarray,
        opacities: np.ndarray,
        scales: np.ndarray,
        rotations: np.ndarray,
        colors: np.ndarray,
        source_layout: SourceLayout | None = None,
    ):
        self.centers = np.ascontiguousarray(centers, dtype=np.float64).reshape(-1, 3)
        n = self.centers.shape[0]
        self.opacities = np.ascontiguousarray(opacities, dtype=np.float64).reshape(n)
        self.scales = np.ascontiguousarray(scales, dtype=np.float64).reshape(n, 3)
        self.rotations = np.ascontiguousarray(rotations, dtype=np.float64).reshape(n, 4)
        self.colors = np.ascontiguousarray(colors, dtype=np.float64).reshape(n, 3)
        self.source_layout = source_layout
        self._validate()

    def _validate(self):
        if np.any(self.opacities < 0) or np.any(self.opacities > 1):
            raise InvalidArgumentError("opacities must be in [0, 1]")
        if np.any(self.scales <= 0):
            raise InvalidArgumentError("scales must be positive")
        norms = np.linalg.norm(self.rotations, axis=1)
        if norms.size and np.abs(norms - 1.0).max() > 1e-9:
            raise InvalidArgumentError("rotation quaternions must be unit length")
        if np.any(self.colors < 0) or np.any(self.colors > 1):
            raise InvalidArgumentError("colors must be in [0, 1]")
        for name in ("centers", "scales", "colors"):
            if not np.all(np.isfinite(getattr(self, name))):
                raise InvalidArgumentError(f"{name} must be finite")

    def __len__(self) -> int:
        return self.centers.shape[0]

    def __getitem__(self, i: int) -> Gaussian:
        return Gaussian(
            center=self.centers[i],
            opacity=float(self.opacities[i]),
            scale=self.scales[i],
            rotation=self.rotations[i],
            color=self.colors[i],
        )

    def __iter__(self):
        return (self[i] for i in range(len(self)))

    @property
    def culled_count(self) -> int | None:
        """Pixels dropped by invalid depth, when provenance is known."""
        if self.source_layout is None:
            return None
        return 6 * self.source_layout.face_size**2 - len(self)

    @classmethod
    def from_gaussians(
        cls, gaussians: list[Gaussian], source_layout: SourceLayout | None = None
    ) -> "GaussianScaffold":
        n = len(gaussians)
        return cls(
            centers=np.array([g.center for g in gaussians]).reshape(n, 3),
            opacities=np.array([g.opacity for g in gaussians]),
            scales=np.array([g.scale for g in gaussians]).reshape(n, 3),
            rotations=np.array([g.rotation for g in gaussians]).reshape(n, 4),
            colors=np.array([g.color for g in gaussians]).reshape(n, 3),
            source_layout=source_layout,
        )


def unproject_pixel(
    u: tuple[float, float],
    d: float,
    K: CameraIntrinsics,
    delta: tuple[float, float, float] = (0.0, 0.0, 0.0),
) -> np.ndarray:
    """Camera-frame 3D point of pixel coordinate ``u`` at depth ``d``.

    Returns ((u_x - cx)/f, (u_y - cy)/f, 1) * d + delta. Depth is the
    camera z coordinate, not ray length.
    """
    if not (d > 0):
        raise InvalidDepthError(f"depth must be positive, got {d}")
    ux, uy = float(u[0]), float(u[1])
    return (
        np.array([(ux - K.cx) / K.focal, (uy - K.cy) / K.focal, 1.0]) * d
        + np.asarray(delta, dtype=np.float64)
    )


def lift_to_scaffold(
    rgb: CubemapFaceSet, depth: DepthFaceSet, params: LiftParams | None = None
) -> GaussianScaffold:
    """Lift RGB + z-depth faces into one Gaussian per valid-depth pixel.

    Centers are face_rotation @ (K^-1 u d + delta) in the shared world
    frame (all faces look out from the origin). Order is face-major,
    row-major. Depth <= 0 culls the pixel.
    """
    params = params or LiftParams()
    if rgb.channels != 3:
        raise InvalidArgumentError(f"rgb faces must have 3 channels, got {rgb.channels}")
    if not isinstance(depth, DepthFaceSet):
        raise InvalidArgumentError("depth must be a DepthFaceSet")
    if rgb.face_size != depth.face_size or rgb.fov_deg != depth.fov_deg:
        raise GeometryMismatchError(
            f"rgb ({rgb.face_size}px, {rgb.fov_deg} deg) and depth "
            f"({depth.face_size}px, {depth.fov_deg} deg) do not share geometry"
        )

    K = rgb.intrinsics
    size = rgb.face_size
    xs = (np.arange(size, dtype=np.float64) + 0.5 - K.cx) / K.focal
    ys = (np.arange(size, dtype=np.float64) + 0.5 - K.cy) / K.focal
    gx, gy = np.meshgrid(xs, ys)
    rays = np.stack([gx, gy, np.ones_like(gx)], axis=-1).reshape(-1, 3)
    delta = np.asarray(params.delta, dtype=np.float64)

    centers, opacities, scales, rotations, colors = [], [], [], [], []
    for idx, fr in enumerate(face_rotations()):
        d = depth.faces[idx, :, :, 0].reshape(-1)
        valid = d > 0
        dv = d[valid]
        cam = rays[valid] * dv[:, None] + delta
        centers.append(cam @ fr.rotation.T)
        colors.append(rgb.faces[idx].reshape(-1, 3)[valid])
        opacities.append(np.full(dv.shape, params.opacity))
        iso = params.scale_mult * dv / K.focal
        scales.append(np.repeat(iso[:, None], 3, axis=1))
        quat = np.zeros((dv.shape[0], 4))
        quat[:, 0] = 1.0
        rotations.append(quat)

    return GaussianScaffold(
        centers=np.concatenate(centers),
        opacities=np.concatenate(opacities),
        scales=np.concatenate(scales),
        rotations=np.concatenate(rotations),
        colors=np.concatenate(colors),
        source_layout=SourceLayout(face_size=size, fov_deg=rgb.fov_deg),
    )


def transform_rigid(
    scaffold: GaussianScaffold, rotation: np.ndarray, translation: np.ndarray
) -> GaussianScaffold:
    """Apply a world-frame rigid motion x -> R x + t to every Gaussian.

    Centers move; orientations compose with R on the left; scales,
    opacities, colors, and provenance are untouched.
    """
    from .rotation import quat_multiply, rotmat_to_quat

    R = np.asarray(rotation, dtype=np.float64).reshape(3, 3)
    t = np.asarray(translation, dtype=np.float64).reshape(3)
    if np.abs(R @ R.T - np.eye(3)).max() > 1e-9 or np.linalg.det(R) < 0:
        raise InvalidArgumentError("rotation must be orthonormal with det +1")
    qR = rotmat_to_quat(R)
    return GaussianScaffold(
        centers=scaffold.centers @ R.T + t,
        opacities=scaffold.opacities,
        scales=scaffold.scales,
        rotations=quat_multiply(qR, scaffold.rotations),
        colors=scaffold.colors,
        source_layout=scaffold.source_layout,
    )


def ray_to_z_depth(depth_faces: CubemapFaceSet) -> DepthFaceSet:
    """Convert per-face ray-length depth to z-depth (divide by ||K^-1 u||).

    Non-positive sentinel values keep their sign and stay culled.
    """
    K = depth_faces.intrinsics
    size = depth_faces.face_size
    xs = (np.arange(size, dtype=np.float64) + 0.5 - K.cx) / K.focal
    ys = (np.arange(size, dtype=np.float64) + 0.5 - K.cy) / K.focal
    gx, gy = np.meshgrid(xs, ys)
    norm = np.sqrt(gx * gx + gy * gy + 1.0)
    converted = depth_faces.faces / norm[None, :, :, None]
    return DepthFaceSet(faces=converted, intrinsics=K, fov_deg=depth_faces.fov_deg)


def scaffold_from_pano(
    pano: EquirectRaster,
    pano_depth: EquirectRaster,
    face_size: int,
    fov_deg: float = 95.0,
    params: LiftParams | None = None,
) -> GaussianScaffold:
    """Project a panorama + depth to faces and lift to a scaffold.

    Color is resampled bilinearly; depth nearest-neighbor (bilinear across
    a depth discontinuity would invent floating midpoints). Ray-distance
    depth (the default convention) is converted to per-face z-depth.
    """
    params = params or LiftParams()
    if not isinstance(pano, EquirectRaster):
        pano = EquirectRaster(np.asarray(pano))
    if not isinstance(pano_depth, EquirectRaster):
        pano_depth = EquirectRaster(np.asarray(pano_depth))
    if pano.channels != 3:
        raise InvalidArgumentError(f"pano must have 3 channels, got {pano.channels}")
    if pano_depth.channels != 1:
        raise InvalidArgumentError("pano_depth must have 1 channel")
    if (pano.width, pano.height) != (pano_depth.width, pano_depth.height):
        raise GeometryMismatchError(
            f"pano {pano.width}x{pano.height} and depth "
            f"{pano_depth.width}x{pano_depth.height} dimensions differ"
        )
    rgb_faces = e2c(pano, face_size, fov_deg)
    depth_raw = e2c(pano_depth, face_size, fov_deg, nearest=True)
    if params.depth_convention == "ray":
        depth_faces = ray_to_z_depth(depth_raw)
    else:
        depth_faces = DepthFaceSet(
            faces=depth_raw.faces, intrinsics=depth_raw.intrinsics, fov_deg=depth_raw.fov_deg
        )
    return lift_to_scaffold(rgb_faces, depth_faces, params)
