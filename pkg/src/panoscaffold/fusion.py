"""Bidirectional cross-face fusion over cubemap rasters.

Faces are lifted to a shared equirect latent, smoothed there with a fixed
2D kernel, and the smoothed latent is resampled back onto each face and
added as a residual:

    fused_i = F_i + E2C(conv(C2E({F_i})))

The whole map is linear in the face values. The equirect convolution is a
correlation (sliding dot product, machine-learning convention) applied per
channel, periodic in longitude and replicated at the latitude poles. The
residual addition never overwrites per-face content, so view detail that
the latent cannot represent is preserved exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidArgumentError
from .geometry import CubemapFaceSet, EquirectRaster, c2e, e2c


@dataclass(frozen=True)
class FusionKernel:
    """A fixed 2D tap grid with odd side lengths.

    Kernels flagged ``averaging`` must have non-negative taps summing to 1
    (within 1e-12); they keep fused values in the input range.
    """

    taps: np.ndarray
    averaging: bool = field(default=False)

    def __post_init__(self):
        t = np.asarray(self.taps, dtype=np.float64)
        if t.ndim != 2 or t.shape[0] % 2 == 0 or t.shape[1] % 2 == 0:
            raise InvalidArgumentError(
                f"kernel taps must be 2D with odd sides, got shape {t.shape}"
            )
        if self.averaging:
            if np.any(t < 0) or abs(t.sum() - 1.0) > 1e-12:
                raise InvalidArgumentError(
                    "averaging kernel needs non-negative taps summing to 1"
                )
        object.__setattr__(self, "taps", t)

    @property
    def dc_gain(self) -> float:
        """Sum of all taps (response to a constant input)."""
        return float(self.taps.sum())

    @classmethod
    def gaussian(cls, size: int = 5, sigma: float = 1.0) -> "FusionKernel":
        """Normalized separable Gaussian, the default fusion kernel."""
        if size < 1 or size % 2 == 0 or sigma <= 0:
            raise InvalidArgumentError("gaussian kernel needs odd size >= 1, sigma > 0")
        k = np.arange(size, dtype=np.float64) - (size - 1) / 2
        g = np.exp(-0.5 * (k / sigma) ** 2)
        taps = np.outer(g, g)
        return cls(taps / taps.sum(), averaging=True)

    @classmethod
    def box(cls, size: int = 3) -> "FusionKernel":
        """Uniform averaging kernel."""
        if size < 1 or size % 2 == 0:
            raise InvalidArgumentError("box kernel needs odd size >= 1")
        return cls(np.full((size, size), 1.0 / (size * size)), averaging=True)

    @classmethod
    def identity(cls) -> "FusionKernel":
        return cls(np.ones((1, 1)), averaging=True)

    @classmethod
    def zero(cls) -> "FusionKernel":
        return cls(np.zeros((1, 1)))


def convolve_equirect(latent: np.ndarray, kernel: FusionKernel) -> np.ndarray:
    """Correlate an (H, W, C) equirect latent with a kernel.

    Longitude wraps; latitude replicates the pole rows. Implemented as an
    exact tap-by-tap shift-add (no FFT), so a zero kernel yields exact
    zeros and single-tap kernels are exact shifts.
    """
    taps = kernel.taps
    ph, pw = taps.shape[0] // 2, taps.shape[1] // 2
    h, w = latent.shape[:2]
    padded = np.pad(latent, ((ph, ph), (0, 0), (0, 0)), mode="edge")
    padded = np.pad(padded, ((0, 0), (pw, pw), (0, 0)), mode="wrap")
    out = np.zeros_like(latent, dtype=np.float64)
    for dy in range(taps.shape[0]):
        for dx in range(taps.shape[1]):
            t = taps[dy, dx]
            if t == 0.0:
                continue
            out += t * padded[dy : dy + h, dx : dx + w]
    return out


def fusion_residual(
    faces: CubemapFaceSet,
    kernel: FusionKernel,
    equirect_size: tuple[int, int] | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """The additive term E2C(conv(C2E(faces))) and the smoothed latent.

    Returns ``(residual_faces, latent)`` where residual_faces is
    (6, h, h, C) aligned with the input face order and latent is the
    smoothed (H, W, C) equirect array.
    """
    if equirect_size is None:
        equirect_size = (4 * faces.face_size, 2 * faces.face_size)
    width, height = equirect_size
    if width != 2 * height:
        raise InvalidArgumentError(f"equirect latent must be 2:1, got {width}x{height}")
    latent = convolve_equirect(c2e(faces, width, height).data, kernel)
    resampled = e2c(EquirectRaster(latent), faces.face_size, faces.fov_deg)
    return resampled.faces, latent


def bidirectional_fuse(
    faces: CubemapFaceSet,
    kernel: FusionKernel,
    equirect_size: tuple[int, int] | None = None,
) -> CubemapFaceSet:
    """Fuse faces through the shared equirect latent.

    Args:
        faces: input face set, any channel count.
        kernel: fusion kernel applied in equirect space, per channel.
        equirect_size: (W, H) of the latent; defaults to
            (4*face_size, 2*face_size).

    Returns:
        A face set with identical geometry whose values are
        ``F_i + E2C(conv(C2E({F_i})))``.
    """
    residual, _ = fusion_residual(faces, kernel, equirect_size)
    return CubemapFaceSet(
        faces=faces.faces + residual, intrinsics=faces.intrinsics, fov_deg=faces.fov_deg
    )
