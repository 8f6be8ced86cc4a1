"""Shared test utilities: smooth spherical fixtures and image comparison."""

from __future__ import annotations

import numpy as np

from panoscaffold.geometry import dir_from_equirect, equirect_angles_from_pix


def smooth_sphere_color(dirs: np.ndarray) -> np.ndarray:
    """A band-limited RGB function of direction (degree <= 2 harmonics).

    Smooth everywhere on the sphere, range well inside [0, 1]; used
    wherever a round trip must be limited by resampling, not content.
    """
    x, y, z = dirs[..., 0], dirs[..., 1], dirs[..., 2]
    r = 0.5 + 0.25 * x + 0.12 * y * z
    g = 0.5 + 0.25 * y + 0.12 * z * x
    b = 0.5 + 0.25 * z + 0.12 * x * y
    return np.stack([r, g, b], axis=-1)


def smooth_pano(width: int) -> np.ndarray:
    """Band-limited RGB equirect raster of the given width (2:1)."""
    height = width // 2
    u = np.arange(width, dtype=np.float64) + 0.5
    v = np.arange(height, dtype=np.float64) + 0.5
    gu, gv = np.meshgrid(u, v)
    theta, phi = equirect_angles_from_pix(gu, gv, width, height)
    return smooth_sphere_color(dir_from_equirect(theta, phi))


def psnr(a: np.ndarray, b: np.ndarray, peak: float = 1.0) -> float:
    """Peak signal-to-noise ratio in dB."""
    mse = float(np.mean((np.asarray(a, dtype=np.float64) - b) ** 2))
    if mse == 0:
        return float("inf")
    return 10.0 * np.log10(peak * peak / mse)


def random_rotation(rng: np.random.Generator) -> np.ndarray:
    """Uniform-ish random proper rotation matrix via QR."""
    q, r = np.linalg.qr(rng.normal(size=(3, 3)))
    q *= np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[:, 2] *= -1
    return q
