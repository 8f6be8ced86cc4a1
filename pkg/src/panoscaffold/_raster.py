"""Tile-parallel compositing kernels (numba).

Splats arrive already depth-sorted; tile lists are built in that global
order, so every pixel walks its gaussians strictly front to back and the
result is independent of the number of worker threads.
"""

from __future__ import annotations

import numpy as np
from numba import njit, prange


@njit(cache=True)
def build_tile_lists(tx0, tx1, ty0, ty1, tiles_x, tiles_y):
    """CSR (offsets, lists) of sorted-splat indices per 2D tile."""
    m = tx0.shape[0]
    n_tiles = tiles_x * tiles_y
    counts = np.zeros(n_tiles + 1, dtype=np.int64)
    for k in range(m):
        for ty in range(ty0[k], ty1[k] + 1):
            base = ty * tiles_x
            for tx in range(tx0[k], tx1[k] + 1):
                counts[base + tx + 1] += 1
    offsets = np.cumsum(counts)
    lists = np.empty(offsets[-1], dtype=np.int64)
    cursor = offsets[:-1].copy()
    for k in range(m):
        for ty in range(ty0[k], ty1[k] + 1):
            base = ty * tiles_x
            for tx in range(tx0[k], tx1[k] + 1):
                t = base + tx
                lists[cursor[t]] = k
                cursor[t] += 1
    return offsets, lists


@njit(parallel=True, cache=True)
def composite_tiles(
    width,
    height,
    tile,
    tiles_x,
    offsets,
    lists,
    means,
    con_a,
    con_b,
    con_c,
    alphas,
    zs,
    colors,
    x0,
    x1,
    y0,
    y1,
    stop_transmittance,
    max_contribution,
):
    """Front-to-back alpha compositing over pixel tiles.

    Per-splat conic (con_a, con_b, con_c) encodes the inverse 2D
    covariance: the exponent is -0.5*(a*dx^2 + c*dy^2) + b*dx*dy.
    Returns premultiplied color, alpha, and alpha-normalized depth.
    """
    n_tiles = offsets.shape[0] - 1
    color = np.zeros((height, width, 3))
    alpha = np.zeros((height, width))
    depth = np.zeros((height, width))
    for t in prange(n_tiles):
        tile_y = t // tiles_x
        tile_x = t % tiles_x
        px_lo = tile_x * tile
        py_lo = tile_y * tile
        px_hi = min(px_lo + tile, width)
        py_hi = min(py_lo + tile, height)
        start = offsets[t]
        end = offsets[t + 1]
        for py in range(py_lo, py_hi):
            fy = py + 0.5
            for px in range(px_lo, px_hi):
                fx = px + 0.5
                transmittance = 1.0
                acc_r = 0.0
                acc_g = 0.0
                acc_b = 0.0
                acc_a = 0.0
                acc_d = 0.0
                for slot in range(start, end):
                    k = lists[slot]
                    if px < x0[k] or px > x1[k] or py < y0[k] or py > y1[k]:
                        continue
                    dx = fx - means[k, 0]
                    dy = fy - means[k, 1]
                    power = -0.5 * (con_a[k] * dx * dx + con_c[k] * dy * dy) + con_b[k] * dx * dy
                    if power > 0.0:
                        continue
                    contrib = alphas[k] * np.exp(power)
                    if contrib > max_contribution:
                        contrib = max_contribution
                    weight = transmittance * contrib
                    acc_r += weight * colors[k, 0]
                    acc_g += weight * colors[k, 1]
                    acc_b += weight * colors[k, 2]
                    acc_a += weight
                    acc_d += weight * zs[k]
                    transmittance *= 1.0 - contrib
                    if transmittance < stop_transmittance:
                        break
                color[py, px, 0] = acc_r
                color[py, px, 1] = acc_g
                color[py, px, 2] = acc_b
                alpha[py, px] = acc_a
                if acc_a > 0.0:
                    depth[py, px] = acc_d / acc_a
    return color, alpha, depth
