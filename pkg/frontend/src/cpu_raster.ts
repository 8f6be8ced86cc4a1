/** Reference CPU rasterizer.
 *
 * Same pipeline as the toolkit renderer: project, cull invalid
 * covariances, stable-sort by camera depth, composite front to back with
 * per-pixel early termination. It exists so the browser renderer has a
 * machine-checkable twin — tests compare it against CLI renders — and as
 * a slow-but-correct fallback for environments without WebGL2. Intended
 * for small images; cost is O(pixels × overlapping splats).
 */

import { SplatCloud } from "./formats";
import {
  Intrinsics,
  MAX_CONTRIBUTION,
  Pose,
  SIGMA_CUTOFF,
  STOP_TRANSMITTANCE,
  projectGaussian,
} from "./projection";

export interface CpuImage {
  width: number;
  height: number;
  /** Premultiplied RGB, row-major, 3 per pixel. */
  color: Float64Array;
  alpha: Float64Array;
  /** Alpha-weighted mean camera z; 0 where nothing rendered. */
  depth: Float64Array;
}

interface Prepared {
  meanX: number;
  meanY: number;
  conA: number;
  conB: number;
  conC: number;
  alpha: number;
  z: number;
  r: number;
  g: number;
  b: number;
  x0: number;
  x1: number;
  y0: number;
  y1: number;
}

export function renderCpu(
  cloud: SplatCloud,
  pose: Pose,
  K: Intrinsics,
  width?: number,
  height?: number,
): CpuImage {
  const w = width ?? K.width;
  const h = height ?? K.height;
  const color = new Float64Array(3 * w * h);
  const alpha = new Float64Array(w * h);
  const depth = new Float64Array(w * h);

  const prepared: Prepared[] = [];
  for (let i = 0; i < cloud.count; i++) {
    const out = projectGaussian(
      {
        center: [cloud.centers[3 * i], cloud.centers[3 * i + 1], cloud.centers[3 * i + 2]],
        scale: [cloud.scales[3 * i], cloud.scales[3 * i + 1], cloud.scales[3 * i + 2]],
        rotation: [
          cloud.rotations[4 * i], cloud.rotations[4 * i + 1],
          cloud.rotations[4 * i + 2], cloud.rotations[4 * i + 3],
        ],
      },
      pose,
      K,
    );
    if (out === null) continue;
    const [c00, c01, c11] = out.cov2d;
    const det = c00 * c11 - c01 * c01;
    if (!(det > 0) || !Number.isFinite(det)) continue;

    const mid = 0.5 * (c00 + c11);
    const lamMax = mid + Math.sqrt(Math.max(mid * mid - det, 0));
    const radius = SIGMA_CUTOFF * Math.sqrt(lamMax);
    const [mx, my] = out.mean2d;
    if (mx + radius <= 0 || mx - radius >= w || my + radius <= 0 || my - radius >= h) continue;

    prepared.push({
      meanX: mx,
      meanY: my,
      conA: c11 / det,
      conB: c01 / det,
      conC: c00 / det,
      alpha: cloud.opacities[i],
      z: out.z,
      r: cloud.colors[3 * i],
      g: cloud.colors[3 * i + 1],
      b: cloud.colors[3 * i + 2],
      x0: Math.min(w - 1, Math.max(0, Math.floor(mx - radius))),
      x1: Math.min(w - 1, Math.max(0, Math.ceil(mx + radius))),
      y0: Math.min(h - 1, Math.max(0, Math.floor(my - radius))),
      y1: Math.min(h - 1, Math.max(0, Math.ceil(my + radius))),
    });
  }
  // Array.prototype.sort is stable, so equal depths keep scaffold order.
  prepared.sort((a, b) => a.z - b.z);

  for (let py = 0; py < h; py++) {
    const fy = py + 0.5;
    for (let px = 0; px < w; px++) {
      const fx = px + 0.5;
      let transmittance = 1.0;
      let accR = 0.0, accG = 0.0, accB = 0.0, accA = 0.0, accD = 0.0;
      for (const s of prepared) {
        if (px < s.x0 || px > s.x1 || py < s.y0 || py > s.y1) continue;
        const dx = fx - s.meanX;
        const dy = fy - s.meanY;
        const power = -0.5 * (s.conA * dx * dx + s.conC * dy * dy) + s.conB * dx * dy;
        if (power > 0) continue;
        let contrib = s.alpha * Math.exp(power);
        if (contrib > MAX_CONTRIBUTION) contrib = MAX_CONTRIBUTION;
        const weight = transmittance * contrib;
        accR += weight * s.r;
        accG += weight * s.g;
        accB += weight * s.b;
        accA += weight;
        accD += weight * s.z;
        transmittance *= 1 - contrib;
        if (transmittance < STOP_TRANSMITTANCE) break;
      }
      const p = py * w + px;
      color[3 * p] = accR;
      color[3 * p + 1] = accG;
      color[3 * p + 2] = accB;
      alpha[p] = accA;
      if (accA > 0) depth[p] = accD / accA;
    }
  }
  return { width: w, height: h, color, alpha, depth };
}
