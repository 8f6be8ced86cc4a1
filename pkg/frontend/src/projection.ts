/** Screen-space splat projection.
 *
 * This mirrors the toolkit renderer's contract exactly — same camera
 * model (x_cam = R x_world + T), same EWA Jacobian with the frustum
 * clamp, same low-pass floor — so the shared test vectors pin both
 * implementations to one set of numbers.
 */

import { Mat3, Vec3, quatToMat3 } from "./math3d";

export const NEAR_CLIP = 0.05;
export const LOWPASS_PX2 = 0.3;
export const FRUSTUM_CLAMP = 1.3;
export const SIGMA_CUTOFF = 3.0;
export const STOP_TRANSMITTANCE = 1e-4;
export const MAX_CONTRIBUTION = 0.99;

export interface Pose {
  rotation: number[]; // 9, row-major, world-to-camera
  translation: number[]; // 3
}

export interface Intrinsics {
  focal: number;
  cx: number;
  cy: number;
  width: number;
  height: number;
}

export interface GaussianInput {
  center: Vec3;
  scale: Vec3;
  rotation: [number, number, number, number]; // wxyz
}

export interface Projected {
  mean2d: [number, number];
  /** (c00, c01, c11) of the symmetric 2x2 screen covariance. */
  cov2d: [number, number, number];
  z: number;
}

/** Centered pinhole intrinsics from a horizontal field of view. */
export function viewerIntrinsics(width: number, height: number, hfovDeg = 90): Intrinsics {
  if (!(width >= 1 && height >= 1)) throw new Error(`image size must be >= 1, got ${width}x${height}`);
  if (!(hfovDeg > 0 && hfovDeg < 180)) throw new Error(`hfov must be in (0, 180), got ${hfovDeg}`);
  const focal = (width / 2) / Math.tan((hfovDeg * Math.PI) / 360);
  return { focal, cx: width / 2, cy: height / 2, width, height };
}

/** World covariance R_q diag(s^2) R_q^T as 6 upper-triangular entries. */
export function worldCovariance(
  scale: Vec3,
  quat: [number, number, number, number],
): [number, number, number, number, number, number] {
  const rq = quatToMat3(quat[0], quat[1], quat[2], quat[3]);
  const s2 = [scale[0] * scale[0], scale[1] * scale[1], scale[2] * scale[2]];
  // m = rq * diag(s2); sigma = m rq^T
  const m = [
    rq[0] * s2[0], rq[1] * s2[1], rq[2] * s2[2],
    rq[3] * s2[0], rq[4] * s2[1], rq[5] * s2[2],
    rq[6] * s2[0], rq[7] * s2[1], rq[8] * s2[2],
  ];
  const sig = (r: number, c: number) =>
    m[3 * r] * rq[3 * c] + m[3 * r + 1] * rq[3 * c + 1] + m[3 * r + 2] * rq[3 * c + 2];
  return [sig(0, 0), sig(0, 1), sig(0, 2), sig(1, 1), sig(1, 2), sig(2, 2)];
}

/** Project one gaussian; null when the center is at or behind the near plane. */
export function projectGaussian(
  g: GaussianInput,
  pose: Pose,
  K: Intrinsics,
): Projected | null {
  const R = pose.rotation;
  const T = pose.translation;
  const c = g.center;
  const x = R[0] * c[0] + R[1] * c[1] + R[2] * c[2] + T[0];
  const y = R[3] * c[0] + R[4] * c[1] + R[5] * c[2] + T[1];
  const z = R[6] * c[0] + R[7] * c[1] + R[8] * c[2] + T[2];
  if (!(z > NEAR_CLIP)) return null;

  const f = K.focal;
  const mean2d: [number, number] = [f * x / z + K.cx, f * y / z + K.cy];

  const [w00, w01, w02, w11, w12, w22] = worldCovariance(g.scale, g.rotation);
  // v = R sigma_world R^T
  const sigma: Mat3 = [w00, w01, w02, w01, w11, w12, w02, w12, w22];
  const rs = [
    R[0] * sigma[0] + R[1] * sigma[3] + R[2] * sigma[6],
    R[0] * sigma[1] + R[1] * sigma[4] + R[2] * sigma[7],
    R[0] * sigma[2] + R[1] * sigma[5] + R[2] * sigma[8],
    R[3] * sigma[0] + R[4] * sigma[3] + R[5] * sigma[6],
    R[3] * sigma[1] + R[4] * sigma[4] + R[5] * sigma[7],
    R[3] * sigma[2] + R[4] * sigma[5] + R[5] * sigma[8],
    R[6] * sigma[0] + R[7] * sigma[3] + R[8] * sigma[6],
    R[6] * sigma[1] + R[7] * sigma[4] + R[8] * sigma[7],
    R[6] * sigma[2] + R[7] * sigma[5] + R[8] * sigma[8],
  ];
  const v00 = rs[0] * R[0] + rs[1] * R[1] + rs[2] * R[2];
  const v01 = rs[0] * R[3] + rs[1] * R[4] + rs[2] * R[5];
  const v02 = rs[0] * R[6] + rs[1] * R[7] + rs[2] * R[8];
  const v11 = rs[3] * R[3] + rs[4] * R[4] + rs[5] * R[5];
  const v12 = rs[3] * R[6] + rs[4] * R[7] + rs[5] * R[8];
  const v22 = rs[6] * R[6] + rs[7] * R[7] + rs[8] * R[8];

  // Jacobian rows (f/z, 0, -f x/z^2), (0, f/z, -f y/z^2), with the
  // linearization point clamped to 1.3x the frustum so grazing splats
  // keep a bounded footprint.
  const limX = FRUSTUM_CLAMP * Math.max(K.cx, K.width - K.cx) / f;
  const limY = FRUSTUM_CLAMP * Math.max(K.cy, K.height - K.cy) / f;
  const a = f / z;
  const b = -f * Math.min(limX, Math.max(-limX, x / z)) / z;
  const cJ = -f * Math.min(limY, Math.max(-limY, y / z)) / z;
  const c00 = a * a * v00 + 2 * a * b * v02 + b * b * v22 + LOWPASS_PX2;
  const c01 = a * a * v01 + a * cJ * v02 + a * b * v12 + b * cJ * v22;
  const c11 = a * a * v11 + 2 * a * cJ * v12 + cJ * cJ * v22 + LOWPASS_PX2;

  return { mean2d, cov2d: [c00, c01, c11], z };
}
