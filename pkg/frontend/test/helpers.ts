import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";

export const FIXTURES = join(dirname(fileURLToPath(import.meta.url)), "fixtures");
export const REPO_ROOT = join(dirname(fileURLToPath(import.meta.url)), "..", "..");

export function readFixture(name: string): ArrayBuffer {
  const raw = readFileSync(join(FIXTURES, name));
  // Copy out of Node's shared pool so byteLength matches the file.
  return raw.buffer.slice(raw.byteOffset, raw.byteOffset + raw.byteLength);
}

export function readJson(path: string): any {
  return JSON.parse(readFileSync(path, "utf-8"));
}

/** Build native-format bytes from explicit field values (test writer). */
export function buildNativeBytes(opts: {
  magic?: string;
  version?: number;
  count?: number;
  flags?: number;
  layout?: { faceSize: number; fovDeg: number; order: number[] } | null;
  records?: number[][]; // each 14 floats
  trailing?: number;
}): ArrayBuffer {
  const records = opts.records ?? [];
  const count = opts.count ?? records.length;
  const layout = opts.layout ?? null;
  const size = 16 + (layout ? 18 : 0) + records.length * 56 + (opts.trailing ?? 0);
  const buf = new ArrayBuffer(size);
  const view = new DataView(buf);
  const magic = opts.magic ?? "O2SC";
  for (let i = 0; i < 4; i++) view.setUint8(i, magic.charCodeAt(i));
  view.setUint16(4, opts.version ?? 1, true);
  view.setBigUint64(6, BigInt(count), true);
  view.setUint16(14, opts.flags ?? (layout ? 1 : 0), true);
  let o = 16;
  if (layout) {
    view.setUint32(o, layout.faceSize, true);
    view.setFloat64(o + 4, layout.fovDeg, true);
    for (let i = 0; i < 6; i++) view.setUint8(o + 12 + i, layout.order[i]);
    o += 18;
  }
  for (const rec of records) {
    for (let j = 0; j < 14; j++) view.setFloat32(o + 4 * j, rec[j], true);
    o += 56;
  }
  return buf;
}

/** A plausible standalone gaussian record: center, quat wxyz, scale, opacity, rgb. */
export function gaussianRecord(overrides: Partial<Record<
  "cx" | "cy" | "cz" | "qw" | "qx" | "qy" | "qz" | "sx" | "sy" | "sz" | "op" | "r" | "g" | "b",
  number
>> = {}): number[] {
  const d = {
    cx: 0.5, cy: -1.0, cz: 2.0,
    qw: 1, qx: 0, qy: 0, qz: 0,
    sx: 0.1, sy: 0.1, sz: 0.1,
    op: 0.8,
    r: 0.2, g: 0.4, b: 0.6,
    ...overrides,
  };
  return [d.cx, d.cy, d.cz, d.qw, d.qx, d.qy, d.qz, d.sx, d.sy, d.sz, d.op, d.r, d.g, d.b];
}

/** Max |a-b| over matching-length arrays. */
export function maxAbsDiff(a: ArrayLike<number>, b: ArrayLike<number>): number {
  if (a.length !== b.length) throw new Error(`length mismatch ${a.length} vs ${b.length}`);
  let worst = 0;
  for (let i = 0; i < a.length; i++) {
    const d = Math.abs(a[i] - b[i]);
    if (d > worst) worst = d;
  }
  return worst;
}

export function psnr(a: ArrayLike<number>, b: ArrayLike<number>, peak = 1.0): number {
  if (a.length !== b.length) throw new Error(`length mismatch ${a.length} vs ${b.length}`);
  let sum = 0;
  for (let i = 0; i < a.length; i++) {
    const d = a[i] - b[i];
    sum += d * d;
  }
  const mse = sum / a.length;
  if (mse === 0) return Infinity;
  return 10 * Math.log10((peak * peak) / mse);
}
