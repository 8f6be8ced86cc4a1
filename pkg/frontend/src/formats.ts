/** Readers for the two scaffold interchange files.
 *
 * Native layout (little-endian):
 *   magic    4 bytes  "O2SC"
 *   version  uint16   == 1
 *   count    uint64
 *   flags    uint16   bit 0: source-layout block present
 *   [layout] uint32 face_size, float64 fov_deg, 6 x uint8 face indices
 *   payload  count x 14 float32:
 *            [center xyz | quaternion wxyz | scale xyz | opacity | color rgb]
 *
 * Splat PLY: binary_little_endian, float properties x y z f_dc_0..2
 * opacity scale_0..2 rot_0..3 in any order (extras tolerated); colors are
 * zeroth-order SH, opacity a logit, scales logs.
 */

export const FACE_IDS = ["front", "right", "back", "left", "up", "down"] as const;

const SH_C0 = 0.28209479177387814;

export type FormatErrorKind =
  | "scaffold-magic"
  | "scaffold-version"
  | "scaffold-truncation"
  | "scaffold-invariant"
  | "ply-parse";

/** Parse failure carrying the error family for the UI banner. */
export class FormatError extends Error {
  readonly kind: FormatErrorKind;

  constructor(kind: FormatErrorKind, message: string) {
    super(message);
    this.name = "FormatError";
    this.kind = kind;
  }
}

export interface SourceLayout {
  faceSize: number;
  fovDeg: number;
  faceOrder: string[];
}

/** Decoded scaffold: structure-of-arrays, all values upcast to float64. */
export interface SplatCloud {
  count: number;
  centers: Float64Array; // 3N
  rotations: Float64Array; // 4N, wxyz, renormalized
  scales: Float64Array; // 3N
  opacities: Float64Array; // N
  colors: Float64Array; // 3N
  layout: SourceLayout | null;
  source: "native" | "ply";
}

function truncation(expected: number, actual: number, where: string): FormatError {
  return new FormatError(
    "scaffold-truncation",
    `truncated ${where}: expected ${expected} bytes, got ${actual}`,
  );
}

function renormalizeQuats(rotations: Float64Array, count: number, onZero: () => FormatError) {
  for (let i = 0; i < count; i++) {
    const o = 4 * i;
    const n = Math.sqrt(
      rotations[o] * rotations[o] +
      rotations[o + 1] * rotations[o + 1] +
      rotations[o + 2] * rotations[o + 2] +
      rotations[o + 3] * rotations[o + 3],
    );
    if (n === 0) throw onZero();
    rotations[o] /= n;
    rotations[o + 1] /= n;
    rotations[o + 2] /= n;
    rotations[o + 3] /= n;
  }
}

function checkInvariants(cloud: SplatCloud) {
  const { count, centers, scales, opacities, colors } = cloud;
  for (let i = 0; i < count; i++) {
    if (!(opacities[i] >= 0 && opacities[i] <= 1)) {
      throw new FormatError("scaffold-invariant", `opacity must be in [0, 1], got ${opacities[i]}`);
    }
  }
  for (let i = 0; i < 3 * count; i++) {
    if (!(scales[i] > 0)) {
      throw new FormatError("scaffold-invariant", "scale components must be positive");
    }
    if (!Number.isFinite(centers[i])) {
      throw new FormatError("scaffold-invariant", "center must be finite");
    }
    if (!(colors[i] >= 0 && colors[i] <= 1)) {
      throw new FormatError("scaffold-invariant", "color channels must be in [0, 1]");
    }
  }
}

export function parseNativeScaffold(buf: ArrayBuffer): SplatCloud {
  const view = new DataView(buf);
  if (buf.byteLength < 16) throw truncation(16, buf.byteLength, "header");
  const magic = String.fromCharCode(
    view.getUint8(0), view.getUint8(1), view.getUint8(2), view.getUint8(3),
  );
  if (magic !== "O2SC") {
    throw new FormatError("scaffold-magic", `bad magic ${JSON.stringify(magic)}, expected "O2SC"`);
  }
  const version = view.getUint16(4, true);
  if (version !== 1) {
    throw new FormatError("scaffold-version", `unsupported version ${version}`);
  }
  const count = Number(view.getBigUint64(6, true));
  const flags = view.getUint16(14, true);
  let offset = 16;

  let layout: SourceLayout | null = null;
  if (flags & 1) {
    if (buf.byteLength < offset + 18) throw truncation(offset + 18, buf.byteLength, "layout block");
    const faceSize = view.getUint32(offset, true);
    const fovDeg = view.getFloat64(offset + 4, true);
    const order: number[] = [];
    for (let i = 0; i < 6; i++) order.push(view.getUint8(offset + 12 + i));
    offset += 18;
    if ([...order].sort((a, b) => a - b).join(",") !== "0,1,2,3,4,5") {
      throw new FormatError("scaffold-invariant", `layout face order [${order}] is not a permutation`);
    }
    layout = { faceSize, fovDeg, faceOrder: order.map((i) => FACE_IDS[i]) };
  }

  const expected = offset + count * 14 * 4;
  if (buf.byteLength !== expected) throw truncation(expected, buf.byteLength, "payload");

  const centers = new Float64Array(3 * count);
  const rotations = new Float64Array(4 * count);
  const scales = new Float64Array(3 * count);
  const opacities = new Float64Array(count);
  const colors = new Float64Array(3 * count);
  for (let i = 0; i < count; i++) {
    const base = offset + 56 * i;
    for (let j = 0; j < 3; j++) centers[3 * i + j] = view.getFloat32(base + 4 * j, true);
    for (let j = 0; j < 4; j++) rotations[4 * i + j] = view.getFloat32(base + 12 + 4 * j, true);
    for (let j = 0; j < 3; j++) scales[3 * i + j] = view.getFloat32(base + 28 + 4 * j, true);
    opacities[i] = view.getFloat32(base + 40, true);
    for (let j = 0; j < 3; j++) colors[3 * i + j] = view.getFloat32(base + 44 + 4 * j, true);
  }
  renormalizeQuats(rotations, count, () =>
    new FormatError("scaffold-invariant", "zero quaternion in payload"));

  const cloud: SplatCloud = {
    count, centers, rotations, scales, opacities, colors, layout, source: "native",
  };
  checkInvariants(cloud);
  return cloud;
}

const PLY_FIELDS = [
  "x", "y", "z",
  "f_dc_0", "f_dc_1", "f_dc_2",
  "opacity",
  "scale_0", "scale_1", "scale_2",
  "rot_0", "rot_1", "rot_2", "rot_3",
];

export function parseSplatPly(buf: ArrayBuffer): SplatCloud {
  const bytes = new Uint8Array(buf);
  const marker = "end_header\n";
  const headerLimit = Math.min(bytes.length, 65536);
  let end = -1;
  outer: for (let i = 0; i + marker.length <= headerLimit; i++) {
    for (let j = 0; j < marker.length; j++) {
      if (bytes[i + j] !== marker.charCodeAt(j)) continue outer;
    }
    end = i;
    break;
  }
  if (end < 0) throw new FormatError("ply-parse", "missing end_header");
  const header = new TextDecoder("ascii").decode(bytes.subarray(0, end)).split("\n");
  const bodyStart = end + marker.length;

  if (header.length === 0 || header[0].trim() !== "ply") {
    throw new FormatError("ply-parse", "not a PLY stream");
  }
  let count: number | null = null;
  const names: string[] = [];
  for (const line of header.slice(1)) {
    const tok = line.split(/\s+/).filter((t) => t.length > 0);
    if (tok.length === 0 || tok[0] === "comment") continue;
    if (tok[0] === "format") {
      if (tok[1] !== "binary_little_endian") {
        throw new FormatError("ply-parse", `unsupported PLY format ${JSON.stringify(tok[1])}`);
      }
    } else if (tok[0] === "element") {
      if (tok[1] !== "vertex") {
        throw new FormatError("ply-parse", `unexpected element ${JSON.stringify(tok[1])}`);
      }
      count = parseInt(tok[2], 10);
    } else if (tok[0] === "property") {
      if (tok[1] !== "float") {
        throw new FormatError("ply-parse", `unsupported property type ${JSON.stringify(tok[1])}`);
      }
      names.push(tok[2]);
    }
  }
  if (count === null) throw new FormatError("ply-parse", "missing vertex element");
  const missing = PLY_FIELDS.filter((f) => !names.includes(f));
  if (missing.length > 0) {
    throw new FormatError("ply-parse", `missing splat properties: [${missing.join(", ")}]`);
  }
  const stride = names.length;
  const bodyBytes = bytes.length - bodyStart;
  if (bodyBytes < count * stride * 4) {
    throw new FormatError(
      "ply-parse",
      `payload holds ${bodyBytes} bytes, need ${count * stride * 4}`,
    );
  }

  const col = new Map<string, number>();
  names.forEach((name, i) => col.set(name, i));
  const view = new DataView(buf, bodyStart);
  const at = (row: number, name: string) =>
    view.getFloat32(4 * (row * stride + col.get(name)!), true);

  const centers = new Float64Array(3 * count);
  const rotations = new Float64Array(4 * count);
  const scales = new Float64Array(3 * count);
  const opacities = new Float64Array(count);
  const colors = new Float64Array(3 * count);
  for (let i = 0; i < count; i++) {
    centers[3 * i] = at(i, "x");
    centers[3 * i + 1] = at(i, "y");
    centers[3 * i + 2] = at(i, "z");
    for (let j = 0; j < 4; j++) rotations[4 * i + j] = at(i, `rot_${j}`);
    for (let j = 0; j < 3; j++) scales[3 * i + j] = Math.exp(at(i, `scale_${j}`));
    // Branch-stable sigmoid: only exponentiate non-positive values.
    const logit = at(i, "opacity");
    opacities[i] = logit >= 0
      ? 1 / (1 + Math.exp(-logit))
      : Math.exp(logit) / (1 + Math.exp(logit));
    for (let j = 0; j < 3; j++) {
      colors[3 * i + j] = Math.min(1, Math.max(0, at(i, `f_dc_${j}`) * SH_C0 + 0.5));
    }
  }
  renormalizeQuats(rotations, count, () =>
    new FormatError("ply-parse", "zero quaternion in payload"));

  return { count, centers, rotations, scales, opacities, colors, layout: null, source: "ply" };
}

/** Decode either accepted file kind, sniffing the magic bytes. */
export function parseScaffold(buf: ArrayBuffer): SplatCloud {
  const head = new Uint8Array(buf, 0, Math.min(4, buf.byteLength));
  const text = String.fromCharCode(...head);
  if (text.startsWith("ply")) return parseSplatPly(buf);
  return parseNativeScaffold(buf);
}
