/** Trajectory JSON: the document the CLI's eval/render tooling consumes.
 *
 * {
 *   "intrinsics": {"focal", "cx", "cy", "width", "height"},
 *   "frames": [{"index", "rotation": [9 row-major], "translation": [3]}, ...]
 * }
 *
 * Numbers survive JSON.stringify/parse bit-exactly (shortest round-trip
 * decimal), with one caveat: JSON.stringify prints -0 as "0". Frames are
 * therefore canonicalized to +0 on construction so serialization is a
 * true identity.
 */

import { Intrinsics, Pose } from "./projection";

export interface TrajectoryFrame {
  index: number;
  rotation: number[];
  translation: number[];
}

export interface TrajectoryDocument {
  intrinsics: Intrinsics;
  frames: TrajectoryFrame[];
}

const dropNegZero = (v: number) => v + 0 === 0 ? 0 : v;

export function frameFromPose(index: number, pose: Pose): TrajectoryFrame {
  if (!Number.isInteger(index) || index < 0) {
    throw new Error(`frame index must be a non-negative integer, got ${index}`);
  }
  if (pose.rotation.length !== 9 || pose.translation.length !== 3) {
    throw new Error("pose needs 9 rotation entries (row-major) and 3 translation entries");
  }
  return {
    index,
    rotation: pose.rotation.map(dropNegZero),
    translation: pose.translation.map(dropNegZero),
  };
}

export function serializeTrajectory(doc: TrajectoryDocument): string {
  const indices = doc.frames.map((f) => f.index);
  for (let i = 1; i < indices.length; i++) {
    if (indices[i] <= indices[i - 1]) {
      throw new Error("frame indices must be strictly increasing");
    }
  }
  return JSON.stringify(doc, null, 2) + "\n";
}

export function parseTrajectory(text: string): TrajectoryDocument {
  const obj = JSON.parse(text);
  const k = obj?.intrinsics;
  if (
    typeof k?.focal !== "number" || typeof k?.cx !== "number" ||
    typeof k?.cy !== "number" || typeof k?.width !== "number" ||
    typeof k?.height !== "number"
  ) {
    throw new Error("malformed trajectory JSON: bad intrinsics");
  }
  if (!Array.isArray(obj.frames)) throw new Error("malformed trajectory JSON: missing frames");
  const frames: TrajectoryFrame[] = [];
  for (const f of obj.frames) {
    if (
      !Number.isInteger(f?.index) ||
      !Array.isArray(f?.rotation) || f.rotation.length !== 9 ||
      !Array.isArray(f?.translation) || f.translation.length !== 3
    ) {
      throw new Error(
        "malformed trajectory JSON: frame needs index, 9 rotation floats, 3 translation floats",
      );
    }
    frames.push({
      index: f.index,
      rotation: f.rotation.map(Number),
      translation: f.translation.map(Number),
    });
  }
  for (let i = 1; i < frames.length; i++) {
    if (frames[i].index <= frames[i - 1].index) {
      throw new Error("frame indices must be strictly increasing");
    }
  }
  return {
    intrinsics: { focal: k.focal, cx: k.cx, cy: k.cy, width: k.width, height: k.height },
    frames,
  };
}
