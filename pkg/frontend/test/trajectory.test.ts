import { describe, expect, it } from "vitest";

import { FirstPersonCamera, stepCamera } from "../src/camera";
import { viewerIntrinsics } from "../src/projection";
import {
  frameFromPose,
  parseTrajectory,
  serializeTrajectory,
} from "../src/trajectory";

describe("trajectory JSON", () => {
  it("maps the identity pose to an identity frame with positive zeros", () => {
    const cam = new FirstPersonCamera();
    const frame = frameFromPose(0, cam.pose());
    expect(frame.index).toBe(0);
    expect(frame.rotation).toEqual([1, 0, 0, 0, 1, 0, 0, 0, 1]);
    for (const v of frame.translation) {
      expect(Object.is(v, 0)).toBe(true); // -0 would serialize as "0" and change bits
    }
  });

  it("round-trips every pose float bit-exactly through serialization", () => {
    const cam = new FirstPersonCamera();
    stepCamera(cam, { keys: ["KeyW", "KeyD"], mouseDelta: [231, -77], dt: 0.137 }, 1.9);
    stepCamera(cam, { keys: ["KeyS", "KeyQ"], mouseDelta: [-45, 12], dt: 0.071 }, 1.9);

    const doc = {
      intrinsics: viewerIntrinsics(640, 480, 72),
      frames: [frameFromPose(0, cam.pose())],
    };
    const parsed = parseTrajectory(serializeTrajectory(doc));

    expect(parsed.frames).toHaveLength(1);
    const got = parsed.frames[0];
    const want = doc.frames[0];
    expect(got.index).toBe(want.index);
    for (let i = 0; i < 9; i++) {
      expect(Object.is(got.rotation[i], want.rotation[i])).toBe(true);
    }
    for (let i = 0; i < 3; i++) {
      expect(Object.is(got.translation[i], want.translation[i])).toBe(true);
    }
    expect(Object.is(parsed.intrinsics.focal, doc.intrinsics.focal)).toBe(true);
  });

  it("keeps N appended poses as N ordered frames", () => {
    const cam = new FirstPersonCamera();
    const frames = [];
    for (let i = 0; i < 5; i++) {
      stepCamera(cam, { keys: ["KeyW"], mouseDelta: [15, 0], dt: 0.2 }, 1);
      frames.push(frameFromPose(i, cam.pose()));
    }
    const text = serializeTrajectory({ intrinsics: viewerIntrinsics(64, 64), frames });
    const parsed = parseTrajectory(text);
    expect(parsed.frames.map((f) => f.index)).toEqual([0, 1, 2, 3, 4]);
    // Frames reflect the pose at each append, so translations all differ.
    const zs = parsed.frames.map((f) => f.translation[2]);
    expect(new Set(zs).size).toBe(5);
  });

  it("rejects malformed documents", () => {
    expect(() => parseTrajectory("{}")).toThrow("intrinsics");
    expect(() => parseTrajectory(JSON.stringify({
      intrinsics: viewerIntrinsics(64, 64),
      frames: [{ index: 0, rotation: [1, 2, 3], translation: [0, 0, 0] }],
    }))).toThrow("9 rotation");
    expect(() => serializeTrajectory({
      intrinsics: viewerIntrinsics(64, 64),
      frames: [
        frameFromPose(1, new FirstPersonCamera().pose()),
        frameFromPose(1, new FirstPersonCamera().pose()),
      ],
    })).toThrow("strictly increasing");
    expect(() => frameFromPose(-1, new FirstPersonCamera().pose())).toThrow("index");
  });
});
