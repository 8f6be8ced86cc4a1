/** First-person fly camera.
 *
 * Orientation is yaw about world +y plus pitch as elevation (positive
 * looks up), stored as angles and turned into a fresh rotation matrix
 * every frame, so the pose can never drift off the manifold. World is
 * right-handed, +y up, +z forward; at yaw = pitch = 0 the camera looks
 * along +z from wherever it stands.
 */

import { Mat3, Vec3, mat3Mul, mat3MulVec, mat3Transpose, rotX, rotY } from "./math3d";
import { Pose } from "./projection";

export const PITCH_LIMIT = (89 * Math.PI) / 180;
export const MOUSE_RAD_PER_PX = 0.0025;

export interface CameraInput {
  /** Pressed KeyboardEvent codes (KeyW/KeyA/KeyS/KeyD/KeyQ/KeyE). */
  keys: Iterable<string>;
  /** Pointer movement in pixels: +x right, +y down (screen convention). */
  mouseDelta: [number, number];
  /** Seconds since the previous step; must be > 0. */
  dt: number;
}

export class FirstPersonCamera {
  position: Vec3 = [0, 0, 0];
  yaw = 0;
  pitch = 0;

  /** Camera-to-world rotation: Ry(yaw) · Rx(-pitch). */
  orientation(): Mat3 {
    return mat3Mul(rotY(this.yaw), rotX(-this.pitch));
  }

  /** World-to-camera pose (x_cam = R x_world + T). */
  pose(): Pose {
    const R = mat3Transpose(this.orientation());
    const t = mat3MulVec(R, this.position);
    return { rotation: R, translation: [-t[0], -t[1], -t[2]] };
  }

  /** Unit view axis in world coordinates. */
  forward(): Vec3 {
    return mat3MulVec(this.orientation(), [0, 0, 1]);
  }
}

/** Advance the camera one input step.
 *
 * Mouse deltas turn (pitch clamped to ±89°), then WASD translates in the
 * camera frame and Q/E move down/up the world vertical; the translation
 * magnitude is speed · dt per unit key axis.
 */
export function stepCamera(
  cam: FirstPersonCamera,
  input: CameraInput,
  speed: number,
): FirstPersonCamera {
  if (!(input.dt > 0)) throw new Error(`dt must be > 0, got ${input.dt}`);
  if (!(speed > 0)) throw new Error(`speed must be > 0, got ${speed}`);

  cam.yaw += input.mouseDelta[0] * MOUSE_RAD_PER_PX;
  cam.pitch = Math.min(
    PITCH_LIMIT,
    Math.max(-PITCH_LIMIT, cam.pitch - input.mouseDelta[1] * MOUSE_RAD_PER_PX),
  );

  const keys = new Set(input.keys);
  const axis = (pos: string, neg: string) =>
    (keys.has(pos) ? 1 : 0) - (keys.has(neg) ? 1 : 0);
  const strafe = axis("KeyD", "KeyA");
  const forward = axis("KeyW", "KeyS");
  const vertical = axis("KeyE", "KeyQ");

  if (strafe !== 0 || forward !== 0) {
    const move = mat3MulVec(cam.orientation(), [strafe, 0, forward]);
    const step = speed * input.dt;
    cam.position = [
      cam.position[0] + move[0] * step,
      cam.position[1] + move[1] * step,
      cam.position[2] + move[2] * step,
    ];
  }
  if (vertical !== 0) {
    cam.position = [
      cam.position[0],
      cam.position[1] + vertical * speed * input.dt,
      cam.position[2],
    ];
  }
  return cam;
}
