/** Viewer session: the loaded scaffold plus live camera and HUD state. */

import { CameraInput, FirstPersonCamera, stepCamera } from "./camera";
import { SplatCloud, parseScaffold } from "./formats";
import { Intrinsics, Pose } from "./projection";
import {
  TrajectoryDocument,
  TrajectoryFrame,
  frameFromPose,
  serializeTrajectory,
} from "./trajectory";

export interface HudState {
  gaussianCount: number;
  position: [number, number, number];
  yawDeg: number;
  pitchDeg: number;
  speed: number;
  frameMs: number;
  recordedFrames: number;
}

export class ViewerSession {
  readonly cloud: SplatCloud;
  readonly camera: FirstPersonCamera;
  private speedMps = 1.5;
  private recorded: TrajectoryFrame[] = [];
  frameMs = 0;

  constructor(cloud: SplatCloud) {
    this.cloud = cloud;
    this.camera = new FirstPersonCamera();
  }

  /** Parse bytes (either scaffold file kind) into a fresh session with
   * the camera at the origin looking along +z. */
  static fromBytes(buf: ArrayBuffer): ViewerSession {
    return new ViewerSession(parseScaffold(buf));
  }

  get speed(): number {
    return this.speedMps;
  }

  set speed(v: number) {
    if (!(v > 0)) throw new Error(`speed must be > 0, got ${v}`);
    this.speedMps = v;
  }

  step(input: CameraInput): Pose {
    stepCamera(this.camera, input, this.speedMps);
    return this.camera.pose();
  }

  /** Append the current pose to the recording; returns the new frame. */
  exportPose(): TrajectoryFrame {
    const frame = frameFromPose(this.recorded.length, this.camera.pose());
    this.recorded.push(frame);
    return frame;
  }

  get recordedFrames(): readonly TrajectoryFrame[] {
    return this.recorded;
  }

  trajectoryDocument(intrinsics: Intrinsics): TrajectoryDocument {
    return { intrinsics, frames: [...this.recorded] };
  }

  trajectoryJson(intrinsics: Intrinsics): string {
    return serializeTrajectory(this.trajectoryDocument(intrinsics));
  }

  hud(): HudState {
    return {
      gaussianCount: this.cloud.count,
      position: [...this.camera.position],
      yawDeg: (this.camera.yaw * 180) / Math.PI,
      pitchDeg: (this.camera.pitch * 180) / Math.PI,
      speed: this.speedMps,
      frameMs: this.frameMs,
      recordedFrames: this.recorded.length,
    };
  }
}
