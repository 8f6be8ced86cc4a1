/** Browser entry point: canvas, HUD, input plumbing, file loading. */

import { FormatError } from "./formats";
import { GlSplatRenderer } from "./gl_renderer";
import { Intrinsics, viewerIntrinsics, worldCovariance } from "./projection";
import { ViewerSession } from "./session";
import { createSortWorker } from "./sort_worker";
import { PITCH_LIMIT } from "./camera";

const canvas = document.getElementById("view") as HTMLCanvasElement;
const hudEl = document.getElementById("hud")!;
const bannerEl = document.getElementById("banner")!;

let session: ViewerSession | null = null;
let renderer: GlSplatRenderer | null = null;
let sorter: Worker | null = null;
let sortedGeneration = -1;
let sortInFlight = false;
let generation = 0;
let intrinsics: Intrinsics = viewerIntrinsics(1, 1);

const keys = new Set<string>();
let mouseDx = 0;
let mouseDy = 0;
let dragging = false;

function banner(text: string | null): void {
  bannerEl.textContent = text ?? "";
  bannerEl.style.display = text ? "block" : "none";
}

function resize(): void {
  canvas.width = window.innerWidth;
  canvas.height = window.innerHeight;
  intrinsics = viewerIntrinsics(canvas.width, canvas.height);
}

function applyPoseParams(s: ViewerSession, params: URLSearchParams): void {
  const num = (name: string) => {
    const raw = params.get(name);
    if (raw === null) return null;
    const v = Number(raw);
    return Number.isFinite(v) ? v : null;
  };
  const x = num("x"); const y = num("y"); const z = num("z");
  if (x !== null) s.camera.position[0] = x;
  if (y !== null) s.camera.position[1] = y;
  if (z !== null) s.camera.position[2] = z;
  const yaw = num("yaw");
  if (yaw !== null) s.camera.yaw = (yaw * Math.PI) / 180;
  const pitch = num("pitch");
  if (pitch !== null) {
    s.camera.pitch = Math.min(PITCH_LIMIT, Math.max(-PITCH_LIMIT, (pitch * Math.PI) / 180));
  }
}

function loadBytes(buf: ArrayBuffer, name: string): void {
  try {
    const next = ViewerSession.fromBytes(buf);
    applyPoseParams(next, new URLSearchParams(location.search));
    // Swap only after a full parse so a bad file never clobbers the
    // session being viewed.
    session = next;
    banner(null);

    if (!renderer) renderer = new GlSplatRenderer(canvas);
    const cloud = next.cloud;
    const cov = new Float32Array(6 * cloud.count);
    for (let i = 0; i < cloud.count; i++) {
      const six = worldCovariance(
        [cloud.scales[3 * i], cloud.scales[3 * i + 1], cloud.scales[3 * i + 2]],
        [
          cloud.rotations[4 * i], cloud.rotations[4 * i + 1],
          cloud.rotations[4 * i + 2], cloud.rotations[4 * i + 3],
        ],
      );
      cov.set(six, 6 * i);
    }
    renderer.setCloud(cloud, cov);

    if (sorter) sorter.terminate();
    sorter = createSortWorker();
    const centers = new Float32Array(cloud.centers);
    sorter.postMessage({ centers, count: cloud.count }, [centers.buffer]);
    sorter.onmessage = (e: MessageEvent) => {
      sortInFlight = false;
      sortedGeneration = e.data.generation;
      renderer?.setOrder(e.data.order);
    };
    generation++;
    console.log(`loaded ${name}: ${cloud.count} gaussians (${cloud.source})`);
  } catch (err) {
    if (err instanceof FormatError) {
      banner(`[${err.kind}] ${err.message}`);
    } else {
      banner(`failed to load ${name}: ${err}`);
    }
  }
}

function requestSort(): void {
  if (!session || !sorter || sortInFlight) return;
  const pose = session.camera.pose();
  sortInFlight = true;
  sorter.postMessage({
    viewRow: [pose.rotation[6], pose.rotation[7], pose.rotation[8], pose.translation[2]],
    generation,
  });
}

function hudText(): string {
  if (!session) {
    return "drop a scaffold file (.o2sc native or splat .ply), or pass ?url=";
  }
  const h = session.hud();
  const p = h.position.map((v) => v.toFixed(2)).join(", ");
  return [
    `gaussians: ${h.gaussianCount}`,
    `position: (${p}) m`,
    `yaw ${h.yawDeg.toFixed(1)}°  pitch ${h.pitchDeg.toFixed(1)}°`,
    `speed: ${h.speed.toFixed(2)} m/s  frame: ${h.frameMs.toFixed(1)} ms`,
    `recorded poses: ${h.recordedFrames}  [P record, X export, R reset]`,
  ].join("\n");
}

function downloadTrajectory(): void {
  if (!session || session.recordedFrames.length === 0) return;
  const blob = new Blob([session.trajectoryJson(intrinsics)], { type: "application/json" });
  const link = document.createElement("a");
  link.download = "trajectory.json";
  link.href = URL.createObjectURL(blob);
  link.click();
  URL.revokeObjectURL(link.href);
}

window.addEventListener("resize", resize);
window.addEventListener("keydown", (e) => {
  keys.add(e.code);
  if (e.code === "KeyP" && session) session.exportPose();
  if (e.code === "KeyX") downloadTrajectory();
  if (e.code === "KeyR" && session) {
    session.camera.position = [0, 0, 0];
    session.camera.yaw = 0;
    session.camera.pitch = 0;
  }
});
window.addEventListener("keyup", (e) => keys.delete(e.code));
window.addEventListener("blur", () => keys.clear());

canvas.addEventListener("mousedown", () => { dragging = true; });
window.addEventListener("mouseup", () => { dragging = false; });
window.addEventListener("mousemove", (e) => {
  if (dragging) {
    mouseDx += e.movementX;
    mouseDy += e.movementY;
  }
});
window.addEventListener("wheel", (e) => {
  if (session) {
    session.speed = Math.min(50, Math.max(0.05, session.speed * (e.deltaY < 0 ? 1.1 : 1 / 1.1)));
  }
}, { passive: true });

for (const name of ["dragenter", "dragover", "dragleave"]) {
  document.addEventListener(name, (e) => e.preventDefault());
}
document.addEventListener("drop", (e) => {
  e.preventDefault();
  const file = (e as DragEvent).dataTransfer?.files?.[0];
  if (!file) return;
  file.arrayBuffer().then((buf) => loadBytes(buf, file.name));
});

const urlParam = new URLSearchParams(location.search).get("url");
if (urlParam) {
  fetch(urlParam)
    .then((r) => {
      if (!r.ok) throw new Error(`HTTP ${r.status}`);
      return r.arrayBuffer();
    })
    .then((buf) => loadBytes(buf, urlParam))
    .catch((err) => banner(`fetch failed: ${err}`));
}

resize();
let lastTime = performance.now();
function frame(now: number): void {
  const dt = Math.min(0.5, Math.max(1e-4, (now - lastTime) / 1000));
  lastTime = now;
  if (session && renderer) {
    const pose = session.step({ keys, mouseDelta: [mouseDx, mouseDy], dt });
    mouseDx = 0;
    mouseDy = 0;
    requestSort();
    if (sortedGeneration === generation) renderer.draw(pose, intrinsics);
    session.frameMs = performance.now() - now;
  }
  hudEl.textContent = hudText();
  requestAnimationFrame(frame);
}
requestAnimationFrame(frame);
