/** WebGL2 splat renderer: instanced quads over a texture-packed scaffold.
 *
 * Projection in the vertex shader follows the same contract as
 * projectGaussian (pinhole + EWA Jacobian with the 1.3x frustum clamp and
 * 0.3 px^2 low-pass floor); compositing runs front to back with
 * destination-alpha "under" blending, fed by the depth-sort worker.
 * Correctness of the math is pinned by the shared projection vectors on
 * the TypeScript side; this path adds only packing and draw order.
 */

import { SplatCloud } from "./formats";
import { Intrinsics, Pose } from "./projection";

const VERT = `#version 300 es
precision highp float;
precision highp int;
precision highp usampler2D;

uniform usampler2D uSplats;
uniform mat3 uView;       // world-to-camera rotation (row-major upload, transposed on use)
uniform vec3 uViewT;
uniform vec2 uFocal;      // (focal, focal)
uniform vec2 uCenter;     // (cx, cy)
uniform vec2 uViewport;   // (width, height)

in vec2 aCorner;          // +-1 quad corners
in int aIndex;            // splat id, depth-sorted

out vec2 vQuad;           // sigma-scaled offset in the eigenbasis
out vec4 vColor;          // rgb + opacity

const float NEAR_CLIP = 0.05;
const float LOWPASS_PX2 = 0.3;
const float FRUSTUM_CLAMP = 1.3;
const float SIGMA_CUTOFF = 3.0;

void main() {
  int texW = textureSize(uSplats, 0).x;
  int base = aIndex * 2;
  uvec4 t0 = texelFetch(uSplats, ivec2(base % texW, base / texW), 0);
  uvec4 t1 = texelFetch(uSplats, ivec2((base + 1) % texW, (base + 1) / texW), 0);

  vec3 center = uintBitsToFloat(t0.xyz);
  vec3 cam = uView * center + uViewT;
  if (cam.z <= NEAR_CLIP) {
    gl_Position = vec4(0.0, 0.0, 2.0, 1.0);
    return;
  }

  vec2 v01 = unpackHalf2x16(t1.x); // v00, v01
  vec2 v23 = unpackHalf2x16(t1.y); // v02, v11
  vec2 v45 = unpackHalf2x16(t1.z); // v12, v22
  mat3 sigma = mat3(
    v01.x, v01.y, v23.x,
    v01.y, v23.y, v45.x,
    v23.x, v45.x, v45.y);
  mat3 V = uView * sigma * transpose(uView);

  vec2 lim = FRUSTUM_CLAMP * max(uCenter, uViewport - uCenter) / uFocal;
  float a = uFocal.x / cam.z;
  vec2 clamped = clamp(cam.xy / cam.z, -lim, lim);
  float b = -uFocal.x * clamped.x / cam.z;
  float c = -uFocal.y * clamped.y / cam.z;
  float c00 = a * a * V[0][0] + 2.0 * a * b * V[0][2] + b * b * V[2][2] + LOWPASS_PX2;
  float c01 = a * a * V[0][1] + a * c * V[0][2] + a * b * V[1][2] + b * c * V[2][2];
  float c11 = a * a * V[1][1] + 2.0 * a * c * V[1][2] + c * c * V[2][2] + LOWPASS_PX2;

  float det = c00 * c11 - c01 * c01;
  if (det <= 0.0) {
    gl_Position = vec4(0.0, 0.0, 2.0, 1.0);
    return;
  }
  float mid = 0.5 * (c00 + c11);
  float disc = sqrt(max(mid * mid - det, 0.0));
  float lam1 = mid + disc;
  float lam2 = max(mid - disc, 1e-8);
  vec2 e1 = (abs(c01) > 1e-12) ? normalize(vec2(c01, lam1 - c00))
                               : ((c00 >= c11) ? vec2(1.0, 0.0) : vec2(0.0, 1.0));
  vec2 e2 = vec2(-e1.y, e1.x);
  vec2 axis1 = e1 * sqrt(lam1);
  vec2 axis2 = e2 * sqrt(lam2);

  vec2 mean = uFocal * cam.xy / cam.z + uCenter;
  vec2 px = mean + SIGMA_CUTOFF * (aCorner.x * axis1 + aCorner.y * axis2);
  // Raster rows grow with +y camera; NDC y grows upward, so no flip here
  // displays the scene upright.
  vec2 ndc = 2.0 * px / uViewport - 1.0;

  vQuad = aCorner * SIGMA_CUTOFF;
  float opacity = uintBitsToFloat(t1.w);
  vec3 rgb = vec3(t0.w & 0xffu, (t0.w >> 8) & 0xffu, (t0.w >> 16) & 0xffu) / 255.0;
  vColor = vec4(rgb, opacity);
  gl_Position = vec4(ndc, 0.0, 1.0);
}
`;

const FRAG = `#version 300 es
precision highp float;

in vec2 vQuad;
in vec4 vColor;
out vec4 outColor;

const float MAX_CONTRIBUTION = 0.99;

void main() {
  float power = -0.5 * dot(vQuad, vQuad);
  float contrib = min(vColor.a * exp(power), MAX_CONTRIBUTION);
  if (contrib < 1.0 / 255.0) discard;
  outColor = vec4(contrib * vColor.rgb, contrib);
}
`;

function compile(gl: WebGL2RenderingContext, kind: number, src: string): WebGLShader {
  const shader = gl.createShader(kind)!;
  gl.shaderSource(shader, src);
  gl.compileShader(shader);
  if (!gl.getShaderParameter(shader, gl.COMPILE_STATUS)) {
    throw new Error(`shader compile failed: ${gl.getShaderInfoLog(shader)}`);
  }
  return shader;
}

// Scalar float32 -> IEEE half bits (round-to-nearest is unnecessary for
// covariance packing; truncation keeps well within display tolerance).
function toHalf(v: number): number {
  const f32 = new Float32Array(1);
  const u32 = new Uint32Array(f32.buffer);
  f32[0] = v;
  const x = u32[0];
  const sign = (x >> 16) & 0x8000;
  let exp = (x >> 23) & 0xff;
  let frac = x & 0x7fffff;
  if (exp === 0xff) return sign | 0x7c00 | (frac ? 1 : 0);
  const e = exp - 127 + 15;
  if (e >= 0x1f) return sign | 0x7c00;
  if (e <= 0) {
    if (e < -10) return sign;
    frac |= 0x800000;
    return sign | (frac >> (14 - e));
  }
  return sign | (e << 10) | (frac >> 13);
}

export class GlSplatRenderer {
  private gl: WebGL2RenderingContext;
  private program: WebGLProgram;
  private texture: WebGLTexture;
  private orderBuffer: WebGLBuffer;
  private uView: WebGLUniformLocation;
  private uViewT: WebGLUniformLocation;
  private uFocal: WebGLUniformLocation;
  private uCenter: WebGLUniformLocation;
  private uViewport: WebGLUniformLocation;
  private drawCount = 0;

  constructor(private canvas: HTMLCanvasElement) {
    const gl = canvas.getContext("webgl2", { antialias: false, alpha: false });
    if (!gl) throw new Error("WebGL2 is not available");
    this.gl = gl;

    const program = gl.createProgram()!;
    gl.attachShader(program, compile(gl, gl.VERTEX_SHADER, VERT));
    gl.attachShader(program, compile(gl, gl.FRAGMENT_SHADER, FRAG));
    gl.linkProgram(program);
    if (!gl.getProgramParameter(program, gl.LINK_STATUS)) {
      throw new Error(`program link failed: ${gl.getProgramInfoLog(program)}`);
    }
    this.program = program;
    gl.useProgram(program);

    gl.disable(gl.DEPTH_TEST);
    gl.enable(gl.BLEND);
    // "Under" operator: front-to-back accumulation of premultiplied color.
    gl.blendFuncSeparate(gl.ONE_MINUS_DST_ALPHA, gl.ONE, gl.ONE_MINUS_DST_ALPHA, gl.ONE);

    const corners = new Float32Array([-1, -1, 1, -1, 1, 1, -1, 1]);
    const cornerBuffer = gl.createBuffer()!;
    gl.bindBuffer(gl.ARRAY_BUFFER, cornerBuffer);
    gl.bufferData(gl.ARRAY_BUFFER, corners, gl.STATIC_DRAW);
    const aCorner = gl.getAttribLocation(program, "aCorner");
    gl.enableVertexAttribArray(aCorner);
    gl.vertexAttribPointer(aCorner, 2, gl.FLOAT, false, 0, 0);

    this.orderBuffer = gl.createBuffer()!;
    const aIndex = gl.getAttribLocation(program, "aIndex");
    gl.enableVertexAttribArray(aIndex);
    gl.bindBuffer(gl.ARRAY_BUFFER, this.orderBuffer);
    gl.vertexAttribIPointer(aIndex, 1, gl.INT, 0, 0);
    gl.vertexAttribDivisor(aIndex, 1);

    this.texture = gl.createTexture()!;
    gl.activeTexture(gl.TEXTURE0);
    gl.bindTexture(gl.TEXTURE_2D, this.texture);
    gl.texParameteri(gl.TEXTURE_2D, gl.TEXTURE_MIN_FILTER, gl.NEAREST);
    gl.texParameteri(gl.TEXTURE_2D, gl.TEXTURE_MAG_FILTER, gl.NEAREST);
    gl.texParameteri(gl.TEXTURE_2D, gl.TEXTURE_WRAP_S, gl.CLAMP_TO_EDGE);
    gl.texParameteri(gl.TEXTURE_2D, gl.TEXTURE_WRAP_T, gl.CLAMP_TO_EDGE);
    gl.uniform1i(gl.getUniformLocation(this.program, "uSplats"), 0);

    this.uView = gl.getUniformLocation(program, "uView")!;
    this.uViewT = gl.getUniformLocation(program, "uViewT")!;
    this.uFocal = gl.getUniformLocation(program, "uFocal")!;
    this.uCenter = gl.getUniformLocation(program, "uCenter")!;
    this.uViewport = gl.getUniformLocation(program, "uViewport")!;
  }

  /** Upload a scaffold into the data texture (2 RGBA32UI texels each). */
  setCloud(cloud: SplatCloud, covariances: Float32Array): void {
    const gl = this.gl;
    const texW = 2048;
    const texelCount = 2 * cloud.count;
    const texH = Math.max(1, Math.ceil(texelCount / texW));
    const data = new Uint32Array(texW * texH * 4);
    const f32 = new Float32Array(1);
    const u32 = new Uint32Array(f32.buffer);
    const bits = (v: number) => {
      f32[0] = v;
      return u32[0];
    };
    for (let i = 0; i < cloud.count; i++) {
      const o = 8 * i;
      data[o] = bits(cloud.centers[3 * i]);
      data[o + 1] = bits(cloud.centers[3 * i + 1]);
      data[o + 2] = bits(cloud.centers[3 * i + 2]);
      const r = Math.round(255 * cloud.colors[3 * i]);
      const g = Math.round(255 * cloud.colors[3 * i + 1]);
      const b = Math.round(255 * cloud.colors[3 * i + 2]);
      data[o + 3] = r | (g << 8) | (b << 16);
      data[o + 4] = toHalf(covariances[6 * i]) | (toHalf(covariances[6 * i + 1]) << 16);
      data[o + 5] = toHalf(covariances[6 * i + 2]) | (toHalf(covariances[6 * i + 3]) << 16);
      data[o + 6] = toHalf(covariances[6 * i + 4]) | (toHalf(covariances[6 * i + 5]) << 16);
      data[o + 7] = bits(cloud.opacities[i]);
    }
    gl.bindTexture(gl.TEXTURE_2D, this.texture);
    gl.texImage2D(
      gl.TEXTURE_2D, 0, gl.RGBA32UI, texW, texH, 0, gl.RGBA_INTEGER, gl.UNSIGNED_INT, data,
    );
    this.drawCount = 0;
  }

  /** Replace the draw order (front-to-back splat ids from the sorter). */
  setOrder(order: Int32Array): void {
    const gl = this.gl;
    gl.bindBuffer(gl.ARRAY_BUFFER, this.orderBuffer);
    gl.bufferData(gl.ARRAY_BUFFER, order, gl.DYNAMIC_DRAW);
    this.drawCount = order.length;
  }

  draw(pose: Pose, K: Intrinsics): void {
    const gl = this.gl;
    const w = this.canvas.width;
    const h = this.canvas.height;
    gl.viewport(0, 0, w, h);
    gl.clearColor(0, 0, 0, 0);
    gl.clear(gl.COLOR_BUFFER_BIT);
    if (this.drawCount === 0) return;

    const R = pose.rotation;
    // uniformMatrix3fv consumes column-major; transpose on upload.
    gl.uniformMatrix3fv(this.uView, false, new Float32Array([
      R[0], R[3], R[6], R[1], R[4], R[7], R[2], R[5], R[8],
    ]));
    gl.uniform3fv(this.uViewT, new Float32Array(pose.translation));
    gl.uniform2f(this.uFocal, K.focal, K.focal);
    gl.uniform2f(this.uCenter, K.cx, K.cy);
    gl.uniform2f(this.uViewport, K.width, K.height);
    gl.drawArraysInstanced(gl.TRIANGLE_FAN, 0, 4, this.drawCount);
  }
}
