/** Minimal dependency-free flat-shaded mesh renderer on a 2D canvas.
 *
 * Orthographic projection with painter's-algorithm depth sorting; adequate
 * for the few-thousand-triangle meshes this service produces and keeps the
 * UI a static bundle with no third-party runtime.
 */

export interface Camera {
  yaw: number;
  pitch: number;
  zoom: number;
}

export function rotationMatrix(yaw: number, pitch: number): number[] {
  const cy = Math.cos(yaw), sy = Math.sin(yaw);
  const cp = Math.cos(pitch), sp = Math.sin(pitch);
  // row-major 3x3: pitch about x after yaw about y
  return [cy, 0, sy, sy * sp, cp, -cy * sp, -sy * cp, sp, cy * cp];
}

export function applyMatrix(m: number[], v: [number, number, number]): [number, number, number] {
  return [
    m[0] * v[0] + m[1] * v[1] + m[2] * v[2],
    m[3] * v[0] + m[4] * v[1] + m[5] * v[2],
    m[6] * v[0] + m[7] * v[1] + m[8] * v[2],
  ];
}

export function meshCenterAndScale(vertices: number[][]): { center: number[]; scale: number } {
  const lo = [Infinity, Infinity, Infinity];
  const hi = [-Infinity, -Infinity, -Infinity];
  for (const v of vertices) {
    for (let c = 0; c < 3; c++) {
      lo[c] = Math.min(lo[c], v[c]);
      hi[c] = Math.max(hi[c], v[c]);
    }
  }
  const center = [0, 1, 2].map((c) => 0.5 * (lo[c] + hi[c]));
  const diag = Math.hypot(hi[0] - lo[0], hi[1] - lo[1], hi[2] - lo[2]);
  return { center, scale: diag > 0 ? 1 / diag : 1 };
}

interface ProjectedTri {
  xs: number[];
  ys: number[];
  depth: number;
  shade: number;
}

export function projectTriangles(
  vertices: number[][],
  faces: number[][],
  camera: Camera,
  width: number,
  height: number,
): ProjectedTri[] {
  const { center, scale } = meshCenterAndScale(vertices);
  const m = rotationMatrix(camera.yaw, camera.pitch);
  const s = Math.min(width, height) * 0.8 * camera.zoom * scale;
  const light: [number, number, number] = [0.408, 0.408, 0.816];
  const projected = vertices.map((v) => {
    const p = applyMatrix(m, [v[0] - center[0], v[1] - center[1], v[2] - center[2]]);
    return [width / 2 + p[0] * s, height / 2 - p[1] * s, p[2]];
  });
  const tris: ProjectedTri[] = [];
  for (const f of faces) {
    const [a, b, c] = [projected[f[0]], projected[f[1]], projected[f[2]]];
    // screen-space normal z: back-face cull
    const nz = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]);
    if (nz >= 0) continue;
    const va = vertices[f[0]], vb = vertices[f[1]], vc = vertices[f[2]];
    const e1 = [vb[0] - va[0], vb[1] - va[1], vb[2] - va[2]];
    const e2 = [vc[0] - va[0], vc[1] - va[1], vc[2] - va[2]];
    const n = [
      e1[1] * e2[2] - e1[2] * e2[1],
      e1[2] * e2[0] - e1[0] * e2[2],
      e1[0] * e2[1] - e1[1] * e2[0],
    ];
    const len = Math.hypot(n[0], n[1], n[2]) || 1;
    const rn = applyMatrix(m, [n[0] / len, n[1] / len, n[2] / len]);
    const shade = 0.25 + 0.75 * Math.abs(rn[0] * light[0] + rn[1] * light[1] + rn[2] * light[2]);
    tris.push({
      xs: [a[0], b[0], c[0]],
      ys: [a[1], b[1], c[1]],
      depth: (a[2] + b[2] + c[2]) / 3,
      shade,
    });
  }
  tris.sort((p, q) => p.depth - q.depth);
  return tris;
}

export function renderMesh(
  ctx: CanvasRenderingContext2D,
  vertices: number[][],
  faces: number[][],
  camera: Camera,
): void {
  const { width, height } = ctx.canvas;
  ctx.clearRect(0, 0, width, height);
  for (const tri of projectTriangles(vertices, faces, camera, width, height)) {
    const v = Math.round(tri.shade * 255);
    ctx.fillStyle = `rgb(${Math.round(v * 0.45)}, ${Math.round(v * 0.65)}, ${v})`;
    ctx.beginPath();
    ctx.moveTo(tri.xs[0], tri.ys[0]);
    ctx.lineTo(tri.xs[1], tri.ys[1]);
    ctx.lineTo(tri.xs[2], tri.ys[2]);
    ctx.closePath();
    ctx.fill();
  }
}
