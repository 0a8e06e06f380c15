import { describe, expect, it } from "vitest";
import {
  applyMatrix,
  meshCenterAndScale,
  projectTriangles,
  rotationMatrix,
} from "../src/renderer.js";

describe("rotationMatrix", () => {
  it("is the identity at zero angles", () => {
    const identity = [1, 0, 0, 0, 1, 0, 0, 0, 1];
    rotationMatrix(0, 0).forEach((v, i) => expect(v).toBeCloseTo(identity[i], 15));
  });

  it("is orthonormal (preserves vector length)", () => {
    const m = rotationMatrix(0.7, -0.3);
    const v: [number, number, number] = [1, 2, 3];
    const r = applyMatrix(m, v);
    expect(Math.hypot(...r)).toBeCloseTo(Math.hypot(...v), 12);
  });

  it("yaw by pi/2 sends +z to +x", () => {
    const r = applyMatrix(rotationMatrix(Math.PI / 2, 0), [0, 0, 1]);
    expect(r[0]).toBeCloseTo(1, 12);
    expect(r[1]).toBeCloseTo(0, 12);
    expect(Math.abs(r[2])).toBeLessThan(1e-12);
  });
});

describe("meshCenterAndScale", () => {
  it("centers on the bounding-box midpoint and scales by the diagonal", () => {
    const { center, scale } = meshCenterAndScale([
      [0, 0, 0],
      [2, 2, 2],
    ]);
    expect(center).toEqual([1, 1, 1]);
    expect(scale).toBeCloseTo(1 / Math.sqrt(12), 12);
  });

  it("degenerate (single-point) meshes get unit scale", () => {
    expect(meshCenterAndScale([[3, 3, 3]]).scale).toBe(1);
  });
});

describe("projectTriangles", () => {
  const camera = { yaw: 0, pitch: 0, zoom: 1 };

  it("culls back faces and keeps front faces", () => {
    // Counter-clockwise in screen space after y-flip -> front facing.
    const vertices = [
      [0, 0, 0],
      [1, 0, 0],
      [0, 1, 0],
    ];
    const front = projectTriangles(vertices, [[0, 1, 2]], camera, 100, 100);
    const back = projectTriangles(vertices, [[0, 2, 1]], camera, 100, 100);
    expect(front.length + back.length).toBe(1);
  });

  it("sorts triangles far to near for painter's-algorithm fill", () => {
    const vertices = [
      [0, 0, 0], [1, 0, 0], [0, 1, 0],
      [0, 0, 1], [1, 0, 1], [0, 1, 1],
    ];
    const faces = [
      [0, 1, 2],
      [3, 4, 5],
    ];
    const tris = projectTriangles(vertices, faces, camera, 100, 100);
    expect(tris.length).toBe(2);
    for (let i = 1; i < tris.length; i++) {
      expect(tris[i].depth).toBeGreaterThanOrEqual(tris[i - 1].depth);
    }
  });

  it("keeps projected points inside the canvas for a unit mesh", () => {
    const vertices = [
      [0, 0, 0], [1, 0, 0], [0, 1, 0], [1, 1, 1],
    ];
    const faces = [
      [0, 1, 2], [0, 2, 1], [1, 2, 3], [1, 3, 2],
    ];
    const tris = projectTriangles(vertices, faces, { yaw: 0.4, pitch: 0.3, zoom: 1 }, 200, 150);
    for (const tri of tris) {
      for (const x of tri.xs) expect(x).toBeGreaterThanOrEqual(0);
      for (const x of tri.xs) expect(x).toBeLessThanOrEqual(200);
      for (const y of tri.ys) expect(y).toBeGreaterThanOrEqual(0);
      for (const y of tri.ys) expect(y).toBeLessThanOrEqual(150);
      expect(tri.shade).toBeGreaterThanOrEqual(0.25);
      expect(tri.shade).toBeLessThanOrEqual(1.0);
    }
  });
});
