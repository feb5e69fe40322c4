// Fixed 2D view with a slight pan for depth perception.
//
// Task frame: x along the wire, z up, y into the scene. The camera yaws
// by the pan angle about the vertical axis; screen-x mixes world x and y,
// screen-y is world z (canvas y grows downward). Depth (camera-forward
// distance) drives the ring's size/shade cue since the flat view cannot
// show it directly.

import type { Vec3 } from './protocol.js';

export interface Camera {
  panDeg: number;
  pxPerM: number;
  cx: number; // canvas pixel of the world origin
  cy: number;
}

export interface Projected {
  x: number;
  y: number;
  depth: number; // meters toward the camera-forward axis
}

export function project(cam: Camera, p: Vec3): Projected {
  const th = (cam.panDeg * Math.PI) / 180;
  const sx = p[0] * Math.cos(th) + p[1] * Math.sin(th);
  const depth = -p[0] * Math.sin(th) + p[1] * Math.cos(th);
  return {
    x: cam.cx + sx * cam.pxPerM,
    y: cam.cy - p[2] * cam.pxPerM,
    depth,
  };
}

// Pointer drag: screen-plane motion steers the in-plane task axes
// (x along the wire, z vertical); the wheel handles depth (y).
export function dragToWorld(cam: Camera, dxPx: number, dyPx: number): Vec3 {
  const th = (cam.panDeg * Math.PI) / 180;
  return [dxPx / (cam.pxPerM * Math.cos(th)), 0, -dyPx / cam.pxPerM];
}

export function wheelToWorld(deltaY: number, step = 0.002): Vec3 {
  return [0, -Math.sign(deltaY) * step * Math.min(Math.abs(deltaY), 50), 0];
}

// Size/shade factor for the depth cue: slightly bigger and brighter when
// nearer the viewer.
export function depthCue(depth: number): { scale: number; shade: number } {
  const k = Math.max(-0.5, Math.min(0.5, depth));
  return { scale: 1 - 0.35 * k, shade: 1 - 0.6 * Math.max(0, k) };
}

export function fitCamera(
  points: Vec3[],
  width: number,
  height: number,
  panDeg: number,
  margin = 0.15,
): Camera {
  // Project with a unit camera first, then solve for scale and center.
  const unit: Camera = { panDeg, pxPerM: 1, cx: 0, cy: 0 };
  let minX = Infinity, maxX = -Infinity, minY = Infinity, maxY = -Infinity;
  for (const p of points) {
    const q = project(unit, p);
    minX = Math.min(minX, q.x); maxX = Math.max(maxX, q.x);
    minY = Math.min(minY, q.y); maxY = Math.max(maxY, q.y);
  }
  const spanX = Math.max(maxX - minX, 0.05);
  const spanY = Math.max(maxY - minY, 0.05);
  const pxPerM = Math.min(
    (width * (1 - 2 * margin)) / spanX,
    (height * (1 - 2 * margin)) / spanY,
  );
  // Final pixel = c + unit_projection * pxPerM on both axes, so both
  // centers subtract the scaled midpoint of the unit-projected extents.
  return {
    panDeg,
    pxPerM,
    cx: width / 2 - ((minX + maxX) / 2) * pxPerM,
    cy: height / 2 - ((minY + maxY) / 2) * pxPerM,
  };
}
