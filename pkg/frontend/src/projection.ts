/**
 * Orthographic projection of the 3-D point cloud onto the screen, with a
 * user-rotatable camera. Purely mathematical; no rendering.
 */

export interface Camera {
  /** Rotation around the vertical axis, radians. */
  yaw: number;
  /** Rotation around the horizontal axis, radians. */
  pitch: number;
  zoom: number;
  panX: number;
  panY: number;
}

export function defaultCamera(): Camera {
  return { yaw: 0.6, pitch: 0.4, zoom: 1, panX: 0, panY: 0 };
}

export interface Bounds {
  center: [number, number, number];
  radius: number;
}

/** Bounding sphere (center + radius) used to normalize the cloud to unit scale. */
export function fitBounds(points: number[][]): Bounds {
  if (points.length === 0) {
    return { center: [0, 0, 0], radius: 1 };
  }
  const lo = [Infinity, Infinity, Infinity];
  const hi = [-Infinity, -Infinity, -Infinity];
  for (const p of points) {
    for (let a = 0; a < 3; a++) {
      const v = p[a] ?? 0;
      if (v < lo[a]) lo[a] = v;
      if (v > hi[a]) hi[a] = v;
    }
  }
  const center: [number, number, number] = [
    (lo[0] + hi[0]) / 2,
    (lo[1] + hi[1]) / 2,
    (lo[2] + hi[2]) / 2,
  ];
  let radius = 0;
  for (let a = 0; a < 3; a++) {
    radius = Math.max(radius, (hi[a] - lo[a]) / 2);
  }
  return { center, radius: radius || 1 };
}

/** Row-major 3x3 rotation: pitch around x after yaw around y. */
export function rotationMatrix(camera: Camera): number[] {
  const cy = Math.cos(camera.yaw);
  const sy = Math.sin(camera.yaw);
  const cp = Math.cos(camera.pitch);
  const sp = Math.sin(camera.pitch);
  return [
    cy, 0, sy,
    sy * sp, cp, -cy * sp,
    -sy * cp, sp, cy * cp,
  ];
}

/**
 * Project every point to (x, y, depth) screen triplets. Depth is the
 * rotated z, used for painter's-order rendering; larger = nearer.
 */
export function projectPoints(
  points: number[][],
  bounds: Bounds,
  camera: Camera,
  width: number,
  height: number,
): Float32Array {
  const out = new Float32Array(points.length * 3);
  const m = rotationMatrix(camera);
  const scale = (Math.min(width, height) / 2) * 0.85 * camera.zoom;
  const inv = 1 / bounds.radius;
  const cx = width / 2 + camera.panX;
  const cy = height / 2 + camera.panY;
  for (let i = 0; i < points.length; i++) {
    const p = points[i];
    const x = ((p[0] ?? 0) - bounds.center[0]) * inv;
    const y = ((p[1] ?? 0) - bounds.center[1]) * inv;
    const z = ((p[2] ?? 0) - bounds.center[2]) * inv;
    const rx = m[0] * x + m[1] * y + m[2] * z;
    const ry = m[3] * x + m[4] * y + m[5] * z;
    const rz = m[6] * x + m[7] * y + m[8] * z;
    out[i * 3] = cx + rx * scale;
    out[i * 3 + 1] = cy - ry * scale;
    out[i * 3 + 2] = rz;
  }
  return out;
}

/**
 * Index of the point nearest to (x, y) in screen space within pickRadius,
 * or null. Ties resolve to the lowest index, so picks are deterministic.
 */
export function pick(
  projected: Float32Array,
  x: number,
  y: number,
  pickRadius: number,
): number | null {
  let best: number | null = null;
  let bestSq = pickRadius * pickRadius;
  const n = projected.length / 3;
  for (let i = 0; i < n; i++) {
    const dx = projected[i * 3] - x;
    const dy = projected[i * 3 + 1] - y;
    const sq = dx * dx + dy * dy;
    if (sq < bestSq || (sq === bestSq && best === null)) {
      best = i;
      bestSq = sq;
    }
  }
  return best;
}
