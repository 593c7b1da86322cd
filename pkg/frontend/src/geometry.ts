import { ContourDoc, Label, Rect } from './types.js';

/** Normalize a drag into x0<=x1, y0<=y1 and clamp it to the image bounds. */
export function normalizeRect(ax: number, ay: number, bx: number, by: number, imageW: number, imageH: number): Rect {
  const clampX = (v: number) => Math.min(imageW, Math.max(0, v));
  const clampY = (v: number) => Math.min(imageH, Math.max(0, v));
  return {
    x0: clampX(Math.min(ax, bx)),
    y0: clampY(Math.min(ay, by)),
    x1: clampX(Math.max(ax, bx)),
    y1: clampY(Math.max(ay, by)),
  };
}

export function rectArea(r: Rect): number {
  return (r.x1 - r.x0) * (r.y1 - r.y0);
}

function segmentDistance(px: number, py: number, ax: number, ay: number, bx: number, by: number): number {
  const dx = bx - ax;
  const dy = by - ay;
  const lenSq = dx * dx + dy * dy;
  let t = lenSq === 0 ? 0 : ((px - ax) * dx + (py - ay) * dy) / lenSq;
  t = Math.max(0, Math.min(1, t));
  const cx = ax + t * dx;
  const cy = ay + t * dy;
  return Math.hypot(px - cx, py - cy);
}

/** Distance from a point to a contour's refined polyline. */
export function distanceToContour(px: number, py: number, contour: ContourDoc): number {
  const pts = refinedPoints(contour);
  if (pts.length === 1) return Math.hypot(px - pts[0][0], py - pts[0][1]);
  let best = Infinity;
  for (let i = 0; i + 1 < pts.length; i++) {
    const d = segmentDistance(px, py, pts[i][0], pts[i][1], pts[i + 1][0], pts[i + 1][1]);
    if (d < best) best = d;
  }
  return best;
}

export function refinedPoints(contour: ContourDoc): [number, number][] {
  return contour.points.slice(contour.refined.i_s, contour.refined.i_e + 1);
}

/**
 * Nearest fractured contour within the hit radius, or null.  Deselection is
 * scoped to contours that are already fractured, so everything else is
 * ignored no matter how close.
 */
export function nearestFracturedContour(
  px: number,
  py: number,
  contours: ContourDoc[],
  labels: Record<string, Label>,
  radius: number,
): number | null {
  let bestId: number | null = null;
  let bestDist = radius;
  for (const contour of contours) {
    if (labels[String(contour.id)] !== 'fractured') continue;
    const d = distanceToContour(px, py, contour);
    if (d <= bestDist) {
      bestDist = d;
      bestId = contour.id;
    }
  }
  return bestId;
}
