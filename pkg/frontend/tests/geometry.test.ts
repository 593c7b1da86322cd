import { describe, expect, it } from 'vitest';

import { distanceToContour, nearestFracturedContour, normalizeRect, rectArea, refinedPoints } from '../src/geometry.js';
import { ContourDoc, Label } from '../src/types.js';

function contour(id: number, points: [number, number][]): ContourDoc {
  return { id, points, refined: { i_s: 0, i_e: points.length - 1 } };
}

describe('normalizeRect', () => {
  it('orders corners and clamps to the image', () => {
    const r = normalizeRect(350, -20, -5, 80, 320, 512);
    expect(r).toEqual({ x0: 0, y0: 0, x1: 320, y1: 80 });
  });

  it('zero-area drags stay zero-area', () => {
    expect(rectArea(normalizeRect(10, 10, 10, 40, 320, 512))).toBe(0);
    expect(rectArea(normalizeRect(10, 10, 10, 10, 320, 512))).toBe(0);
  });
});

describe('distanceToContour', () => {
  it('matches a brute-force sampling of the polyline', () => {
    const c = contour(0, [[0, 0], [10, 0], [10, 10]]);
    for (const [px, py] of [[5, 3], [12, 5], [-2, -2], [10, 15], [7, 7]] as [number, number][]) {
      let best = Infinity;
      const pts = refinedPoints(c);
      for (let i = 0; i + 1 < pts.length; i++) {
        for (let t = 0; t <= 1.0001; t += 0.001) {
          const x = pts[i][0] + t * (pts[i + 1][0] - pts[i][0]);
          const y = pts[i][1] + t * (pts[i + 1][1] - pts[i][1]);
          best = Math.min(best, Math.hypot(px - x, py - y));
        }
      }
      expect(distanceToContour(px, py, c)).toBeCloseTo(best, 3);
    }
  });

  it('uses only the refined span of the contour', () => {
    const c: ContourDoc = { id: 0, points: [[0, 0], [1, 0], [2, 0], [100, 100]], refined: { i_s: 0, i_e: 2 } };
    expect(distanceToContour(100, 100, c)).toBeGreaterThan(100);
  });
});

describe('nearestFracturedContour', () => {
  const contours = [contour(0, [[0, 0], [10, 0]]), contour(1, [[0, 20], [10, 20]]), contour(2, [[0, 40], [10, 40]])];

  it('ignores non-fractured contours entirely', () => {
    const labels: Record<string, Label> = { 0: 'non-fractured', 1: 'non-fractured', 2: 'non-fractured' };
    expect(nearestFracturedContour(5, 1, contours, labels, 6)).toBeNull();
  });

  it('picks the closest fractured contour within the radius', () => {
    const labels: Record<string, Label> = { 0: 'non-fractured', 1: 'fractured', 2: 'fractured' };
    expect(nearestFracturedContour(5, 2, contours, labels, 6)).toBeNull(); // contour 0 closest but not fractured
    expect(nearestFracturedContour(5, 24, contours, labels, 6)).toBe(1);
    expect(nearestFracturedContour(5, 39, contours, labels, 6)).toBe(2);
  });

  it('respects the hit radius', () => {
    const labels: Record<string, Label> = { 0: 'fractured', 1: 'fractured', 2: 'fractured' };
    expect(nearestFracturedContour(5, 12, contours, labels, 6)).toBeNull();
  });
});
