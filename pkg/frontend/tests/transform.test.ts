import { describe, expect, it } from 'vitest';

import { fit, identity, pan, toImage, toScreen, zoomAt, ViewTransform } from '../src/transform.js';

function randomTransform(i: number): ViewTransform {
  return { scale: 0.25 + (i % 7) * 0.5, offsetX: -200 + i * 13, offsetY: 150 - i * 7 };
}

describe('view transform', () => {
  it('is invertible: toImage(toScreen(p)) round-trips', () => {
    for (let i = 0; i < 50; i++) {
      const t = randomTransform(i);
      const x = (i * 37) % 511;
      const y = (i * 91) % 313;
      const [sx, sy] = toScreen(t, x, y);
      const [bx, by] = toImage(t, sx, sy);
      expect(bx).toBeCloseTo(x, 9);
      expect(by).toBeCloseTo(y, 9);
    }
  });

  it('zoomAt keeps the anchor point fixed', () => {
    let t = identity();
    const anchor: [number, number] = [320, 200];
    const before = toImage(t, anchor[0], anchor[1]);
    t = zoomAt(t, 2.0, anchor[0], anchor[1]);
    const after = toImage(t, anchor[0], anchor[1]);
    expect(after[0]).toBeCloseTo(before[0], 9);
    expect(after[1]).toBeCloseTo(before[1], 9);
    expect(t.scale).toBeCloseTo(2.0, 12);
  });

  it('zoom clamps stay positive so the transform never degenerates', () => {
    let t = identity();
    for (let i = 0; i < 60; i++) t = zoomAt(t, 0.1, 10, 10);
    expect(t.scale).toBeGreaterThan(0);
    for (let i = 0; i < 60; i++) t = zoomAt(t, 10, 10, 10);
    expect(t.scale).toBeLessThanOrEqual(32);
  });

  it('pan shifts offsets only', () => {
    const t = pan({ scale: 2, offsetX: 5, offsetY: 6 }, 10, -4);
    expect(t).toEqual({ scale: 2, offsetX: 15, offsetY: 2 });
  });

  it('fit centers the image in the viewport', () => {
    const t = fit(320, 512, 1280, 800);
    const [sx0, sy0] = toScreen(t, 0, 0);
    const [sx1, sy1] = toScreen(t, 320, 512);
    expect(sx0).toBeCloseTo(1280 - sx1, 6);
    expect(sy0).toBeCloseTo(800 - sy1, 6);
    expect(sy1 - sy0).toBeCloseTo(800, 6);
  });
});
