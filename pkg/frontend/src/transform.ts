// Single affine view transform: screen = image * scale + offset.
// scale > 0 keeps it invertible.

export interface ViewTransform {
  scale: number;
  offsetX: number;
  offsetY: number;
}

export function identity(): ViewTransform {
  return { scale: 1, offsetX: 0, offsetY: 0 };
}

export function toScreen(t: ViewTransform, x: number, y: number): [number, number] {
  return [x * t.scale + t.offsetX, y * t.scale + t.offsetY];
}

export function toImage(t: ViewTransform, sx: number, sy: number): [number, number] {
  return [(sx - t.offsetX) / t.scale, (sy - t.offsetY) / t.scale];
}

/** Zoom by a factor keeping the given screen point fixed. */
export function zoomAt(t: ViewTransform, factor: number, sx: number, sy: number): ViewTransform {
  const scale = Math.min(32, Math.max(1 / 32, t.scale * factor));
  const applied = scale / t.scale;
  return {
    scale,
    offsetX: sx - (sx - t.offsetX) * applied,
    offsetY: sy - (sy - t.offsetY) * applied,
  };
}

export function pan(t: ViewTransform, dx: number, dy: number): ViewTransform {
  return { scale: t.scale, offsetX: t.offsetX + dx, offsetY: t.offsetY + dy };
}

/** Fit an image of the given size into a viewport, centered. */
export function fit(imageW: number, imageH: number, viewW: number, viewH: number): ViewTransform {
  const scale = Math.min(viewW / imageW, viewH / imageH);
  return {
    scale,
    offsetX: (viewW - imageW * scale) / 2,
    offsetY: (viewH - imageH * scale) / 2,
  };
}
