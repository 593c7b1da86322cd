import { refinedPoints } from './geometry.js';
import { AnnotationState } from './state.js';
import { toScreen } from './transform.js';
import { ContourDoc, Label, RegionsDoc } from './types.js';

// Colour conventions: non-fractured gray, fractured red, flesh-auto dashed
// blue, region cut-lines dashed horizontal.
const COLORS: Record<Label, string> = {
  'non-fractured': '#9e9e9e',
  fractured: '#e53935',
  'flesh-auto': '#1e88e5',
};

export function drawScene(
  ctx: CanvasRenderingContext2D,
  state: AnnotationState,
  image: CanvasImageSource | null,
  regions: RegionsDoc | null,
  viewW: number,
  viewH: number,
): void {
  ctx.clearRect(0, 0, viewW, viewH);
  const t = state.transform;
  if (image) {
    ctx.save();
    ctx.imageSmoothingEnabled = false;
    ctx.setTransform(t.scale, 0, 0, t.scale, t.offsetX, t.offsetY);
    ctx.drawImage(image, 0, 0);
    ctx.restore();
  }

  if (regions && state.overlays.regions) {
    for (const row of [regions.t_knee, regions.t_foot]) {
      if (row === null) continue;
      const [, sy] = toScreen(t, 0, row);
      ctx.save();
      ctx.strokeStyle = '#ffb300';
      ctx.setLineDash([8, 6]);
      ctx.beginPath();
      ctx.moveTo(0, sy);
      ctx.lineTo(viewW, sy);
      ctx.stroke();
      ctx.restore();
    }
  }

  if (state.overlays.contours && state.labels) {
    for (const contour of state.contours) {
      const label = state.labels.labels[String(contour.id)] ?? 'non-fractured';
      if (state.overlays.fracturedOnly && label !== 'fractured') continue;
      if (!state.overlays.flesh && label === 'flesh-auto') continue;
      drawContour(ctx, state, contour, label);
    }
  }

  if (state.labels) {
    ctx.save();
    ctx.strokeStyle = '#fdd835';
    ctx.lineWidth = 1.5;
    for (const [x0, y0, x1, y1] of state.labels.rects) {
      const [sx0, sy0] = toScreen(t, x0, y0);
      const [sx1, sy1] = toScreen(t, x1, y1);
      ctx.strokeRect(sx0, sy0, sx1 - sx0, sy1 - sy0);
    }
    ctx.restore();
  }

  if (state.cut) {
    ctx.save();
    ctx.strokeStyle = '#00e676';
    ctx.lineWidth = 2;
    for (const cluster of state.cut.clusters) {
      const [x0, y0, x1, y1] = cluster.rect;
      const [sx0, sy0] = toScreen(t, x0, y0);
      const [sx1, sy1] = toScreen(t, x1, y1);
      ctx.strokeRect(sx0 - 3, sy0 - 3, sx1 - sx0 + 6, sy1 - sy0 + 6);
    }
    ctx.restore();
  }
}

function drawContour(
  ctx: CanvasRenderingContext2D,
  state: AnnotationState,
  contour: ContourDoc,
  label: Label,
): void {
  const pts = refinedPoints(contour);
  if (pts.length < 2) return;
  ctx.save();
  ctx.strokeStyle = COLORS[label];
  ctx.lineWidth = label === 'fractured' ? 2 : 1;
  if (label === 'flesh-auto') ctx.setLineDash([4, 4]);
  ctx.beginPath();
  const [sx, sy] = toScreen(state.transform, pts[0][0], pts[0][1]);
  ctx.moveTo(sx, sy);
  for (let i = 1; i < pts.length; i++) {
    const [x, y] = toScreen(state.transform, pts[i][0], pts[i][1]);
    ctx.lineTo(x, y);
  }
  ctx.stroke();
  ctx.restore();
}

export function drawDragRect(
  ctx: CanvasRenderingContext2D,
  sx0: number,
  sy0: number,
  sx1: number,
  sy1: number,
): void {
  ctx.save();
  ctx.strokeStyle = '#fdd835';
  ctx.setLineDash([5, 4]);
  ctx.strokeRect(Math.min(sx0, sx1), Math.min(sy0, sy1), Math.abs(sx1 - sx0), Math.abs(sy1 - sy0));
  ctx.restore();
}
