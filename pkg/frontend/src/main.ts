import { api, ApiError } from './api.js';
import { drawDragRect, drawScene } from './render.js';
import { AnnotationState } from './state.js';
import { fit, pan, toImage, zoomAt } from './transform.js';
import { DendrogramDoc, RegionsDoc, Tool } from './types.js';

const canvas = document.getElementById('view') as HTMLCanvasElement;
const ctx = canvas.getContext('2d')!;
const imageList = document.getElementById('image-list') as HTMLSelectElement;
const toolButtons = Array.from(document.querySelectorAll<HTMLButtonElement>('button[data-tool]'));
const toggles = Array.from(document.querySelectorAll<HTMLInputElement>('input[data-overlay]'));
const slider = document.getElementById('cut-slider') as HTMLInputElement;
const sliderValue = document.getElementById('cut-value') as HTMLSpanElement;
const banner = document.getElementById('banner') as HTMLDivElement;
const status = document.getElementById('status') as HTMLDivElement;

let state: AnnotationState | null = null;
let bitmap: ImageBitmap | null = null;
let regions: RegionsDoc | null = null;
let dendrogram: DendrogramDoc | null = null;
let drag: { sx: number; sy: number; ex: number; ey: number } | null = null;

function repaint(): void {
  if (!state) return;
  drawScene(ctx, state, bitmap, regions, canvas.width, canvas.height);
  if (drag) drawDragRect(ctx, drag.sx, drag.sy, drag.ex, drag.ey);
  const labels = state.labels;
  if (labels) {
    const counts = { fractured: 0, 'non-fractured': 0, 'flesh-auto': 0 };
    for (const label of Object.values(labels.labels)) counts[label]++;
    status.textContent =
      `${state.imageId} — ${counts.fractured} fractured, ${counts['non-fractured']} non-fractured, ` +
      `${counts['flesh-auto']} flesh (v${labels.version})`;
  }
}

function toast(message: string): void {
  banner.textContent = message;
  banner.classList.add('visible');
  setTimeout(() => banner.classList.remove('visible'), 4000);
}

async function openImage(imageId: string): Promise<void> {
  const resp = await fetch(api.imageUrl(imageId));
  bitmap = await createImageBitmap(await resp.blob());
  state = new AnnotationState(api, imageId, bitmap.width, bitmap.height, repaint);
  state.transform = fit(bitmap.width, bitmap.height, canvas.width, canvas.height);
  regions = null;
  dendrogram = null;
  banner.classList.remove('visible');
  try {
    regions = await api.regions(imageId);
  } catch (err) {
    if (!(err instanceof ApiError && err.status === 409)) throw err;
  }
  try {
    dendrogram = await api.dendrogram(imageId);
    const max = dendrogram.merges.length ? dendrogram.merges[dendrogram.merges.length - 1].dist : 1;
    slider.max = String(Math.ceil(max * 1.2));
    slider.value = '0';
    if (dendrogram.leaves.length === 0) {
      toast('No horizontal-gradient points on fractured contours: no regions can be highlighted.');
    }
  } catch (err) {
    if (!(err instanceof ApiError && err.status === 409)) throw err;
  }
  await state.load();
}

function currentTool(): Tool {
  return state ? state.tool : 'select-area';
}

canvas.addEventListener('mousedown', (ev) => {
  if (!state) return;
  if (ev.button === 1 || ev.shiftKey) {
    // pan regardless of tool
    const start = { x: ev.offsetX, y: ev.offsetY };
    const onMove = (move: MouseEvent) => {
      state!.transform = pan(state!.transform, move.offsetX - start.x, move.offsetY - start.y);
      start.x = move.offsetX;
      start.y = move.offsetY;
      repaint();
    };
    const onUp = () => {
      canvas.removeEventListener('mousemove', onMove);
      canvas.removeEventListener('mouseup', onUp);
    };
    canvas.addEventListener('mousemove', onMove);
    canvas.addEventListener('mouseup', onUp);
    return;
  }
  if (currentTool() === 'select-area') {
    drag = { sx: ev.offsetX, sy: ev.offsetY, ex: ev.offsetX, ey: ev.offsetY };
  }
});

canvas.addEventListener('mousemove', (ev) => {
  if (drag) {
    drag.ex = ev.offsetX;
    drag.ey = ev.offsetY;
    repaint();
  }
});

canvas.addEventListener('mouseup', (ev) => {
  if (!state) return;
  if (currentTool() === 'select-area' && drag) {
    const [ax, ay] = toImage(state.transform, drag.sx, drag.sy);
    const [bx, by] = toImage(state.transform, drag.ex, drag.ey);
    drag = null;
    const pendingMutation = state.drawSelection(ax, ay, bx, by);
    if (pendingMutation) pendingMutation.catch((err) => toast(String(err)));
    repaint();
    return;
  }
  if (currentTool() === 'deselect') {
    const [px, py] = toImage(state.transform, ev.offsetX, ev.offsetY);
    const pendingMutation = state.deselectAt(px, py);
    if (pendingMutation) pendingMutation.catch((err) => toast(String(err)));
  }
});

canvas.addEventListener('wheel', (ev) => {
  if (!state) return;
  ev.preventDefault();
  state.transform = zoomAt(state.transform, ev.deltaY < 0 ? 1.15 : 1 / 1.15, ev.offsetX, ev.offsetY);
  repaint();
});

slider.addEventListener('input', () => {
  if (!state || !dendrogram) return;
  const threshold = Number(slider.value);
  sliderValue.textContent = threshold.toFixed(1);
  state.setCut(threshold).then(() => {
    if (state!.cutWarning) {
      toast('Fractured contours contributed no horizontal-gradient points here.');
    }
  }).catch((err) => toast(String(err)));
});

for (const button of toolButtons) {
  button.addEventListener('click', () => {
    if (!state) return;
    state.setTool(button.dataset.tool as Tool);
    for (const other of toolButtons) other.classList.toggle('active', other === button);
  });
}

for (const toggle of toggles) {
  toggle.addEventListener('change', () => {
    if (!state) return;
    const key = toggle.dataset.overlay as keyof AnnotationState['overlays'];
    state.overlays[key] = toggle.checked;
    repaint();
  });
}

imageList.addEventListener('change', () => {
  openImage(imageList.value).catch((err) => toast(String(err)));
});

api
  .listImages()
  .then(({ images }) => {
    for (const id of images) {
      const option = document.createElement('option');
      option.value = id;
      option.textContent = id;
      imageList.appendChild(option);
    }
    if (images.length) {
      imageList.value = images[0];
      return openImage(images[0]);
    }
    toast('No processed images found; run the process stage first.');
    return undefined;
  })
  .catch((err) => toast(String(err)));
