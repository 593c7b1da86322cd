import { Api } from './api.js';
import { nearestFracturedContour, normalizeRect, rectArea } from './geometry.js';
import { ContourDoc, CutResult, LabelsDoc, Rect, Tool } from './types.js';
import { identity, ViewTransform } from './transform.js';

export interface Overlays {
  contours: boolean;
  fracturedOnly: boolean;
  flesh: boolean;
  regions: boolean;
}

export const DESELECT_HIT_RADIUS = 6; // screen pixels

/**
 * Annotation state for one open image.
 *
 * The server is the single source of label truth: every mutation response
 * replaces the local labels document wholesale, and a repaint callback fires
 * after each change.  Mutations are serialized — at most one request is in
 * flight, later edits queue behind it in order.
 */
export class AnnotationState {
  tool: Tool = 'select-area';
  overlays: Overlays = { contours: true, fracturedOnly: false, flesh: true, regions: true };
  transform: ViewTransform = identity();
  labels: LabelsDoc | null = null;
  contours: ContourDoc[] = [];
  cut: CutResult | null = null;
  cutWarning = false;

  private queue: { run: () => Promise<void>; resolve: () => void; reject: (err: unknown) => void }[] = [];
  private inFlight = false;
  private repaint: () => void;

  constructor(
    private api: Api,
    public readonly imageId: string,
    public readonly imageW: number,
    public readonly imageH: number,
    repaint: () => void,
  ) {
    this.repaint = repaint;
  }

  setTool(tool: Tool): void {
    this.tool = tool; // exactly one active tool by construction
    this.repaint();
  }

  async load(): Promise<void> {
    this.contours = await this.api.contours(this.imageId);
    this.labels = await this.api.labels(this.imageId);
    this.repaint();
  }

  /** Pending mutations, exposed for tests. */
  get pending(): number {
    return this.queue.length + (this.inFlight ? 1 : 0);
  }

  private enqueue(run: () => Promise<void>): Promise<void> {
    return new Promise((resolve, reject) => {
      this.queue.push({ run, resolve, reject });
      void this.drain();
    });
  }

  private async drain(): Promise<void> {
    if (this.inFlight) return;
    const next = this.queue.shift();
    if (!next) return;
    this.inFlight = true;
    try {
      await next.run();
      this.inFlight = false;
      next.resolve();
    } catch (err) {
      this.inFlight = false;
      next.reject(err);
    }
    void this.drain();
  }

  private applyLabels(doc: LabelsDoc): void {
    this.labels = doc;
    this.repaint();
  }

  /**
   * Area selection from a drag in image coordinates.  The rectangle is
   * clamped to the image; a degenerate (zero-area) drag sends nothing.
   */
  drawSelection(ax: number, ay: number, bx: number, by: number): Promise<void> | null {
    const rect: Rect = normalizeRect(ax, ay, bx, by, this.imageW, this.imageH);
    if (rectArea(rect) === 0) return null;
    return this.enqueue(async () => {
      this.applyLabels(await this.api.addSelection(this.imageId, rect));
    });
  }

  removeSelection(index: number): Promise<void> {
    return this.enqueue(async () => {
      this.applyLabels(await this.api.removeSelection(this.imageId, index));
    });
  }

  /**
   * Deselect the nearest fractured contour within the hit radius of a click
   * (image coordinates; the radius is given in screen pixels and divided by
   * the current zoom).  Clicks near non-fractured contours are no-ops.
   */
  deselectAt(px: number, py: number): Promise<void> | null {
    if (!this.labels) return null;
    const radius = DESELECT_HIT_RADIUS / this.transform.scale;
    const target = nearestFracturedContour(px, py, this.contours, this.labels.labels, radius);
    if (target === null) return null;
    return this.enqueue(async () => {
      this.applyLabels(await this.api.deselect(this.imageId, target));
    });
  }

  /** Move the dendrogram cut; renders the returned cluster rectangles. */
  setCut(threshold: number): Promise<void> {
    return this.enqueue(async () => {
      const result = await this.api.cut(this.imageId, threshold);
      this.cut = result;
      this.cutWarning = Boolean(result.no_zero_gradient_warning);
      this.repaint();
    });
  }
}
