import { describe, expect, it } from 'vitest';

import { Api } from '../src/api.js';
import { AnnotationState } from '../src/state.js';
import { ContourDoc, CutResult, LabelsDoc, Rect } from '../src/types.js';

// Fake service: recomputes labels from rects/deselections the same way the
// real one does (endpoint strictly inside a rectangle), so the UI state can
// be checked against server truth.
class FakeApi {
  contoursDoc: ContourDoc[] = [
    { id: 0, points: [[50, 50], [51, 51], [52, 52]], refined: { i_s: 0, i_e: 2 } },
    { id: 1, points: [[200, 200], [201, 201]], refined: { i_s: 0, i_e: 1 } },
    { id: 2, points: [[10, 300], [11, 301]], refined: { i_s: 0, i_e: 1 } },
  ];
  rects: Rect[] = [];
  deselected = new Set<number>();
  version = 0;
  calls: string[] = [];
  gate: Promise<void> | null = null;
  cutResponse: CutResult = { threshold: 0, clusters: [], no_zero_gradient_warning: false };

  private recompute(): LabelsDoc {
    const labels: LabelsDoc['labels'] = {};
    for (const c of this.contoursDoc) {
      const ends = [c.points[c.refined.i_s], c.points[c.refined.i_e]];
      const inside = this.rects.some((r) =>
        ends.some(([x, y]) => r.x0 < x && x < r.x1 && r.y0 < y && y < r.y1),
      );
      labels[String(c.id)] = inside && !this.deselected.has(c.id) ? 'fractured' : 'non-fractured';
    }
    return {
      image_id: 'img',
      version: this.version,
      rects: this.rects.map((r) => [r.x0, r.y0, r.x1, r.y1]),
      deselected: [...this.deselected],
      flesh: [],
      labels,
      cut_threshold: null,
    };
  }

  private async waitGate() {
    if (this.gate) await this.gate;
  }

  api: Api = {
    listImages: async () => ({ images: ['img'] }),
    imageUrl: (id: string) => `/images/${id}`,
    contours: async () => this.contoursDoc,
    regions: async () => ({ t_knee: 60, t_foot: 420, h: 512, clusters: [] }),
    labels: async () => this.recompute(),
    dendrogram: async () => ({ leaves: [], merges: [] }),
    addSelection: async (_id, rect) => {
      await this.waitGate();
      this.calls.push(`add:${rect.x0},${rect.y0},${rect.x1},${rect.y1}`);
      this.rects.push(rect);
      this.version++;
      return this.recompute();
    },
    removeSelection: async (_id, index) => {
      await this.waitGate();
      this.calls.push(`remove:${index}`);
      this.rects.splice(index, 1);
      this.version++;
      return this.recompute();
    },
    deselect: async (_id, contourId, reselect = false) => {
      await this.waitGate();
      this.calls.push(`${reselect ? 'reselect' : 'deselect'}:${contourId}`);
      if (reselect) this.deselected.delete(contourId);
      else this.deselected.add(contourId);
      this.version++;
      return this.recompute();
    },
    cut: async (_id, threshold) => {
      await this.waitGate();
      this.calls.push(`cut:${threshold}`);
      return { ...this.cutResponse, threshold };
    },
  };
}

function makeState(fake: FakeApi, repaints: { count: number } = { count: 0 }) {
  return new AnnotationState(fake.api, 'img', 320, 512, () => {
    repaints.count++;
  });
}

describe('AnnotationState', () => {
  it('loads contours and labels from the server', async () => {
    const fake = new FakeApi();
    const state = makeState(fake);
    await state.load();
    expect(state.contours).toHaveLength(3);
    expect(state.labels?.labels['0']).toBe('non-fractured');
  });

  it('has exactly one active tool at a time', () => {
    const state = makeState(new FakeApi());
    expect(state.tool).toBe('select-area');
    state.setTool('deselect');
    expect(state.tool).toBe('deselect');
    state.setTool('cut-slider');
    expect(state.tool).toBe('cut-slider');
  });

  it('zero-area drags send no request', async () => {
    const fake = new FakeApi();
    const state = makeState(fake);
    await state.load();
    expect(state.drawSelection(10, 10, 10, 80)).toBeNull();
    expect(fake.calls).toHaveLength(0);
  });

  it('drags outside the image are clamped before posting', async () => {
    const fake = new FakeApi();
    const state = makeState(fake);
    await state.load();
    await state.drawSelection(-50, -20, 400, 600);
    expect(fake.calls).toEqual(['add:0,0,320,512']);
  });

  it('selection repaints with the server-returned labels', async () => {
    const fake = new FakeApi();
    const repaints = { count: 0 };
    const state = makeState(fake, repaints);
    await state.load();
    const before = repaints.count;
    await state.drawSelection(40, 40, 60, 60);
    expect(repaints.count).toBeGreaterThan(before);
    expect(state.labels?.labels['0']).toBe('fractured');
    expect(state.labels?.labels['1']).toBe('non-fractured');
    expect(state.labels?.version).toBe(fake.version);
  });

  it('deselect is scoped to fractured contours', async () => {
    const fake = new FakeApi();
    const state = makeState(fake);
    await state.load();
    await state.drawSelection(40, 40, 60, 60); // contour 0 fractured
    // click right on contour 1 (non-fractured): no-op
    expect(state.deselectAt(200, 200)).toBeNull();
    // click near contour 0: deselects exactly it
    await state.deselectAt(51, 52);
    expect(fake.calls.filter((c) => c.startsWith('deselect'))).toEqual(['deselect:0']);
    expect(state.labels?.labels['0']).toBe('non-fractured');
  });

  it('deselect reduces the fractured count by exactly one', async () => {
    const fake = new FakeApi();
    const state = makeState(fake);
    await state.load();
    await state.drawSelection(0, 0, 320, 512); // everything fractured
    const count = (doc: Record<string, string>) => Object.values(doc).filter((v) => v === 'fractured').length;
    const before = count(state.labels!.labels);
    await state.deselectAt(200, 201);
    expect(count(state.labels!.labels)).toBe(before - 1);
  });

  it('hit radius scales with zoom', async () => {
    const fake = new FakeApi();
    const state = makeState(fake);
    await state.load();
    await state.drawSelection(40, 40, 60, 60);
    state.transform = { scale: 0.5, offsetX: 0, offsetY: 0 }; // 6 screen px = 12 image px
    const pending = state.deselectAt(52 + 10, 52);
    expect(pending).not.toBeNull();
    await pending;
  });

  it('serializes mutations: one in flight, order preserved', async () => {
    const fake = new FakeApi();
    const state = makeState(fake);
    await state.load();
    let release!: () => void;
    fake.gate = new Promise((resolve) => {
      release = resolve;
    });
    const first = state.drawSelection(1, 1, 30, 30)!;
    const second = state.drawSelection(2, 2, 40, 40)!;
    const third = state.setCut(5);
    expect(fake.calls).toHaveLength(0); // gated: nothing finished yet
    expect(state.pending).toBe(3);
    release();
    fake.gate = null;
    await Promise.all([first, second, third]);
    expect(fake.calls).toEqual(['add:1,1,30,30', 'add:2,2,40,40', 'cut:5']);
    expect(state.pending).toBe(0);
  });

  it('cut results and the zero-gradient warning come from the server', async () => {
    const fake = new FakeApi();
    fake.cutResponse = {
      threshold: 0,
      clusters: [{ leaves: [0], rect: [1, 2, 3, 4] }],
      no_zero_gradient_warning: true,
    };
    const state = makeState(fake);
    await state.load();
    await state.setCut(2.5);
    expect(state.cut?.clusters).toHaveLength(1);
    expect(state.cut?.threshold).toBe(2.5);
    expect(state.cutWarning).toBe(true);
  });

  it('state is reconstructible from the server alone', async () => {
    const fake = new FakeApi();
    const state = makeState(fake);
    await state.load();
    await state.drawSelection(40, 40, 60, 60);
    await state.deselectAt(51, 52);
    // a "refresh": brand-new state object, same server
    const fresh = makeState(fake);
    await fresh.load();
    expect(fresh.labels?.labels).toEqual(state.labels?.labels);
    expect(fresh.labels?.version).toBe(state.labels?.version);
  });
});
