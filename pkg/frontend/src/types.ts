// Shapes of the JSON documents the annotation service serves.

export interface ContourDoc {
  id: number;
  points: [number, number][];
  refined: { i_s: number; i_e: number };
}

export interface RegionsDoc {
  t_knee: number | null;
  t_foot: number | null;
  h: number;
  clusters: { y_start: number; y_end: number; size: number }[];
}

export type Label = 'fractured' | 'non-fractured' | 'flesh-auto';

export interface LabelsDoc {
  image_id: string;
  version: number;
  rects: [number, number, number, number][];
  deselected: number[];
  flesh: number[];
  labels: Record<string, Label>;
  cut_threshold: number | null;
}

export interface DendrogramDoc {
  leaves: [number, number][];
  merges: { a: number; b: number; dist: number }[];
}

export interface CutCluster {
  leaves: number[];
  rect: [number, number, number, number];
}

export interface CutResult {
  threshold: number;
  clusters: CutCluster[];
  no_zero_gradient_warning?: boolean;
}

export interface Rect {
  x0: number;
  y0: number;
  x1: number;
  y1: number;
}

export type Tool = 'select-area' | 'deselect' | 'cut-slider';
