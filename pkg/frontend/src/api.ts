import { ContourDoc, CutResult, DendrogramDoc, LabelsDoc, Rect, RegionsDoc } from './types.js';

export class ApiError extends Error {
  constructor(public status: number, detail: string) {
    super(detail);
  }
}

async function request<T>(path: string, init?: RequestInit): Promise<T> {
  const resp = await fetch(path, {
    headers: { 'Content-Type': 'application/json' },
    ...init,
  });
  if (!resp.ok) {
    let detail = resp.statusText;
    try {
      detail = (await resp.json()).detail ?? detail;
    } catch {
      // non-JSON error body
    }
    throw new ApiError(resp.status, detail);
  }
  return resp.json() as Promise<T>;
}

export const api = {
  listImages: () => request<{ images: string[] }>('/images'),
  imageUrl: (id: string) => `/images/${id}`,
  contours: (id: string) => request<ContourDoc[]>(`/images/${id}/contours`),
  regions: (id: string) => request<RegionsDoc>(`/images/${id}/regions`),
  labels: (id: string) => request<LabelsDoc>(`/images/${id}/labels`),
  dendrogram: (id: string) => request<DendrogramDoc>(`/images/${id}/dendrogram`),
  addSelection: (id: string, rect: Rect) =>
    request<LabelsDoc>(`/images/${id}/selections`, { method: 'POST', body: JSON.stringify(rect) }),
  removeSelection: (id: string, index: number) =>
    request<LabelsDoc>(`/images/${id}/selections/${index}`, { method: 'DELETE' }),
  deselect: (id: string, contourId: number, reselect = false) =>
    request<LabelsDoc>(`/images/${id}/deselect`, {
      method: 'POST',
      body: JSON.stringify({ contour_id: contourId, reselect }),
    }),
  cut: (id: string, threshold: number) =>
    request<CutResult>(`/images/${id}/cut`, { method: 'POST', body: JSON.stringify({ threshold }) }),
};

export type Api = typeof api;
