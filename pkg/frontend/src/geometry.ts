// Pure geometry helpers for the canvas overlay. No DOM, no fetch; this is
// the part of the UI that has unit tests.

import type { LineBox } from "./model.js";

export type Point = [number, number];

export function polygonBBox(points: Point[]): [number, number, number, number] {
  let x0 = Infinity, y0 = Infinity, x1 = -Infinity, y1 = -Infinity;
  for (const [x, y] of points) {
    if (x < x0) x0 = x;
    if (y < y0) y0 = y;
    if (x > x1) x1 = x;
    if (y > y1) y1 = y;
  }
  return [x0, y0, x1, y1];
}

/** Area centroid via the shoelace formula; falls back to the vertex mean for
 * degenerate (zero-area) boundaries. */
export function centroid(points: Point[]): Point {
  let area = 0, cx = 0, cy = 0;
  const n = points.length;
  for (let i = 0; i < n; i++) {
    const [x0, y0] = points[i];
    const [x1, y1] = points[(i + 1) % n];
    const cross = x0 * y1 - x1 * y0;
    area += cross;
    cx += (x0 + x1) * cross;
    cy += (y0 + y1) * cross;
  }
  if (Math.abs(area) < 1e-9) {
    let sx = 0, sy = 0;
    for (const [x, y] of points) { sx += x; sy += y; }
    return [sx / n, sy / n];
  }
  return [cx / (3 * area), cy / (3 * area)];
}

/** Even-odd ray cast. Points on an edge may land either way; the overlay
 * only uses this for click hit-testing where that is fine. */
export function pointInPolygon(p: Point, poly: Point[]): boolean {
  const [px, py] = p;
  let inside = false;
  for (let i = 0, j = poly.length - 1; i < poly.length; j = i++) {
    const [xi, yi] = poly[i];
    const [xj, yj] = poly[j];
    const crosses = yi > py !== yj > py
      && px < ((xj - xi) * (py - yi)) / (yj - yi) + xi;
    if (crosses) inside = !inside;
  }
  return inside;
}

/** Centroids of the ordered regions, in order; ids without a centroid are
 * skipped (should not happen with a clean server response). */
export function chainPoints(order: string[], centroids: Map<string, Point>): Point[] {
  const out: Point[] = [];
  for (const id of order) {
    const c = centroids.get(id);
    if (c) out.push(c);
  }
  return out;
}

/**
 * Legal split rows for a region, derived from the server-detected lines:
 * one stop per gap between consecutive line boxes, at the gap midpoint.
 * The server rejects any cut that crosses a line, so these are the only
 * rows the UI ever offers.
 */
export function splitStops(lines: LineBox[]): number[] {
  const sorted = [...lines].sort((a, b) => a.bbox[1] - b.bbox[1]);
  const stops: number[] = [];
  for (let i = 1; i < sorted.length; i++) {
    const prevBottom = sorted[i - 1].bbox[3];
    const nextTop = sorted[i].bbox[1];
    if (nextTop > prevBottom + 1) {
      stops.push(Math.round((prevBottom + 1 + nextTop) / 2));
    }
  }
  return stops;
}

/** Snap a pointer row to the nearest legal split stop, or null when the
 * region has no gap to cut at. */
export function snapSplit(y: number, lines: LineBox[]): number | null {
  const stops = splitStops(lines);
  if (stops.length === 0) return null;
  let best = stops[0];
  for (const s of stops) {
    if (Math.abs(s - y) < Math.abs(best - y)) best = s;
  }
  return best;
}

/** Reorder for drag and drop: item at `from` ends up at index `to`. */
export function moveItem<T>(items: T[], from: number, to: number): T[] {
  const out = [...items];
  const [it] = out.splice(from, 1);
  out.splice(to, 0, it);
  return out;
}

export function fitScale(w: number, h: number, maxW: number, maxH: number): number {
  if (w <= 0 || h <= 0) return 1;
  return Math.min(maxW / w, maxH / h, 1);
}
