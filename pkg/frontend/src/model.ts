// Wire types mirroring the review service's response models. The UI never
// derives segmentation state on its own; everything here is shaped by what
// the server sends back.

export type RegionKind = "image" | "paragraph" | "heading" | "page-number";

export const REGION_KINDS: RegionKind[] = [
  "image",
  "paragraph",
  "heading",
  "page-number",
];

export interface PageInfo {
  id: string;
  status: "unreviewed" | "approved";
}

export interface LineBox {
  bbox: [number, number, number, number];
  index: number;
}

export interface RegionModel {
  id: string;
  kind: RegionKind;
  boundary: [number, number][];
  lines: LineBox[] | null;
}

export interface Segmentation {
  page_id: string;
  width: number;
  height: number;
  revision: number;
  regions: RegionModel[];
  reading_order: string[];
}

export interface Stats {
  pages: number;
  approved: number;
  edited: number;
  edits_by_type: Record<string, number>;
}

export type EditCommand =
  | { op: "delete_region"; region_id: string }
  | { op: "split_region"; region_id: string; y: number }
  | { op: "change_type"; region_id: string; kind: RegionKind }
  | { op: "merge_regions"; region_id: string; other_id: string }
  | { op: "set_reading_order"; order: string[] };

export function isTextRegion(r: RegionModel): boolean {
  return r.kind !== "image";
}

export function textRegionIds(seg: Segmentation): string[] {
  return seg.regions.filter(isTextRegion).map((r) => r.id);
}

/**
 * Sanity check mirroring the server invariant: the reading order must visit
 * every text region exactly once and nothing else. Returns human-readable
 * problems, empty when clean. The server already guarantees this; the UI
 * checks after every response so state drift never passes silently.
 */
export function orderProblems(seg: Segmentation): string[] {
  const problems: string[] = [];
  const text = new Set(textRegionIds(seg));
  const seen = new Set<string>();
  for (const id of seg.reading_order) {
    if (!text.has(id)) problems.push(`order entry ${id} is not a text region`);
    else if (seen.has(id)) problems.push(`order visits ${id} twice`);
    seen.add(id);
  }
  for (const id of text) {
    if (!seen.has(id)) problems.push(`text region ${id} missing from order`);
  }
  return problems;
}

export function regionById(seg: Segmentation, id: string): RegionModel | undefined {
  return seg.regions.find((r) => r.id === id);
}
