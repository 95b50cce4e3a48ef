import { centroid, chainPoints, type Point } from "./geometry.js";
import { isTextRegion, type RegionKind, type Segmentation } from "./model.js";

export const KIND_COLORS: Record<RegionKind, string> = {
  image: "#7aa2f7",
  paragraph: "#9ece6a",
  heading: "#ff9e64",
  "page-number": "#bb9af7",
};

const CHAIN_COLOR = "#f7768e";

export interface ViewState {
  scale: number;
  selected: string | null;
  mergeSource: string | null;
  splitY: number | null; // page row of the snapped split preview
}

export function drawPage(
  ctx: CanvasRenderingContext2D,
  seg: Segmentation,
  image: HTMLImageElement | null,
  view: ViewState,
): void {
  const { scale } = view;
  ctx.save();
  ctx.setTransform(scale, 0, 0, scale, 0, 0);

  ctx.fillStyle = "#e8e4d8";
  ctx.fillRect(0, 0, seg.width, seg.height);
  if (image) ctx.drawImage(image, 0, 0, seg.width, seg.height);

  const centroids = new Map<string, Point>();
  for (const r of seg.regions) {
    centroids.set(r.id, centroid(r.boundary));
  }

  for (const r of seg.regions) {
    const color = KIND_COLORS[r.kind];
    const active = r.id === view.selected || r.id === view.mergeSource;
    ctx.beginPath();
    for (let i = 0; i < r.boundary.length; i++) {
      const [x, y] = r.boundary[i];
      if (i === 0) ctx.moveTo(x, y);
      else ctx.lineTo(x, y);
    }
    ctx.closePath();
    ctx.globalAlpha = active ? 0.32 : 0.14;
    ctx.fillStyle = color;
    ctx.fill();
    ctx.globalAlpha = 1;
    ctx.lineWidth = (active ? 3 : 1.5) / scale;
    ctx.strokeStyle = color;
    ctx.stroke();

    // faint line boxes inside text regions
    if (r.lines) {
      ctx.lineWidth = 0.75 / scale;
      ctx.globalAlpha = 0.5;
      for (const line of r.lines) {
        const [x0, y0, x1, y1] = line.bbox;
        ctx.strokeRect(x0, y0, x1 - x0 + 1, y1 - y0 + 1);
      }
      ctx.globalAlpha = 1;
    }

    const [cx, cy] = centroids.get(r.id)!;
    ctx.font = `${12 / scale}px ui-monospace, monospace`;
    ctx.fillStyle = color;
    ctx.fillText(`${r.id} ${r.kind}`, cx - 20 / scale, cy - 10 / scale);
  }

  drawChain(ctx, chainPoints(seg.reading_order, centroids), scale);

  if (view.splitY !== null && view.selected) {
    const sel = seg.regions.find((r) => r.id === view.selected);
    if (sel) {
      const xs = sel.boundary.map((p) => p[0]);
      const x0 = Math.min(...xs);
      const x1 = Math.max(...xs);
      ctx.strokeStyle = "#ff5555";
      ctx.lineWidth = 2 / scale;
      ctx.setLineDash([6 / scale, 4 / scale]);
      ctx.beginPath();
      ctx.moveTo(x0, view.splitY);
      ctx.lineTo(x1, view.splitY);
      ctx.stroke();
      ctx.setLineDash([]);
    }
  }

  ctx.restore();
}

/** The reading order as a polygonal chain through region centroids, with a
 * numbered disc at each stop. */
function drawChain(ctx: CanvasRenderingContext2D, pts: Point[], scale: number): void {
  if (pts.length === 0) return;
  ctx.strokeStyle = CHAIN_COLOR;
  ctx.lineWidth = 2 / scale;
  ctx.beginPath();
  pts.forEach(([x, y], i) => (i === 0 ? ctx.moveTo(x, y) : ctx.lineTo(x, y)));
  ctx.stroke();

  const r = 9 / scale;
  pts.forEach(([x, y], i) => {
    ctx.beginPath();
    ctx.arc(x, y, r, 0, Math.PI * 2);
    ctx.fillStyle = CHAIN_COLOR;
    ctx.fill();
    ctx.fillStyle = "#1a1b26";
    ctx.font = `bold ${11 / scale}px ui-sans-serif`;
    ctx.textAlign = "center";
    ctx.textBaseline = "middle";
    ctx.fillText(String(i + 1), x, y);
    ctx.textAlign = "start";
    ctx.textBaseline = "alphabetic";
  });
}
