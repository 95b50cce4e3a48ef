import { ApiError, ReviewApi } from "./api.js";
import { fitScale, moveItem, pointInPolygon, snapSplit, splitStops } from "./geometry.js";
import {
  orderProblems,
  regionById,
  REGION_KINDS,
  type EditCommand,
  type PageInfo,
  type RegionKind,
  type Segmentation,
} from "./model.js";
import { drawPage, KIND_COLORS, type ViewState } from "./render.js";

const MAX_VIEW_W = 920;
const MAX_VIEW_H = 760;

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id} in index.html`);
  return node as T;
}

function loadImage(url: string): Promise<HTMLImageElement | null> {
  return new Promise((resolve) => {
    const img = new Image();
    img.onload = () => resolve(img);
    img.onerror = () => resolve(null); // pages without a raster render on a flat background
    img.src = url;
  });
}

export class ReviewApp {
  private pages: PageInfo[] = [];
  private pageIndex = 0;
  private seg: Segmentation | null = null;
  private image: HTMLImageElement | null = null;

  private selected: string | null = null;
  private mergeSource: string | null = null;
  private splitArmed = false;
  private splitY: number | null = null;
  private scale = 1;
  private dragFrom = -1;

  private canvas = el<HTMLCanvasElement>("page-canvas");
  private pageSelect = el<HTMLSelectElement>("page-select");
  private statusSpan = el<HTMLSpanElement>("page-status");
  private errorBar = el<HTMLDivElement>("error-bar");
  private regionBody = el<HTMLDivElement>("region-body");
  private orderList = el<HTMLOListElement>("order-list");
  private statsBar = el<HTMLElement>("stats-bar");

  constructor(private api: ReviewApi) {}

  async start(): Promise<void> {
    el<HTMLButtonElement>("prev-btn").onclick = () => this.gotoPage(this.pageIndex - 1);
    el<HTMLButtonElement>("next-btn").onclick = () => this.gotoPage(this.pageIndex + 1);
    el<HTMLButtonElement>("approve-btn").onclick = () => this.approve();
    this.pageSelect.onchange = () => this.gotoPage(this.pageSelect.selectedIndex);
    this.canvas.onclick = (ev) => this.onCanvasClick(ev);
    this.canvas.onmousemove = (ev) => this.onCanvasMove(ev);
    window.onresize = () => this.renderCanvas();

    this.pages = await this.api.listPages();
    this.fillPageSelect();
    if (this.pages.length > 0) await this.gotoPage(0);
    else this.statusSpan.textContent = "no pages in store";
    await this.refreshStats();
  }

  private fillPageSelect(): void {
    this.pageSelect.innerHTML = "";
    for (const p of this.pages) {
      const opt = document.createElement("option");
      opt.value = p.id;
      opt.textContent = p.status === "approved" ? `${p.id} ✓` : p.id;
      this.pageSelect.appendChild(opt);
    }
    this.pageSelect.selectedIndex = this.pageIndex;
  }

  private page(): PageInfo {
    return this.pages[this.pageIndex];
  }

  private async gotoPage(index: number): Promise<void> {
    if (index < 0 || index >= this.pages.length) return;
    this.pageIndex = index;
    this.pageSelect.selectedIndex = index;
    this.selected = null;
    this.mergeSource = null;
    this.splitArmed = false;
    this.splitY = null;
    this.clearError();
    const id = this.page().id;
    this.seg = await this.api.segmentation(id);
    this.image = await loadImage(this.api.imageUrl(id));
    this.renderAll();
  }

  /** Re-fetch the current page from the server, dropping any local state.
   * Used after a 409 so the user continues from the latest revision. */
  private async reloadSegmentation(): Promise<void> {
    if (!this.seg) return;
    this.seg = await this.api.segmentation(this.seg.page_id);
    if (this.selected && !regionById(this.seg, this.selected)) this.selected = null;
    this.mergeSource = null;
    this.splitArmed = false;
    this.splitY = null;
    this.renderAll();
  }

  private async sendEdits(commands: EditCommand[]): Promise<void> {
    if (!this.seg) return;
    try {
      this.seg = await this.api.applyEdits(this.seg.page_id, this.seg.revision, commands);
      this.clearError();
      const problems = orderProblems(this.seg);
      if (problems.length > 0) {
        this.showError(`server response failed the order check: ${problems.join("; ")}`);
      }
      if (this.selected && !regionById(this.seg, this.selected)) this.selected = null;
      if (this.page().status === "approved") {
        // any accepted edit invalidates the approval snapshot server-side
        this.page().status = "unreviewed";
        this.fillPageSelect();
      }
    } catch (err) {
      if (err instanceof ApiError) {
        const lines = [`HTTP ${err.status}: ${err.message}`, ...err.violations];
        if (err.status === 409) {
          lines.push("reloaded the latest revision, please retry");
          this.showError(lines.join("\n"));
          await this.reloadSegmentation();
          await this.refreshStats();
          return;
        }
        this.showError(lines.join("\n"));
      } else {
        this.showError(String(err));
      }
    }
    this.mergeSource = null;
    this.splitArmed = false;
    this.splitY = null;
    this.renderAll();
    await this.refreshStats();
  }

  private async approve(): Promise<void> {
    if (!this.seg) return;
    try {
      const info = await this.api.approve(this.seg.page_id, this.seg.revision);
      this.pages[this.pageIndex] = info;
      this.clearError();
      this.fillPageSelect();
      this.renderStatus();
      await this.refreshStats();
    } catch (err) {
      if (err instanceof ApiError) {
        this.showError(`HTTP ${err.status}: ${err.message}`);
        if (err.status === 409) await this.reloadSegmentation();
      } else {
        this.showError(String(err));
      }
    }
  }

  private async refreshStats(): Promise<void> {
    try {
      const s = await this.api.stats();
      const ops = Object.entries(s.edits_by_type)
        .map(([op, n]) => `${op} ${n}`)
        .join(", ");
      this.statsBar.textContent =
        `${s.pages} pages, ${s.approved} approved, ${s.edited} edited` + (ops ? ` (${ops})` : "");
    } catch {
      this.statsBar.textContent = "";
    }
  }

  // ---- canvas ----

  private toPageCoords(ev: MouseEvent): [number, number] {
    const rect = this.canvas.getBoundingClientRect();
    return [(ev.clientX - rect.left) / this.scale, (ev.clientY - rect.top) / this.scale];
  }

  private hitRegion(x: number, y: number): string | null {
    if (!this.seg) return null;
    for (let i = this.seg.regions.length - 1; i >= 0; i--) {
      const r = this.seg.regions[i];
      if (pointInPolygon([x, y], r.boundary)) return r.id;
    }
    return null;
  }

  private onCanvasClick(ev: MouseEvent): void {
    if (!this.seg) return;
    const [x, y] = this.toPageCoords(ev);

    if (this.splitArmed && this.selected && this.splitY !== null) {
      void this.sendEdits([{ op: "split_region", region_id: this.selected, y: this.splitY }]);
      return;
    }
    if (this.mergeSource) {
      const target = this.hitRegion(x, y);
      if (target && target !== this.mergeSource) {
        void this.sendEdits([{ op: "merge_regions", region_id: this.mergeSource, other_id: target }]);
      } else {
        this.mergeSource = null;
        this.renderAll();
      }
      return;
    }
    this.selected = this.hitRegion(x, y);
    this.splitArmed = false;
    this.splitY = null;
    this.renderAll();
  }

  private onCanvasMove(ev: MouseEvent): void {
    if (!this.seg || !this.splitArmed || !this.selected) return;
    const region = regionById(this.seg, this.selected);
    if (!region || !region.lines) return;
    const [, y] = this.toPageCoords(ev);
    const snapped = snapSplit(y, region.lines);
    if (snapped !== this.splitY) {
      this.splitY = snapped;
      this.renderCanvas();
    }
  }

  private renderCanvas(): void {
    if (!this.seg) return;
    const wrap = this.canvas.parentElement;
    const maxW = Math.min(MAX_VIEW_W, wrap ? wrap.clientWidth - 16 : MAX_VIEW_W);
    this.scale = fitScale(this.seg.width, this.seg.height, maxW, MAX_VIEW_H);
    this.canvas.width = Math.round(this.seg.width * this.scale);
    this.canvas.height = Math.round(this.seg.height * this.scale);
    this.canvas.style.cursor = this.splitArmed || this.mergeSource ? "crosshair" : "default";
    const ctx = this.canvas.getContext("2d");
    if (!ctx) return;
    const view: ViewState = {
      scale: this.scale,
      selected: this.selected,
      mergeSource: this.mergeSource,
      splitY: this.splitY,
    };
    drawPage(ctx, this.seg, this.image, view);
  }

  // ---- sidebar ----

  private renderStatus(): void {
    const p = this.page();
    this.statusSpan.textContent = p ? p.status : "";
    this.statusSpan.className = p && p.status === "approved" ? "approved" : "";
  }

  private renderRegionPanel(): void {
    this.regionBody.innerHTML = "";
    const seg = this.seg;
    const region = seg && this.selected ? regionById(seg, this.selected) : undefined;
    if (!seg || !region) {
      this.regionBody.textContent = this.mergeSource
        ? "merge armed: click the region to absorb"
        : "click a region on the page";
      return;
    }

    const title = document.createElement("div");
    title.className = "region-title";
    title.textContent = `${region.id}`;
    title.style.color = KIND_COLORS[region.kind];
    this.regionBody.appendChild(title);

    const kindSelect = document.createElement("select");
    for (const kind of REGION_KINDS) {
      const opt = document.createElement("option");
      opt.value = kind;
      opt.textContent = kind;
      opt.selected = kind === region.kind;
      kindSelect.appendChild(opt);
    }
    kindSelect.onchange = () => {
      void this.sendEdits([
        { op: "change_type", region_id: region.id, kind: kindSelect.value as RegionKind },
      ]);
    };
    const kindRow = document.createElement("div");
    kindRow.append("type: ", kindSelect);
    this.regionBody.appendChild(kindRow);

    const buttons = document.createElement("div");
    buttons.className = "button-row";

    const del = document.createElement("button");
    del.textContent = "delete";
    del.onclick = () => void this.sendEdits([{ op: "delete_region", region_id: region.id }]);
    buttons.appendChild(del);

    const split = document.createElement("button");
    split.textContent = this.splitArmed ? "cancel split" : "split at row";
    const stops = region.lines ? splitStops(region.lines) : [];
    split.disabled = stops.length === 0;
    split.title = stops.length === 0
      ? "needs at least two detected lines"
      : "move over the region, the cut snaps to line gaps";
    split.onclick = () => {
      this.splitArmed = !this.splitArmed;
      this.splitY = null;
      this.renderAll();
    };
    buttons.appendChild(split);

    const merge = document.createElement("button");
    merge.textContent = this.mergeSource ? "cancel merge" : "merge with";
    merge.title = "then click the neighbour of the same type";
    merge.onclick = () => {
      this.mergeSource = this.mergeSource ? null : region.id;
      this.splitArmed = false;
      this.renderAll();
    };
    buttons.appendChild(merge);

    this.regionBody.appendChild(buttons);

    if (region.lines) {
      const note = document.createElement("div");
      note.className = "muted";
      note.textContent = `${region.lines.length} detected lines`;
      this.regionBody.appendChild(note);
    }
  }

  private renderOrderList(): void {
    this.orderList.innerHTML = "";
    const seg = this.seg;
    if (!seg) return;
    seg.reading_order.forEach((id, index) => {
      const region = regionById(seg, id);
      const li = document.createElement("li");
      li.textContent = region ? `${id} (${region.kind})` : id;
      li.draggable = true;
      li.className = id === this.selected ? "selected" : "";
      li.ondragstart = () => {
        this.dragFrom = index;
      };
      li.ondragover = (ev) => ev.preventDefault();
      li.ondrop = (ev) => {
        ev.preventDefault();
        if (this.dragFrom < 0 || this.dragFrom === index) return;
        const order = moveItem([...seg.reading_order], this.dragFrom, index);
        this.dragFrom = -1;
        void this.sendEdits([{ op: "set_reading_order", order }]);
      };
      li.onclick = () => {
        this.selected = id;
        this.renderAll();
      };
      this.orderList.appendChild(li);
    });
  }

  private showError(text: string): void {
    this.errorBar.textContent = text;
    this.errorBar.hidden = false;
  }

  private clearError(): void {
    this.errorBar.textContent = "";
    this.errorBar.hidden = true;
  }

  private renderAll(): void {
    this.renderStatus();
    this.renderCanvas();
    this.renderRegionPanel();
    this.renderOrderList();
  }
}
