"""Two-phase page segmentation.

Coarse phase: raw connected components yield image candidates, the rest of
the ink is dilated into blocks that are typed by zone and size rules. Fine
phase: per-region line detection, oversized-initial extraction, heading
detection by line height and glyph area, block cutting at line borders,
and finally reading-order assignment by recursive XY cuts.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace

import numpy as np
from PIL import Image, ImageDraw
from shapely.geometry import Polygon as ShapelyPolygon
from shapely.geometry import box as shapely_box

from .imaging import (
    BinaryImage,
    StructuringElement,
    as_binary,
    connected_components,
    dilate,
)
from .page_model import (
    HeadingRuleConfig,
    LayoutConfig,
    PageSegmentation,
    Polygon,
    Region,
    RegionType,
    TextLine,
)

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SegmentationParams:
    """Tunables for both segmentation phases; defaults fit the synthetic
    test book and stay fixed across a whole run."""

    text_merge_se: int = 7            # block-forming dilation size
    image_min_area_frac: float = 0.03  # ink fraction of the page for image candidates
    image_density_max: float = 0.9     # below this density a large component is text
    min_region_area_px: int = 64       # ink pixels; smaller blocks are dropped
    line_valley_frac: float = 0.05     # projection valley threshold vs profile max
    heading: HeadingRuleConfig = field(default_factory=HeadingRuleConfig)
    initial_span_lines: float = 2.0    # initial height threshold in line heights

    def __post_init__(self):
        for name in ("image_min_area_frac", "image_density_max", "line_valley_frac"):
            v = getattr(self, name)
            if not 0.0 < v < 1.0:
                raise ValueError(f"{name} must be in (0, 1), got {v}")
        if self.text_merge_se < 1 or self.min_region_area_px < 1 or self.initial_span_lines <= 0:
            raise ValueError("sizes must be positive")


def polygon_mask(poly: Polygon, width: int, height: int) -> np.ndarray:
    """Rasterize a polygon to a page-sized bool mask, boundary included."""
    img = Image.new("1", (width, height), 0)
    ImageDraw.Draw(img).polygon([tuple(p) for p in poly.points], fill=1, outline=1)
    return np.asarray(img, dtype=bool)


def region_ink(mask: BinaryImage, region: Region) -> np.ndarray:
    """Ink restricted to the region's polygon, as a page-sized mask."""
    return as_binary(mask) & polygon_mask(region.boundary, mask.shape[1], mask.shape[0])


def renumber(seg: PageSegmentation) -> PageSegmentation:
    """Reassign ids r0001... in region-list order; reading order is remapped."""
    mapping = {r.id: f"r{i + 1:04d}" for i, r in enumerate(seg.regions)}
    regions = tuple(replace(r, id=mapping[r.id]) for r in seg.regions)
    order = tuple(mapping[rid] for rid in seg.reading_order if rid in mapping)
    return seg.with_regions(regions, order)


def coarse_segment(
    mask: BinaryImage,
    layout: LayoutConfig,
    params: SegmentationParams,
    page_id: str = "page",
) -> PageSegmentation:
    """Block-level segmentation with type classification; no lines yet."""
    mask = as_binary(mask)
    h, w = mask.shape
    page_area = float(w * h)

    regions: list[Region] = []
    stats, labels = connected_components(mask, connectivity=8)

    image_labels = set()
    for st in stats:
        x0, y0, x1, y1 = st.bbox
        density = st.area / float((x1 - x0 + 1) * (y1 - y0 + 1))
        if st.area >= params.image_min_area_frac * page_area and density >= params.image_density_max:
            image_labels.add(st.label)
            regions.append(
                Region(id="", kind=RegionType.IMAGE, boundary=Polygon.from_bbox(*st.bbox), lines=None)
            )

    text_ink = mask & ~np.isin(labels, sorted(image_labels))
    blocks = dilate(text_ink, StructuringElement(params.text_merge_se))
    block_stats, block_labels = connected_components(blocks, connectivity=8)

    ys, xs = np.nonzero(text_ink)
    owners = block_labels[ys, xs]
    n = len(block_stats) + 1
    ink_count = np.bincount(owners, minlength=n)
    ink_sum_x = np.bincount(owners, weights=xs, minlength=n)
    ink_sum_y = np.bincount(owners, weights=ys, minlength=n)

    for st in block_stats:
        ink = int(ink_count[st.label])
        if ink < params.min_region_area_px:
            continue
        cx = ink_sum_x[st.label] / ink
        cy = ink_sum_y[st.label] / ink
        x0, y0, x1, y1 = st.bbox
        area_frac = (x1 - x0 + 1) * (y1 - y0 + 1) / page_area
        kind = _classify_block(layout, cx / w, cy / h, area_frac)
        regions.append(Region(id="", kind=kind, boundary=Polygon.from_bbox(*st.bbox)))

    seg = PageSegmentation(page_id=page_id, width=w, height=h)
    seg = seg.with_regions(
        [replace(r, id=f"r{i + 1:04d}") for i, r in enumerate(regions)]
    )
    return assign_reading_order(seg)


def _classify_block(layout: LayoutConfig, fx: float, fy: float, area_frac: float) -> RegionType:
    # most-constrained type wins; paragraph is the fallback
    for kind in (RegionType.PAGE_NUMBER, RegionType.HEADING, RegionType.PARAGRAPH):
        rule = layout.rule(kind)
        if rule.zone_contains(fx, fy) and rule.area_ok(area_frac):
            return kind
    return RegionType.PARAGRAPH


def detect_lines(mask: BinaryImage, region: Region, params: SegmentationParams) -> list[TextLine]:
    """Find text lines from the smoothed horizontal projection profile.

    Maximal runs above ``line_valley_frac`` of the profile maximum become
    lines; each run is trimmed back to rows that actually carry ink.
    """
    if not region.kind.is_text:
        raise ValueError(f"detect_lines needs a text region, got {region.kind.value}")
    mask = as_binary(mask)
    x0, y0, x1, y1 = region.bbox()
    ink = region_ink(mask, region)[y0 : y1 + 1, x0 : x1 + 1]
    if not ink.any():
        return []

    profile = ink.sum(axis=1, dtype=np.int64)
    smoothed = np.convolve(profile.astype(np.float64), np.ones(3) / 3.0, mode="same")
    threshold = params.line_valley_frac * smoothed.max()
    above = smoothed > threshold

    spans: list[tuple[int, int]] = []
    run_start = None
    for row, flag in enumerate(np.append(above, False)):
        if flag and run_start is None:
            run_start = row
        elif not flag and run_start is not None:
            spans.append((run_start, row - 1))
            run_start = None

    # snap each run to the contiguous block of inked rows it covers: the
    # 3-row smoothing both overhangs strong lines by a row and shaves the
    # first/last row of faint ones, so trim to ink, then grow through ink
    refined: list[list[int]] = []
    for r0, r1 in spans:
        rows = np.nonzero(profile[r0 : r1 + 1])[0]
        if rows.size == 0:
            continue
        top, bottom = r0 + int(rows[0]), r0 + int(rows[-1])
        while top > 0 and profile[top - 1] > 0:
            top -= 1
        while bottom + 1 < profile.size and profile[bottom + 1] > 0:
            bottom += 1
        if refined and top <= refined[-1][1]:
            refined[-1][1] = max(refined[-1][1], bottom)
        else:
            refined.append([top, bottom])

    lines: list[TextLine] = []
    for top, bottom in refined:
        cols = np.nonzero(ink[top : bottom + 1].any(axis=0))[0]
        bbox = (x0 + int(cols[0]), y0 + top, x0 + int(cols[-1]), y0 + bottom)
        lines.append(TextLine(bbox=bbox, index=len(lines)))
    return lines


def with_detected_lines(mask: BinaryImage, seg: PageSegmentation, params: SegmentationParams) -> PageSegmentation:
    """Run line detection over every text region of the page."""
    regions = [
        replace(r, lines=tuple(detect_lines(mask, r, params))) if r.kind.is_text else r
        for r in seg.regions
    ]
    return seg.with_regions(regions)


def _components_by_region(mask: BinaryImage, seg: PageSegmentation):
    """Assign raw page components to the text region containing their centroid."""
    stats, _ = connected_components(mask, connectivity=8)
    text_regions = [r for r in seg.regions if r.kind.is_text]
    masks = {r.id: polygon_mask(r.boundary, seg.width, seg.height) for r in text_regions}
    assigned: dict[str, list] = {r.id: [] for r in text_regions}
    for st in stats:
        cx, cy = st.centroid
        px, py = int(round(cx)), int(round(cy))
        for r in text_regions:
            x0, y0, x1, y1 = r.bbox()
            if x0 <= px <= x1 and y0 <= py <= y1 and masks[r.id][py, px]:
                assigned[r.id].append(st)
                break
    return assigned


def detect_headings(
    mask: BinaryImage, seg: PageSegmentation, params: SegmentationParams
) -> list[tuple[str, int]]:
    """Flag paragraph lines that read as headings.

    A line qualifies when it is taller than the page's mean paragraph line
    and the mean area of its glyph components clears the configured ratio
    against the mean glyph area of all text regions. Height alone is not
    enough: two body lines merged into one tall line keep average-sized
    glyphs and stay unflagged.
    """
    cfg = params.heading
    paragraph_lines = [
        (r, line)
        for r in seg.regions
        if r.kind is RegionType.PARAGRAPH
        for line in (r.lines or ())
    ]
    if not paragraph_lines:
        log.info("page %s: no paragraph lines, heading rule cannot fire", seg.page_id)
        return []
    mean_height = float(np.mean([line.bbox[3] - line.bbox[1] + 1 for _, line in paragraph_lines]))

    assigned = _components_by_region(mask, seg)
    all_areas = [st.area for comps in assigned.values() for st in comps]
    if not all_areas:
        return []
    mean_area = float(np.mean(all_areas))

    flagged: list[tuple[str, int]] = []
    for region, line in paragraph_lines:
        height = line.bbox[3] - line.bbox[1] + 1
        if cfg.require_height_above_mean and not height > mean_height:
            continue
        x0, y0, x1, y1 = line.bbox
        areas = [
            st.area
            for st in assigned[region.id]
            if x0 <= st.centroid[0] <= x1 and y0 <= st.centroid[1] <= y1
        ]
        if areas and float(np.mean(areas)) >= cfg.area_ratio_threshold * mean_area:
            flagged.append((region.id, line.index))
    return flagged


def apply_headings(seg: PageSegmentation, flagged: list[tuple[str, int]]) -> PageSegmentation:
    """Cut flagged lines out of their blocks along the line borders.

    Consecutive flagged lines merge into a single heading; the remaining
    line ranges stay paragraphs. Region ids are reassigned and the reading
    order re-derived afterwards.
    """
    flagged_set = set(flagged)
    regions: list[Region] = []
    for region in seg.regions:
        line_flags = [(region.id, line.index) in flagged_set for line in (region.lines or ())]
        if not any(line_flags):
            regions.append(region)
            continue
        regions.extend(_split_region_at_headings(region, line_flags))

    out = seg.with_regions(regions, ())
    out = renumber(out)
    return assign_reading_order(out)


def _split_region_at_headings(region: Region, line_flags: list[bool]) -> list[Region]:
    lines = list(region.lines or ())
    x0, y0, x1, y1 = region.bbox()

    # horizontal cut rows: midpoints of the gaps between consecutive lines
    cuts = [y0]
    for prev, cur in zip(lines, lines[1:]):
        cuts.append((prev.bbox[3] + 1 + cur.bbox[1]) // 2)
    cuts.append(y1 + 1)

    # group consecutive lines by flag value
    runs: list[tuple[bool, int, int]] = []
    for i, flag in enumerate(line_flags):
        if runs and runs[-1][0] == flag:
            runs[-1] = (flag, runs[-1][1], i)
        else:
            runs.append((flag, i, i))

    out = []
    for flag, first, last in runs:
        top, bottom = cuts[first], cuts[last + 1] - 1
        boundary = _clip_polygon_rows(region.boundary, top, bottom)
        if boundary is None:
            continue
        chunk_lines = tuple(
            replace(line, index=i) for i, line in enumerate(lines[first : last + 1])
        )
        kind = RegionType.HEADING if flag else RegionType.PARAGRAPH
        out.append(Region(id=region.id + f"@{first}", kind=kind, boundary=boundary, lines=chunk_lines))
    return out


def _clip_polygon_rows(poly: Polygon, top: int, bottom: int) -> Polygon | None:
    """Intersect a polygon with the horizontal slab [top, bottom]."""
    x0, _, x1, _ = poly.bbox()
    shape = ShapelyPolygon(poly.points).intersection(shapely_box(x0 - 1, top, x1 + 1, bottom))
    return _largest_piece(shape)


def _largest_piece(shape) -> Polygon | None:
    if shape.is_empty:
        return None
    if shape.geom_type == "MultiPolygon":
        shape = max(shape.geoms, key=lambda g: g.area)  # fallback: keep the dominant piece
    elif shape.geom_type != "Polygon":
        return None
    ring = list(shape.exterior.coords)[:-1]
    pts = [(int(round(x)), int(round(y))) for x, y in ring]
    # drop consecutive duplicates introduced by rounding
    deduped = [p for i, p in enumerate(pts) if p != pts[(i - 1) % len(pts)]]
    if len(deduped) < 3:
        return None
    return Polygon(tuple(deduped))


def extract_initials(
    mask: BinaryImage, seg: PageSegmentation, params: SegmentationParams
) -> PageSegmentation:
    """Pull oversized left-anchored components (ornate initials) out of text
    regions as image regions; the component's bounding rectangle is notched
    out of the region so line re-detection skips it."""
    assigned = _components_by_region(mask, seg)

    new_images: list[Region] = []
    replaced: dict[str, Region | None] = {}
    next_id = len(seg.regions) + 1
    for region in seg.regions:
        if not region.kind.is_text or not region.lines:
            continue
        heights = [line.bbox[3] - line.bbox[1] + 1 for line in region.lines]
        mean_height = float(np.mean(heights))
        rx0, _, rx1, _ = region.bbox()
        width = rx1 - rx0 + 1
        candidates = [
            st
            for st in assigned[region.id]
            if (st.bbox[3] - st.bbox[1] + 1) >= params.initial_span_lines * mean_height
            and st.bbox[0] <= rx0 + 0.10 * width
        ]
        if not candidates:
            continue
        boundary: Polygon | None = region.boundary
        for st in sorted(candidates, key=lambda s: (s.bbox[1], s.bbox[0])):
            bx0, by0, bx1, by1 = st.bbox
            new_images.append(
                Region(id=f"r{next_id:04d}", kind=RegionType.IMAGE, boundary=Polygon.from_bbox(*st.bbox), lines=None)
            )
            next_id += 1
            if boundary is not None:
                # initials are left-anchored, so the cut runs from the
                # region's left edge; a box strictly inside the boundary
                # would punch a hole the polygon model cannot express
                shape = ShapelyPolygon(boundary.points).difference(
                    shapely_box(min(bx0, rx0) - 1, by0 - 1, bx1 + 1, by1 + 1)
                )
                boundary = _largest_piece(shape)
        replaced[region.id] = boundary

    if not new_images:
        return seg

    regions: list[Region] = []
    for region in seg.regions:
        if region.id not in replaced:
            regions.append(region)
            continue
        boundary = replaced[region.id]
        if boundary is None:
            continue  # the initial swallowed the whole region
        regions.append(replace(region, boundary=boundary))
    regions.extend(new_images)

    out = seg.with_regions(regions, ())
    out = renumber(out)
    return assign_reading_order(out)


def assign_reading_order(seg: PageSegmentation) -> PageSegmentation:
    """Recursive XY-cut over the text regions.

    Horizontal gaps spanned by no region split the page into bands; within
    a band, regions whose x intervals overlap by at least half the narrower
    width share a column; columns run left to right and recurse, falling
    back to top-to-bottom order when nothing splits further.
    """
    text = [r for r in seg.regions if r.kind.is_text]
    order = tuple(r.id for r in _xy_order(text))
    return seg.with_regions(seg.regions, order)


def _xy_order(regions: list[Region]) -> list[Region]:
    if len(regions) <= 1:
        return list(regions)

    bands = _split_bands(regions)
    if len(bands) > 1:
        return [r for band in bands for r in _xy_order(band)]

    columns = _cluster_columns(regions)
    if len(columns) > 1:
        return [r for col in columns for r in _xy_order(col)]

    return sorted(regions, key=lambda r: (r.bbox()[1], r.bbox()[0], r.id))


def _split_bands(regions: list[Region]) -> list[list[Region]]:
    by_top = sorted(regions, key=lambda r: (r.bbox()[1], r.bbox()[0], r.id))
    bands: list[list[Region]] = []
    band_bottom = None
    for r in by_top:
        _, y0, _, y1 = r.bbox()
        if band_bottom is None or y0 > band_bottom + 1:
            bands.append([])
            band_bottom = y1
        else:
            band_bottom = max(band_bottom, y1)
        bands[-1].append(r)
    return bands


def _cluster_columns(regions: list[Region]) -> list[list[Region]]:
    parent = list(range(len(regions)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    boxes = [r.bbox() for r in regions]
    for i in range(len(regions)):
        for j in range(i + 1, len(regions)):
            ax0, _, ax1, _ = boxes[i]
            bx0, _, bx1, _ = boxes[j]
            overlap = min(ax1, bx1) - max(ax0, bx0) + 1
            narrower = min(ax1 - ax0 + 1, bx1 - bx0 + 1)
            if overlap >= 0.5 * narrower:
                parent[find(i)] = find(j)

    clusters: dict[int, list[Region]] = {}
    for i, r in enumerate(regions):
        clusters.setdefault(find(i), []).append(r)

    def column_key(col: list[Region]):
        return (
            min(r.bbox()[0] for r in col),
            min(r.bbox()[1] for r in col),
            min(r.id for r in col),
        )

    return sorted(clusters.values(), key=column_key)


def segment_page(
    mask: BinaryImage,
    layout: LayoutConfig,
    params: SegmentationParams,
    page_id: str = "page",
) -> PageSegmentation:
    """Full segmentation: coarse blocks, lines, initials, headings, order."""
    seg = coarse_segment(mask, layout, params, page_id=page_id)
    seg = with_detected_lines(mask, seg, params)
    seg = extract_initials(mask, seg, params)
    seg = with_detected_lines(mask, seg, params)
    flagged = detect_headings(mask, seg, params)
    seg = apply_headings(seg, flagged)
    return seg
