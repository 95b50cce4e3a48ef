"""Document model: typed polygonal regions, text lines, reading order.

All types are immutable value objects. ``validate`` reports rule
violations as data instead of raising, so callers can surface them.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum

from shapely.geometry import Polygon as ShapelyPolygon


class RegionType(str, Enum):
    IMAGE = "image"
    PARAGRAPH = "paragraph"
    HEADING = "heading"
    PAGE_NUMBER = "page-number"

    @property
    def is_text(self) -> bool:
        return self is not RegionType.IMAGE


TEXT_TYPES = (RegionType.PARAGRAPH, RegionType.HEADING, RegionType.PAGE_NUMBER)


@dataclass(frozen=True)
class Polygon:
    """Closed polygon as an ordered tuple of integer (x, y) vertices."""

    points: tuple[tuple[int, int], ...]

    def __post_init__(self):
        object.__setattr__(
            self, "points", tuple((int(x), int(y)) for x, y in self.points)
        )

    @classmethod
    def from_bbox(cls, x0: int, y0: int, x1: int, y1: int) -> "Polygon":
        return cls(((x0, y0), (x1, y0), (x1, y1), (x0, y1)))

    def bbox(self) -> tuple[int, int, int, int]:
        xs = [p[0] for p in self.points]
        ys = [p[1] for p in self.points]
        return min(xs), min(ys), max(xs), max(ys)

    def signed_area(self) -> float:
        """Shoelace area; zero for degenerate (collinear) rings."""
        pts = self.points
        n = len(pts)
        acc = 0
        for i in range(n):
            x0, y0 = pts[i]
            x1, y1 = pts[(i + 1) % n]
            acc += x0 * y1 - x1 * y0
        return acc / 2.0

    def centroid(self) -> tuple[float, float]:
        xs = [p[0] for p in self.points]
        ys = [p[1] for p in self.points]
        return sum(xs) / len(xs), sum(ys) / len(ys)

    def is_simple(self) -> bool:
        """True when the ring does not self-intersect."""
        if len(self.points) < 3:
            return False
        return ShapelyPolygon(self.points).is_valid


@dataclass(frozen=True)
class TextLine:
    """One detected text line inside a region, indexed top to bottom."""

    bbox: tuple[int, int, int, int]  # (x0, y0, x1, y1), inclusive
    index: int


@dataclass(frozen=True)
class Region:
    id: str
    kind: RegionType
    boundary: Polygon
    lines: tuple[TextLine, ...] | None = None

    def __post_init__(self):
        if self.lines is None and self.kind.is_text:
            object.__setattr__(self, "lines", ())
        elif self.lines is not None:
            object.__setattr__(self, "lines", tuple(self.lines))

    def bbox(self) -> tuple[int, int, int, int]:
        return self.boundary.bbox()


@dataclass(frozen=True)
class PageSegmentation:
    page_id: str
    width: int
    height: int
    regions: tuple[Region, ...] = ()
    reading_order: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "regions", tuple(self.regions))
        object.__setattr__(self, "reading_order", tuple(self.reading_order))

    def region(self, region_id: str) -> Region:
        for r in self.regions:
            if r.id == region_id:
                return r
        raise KeyError(region_id)

    def has_region(self, region_id: str) -> bool:
        return any(r.id == region_id for r in self.regions)

    def text_regions(self) -> tuple[Region, ...]:
        return tuple(r for r in self.regions if r.kind.is_text)

    def with_regions(self, regions, reading_order=None) -> "PageSegmentation":
        return replace(
            self,
            regions=tuple(regions),
            reading_order=tuple(reading_order if reading_order is not None else self.reading_order),
        )


@dataclass(frozen=True)
class Violation:
    """One broken model rule, naming the region (when any) and the rule."""

    rule: str
    region_id: str | None
    message: str

    def __str__(self):
        where = f" [{self.region_id}]" if self.region_id else ""
        return f"{self.rule}{where}: {self.message}"


def validate(seg: PageSegmentation) -> list[Violation]:
    """Check every model invariant; an empty list means the page is clean."""
    out: list[Violation] = []

    seen: set[str] = set()
    for r in seg.regions:
        if r.id in seen:
            out.append(Violation("duplicate-region-id", r.id, "region id occurs more than once"))
        seen.add(r.id)

    for r in seg.regions:
        out.extend(_check_region(r, seg.width, seg.height))

    text_ids = [r.id for r in seg.regions if r.kind.is_text]
    image_ids = {r.id for r in seg.regions if r.kind is RegionType.IMAGE}
    order = list(seg.reading_order)
    order_counts: dict[str, int] = {}
    for rid in order:
        order_counts[rid] = order_counts.get(rid, 0) + 1

    for rid in order:
        if rid in image_ids:
            out.append(Violation("image-in-reading-order", rid, "image regions do not belong in the reading order"))
        elif rid not in seen:
            out.append(Violation("unknown-id-in-reading-order", rid, "reading order references a region that does not exist"))
    for rid, n in order_counts.items():
        if n > 1 and rid in seen and rid not in image_ids:
            out.append(Violation("duplicate-id-in-reading-order", rid, f"region appears {n} times in the reading order"))
    for rid in text_ids:
        if rid not in order_counts:
            out.append(Violation("missing-from-reading-order", rid, "text region missing from the reading order"))

    return out


def _check_region(r: Region, width: int, height: int) -> list[Violation]:
    out: list[Violation] = []

    pts = r.boundary.points
    if len(pts) < 3:
        out.append(Violation("polygon-too-few-points", r.id, f"polygon has {len(pts)} points, needs >= 3"))
        return out
    oob = [p for p in pts if not (0 <= p[0] < width and 0 <= p[1] < height)]
    if oob:
        out.append(Violation("polygon-out-of-bounds", r.id, f"point {oob[0]} outside {width}x{height} page"))
        return out
    if abs(r.boundary.signed_area()) == 0:
        out.append(Violation("polygon-zero-area", r.id, "polygon encloses no area"))
        return out
    if not r.boundary.is_simple():
        out.append(Violation("polygon-self-intersects", r.id, "polygon boundary crosses itself"))
        return out

    if r.kind is RegionType.IMAGE:
        if r.lines:
            out.append(Violation("image-region-with-lines", r.id, "image regions must not carry text lines"))
        return out

    lines = r.lines or ()
    for expect, line in enumerate(lines):
        if line.index != expect:
            out.append(Violation("line-index-out-of-order", r.id, f"line at position {expect} has index {line.index}"))
            return out
    for prev, cur in zip(lines, lines[1:]):
        if cur.bbox[1] <= prev.bbox[3]:
            out.append(
                Violation(
                    "lines-overlap",
                    r.id,
                    f"line {cur.index} starts at y={cur.bbox[1]} before line {prev.index} ends at y={prev.bbox[3]}",
                )
            )
            return out
    return out


@dataclass(frozen=True)
class HeadingRuleConfig:
    """Flags oversized lines: taller than the paragraph average and with a
    mean glyph area at least ``area_ratio_threshold`` times the page mean."""

    area_ratio_threshold: float = 1.15
    require_height_above_mean: bool = True

    def __post_init__(self):
        if self.area_ratio_threshold <= 1.0:
            raise ValueError(f"area_ratio_threshold must be > 1, got {self.area_ratio_threshold}")


@dataclass(frozen=True)
class TypeRule:
    """Spatial/size rule for one region type, in page fractions."""

    zone: tuple[float, float, float, float] = (0.0, 0.0, 1.0, 1.0)
    min_area_frac: float = 0.0
    max_area_frac: float = 1.0

    def __post_init__(self):
        x0, y0, x1, y1 = self.zone
        if not (0.0 <= x0 < x1 <= 1.0 and 0.0 <= y0 < y1 <= 1.0):
            raise ValueError(f"zone fractions must satisfy 0 <= lo < hi <= 1, got {self.zone}")

    def zone_contains(self, fx: float, fy: float) -> bool:
        x0, y0, x1, y1 = self.zone
        return x0 <= fx <= x1 and y0 <= fy <= y1

    def area_ok(self, area_frac: float) -> bool:
        return self.min_area_frac <= area_frac <= self.max_area_frac


@dataclass(frozen=True)
class LayoutConfig:
    """Where each region type may live on the page and how big it may be."""

    rules: dict[RegionType, TypeRule] = field(default_factory=dict)

    def rule(self, kind: RegionType) -> TypeRule:
        return self.rules.get(kind, TypeRule())


def default_layout_config() -> LayoutConfig:
    """Images and paragraphs anywhere; headings top center; page numbers
    confined to a small top-right corner box."""
    return LayoutConfig(
        rules={
            RegionType.IMAGE: TypeRule(),
            RegionType.PARAGRAPH: TypeRule(),
            RegionType.HEADING: TypeRule(zone=(0.20, 0.00, 0.80, 0.20)),
            RegionType.PAGE_NUMBER: TypeRule(zone=(0.70, 0.00, 1.00, 0.12), max_area_frac=0.005),
        }
    )
