"""Edit commands and the journaled page store behind the review service.

Commands are small dataclasses with a JSON codec; applying a batch is a
pure function on PageSegmentation. The store keeps one journal file per
page, so replaying it over the initial segmentation reproduces the current
state exactly, and a revision token (the number of applied batches) gives
optimistic concurrency.
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass, replace
from pathlib import Path

from .errors import (
    EditRejectedError,
    InvalidSegmentationError,
    StaleRevisionError,
    UnknownPageError,
    UnknownRegionError,
)
from .page_model import PageSegmentation, Polygon, Region, RegionType, TextLine, validate
from .pagexml import read_pagexml, write_pagexml
from .segmentation import _clip_polygon_rows, assign_reading_order


@dataclass(frozen=True)
class DeleteRegion:
    region_id: str
    op = "delete_region"


@dataclass(frozen=True)
class SplitRegion:
    region_id: str
    y: int  # rows < y go to the first part, rows >= y to the second
    op = "split_region"


@dataclass(frozen=True)
class ChangeType:
    region_id: str
    kind: RegionType
    op = "change_type"


@dataclass(frozen=True)
class SetReadingOrder:
    order: tuple[str, ...]
    op = "set_reading_order"


@dataclass(frozen=True)
class MergeRegions:
    region_id: str
    other_id: str
    op = "merge_regions"


EditCommand = DeleteRegion | SplitRegion | ChangeType | SetReadingOrder | MergeRegions


def encode_command(cmd: EditCommand) -> dict:
    if isinstance(cmd, DeleteRegion):
        return {"op": cmd.op, "region_id": cmd.region_id}
    if isinstance(cmd, SplitRegion):
        return {"op": cmd.op, "region_id": cmd.region_id, "y": cmd.y}
    if isinstance(cmd, ChangeType):
        return {"op": cmd.op, "region_id": cmd.region_id, "kind": cmd.kind.value}
    if isinstance(cmd, SetReadingOrder):
        return {"op": cmd.op, "order": list(cmd.order)}
    if isinstance(cmd, MergeRegions):
        return {"op": cmd.op, "region_id": cmd.region_id, "other_id": cmd.other_id}
    raise TypeError(f"not an edit command: {cmd!r}")


def decode_command(raw: dict) -> EditCommand:
    try:
        op = raw["op"]
        if op == "delete_region":
            return DeleteRegion(raw["region_id"])
        if op == "split_region":
            return SplitRegion(raw["region_id"], int(raw["y"]))
        if op == "change_type":
            return ChangeType(raw["region_id"], RegionType(raw["kind"]))
        if op == "set_reading_order":
            return SetReadingOrder(tuple(raw["order"]))
        if op == "merge_regions":
            return MergeRegions(raw["region_id"], raw["other_id"])
    except (KeyError, ValueError, TypeError) as exc:
        raise EditRejectedError(f"malformed edit command {raw!r}: {exc}") from exc
    raise EditRejectedError(f"unknown edit op {op!r}")


def _require(seg: PageSegmentation, rid: str) -> Region:
    if not seg.has_region(rid):
        raise UnknownRegionError(f"page {seg.page_id} has no region {rid!r}")
    return seg.region(rid)


def _next_ids(seg: PageSegmentation, count: int) -> list[str]:
    taken = {r.id for r in seg.regions}
    out: list[str] = []
    n = 1
    while len(out) < count:
        rid = f"r{n:04d}"
        if rid not in taken:
            taken.add(rid)
            out.append(rid)
        n += 1
    return out


def apply_command(seg: PageSegmentation, cmd: EditCommand) -> PageSegmentation:
    """Apply one command; raises UnknownRegionError or EditRejectedError."""
    if isinstance(cmd, DeleteRegion):
        _require(seg, cmd.region_id)
        regions = tuple(r for r in seg.regions if r.id != cmd.region_id)
        order = tuple(rid for rid in seg.reading_order if rid != cmd.region_id)
        return seg.with_regions(regions, order)

    if isinstance(cmd, ChangeType):
        region = _require(seg, cmd.region_id)
        if region.kind is cmd.kind:
            return seg
        was_text, is_text = region.kind.is_text, cmd.kind.is_text
        if not is_text:
            new = Region(id=region.id, kind=cmd.kind, boundary=region.boundary, lines=None)
        elif not was_text:
            new = Region(id=region.id, kind=cmd.kind, boundary=region.boundary, lines=())
        else:
            new = replace(region, kind=cmd.kind)
        regions = tuple(new if r.id == cmd.region_id else r for r in seg.regions)
        if was_text and not is_text:
            order = tuple(rid for rid in seg.reading_order if rid != cmd.region_id)
            return seg.with_regions(regions, order)
        if is_text and not was_text:
            # a region entering the text flow has no order slot yet; the
            # geometric rule decides the whole sequence afresh
            return assign_reading_order(seg.with_regions(regions, ()))
        return seg.with_regions(regions, seg.reading_order)

    if isinstance(cmd, SplitRegion):
        region = _require(seg, cmd.region_id)
        if not region.kind.is_text:
            raise EditRejectedError(f"cannot split image region {cmd.region_id!r}")
        x0, y0, x1, y1 = region.bbox()
        if not y0 < cmd.y <= y1:
            raise EditRejectedError(f"cut row {cmd.y} outside region rows ({y0}, {y1}]")
        for line in region.lines or ():
            if line.bbox[1] < cmd.y <= line.bbox[3]:
                raise EditRejectedError(
                    f"cut row {cmd.y} crosses line {line.index} of {cmd.region_id!r}"
                )
        top = _clip_polygon_rows(region.boundary, y0, cmd.y - 1)
        bottom = _clip_polygon_rows(region.boundary, cmd.y, y1)
        if top is None or bottom is None:
            raise EditRejectedError(f"cut row {cmd.y} leaves an empty part")
        id_top, id_bottom = _next_ids(seg, 2)
        lines = list(region.lines or ())
        above = tuple(
            TextLine(bbox=l.bbox, index=i)
            for i, l in enumerate(l for l in lines if l.bbox[3] < cmd.y)
        )
        below = tuple(
            TextLine(bbox=l.bbox, index=i)
            for i, l in enumerate(l for l in lines if l.bbox[1] >= cmd.y)
        )
        part_a = Region(id=id_top, kind=region.kind, boundary=top, lines=above)
        part_b = Region(id=id_bottom, kind=region.kind, boundary=bottom, lines=below)
        regions: list[Region] = []
        for r in seg.regions:
            if r.id == cmd.region_id:
                regions.extend((part_a, part_b))
            else:
                regions.append(r)
        order: list[str] = []
        for rid in seg.reading_order:
            if rid == cmd.region_id:
                order.extend((id_top, id_bottom))
            else:
                order.append(rid)
        return seg.with_regions(tuple(regions), tuple(order))

    if isinstance(cmd, SetReadingOrder):
        text_ids = sorted(r.id for r in seg.regions if r.kind.is_text)
        if sorted(cmd.order) != text_ids:
            raise EditRejectedError(
                f"reading order must list each text region exactly once; "
                f"expected a permutation of {text_ids}"
            )
        return seg.with_regions(seg.regions, cmd.order)

    if isinstance(cmd, MergeRegions):
        a = _require(seg, cmd.region_id)
        b = _require(seg, cmd.other_id)
        if a.id == b.id:
            raise EditRejectedError("cannot merge a region with itself")
        if a.kind is not b.kind:
            raise EditRejectedError(
                f"can only merge regions of the same type, got "
                f"{a.kind.value} and {b.kind.value}"
            )
        ax0, ay0, ax1, ay1 = a.bbox()
        bx0, by0, bx1, by1 = b.bbox()
        boundary = Polygon.from_bbox(min(ax0, bx0), min(ay0, by0), max(ax1, bx1), max(ay1, by1))
        if a.kind.is_text:
            pooled = sorted((a.lines or ()) + (b.lines or ()), key=lambda l: (l.bbox[1], l.bbox[0]))
            lines = tuple(TextLine(bbox=l.bbox, index=i) for i, l in enumerate(pooled))
        else:
            lines = None
        merged = Region(id=a.id, kind=a.kind, boundary=boundary, lines=lines)
        regions = tuple(
            merged if r.id == a.id else r for r in seg.regions if r.id != b.id
        )
        order = tuple(rid for rid in seg.reading_order if rid != b.id)
        return seg.with_regions(regions, order)

    raise EditRejectedError(f"unknown command {cmd!r}")


def apply_commands(seg: PageSegmentation, commands: list[EditCommand]) -> PageSegmentation:
    """Apply a batch in order; the result must validate or the batch fails."""
    out = seg
    for cmd in commands:
        out = apply_command(out, cmd)
    violations = validate(out)
    if violations:
        raise InvalidSegmentationError(violations)
    return out


class PageStore:
    """File-backed review state.

    Layout under the root directory: ``pagexml/<id>.xml`` holds the initial
    segmentations (read-only here), ``binary/<id>.png`` the page rasters,
    ``review/<id>.journal.jsonl`` one JSON line per applied edit batch, and
    ``review/<id>.xml`` the approved snapshot.
    """

    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.review_dir = self.root / "review"
        self.review_dir.mkdir(parents=True, exist_ok=True)
        self._locks: dict[str, threading.Lock] = {}
        self._cache: dict[str, tuple[int, PageSegmentation]] = {}
        self._guard = threading.Lock()

    def page_ids(self) -> list[str]:
        return sorted(p.stem for p in (self.root / "pagexml").glob("*.xml"))

    def _lock(self, page_id: str) -> threading.Lock:
        with self._guard:
            return self._locks.setdefault(page_id, threading.Lock())

    def _initial(self, page_id: str) -> PageSegmentation:
        path = self.root / "pagexml" / f"{page_id}.xml"
        if not path.exists():
            raise UnknownPageError(f"no such page {page_id!r}")
        return read_pagexml(path, page_id=page_id)

    def _journal_path(self, page_id: str) -> Path:
        return self.review_dir / f"{page_id}.journal.jsonl"

    def _journal(self, page_id: str) -> list[list[dict]]:
        path = self._journal_path(page_id)
        if not path.exists():
            return []
        batches = []
        for line in path.read_text(encoding="utf-8").splitlines():
            if line.strip():
                batches.append(json.loads(line)["commands"])
        return batches

    def replay(self, page_id: str) -> tuple[int, PageSegmentation]:
        """Recompute (revision, segmentation) from initial state + journal."""
        seg = self._initial(page_id)
        batches = self._journal(page_id)
        for batch in batches:
            seg = apply_commands(seg, [decode_command(c) for c in batch])
        return len(batches), seg

    def segmentation(self, page_id: str) -> tuple[int, PageSegmentation]:
        with self._lock(page_id):
            if page_id not in self._cache:
                self._cache[page_id] = self.replay(page_id)
            return self._cache[page_id]

    def image_path(self, page_id: str) -> Path | None:
        if page_id not in set(self.page_ids()):
            raise UnknownPageError(f"no such page {page_id!r}")
        path = self.root / "binary" / f"{page_id}.png"
        return path if path.exists() else None

    def status(self, page_id: str) -> str:
        return "approved" if (self.review_dir / f"{page_id}.xml").exists() else "unreviewed"

    def apply(self, page_id: str, commands: list[EditCommand], revision: int) -> tuple[int, PageSegmentation]:
        with self._lock(page_id):
            if page_id not in self._cache:
                self._cache[page_id] = self.replay(page_id)
            current, seg = self._cache[page_id]
            if revision != current:
                raise StaleRevisionError(
                    f"page {page_id} is at revision {current}, client sent {revision}"
                )
            out = apply_commands(seg, commands)
            entry = json.dumps(
                {"commands": [encode_command(c) for c in commands]},
                sort_keys=True, separators=(",", ":"),
            )
            with self._journal_path(page_id).open("a", encoding="utf-8") as fh:
                fh.write(entry + "\n")
            self._cache[page_id] = (current + 1, out)
            # approval covers a specific state; edits supersede it
            snapshot = self.review_dir / f"{page_id}.xml"
            if snapshot.exists():
                snapshot.unlink()
            return self._cache[page_id]

    def approve(self, page_id: str, revision: int) -> Path:
        with self._lock(page_id):
            if page_id not in self._cache:
                self._cache[page_id] = self.replay(page_id)
            current, seg = self._cache[page_id]
            if revision != current:
                raise StaleRevisionError(
                    f"page {page_id} is at revision {current}, client sent {revision}"
                )
            target = self.review_dir / f"{page_id}.xml"
            write_pagexml(seg, target)
            return target

    def stats(self) -> dict:
        ids = self.page_ids()
        edits_by_type: dict[str, int] = {}
        edited = 0
        for page_id in ids:
            batches = self._journal(page_id)
            if batches:
                edited += 1
            for batch in batches:
                for cmd in batch:
                    op = cmd.get("op", "?")
                    edits_by_type[op] = edits_by_type.get(op, 0) + 1
        return {
            "pages": len(ids),
            "approved": sum(1 for p in ids if self.status(p) == "approved"),
            "edited": edited,
            "edits_by_type": edits_by_type,
        }
