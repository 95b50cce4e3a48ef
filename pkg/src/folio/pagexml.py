"""PAGE XML (2013-07-15) serialization.

Writing is strict and deterministic: a segmentation must validate, equal
inputs give byte-identical documents. Reading is tolerant: any namespace
version is accepted, unknown region types degrade to paragraphs and a
missing reading order is reconstructed geometrically, each with a warning.
"""

from __future__ import annotations

import logging
import xml.etree.ElementTree as ET
from pathlib import Path

from .errors import InvalidSegmentationError, PageXmlParseError, PageXmlSchemaError
from .page_model import PageSegmentation, Polygon, Region, RegionType, TextLine, validate

log = logging.getLogger(__name__)

NAMESPACE = "http://schema.primaresearch.org/PAGE/gts/pagecontent/2013-07-15"
_XSI = "http://www.w3.org/2001/XMLSchema-instance"
_CREATED = "1970-01-01T00:00:00"  # fixed so output bytes depend on content only


def _points_attr(poly: Polygon) -> str:
    return " ".join(f"{x},{y}" for x, y in poly.points)


def write_pagexml(
    seg: PageSegmentation,
    target: str | Path | None = None,
    image_filename: str | None = None,
) -> str:
    """Serialize to PAGE XML text; optionally also write it to ``target``."""
    violations = validate(seg)
    if violations:
        raise InvalidSegmentationError(violations)

    for prefix, uri in (("", NAMESPACE), ("xsi", _XSI)):
        ET.register_namespace(prefix, uri)
    root = ET.Element(f"{{{NAMESPACE}}}PcGts")
    root.set(
        f"{{{_XSI}}}schemaLocation",
        f"{NAMESPACE} {NAMESPACE}/pagecontent.xsd",
    )
    meta = ET.SubElement(root, f"{{{NAMESPACE}}}Metadata")
    ET.SubElement(meta, f"{{{NAMESPACE}}}Creator").text = "folio"
    ET.SubElement(meta, f"{{{NAMESPACE}}}Created").text = _CREATED
    ET.SubElement(meta, f"{{{NAMESPACE}}}LastChange").text = _CREATED

    page = ET.SubElement(root, f"{{{NAMESPACE}}}Page")
    page.set("imageFilename", image_filename or f"{seg.page_id}.png")
    page.set("imageWidth", str(seg.width))
    page.set("imageHeight", str(seg.height))

    if seg.reading_order:
        order = ET.SubElement(page, f"{{{NAMESPACE}}}ReadingOrder")
        group = ET.SubElement(order, f"{{{NAMESPACE}}}OrderedGroup")
        group.set("id", "ro_1")
        group.set("caption", "Regions reading order")
        for i, rid in enumerate(seg.reading_order):
            ref = ET.SubElement(group, f"{{{NAMESPACE}}}RegionRefIndexed")
            ref.set("index", str(i))
            ref.set("regionRef", rid)

    for region in seg.regions:
        if region.kind is RegionType.IMAGE:
            el = ET.SubElement(page, f"{{{NAMESPACE}}}ImageRegion")
            el.set("id", region.id)
        else:
            el = ET.SubElement(page, f"{{{NAMESPACE}}}TextRegion")
            el.set("id", region.id)
            el.set("type", region.kind.value)
        ET.SubElement(el, f"{{{NAMESPACE}}}Coords").set("points", _points_attr(region.boundary))
        for line in region.lines or ():
            lel = ET.SubElement(el, f"{{{NAMESPACE}}}TextLine")
            lel.set("id", f"{region.id}_l{line.index:04d}")
            x0, y0, x1, y1 = line.bbox
            ET.SubElement(lel, f"{{{NAMESPACE}}}Coords").set(
                "points", _points_attr(Polygon.from_bbox(x0, y0, x1, y1))
            )

    ET.indent(root, space="  ")
    text = '<?xml version="1.0" encoding="UTF-8"?>\n' + ET.tostring(root, encoding="unicode") + "\n"
    if target is not None:
        Path(target).write_text(text, encoding="utf-8")
    return text


def _local(tag) -> str:
    return tag.rsplit("}", 1)[-1] if isinstance(tag, str) else ""


def _parse_points(el: ET.Element) -> Polygon:
    coords = next((c for c in el if _local(c.tag) == "Coords"), None)
    if coords is None or not coords.get("points"):
        raise PageXmlSchemaError(f"element {_local(el.tag)} id={el.get('id')!r} has no Coords points")
    pts = []
    for pair in coords.get("points").split():
        try:
            x, y = pair.split(",")
            pts.append((int(float(x)), int(float(y))))
        except ValueError as exc:
            raise PageXmlSchemaError(f"bad coordinate pair {pair!r}") from exc
    return Polygon(tuple(pts))


def read_pagexml(source: str | Path, page_id: str | None = None) -> PageSegmentation:
    """Parse PAGE XML text (or a file path) back into a segmentation."""
    if isinstance(source, Path):
        text = source.read_text(encoding="utf-8")
    elif not source.lstrip().startswith("<"):  # a path, not a document
        text = Path(source).read_text(encoding="utf-8")
    else:
        text = source
    try:
        root = ET.fromstring(text)
    except ET.ParseError as exc:
        raise PageXmlParseError(str(exc)) from exc

    page = next((el for el in root.iter() if _local(el.tag) == "Page"), None)
    if page is None:
        raise PageXmlSchemaError("document contains no Page element")
    try:
        width = int(page.get("imageWidth"))
        height = int(page.get("imageHeight"))
    except (TypeError, ValueError) as exc:
        raise PageXmlSchemaError("Page lacks integer imageWidth/imageHeight") from exc
    if page_id is None:
        page_id = Path(page.get("imageFilename", "page")).stem or "page"

    regions: list[Region] = []
    explicit_order: tuple[str, ...] | None = None
    for el in page:
        name = _local(el.tag)
        if name == "ReadingOrder":
            explicit_order = _parse_order(el)
        elif name == "TextRegion":
            regions.append(_parse_text_region(el))
        elif name == "ImageRegion":
            regions.append(
                Region(id=el.get("id", f"r{len(regions) + 1:04d}"), kind=RegionType.IMAGE,
                       boundary=_parse_points(el), lines=None)
            )
        else:
            log.warning("ignoring unsupported page element <%s>", name)

    seg = PageSegmentation(page_id=page_id, width=width, height=height, regions=tuple(regions))
    if explicit_order is None:
        from .segmentation import assign_reading_order

        log.warning("page %s: no ReadingOrder element, reconstructing geometrically", page_id)
        return assign_reading_order(seg)

    text_ids = {r.id for r in regions if r.kind.is_text}
    kept = tuple(rid for rid in explicit_order if rid in text_ids)
    if kept != explicit_order:
        log.warning("page %s: dropping reading-order refs to unknown or image regions", page_id)
    return seg.with_regions(seg.regions, kept)


def _parse_order(el: ET.Element) -> tuple[str, ...]:
    refs = []
    for group in el:
        if _local(group.tag) not in ("OrderedGroup", "UnorderedGroup"):
            continue
        for ref in group:
            if _local(ref.tag) == "RegionRefIndexed" and ref.get("regionRef"):
                try:
                    idx = int(ref.get("index", "0"))
                except ValueError:
                    idx = len(refs)
                refs.append((idx, ref.get("regionRef")))
    return tuple(rid for _, rid in sorted(refs))


def _parse_text_region(el: ET.Element) -> Region:
    raw_type = el.get("type", "paragraph")
    try:
        kind = RegionType(raw_type)
    except ValueError:
        log.warning("region %s: unknown type %r, treating as paragraph", el.get("id"), raw_type)
        kind = RegionType.PARAGRAPH
    if kind is RegionType.IMAGE:  # "image" is not a TextRegion type
        log.warning("region %s: TextRegion typed 'image', treating as paragraph", el.get("id"))
        kind = RegionType.PARAGRAPH
    lines = []
    for i, lel in enumerate(c for c in el if _local(c.tag) == "TextLine"):
        poly = _parse_points(lel)
        lines.append(TextLine(bbox=poly.bbox(), index=i))
    return Region(
        id=el.get("id", "r0000"),
        kind=kind,
        boundary=_parse_points(el),
        lines=tuple(lines),
    )
