"""Region and line extraction plus text assembly.

Regions are cut from the original grayscale scan (the binary image used
for segmentation has the same dimensions, so coordinates transfer 1:1).
Line images are produced per region: deskew, re-binarize, detect lines,
crop, and height-normalize the grayscale crops for an external OCR engine.
"""

from __future__ import annotations

import logging
import re

import numpy as np
from PIL import Image

from .errors import DimensionMismatchError
from .imaging import (
    BinarizeConfig,
    BinaryImage,
    GrayImage,
    as_gray,
    estimate_skew,
    rotate,
    sauvola_binarize,
)
from .page_model import PageSegmentation, Polygon, Region, RegionType
from .segmentation import SegmentationParams, detect_lines, polygon_mask

log = logging.getLogger(__name__)

LINE_HEIGHT = 48  # normalized grayscale line height in px

_PUNCT_GAP = re.compile(r"([.,:;!?])(?=\S)")


def extract_regions(original: GrayImage, seg: PageSegmentation) -> list[tuple[str, GrayImage]]:
    """Crop every region to its bbox; pixels outside the polygon turn white."""
    original = as_gray(original)
    h, w = original.shape
    if (w, h) != (seg.width, seg.height):
        raise DimensionMismatchError(
            f"image is {w}x{h} but segmentation says {seg.width}x{seg.height}"
        )
    out = []
    for region in seg.regions:
        x0, y0, x1, y1 = region.bbox()
        crop = original[y0 : y1 + 1, x0 : x1 + 1].copy()
        inside = polygon_mask(region.boundary, seg.width, seg.height)[y0 : y1 + 1, x0 : x1 + 1]
        crop[~inside] = 255
        out.append((region.id, crop))
    return out


def normalize_line_height(img: GrayImage, height: int = LINE_HEIGHT) -> GrayImage:
    """Scale to a fixed height, keeping the aspect ratio (min width 1)."""
    img = as_gray(img)
    h, w = img.shape
    new_w = max(1, int(round(w * height / h)))
    resized = Image.fromarray(img).resize((new_w, height), Image.LANCZOS)
    return np.asarray(resized, dtype=np.uint8)


def extract_lines(
    region_img: GrayImage,
    cfg: BinarizeConfig = BinarizeConfig(),
    params: SegmentationParams = SegmentationParams(),
) -> list[tuple[int, GrayImage, BinaryImage]]:
    """Deskew a text-region image and cut it into normalized line images."""
    gray = as_gray(region_img)
    mask = sauvola_binarize(gray, cfg)
    if mask.any():
        angle = estimate_skew(mask)
        if angle != 0.0:
            gray = rotate(gray, angle)
            mask = sauvola_binarize(gray, cfg)
    h, w = gray.shape
    probe = Region(
        id="r0001",
        kind=RegionType.PARAGRAPH,
        boundary=Polygon.from_bbox(0, 0, w - 1, h - 1),
    )
    lines = detect_lines(mask, probe, params)
    out = []
    for line in lines:
        x0, y0, x1, y1 = line.bbox
        gray_crop = gray[y0 : y1 + 1, x0 : x1 + 1]
        bin_crop = mask[y0 : y1 + 1, x0 : x1 + 1]
        out.append((line.index, normalize_line_height(gray_crop), bin_crop))
    return out


def assemble_text(seg: PageSegmentation, line_texts: dict[tuple[str, int], str]) -> str:
    """Concatenate line texts region by region in reading order; regions are
    separated by a blank line. Missing lines become empty strings."""
    blocks = []
    for rid in seg.reading_order:
        region = seg.region(rid)
        parts = []
        for line in region.lines or ():
            key = (rid, line.index)
            if key not in line_texts:
                log.warning("page %s: no text for line %s/%d", seg.page_id, rid, line.index)
            parts.append(line_texts.get(key, ""))
        blocks.append("\n".join(parts))
    return "\n\n".join(blocks)


def normalize_text(s: str) -> str:
    """Insert one blank after punctuation that is glued to the next word."""
    return _PUNCT_GAP.sub(r"\1 ", s)
