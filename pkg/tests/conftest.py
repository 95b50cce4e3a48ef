"""Shared builders for the test suite."""

import numpy as np
import pytest

from folio.page_model import PageSegmentation, Polygon, Region, RegionType, TextLine


def band_page(height=200, width=300, bands=8, band_h=6, pitch=24, margin=30) -> np.ndarray:
    """Full-width horizontal text bands, the canonical skew test image."""
    mask = np.zeros((height, width), dtype=bool)
    y = margin
    for _ in range(bands):
        if y + band_h > height - margin:
            break
        mask[y : y + band_h, margin : width - margin] = True
        y += pitch
    return mask


def random_segmentation(rng: np.random.Generator, page_id="page") -> PageSegmentation:
    """A random valid segmentation: mixed region kinds, some non-rectangular
    boundaries, y-disjoint indexed lines, order over the text regions."""
    width = int(rng.integers(200, 1200))
    height = int(rng.integers(200, 1200))
    regions = []
    n = int(rng.integers(1, 9))
    for i in range(n):
        x0 = int(rng.integers(0, width - 40))
        y0 = int(rng.integers(0, height - 40))
        x1 = int(rng.integers(x0 + 20, min(width, x0 + 400)))
        y1 = int(rng.integers(y0 + 20, min(height, y0 + 400)))
        x1, y1 = min(x1, width - 1), min(y1, height - 1)
        if rng.random() < 0.25:
            # clip one corner so not everything is a rectangle
            cut = min(8, (x1 - x0) // 2, (y1 - y0) // 2)
            boundary = Polygon((
                (x0 + cut, y0), (x1, y0), (x1, y1), (x0, y1), (x0, y0 + cut),
            ))
        else:
            boundary = Polygon.from_bbox(x0, y0, x1, y1)
        kind = [
            RegionType.PARAGRAPH,
            RegionType.PARAGRAPH,
            RegionType.HEADING,
            RegionType.PAGE_NUMBER,
            RegionType.IMAGE,
        ][int(rng.integers(5))]
        lines = None
        if kind.is_text:
            lines = []
            y = y0
            for index in range(int(rng.integers(0, 5))):
                lh = int(rng.integers(4, 12))
                if y + lh > y1:
                    break
                lines.append(TextLine(bbox=(x0, y, x1, y + lh - 1), index=index))
                y += lh + int(rng.integers(1, 6))
            lines = tuple(lines)
        regions.append(Region(id=f"r{i + 1:04d}", kind=kind, boundary=boundary, lines=lines))
    text_ids = [r.id for r in regions if r.kind.is_text]
    order = tuple(rng.permutation(text_ids).tolist())
    return PageSegmentation(
        page_id=page_id, width=width, height=height, regions=tuple(regions), reading_order=order
    )


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
