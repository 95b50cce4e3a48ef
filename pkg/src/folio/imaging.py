"""Low-level raster operations on page images.

Grayscale pages are 2D uint8 arrays (0 = black ink, 255 = white paper),
binary pages are 2D bool arrays (True = foreground ink). Everything here
is a pure function; callers can fan pages out across workers freely.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image
from scipy import ndimage

from .errors import EmptyImageError

# Type aliases, for signatures only: both are plain 2D numpy arrays.
GrayImage = np.ndarray   # dtype uint8
BinaryImage = np.ndarray  # dtype bool


@dataclass(frozen=True)
class StructuringElement:
    """Square structuring element with its origin at the center."""

    size: int = 3

    def __post_init__(self):
        if self.size < 1 or self.size % 2 == 0:
            raise ValueError(f"structuring element size must be odd >= 1, got {self.size}")

    def footprint(self) -> np.ndarray:
        return np.ones((self.size, self.size), dtype=bool)


@dataclass(frozen=True)
class BinarizeConfig:
    """Sauvola parameters: local window size, sensitivity k, dynamic range r."""

    window: int = 31
    k: float = 0.3
    r: float = 128.0

    def __post_init__(self):
        if self.window < 3 or self.window % 2 == 0:
            raise ValueError(f"window must be odd >= 3, got {self.window}")
        if not 0.0 < self.k <= 1.0:
            raise ValueError(f"k must be in (0, 1], got {self.k}")
        if self.r <= 0:
            raise ValueError(f"r must be > 0, got {self.r}")


@dataclass(frozen=True)
class ComponentStats:
    """Summary of one connected component."""

    label: int
    bbox: tuple[int, int, int, int]  # (x0, y0, x1, y1), inclusive
    area: int                        # foreground pixel count
    centroid: tuple[float, float]    # (x, y), fractional pixels


def as_gray(img: np.ndarray) -> GrayImage:
    """Coerce to a 2D uint8 array, converting color to Rec.601 luma."""
    a = np.asarray(img)
    if a.ndim == 3:
        # ITU-R 601 luma, same weights PIL uses for mode "L"
        a = np.round(a[..., 0] * 0.299 + a[..., 1] * 0.587 + a[..., 2] * 0.114)
    if a.ndim != 2:
        raise ValueError(f"expected a 2D image, got shape {a.shape}")
    if a.shape[0] < 1 or a.shape[1] < 1:
        raise ValueError(f"image must be at least 1x1, got shape {a.shape}")
    return np.clip(a, 0, 255).astype(np.uint8)


def as_binary(img: np.ndarray) -> BinaryImage:
    a = np.asarray(img)
    if a.ndim != 2:
        raise ValueError(f"expected a 2D mask, got shape {a.shape}")
    return a.astype(bool)


def load_gray(path: str | Path) -> GrayImage:
    """Load PNG/PGM/PBM as grayscale; color inputs go through Rec.601 luma."""
    with Image.open(path) as im:
        return np.asarray(im.convert("L"), dtype=np.uint8)


def save_gray(img: GrayImage, path: str | Path) -> None:
    Image.fromarray(np.asarray(img, dtype=np.uint8), mode="L").save(path)


def load_binary(path: str | Path) -> BinaryImage:
    """Load a bilevel image; pixels <= 127 count as ink."""
    return load_gray(path) <= 127


def save_binary(mask: BinaryImage, path: str | Path) -> None:
    """Write as 8-bit PNG/PGM with ink black on white."""
    img = np.where(np.asarray(mask, dtype=bool), 0, 255).astype(np.uint8)
    Image.fromarray(img, mode="L").save(path)


def is_bilevel(img: GrayImage) -> bool:
    return bool(np.isin(img, (0, 255)).all())


def _window_sums(img: GrayImage, window: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Clamped-window sum, sum of squares and pixel count via integral images.

    All sums are exact: they are integer-valued and stay far below 2**53.
    """
    h, w = img.shape
    half = window // 2
    px = img.astype(np.int64)
    # integral images with a zero top row / left column
    sat = np.zeros((h + 1, w + 1), dtype=np.int64)
    sat2 = np.zeros((h + 1, w + 1), dtype=np.int64)
    np.cumsum(np.cumsum(px, axis=0), axis=1, out=sat[1:, 1:])
    np.cumsum(np.cumsum(px * px, axis=0), axis=1, out=sat2[1:, 1:])

    ys = np.arange(h)
    xs = np.arange(w)
    y0 = np.clip(ys - half, 0, h)[:, None]
    y1 = np.clip(ys + half + 1, 0, h)[:, None]
    x0 = np.clip(xs - half, 0, w)[None, :]
    x1 = np.clip(xs + half + 1, 0, w)[None, :]

    s = sat[y1, x1] - sat[y0, x1] - sat[y1, x0] + sat[y0, x0]
    s2 = sat2[y1, x1] - sat2[y0, x1] - sat2[y1, x0] + sat2[y0, x0]
    n = (y1 - y0) * (x1 - x0)
    return s, s2, n


def sauvola_binarize(img: GrayImage, cfg: BinarizeConfig = BinarizeConfig()) -> BinaryImage:
    """Adaptive thresholding with T = m * (1 + k * (s/r - 1)).

    m and s are the mean and population standard deviation over the local
    window, clamped at the image borders. A pixel is ink iff its intensity
    is <= T, which keeps the all-black page stable.
    """
    img = as_gray(img)
    s, s2, n = _window_sums(img, cfg.window)
    n = n.astype(np.float64)
    m = s / n
    var = s2 / n - m * m
    std = np.sqrt(np.maximum(var, 0.0))
    t = m * (1.0 + cfg.k * (std / cfg.r - 1.0))
    return img.astype(np.float64) <= t


def dilate(mask: BinaryImage, se: StructuringElement) -> BinaryImage:
    """Set a pixel iff any input pixel lies under the translated element."""
    mask = as_binary(mask)
    if se.size == 1:
        return mask.copy()
    return ndimage.binary_dilation(mask, structure=se.footprint(), border_value=0)


def erode(mask: BinaryImage, se: StructuringElement) -> BinaryImage:
    """Set a pixel iff all pixels under the element are set; out-of-bounds
    counts as background, so a full frame erodes away at the border."""
    mask = as_binary(mask)
    if se.size == 1:
        return mask.copy()
    return ndimage.binary_erosion(mask, structure=se.footprint(), border_value=0)


_STRUCTURE_4 = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]], dtype=bool)
_STRUCTURE_8 = np.ones((3, 3), dtype=bool)


def connected_components(
    mask: BinaryImage, connectivity: int = 8
) -> tuple[list[ComponentStats], np.ndarray]:
    """Label foreground components; returns stats plus the int label raster.

    Labels start at 1 in row-major discovery order; 0 marks background.
    """
    if connectivity not in (4, 8):
        raise ValueError(f"connectivity must be 4 or 8, got {connectivity}")
    mask = as_binary(mask)
    structure = _STRUCTURE_4 if connectivity == 4 else _STRUCTURE_8
    labels, count = ndimage.label(mask, structure=structure)
    if count == 0:
        return [], labels

    slices = ndimage.find_objects(labels)
    areas = np.bincount(labels.ravel())
    centers = ndimage.center_of_mass(mask, labels, index=range(1, count + 1))
    stats = []
    for i, sl in enumerate(slices, start=1):
        ysl, xsl = sl
        cy, cx = centers[i - 1]
        stats.append(
            ComponentStats(
                label=i,
                bbox=(xsl.start, ysl.start, xsl.stop - 1, ysl.stop - 1),
                area=int(areas[i]),
                centroid=(float(cx), float(cy)),
            )
        )
    return stats, labels


def rotate(img: np.ndarray, angle_deg: float, background=None) -> np.ndarray:
    """Rotate about the center with nearest-neighbor resampling, same shape.

    Default background: False for masks, 255 (paper white) for grayscale.
    """
    a = np.asarray(img)
    if angle_deg == 0.0:
        return a.copy()
    if a.dtype == bool:
        fill = False if background is None else bool(background)
        out = ndimage.rotate(
            a.astype(np.uint8), angle_deg, reshape=False, order=0,
            mode="constant", cval=1 if fill else 0,
        )
        return out.astype(bool)
    fill = 255 if background is None else background
    return ndimage.rotate(a, angle_deg, reshape=False, order=0, mode="constant", cval=fill)


def estimate_skew(
    mask: BinaryImage,
    range_deg: float = 5.0,
    step_deg: float = 0.1,
) -> float:
    """Correction angle that maximizes the variance of the horizontal
    projection profile after rotation; ties break toward 0 degrees.

    Apply ``rotate(mask, estimate_skew(mask))`` to deskew.
    """
    mask = as_binary(mask)
    if not mask.any():
        raise EmptyImageError("cannot estimate skew of an empty image")
    steps = int(round(range_deg / step_deg))
    best_angle = 0.0
    best_var = -1.0
    for i in range(-steps, steps + 1):
        angle = i * step_deg
        profile = rotate(mask, angle).sum(axis=1, dtype=np.int64)
        var = float(np.var(profile))
        better = var > best_var
        tie = var == best_var and (
            abs(angle) < abs(best_angle)
            or (abs(angle) == abs(best_angle) and angle > best_angle)
        )
        if better or tie:
            best_var = var
            best_angle = angle
    return best_angle


def deskew(mask: BinaryImage, range_deg: float = 5.0, step_deg: float = 0.1) -> BinaryImage:
    """Rotate the mask by its estimated skew correction angle."""
    return rotate(as_binary(mask), estimate_skew(mask, range_deg, step_deg))


def remove_scan_border(mask: BinaryImage, close_se: StructuringElement = StructuringElement(5)) -> BinaryImage:
    """Clear the scan frame and stray blocks outside the content area.

    Ink is grouped by a morphological closing. Groups whose pixels touch the
    image edge are dropped. Of the rest, a group is dropped as an outlier
    when its x-range is separated from all other kept ink by more than 2%
    of the image width AND it holds under a quarter of the kept ink: spill
    from a facing page sits beside the content block, while page numbers,
    first lines and initials overlap it horizontally, and a genuine column
    is far too heavy to qualify. The pass repeats until stable, which makes
    the whole operation idempotent.
    """
    mask = as_binary(mask)
    if not mask.any():
        return mask.copy()
    h, w = mask.shape

    closed = ndimage.binary_closing(mask, structure=close_se.footprint(), border_value=0)
    closed |= mask  # keep grouping a superset of the ink even at the borders
    labels, count = ndimage.label(closed, structure=_STRUCTURE_8)

    ys, xs = np.nonzero(mask)
    groups = labels[ys, xs]

    # per-group stats over the original ink pixels
    keep = np.ones(count + 1, dtype=bool)
    keep[0] = False
    min_x = np.full(count + 1, w, dtype=np.int64)
    max_x = np.full(count + 1, -1, dtype=np.int64)
    min_y = np.full(count + 1, h, dtype=np.int64)
    max_y = np.full(count + 1, -1, dtype=np.int64)
    np.minimum.at(min_x, groups, xs)
    np.maximum.at(max_x, groups, xs)
    np.minimum.at(min_y, groups, ys)
    np.maximum.at(max_y, groups, ys)
    counts = np.bincount(groups, minlength=count + 1)

    # drop groups whose ink touches the image edge
    touches = (min_x == 0) | (min_y == 0) | (max_x == w - 1) | (max_y == h - 1)
    keep &= ~touches

    gap_x = 0.02 * w
    while True:
        idx = np.nonzero(keep)[0]
        if idx.size < 2:
            break
        total_ink = counts[idx].sum()
        dropped_any = False
        for g in idx:
            others = idx[idx != g]
            ox0, ox1 = min_x[others].min(), max_x[others].max()
            sep_x = max(ox0 - max_x[g], min_x[g] - ox1)
            if sep_x > gap_x and counts[g] < 0.25 * total_ink:
                keep[g] = False
                dropped_any = True
        if not dropped_any:
            break

    return mask & keep[labels]
