"""Deterministic synthetic test book.

Pages are built from solid rectangular pseudo-glyphs so that every layout
fact (region boxes, line boxes, texts, reading order) is known exactly and
can serve as ground truth for the segmentation and evaluation stages. The
same seed always yields byte-identical output trees.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .extraction import assemble_text
from .imaging import save_binary
from .page_model import PageSegmentation, Polygon, Region, RegionType, TextLine
from .pagexml import write_pagexml
from .segmentation import assign_reading_order

PAGE_WIDTH = 600
PAGE_HEIGHT = 800
_MARGIN = 50
_BODY_H = 14
_HEAD_H = 28
_LINE_PITCH = 19  # body height + 5 px gap

_LEXICON = (
    "der die das und von zuo got herre frawe kind stat buoch iar tag nacht "
    "wol gar vil sich mit ein dem den an in do er si uns nach uber umb auch "
    "als man hie sein ward sprach kam gie stuond hett lieb gnad engel himel "
    "erd wasser fewr marter pein koenig pischof closter pruoder swester "
    "vatter muoter sun tochter heiligen sant leben gros wart also"
).split()

_ALPHABET = "abcdefghijklmnopqrstuvwxyz"


@dataclass(frozen=True)
class SyntheticPage:
    """One generated page: its binary raster plus exact layout truth."""

    page_id: str
    mask: np.ndarray
    truth: PageSegmentation
    line_texts: dict[tuple[str, int], str] = field(default_factory=dict)

    def text(self) -> str:
        return assemble_text(self.truth, self.line_texts)


def roman(n: int) -> str:
    pairs = (
        (1000, "m"), (900, "cm"), (500, "d"), (400, "cd"), (100, "c"),
        (90, "xc"), (50, "l"), (40, "xl"), (10, "x"), (9, "ix"),
        (5, "v"), (4, "iv"), (1, "i"),
    )
    out = []
    for value, sym in pairs:
        while n >= value:
            out.append(sym)
            n -= value
    return "".join(out)


def _sample_word(rng: np.random.Generator, punct: bool) -> str:
    word = _LEXICON[int(rng.integers(len(_LEXICON)))]
    if punct and rng.random() < 0.12:
        word += "." if rng.random() < 0.5 else ","
    return word


def _word_width(rng: np.random.Generator, word: str, big: bool) -> list[int]:
    lo, hi = (14, 21) if big else (7, 10)
    return [3 if ch in ".," else int(rng.integers(lo, hi)) for ch in word]


def _render_line(
    mask, rng, x0: int, y: int, x_max: int, *, big=False, fill_frac=0.0, punct=True
) -> tuple[str, tuple[int, int, int, int]] | None:
    """Render words left to right inside [x0, x_max]; returns (text, bbox)."""
    gap = 3 if big else 2
    space = 6  # must stay within the block-merge dilation reach
    h = _HEAD_H if big else _BODY_H
    words: list[str] = []
    cur = x0
    while True:
        word = _sample_word(rng, punct and not big)
        widths = _word_width(rng, word, big)
        word_px = sum(widths) + gap * (len(word) - 1)
        start = cur if not words else cur + space
        if start + word_px - 1 > x_max:
            break
        x = start
        for ch, w in zip(word, widths):
            if ch in ".,":
                mask[y + h - 3 : y + h, x : x + 3] = True
            else:
                mask[y : y + h, x : x + w] = True
            x += w + gap
        cur = start + word_px
        words.append(word)
        if not big and rng.random() < 0.06:
            break
    if not words:
        return None
    if fill_frac and cur - x0 < fill_frac * (x_max - x0 + 1):
        # pad headings with a pseudo-word so they span most of the block
        lo = 14 if big else 7
        filler = []
        x = cur + space
        while x_max - x + 1 >= lo:
            w = int(rng.integers(lo, (21 if big else 10)))
            if x + w - 1 > x_max:
                break
            mask[y : y + h, x : x + w] = True
            filler.append(_ALPHABET[int(rng.integers(26))])
            x += w + gap
            cur = x - gap
        if filler:
            words.append("".join(filler))
    return " ".join(words), (x0, y, cur - 1, y + h - 1)


def generate_page(
    rng: np.random.Generator,
    page_id: str,
    page_number: int = 1,
    *,
    width: int = PAGE_WIDTH,
    height: int = PAGE_HEIGHT,
    columns: int = 2,
    heading: str = "none",
    with_image: bool = False,
    with_initial: bool = False,
    merged_gap_line: bool = False,
) -> SyntheticPage:
    """Build one page. ``heading`` is none, separate or embedded; initials
    and images occupy one column picked at random."""
    if heading not in ("none", "separate", "embedded"):
        raise ValueError(f"unknown heading mode {heading!r}")
    mask = np.zeros((height, width), dtype=bool)
    entries: list[tuple[RegionType, tuple, list[tuple[tuple, str]]]] = []

    # folio number, top right, roman numerals ("fo xlii" style)
    num = "fo " + roman(page_number)
    total = sum(4 if ch == " " else 10 for ch in num) - 2
    pn_x1 = width - _MARGIN - 1 + 6
    pn_x0 = pn_x1 - total + 1
    x = pn_x0
    for ch in num:
        if ch == " ":
            x += 4  # word gap of 6 px total, within the block-merge reach
        else:
            mask[20:33, x : x + 8] = True
            x += 10
    entries.append((RegionType.PAGE_NUMBER, (pn_x0, 20, pn_x1, 32), [((pn_x0, 20, pn_x1, 32), num)]))

    top = 60
    if heading == "separate":
        hx0, hx1 = _MARGIN + 120, width - _MARGIN - 121
        line = _render_line(mask, rng, hx0, top, hx1, big=True, fill_frac=0.85)
        text, bbox = line
        entries.append((RegionType.HEADING, bbox, [(bbox, text)]))
        top += _HEAD_H + 22

    if columns == 2:
        col_w = (width - 2 * _MARGIN - 30) // 2
        spans = [(_MARGIN, _MARGIN + col_w - 1), (width - _MARGIN - col_w, width - _MARGIN - 1)]
    else:
        spans = [(_MARGIN, width - _MARGIN - 1)]
    embed_col = int(rng.integers(len(spans))) if heading == "embedded" else -1
    init_col = int(rng.integers(len(spans))) if with_initial else -1
    img_col = int(rng.integers(len(spans))) if with_image else -1
    bottom = height - _MARGIN - 5

    for ci, (cx0, cx1) in enumerate(spans):
        y = top
        lines: list[tuple[tuple, str]] = []

        if ci == embed_col:
            text, bbox = _render_line(mask, rng, cx0, y, cx1, big=True, fill_frac=0.85)
            entries.append((RegionType.HEADING, bbox, [(bbox, text)]))
            y += _HEAD_H + 5

        if ci == init_col:
            iw = int(rng.integers(28, 35))
            ih = 2 * _LINE_PITCH + _BODY_H
            mask[y : y + ih, cx0 : cx0 + iw] = True
            entries.append((RegionType.IMAGE, (cx0, y, cx0 + iw - 1, y + ih - 1), []))
            for _ in range(3):
                line = _render_line(mask, rng, cx0 + iw + 4, y, cx1)
                if line:
                    lines.append((line[1], line[0]))
                y += _LINE_PITCH

        img_h = int(rng.integers(140, 201)) if ci == img_col else 0
        text_limit = bottom - img_h - 20 if ci == img_col else bottom
        merge_at = int(rng.integers(5, 15)) if merged_gap_line else -1
        while y + _BODY_H - 1 <= text_limit:
            line = _render_line(mask, rng, cx0, y, cx1)
            if line:
                lines.append((line[1], line[0]))
            y += (_BODY_H + 2) if len(lines) == merge_at else _LINE_PITCH

        if lines:
            xs0 = min(b[0] for b, _ in lines)
            ys0 = min(b[1] for b, _ in lines)
            xs1 = max(b[2] for b, _ in lines)
            ys1 = max(b[3] for b, _ in lines)
            entries.append((RegionType.PARAGRAPH, (xs0, ys0, xs1, ys1), lines))

        if ci == img_col:
            iw = int(rng.integers(200, min(231, cx1 - cx0 + 2)))
            ix0 = cx0 + (cx1 - cx0 + 1 - iw) // 2
            iy1 = bottom
            iy0 = iy1 - img_h + 1
            mask[iy0 : iy1 + 1, ix0 : ix0 + iw] = True
            entries.append((RegionType.IMAGE, (ix0, iy0, ix0 + iw - 1, iy1), []))

    regions = []
    line_texts: dict[tuple[str, int], str] = {}
    for i, (kind, bbox, lines) in enumerate(entries):
        rid = f"r{i + 1:04d}"
        tls = tuple(TextLine(bbox=b, index=j) for j, (b, _) in enumerate(lines))
        regions.append(
            Region(
                id=rid,
                kind=kind,
                boundary=Polygon.from_bbox(*bbox),
                lines=None if kind is RegionType.IMAGE else tls,
            )
        )
        for j, (_, text) in enumerate(lines):
            line_texts[(rid, j)] = text

    truth = PageSegmentation(page_id=page_id, width=width, height=height, regions=tuple(regions))
    truth = assign_reading_order(truth)
    return SyntheticPage(page_id=page_id, mask=mask, truth=truth, line_texts=line_texts)


def generate_book(n_pages: int, seed: int) -> list[SyntheticPage]:
    """A varied, deterministic sequence of pages."""
    pages = []
    for i in range(n_pages):
        rng = np.random.default_rng((seed, i))
        heading = ("separate", "embedded", "none")[i % 3]
        with_initial = i % 6 == 5
        with_image = i % 3 == 2 and not with_initial
        columns = 1 if i % 5 == 3 else 2
        pages.append(
            generate_page(
                rng,
                f"p{i + 1:04d}",
                page_number=i + 1,
                columns=columns,
                heading=heading,
                with_image=with_image,
                with_initial=with_initial,
            )
        )
    return pages


def inject_noise(text: str, rate: float, rng: np.random.Generator) -> str:
    """Letter-level substitutions, deletions and insertions at an expected
    total of ``rate * len(text)`` edits; punctuation and spacing stay put so
    the edit count is a reliable accuracy oracle."""
    if rate <= 0.0:
        return text
    letters = [i for i, c in enumerate(text) if c.isalpha()]
    if not letters:
        return text
    p = min(1.0, rate * len(text) / len(letters))
    out = list(text)
    for i in reversed(letters):
        if rng.random() >= p:
            continue
        op = int(rng.integers(3))
        if op == 0:
            pool = _ALPHABET.replace(out[i].lower(), "")
            out[i] = pool[int(rng.integers(len(pool)))]
        elif op == 1:
            del out[i]
        else:
            out.insert(i + 1, _ALPHABET[int(rng.integers(26))])
    return "".join(out)


def write_book(out_dir: str | Path, pages: list[SyntheticPage], *, noise: float = 0.0, seed: int = 0) -> None:
    """Materialize a book: binary pages, truth layout, line and page texts,
    a noisy OCR twin of each page text, and an evaluation manifest."""
    out = Path(out_dir)
    for sub in ("binary", "truth", "text", "gt", "ocr"):
        (out / sub).mkdir(parents=True, exist_ok=True)

    manifest = []
    for i, page in enumerate(pages):
        save_binary(page.mask, out / "binary" / f"{page.page_id}.png")
        write_pagexml(page.truth, out / "truth" / f"{page.page_id}.xml")
        for (rid, idx), text in sorted(page.line_texts.items()):
            line_dir = out / "text" / page.page_id / rid
            line_dir.mkdir(parents=True, exist_ok=True)
            (line_dir / f"{idx:04d}.gt.txt").write_text(text + "\n", encoding="utf-8")
        gt = page.text()
        ocr = inject_noise(gt, noise, np.random.default_rng((seed, 77, i)))
        (out / "gt" / f"{page.page_id}.txt").write_text(gt + "\n", encoding="utf-8")
        (out / "ocr" / f"{page.page_id}.txt").write_text(ocr + "\n", encoding="utf-8")
        manifest.append(f"{page.page_id}\tgt/{page.page_id}.txt\tocr/{page.page_id}.txt")

    (out / "eval.tsv").write_text("\n".join(manifest) + "\n", encoding="utf-8")
    meta = {
        "noise": noise,
        "pages": [p.page_id for p in pages],
        "seed": seed,
        "size": [PAGE_WIDTH, PAGE_HEIGHT],
    }
    (out / "book.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n", encoding="utf-8")
