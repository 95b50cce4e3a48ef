import numpy as np
import pytest

from folio.evaluation import diff_segmentations
from folio.page_model import (
    PageSegmentation,
    Polygon,
    Region,
    RegionType,
    TextLine,
    default_layout_config,
    validate,
)
from folio.pagexml import write_pagexml
from folio.segmentation import (
    SegmentationParams,
    apply_headings,
    assign_reading_order,
    coarse_segment,
    detect_headings,
    detect_lines,
    extract_initials,
    polygon_mask,
    segment_page,
    with_detected_lines,
)
from folio.synthetic import generate_book, generate_page

LAYOUT = default_layout_config()
PARAMS = SegmentationParams()


def full_width_region(w, h):
    return Region("r0001", RegionType.PARAGRAPH, Polygon.from_bbox(0, 0, w - 1, h - 1))


def glyph_row(mask, y, height, xs, width):
    for x in xs:
        mask[y : y + height, x : x + width] = True


class TestParams:
    def test_fraction_bounds(self):
        with pytest.raises(ValueError):
            SegmentationParams(image_min_area_frac=0.0)
        with pytest.raises(ValueError):
            SegmentationParams(image_density_max=1.5)
        with pytest.raises(ValueError):
            SegmentationParams(min_region_area_px=0)


class TestCoarseSegment:
    def test_blank_page_is_empty(self):
        seg = coarse_segment(np.zeros((100, 80), dtype=bool), LAYOUT, PARAMS)
        assert seg.regions == () and seg.reading_order == ()
        assert validate(seg) == []

    def test_image_plus_page_number(self):
        mask = np.zeros((800, 600), dtype=bool)
        mask[200:700, 100:500] = True           # dense block, far over 3% of page
        mask[36:44, 534:546] = True             # small blob at (0.9W, 0.05H)
        seg = coarse_segment(mask, LAYOUT, PARAMS)
        kinds = sorted(r.kind for r in seg.regions)
        assert kinds == [RegionType.IMAGE, RegionType.PAGE_NUMBER]
        image = next(r for r in seg.regions if r.kind is RegionType.IMAGE)
        assert image.bbox() == (100, 200, 499, 699)

    def test_two_column_page_yields_two_paragraphs_covering_ink(self, rng):
        page = generate_page(rng, "p1", columns=2, heading="none")
        seg = coarse_segment(page.mask, LAYOUT, PARAMS)
        paragraphs = [r for r in seg.regions if r.kind is RegionType.PARAGRAPH]
        assert len(paragraphs) == 2
        cover = np.zeros_like(page.mask)
        for r in paragraphs:
            cover |= polygon_mask(r.boundary, seg.width, seg.height)
        assert (page.mask & cover).sum() / page.mask.sum() >= 0.99

    def test_sparse_large_component_is_text_not_image(self):
        mask = np.zeros((200, 200), dtype=bool)
        mask[20:180:4, 20:180] = True  # large but only 25% dense
        seg = coarse_segment(mask, LAYOUT, PARAMS)
        assert all(r.kind is not RegionType.IMAGE for r in seg.regions)

    def test_tiny_specks_dropped(self):
        mask = np.zeros((400, 400), dtype=bool)
        mask[100:103, 100:110] = True  # 30 px, below min_region_area_px
        seg = coarse_segment(mask, LAYOUT, PARAMS)
        assert seg.regions == ()

    def test_coarse_regions_have_low_pairwise_iou(self, rng):
        for i in range(6):
            page = generate_book(6, seed=21)[i]
            seg = coarse_segment(page.mask, LAYOUT, PARAMS)
            boxes = [r.bbox() for r in seg.regions]
            for a in range(len(boxes)):
                for b in range(a + 1, len(boxes)):
                    assert _iou(boxes[a], boxes[b]) < 0.2


def _iou(a, b):
    ix0, iy0 = max(a[0], b[0]), max(a[1], b[1])
    ix1, iy1 = min(a[2], b[2]), min(a[3], b[3])
    if ix0 > ix1 or iy0 > iy1:
        return 0.0
    inter = (ix1 - ix0 + 1) * (iy1 - iy0 + 1)
    area = lambda r: (r[2] - r[0] + 1) * (r[3] - r[1] + 1)
    return inter / (area(a) + area(b) - inter)


class TestDetectLines:
    def test_three_bands(self):
        mask = np.zeros((60, 40), dtype=bool)
        for y in (10, 25, 40):
            mask[y : y + 6, 5:35] = True
        lines = detect_lines(mask, full_width_region(40, 60), PARAMS)
        assert [(l.bbox[1], l.bbox[3]) for l in lines] == [(10, 15), (25, 30), (40, 45)]
        assert [l.index for l in lines] == [0, 1, 2]
        assert all(l.bbox[0] == 5 and l.bbox[2] == 34 for l in lines)

    def test_single_band(self):
        mask = np.zeros((30, 30), dtype=bool)
        mask[12:18, 4:26] = True
        lines = detect_lines(mask, full_width_region(30, 30), PARAMS)
        assert len(lines) == 1 and lines[0].bbox == (4, 12, 25, 17)

    def test_no_ink_is_empty(self):
        assert detect_lines(np.zeros((20, 20), dtype=bool), full_width_region(20, 20), PARAMS) == []

    def test_region_polygon_restricts_ink(self):
        mask = np.zeros((40, 60), dtype=bool)
        mask[10:16, 5:55] = True
        region = Region("r0001", RegionType.PARAGRAPH, Polygon.from_bbox(0, 0, 29, 39))
        lines = detect_lines(mask, region, PARAMS)
        assert len(lines) == 1 and lines[0].bbox[2] <= 29

    def test_generator_line_counts(self, rng):
        agree = total = 0
        for i in range(40):
            page = generate_page(
                np.random.default_rng((5, i)), f"p{i}", columns=2 if i % 2 else 1,
            )
            for region in page.truth.regions:
                if region.kind is not RegionType.PARAGRAPH:
                    continue
                lines = detect_lines(page.mask, region, PARAMS)
                total += 1
                agree += len(lines) == len(region.lines)
        assert total >= 40 and agree / total >= 0.95


def heading_fixture():
    """One paragraph region: a 16px line of fat glyphs over three 8px lines."""
    mask = np.zeros((120, 100), dtype=bool)
    glyph_row(mask, 20, 16, (20, 40, 60), 16)        # area 256 per glyph
    for y in (45, 60, 75):
        glyph_row(mask, y, 8, (20, 32, 44, 56, 68), 8)  # area 64 per glyph
    region = Region("r0001", RegionType.PARAGRAPH, Polygon.from_bbox(20, 20, 76, 82))
    seg = PageSegmentation("p", 100, 120, (region,), ("r0001",))
    return mask, with_detected_lines(mask, seg, PARAMS)


class TestDetectHeadings:
    def test_uniform_lines_never_flag(self):
        mask = np.zeros((80, 100), dtype=bool)
        for y in (10, 25, 40):
            glyph_row(mask, y, 8, (20, 32, 44, 56), 8)
        region = Region("r0001", RegionType.PARAGRAPH, Polygon.from_bbox(20, 10, 64, 47))
        seg = with_detected_lines(mask, PageSegmentation("p", 100, 80, (region,), ("r0001",)), PARAMS)
        assert detect_headings(mask, seg, PARAMS) == []

    def test_tall_fat_line_flagged(self):
        mask, seg = heading_fixture()
        # hand oracle: line heights 16,8,8,8 so mean is 10; component areas
        # 3x256 and 15x64 so the page mean is 96 and the gate is 110.4
        assert detect_headings(mask, seg, PARAMS) == [("r0001", 0)]

    def test_merged_line_of_plain_glyphs_not_flagged(self):
        mask = np.zeros((120, 100), dtype=bool)
        glyph_row(mask, 20, 8, (20, 32, 44, 56), 8)
        glyph_row(mask, 30, 8, (20, 32, 44, 56), 8)   # 2px gap: merges with above
        glyph_row(mask, 50, 8, (20, 32, 44, 56), 8)
        glyph_row(mask, 65, 8, (20, 32, 44, 56), 8)
        region = Region("r0001", RegionType.PARAGRAPH, Polygon.from_bbox(20, 20, 64, 72))
        seg = with_detected_lines(mask, PageSegmentation("p", 100, 120, (region,), ("r0001",)), PARAMS)
        heights = [l.bbox[3] - l.bbox[1] + 1 for l in seg.region("r0001").lines]
        assert max(heights) >= 18  # the merge actually happened
        assert detect_headings(mask, seg, PARAMS) == []

    def test_no_paragraph_lines_flags_nothing(self):
        mask = np.zeros((60, 100), dtype=bool)
        glyph_row(mask, 10, 16, (30, 50), 16)
        region = Region("r0001", RegionType.HEADING, Polygon.from_bbox(30, 10, 66, 25))
        seg = with_detected_lines(mask, PageSegmentation("p", 100, 60, (region,), ("r0001",)), PARAMS)
        assert detect_headings(mask, seg, PARAMS) == []

    def test_threshold_monotonicity(self):
        mask, seg = heading_fixture()
        flagged = []
        for threshold in (1.01, 1.15, 1.5, 3.0):
            params = SegmentationParams(
                heading=PARAMS.heading.__class__(area_ratio_threshold=threshold)
            )
            flagged.append(set(detect_headings(mask, seg, params)))
        for small, big in zip(flagged, flagged[1:]):
            assert big <= small

    def test_generator_embedded_heading_flagged_exactly(self):
        hits = 0
        for i in range(15):
            page = generate_page(np.random.default_rng((31, i)), f"p{i}", heading="embedded")
            seg = coarse_segment(page.mask, LAYOUT, PARAMS)
            seg = with_detected_lines(page.mask, seg, PARAMS)
            flagged = detect_headings(page.mask, seg, PARAMS)
            truth_bbox = next(
                r.lines[0].bbox for r in page.truth.regions if r.kind is RegionType.HEADING
            )
            got = [seg.region(rid).lines[idx].bbox for rid, idx in flagged]
            hits += got == [truth_bbox]
        assert hits == 15


def five_line_seg():
    ys = [(10, 17), (22, 29), (34, 41), (46, 53), (58, 65)]
    lines = tuple(TextLine((10, y0, 90, y1), i) for i, (y0, y1) in enumerate(ys))
    region = Region("r0001", RegionType.PARAGRAPH, Polygon.from_bbox(10, 10, 90, 65), lines)
    return PageSegmentation("p", 100, 100, (region,), ("r0001",))


def line_extents(seg):
    out = []
    for r in seg.text_regions():
        out.extend((l.bbox[1], l.bbox[3]) for l in r.lines)
    return sorted(out)


class TestApplyHeadings:
    def test_no_flags_is_identity(self):
        seg = five_line_seg()
        assert apply_headings(seg, []) == seg

    def test_first_line_split(self):
        seg = apply_headings(five_line_seg(), [("r0001", 0)])
        kinds = [r.kind for r in seg.regions]
        assert kinds == [RegionType.HEADING, RegionType.PARAGRAPH]
        heading, para = seg.regions
        assert len(heading.lines) == 1 and len(para.lines) == 4
        assert [l.index for l in para.lines] == [0, 1, 2, 3]
        assert line_extents(seg) == line_extents(five_line_seg())
        assert validate(seg) == []

    def test_consecutive_flags_merge(self):
        seg = apply_headings(five_line_seg(), [("r0001", 0), ("r0001", 1)])
        assert [r.kind for r in seg.regions] == [RegionType.HEADING, RegionType.PARAGRAPH]
        assert len(seg.regions[0].lines) == 2

    def test_nonadjacent_flags(self):
        seg = apply_headings(five_line_seg(), [("r0001", 0), ("r0001", 2)])
        assert [r.kind for r in seg.regions] == [
            RegionType.HEADING, RegionType.PARAGRAPH, RegionType.HEADING, RegionType.PARAGRAPH,
        ]
        assert [len(r.lines) for r in seg.regions] == [1, 1, 1, 2]
        assert line_extents(seg) == line_extents(five_line_seg())

    def test_pieces_partition_region_rows(self):
        seg = apply_headings(five_line_seg(), [("r0001", 2)])
        boxes = sorted(r.bbox() for r in seg.regions)
        assert boxes[0][1] == 10 and boxes[-1][3] == 65
        for above, below in zip(boxes, boxes[1:]):
            assert below[1] == above[3] + 1

    def test_conservation_on_generator_pages(self):
        for i in range(8):
            page = generate_page(np.random.default_rng((43, i)), f"p{i}", heading="embedded")
            seg = coarse_segment(page.mask, LAYOUT, PARAMS)
            seg = with_detected_lines(page.mask, seg, PARAMS)
            flagged = detect_headings(page.mask, seg, PARAMS)
            after = apply_headings(seg, flagged)
            assert line_extents(after) == line_extents(seg)
            assert validate(after) == []


class TestExtractInitials:
    def test_generator_initial_becomes_image(self):
        page = generate_page(np.random.default_rng((57, 0)), "p", with_initial=True)
        truth_initials = [
            r.bbox() for r in page.truth.regions
            if r.kind is RegionType.IMAGE
        ]
        seg = coarse_segment(page.mask, LAYOUT, PARAMS)
        assert not any(r.kind is RegionType.IMAGE for r in seg.regions)  # too small for coarse
        seg = with_detected_lines(page.mask, seg, PARAMS)
        seg = extract_initials(page.mask, seg, PARAMS)
        found = [r.bbox() for r in seg.regions if r.kind is RegionType.IMAGE]
        assert len(found) == 1
        assert _iou(found[0], truth_initials[0]) >= 0.5
        assert validate(seg) == []

    def test_plain_paragraph_unchanged(self):
        page = generate_page(np.random.default_rng((57, 1)), "p", with_initial=False, heading="none")
        seg = with_detected_lines(page.mask, coarse_segment(page.mask, LAYOUT, PARAMS), PARAMS)
        assert extract_initials(page.mask, seg, PARAMS) == seg

    def test_clip_confined_to_initial_columns(self):
        # initial glued to the first glyph: the notch may clip that glyph,
        # but only inside the initial's bbox column band
        mask = np.zeros((140, 120), dtype=bool)
        mask[10:62, 10:40] = True                     # 52px initial
        glyph_row(mask, 10, 8, (40, 52, 64), 8)       # touches the initial
        for y in (67, 82, 97, 112):
            glyph_row(mask, y, 8, (44, 56, 68, 80), 8)
        region = Region("r0001", RegionType.PARAGRAPH, Polygon.from_bbox(10, 10, 88, 119))
        seg = PageSegmentation("p", 120, 140, (region,), ("r0001",))
        seg = with_detected_lines(mask, seg, PARAMS)
        before = polygon_mask(seg.region("r0001").boundary, 120, 140)
        out = extract_initials(mask, seg, PARAMS)
        image = next(r for r in out.regions if r.kind is RegionType.IMAGE)
        x0, y0, x1, y1 = image.bbox()
        assert (x0, y0) == (10, 10) and y1 - y0 + 1 == 52
        text_region = next(r for r in out.regions if r.kind.is_text)
        after = polygon_mask(text_region.boundary, 120, 140)
        removed = before & ~after
        ys, xs = np.nonzero(removed)
        assert xs.max() <= x1 + 1 and ys.min() >= y0 - 1 and ys.max() <= y1 + 1


class TestReadingOrder:
    def _region(self, rid, x0, y0, x1, y1, kind=RegionType.PARAGRAPH):
        return Region(rid, kind, Polygon.from_bbox(x0, y0, x1, y1))

    def _seg(self, *regions):
        return PageSegmentation("p", 200, 200, regions, ())

    def test_single_column_top_to_bottom(self):
        seg = self._seg(
            self._region("r0002", 10, 80, 90, 140),
            self._region("r0001", 10, 10, 90, 70),
            self._region("r0003", 10, 150, 90, 190),
        )
        assert assign_reading_order(seg).reading_order == ("r0001", "r0002", "r0003")

    def test_heading_above_two_columns(self):
        # column pieces are staggered, so no horizontal gap crosses the band
        # and the cut clusters by column before y
        seg = self._seg(
            self._region("r0001", 20, 10, 180, 30, RegionType.HEADING),
            self._region("r0002", 10, 40, 90, 100),
            self._region("r0003", 10, 110, 90, 190),
            self._region("r0004", 110, 40, 190, 120),
            self._region("r0005", 110, 126, 190, 190),
        )
        assert assign_reading_order(seg).reading_order == (
            "r0001", "r0002", "r0003", "r0004", "r0005",
        )

    def test_full_width_gap_splits_bands_first(self):
        seg = self._seg(
            self._region("r0002", 10, 40, 90, 100),
            self._region("r0003", 10, 110, 90, 190),
            self._region("r0004", 110, 40, 190, 100),
            self._region("r0005", 110, 110, 190, 190),
        )
        assert assign_reading_order(seg).reading_order == (
            "r0002", "r0004", "r0003", "r0005",
        )

    def test_empty_and_image_only(self):
        assert assign_reading_order(self._seg()).reading_order == ()
        seg = self._seg(self._region("r0001", 10, 10, 50, 50, RegionType.IMAGE))
        assert assign_reading_order(seg).reading_order == ()

    def test_tie_break_y_then_x_then_id(self):
        seg = self._seg(
            self._region("r0002", 100, 10, 130, 40),
            self._region("r0001", 100, 10, 130, 40),
            self._region("r0003", 60, 10, 90, 40),
        )
        # all one band; overlap identical for the twins: x0 then id decides
        order = assign_reading_order(seg).reading_order
        assert order == ("r0003", "r0001", "r0002")


class TestSegmentPage:
    def test_blank_page(self):
        seg = segment_page(np.zeros((100, 100), dtype=bool), LAYOUT, PARAMS)
        assert seg.regions == () and validate(seg) == []

    def test_full_combo_page_matches_truth(self):
        page = generate_page(
            np.random.default_rng((71, 0)), "p", columns=2, heading="separate", with_image=True,
        )
        seg = segment_page(page.mask, LAYOUT, PARAMS, page_id="p")
        diff = diff_segmentations(page.truth, seg)
        assert not diff.unmatched_a and not diff.unmatched_b
        assert not diff.type_confusions

    def test_heading_precedes_its_columns(self):
        page = generate_page(np.random.default_rng((71, 1)), "p", heading="separate")
        seg = segment_page(page.mask, LAYOUT, PARAMS, page_id="p")
        order = list(seg.reading_order)
        heading_pos = [order.index(r.id) for r in seg.regions if r.kind is RegionType.HEADING]
        para_pos = [order.index(r.id) for r in seg.regions if r.kind is RegionType.PARAGRAPH]
        assert heading_pos and para_pos and max(heading_pos) < min(para_pos)

    def test_outputs_validate_and_cover_text_ids(self):
        for i, page in enumerate(generate_book(6, seed=77)):
            seg = segment_page(page.mask, LAYOUT, PARAMS, page_id=page.page_id)
            assert validate(seg) == []
            text_ids = sorted(r.id for r in seg.text_regions())
            assert sorted(seg.reading_order) == text_ids

    def test_deterministic_pagexml(self):
        page = generate_page(np.random.default_rng((71, 2)), "p", heading="embedded")
        a = write_pagexml(segment_page(page.mask, LAYOUT, PARAMS, page_id="p"))
        b = write_pagexml(segment_page(page.mask.copy(), LAYOUT, PARAMS, page_id="p"))
        assert a == b
