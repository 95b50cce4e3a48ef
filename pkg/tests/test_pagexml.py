import logging
from collections import Counter

import numpy as np
import pytest

from folio.errors import InvalidSegmentationError, PageXmlParseError, PageXmlSchemaError
from folio.page_model import PageSegmentation, Polygon, Region, RegionType, TextLine
from folio.pagexml import read_pagexml, write_pagexml

from conftest import random_segmentation


def one_paragraph_seg():
    region = Region(
        "r0001", RegionType.PARAGRAPH, Polygon.from_bbox(10, 10, 90, 50),
        (TextLine((12, 14, 88, 30), 0), TextLine((12, 34, 88, 46), 1)),
    )
    return PageSegmentation("p0001", 100, 60, (region,), ("r0001",))


def doc(body, width=200, height=100):
    return (
        '<?xml version="1.0"?><PcGts><Page imageFilename="p.png" '
        f'imageWidth="{width}" imageHeight="{height}">{body}</Page></PcGts>'
    )


REGION_A = (
    '<TextRegion id="r0001" type="paragraph">'
    '<Coords points="10,10 90,10 90,40 10,40"/></TextRegion>'
)
REGION_B = (
    '<TextRegion id="r0002" type="heading">'
    '<Coords points="10,50 90,50 90,80 10,80"/></TextRegion>'
)
ORDER_AB = (
    "<ReadingOrder><OrderedGroup id=\"g\">"
    '<RegionRefIndexed index="0" regionRef="r0001"/>'
    '<RegionRefIndexed index="1" regionRef="r0002"/>'
    "</OrderedGroup></ReadingOrder>"
)


class TestWrite:
    def test_one_paragraph_document(self):
        text = write_pagexml(one_paragraph_seg())
        assert 'http://schema.primaresearch.org/PAGE/gts/pagecontent/2013-07-15' in text
        assert text.count("<TextRegion") == 1
        assert 'type="paragraph"' in text
        assert '<RegionRefIndexed index="0" regionRef="r0001"' in text
        assert text.count("<TextLine") == 2

    def test_empty_page(self):
        text = write_pagexml(PageSegmentation("blank", 40, 40, (), ()))
        assert "<Page" in text
        assert "Region" not in text.replace("RegionRefIndexed", "")
        assert "ReadingOrder" not in text

    def test_invalid_segmentation_rejected(self):
        seg = PageSegmentation("p", 100, 60, one_paragraph_seg().regions, ())
        with pytest.raises(InvalidSegmentationError) as err:
            write_pagexml(seg)
        assert "r0001" in str(err.value)

    def test_deterministic_bytes(self):
        assert write_pagexml(one_paragraph_seg()) == write_pagexml(one_paragraph_seg())

    def test_image_filename_attribute(self):
        text = write_pagexml(one_paragraph_seg(), image_filename="scan_0007.png")
        assert 'imageFilename="scan_0007.png"' in text

    def test_write_to_file(self, tmp_path):
        out = tmp_path / "p0001.xml"
        text = write_pagexml(one_paragraph_seg(), target=out)
        assert out.read_text(encoding="utf-8") == text


class TestRead:
    def test_three_point_coords(self):
        seg = read_pagexml(doc(
            '<TextRegion id="r0001" type="paragraph">'
            '<Coords points="10,10 20,10 20,20"/></TextRegion>'
            '<ReadingOrder><OrderedGroup id="g">'
            '<RegionRefIndexed index="0" regionRef="r0001"/>'
            "</OrderedGroup></ReadingOrder>"
        ))
        assert len(seg.regions) == 1
        assert seg.regions[0].boundary.points == ((10.0, 10.0), (20.0, 10.0), (20.0, 20.0))

    def test_unknown_type_degrades_to_paragraph(self, caplog):
        body = REGION_A.replace('type="paragraph"', 'type="marginalia"') + ORDER_AB.replace(
            '<RegionRefIndexed index="1" regionRef="r0002"/>', ""
        )
        with caplog.at_level(logging.WARNING, logger="folio.pagexml"):
            seg = read_pagexml(doc(body))
        assert seg.regions[0].kind is RegionType.PARAGRAPH
        assert "marginalia" in caplog.text

    def test_text_region_typed_image_degrades(self, caplog):
        body = REGION_A.replace('type="paragraph"', 'type="image"') + ORDER_AB.replace(
            '<RegionRefIndexed index="1" regionRef="r0002"/>', ""
        )
        with caplog.at_level(logging.WARNING, logger="folio.pagexml"):
            seg = read_pagexml(doc(body))
        assert seg.regions[0].kind is RegionType.PARAGRAPH

    def test_missing_reading_order_reconstructed(self, caplog):
        with caplog.at_level(logging.WARNING, logger="folio.pagexml"):
            seg = read_pagexml(doc(REGION_A + REGION_B))
        assert seg.reading_order == ("r0001", "r0002")
        assert "reconstructing" in caplog.text

    def test_unknown_order_refs_dropped(self, caplog):
        body = REGION_A + ORDER_AB.replace("r0002", "r9999")
        with caplog.at_level(logging.WARNING, logger="folio.pagexml"):
            seg = read_pagexml(doc(body))
        assert seg.reading_order == ("r0001",)
        assert "dropping" in caplog.text

    def test_unsupported_elements_ignored(self, caplog):
        body = REGION_A + '<GraphicRegion id="g1"><Coords points="1,1 2,2"/></GraphicRegion>' + \
            ORDER_AB.replace('<RegionRefIndexed index="1" regionRef="r0002"/>', "")
        with caplog.at_level(logging.WARNING, logger="folio.pagexml"):
            seg = read_pagexml(doc(body))
        assert [r.id for r in seg.regions] == ["r0001"]
        assert "GraphicRegion" in caplog.text

    def test_page_id_from_filename_or_argument(self):
        text = doc(REGION_A + ORDER_AB.replace(
            '<RegionRefIndexed index="1" regionRef="r0002"/>', ""
        ))
        assert read_pagexml(text).page_id == "p"
        assert read_pagexml(text, page_id="override").page_id == "override"

    def test_reads_from_path(self, tmp_path):
        path = tmp_path / "p0001.xml"
        write_pagexml(one_paragraph_seg(), target=path)
        assert read_pagexml(path) == one_paragraph_seg()
        assert read_pagexml(str(path)) == one_paragraph_seg()

    def test_malformed_xml(self):
        with pytest.raises(PageXmlParseError):
            read_pagexml("<PcGts><Page></PcGts>")

    def test_no_page_element(self):
        with pytest.raises(PageXmlSchemaError):
            read_pagexml("<PcGts><Metadata/></PcGts>")

    def test_bad_page_dimensions(self):
        with pytest.raises(PageXmlSchemaError):
            read_pagexml('<PcGts><Page imageFilename="p.png"/></PcGts>')

    def test_bad_coordinate_pair(self):
        bad = REGION_A.replace("10,10 90,10 90,40 10,40", "10,10 90")
        with pytest.raises(PageXmlSchemaError):
            read_pagexml(doc(bad))

    def test_missing_coords(self):
        with pytest.raises(PageXmlSchemaError):
            read_pagexml(doc('<TextRegion id="r0001" type="paragraph"/>'))


def figure_layout_seg():
    kinds = [
        RegionType.HEADING, RegionType.HEADING, RegionType.HEADING,
        RegionType.PARAGRAPH, RegionType.PARAGRAPH, RegionType.PARAGRAPH, RegionType.PARAGRAPH,
        RegionType.IMAGE, RegionType.IMAGE,
        RegionType.PAGE_NUMBER,
    ]
    regions = []
    for i, kind in enumerate(kinds):
        y0 = 20 + 95 * i
        box = Polygon.from_bbox(30, y0, 470, y0 + 60)
        lines = None if kind is RegionType.IMAGE else (TextLine((35, y0 + 5, 465, y0 + 25), 0),)
        regions.append(Region(f"r{i + 1:04d}", kind, box, lines))
    order = tuple(r.id for r in regions if r.kind.is_text)
    return PageSegmentation("fig", 500, 1000, tuple(regions), order)


class TestRoundTrip:
    def test_figure_layout_counts_survive(self):
        back = read_pagexml(write_pagexml(figure_layout_seg()))
        counts = Counter(r.kind for r in back.regions)
        assert counts == {
            RegionType.HEADING: 3, RegionType.PARAGRAPH: 4,
            RegionType.IMAGE: 2, RegionType.PAGE_NUMBER: 1,
        }
        assert back == figure_layout_seg()

    def test_structural_identity_on_random_pages(self, rng):
        for i in range(40):
            seg = random_segmentation(np.random.default_rng((311, i)), f"p{i:04d}")
            assert read_pagexml(write_pagexml(seg)) == seg

    def test_write_read_write_fixpoint(self):
        for i in range(25):
            seg = random_segmentation(np.random.default_rng((313, i)), f"p{i:04d}")
            first = write_pagexml(seg)
            second = write_pagexml(read_pagexml(first))
            assert first == second
