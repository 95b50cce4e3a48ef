import numpy as np
import pytest

from folio.evaluation import char_accuracy
from folio.page_model import RegionType, validate
from folio.synthetic import (
    generate_book,
    generate_page,
    inject_noise,
    roman,
    write_book,
)


class TestRoman:
    @pytest.mark.parametrize(
        "n,expect",
        [(1, "i"), (4, "iv"), (9, "ix"), (14, "xiv"), (42, "xlii"), (1488, "mcdlxxxviii")],
    )
    def test_values(self, n, expect):
        assert roman(n) == expect


MODES = [
    dict(columns=1, heading="none"),
    dict(columns=2, heading="none"),
    dict(columns=2, heading="separate"),
    dict(columns=2, heading="embedded"),
    dict(columns=2, heading="none", with_image=True),
    dict(columns=2, heading="separate", with_initial=True),
    dict(columns=1, heading="embedded", merged_gap_line=True),
]


class TestGeneratePage:
    @pytest.mark.parametrize("kwargs", MODES)
    def test_truth_validates(self, kwargs):
        page = generate_page(np.random.default_rng(1), "p", **kwargs)
        assert validate(page.truth) == []
        assert page.mask.any()

    def test_deterministic(self):
        a = generate_page(np.random.default_rng((9, 9)), "p", heading="separate")
        b = generate_page(np.random.default_rng((9, 9)), "p", heading="separate")
        assert np.array_equal(a.mask, b.mask)
        assert a.truth == b.truth and a.line_texts == b.line_texts

    def test_bad_heading_mode(self):
        with pytest.raises(ValueError):
            generate_page(np.random.default_rng(1), "p", heading="huge")

    def test_ink_stays_inside_region_boxes(self):
        page = generate_page(np.random.default_rng(2), "p", columns=2, with_image=True)
        cover = np.zeros_like(page.mask)
        for region in page.truth.regions:
            x0, y0, x1, y1 = region.bbox()
            cover[y0 : y1 + 1, x0 : x1 + 1] = True
        assert not (page.mask & ~cover).any()

    def test_line_texts_cover_every_line(self):
        page = generate_page(np.random.default_rng(3), "p", heading="embedded")
        expected = {
            (r.id, l.index) for r in page.truth.text_regions() for l in r.lines
        }
        assert set(page.line_texts) == expected
        assert all(text for text in page.line_texts.values())

    def test_page_number_first_heading_before_paragraphs(self):
        page = generate_page(np.random.default_rng(4), "p", heading="separate")
        order = list(page.truth.reading_order)
        kinds = {r.id: r.kind for r in page.truth.regions}
        assert kinds[order[0]] is RegionType.PAGE_NUMBER
        h = [i for i, rid in enumerate(order) if kinds[rid] is RegionType.HEADING]
        p = [i for i, rid in enumerate(order) if kinds[rid] is RegionType.PARAGRAPH]
        assert h and p and max(h) < min(p)

    def test_text_assembles_nonempty(self):
        page = generate_page(np.random.default_rng(5), "p")
        text = page.text()
        assert text and "\n\n" in text


class TestGenerateBook:
    def test_deterministic_and_varied(self):
        a = generate_book(8, seed=13)
        b = generate_book(8, seed=13)
        assert [p.page_id for p in a] == [f"p{i:04d}" for i in range(1, 9)]
        for pa, pb in zip(a, b):
            assert np.array_equal(pa.mask, pb.mask) and pa.truth == pb.truth
        kinds = {r.kind for p in a for r in p.truth.regions}
        assert kinds == set(RegionType)

    def test_seeds_differ(self):
        a = generate_book(2, seed=13)
        b = generate_book(2, seed=14)
        assert not np.array_equal(a[0].mask, b[0].mask)


class TestInjectNoise:
    def test_zero_rate_is_identity(self):
        assert inject_noise("von der marter gnad", 0.0, np.random.default_rng(1)) == \
            "von der marter gnad"

    def test_no_letters_is_identity(self):
        assert inject_noise("... 123 !", 0.5, np.random.default_rng(1)) == "... 123 !"

    def test_deterministic(self):
        text = "got herre frawe kind " * 20
        assert inject_noise(text, 0.1, np.random.default_rng(7)) == \
            inject_noise(text, 0.1, np.random.default_rng(7))

    def test_edit_rate_matches_accuracy(self):
        text = "\n".join(generate_page(np.random.default_rng(11), "p").text() for _ in range(2))
        assert len(text) > 2000
        noisy = inject_noise(text, 0.03, np.random.default_rng(12))
        acc = char_accuracy(text, noisy)
        assert abs(acc - 0.97) <= 0.012


class TestWriteBook:
    def test_tree_layout(self, tmp_path):
        pages = generate_book(3, seed=5)
        write_book(tmp_path, pages, noise=0.02, seed=5)
        for sub in ("binary", "truth", "text", "gt", "ocr"):
            assert (tmp_path / sub).is_dir()
        assert len(list((tmp_path / "binary").glob("*.png"))) == 3
        assert len(list((tmp_path / "truth").glob("*.xml"))) == 3
        manifest = (tmp_path / "eval.tsv").read_text().splitlines()
        assert manifest[0] == "p0001\tgt/p0001.txt\tocr/p0001.txt"
        assert len(manifest) == 3
        gt = (tmp_path / "gt" / "p0001.txt").read_text(encoding="utf-8")
        assert gt == pages[0].text() + "\n"
        line_files = sorted((tmp_path / "text" / "p0001").rglob("*.gt.txt"))
        assert len(line_files) == sum(
            len(r.lines) for r in pages[0].truth.text_regions()
        )
        assert "book.json" in {p.name for p in tmp_path.iterdir()}

    def test_byte_identical_reruns(self, tmp_path):
        for name in ("a", "b"):
            write_book(tmp_path / name, generate_book(2, seed=6), noise=0.03, seed=6)
        for rel in ("eval.tsv", "book.json", "binary/p0001.png", "truth/p0002.xml",
                    "ocr/p0001.txt"):
            assert (tmp_path / "a" / rel).read_bytes() == (tmp_path / "b" / rel).read_bytes()
