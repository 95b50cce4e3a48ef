"""Command line driver for the page workflow.

Subcommands cover the batch stages (preprocess, segment, extract,
assemble), the reports (evaluate, diff), the review server (serve) and the
synthetic test book (gen). Every run appends one row per stage to
``timings.tsv`` in the working directory; output trees stay timing-free so
equal inputs give byte-identical results. A failing page gets a one-line
diagnostic on stderr and a nonzero exit code, but never stops the batch.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from .config import PipelineConfig, default_config, load_config
from .evaluation import (
    accuracy_report,
    diff_segmentations,
    needs_no_corrections,
    score_region_types,
)
from .extraction import assemble_text, extract_lines, extract_regions, normalize_text
from .imaging import (
    load_binary,
    load_gray,
    remove_scan_border,
    sauvola_binarize,
    save_binary,
    save_gray,
)
from .page_model import RegionType
from .pagexml import read_pagexml, write_pagexml
from .segmentation import segment_page
from .synthetic import generate_book, write_book

log = logging.getLogger("folio")

_IMAGE_SUFFIXES = (".png", ".pgm", ".pbm")


def _append_timing(stage: str, pages: int, seconds: float) -> None:
    path = Path("timings.tsv")
    row = f"{stage}\t{pages}\t{seconds:.3f}\n"
    if path.exists():
        with path.open("a", encoding="utf-8") as fh:
            fh.write(row)
    else:
        path.write_text("stage\tpages\tseconds\n" + row, encoding="utf-8")


def _page_images(directory: Path) -> list[Path]:
    out = [p for p in directory.iterdir() if p.suffix.lower() in _IMAGE_SUFFIXES]
    return sorted(out)


def _load_pipeline_config(path: str | None) -> PipelineConfig:
    return load_config(path) if path else default_config()


def _run_pages(items, worker, jobs: int) -> tuple[dict, int]:
    """Run ``worker(task)`` per (page_id, task); isolate per-page failures.

    Returns results keyed by page id plus the failure count; each failure
    prints one diagnostic line and the batch keeps going.
    """
    results: dict = {}
    failures: list[tuple[str, str]] = []
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = [(page_id, pool.submit(worker, task)) for page_id, task in items]
            for page_id, future in futures:
                try:
                    results[page_id] = future.result()
                except Exception as exc:
                    failures.append((page_id, f"{type(exc).__name__}: {exc}"))
    else:
        for page_id, task in items:
            try:
                results[page_id] = worker(task)
            except Exception as exc:
                failures.append((page_id, f"{type(exc).__name__}: {exc}"))
    for page_id, message in sorted(failures):
        print(f"folio: page {page_id}: {message}", file=sys.stderr)
    return results, len(failures)


def _preprocess_one(task: tuple[Path, Path, PipelineConfig]) -> None:
    src, dst, cfg = task
    mask = sauvola_binarize(load_gray(src), cfg.binarize)
    save_binary(remove_scan_border(mask), dst)


def cmd_preprocess(args) -> int:
    cfg = _load_pipeline_config(args.config)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    items = [
        (src.stem, (src, out / f"{src.stem}.png", cfg))
        for src in _page_images(Path(args.scans))
    ]
    start = time.perf_counter()
    _, failed = _run_pages(items, _preprocess_one, args.jobs)
    _append_timing("preprocess", len(items), time.perf_counter() - start)
    return 1 if failed else 0


def _segment_one(task: tuple[Path, Path, PipelineConfig]) -> None:
    src, dst, cfg = task
    seg = segment_page(load_binary(src), cfg.layout, cfg.segmentation, page_id=src.stem)
    write_pagexml(seg, dst, image_filename=src.name)


def cmd_segment(args) -> int:
    cfg = _load_pipeline_config(args.config)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    items = [
        (src.stem, (src, out / f"{src.stem}.xml", cfg))
        for src in _page_images(Path(args.binary))
    ]
    start = time.perf_counter()
    _, failed = _run_pages(items, _segment_one, args.jobs)
    _append_timing("segment", len(items), time.perf_counter() - start)
    return 1 if failed else 0


def _extract_one(task: tuple[Path, Path, Path, PipelineConfig]) -> list[str]:
    xml_path, image_path, out, cfg = task
    seg = read_pagexml(xml_path, page_id=xml_path.stem)
    original = load_gray(image_path)
    rows = []
    for rid, crop in extract_regions(original, seg):
        region_dir = out / seg.page_id / rid
        region_dir.mkdir(parents=True, exist_ok=True)
        region = seg.region(rid)
        if region.kind is RegionType.IMAGE:
            save_gray(crop, region_dir / "region.png")
            continue
        for index, gray_line, bin_line in extract_lines(crop, cfg.binarize, cfg.segmentation):
            save_gray(gray_line, region_dir / f"{index:04d}.png")
            save_binary(bin_line, region_dir / f"{index:04d}.bin.png")
            rows.append(f"{seg.page_id}\t{rid}\t{index}\t{seg.page_id}/{rid}/{index:04d}.png")
    return rows


def cmd_extract(args) -> int:
    cfg = _load_pipeline_config(args.config)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    images = Path(args.images)
    items = []
    for xml_path in sorted(Path(args.pagexml).glob("*.xml")):
        image_path = next(
            (images / f"{xml_path.stem}{s}" for s in _IMAGE_SUFFIXES
             if (images / f"{xml_path.stem}{s}").exists()),
            None,
        )
        if image_path is None:
            print(f"folio: page {xml_path.stem}: no page image under {images}", file=sys.stderr)
            continue
        items.append((xml_path.stem, (xml_path, image_path, out, cfg)))
    n_missing = len(list(Path(args.pagexml).glob("*.xml"))) - len(items)
    start = time.perf_counter()
    results, failed = _run_pages(items, _extract_one, args.jobs)
    rows = [row for page_id in sorted(results) for row in results[page_id]]
    (out / "lines.tsv").write_text(
        "page\tregion\tindex\tpath\n" + "".join(r + "\n" for r in rows), encoding="utf-8"
    )
    _append_timing("extract", len(items), time.perf_counter() - start)
    return 1 if failed or n_missing else 0


def _line_texts(text_dir: Path, page_id: str) -> dict[tuple[str, int], str]:
    texts: dict[tuple[str, int], str] = {}
    page_dir = text_dir / page_id
    if not page_dir.is_dir():
        return texts
    for region_dir in sorted(p for p in page_dir.iterdir() if p.is_dir()):
        for txt in sorted(region_dir.glob("*.txt")):
            stem = txt.name.split(".", 1)[0]
            try:
                index = int(stem)
            except ValueError:
                continue
            texts[(region_dir.name, index)] = txt.read_text(encoding="utf-8").rstrip("\n")
    return texts


def _assemble_one(task: tuple[Path, Path, Path]) -> None:
    xml_path, text_dir, dst = task
    seg = read_pagexml(xml_path, page_id=xml_path.stem)
    text = assemble_text(seg, _line_texts(text_dir, seg.page_id))
    dst.write_text(normalize_text(text) + "\n", encoding="utf-8")


def cmd_assemble(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    text_dir = Path(args.text)
    items = [
        (xml_path.stem, (xml_path, text_dir, out / f"{xml_path.stem}.txt"))
        for xml_path in sorted(Path(args.pagexml).glob("*.xml"))
    ]
    start = time.perf_counter()
    _, failed = _run_pages(items, _assemble_one, 1)
    _append_timing("assemble", len(items), time.perf_counter() - start)
    return 1 if failed else 0


def cmd_evaluate(args) -> int:
    manifest = Path(args.manifest)
    base = manifest.parent
    pages = []
    failed = 0
    start = time.perf_counter()
    for line in manifest.read_text(encoding="utf-8").splitlines():
        if not line.strip():
            continue
        try:
            page_id, gt_rel, ocr_rel = line.split("\t")
            gt = (base / gt_rel).read_text(encoding="utf-8")
            ocr = (base / ocr_rel).read_text(encoding="utf-8")
            pages.append((page_id, gt, ocr))
        except Exception as exc:
            failed += 1
            name = line.split("\t", 1)[0] or "?"
            print(f"folio: page {name}: {type(exc).__name__}: {exc}", file=sys.stderr)
    if not pages:
        print("folio: no evaluable pages in manifest", file=sys.stderr)
        return 1

    report = {}
    print("kind\tlower\tmean\tupper\tpages")
    for kind in ("char", "word"):
        rep = accuracy_report(pages, kind=kind, seed=args.seed)
        print(f"{kind}\t{rep.ci_low:.4f}\t{rep.mean:.4f}\t{rep.ci_high:.4f}\t{len(rep.per_page)}")
        report[kind] = {
            "mean": rep.mean,
            "ci_low": rep.ci_low,
            "ci_high": rep.ci_high,
            "per_page": [[p, n, a] for p, n, a in rep.per_page],
        }
    Path(args.out).write_text(json.dumps(report, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    _append_timing("evaluate", len(pages), time.perf_counter() - start)
    return 1 if failed else 0


def cmd_diff(args) -> int:
    dir_a, dir_b = Path(args.a), Path(args.b)
    stems_a = {p.stem for p in dir_a.glob("*.xml")}
    stems_b = {p.stem for p in dir_b.glob("*.xml")}
    for stem in sorted(stems_a ^ stems_b):
        side = args.a if stem in stems_a else args.b
        print(f"folio: page {stem}: only present in {side}", file=sys.stderr)

    start = time.perf_counter()
    items = []
    per_page = {}
    failed = len(stems_a ^ stems_b)
    clean = 0
    for stem in sorted(stems_a & stems_b):
        try:
            truth = read_pagexml(dir_a / f"{stem}.xml", page_id=stem)
            pred = read_pagexml(dir_b / f"{stem}.xml", page_id=stem)
            diff = diff_segmentations(truth, pred)
        except Exception as exc:
            failed += 1
            print(f"folio: page {stem}: {type(exc).__name__}: {exc}", file=sys.stderr)
            continue
        items.append((truth, pred, diff))
        untouched = needs_no_corrections(truth, pred, diff)
        clean += untouched
        per_page[stem] = {
            "matched": len(diff.matched),
            "unmatched_a": list(diff.unmatched_a),
            "unmatched_b": list(diff.unmatched_b),
            "confusions": {f"{a.value}->{b.value}": n for (a, b), n in diff.type_confusions.items()},
            "needs_no_corrections": untouched,
        }
    if not items:
        print("folio: no comparable pages", file=sys.stderr)
        return 1

    scores = score_region_types(items)
    print("type\tprecision\trecall\tf1")
    for kind in RegionType:
        if kind in scores:
            s = scores[kind]
            print(f"{kind.value}\t{s.precision:.4f}\t{s.recall:.4f}\t{s.f1:.4f}")
    print(f"pages needing no corrections: {clean}/{len(items)} ({clean / len(items):.2%})")

    report = {
        "pages": per_page,
        "type_scores": {
            k.value: {"precision": s.precision, "recall": s.recall, "f1": s.f1}
            for k, s in scores.items()
        },
        "no_correction_fraction": clean / len(items),
    }
    Path(args.out).write_text(json.dumps(report, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    _append_timing("diff", len(items), time.perf_counter() - start)
    return 1 if failed else 0


def cmd_serve(args) -> int:
    import uvicorn

    from .review import PageStore
    from .service import create_app

    ui = args.ui if args.ui else "frontend/dist"
    app = create_app(args.root, ui_dir=ui if Path(ui).is_dir() else None)
    start = time.perf_counter()
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    _append_timing("serve", len(PageStore(args.root).page_ids()), time.perf_counter() - start)
    return 0


def cmd_gen(args) -> int:
    start = time.perf_counter()
    pages = generate_book(args.pages, seed=args.seed)
    write_book(args.out, pages, noise=args.noise, seed=args.seed)
    _append_timing("gen", len(pages), time.perf_counter() - start)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="folio", description="layout analysis and OCR evaluation workbench"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, config=True, jobs=True):
        if config:
            p.add_argument("--config", help="pipeline config JSON")
        if jobs:
            p.add_argument("--jobs", type=int, default=1, help="parallel page workers")

    p = sub.add_parser("preprocess", help="scans -> cleaned binary pages")
    p.add_argument("--scans", required=True, help="directory of grayscale page scans")
    p.add_argument("--out", required=True)
    common(p)
    p.set_defaults(func=cmd_preprocess)

    p = sub.add_parser("segment", help="binary pages -> PageXML")
    p.add_argument("--binary", required=True, help="directory of binary pages")
    p.add_argument("--out", required=True)
    common(p)
    p.set_defaults(func=cmd_segment)

    p = sub.add_parser("extract", help="PageXML + page images -> region and line images")
    p.add_argument("--pagexml", required=True)
    p.add_argument("--images", required=True, help="directory of original page images")
    p.add_argument("--out", required=True)
    common(p)
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("assemble", help="line texts -> normalized page text")
    p.add_argument("--pagexml", required=True)
    p.add_argument("--text", required=True, help="line text tree <page>/<region>/<index>[.gt].txt")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_assemble)

    p = sub.add_parser("evaluate", help="gt/ocr manifest -> accuracy report")
    p.add_argument("--manifest", required=True, help="TSV of page, gt path, ocr path")
    p.add_argument("--out", default="eval-report.json", help="JSON report path")
    p.add_argument("--seed", type=int, default=0, help="bootstrap seed")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("diff", help="compare two PageXML directories")
    p.add_argument("--a", required=True, help="reference PageXML directory")
    p.add_argument("--b", required=True, help="candidate PageXML directory")
    p.add_argument("--out", default="diff-report.json", help="JSON report path")
    p.set_defaults(func=cmd_diff)

    p = sub.add_parser("serve", help="run the review service")
    p.add_argument("--root", required=True, help="book directory (pagexml/, binary/)")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--ui", help="built frontend directory to mount at /ui")
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("gen", help="write a synthetic test book")
    p.add_argument("--pages", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--noise", type=float, default=0.0, help="OCR error rate for the noisy twin")
    p.set_defaults(func=cmd_gen)

    return parser


def main(argv: list[str] | None = None) -> int:
    level = os.environ.get("FOLIO_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
