"""OCR accuracy metrics and segmentation comparison.

Character accuracy follows the ISRI convention (may go negative when the
recognized text is much longer than the truth); word accuracy is the share
of ground-truth words recovered in order. Confidence intervals come from a
seeded percentile bootstrap over pages, so reports are reproducible.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

from .errors import (
    DimensionMismatchError,
    EmptyGroundTruthError,
    NoWordsError,
    TooFewPagesError,
)
from .extraction import normalize_text
from .page_model import PageSegmentation, RegionType

_WORD = re.compile(r"[^\W\d_]+")

N_RESAMPLES = 10_000


@dataclass(frozen=True)
class AccuracyReport:
    mean: float
    ci_low: float
    ci_high: float
    per_page: tuple[tuple[str, int, float], ...]  # (page_id, weight, accuracy)

    def __post_init__(self):
        if not self.per_page:
            raise ValueError("per_page must not be empty")
        if not self.ci_low <= self.mean <= self.ci_high:
            raise ValueError("confidence interval must bracket the mean")


@dataclass(frozen=True)
class SegDiff:
    matched: tuple[tuple[str, str], ...]          # (a region id, b region id)
    type_confusions: dict[tuple[RegionType, RegionType], int]
    unmatched_a: tuple[str, ...]
    unmatched_b: tuple[str, ...]


def levenshtein(a: str, b: str) -> int:
    """Unit-cost edit distance over Unicode code points."""
    if not a:
        return len(b)
    if not b:
        return len(a)
    bv = np.array([ord(c) for c in b], dtype=np.int64)
    offsets = np.arange(len(b) + 1)
    prev = offsets.copy()
    full = np.empty(len(b) + 1, dtype=np.int64)
    for i, ch in enumerate(a):
        full[0] = i + 1
        np.minimum(prev[:-1] + (bv != ord(ch)), prev[1:] + 1, out=full[1:])
        # fold in insertions: cost[j] = min over k <= j of full[k] + (j - k)
        prev = offsets + np.minimum.accumulate(full - offsets)
    return int(prev[-1])


def char_accuracy(gt: str, ocr: str) -> float:
    """(len(gt) - edit_distance) / len(gt), after punctuation normalization."""
    gt = normalize_text(gt)
    ocr = normalize_text(ocr)
    if not gt:
        raise EmptyGroundTruthError("ground truth is empty")
    return (len(gt) - levenshtein(gt, ocr)) / len(gt)


def words(s: str) -> list[str]:
    return [w.casefold() for w in _WORD.findall(s)]


def _lcs_len(a: list[str], b: list[str]) -> int:
    if not a or not b:
        return 0
    prev = [0] * (len(b) + 1)
    for x in a:
        cur = [0] * (len(b) + 1)
        for j, y in enumerate(b, start=1):
            cur[j] = prev[j - 1] + 1 if x == y else max(prev[j], cur[j - 1])
        prev = cur
    return prev[-1]


def word_accuracy(gt: str, ocr: str) -> float:
    """Fraction of ground-truth words recovered in sequence (LCS based)."""
    gt_words = words(normalize_text(gt))
    if not gt_words:
        raise NoWordsError("ground truth contains no words")
    return _lcs_len(gt_words, words(normalize_text(ocr))) / len(gt_words)


def pooled_mean(per_page: list[tuple[float, float]]) -> float:
    weights = np.array([w for w, _ in per_page], dtype=np.float64)
    accs = np.array([a for _, a in per_page], dtype=np.float64)
    return float((weights * accs).sum() / weights.sum())


def confidence_interval(
    per_page: list[tuple[float, float]], level: float = 0.95, seed: int = 0
) -> tuple[float, float]:
    """Percentile bootstrap over pages of the weighted pooled accuracy.

    The interval is widened, if needed, to include the point estimate so a
    report is always self-consistent.
    """
    if len(per_page) < 2:
        raise TooFewPagesError("confidence interval needs at least 2 pages")
    weights = np.array([w for w, _ in per_page], dtype=np.float64)
    accs = np.array([a for _, a in per_page], dtype=np.float64)
    rng = np.random.default_rng(seed)
    idx = rng.integers(0, len(per_page), size=(N_RESAMPLES, len(per_page)))
    w = weights[idx]
    pooled = (w * accs[idx]).sum(axis=1) / w.sum(axis=1)
    tail = 100.0 * (1.0 - level) / 2.0
    low, high = np.percentile(pooled, [tail, 100.0 - tail])
    mean = pooled_mean(per_page)
    return min(float(low), mean), max(float(high), mean)


def accuracy_report(
    pages: list[tuple[str, str, str]], kind: str = "char", seed: int = 0
) -> AccuracyReport:
    """Per-page and pooled accuracy for (page_id, gt_text, ocr_text) triples."""
    score = char_accuracy if kind == "char" else word_accuracy
    per_page = []
    for page_id, gt, ocr in pages:
        weight = len(normalize_text(gt)) if kind == "char" else len(words(normalize_text(gt)))
        per_page.append((page_id, weight, score(gt, ocr)))
    mean = pooled_mean([(w, a) for _, w, a in per_page])
    if len(per_page) >= 2:
        low, high = confidence_interval([(w, a) for _, w, a in per_page], seed=seed)
    else:
        low = high = mean
    return AccuracyReport(mean=mean, ci_low=low, ci_high=high, per_page=tuple(per_page))


def _bbox_iou(a: tuple[int, int, int, int], b: tuple[int, int, int, int]) -> float:
    ix0, iy0 = max(a[0], b[0]), max(a[1], b[1])
    ix1, iy1 = min(a[2], b[2]), min(a[3], b[3])
    if ix1 < ix0 or iy1 < iy0:
        return 0.0
    inter = (ix1 - ix0 + 1) * (iy1 - iy0 + 1)
    area_a = (a[2] - a[0] + 1) * (a[3] - a[1] + 1)
    area_b = (b[2] - b[0] + 1) * (b[3] - b[1] + 1)
    return inter / float(area_a + area_b - inter)


def diff_segmentations(a: PageSegmentation, b: PageSegmentation, iou_min: float = 0.5) -> SegDiff:
    """Greedy max-IoU bbox matching; matched pairs with differing types are
    recorded as confusions."""
    if (a.width, a.height) != (b.width, b.height):
        raise DimensionMismatchError(
            f"page sizes differ: {a.width}x{a.height} vs {b.width}x{b.height}"
        )
    candidates = []
    for ra in a.regions:
        for rb in b.regions:
            iou = _bbox_iou(ra.bbox(), rb.bbox())
            if iou >= iou_min:
                candidates.append((-iou, ra.id, rb.id))
    candidates.sort()

    matched = []
    used_a: set[str] = set()
    used_b: set[str] = set()
    confusions: dict[tuple[RegionType, RegionType], int] = {}
    for _, aid, bid in candidates:
        if aid in used_a or bid in used_b:
            continue
        used_a.add(aid)
        used_b.add(bid)
        matched.append((aid, bid))
        ka, kb = a.region(aid).kind, b.region(bid).kind
        if ka is not kb:
            confusions[(ka, kb)] = confusions.get((ka, kb), 0) + 1
    return SegDiff(
        matched=tuple(matched),
        type_confusions=confusions,
        unmatched_a=tuple(r.id for r in a.regions if r.id not in used_a),
        unmatched_b=tuple(r.id for r in b.regions if r.id not in used_b),
    )


@dataclass(frozen=True)
class TypeScore:
    tp: int
    fp: int
    fn: int

    @property
    def precision(self) -> float:
        return self.tp / (self.tp + self.fp) if self.tp + self.fp else 1.0

    @property
    def recall(self) -> float:
        return self.tp / (self.tp + self.fn) if self.tp + self.fn else 1.0

    @property
    def f1(self) -> float:
        p, r = self.precision, self.recall
        return 2 * p * r / (p + r) if p + r else 0.0


def score_region_types(
    items: list[tuple[PageSegmentation, PageSegmentation, SegDiff]],
) -> dict[RegionType, TypeScore]:
    """Per-type precision/recall/F1, truth first in each (truth, pred, diff)."""
    tp: dict[RegionType, int] = {}
    fp: dict[RegionType, int] = {}
    fn: dict[RegionType, int] = {}
    for truth, pred, diff in items:
        for tid, pid in diff.matched:
            kt, kp = truth.region(tid).kind, pred.region(pid).kind
            if kt is kp:
                tp[kt] = tp.get(kt, 0) + 1
            else:
                fn[kt] = fn.get(kt, 0) + 1
                fp[kp] = fp.get(kp, 0) + 1
        for tid in diff.unmatched_a:
            kt = truth.region(tid).kind
            fn[kt] = fn.get(kt, 0) + 1
        for pid in diff.unmatched_b:
            kp = pred.region(pid).kind
            fp[kp] = fp.get(kp, 0) + 1
    out = {}
    for kind in RegionType:
        if kind in tp or kind in fp or kind in fn:
            out[kind] = TypeScore(tp.get(kind, 0), fp.get(kind, 0), fn.get(kind, 0))
    return out


def needs_no_corrections(truth: PageSegmentation, pred: PageSegmentation, diff: SegDiff) -> bool:
    """True when the prediction could be approved as-is: every region matches
    with the right type and the reading order maps onto the truth order."""
    if diff.unmatched_a or diff.unmatched_b or diff.type_confusions:
        return False
    to_truth = {pid: tid for tid, pid in diff.matched}
    mapped = tuple(to_truth.get(pid, "?") for pid in pred.reading_order)
    return mapped == truth.reading_order
