"""Layout analysis and OCR evaluation workbench for early printed books."""

__version__ = "0.1.0"

from .config import PipelineConfig, default_config, load_config
from .evaluation import (
    AccuracyReport,
    SegDiff,
    accuracy_report,
    char_accuracy,
    diff_segmentations,
    word_accuracy,
)
from .extraction import assemble_text, extract_lines, extract_regions, normalize_text
from .imaging import (
    BinarizeConfig,
    ComponentStats,
    StructuringElement,
    connected_components,
    deskew,
    dilate,
    erode,
    estimate_skew,
    remove_scan_border,
    rotate,
    sauvola_binarize,
)
from .page_model import (
    HeadingRuleConfig,
    LayoutConfig,
    PageSegmentation,
    Polygon,
    Region,
    RegionType,
    TextLine,
    Violation,
    default_layout_config,
    validate,
)
from .pagexml import read_pagexml, write_pagexml
from .segmentation import SegmentationParams, segment_page

__all__ = [
    "AccuracyReport",
    "BinarizeConfig",
    "ComponentStats",
    "HeadingRuleConfig",
    "LayoutConfig",
    "PageSegmentation",
    "PipelineConfig",
    "Polygon",
    "Region",
    "RegionType",
    "SegDiff",
    "SegmentationParams",
    "StructuringElement",
    "TextLine",
    "Violation",
    "accuracy_report",
    "assemble_text",
    "char_accuracy",
    "connected_components",
    "default_config",
    "default_layout_config",
    "deskew",
    "diff_segmentations",
    "dilate",
    "erode",
    "estimate_skew",
    "extract_lines",
    "extract_regions",
    "load_config",
    "normalize_text",
    "read_pagexml",
    "remove_scan_border",
    "rotate",
    "sauvola_binarize",
    "segment_page",
    "validate",
    "word_accuracy",
    "write_pagexml",
]
