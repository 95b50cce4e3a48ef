"""Load pipeline parameters from a single JSON config file.

One file carries the binarization, layout-rule and segmentation sections;
every key is optional and falls back to the built-in defaults. The format
is described by ``layout-config.schema.json`` shipped with the package.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import jsonschema

from .imaging import BinarizeConfig
from .page_model import (
    HeadingRuleConfig,
    LayoutConfig,
    RegionType,
    TypeRule,
    default_layout_config,
)
from .segmentation import SegmentationParams


@dataclass(frozen=True)
class PipelineConfig:
    binarize: BinarizeConfig
    layout: LayoutConfig
    segmentation: SegmentationParams


def default_config() -> PipelineConfig:
    return PipelineConfig(
        binarize=BinarizeConfig(),
        layout=default_layout_config(),
        segmentation=SegmentationParams(),
    )


def _schema() -> dict:
    text = resources.files("folio").joinpath("layout-config.schema.json").read_text("utf-8")
    return json.loads(text)


def load_config(path: str | Path) -> PipelineConfig:
    """Parse and validate a config file; unknown keys are rejected."""
    raw = json.loads(Path(path).read_text("utf-8"))
    jsonschema.validate(raw, _schema())
    return config_from_dict(raw)


def config_from_dict(raw: dict) -> PipelineConfig:
    base = default_config()

    bin_raw = raw.get("binarize", {})
    binarize = BinarizeConfig(
        window=bin_raw.get("window", base.binarize.window),
        k=bin_raw.get("k", base.binarize.k),
        r=bin_raw.get("r", base.binarize.r),
    )

    layout_raw = raw.get("layout", {})
    rules = dict(base.layout.rules)
    for kind in RegionType:
        section = layout_raw.get(kind.value)
        if section is None:
            continue
        prev = rules[kind]
        rules[kind] = TypeRule(
            zone=tuple(section.get("zone", prev.zone)),
            min_area_frac=section.get("min_area_frac", prev.min_area_frac),
            max_area_frac=section.get("max_area_frac", prev.max_area_frac),
        )
    layout = LayoutConfig(rules=rules)

    seg_raw = raw.get("segmentation", {})
    head_raw = seg_raw.get("heading", {})
    base_seg = base.segmentation
    heading = HeadingRuleConfig(
        area_ratio_threshold=head_raw.get("area_ratio_threshold", base_seg.heading.area_ratio_threshold),
        require_height_above_mean=head_raw.get("require_height_above_mean", base_seg.heading.require_height_above_mean),
    )
    segmentation = SegmentationParams(
        text_merge_se=seg_raw.get("text_merge_se", base_seg.text_merge_se),
        image_min_area_frac=seg_raw.get("image_min_area_frac", base_seg.image_min_area_frac),
        image_density_max=seg_raw.get("image_density_max", base_seg.image_density_max),
        min_region_area_px=seg_raw.get("min_region_area_px", base_seg.min_region_area_px),
        line_valley_frac=seg_raw.get("line_valley_frac", base_seg.line_valley_frac),
        heading=heading,
        initial_span_lines=seg_raw.get("initial_span_lines", base_seg.initial_span_lines),
    )

    return PipelineConfig(binarize=binarize, layout=layout, segmentation=segmentation)
