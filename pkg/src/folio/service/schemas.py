"""Pydantic request/response models for the review service.

Edit commands use the same wire format as the journal codec in
``folio.review``, so a journal line and a POST body are interchangeable.
"""

from __future__ import annotations

from typing import Annotated, Literal, Union

from pydantic import BaseModel, Field

from ..page_model import PageSegmentation, Region
from ..review import EditCommand, decode_command

RegionKind = Literal["image", "paragraph", "heading", "page-number"]


class PageInfo(BaseModel):
    id: str
    status: Literal["unreviewed", "approved"]


class LineModel(BaseModel):
    bbox: tuple[int, int, int, int]
    index: int


class RegionModel(BaseModel):
    id: str
    kind: RegionKind
    boundary: list[tuple[int, int]]
    lines: list[LineModel] | None = None


class SegmentationModel(BaseModel):
    page_id: str
    width: int
    height: int
    revision: int
    regions: list[RegionModel]
    reading_order: list[str]


class DeleteRegionModel(BaseModel):
    op: Literal["delete_region"]
    region_id: str


class SplitRegionModel(BaseModel):
    op: Literal["split_region"]
    region_id: str
    y: int


class ChangeTypeModel(BaseModel):
    op: Literal["change_type"]
    region_id: str
    kind: RegionKind


class SetReadingOrderModel(BaseModel):
    op: Literal["set_reading_order"]
    order: list[str]


class MergeRegionsModel(BaseModel):
    op: Literal["merge_regions"]
    region_id: str
    other_id: str


EditModel = Annotated[
    Union[
        DeleteRegionModel,
        SplitRegionModel,
        ChangeTypeModel,
        SetReadingOrderModel,
        MergeRegionsModel,
    ],
    Field(discriminator="op"),
]


class EditBatch(BaseModel):
    revision: int
    commands: list[EditModel] = Field(min_length=1)


class ApproveBody(BaseModel):
    revision: int


class StatsModel(BaseModel):
    pages: int
    approved: int
    edited: int
    edits_by_type: dict[str, int]


def to_command(model: EditModel) -> EditCommand:
    return decode_command(model.model_dump())


def region_model(region: Region) -> RegionModel:
    lines = None
    if region.kind.is_text:
        lines = [LineModel(bbox=l.bbox, index=l.index) for l in region.lines or ()]
    return RegionModel(
        id=region.id,
        kind=region.kind.value,
        boundary=list(region.boundary.points),
        lines=lines,
    )


def segmentation_model(revision: int, seg: PageSegmentation) -> SegmentationModel:
    return SegmentationModel(
        page_id=seg.page_id,
        width=seg.width,
        height=seg.height,
        revision=revision,
        regions=[region_model(r) for r in seg.regions],
        reading_order=list(seg.reading_order),
    )
