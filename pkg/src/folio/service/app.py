"""HTTP review service: pages, segmentations, edit batches, approval.

Error mapping: unknown page or region 404, stale revision token 409,
rejected or invariant-breaking edits 422.
"""

from __future__ import annotations

from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.responses import FileResponse, JSONResponse
from fastapi.staticfiles import StaticFiles

from ..errors import (
    EditRejectedError,
    InvalidSegmentationError,
    StaleRevisionError,
    UnknownPageError,
    UnknownRegionError,
)
from ..review import PageStore
from .schemas import (
    ApproveBody,
    EditBatch,
    PageInfo,
    SegmentationModel,
    StatsModel,
    segmentation_model,
    to_command,
)


def create_app(root: str | Path, ui_dir: str | Path | None = None) -> FastAPI:
    """Build the service around a page store rooted at ``root``.

    When ``ui_dir`` points at a built frontend, its static assets are
    mounted under ``/ui``.
    """
    store = PageStore(root)
    app = FastAPI(title="folio review service", version="0.1.0")

    def _error(status: int):
        def handler(request: Request, exc: Exception) -> JSONResponse:
            return JSONResponse(status_code=status, content={"detail": str(exc)})
        return handler

    app.add_exception_handler(UnknownPageError, _error(404))
    app.add_exception_handler(UnknownRegionError, _error(404))
    app.add_exception_handler(StaleRevisionError, _error(409))
    app.add_exception_handler(EditRejectedError, _error(422))

    def _invalid(request: Request, exc: InvalidSegmentationError) -> JSONResponse:
        return JSONResponse(
            status_code=422,
            content={"detail": "edit batch breaks segmentation invariants",
                     "violations": [str(v) for v in exc.violations]},
        )

    app.add_exception_handler(InvalidSegmentationError, _invalid)

    @app.get("/pages", response_model=list[PageInfo])
    def list_pages() -> list[PageInfo]:
        return [PageInfo(id=p, status=store.status(p)) for p in store.page_ids()]

    @app.get("/pages/{page_id}/image")
    def page_image(page_id: str) -> FileResponse:
        path = store.image_path(page_id)
        if path is None:
            raise UnknownPageError(f"page {page_id!r} has no raster")
        return FileResponse(path, media_type="image/png")

    @app.get("/pages/{page_id}/segmentation", response_model=SegmentationModel)
    def page_segmentation(page_id: str) -> SegmentationModel:
        revision, seg = store.segmentation(page_id)
        return segmentation_model(revision, seg)

    @app.post("/pages/{page_id}/edits", response_model=SegmentationModel)
    def post_edits(page_id: str, batch: EditBatch) -> SegmentationModel:
        commands = [to_command(m) for m in batch.commands]
        revision, seg = store.apply(page_id, commands, batch.revision)
        return segmentation_model(revision, seg)

    @app.post("/pages/{page_id}/approve", response_model=PageInfo)
    def approve(page_id: str, body: ApproveBody) -> PageInfo:
        store.approve(page_id, body.revision)
        return PageInfo(id=page_id, status="approved")

    @app.get("/stats", response_model=StatsModel)
    def stats() -> StatsModel:
        return StatsModel(**store.stats())

    if ui_dir is not None and Path(ui_dir).is_dir():
        app.mount("/ui", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app
