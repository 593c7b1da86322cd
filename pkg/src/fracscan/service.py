"""HTTP service backing the annotation UI.

Serves processed artifacts (images, contours, region cuts, dendrograms) and
accepts labelling mutations: selection rectangles, deselections and cluster
cuts.  All writes go through the LabelStore's single writer lock and every
response reflects persisted state, so a browser refresh always reproduces the
same labels.
"""

from __future__ import annotations

import json
from pathlib import Path

from fastapi import FastAPI, HTTPException, Request
from fastapi.responses import FileResponse, JSONResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from .clustering import cut, cut_to_dict, dendrogram_from_dict
from .dataset import LabelStore
from .errors import InvalidSelectionError
from .pipeline import load_contours_json


class SelectionBody(BaseModel):
    x0: float
    y0: float
    x1: float
    y1: float
    version: int | None = None


class DeselectBody(BaseModel):
    contour_id: int
    reselect: bool = False
    version: int | None = None


class CutBody(BaseModel):
    threshold: float
    version: int | None = None


def create_app(artifacts_dir: str | Path, token: str | None = None) -> FastAPI:
    root = Path(artifacts_dir)
    store = LabelStore(root / "labels")
    app = FastAPI(title="fracscan annotator")

    def _artifact(kind: str, image_id: str, suffix: str = ".json") -> Path:
        path = root / kind / f"{image_id}{suffix}"
        if not path.exists():
            if not (root / "images" / f"{image_id}.png").exists():
                raise HTTPException(status_code=404, detail=f"unknown image '{image_id}'")
            raise HTTPException(status_code=409, detail=f"missing artifact: run the '{kind}' stage first")
        return path

    def _contours(image_id: str):
        return load_contours_json(_artifact("contours", image_id))

    def _check_version(doc, version: int | None) -> None:
        if version is not None and version != doc.version:
            raise HTTPException(status_code=409, detail=f"stale version {version}, current is {doc.version}; retry")

    def _labels_response(image_id: str) -> dict:
        doc = store.load(image_id)
        doc.recompute_labels(_contours(image_id))
        return doc.to_dict()

    @app.middleware("http")
    async def check_token(request: Request, call_next):
        if token is not None and request.url.path.startswith("/images"):
            if request.headers.get("x-auth-token") != token:
                return JSONResponse(status_code=401, content={"detail": "missing or wrong token"})
        return await call_next(request)

    @app.get("/images")
    def list_images():
        images_dir = root / "images"
        ids = sorted(p.stem for p in images_dir.glob("*.png")) if images_dir.exists() else []
        return {"images": ids}

    @app.get("/images/{image_id}")
    def get_image(image_id: str):
        path = root / "images" / f"{image_id}.png"
        if not path.exists():
            raise HTTPException(status_code=404, detail=f"unknown image '{image_id}'")
        return FileResponse(path, media_type="image/png")

    @app.get("/images/{image_id}/contours")
    def get_contours(image_id: str):
        return json.loads(_artifact("contours", image_id).read_text())

    @app.get("/images/{image_id}/regions")
    def get_regions(image_id: str):
        return json.loads(_artifact("regions", image_id).read_text())

    @app.get("/images/{image_id}/dendrogram")
    def get_dendrogram(image_id: str):
        return json.loads(_artifact("dendrograms", image_id).read_text())

    @app.get("/images/{image_id}/labels")
    def get_labels(image_id: str):
        return _labels_response(image_id)

    @app.post("/images/{image_id}/selections")
    def add_selection(image_id: str, body: SelectionBody):
        contours = _contours(image_id)

        def apply(doc):
            _check_version(doc, body.version)
            rect = (body.x0, body.y0, body.x1, body.y1)
            if not (body.x0 < body.x1 and body.y0 < body.y1):
                raise HTTPException(status_code=400, detail=f"malformed rectangle {rect}")
            doc.add_rect(rect)
            doc.recompute_labels(contours)

        return store.mutate(image_id, apply).to_dict()

    @app.delete("/images/{image_id}/selections/{index}")
    def remove_selection(image_id: str, index: int):
        contours = _contours(image_id)

        def apply(doc):
            try:
                doc.remove_rect(index)
            except InvalidSelectionError as exc:
                raise HTTPException(status_code=404, detail=str(exc)) from exc
            doc.recompute_labels(contours)

        return store.mutate(image_id, apply).to_dict()

    @app.post("/images/{image_id}/deselect")
    def deselect(image_id: str, body: DeselectBody):
        contours = _contours(image_id)
        if not (0 <= body.contour_id < len(contours)):
            raise HTTPException(status_code=404, detail=f"no contour {body.contour_id}")

        def apply(doc):
            _check_version(doc, body.version)
            if body.reselect:
                doc.reselect(body.contour_id)
            else:
                doc.deselect(body.contour_id)
            doc.recompute_labels(contours)

        return store.mutate(image_id, apply).to_dict()

    @app.post("/images/{image_id}/cut")
    def set_cut(image_id: str, body: CutBody):
        doc_path = _artifact("dendrograms", image_id)
        dendro_doc = json.loads(doc_path.read_text())
        if body.threshold < 0:
            raise HTTPException(status_code=400, detail="threshold must be >= 0")

        def apply(doc):
            _check_version(doc, body.version)
            doc.set_cut(body.threshold)

        store.mutate(image_id, apply)
        if len(dendro_doc.get("leaves", [])) < 2:
            leaves = dendro_doc.get("leaves", [])
            return {
                "threshold": body.threshold,
                "clusters": [{"leaves": [0], "rect": [p[0], p[1], p[0], p[1]]} for p in leaves],
                "no_zero_gradient_warning": len(leaves) == 0,
            }
        dendro = dendrogram_from_dict(dendro_doc)
        return {**cut_to_dict(cut(dendro, body.threshold)), "no_zero_gradient_warning": False}

    ui_dir = Path(__file__).resolve().parent.parent.parent / "frontend" / "dist"
    if ui_dir.exists():
        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app
