"""Local HTTP interface for scripts and the browser workbench.

Every mutation may carry an ``X-Expected-Version`` header (optimistic
concurrency); a stale expectation is rejected with 409 and never applied.
Error bodies are structured: ``{"error": {"code", "message", ...}}`` with
404 for unknown entities, 409 for version conflicts and lifecycle
violations, and 422 for invariant violations.
"""

from __future__ import annotations

from pathlib import Path

from fastapi import Body, FastAPI, Header, Request
from fastapi.responses import JSONResponse, PlainTextResponse
from fastapi.staticfiles import StaticFiles

from .collusion import CellCoordinate, CellState, coverage
from .errors import (
    InvariantViolation,
    LifecycleError,
    NotFoundError,
    WorkbenchError,
)
from .reporting import export_report, compute_stats, stats_to_dict
from .serialize import scenario_to_dict
from .store import Store

#: Directory with the built workbench UI; mounted when present.
UI_DIST = Path("frontend/dist")


def _status_for(error: WorkbenchError) -> int:
    if isinstance(error, NotFoundError):
        return 404
    if isinstance(error, LifecycleError):
        return 409
    return 422


def _matrix_payload(store: Store, matrix_id: str) -> dict:
    model = store.model
    matrix = model.matrix(matrix_id)
    category = None
    for c in model.categories:
        if c.id == matrix.category_ref:
            category = c
    cov = coverage(matrix)
    cells = {}
    for coord, res in matrix.cells.items():
        entry: dict = {"state": res.state.value}
        if res.state in (CellState.ELIMINATED, CellState.MERGED):
            entry["rationale"] = res.rationale
        if res.state is CellState.MERGED:
            entry["merge_target"] = str(res.merge_target)
        if res.state is CellState.DOCUMENTED:
            entry["scenario_refs"] = list(res.scenario_refs)
        cells[str(coord)] = entry
    return {
        "id": matrix.id,
        "category_ref": matrix.category_ref,
        "category_name": category.name if category else matrix.category_ref,
        "asset": category.asset_ref if category else "",
        "instance_tag": matrix.instance_tag,
        "role_scope": list(matrix.role_scope),
        "attacker_order": [str(a) for a in matrix.attacker_sets()],
        "target_order": [str(t) for t in matrix.target_sets()],
        "cells": cells,
        "coverage": {
            "total": cov.total,
            "unresolved": cov.unresolved,
            "eliminated": cov.eliminated,
            "merged": cov.merged,
            "documented": cov.documented,
            "fraction_resolved": cov.fraction_resolved,
        },
        "version": model.version,
    }


def create_app(store: Store) -> FastAPI:
    app = FastAPI(title="threatbench", docs_url=None, redoc_url=None)

    @app.exception_handler(WorkbenchError)
    async def engine_error(_request: Request, exc: WorkbenchError):
        return JSONResponse(status_code=_status_for(exc), content={"error": exc.to_dict()})

    @app.get("/api/model")
    def get_model():
        return store.snapshot().to_dict()

    @app.get("/api/stats")
    def get_stats():
        model = store.model
        payload = stats_to_dict(compute_stats(model))
        payload["version"] = model.version
        payload["name"] = model.name
        return payload

    @app.get("/api/report", response_class=PlainTextResponse)
    def get_report():
        return export_report(store.model, "markdown")

    @app.get("/api/matrices")
    def list_matrices():
        model = store.model
        names = {c.id: c for c in model.categories}
        out = []
        for matrix in model.matrices:
            cov = coverage(matrix)
            category = names.get(matrix.category_ref)
            out.append(
                {
                    "id": matrix.id,
                    "category_ref": matrix.category_ref,
                    "category_name": category.name if category else matrix.category_ref,
                    "asset": category.asset_ref if category else "",
                    "instance_tag": matrix.instance_tag,
                    "role_scope": list(matrix.role_scope),
                    "cells": cov.total,
                    "unresolved": cov.unresolved,
                    "fraction_resolved": cov.fraction_resolved,
                }
            )
        return {"matrices": out, "version": model.version}

    @app.get("/api/matrices/{matrix_id}")
    def get_matrix(matrix_id: str):
        return _matrix_payload(store, matrix_id)

    @app.post("/api/matrices")
    def post_matrix(
        payload: dict = Body(...),
        x_expected_version: int | None = Header(default=None),
    ):
        if "category_id" not in payload:
            raise InvariantViolation("category_id is required")
        doc = store.mutate(
            "generate_matrix",
            {"category_id": payload["category_id"], "scope": payload.get("scope")},
            expected_version=x_expected_version,
        )
        return {"version": doc.model.version, "matrix_id": doc.model.matrices[-1].id}

    def _cell_args(matrix_id: str, cell_id: str, payload: dict, fields: dict) -> dict:
        args = {"matrix_id": matrix_id, "cell": cell_id}
        for key, required in fields.items():
            if required and key not in payload:
                raise InvariantViolation(f"{key} is required")
            if key in payload:
                args[key] = payload[key]
        return args

    @app.post("/api/matrices/{matrix_id}/cells/{cell_id}/eliminate")
    def post_eliminate(
        matrix_id: str,
        cell_id: str,
        payload: dict = Body(...),
        x_expected_version: int | None = Header(default=None),
    ):
        doc = store.mutate(
            "eliminate",
            _cell_args(matrix_id, cell_id, payload, {"rationale": True}),
            expected_version=x_expected_version,
        )
        return {"version": doc.model.version, "cell": cell_id, "state": "eliminated"}

    @app.post("/api/matrices/{matrix_id}/cells/{cell_id}/merge")
    def post_merge(
        matrix_id: str,
        cell_id: str,
        payload: dict = Body(...),
        x_expected_version: int | None = Header(default=None),
    ):
        doc = store.mutate(
            "merge",
            _cell_args(matrix_id, cell_id, payload, {"into": True, "rationale": True}),
            expected_version=x_expected_version,
        )
        return {"version": doc.model.version, "cell": cell_id, "state": "merged"}

    @app.post("/api/matrices/{matrix_id}/cells/{cell_id}/document")
    def post_document(
        matrix_id: str,
        cell_id: str,
        payload: dict = Body(...),
        x_expected_version: int | None = Header(default=None),
    ):
        doc = store.mutate(
            "document",
            _cell_args(matrix_id, cell_id, payload, {"scenarios": True}),
            expected_version=x_expected_version,
        )
        refs = doc.model.matrix(matrix_id).cells[CellCoordinate.parse(cell_id)].scenario_refs
        return {
            "version": doc.model.version,
            "cell": cell_id,
            "state": "documented",
            "scenario_refs": list(refs),
        }

    @app.post("/api/matrices/{matrix_id}/cells/{cell_id}/reopen")
    def post_reopen(
        matrix_id: str,
        cell_id: str,
        payload: dict = Body(...),
        x_expected_version: int | None = Header(default=None),
    ):
        doc = store.mutate(
            "reopen",
            _cell_args(matrix_id, cell_id, payload, {"note": True}),
            expected_version=x_expected_version,
        )
        return {"version": doc.model.version, "cell": cell_id, "state": "unresolved"}

    @app.get("/api/scenarios")
    def list_scenarios():
        model = store.model
        scores = {s.scenario_ref: s for s in model.scores}
        out = []
        for scenario in model.scenarios:
            data = scenario_to_dict(scenario)
            score = scores.get(scenario.id)
            data["score"] = (
                {
                    "likelihood": score.likelihood,
                    "severity": score.severity,
                    "score": score.score,
                    "notes": score.notes,
                }
                if score
                else None
            )
            out.append(data)
        return {"scenarios": out, "version": model.version}

    @app.post("/api/scenarios/{scenario_id}/score")
    def post_score(
        scenario_id: str,
        payload: dict = Body(...),
        x_expected_version: int | None = Header(default=None),
    ):
        for key in ("likelihood", "severity"):
            if key not in payload:
                raise InvariantViolation(f"{key} is required")
        doc = store.mutate(
            "score",
            {
                "scenario_id": scenario_id,
                "likelihood": payload["likelihood"],
                "severity": payload["severity"],
                "notes": payload.get("notes", ""),
            },
            expected_version=x_expected_version,
        )
        return {"version": doc.model.version, "scenario_id": scenario_id}

    if UI_DIST.is_dir():
        app.mount("/", StaticFiles(directory=UI_DIST, html=True), name="ui")

    return app
