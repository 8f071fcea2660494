"""Canonical JSON encoding of models and documents.

Canonical form: sorted object keys, UTF-8, LF line endings, two-space
indent, and no floating-point payoffs (scores are integers; rationals,
where they ever appear, are {"num", "den"} pairs). Party sets and cell
coordinates serialize as their canonical identifier strings, so a saved
file is diffable and greppable by cell id.
"""

from __future__ import annotations

import json
from fractions import Fraction
from typing import Any

from .categories import CategoryOrigin, ThreatCategory
from .collusion import (
    CellCoordinate,
    CellResolution,
    CellState,
    CollusionMatrix,
    PartySet,
    ThreatScenario,
)
from .errors import InvariantViolation, ParseError, SchemaTooNew
from .model import (
    Asset,
    AssetKind,
    NetworkEdge,
    NetworkGraph,
    NetworkNode,
    NodeKind,
    Role,
    SecurityRequirement,
    SystemModule,
    ThreatModel,
)
from .risk import RiskScore

SCHEMA_VERSION = 1


def canonical_dumps(payload: Any) -> str:
    return json.dumps(payload, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def rational_to_json(value: Fraction) -> dict:
    return {"num": value.numerator, "den": value.denominator}


def rational_from_json(data: dict) -> Fraction:
    return Fraction(data["num"], data["den"])


# ---------------------------------------------------------------------------
# Model -> dict
# ---------------------------------------------------------------------------


def model_to_dict(model: ThreatModel) -> dict:
    return {
        "name": model.name,
        "version": model.version,
        "roles": [{"name": r.name, "description": r.description} for r in model.roles],
        "assets": [asset_to_dict(a) for a in model.assets],
        "modules": [module_to_dict(m) for m in model.modules],
        "assumptions": list(model.assumptions),
        "dependencies": list(model.dependencies),
        "categories": [category_to_dict(c) for c in model.categories],
        "matrices": [matrix_to_dict(m) for m in model.matrices],
        "scenarios": [scenario_to_dict(s) for s in model.scenarios],
        "scores": [
            {
                "scenario_ref": s.scenario_ref,
                "likelihood": s.likelihood,
                "severity": s.severity,
                "notes": s.notes,
            }
            for s in model.scores
        ],
        "coverage_notes": list(model.coverage_notes),
    }


def asset_to_dict(asset: Asset) -> dict:
    return {
        "name": asset.name,
        "kind": asset.kind.value,
        "description": asset.description,
        "security_requirements": [
            {"id": r.id, "statement": r.statement} for r in asset.security_requirements
        ],
        "instance_tags": list(asset.instance_tags),
        "catalog_class": asset.catalog_class,
    }


def module_to_dict(module: SystemModule) -> dict:
    return {
        "name": module.name,
        "description": module.description,
        "asset_refs": list(module.asset_refs),
        "network_model": {
            "nodes": [
                {"id": n.id, "label": n.label, "node_kind": n.node_kind.value}
                for n in module.network_model.nodes
            ],
            "edges": [
                {"source": e.source, "target": e.target, "label": e.label}
                for e in module.network_model.edges
            ],
        },
    }


def category_to_dict(category: ThreatCategory) -> dict:
    return {
        "id": category.id,
        "asset_ref": category.asset_ref,
        "instance_tag": category.instance_tag,
        "name": category.name,
        "description": category.description,
        "negates": list(category.negates),
        "origin": category.origin.value,
        "excluded": category.excluded,
        "exclusion_rationale": category.exclusion_rationale,
    }


def matrix_to_dict(matrix: CollusionMatrix) -> dict:
    cells = {}
    for coord in matrix.ordered_coords():
        cells[str(coord)] = resolution_to_dict(matrix.cells[coord])
    return {
        "id": matrix.id,
        "category_ref": matrix.category_ref,
        "instance_tag": matrix.instance_tag,
        "role_scope": list(matrix.role_scope),
        "created_at_version": matrix.created_at_version,
        "cells": cells,
    }


def resolution_to_dict(res: CellResolution) -> dict:
    out: dict[str, Any] = {"state": res.state.value}
    if res.state in (CellState.ELIMINATED, CellState.MERGED):
        out["rationale"] = res.rationale
    if res.state is CellState.MERGED:
        out["merge_target"] = str(res.merge_target)
    if res.state is CellState.DOCUMENTED:
        out["scenario_refs"] = list(res.scenario_refs)
    return out


def scenario_to_dict(scenario: ThreatScenario) -> dict:
    return {
        "id": scenario.id,
        "title": scenario.title,
        "description": scenario.description,
        "attackers": str(scenario.attackers),
        "targets": str(scenario.targets),
        "asset_refs": list(scenario.asset_refs),
        "action_flow": list(scenario.action_flow),
        "preconditions": list(scenario.preconditions),
        "capabilities": list(scenario.capabilities),
        "source_cells": [[mid, str(coord)] for mid, coord in scenario.source_cells],
    }


# ---------------------------------------------------------------------------
# dict -> model
# ---------------------------------------------------------------------------


def _enum(cls, value, what: str):
    try:
        return cls(value)
    except ValueError:
        raise InvariantViolation(f"unknown {what} {value!r}") from None


def model_from_dict(data: dict) -> ThreatModel:
    try:
        return _model_from_dict(data)
    except (KeyError, TypeError, AttributeError) as exc:
        raise InvariantViolation(f"malformed model document: {exc!r}") from exc


def _model_from_dict(data: dict) -> ThreatModel:
    roles = tuple(Role(r["name"], r.get("description", "")) for r in data["roles"])
    assets = tuple(asset_from_dict(a) for a in data["assets"])
    modules = tuple(module_from_dict(m) for m in data["modules"])
    categories = tuple(category_from_dict(c) for c in data["categories"])
    matrices = tuple(matrix_from_dict(m) for m in data["matrices"])
    scenarios = tuple(scenario_from_dict(s) for s in data["scenarios"])
    scores = tuple(
        RiskScore(
            scenario_ref=s["scenario_ref"],
            likelihood=s["likelihood"],
            severity=s["severity"],
            notes=s.get("notes", ""),
        )
        for s in data["scores"]
    )
    return ThreatModel(
        name=data["name"],
        version=data["version"],
        roles=roles,
        assets=assets,
        modules=modules,
        assumptions=tuple(data["assumptions"]),
        dependencies=tuple(data["dependencies"]),
        categories=categories,
        matrices=matrices,
        scenarios=scenarios,
        scores=scores,
        coverage_notes=tuple(data.get("coverage_notes", ())),
    )


def asset_from_dict(data: dict) -> Asset:
    return Asset(
        name=data["name"],
        kind=_enum(AssetKind, data["kind"], "asset kind"),
        description=data.get("description", ""),
        security_requirements=tuple(
            SecurityRequirement(r["id"], r["statement"])
            for r in data["security_requirements"]
        ),
        instance_tags=tuple(data.get("instance_tags", ())),
        catalog_class=data.get("catalog_class", ""),
    )


def module_from_dict(data: dict) -> SystemModule:
    graph = data.get("network_model", {"nodes": [], "edges": []})
    return SystemModule(
        name=data["name"],
        description=data.get("description", ""),
        asset_refs=tuple(data.get("asset_refs", ())),
        network_model=NetworkGraph(
            nodes=tuple(
                NetworkNode(n["id"], n["label"], _enum(NodeKind, n["node_kind"], "node kind"))
                for n in graph["nodes"]
            ),
            edges=tuple(
                NetworkEdge(e["source"], e["target"], e.get("label", ""))
                for e in graph["edges"]
            ),
        ),
    )


def category_from_dict(data: dict) -> ThreatCategory:
    return ThreatCategory(
        id=data["id"],
        asset_ref=data["asset_ref"],
        name=data["name"],
        description=data["description"],
        negates=tuple(data["negates"]),
        origin=_enum(CategoryOrigin, data["origin"], "category origin"),
        instance_tag=data.get("instance_tag"),
        excluded=data.get("excluded", False),
        exclusion_rationale=data.get("exclusion_rationale", ""),
    )


def matrix_from_dict(data: dict) -> CollusionMatrix:
    cells: dict[CellCoordinate, CellResolution] = {}
    for cell_id, res in data["cells"].items():
        coord = CellCoordinate.parse(cell_id)
        if coord in cells:
            raise InvariantViolation(f"duplicate cell {cell_id!r}")
        cells[coord] = resolution_from_dict(res)
    return CollusionMatrix(
        id=data["id"],
        category_ref=data["category_ref"],
        role_scope=tuple(data["role_scope"]),
        cells=cells,
        instance_tag=data.get("instance_tag"),
        created_at_version=data.get("created_at_version", 0),
    )


def resolution_from_dict(data: dict) -> CellResolution:
    state = _enum(CellState, data["state"], "cell state")
    merge_target = None
    if "merge_target" in data and data["merge_target"] is not None:
        merge_target = CellCoordinate.parse(data["merge_target"])
    return CellResolution(
        state=state,
        rationale=data.get("rationale", ""),
        merge_target=merge_target,
        scenario_refs=tuple(data.get("scenario_refs", ())),
    )


def scenario_from_dict(data: dict) -> ThreatScenario:
    return ThreatScenario(
        id=data.get("id", ""),
        title=data.get("title", ""),
        description=data["description"],
        attackers=PartySet.parse(data["attackers"]),
        targets=PartySet.parse(data["targets"]),
        asset_refs=tuple(data.get("asset_refs", ())),
        action_flow=tuple(data["action_flow"]),
        preconditions=tuple(data.get("preconditions", ())),
        capabilities=tuple(data.get("capabilities", ())),
        source_cells=tuple(
            (mid, CellCoordinate.parse(cid)) for mid, cid in data.get("source_cells", ())
        ),
    )


# ---------------------------------------------------------------------------
# Documents
# ---------------------------------------------------------------------------


def document_to_dict(schema_version: int, model: ThreatModel, audit_log: list[dict]) -> dict:
    return {
        "schema_version": schema_version,
        "model": model_to_dict(model),
        "audit_log": audit_log,
    }


def parse_document_text(text: str) -> dict:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, line=exc.lineno, position=exc.colno) from exc
    if not isinstance(data, dict):
        raise ParseError("document root must be a JSON object")
    schema = data.get("schema_version")
    if not isinstance(schema, int):
        raise InvariantViolation("schema_version missing or not an integer")
    if schema > SCHEMA_VERSION:
        raise SchemaTooNew(
            f"document schema {schema} is newer than supported {SCHEMA_VERSION}"
        )
    return data
