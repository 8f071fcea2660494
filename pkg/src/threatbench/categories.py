"""Threat categories derived from asset security requirements.

A category is the violation of one or more security requirements of one
asset. Categories come from three origins: the shipped catalog (named,
curated violations keyed by asset class), mechanical derivation (one
negation per requirement per asset instance), or manual entry. Excluded
categories stay in the model, flagged, so reports can show the rationale.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from enum import Enum
from importlib import resources
from itertools import chain

from .errors import InvariantViolation, MatrixAlreadyGenerated, NotFoundError
from .model import Asset, Finding, Severity, ThreatModel


class CategoryOrigin(Enum):
    CATALOG = "catalog"
    DERIVED = "derived"
    MANUAL = "manual"


@dataclass(frozen=True)
class ThreatCategory:
    """One way an asset's security requirements can be violated."""

    id: str
    asset_ref: str
    name: str
    description: str
    negates: tuple[str, ...]
    origin: CategoryOrigin
    instance_tag: str | None = None
    excluded: bool = False
    exclusion_rationale: str = ""


@dataclass(frozen=True)
class CatalogEntry:
    """A reusable violation pattern for an asset class.

    ``asset_pattern`` matches asset names (or their declared catalog class)
    after normalization. ``requirement_template`` lists, comma-separated,
    the requirement ids this category negates when the asset declares them.
    """

    asset_pattern: str
    category_name: str
    category_template: str
    requirement_template: str = ""


@dataclass(frozen=True)
class CatalogCrossNote:
    """Records that a requirement is covered by another asset's category.

    Cross-noted requirements are skipped by mechanical derivation and show
    up in reports as explained omissions.
    """

    asset_pattern: str
    requirement: str
    covered_by: str


@dataclass(frozen=True)
class Catalog:
    entries: tuple[CatalogEntry, ...] = ()
    cross_notes: tuple[CatalogCrossNote, ...] = ()


def normalize_pattern(text: str) -> str:
    return "-".join(text.lower().replace("_", " ").replace("-", " ").split())


def _matches(entry_pattern: str, asset: Asset) -> bool:
    pattern = normalize_pattern(entry_pattern)
    if pattern == normalize_pattern(asset.name):
        return True
    return bool(asset.catalog_class) and pattern == normalize_pattern(asset.catalog_class)


def load_catalog(data: dict) -> Catalog:
    try:
        entries = tuple(
            CatalogEntry(
                asset_pattern=e["asset_pattern"],
                category_name=e["category_name"],
                category_template=e["category_template"],
                requirement_template=e.get("requirement_template", ""),
            )
            for e in data.get("entries", [])
        )
        cross_notes = tuple(
            CatalogCrossNote(
                asset_pattern=n["asset_pattern"],
                requirement=n["requirement"],
                covered_by=n["covered_by"],
            )
            for n in data.get("cross_notes", [])
        )
    except (KeyError, TypeError) as exc:
        raise InvariantViolation(f"malformed catalog: {exc}") from exc
    names: set[tuple[str, str]] = set()
    for entry in entries:
        key = (normalize_pattern(entry.asset_pattern), entry.category_name)
        if key in names:
            raise InvariantViolation(
                f"catalog repeats category {entry.category_name!r} for "
                f"pattern {entry.asset_pattern!r}"
            )
        names.add(key)
    return Catalog(entries, cross_notes)


def default_catalog() -> Catalog:
    """The shipped base catalog; extend or replace it per system."""
    text = resources.files("threatbench").joinpath("data/default_catalog.json").read_text(
        "utf-8"
    )
    return load_catalog(json.loads(text))


def catalog_to_dict(catalog: Catalog) -> dict:
    return {
        "entries": [
            {
                "asset_pattern": e.asset_pattern,
                "category_name": e.category_name,
                "category_template": e.category_template,
                "requirement_template": e.requirement_template,
            }
            for e in catalog.entries
        ],
        "cross_notes": [
            {
                "asset_pattern": n.asset_pattern,
                "requirement": n.requirement,
                "covered_by": n.covered_by,
            }
            for n in catalog.cross_notes
        ],
    }


# ---------------------------------------------------------------------------
# Derivation
# ---------------------------------------------------------------------------

NEGATION_PREFIX = "Violation of: "


def derive_categories(asset: Asset) -> list[ThreatCategory]:
    """One negated category per requirement per asset instance.

    Mechanical scaffolding only: the analyst renames and refines. Ids are
    left blank; registration assigns them.
    """
    if not asset.security_requirements:
        raise InvariantViolation(f"asset {asset.name!r} declares no requirements")
    tags: tuple[str | None, ...] = asset.instance_tags or (None,)
    out = []
    for tag in tags:
        for req in asset.security_requirements:
            out.append(
                ThreatCategory(
                    id="",
                    asset_ref=asset.name,
                    name=f"{req.id} violation",
                    description=NEGATION_PREFIX + req.statement,
                    negates=(req.id,),
                    origin=CategoryOrigin.DERIVED,
                    instance_tag=tag,
                )
            )
    return out


def instantiate_catalog(model: ThreatModel, catalog: Catalog) -> list[ThreatCategory]:
    """Categories the catalog yields for this model, before deduplication.

    Every asset matching an entry's pattern gets the entry's category,
    replicated per instance tag; the ``negates`` list binds to whichever of
    the asset's requirement ids the entry's requirement template names.
    """
    out = []
    for asset in model.assets:
        tags: tuple[str | None, ...] = asset.instance_tags or (None,)
        for entry in catalog.entries:
            if not _matches(entry.asset_pattern, asset):
                continue
            wanted = {
                normalize_pattern(part)
                for part in entry.requirement_template.split(",")
                if part.strip()
            }
            negates = tuple(
                req.id
                for req in asset.security_requirements
                if normalize_pattern(req.id) in wanted
            )
            for tag in tags:
                out.append(
                    ThreatCategory(
                        id="",
                        asset_ref=asset.name,
                        name=entry.category_name,
                        description=entry.category_template,
                        negates=negates,
                        origin=CategoryOrigin.CATALOG,
                        instance_tag=tag,
                    )
                )
    return out


def register_categories(model: ThreatModel, fresh: list[ThreatCategory]) -> tuple[ThreatCategory, ...]:
    """Assign ids and drop candidates already present on the model."""
    existing_keys = {(c.asset_ref, c.instance_tag, c.name) for c in model.categories}
    existing_ids = [c.id for c in model.categories]
    added: list[ThreatCategory] = []
    for candidate in fresh:
        key = (candidate.asset_ref, candidate.instance_tag, candidate.name)
        if key in existing_keys:
            continue
        existing_keys.add(key)
        cid = _next_category_id(chain(existing_ids, (c.id for c in added)))
        added.append(replace(candidate, id=cid))
    return model.categories + tuple(added)


def _next_category_id(existing) -> str:
    highest = 0
    for cid in existing:
        if cid.startswith("c") and cid[1:].isdigit():
            highest = max(highest, int(cid[1:]))
    return f"c{highest + 1}"


def apply_catalog(model: ThreatModel, catalog: Catalog) -> ThreatModel:
    """Instantiate catalog categories onto every matching asset.

    Idempotent on the category set: reapplying the same catalog adds
    nothing. Unmatched patterns are fine (a system simply lacks the asset).
    """
    from .model import validate_model

    report = validate_model(model)
    if not report.ok:
        raise InvariantViolation(
            "model must validate cleanly before deriving categories: "
            + "; ".join(f.message for f in report.errors)
        )
    return model.bump(categories=register_categories(model, instantiate_catalog(model, catalog)))


def covered_requirements(asset: Asset, model: ThreatModel, catalog: Catalog) -> set[str]:
    """Requirement ids already negated by a category or cross-noted as covered."""
    covered = {
        rid
        for c in model.categories
        if c.asset_ref == asset.name
        for rid in c.negates
    }
    for note in catalog.cross_notes:
        if _matches(note.asset_pattern, asset):
            for req in asset.security_requirements:
                if normalize_pattern(req.id) == normalize_pattern(note.requirement):
                    covered.add(req.id)
    return covered


def derive_model_categories(model: ThreatModel, catalog: Catalog) -> ThreatModel:
    """Catalog pass plus mechanical derivation for uncovered requirements.

    This is the whole category-identification step as one mutation: apply
    the catalog, then derive a negation category for every requirement no
    category negates and no cross-note explains away. Cross-note coverage
    is recorded on the model so reports can explain the omissions.
    """
    model = apply_catalog(model, catalog)

    derived: list[ThreatCategory] = []
    notes: list[str] = []
    for asset in model.assets:
        covered = covered_requirements(asset, model, catalog)
        for candidate in derive_categories(asset):
            if all(rid not in covered for rid in candidate.negates):
                derived.append(candidate)
        for note in catalog.cross_notes:
            if _matches(note.asset_pattern, asset):
                for req in asset.security_requirements:
                    if normalize_pattern(req.id) == normalize_pattern(note.requirement):
                        notes.append(
                            f"{asset.name}/{req.id}: covered by {note.covered_by}"
                        )
    merged_notes = tuple(dict.fromkeys(chain(model.coverage_notes, notes)))
    return replace(
        model,
        categories=register_categories(model, derived),
        coverage_notes=merged_notes,
    )


def mark_category_excluded(model: ThreatModel, category_id: str, rationale: str) -> ThreatModel:
    """Flag a category as neutralized by assumptions or design choices."""
    category = model.category(category_id)
    if not rationale.strip():
        raise InvariantViolation("exclusion requires a rationale")
    for m in model.matrices:
        if m.category_ref == category_id:
            raise MatrixAlreadyGenerated(
                f"category {category_id} already has matrix {m.id}"
            )
    updated = replace(category, excluded=True, exclusion_rationale=rationale)
    return model.bump(
        categories=tuple(updated if c.id == category_id else c for c in model.categories)
    )


def validate_categories(model: ThreatModel) -> list[Finding]:
    findings: list[Finding] = []

    def err(message: str, location: str) -> None:
        findings.append(Finding(Severity.ERROR, message, location))

    asset_by_name = {a.name: a for a in model.assets}
    keys: set[tuple[str, str | None, str]] = set()
    ids: set[str] = set()
    for category in model.categories:
        loc = f"categories/{category.id}"
        if category.id in ids:
            err(f"duplicate category id {category.id!r}", loc)
        ids.add(category.id)
        asset = asset_by_name.get(category.asset_ref)
        if asset is None:
            err(f"category names unknown asset {category.asset_ref!r}", loc)
            continue
        req_ids = {r.id for r in asset.security_requirements}
        for rid in category.negates:
            if rid not in req_ids:
                err(f"category negates unknown requirement {rid!r}", loc)
        if category.instance_tag is not None and category.instance_tag not in asset.instance_tags:
            err(f"category names unknown instance tag {category.instance_tag!r}", loc)
        key = (category.asset_ref, category.instance_tag, category.name)
        if key in keys:
            err(f"duplicate category {category.name!r} for {category.asset_ref!r}", loc)
        keys.add(key)
        if category.excluded and not category.exclusion_rationale.strip():
            err("excluded category lacks a rationale", loc)
    return findings
