"""System-model vocabulary and the root aggregate.

Everything here is an immutable snapshot: mutating operations return a new
``ThreatModel`` whose ``version`` is exactly one higher. Snapshots are safe
to share across threads; writers are serialized by the document store.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import TYPE_CHECKING, Iterable

from .errors import (
    DuplicateNameConflict,
    NotFoundError,
    ReferencedEntityRemoval,
    UnknownScenario,
)

if TYPE_CHECKING:
    from .categories import ThreatCategory
    from .collusion import CollusionMatrix, ThreatScenario
    from .risk import RiskScore

#: Reserved attacker-side pseudo-role; never stored among model roles and
#: never allowed on the target side of a collusion cell.
EXTERNAL = "external"

# Identifier charset keeps canonical cell ids unambiguous: no "+", no ">",
# no whitespace (role names are joined with "+" and "->" in cell ids).
_IDENT_RE = re.compile(r"^[A-Za-z0-9][A-Za-z0-9_.\- ]*$")
_ROLE_IDENT_RE = re.compile(r"^[A-Za-z0-9][A-Za-z0-9_.\-]*$")


class AssetKind(Enum):
    CONCRETE = "concrete"
    ABSTRACT = "abstract"


class NodeKind(Enum):
    PARTICIPANT = "participant"
    ASSET = "asset"


class Severity(Enum):
    ERROR = "error"
    WARNING = "warning"


@dataclass(frozen=True)
class Role:
    """A participant role (client, server, miner, ...)."""

    name: str
    description: str = ""


@dataclass(frozen=True)
class SecurityRequirement:
    """One condition that, if met, keeps its asset secure."""

    id: str
    statement: str


@dataclass(frozen=True)
class Asset:
    """A protected component, concrete or abstract.

    ``instance_tags`` models multi-instance assets (e.g. two service types);
    derived threat categories are replicated once per tag. ``catalog_class``
    optionally declares the catalog wildcard class this asset belongs to when
    its name alone does not match a catalog pattern.
    """

    name: str
    kind: AssetKind = AssetKind.CONCRETE
    description: str = ""
    security_requirements: tuple[SecurityRequirement, ...] = ()
    instance_tags: tuple[str, ...] = ()
    catalog_class: str = ""


@dataclass(frozen=True)
class NetworkNode:
    id: str
    label: str
    node_kind: NodeKind


@dataclass(frozen=True)
class NetworkEdge:
    source: str
    target: str
    label: str = ""


@dataclass(frozen=True)
class NetworkGraph:
    """Participants, assets, and their interactions within one module."""

    nodes: tuple[NetworkNode, ...] = ()
    edges: tuple[NetworkEdge, ...] = ()


@dataclass(frozen=True)
class SystemModule:
    """A functional slice of the system, with the assets it touches."""

    name: str
    description: str = ""
    asset_refs: tuple[str, ...] = ()
    network_model: NetworkGraph = field(default_factory=NetworkGraph)


@dataclass(frozen=True)
class Finding:
    severity: Severity
    message: str
    location: str = ""


@dataclass(frozen=True)
class ValidationReport:
    findings: tuple[Finding, ...] = ()

    @property
    def errors(self) -> tuple[Finding, ...]:
        return tuple(f for f in self.findings if f.severity is Severity.ERROR)

    @property
    def warnings(self) -> tuple[Finding, ...]:
        return tuple(f for f in self.findings if f.severity is Severity.WARNING)

    @property
    def ok(self) -> bool:
        return not self.errors


@dataclass(frozen=True)
class ThreatModel:
    """Root aggregate: the complete threat model at one version."""

    name: str
    version: int = 0
    roles: tuple[Role, ...] = ()
    assets: tuple[Asset, ...] = ()
    modules: tuple[SystemModule, ...] = ()
    assumptions: tuple[str, ...] = ()
    dependencies: tuple[str, ...] = ()
    categories: tuple["ThreatCategory", ...] = ()
    matrices: tuple["CollusionMatrix", ...] = ()
    scenarios: tuple["ThreatScenario", ...] = ()
    scores: tuple["RiskScore", ...] = ()
    coverage_notes: tuple[str, ...] = ()

    def role(self, name: str) -> Role:
        for r in self.roles:
            if r.name == name:
                return r
        raise NotFoundError(f"unknown role {name!r}", location="roles")

    def asset(self, name: str) -> Asset:
        for a in self.assets:
            if a.name == name:
                return a
        raise NotFoundError(f"unknown asset {name!r}", location="assets")

    def category(self, category_id: str) -> "ThreatCategory":
        for c in self.categories:
            if c.id == category_id:
                return c
        raise NotFoundError(f"unknown category {category_id!r}", location="categories")

    def matrix(self, matrix_id: str) -> "CollusionMatrix":
        for m in self.matrices:
            if m.id == matrix_id:
                return m
        raise NotFoundError(f"unknown matrix {matrix_id!r}", location="matrices")

    def scenario(self, scenario_id: str) -> "ThreatScenario":
        for s in self.scenarios:
            if s.id == scenario_id:
                return s
        raise UnknownScenario(f"unknown scenario {scenario_id!r}", location="scenarios")

    def role_names(self) -> tuple[str, ...]:
        return tuple(r.name for r in self.roles)

    def bump(self, **changes) -> "ThreatModel":
        """New snapshot with ``version`` incremented by exactly one."""
        return replace(self, version=self.version + 1, **changes)


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------


def _dupes(names: Iterable[str]) -> list[str]:
    seen: set[str] = set()
    out = []
    for n in names:
        if n in seen and n not in out:
            out.append(n)
        seen.add(n)
    return out


def validate_model(model: ThreatModel) -> ValidationReport:
    """Check every structural invariant; report, never raise.

    Returns an empty error list iff the model is internally consistent:
    unique names, no reserved identifiers, and no dangling cross-references.
    Empty assumptions/dependencies lists yield warnings only.
    """
    findings: list[Finding] = []

    def err(message: str, location: str) -> None:
        findings.append(Finding(Severity.ERROR, message, location))

    def warn(message: str, location: str) -> None:
        findings.append(Finding(Severity.WARNING, message, location))

    role_names = [r.name for r in model.roles]
    for r in model.roles:
        if not r.name or not _ROLE_IDENT_RE.match(r.name):
            err(f"invalid role name {r.name!r}", "roles")
        if r.name == EXTERNAL:
            err(f"reserved role name {EXTERNAL!r}", "roles")
    for name in _dupes(role_names):
        err(f"duplicate role name {name!r}", "roles")

    asset_names = [a.name for a in model.assets]
    for name in _dupes(asset_names):
        err(f"duplicate asset name {name!r}", "assets")
    for a in model.assets:
        loc = f"assets/{a.name}"
        if not a.name or not _IDENT_RE.match(a.name):
            err(f"invalid asset name {a.name!r}", "assets")
        if not a.security_requirements:
            err("asset declares no security requirements", loc)
        for rid in _dupes(req.id for req in a.security_requirements):
            err(f"duplicate requirement id {rid!r}", loc)
        for req in a.security_requirements:
            if not req.statement.strip():
                err(f"requirement {req.id!r} has an empty statement", loc)
        for tag in _dupes(a.instance_tags):
            err(f"duplicate instance tag {tag!r}", loc)

    module_names = [m.name for m in model.modules]
    for name in _dupes(module_names):
        err(f"duplicate module name {name!r}", "modules")
    for m in model.modules:
        loc = f"modules/{m.name}"
        for ref in m.asset_refs:
            if ref not in asset_names:
                err(f"unresolved asset reference {ref!r}", loc)
        node_ids = [n.id for n in m.network_model.nodes]
        for nid in _dupes(node_ids):
            err(f"duplicate network node id {nid!r}", loc)
        for node in m.network_model.nodes:
            if node.node_kind is NodeKind.PARTICIPANT and node.label not in role_names:
                err(f"participant node {node.id!r} labels unknown role {node.label!r}", loc)
        for edge in m.network_model.edges:
            for endpoint in (edge.source, edge.target):
                if endpoint not in node_ids:
                    err(f"edge endpoint {endpoint!r} resolves to no node", loc)

    if not model.assumptions:
        warn("no assumptions recorded", "assumptions")
    if not model.dependencies:
        warn("no dependencies recorded", "dependencies")

    from .categories import validate_categories
    from .collusion import validate_collusion_state

    findings.extend(validate_categories(model))
    findings.extend(validate_collusion_state(model))

    seen_scores: set[str] = set()
    scenario_ids = {s.id for s in model.scenarios}
    for score in model.scores:
        loc = f"scores/{score.scenario_ref}"
        if score.scenario_ref not in scenario_ids:
            err(f"score references unknown scenario {score.scenario_ref!r}", loc)
        if score.scenario_ref in seen_scores:
            err(f"multiple scores for scenario {score.scenario_ref!r}", loc)
        seen_scores.add(score.scenario_ref)
        if not (1 <= score.likelihood <= 5 and 1 <= score.severity <= 5):
            err("likelihood/severity outside 1..5", loc)

    return ValidationReport(tuple(findings))


# ---------------------------------------------------------------------------
# Mutations (snapshot -> snapshot)
# ---------------------------------------------------------------------------


def _upsert(items: tuple, item, key=lambda x: x.name) -> tuple:
    out = list(items)
    for i, existing in enumerate(out):
        if key(existing) == key(item):
            out[i] = item
            return tuple(out)
    out.append(item)
    return tuple(out)


def upsert_role(model: ThreatModel, role: Role) -> ThreatModel:
    if not _ROLE_IDENT_RE.match(role.name) or role.name == EXTERNAL:
        raise DuplicateNameConflict(f"illegal role name {role.name!r}")
    return model.bump(roles=_upsert(model.roles, role))


def remove_role(model: ThreatModel, name: str) -> ThreatModel:
    model.role(name)
    for m in model.matrices:
        if name in m.role_scope:
            raise ReferencedEntityRemoval(
                f"role {name!r} is in the scope of matrix {m.id}", location=f"matrices/{m.id}"
            )
    for mod in model.modules:
        for node in mod.network_model.nodes:
            if node.node_kind is NodeKind.PARTICIPANT and node.label == name:
                raise ReferencedEntityRemoval(
                    f"role {name!r} appears in module {mod.name!r} network model",
                    location=f"modules/{mod.name}",
                )
    return model.bump(roles=tuple(r for r in model.roles if r.name != name))


def upsert_asset(model: ThreatModel, asset: Asset) -> ThreatModel:
    for existing in model.assets:
        if existing.name == asset.name and existing.kind is not asset.kind:
            raise DuplicateNameConflict(
                f"asset {asset.name!r} already declared with kind {existing.kind.value!r}"
            )
    return model.bump(assets=_upsert(model.assets, asset))


def remove_asset(model: ThreatModel, name: str) -> ThreatModel:
    model.asset(name)
    category_ids = {c.id for c in model.categories if c.asset_ref == name}
    for m in model.matrices:
        if m.category_ref in category_ids:
            raise ReferencedEntityRemoval(
                f"asset {name!r} is covered by matrix {m.id}", location=f"matrices/{m.id}"
            )
    if category_ids:
        raise ReferencedEntityRemoval(
            f"asset {name!r} has derived threat categories", location="categories"
        )
    for mod in model.modules:
        if name in mod.asset_refs:
            raise ReferencedEntityRemoval(
                f"asset {name!r} is referenced by module {mod.name!r}",
                location=f"modules/{mod.name}",
            )
    return model.bump(assets=tuple(a for a in model.assets if a.name != name))


def upsert_module(model: ThreatModel, module: SystemModule) -> ThreatModel:
    for ref in module.asset_refs:
        model.asset(ref)
    for node in module.network_model.nodes:
        if node.node_kind is NodeKind.PARTICIPANT:
            model.role(node.label)
    return model.bump(modules=_upsert(model.modules, module))


def set_assumptions(model: ThreatModel, assumptions: tuple[str, ...]) -> ThreatModel:
    return model.bump(assumptions=tuple(assumptions))


def set_dependencies(model: ThreatModel, dependencies: tuple[str, ...]) -> ThreatModel:
    return model.bump(dependencies=tuple(dependencies))
