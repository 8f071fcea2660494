"""Collusion matrices: exhaustive attacker/target enumeration and triage.

A matrix for a role scope of size n has one row per non-empty subset of
roles plus the reserved "external" pseudo-role (2^(n+1) - 1 rows) and one
column per non-empty subset of roles (2^n - 1 columns). Every cell starts
unresolved and must end eliminated, merged, or documented; merges form a
forest whose chains terminate at documented cells.

Canonical cell identifier grammar (used in files, API paths, and reports):
attacker roles sorted and joined by "+", "external" last, then "->", then
target roles sorted and joined by "+". Example: "client+external->server".
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field, replace
from enum import Enum
from itertools import chain, combinations
from typing import TYPE_CHECKING, Iterator

from .errors import (
    CategoryExcluded,
    DanglingMergeChain,
    DuplicateMatrixForCategoryInstance,
    DuplicateNameConflict,
    EmptyRationale,
    EmptyScenarioList,
    EmptyScope,
    InvariantViolation,
    MatrixIncomplete,
    MergeCycle,
    MergeIntoEliminated,
    MergeIntoMerged,
    NotFoundError,
    NotUnresolved,
    ParseError,
    PartyMismatch,
    SelfMerge,
)
from .model import EXTERNAL, Finding, Severity, ThreatModel

if TYPE_CHECKING:
    pass

#: Above this many roles a full-scope matrix exceeds two million cells.
LARGE_SCOPE_WARNING = 10


def cell_count(n: int) -> int:
    """Number of cells in a collusion matrix over n roles.

    Attacker axis: non-empty subsets of roles plus external, 2^(n+1) - 1.
    Target axis: non-empty subsets of roles, 2^n - 1 (external is never
    a target).
    """
    if n < 1:
        raise EmptyScope("role scope must contain at least one role")
    return (2 ** (n + 1) - 1) * (2**n - 1)


@dataclass(frozen=True)
class PartySet:
    """A non-empty set of colluding parties, canonically ordered.

    ``roles`` is kept sorted and duplicate-free; ``includes_external`` adds
    the reserved external pseudo-role (rendered last).
    """

    roles: tuple[str, ...] = ()
    includes_external: bool = False

    def __post_init__(self):
        normalized = tuple(sorted(set(self.roles)))
        if normalized != self.roles:
            object.__setattr__(self, "roles", normalized)
        if not self.roles and not self.includes_external:
            raise InvariantViolation("a party set must name at least one party")
        if EXTERNAL in self.roles:
            raise InvariantViolation(
                "external is a flag, not a role name, in a party set"
            )

    @property
    def size(self) -> int:
        return len(self.roles) + (1 if self.includes_external else 0)

    def sort_key(self) -> tuple:
        # Singletons first, then by subset size; within equal size the
        # role-only sets precede external-containing ones, lexicographic.
        return (self.size, self.includes_external, self.roles)

    def __str__(self) -> str:
        parts = list(self.roles)
        if self.includes_external:
            parts.append(EXTERNAL)
        return "+".join(parts)

    @classmethod
    def parse(cls, text: str) -> "PartySet":
        parts = text.split("+")
        if any(not p for p in parts):
            raise ParseError(f"empty party in {text!r}")
        includes_external = parts[-1] == EXTERNAL
        roles = parts[:-1] if includes_external else parts
        if EXTERNAL in roles:
            raise ParseError(f"external must come last in {text!r}")
        if roles != sorted(set(roles)):
            raise ParseError(f"party set {text!r} is not in canonical order")
        return cls(tuple(roles), includes_external)


@dataclass(frozen=True)
class CellCoordinate:
    """One attacker-set/target-set pair; the unit of triage."""

    attackers: PartySet
    targets: PartySet

    def __post_init__(self):
        if self.targets.includes_external:
            raise InvariantViolation(
                "an external party is outside the system and cannot be a target"
            )

    def __str__(self) -> str:
        return f"{self.attackers}->{self.targets}"

    @classmethod
    def parse(cls, text: str) -> "CellCoordinate":
        if text.count("->") != 1:
            raise ParseError(f"cell id {text!r} must contain exactly one '->'")
        attacker_text, target_text = text.split("->")
        attackers = PartySet.parse(attacker_text)
        target = PartySet.parse(target_text)
        if target.includes_external:
            raise InvariantViolation(
                f"cell id {text!r} places external on the target side"
            )
        return cls(attackers, target)


class CellState(Enum):
    UNRESOLVED = "unresolved"
    ELIMINATED = "eliminated"
    MERGED = "merged"
    DOCUMENTED = "documented"


@dataclass(frozen=True)
class CellResolution:
    """Lifecycle state of one cell, with exactly the fields its state needs."""

    state: CellState = CellState.UNRESOLVED
    rationale: str = ""
    merge_target: CellCoordinate | None = None
    scenario_refs: tuple[str, ...] = ()

    def __post_init__(self):
        s = self.state
        if s in (CellState.ELIMINATED, CellState.MERGED) and not self.rationale.strip():
            raise InvariantViolation(f"{s.value} cells require a rationale")
        if (self.merge_target is not None) != (s is CellState.MERGED):
            raise InvariantViolation("merge_target is present iff the cell is merged")
        if bool(self.scenario_refs) != (s is CellState.DOCUMENTED):
            raise InvariantViolation("scenario_refs are present iff the cell is documented")
        if s is CellState.UNRESOLVED and self.rationale:
            raise InvariantViolation("unresolved cells carry no rationale")


UNRESOLVED = CellResolution()


@dataclass(frozen=True)
class ThreatScenario:
    """A distilled attack record surviving reduction."""

    id: str
    title: str
    description: str
    attackers: PartySet
    targets: PartySet
    asset_refs: tuple[str, ...] = ()
    action_flow: tuple[str, ...] = ()
    preconditions: tuple[str, ...] = ()
    capabilities: tuple[str, ...] = ()
    source_cells: tuple[tuple[str, CellCoordinate], ...] = ()


@dataclass(frozen=True)
class CollusionMatrix:
    """The triage grid for one (category, instance) pair.

    ``cells`` maps every in-scope coordinate to its resolution; the mapping
    is complete from generation time and is never resized. Treated as
    immutable: mutations build a new matrix with a copied mapping.
    """

    id: str
    category_ref: str
    role_scope: tuple[str, ...]
    cells: dict[CellCoordinate, CellResolution] = field(default_factory=dict)
    instance_tag: str | None = None
    created_at_version: int = 0

    def resolution(self, coord: CellCoordinate) -> CellResolution:
        try:
            return self.cells[coord]
        except KeyError:
            raise NotFoundError(
                f"cell {coord} is not in matrix {self.id}", location=f"matrices/{self.id}"
            ) from None

    def with_cell(self, coord: CellCoordinate, resolution: CellResolution) -> "CollusionMatrix":
        cells = dict(self.cells)
        cells[coord] = resolution
        return replace(self, cells=cells)

    def attacker_sets(self) -> list[PartySet]:
        return sorted({c.attackers for c in self.cells}, key=PartySet.sort_key)

    def target_sets(self) -> list[PartySet]:
        return sorted({c.targets for c in self.cells}, key=PartySet.sort_key)

    def ordered_coords(self) -> Iterator[CellCoordinate]:
        """Row-major canonical iteration (attacker rows, target columns)."""
        targets = self.target_sets()
        for attackers in self.attacker_sets():
            for t in targets:
                yield CellCoordinate(attackers, t)


@dataclass(frozen=True)
class Coverage:
    total: int
    unresolved: int
    eliminated: int
    merged: int
    documented: int

    @property
    def fraction_resolved(self) -> float:
        return 1.0 - self.unresolved / self.total if self.total else 0.0


# ---------------------------------------------------------------------------
# Enumeration
# ---------------------------------------------------------------------------


def _non_empty_subsets(names: tuple[str, ...]) -> Iterator[tuple[str, ...]]:
    ordered = sorted(names)
    return chain.from_iterable(
        combinations(ordered, k) for k in range(1, len(ordered) + 1)
    )


def enumerate_cells(role_scope: tuple[str, ...]) -> list[CellCoordinate]:
    """All coordinates for a scope, in canonical row-major order."""
    attacker_sets = [PartySet(roles) for roles in _non_empty_subsets(role_scope)]
    attacker_sets += [
        PartySet(roles, includes_external=True)
        for roles in _non_empty_subsets(role_scope)
    ]
    attacker_sets.append(PartySet((), includes_external=True))
    attacker_sets.sort(key=PartySet.sort_key)
    target_sets = sorted(
        (PartySet(roles) for roles in _non_empty_subsets(role_scope)),
        key=PartySet.sort_key,
    )
    return [CellCoordinate(a, t) for a in attacker_sets for t in target_sets]


def generate_matrix(
    model: ThreatModel,
    category_id: str,
    role_scope: tuple[str, ...] | None = None,
) -> ThreatModel:
    """Create the full unresolved matrix for an included category.

    The scope defaults to every model role. One matrix is allowed per
    (category, instance) pair.
    """
    category = model.category(category_id)
    if category.excluded:
        raise CategoryExcluded(
            f"category {category_id} is excluded: {category.exclusion_rationale}"
        )
    if not model.roles or not model.assets:
        raise EmptyScope("matrix generation requires at least one role and one asset")
    scope = tuple(sorted(role_scope)) if role_scope is not None else tuple(
        sorted(model.role_names())
    )
    if not scope:
        raise EmptyScope("role scope must contain at least one role")
    known = set(model.role_names())
    for name in scope:
        if name not in known:
            raise NotFoundError(f"unknown role {name!r} in scope", location="roles")
    for m in model.matrices:
        if m.category_ref == category_id and m.instance_tag == category.instance_tag:
            raise DuplicateMatrixForCategoryInstance(
                f"matrix {m.id} already covers category {category_id}"
            )
    if len(scope) > LARGE_SCOPE_WARNING:
        warnings.warn(
            f"scope of {len(scope)} roles materializes {cell_count(len(scope))} cells",
            stacklevel=2,
        )
    matrix = CollusionMatrix(
        id=_next_id("m", (m.id for m in model.matrices)),
        category_ref=category_id,
        role_scope=scope,
        cells={coord: UNRESOLVED for coord in enumerate_cells(scope)},
        instance_tag=category.instance_tag,
        created_at_version=model.version + 1,
    )
    return model.bump(matrices=model.matrices + (matrix,))


def _next_id(prefix: str, existing: Iterator[str]) -> str:
    highest = 0
    for eid in existing:
        if eid.startswith(prefix) and eid[len(prefix):].isdigit():
            highest = max(highest, int(eid[len(prefix):]))
    return f"{prefix}{highest + 1}"


# ---------------------------------------------------------------------------
# Triage operations
# ---------------------------------------------------------------------------


def _replace_matrix(model: ThreatModel, matrix: CollusionMatrix) -> ThreatModel:
    matrices = tuple(matrix if m.id == matrix.id else m for m in model.matrices)
    return model.bump(matrices=matrices)


def _require_unresolved(matrix: CollusionMatrix, coord: CellCoordinate) -> None:
    state = matrix.resolution(coord).state
    if state is not CellState.UNRESOLVED:
        raise NotUnresolved(f"cell {coord} in {matrix.id} is already {state.value}")


def eliminate(
    model: ThreatModel, matrix_id: str, coord: CellCoordinate, rationale: str
) -> ThreatModel:
    """Resolve a cell as no-threat, recording why."""
    matrix = model.matrix(matrix_id)
    _require_unresolved(matrix, coord)
    if not rationale.strip():
        raise EmptyRationale("elimination requires a rationale")
    resolution = CellResolution(CellState.ELIMINATED, rationale=rationale)
    return _replace_matrix(model, matrix.with_cell(coord, resolution))


def merge(
    model: ThreatModel,
    matrix_id: str,
    coord: CellCoordinate,
    into: CellCoordinate,
    rationale: str,
) -> ThreatModel:
    """Resolve a cell as covered by another cell of the same matrix.

    The target must be unresolved or documented: an eliminated cell covers
    nothing, and a merged cell's coverage lives at the end of its chain.
    """
    matrix = model.matrix(matrix_id)
    _require_unresolved(matrix, coord)
    if not rationale.strip():
        raise EmptyRationale("merging requires a rationale")
    if into == coord:
        raise SelfMerge(f"cell {coord} cannot merge into itself")
    # Walk the chain from the target first: reaching the source would close
    # a cycle, and that diagnosis beats the target-state one.
    hop = matrix.resolution(into)
    while hop.state is CellState.MERGED:
        if hop.merge_target == coord:
            raise MergeCycle(f"merging {coord} into {into} would close a cycle")
        hop = matrix.resolution(hop.merge_target)
    target_state = matrix.resolution(into).state
    if target_state is CellState.ELIMINATED:
        raise MergeIntoEliminated(f"cell {into} is eliminated and covers nothing")
    if target_state is CellState.MERGED:
        raise MergeIntoMerged(
            f"cell {into} is itself merged; merge into the end of its chain"
        )
    resolution = CellResolution(CellState.MERGED, rationale=rationale, merge_target=into)
    return _replace_matrix(model, matrix.with_cell(coord, resolution))


def _merged_sources(matrix: CollusionMatrix, coord: CellCoordinate) -> list[CellCoordinate]:
    """All cells whose merge chains end at ``coord``."""
    direct: dict[CellCoordinate, list[CellCoordinate]] = {}
    for c, res in matrix.cells.items():
        if res.state is CellState.MERGED:
            direct.setdefault(res.merge_target, []).append(c)
    out: list[CellCoordinate] = []
    frontier = [coord]
    while frontier:
        nxt = frontier.pop()
        for src in direct.get(nxt, ()):
            out.append(src)
            frontier.append(src)
    return out


def document(
    model: ThreatModel,
    matrix_id: str,
    coord: CellCoordinate,
    scenarios: list[ThreatScenario],
) -> ThreatModel:
    """Attach one or more distilled scenarios to a cell.

    Scenario parties must stay within the cell's parties, widened by the
    parties of any cells already merged into it (merge consolidation).
    Scenarios with an empty id are assigned the next free "s<k>" id.
    """
    matrix = model.matrix(matrix_id)
    _require_unresolved(matrix, coord)
    if not scenarios:
        raise EmptyScenarioList("documentation requires at least one scenario")

    allowed_attackers = set(coord.attackers.roles)
    allowed_external = coord.attackers.includes_external
    allowed_targets = set(coord.targets.roles)
    for source in _merged_sources(matrix, coord):
        allowed_attackers |= set(source.attackers.roles)
        allowed_external = allowed_external or source.attackers.includes_external
        allowed_targets |= set(source.targets.roles)

    known_assets = {a.name for a in model.assets}
    existing_ids = {s.id for s in model.scenarios}
    registered: list[ThreatScenario] = []
    refs: list[str] = []
    for scenario in scenarios:
        if not scenario.description.strip() or not scenario.action_flow:
            raise InvariantViolation(
                "a scenario requires a description and a non-empty action flow"
            )
        if not set(scenario.attackers.roles) <= allowed_attackers or (
            scenario.attackers.includes_external and not allowed_external
        ):
            raise PartyMismatch(
                f"scenario attackers {scenario.attackers} exceed cell {coord}"
            )
        if not set(scenario.targets.roles) <= allowed_targets:
            raise PartyMismatch(
                f"scenario targets {scenario.targets} exceed cell {coord}"
            )
        for ref in scenario.asset_refs:
            if ref not in known_assets:
                raise NotFoundError(f"scenario references unknown asset {ref!r}")
        sid = scenario.id or _next_id(
            "s", chain(existing_ids, (s.id for s in registered))
        )
        if sid in existing_ids or any(s.id == sid for s in registered):
            raise DuplicateNameConflict(f"scenario id {sid!r} already registered")
        registered.append(
            replace(
                scenario,
                id=sid,
                source_cells=scenario.source_cells + ((matrix_id, coord),),
            )
        )
        refs.append(sid)

    resolution = CellResolution(CellState.DOCUMENTED, scenario_refs=tuple(refs))
    model = _replace_matrix(model, matrix.with_cell(coord, resolution))
    # _replace_matrix already bumped the version; attach scenarios in-place.
    return replace(model, scenarios=model.scenarios + tuple(registered))


def reopen(model: ThreatModel, matrix_id: str, coord: CellCoordinate, note: str) -> ThreatModel:
    """Return a resolved cell to unresolved; the note lands in the audit log.

    Reopening a documented cell withdraws this cell from its scenarios'
    source lists; scenarios left without any source cell are dropped, along
    with their risk scores.
    """
    matrix = model.matrix(matrix_id)
    resolution = matrix.resolution(coord)
    if resolution.state is CellState.UNRESOLVED:
        raise NotUnresolved(f"cell {coord} in {matrix_id} is not resolved")
    if not note.strip():
        raise EmptyRationale("reopening requires an audit note")

    model = _replace_matrix(model, matrix.with_cell(coord, UNRESOLVED))
    if resolution.state is not CellState.DOCUMENTED:
        return model

    kept: list[ThreatScenario] = []
    dropped: set[str] = set()
    for scenario in model.scenarios:
        if scenario.id not in resolution.scenario_refs:
            kept.append(scenario)
            continue
        remaining = tuple(
            sc for sc in scenario.source_cells if sc != (matrix_id, coord)
        )
        if remaining:
            kept.append(replace(scenario, source_cells=remaining))
        else:
            dropped.add(scenario.id)
    scores = tuple(s for s in model.scores if s.scenario_ref not in dropped)
    return replace(model, scenarios=tuple(kept), scores=scores)


# ---------------------------------------------------------------------------
# Queries
# ---------------------------------------------------------------------------


def coverage(matrix: CollusionMatrix) -> Coverage:
    counts = {state: 0 for state in CellState}
    for res in matrix.cells.values():
        counts[res.state] += 1
    return Coverage(
        total=len(matrix.cells),
        unresolved=counts[CellState.UNRESOLVED],
        eliminated=counts[CellState.ELIMINATED],
        merged=counts[CellState.MERGED],
        documented=counts[CellState.DOCUMENTED],
    )


def chain_terminus(matrix: CollusionMatrix, coord: CellCoordinate) -> CellCoordinate:
    """Follow merge links from a cell to the end of its chain."""
    seen = {coord}
    current = coord
    while True:
        res = matrix.resolution(current)
        if res.state is not CellState.MERGED:
            return current
        current = res.merge_target
        if current in seen:
            raise MergeCycle(f"merge links of {matrix.id} contain a cycle at {current}")
        seen.add(current)


def distilled_scenarios(model: ThreatModel, matrix_id: str) -> list[ThreatScenario]:
    """The deduplicated scenarios of a fully resolved matrix.

    Merged cells contribute nothing directly: each chain must end at a
    documented cell, which carries the threat.
    """
    matrix = model.matrix(matrix_id)
    cov = coverage(matrix)
    if cov.unresolved:
        raise MatrixIncomplete(
            f"matrix {matrix_id} still has {cov.unresolved} unresolved cells"
        )
    seen: set[str] = set()
    out: list[ThreatScenario] = []
    for coord in matrix.ordered_coords():
        res = matrix.cells[coord]
        if res.state is CellState.MERGED:
            terminus = chain_terminus(matrix, coord)
            if matrix.cells[terminus].state is not CellState.DOCUMENTED:
                raise DanglingMergeChain(
                    f"merge chain from {coord} ends at {terminus}, which is "
                    f"{matrix.cells[terminus].state.value}"
                )
        if res.state is CellState.DOCUMENTED:
            for ref in res.scenario_refs:
                if ref not in seen:
                    seen.add(ref)
                    out.append(model.scenario(ref))
    return out


# ---------------------------------------------------------------------------
# Validation hooks (called from model.validate_model)
# ---------------------------------------------------------------------------


def validate_collusion_state(model: ThreatModel) -> list[Finding]:
    findings: list[Finding] = []

    def err(message: str, location: str) -> None:
        findings.append(Finding(Severity.ERROR, message, location))

    role_names = set(model.role_names())
    category_ids = {c.id for c in model.categories}
    scenario_ids = {s.id for s in model.scenarios}
    pairs: set[tuple[str, str | None]] = set()
    for matrix in model.matrices:
        loc = f"matrices/{matrix.id}"
        if matrix.category_ref not in category_ids:
            err(f"matrix references unknown category {matrix.category_ref!r}", loc)
        if not matrix.role_scope:
            err("empty role scope", loc)
            continue
        if not set(matrix.role_scope) <= role_names:
            err("role scope names roles missing from the model", loc)
        key = (matrix.category_ref, matrix.instance_tag)
        if key in pairs:
            err("duplicate matrix for one category instance", loc)
        pairs.add(key)
        expected = cell_count(len(matrix.role_scope))
        if len(matrix.cells) != expected:
            err(
                f"matrix holds {len(matrix.cells)} cells, expected {expected}",
                loc,
            )
        scope = set(matrix.role_scope)
        for coord, res in matrix.cells.items():
            if not (set(coord.attackers.roles) | set(coord.targets.roles)) <= scope:
                err(f"cell {coord} leaves the role scope", loc)
            if res.state is CellState.MERGED:
                if res.merge_target not in matrix.cells:
                    err(f"cell {coord} merges into a cell outside the matrix", loc)
            if res.state is CellState.DOCUMENTED:
                for ref in res.scenario_refs:
                    if ref not in scenario_ids:
                        err(f"cell {coord} documents unknown scenario {ref!r}", loc)
        try:
            for coord, res in matrix.cells.items():
                if res.state is CellState.MERGED:
                    chain_terminus(matrix, coord)
        except MergeCycle as exc:
            err(str(exc), loc)

    matrix_ids = {m.id for m in model.matrices}
    for scenario in model.scenarios:
        loc = f"scenarios/{scenario.id}"
        if not scenario.source_cells:
            err("scenario has no source cell", loc)
        for matrix_id, coord in scenario.source_cells:
            if matrix_id not in matrix_ids:
                err(f"scenario sourced from unknown matrix {matrix_id!r}", loc)
            else:
                if coord not in model.matrix(matrix_id).cells:
                    err(f"scenario sourced from unknown cell {coord}", loc)
        if not scenario.description.strip() or not scenario.action_flow:
            err("scenario lacks a description or action flow", loc)
    for sid in sorted({s.id for s in model.scenarios}):
        if sum(1 for s in model.scenarios if s.id == sid) > 1:
            err(f"duplicate scenario id {sid!r}", "scenarios")
    return findings
