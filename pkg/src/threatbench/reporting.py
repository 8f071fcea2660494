"""Model statistics, ASCII matrix grids, and full report export.

All output is deterministic for a given model: orderings are canonical
(model insertion order for entities, canonical subset order for matrix
rows and columns, score-descending for the scenario register) and the
grids are ASCII-only so reports diff cleanly.
"""

from __future__ import annotations

from dataclasses import dataclass

from .collusion import CellCoordinate, CellState, CollusionMatrix, coverage
from .errors import OutOfRange
from .model import ThreatModel
from .serialize import SCHEMA_VERSION, canonical_dumps, document_to_dict

GLYPH_UNRESOLVED = "."
GLYPH_ELIMINATED = "X"
GLYPH_MERGED = "->"
GLYPH_DOCUMENTED = "D"


@dataclass(frozen=True)
class MatrixStats:
    matrix_id: str
    scope_size: int
    cells: int
    eliminated: int
    merged: int
    documented: int
    unresolved: int
    scenarios: int


@dataclass(frozen=True)
class ModelStats:
    steps_covered: int
    matrices: int
    total_cells: int
    distilled_scenarios: int
    unresolved_cells: int
    per_matrix: tuple[MatrixStats, ...]


def compute_stats(model: ThreatModel) -> ModelStats:
    """Per-matrix and whole-model counts; partial models are fine.

    ``total_cells`` counts the full pre-reduction space (every generated
    cell); the post-reduction size of the model is ``distilled_scenarios``.
    """
    rows = []
    for matrix in model.matrices:
        cov = coverage(matrix)
        refs = {
            ref
            for res in matrix.cells.values()
            if res.state is CellState.DOCUMENTED
            for ref in res.scenario_refs
        }
        rows.append(
            MatrixStats(
                matrix_id=matrix.id,
                scope_size=len(matrix.role_scope),
                cells=cov.total,
                eliminated=cov.eliminated,
                merged=cov.merged,
                documented=cov.documented,
                unresolved=cov.unresolved,
                scenarios=len(refs),
            )
        )
    steps = 0
    if model.roles or model.assets:
        steps = 1
    if model.categories:
        steps = 2
    if model.matrices:
        steps = 3
    if model.scores:
        steps = 4
    return ModelStats(
        steps_covered=steps,
        matrices=len(rows),
        total_cells=sum(r.cells for r in rows),
        distilled_scenarios=len(model.scenarios),
        unresolved_cells=sum(r.unresolved for r in rows),
        per_matrix=tuple(rows),
    )


def stats_to_dict(stats: ModelStats) -> dict:
    return {
        "steps_covered": stats.steps_covered,
        "matrices": stats.matrices,
        "total_cells": stats.total_cells,
        "distilled_scenarios": stats.distilled_scenarios,
        "unresolved_cells": stats.unresolved_cells,
        "per_matrix": [
            {
                "matrix_id": r.matrix_id,
                "scope_size": r.scope_size,
                "cells": r.cells,
                "eliminated": r.eliminated,
                "merged": r.merged,
                "documented": r.documented,
                "unresolved": r.unresolved,
                "scenarios": r.scenarios,
            }
            for r in stats.per_matrix
        ],
    }


# ---------------------------------------------------------------------------
# Matrix grid rendering
# ---------------------------------------------------------------------------


def cell_glyph(matrix: CollusionMatrix, coord) -> str:
    res = matrix.cells[coord]
    if res.state is CellState.UNRESOLVED:
        return GLYPH_UNRESOLVED
    if res.state is CellState.ELIMINATED:
        return GLYPH_ELIMINATED
    if res.state is CellState.MERGED:
        return f"{GLYPH_MERGED}{res.merge_target}"
    return f"{GLYPH_DOCUMENTED}{len(res.scenario_refs)}"


def render_matrix_text(matrix: CollusionMatrix) -> str:
    """ASCII grid: attacker rows by canonical order, target columns likewise.

    Cell glyphs: "." unresolved, "X" eliminated, "-><cell>" merged into
    that cell, "D<k>" documented with k scenarios.
    """
    attackers = matrix.attacker_sets()
    targets = matrix.target_sets()
    header = ["attackers\\targets"] + [str(t) for t in targets]
    body = []
    for a in attackers:
        body.append(
            [str(a)] + [cell_glyph(matrix, CellCoordinate(a, t)) for t in targets]
        )
    widths = [
        max(len(row[i]) for row in [header] + body) for i in range(len(header))
    ]
    lines = [" | ".join(cell.ljust(widths[i]) for i, cell in enumerate(header)).rstrip()]
    lines.append("-+-".join("-" * w for w in widths))
    for row in body:
        lines.append(
            " | ".join(cell.ljust(widths[i]) for i, cell in enumerate(row)).rstrip()
        )
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Full report
# ---------------------------------------------------------------------------


def export_report(model: ThreatModel, format: str = "markdown", audit_log: list | None = None):
    if format == "structured":
        log = [e.to_dict() for e in audit_log] if audit_log else []
        return canonical_dumps(document_to_dict(SCHEMA_VERSION, model, log))
    if format == "markdown":
        return render_markdown_report(model)
    raise OutOfRange(f"unknown report format {format!r}")


def _md_table(headers: list[str], rows: list[list[str]]) -> list[str]:
    out = ["| " + " | ".join(headers) + " |", "|" + "|".join(" --- " for _ in headers) + "|"]
    for row in rows:
        out.append("| " + " | ".join(cell.replace("|", "\\|") for cell in row) + " |")
    return out


def render_markdown_report(model: ThreatModel) -> str:
    stats = compute_stats(model)
    category_names = {c.id: c for c in model.categories}
    scores = {s.scenario_ref: s for s in model.scores}
    lines: list[str] = [f"# Threat model: {model.name}", ""]
    lines += [f"- model version: {model.version}", f"- steps covered: {stats.steps_covered} of 4", ""]

    lines += ["## System model", ""]
    if model.roles:
        lines += _md_table(
            ["role", "description"], [[r.name, r.description] for r in model.roles]
        )
    else:
        lines.append("No roles declared.")
    lines.append("")
    if model.assets:
        lines += _md_table(
            ["asset", "kind", "instances", "security requirements"],
            [
                [
                    a.name,
                    a.kind.value,
                    ", ".join(a.instance_tags) or "-",
                    "; ".join(f"{r.id}: {r.statement}" for r in a.security_requirements),
                ]
                for a in model.assets
            ],
        )
    else:
        lines.append("No assets declared.")
    lines.append("")
    for module in model.modules:
        lines.append(f"### Module: {module.name}")
        if module.description:
            lines.append(module.description)
        lines.append("")
        if module.asset_refs:
            lines.append("- assets: " + ", ".join(module.asset_refs))
        for edge in module.network_model.edges:
            label = f" ({edge.label})" if edge.label else ""
            lines.append(f"- {edge.source} -> {edge.target}{label}")
        lines.append("")
    lines.append("### Assumptions")
    lines += [f"- {a}" for a in model.assumptions] or ["- none recorded"]
    lines.append("")
    lines.append("### Dependencies")
    lines += [f"- {d}" for d in model.dependencies] or ["- none recorded"]
    lines.append("")

    lines += ["## Threat categories", ""]
    if model.categories:
        rows = []
        for c in model.categories:
            status = f"excluded: {c.exclusion_rationale}" if c.excluded else "included"
            rows.append(
                [
                    c.id,
                    c.asset_ref,
                    c.instance_tag or "-",
                    c.name,
                    c.origin.value,
                    status,
                    c.description,
                ]
            )
        lines += _md_table(
            ["id", "asset", "instance", "category", "origin", "status", "description"], rows
        )
    else:
        lines.append("No categories identified yet.")
    lines.append("")
    if model.coverage_notes:
        lines += ["### Coverage notes", ""]
        lines += [f"- {note}" for note in model.coverage_notes]
        lines.append("")

    lines += ["## Collusion matrices", ""]
    if model.matrices:
        lines.append(
            "Convention: a threat case covered by another matrix is recorded as "
            "an elimination whose rationale cites that matrix; merges never "
            "cross matrices."
        )
        lines.append("")
    else:
        lines.append("No matrices generated yet.")
        lines.append("")
    for matrix in model.matrices:
        cov = coverage(matrix)
        category = category_names.get(matrix.category_ref)
        title = category.name if category else matrix.category_ref
        suffix = f" [{matrix.instance_tag}]" if matrix.instance_tag else ""
        lines.append(f"### {matrix.id}: {title}{suffix}")
        lines.append("")
        lines.append(f"- asset: {category.asset_ref if category else '?'}")
        lines.append(f"- scope: {', '.join(matrix.role_scope)}")
        lines.append(
            f"- coverage: {cov.total} cells; {cov.eliminated} eliminated, "
            f"{cov.merged} merged, {cov.documented} documented, "
            f"{cov.unresolved} unresolved ({cov.fraction_resolved * 100:.1f}% resolved)"
        )
        lines += ["", "```", render_matrix_text(matrix).rstrip("\n"), "```", ""]
        resolved = [
            (coord, matrix.cells[coord])
            for coord in matrix.ordered_coords()
            if matrix.cells[coord].state is not CellState.UNRESOLVED
        ]
        if resolved:
            lines.append("Rationale appendix:")
            for coord, res in resolved:
                if res.state is CellState.ELIMINATED:
                    lines.append(f"- `{coord}` eliminated: {res.rationale}")
                elif res.state is CellState.MERGED:
                    lines.append(
                        f"- `{coord}` merged into `{res.merge_target}`: {res.rationale}"
                    )
                else:
                    lines.append(
                        f"- `{coord}` documented: " + ", ".join(res.scenario_refs)
                    )
            lines.append("")

    lines += ["## Distilled threat scenarios", ""]
    if model.scenarios:
        def sort_key(s):
            score = scores.get(s.id)
            return (-(score.score if score else 0), s.id)

        for scenario in sorted(model.scenarios, key=sort_key):
            score = scores.get(scenario.id)
            score_text = (
                f"risk {score.score} (likelihood {score.likelihood} x severity {score.severity})"
                if score
                else "unscored"
            )
            lines.append(f"### {scenario.id}: {scenario.title} — {score_text}")
            lines.append("")
            lines.append(f"- attackers: {scenario.attackers}")
            lines.append(f"- targets: {scenario.targets}")
            if scenario.asset_refs:
                lines.append(f"- assets: {', '.join(scenario.asset_refs)}")
            lines.append(
                "- source cells: "
                + ", ".join(f"{mid}:`{coord}`" for mid, coord in scenario.source_cells)
            )
            if score and score.notes:
                lines.append(f"- notes: {score.notes}")
            lines += ["", scenario.description, ""]
            if scenario.action_flow:
                lines.append("Action flow:")
                lines += [
                    f"{i}. {step}" for i, step in enumerate(scenario.action_flow, start=1)
                ]
                lines.append("")
            if scenario.preconditions:
                lines.append("Preconditions:")
                lines += [f"- {p}" for p in scenario.preconditions]
                lines.append("")
            if scenario.capabilities:
                lines.append("Required capabilities:")
                lines += [f"- {c}" for c in scenario.capabilities]
                lines.append("")
    else:
        lines += ["No scenarios documented yet.", ""]

    lines += ["## Statistics", ""]
    lines.append(f"- matrices: {stats.matrices}")
    lines.append(f"- total threat cases (cells before reduction): {stats.total_cells}")
    lines.append(f"- distilled threat scenarios: {stats.distilled_scenarios}")
    lines.append(f"- unresolved cells: {stats.unresolved_cells}")
    lines.append("")
    if stats.per_matrix:
        lines += _md_table(
            [
                "matrix",
                "scope size",
                "cells",
                "eliminated",
                "merged",
                "documented",
                "unresolved",
                "scenarios",
            ],
            [
                [
                    r.matrix_id,
                    str(r.scope_size),
                    str(r.cells),
                    str(r.eliminated),
                    str(r.merged),
                    str(r.documented),
                    str(r.unresolved),
                    str(r.scenarios),
                ]
                for r in stats.per_matrix
            ],
        )
        lines.append("")
    return "\n".join(lines)
