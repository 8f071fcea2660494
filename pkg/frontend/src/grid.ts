/**
 * Grid view-model: a pure projection of one matrix payload.
 *
 * The view-model mirrors server state at the payload's declared model
 * version and is rebuilt from a fresh payload after every acknowledged
 * write; nothing here mutates locally.
 *
 * Color convention: ruled-out cells dark, merged cells rose, documented
 * cells highlighted, unresolved cells neutral.
 */

import type { CellPayload, CellStateName, MatrixPayload } from "./types.js";

export type CellColor = "neutral" | "dark" | "rose" | "highlight";

export interface GridCellView {
  cellId: string;
  attackers: string;
  targets: string;
  state: CellStateName;
  color: CellColor;
  /** Short marker drawn in the cell: "", "X", "→", or "D<k>". */
  glyph: string;
  /** First line of the rationale, truncated for the cell tooltip. */
  rationalePreview: string;
  scenarioCount: number;
  /** Cell id the merge arrow points at, for merged cells only. */
  mergeTarget: string | null;
}

export interface CoverageSummary {
  total: number;
  unresolved: number;
  eliminated: number;
  merged: number;
  documented: number;
  fractionResolved: number;
  percentLabel: string;
}

export interface GridViewModel {
  matrixId: string;
  title: string;
  version: number;
  roleScope: string[];
  attackerRows: string[];
  targetColumns: string[];
  /** rows[i][j] is the cell for attackerRows[i] x targetColumns[j]. */
  rows: GridCellView[][];
  coverage: CoverageSummary;
}

const COLOR_BY_STATE: Record<CellStateName, CellColor> = {
  unresolved: "neutral",
  eliminated: "dark",
  merged: "rose",
  documented: "highlight",
};

export function cellId(attackers: string, targets: string): string {
  return `${attackers}->${targets}`;
}

function preview(text: string | undefined, limit = 80): string {
  if (!text) return "";
  const firstLine = text.split("\n", 1)[0];
  return firstLine.length <= limit ? firstLine : `${firstLine.slice(0, limit - 1)}…`;
}

function toCellView(id: string, attackers: string, targets: string, cell: CellPayload): GridCellView {
  const scenarioCount = cell.scenario_refs?.length ?? 0;
  let glyph = "";
  if (cell.state === "eliminated") glyph = "X";
  if (cell.state === "merged") glyph = "→";
  if (cell.state === "documented") glyph = `D${scenarioCount}`;
  return {
    cellId: id,
    attackers,
    targets,
    state: cell.state,
    color: COLOR_BY_STATE[cell.state],
    glyph,
    rationalePreview: preview(cell.rationale),
    scenarioCount,
    mergeTarget: cell.merge_target ?? null,
  };
}

export function buildGridViewModel(payload: MatrixPayload): GridViewModel {
  const rows: GridCellView[][] = payload.attacker_order.map((attackers) =>
    payload.target_order.map((targets) => {
      const id = cellId(attackers, targets);
      const cell = payload.cells[id];
      if (!cell) throw new Error(`matrix payload is missing cell ${id}`);
      return toCellView(id, attackers, targets, cell);
    }),
  );
  const cov = payload.coverage;
  const instance = payload.instance_tag ? ` [${payload.instance_tag}]` : "";
  return {
    matrixId: payload.id,
    title: `${payload.id}: ${payload.category_name}${instance} (${payload.asset})`,
    version: payload.version,
    roleScope: payload.role_scope,
    attackerRows: [...payload.attacker_order],
    targetColumns: [...payload.target_order],
    rows,
    coverage: {
      total: cov.total,
      unresolved: cov.unresolved,
      eliminated: cov.eliminated,
      merged: cov.merged,
      documented: cov.documented,
      fractionResolved: cov.fraction_resolved,
      percentLabel: `${Math.round(cov.fraction_resolved * 100)}%`,
    },
  };
}

export function countByColor(model: GridViewModel): Record<CellColor, number> {
  const counts: Record<CellColor, number> = { neutral: 0, dark: 0, rose: 0, highlight: 0 };
  for (const row of model.rows) {
    for (const cell of row) counts[cell.color] += 1;
  }
  return counts;
}

/**
 * Cells a given cell may legally merge into: unresolved or documented,
 * never itself. (Eliminated cells cover nothing; merged cells would hide
 * the end of the chain — the service would reject both.) The source is
 * itself unresolved, so no choice from this list can close a cycle.
 */
export function legalMergeTargets(payload: MatrixPayload, sourceCellId: string): string[] {
  const out: string[] = [];
  for (const attackers of payload.attacker_order) {
    for (const targets of payload.target_order) {
      const id = cellId(attackers, targets);
      if (id === sourceCellId) continue;
      const state = payload.cells[id]?.state;
      if (state === "unresolved" || state === "documented") out.push(id);
    }
  }
  return out;
}

/** Explains why a cell cannot be picked as a merge target, for the dialog. */
export function mergeTargetDisabledReason(
  payload: MatrixPayload,
  sourceCellId: string,
  targetCellId: string,
): string | null {
  if (targetCellId === sourceCellId) return "a cell cannot merge into itself";
  const state = payload.cells[targetCellId]?.state;
  if (state === "eliminated") return "eliminated cells cover no threat";
  if (state === "merged") return "already merged; pick the end of its chain";
  return null;
}
