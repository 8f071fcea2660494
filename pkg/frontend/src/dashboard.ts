/**
 * Dashboard projections: stats block, category table, scored scenario
 * register, and a simple two-column layout for network-model diagrams.
 */

import type {
  CategoryPayload,
  ModulePayload,
  ScenarioPayload,
  StatsPayload,
} from "./types.js";

export interface StatsView {
  name: string;
  stepsCovered: number;
  matrices: number;
  totalCells: number;
  distilledScenarios: number;
  unresolvedCells: number;
  progressLabel: string;
  /** 0..1 share of cells already triaged. */
  progress: number;
}

export function buildStatsView(stats: StatsPayload): StatsView {
  const resolved = stats.total_cells - stats.unresolved_cells;
  const progress = stats.total_cells ? resolved / stats.total_cells : 0;
  return {
    name: stats.name,
    stepsCovered: stats.steps_covered,
    matrices: stats.matrices,
    totalCells: stats.total_cells,
    distilledScenarios: stats.distilled_scenarios,
    unresolvedCells: stats.unresolved_cells,
    progress,
    progressLabel: `${resolved}/${stats.total_cells} cells resolved`,
  };
}

export interface CategoryRow {
  id: string;
  asset: string;
  instance: string;
  name: string;
  origin: string;
  status: string;
  excluded: boolean;
  description: string;
}

export function buildCategoryRows(categories: CategoryPayload[]): CategoryRow[] {
  return categories.map((c) => ({
    id: c.id,
    asset: c.asset_ref,
    instance: c.instance_tag ?? "-",
    name: c.name,
    origin: c.origin,
    excluded: c.excluded,
    status: c.excluded ? `excluded: ${c.exclusion_rationale}` : "included",
    description: c.description,
  }));
}

/**
 * Register order: score descending, unscored last, ties by id. Matches the
 * report ordering so the dashboard and the exported report agree.
 */
export function sortScenarioRegister(scenarios: ScenarioPayload[]): ScenarioPayload[] {
  return [...scenarios].sort((a, b) => {
    const sa = a.score?.score ?? -1;
    const sb = b.score?.score ?? -1;
    if (sa !== sb) return sb - sa;
    return a.id < b.id ? -1 : a.id > b.id ? 1 : 0;
  });
}

export interface DiagramNode {
  id: string;
  label: string;
  kind: "participant" | "asset";
  x: number;
  y: number;
}

export interface DiagramEdge {
  from: DiagramNode;
  to: DiagramNode;
  label: string;
}

export interface Diagram {
  module: string;
  width: number;
  height: number;
  nodes: DiagramNode[];
  edges: DiagramEdge[];
}

const COLUMN_X = { participant: 90, asset: 330 } as const;
const ROW_HEIGHT = 64;
const MARGIN_Y = 40;

/**
 * Lay a module's network model out in two columns: participants on the
 * left, assets on the right. Good enough for the handful of nodes a module
 * declares, and fully deterministic.
 */
export function layoutNetworkModel(module: ModulePayload): Diagram {
  const counters = { participant: 0, asset: 0 };
  const nodes: DiagramNode[] = module.network_model.nodes.map((n) => {
    const row = counters[n.node_kind]++;
    return {
      id: n.id,
      label: n.label,
      kind: n.node_kind,
      x: COLUMN_X[n.node_kind],
      y: MARGIN_Y + row * ROW_HEIGHT,
    };
  });
  const byId = new Map(nodes.map((n) => [n.id, n]));
  const edges: DiagramEdge[] = [];
  for (const e of module.network_model.edges) {
    const from = byId.get(e.source);
    const to = byId.get(e.target);
    if (from && to) edges.push({ from, to, label: e.label });
  }
  const rows = Math.max(counters.participant, counters.asset, 1);
  return {
    module: module.name,
    width: 420,
    height: MARGIN_Y * 2 + (rows - 1) * ROW_HEIGHT + 24,
    nodes,
    edges,
  };
}
