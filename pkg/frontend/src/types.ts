/**
 * Payload types of the local threat-model service API.
 *
 * These mirror the JSON the service emits; the view-model layer never
 * invents state that is not in a payload.
 */

export type CellStateName = "unresolved" | "eliminated" | "merged" | "documented";

export interface CellPayload {
  state: CellStateName;
  rationale?: string;
  merge_target?: string;
  scenario_refs?: string[];
}

export interface CoveragePayload {
  total: number;
  unresolved: number;
  eliminated: number;
  merged: number;
  documented: number;
  fraction_resolved: number;
}

export interface MatrixPayload {
  id: string;
  category_ref: string;
  category_name: string;
  asset: string;
  instance_tag: string | null;
  role_scope: string[];
  attacker_order: string[];
  target_order: string[];
  cells: Record<string, CellPayload>;
  coverage: CoveragePayload;
  version: number;
}

export interface MatrixSummaryPayload {
  id: string;
  category_ref: string;
  category_name: string;
  asset: string;
  instance_tag: string | null;
  role_scope: string[];
  cells: number;
  unresolved: number;
  fraction_resolved: number;
}

export interface MatrixListPayload {
  matrices: MatrixSummaryPayload[];
  version: number;
}

export interface PerMatrixStats {
  matrix_id: string;
  scope_size: number;
  cells: number;
  eliminated: number;
  merged: number;
  documented: number;
  unresolved: number;
  scenarios: number;
}

export interface StatsPayload {
  steps_covered: number;
  matrices: number;
  total_cells: number;
  distilled_scenarios: number;
  unresolved_cells: number;
  per_matrix: PerMatrixStats[];
  version: number;
  name: string;
}

export interface ScorePayload {
  likelihood: number;
  severity: number;
  score: number;
  notes: string;
}

export interface ScenarioPayload {
  id: string;
  title: string;
  description: string;
  attackers: string;
  targets: string;
  asset_refs: string[];
  action_flow: string[];
  preconditions: string[];
  capabilities: string[];
  source_cells: [string, string][];
  score: ScorePayload | null;
}

export interface ScenarioListPayload {
  scenarios: ScenarioPayload[];
  version: number;
}

export interface CategoryPayload {
  id: string;
  asset_ref: string;
  instance_tag: string | null;
  name: string;
  description: string;
  negates: string[];
  origin: string;
  excluded: boolean;
  exclusion_rationale: string;
}

export interface NetworkNodePayload {
  id: string;
  label: string;
  node_kind: "participant" | "asset";
}

export interface NetworkEdgePayload {
  source: string;
  target: string;
  label: string;
}

export interface ModulePayload {
  name: string;
  description: string;
  asset_refs: string[];
  network_model: { nodes: NetworkNodePayload[]; edges: NetworkEdgePayload[] };
}

export interface ModelPayload {
  name: string;
  version: number;
  categories: CategoryPayload[];
  modules: ModulePayload[];
  assumptions: string[];
  dependencies: string[];
  coverage_notes: string[];
}

export interface ModelDocumentPayload {
  schema_version: number;
  model: ModelPayload;
}

export interface ScenarioDraft {
  title: string;
  description: string;
  attackers: string;
  targets: string;
  asset_refs: string[];
  action_flow: string[];
  preconditions: string[];
  capabilities: string[];
}

export interface ErrorBody {
  error: { code: string; message: string; expected?: number; actual?: number };
}
