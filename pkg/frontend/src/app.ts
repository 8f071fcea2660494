/**
 * Workbench application: dashboard + per-matrix triage grid.
 *
 * All state lives on the server; this layer renders payloads and issues
 * version-conditioned writes. After every acknowledged write the affected
 * payloads are refetched, so the screen never shows unacknowledged state.
 * A 409 raises the reload banner and freezes the session.
 */

import { ApiError, WorkbenchClient } from "./api.js";
import {
  buildCategoryRows,
  buildStatsView,
  layoutNetworkModel,
  sortScenarioRegister,
} from "./dashboard.js";
import {
  buildGridViewModel,
  legalMergeTargets,
  mergeTargetDisabledReason,
  type GridCellView,
} from "./grid.js";
import { bannerText, initialSync, syncAdvanced, syncAfterWriteError, type SyncState } from "./sync.js";
import type { MatrixPayload, ModelDocumentPayload, ScenarioDraft } from "./types.js";

const client = new WorkbenchClient("");

interface AppState {
  sync: SyncState;
  view: { kind: "dashboard" } | { kind: "matrix"; id: string };
}

const state: AppState = { sync: initialSync(0), view: { kind: "dashboard" } };

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
  children: (Node | string)[] = [],
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [key, value] of Object.entries(attrs)) {
    if (key === "class") node.className = value;
    else node.setAttribute(key, value);
  }
  node.append(...children);
  return node;
}

function root(): HTMLElement {
  return document.getElementById("app") as HTMLElement;
}

function renderBanner(): Node | "" {
  if (!state.sync.bannerVisible) return "";
  const reload = el("button", { class: "banner-reload" }, ["reload"]);
  reload.addEventListener("click", () => window.location.reload());
  return el("div", { class: "banner", role: "alert" }, [bannerText(state.sync), reload]);
}

async function guardedWrite(action: () => Promise<{ version: number }>): Promise<boolean> {
  try {
    const result = await action();
    state.sync = syncAdvanced(state.sync, result.version);
    return true;
  } catch (error) {
    state.sync = syncAfterWriteError(state.sync, error);
    if (!state.sync.bannerVisible && error instanceof ApiError) {
      window.alert(`rejected: ${error.message}`);
    }
    await render();
    return false;
  }
}

// ---------------------------------------------------------------------------
// Dashboard
// ---------------------------------------------------------------------------

async function renderDashboard(): Promise<Node> {
  const [stats, matrices, scenarios, doc] = await Promise.all([
    client.stats(),
    client.matrices(),
    client.scenarios(),
    client.model(),
  ]);
  state.sync = syncAdvanced(state.sync, stats.version);
  const statsView = buildStatsView(stats);

  const container = el("div", { class: "dashboard" });
  container.append(
    el("section", { class: "stats" }, [
      el("h2", {}, ["Model status"]),
      el("p", {}, [
        `steps covered: ${statsView.stepsCovered} of 4 · matrices: ${statsView.matrices} · ` +
          `threat cases: ${statsView.totalCells} · distilled scenarios: ${statsView.distilledScenarios} · ` +
          `unresolved: ${statsView.unresolvedCells}`,
      ]),
      progressBar(statsView.progress, statsView.progressLabel),
    ]),
  );

  const matrixList = el("section", {}, [el("h2", {}, ["Collusion matrices"])]);
  const table = el("table", { class: "grid-list" });
  table.append(
    el("tr", {}, ["matrix", "category", "asset", "scope", "cells", "resolved"].map((h) => el("th", {}, [h]))),
  );
  for (const m of matrices.matrices) {
    const link = el("a", { href: `#matrix/${m.id}` }, [m.id]);
    const row = el("tr", {}, [
      el("td", {}, [link]),
      el("td", {}, [m.category_name + (m.instance_tag ? ` [${m.instance_tag}]` : "")]),
      el("td", {}, [m.asset]),
      el("td", {}, [m.role_scope.join(", ")]),
      el("td", {}, [String(m.cells)]),
      el("td", {}, [`${Math.round(m.fraction_resolved * 100)}%`]),
    ]);
    table.append(row);
  }
  matrixList.append(table);
  container.append(matrixList);

  const categories = el("section", {}, [el("h2", {}, ["Threat categories"])]);
  const catTable = el("table", { class: "grid-list" });
  catTable.append(
    el("tr", {}, ["id", "asset", "category", "origin", "status"].map((h) => el("th", {}, [h]))),
  );
  for (const row of buildCategoryRows(doc.model.categories)) {
    catTable.append(
      el("tr", { class: row.excluded ? "excluded" : "" }, [
        el("td", {}, [row.id]),
        el("td", {}, [row.asset + (row.instance === "-" ? "" : ` [${row.instance}]`)]),
        el("td", { title: row.description }, [row.name]),
        el("td", {}, [row.origin]),
        el("td", {}, [row.status]),
      ]),
    );
  }
  categories.append(catTable);
  container.append(categories);

  const register = el("section", {}, [el("h2", {}, ["Distilled threat scenarios"])]);
  if (scenarios.scenarios.length === 0) {
    register.append(el("p", {}, ["none documented yet"]));
  }
  for (const scenario of sortScenarioRegister(scenarios.scenarios)) {
    const scoreLabel = scenario.score
      ? `risk ${scenario.score.score} (${scenario.score.likelihood}×${scenario.score.severity})`
      : "unscored";
    const details = el("details", { class: "scenario" }, [
      el("summary", {}, [`${scenario.id} — ${scenario.title} — ${scoreLabel}`]),
      el("p", {}, [scenario.description]),
      el("p", {}, [`attackers: ${scenario.attackers} · targets: ${scenario.targets}`]),
      el("ol", {}, scenario.action_flow.map((step) => el("li", {}, [step]))),
      scoreForm(scenario.id),
    ]);
    register.append(details);
  }
  container.append(register);

  const diagrams = el("section", {}, [el("h2", {}, ["Network models"])]);
  for (const module of doc.model.modules) {
    diagrams.append(networkSvg(module.name, doc));
  }
  container.append(diagrams);
  return container;
}

function progressBar(fraction: number, label: string): Node {
  const fill = el("div", { class: "progress-fill" });
  fill.style.width = `${Math.round(fraction * 100)}%`;
  return el("div", { class: "progress", title: label }, [fill, el("span", {}, [label])]);
}

function scoreForm(scenarioId: string): Node {
  const likelihood = el("input", { type: "number", min: "1", max: "5", value: "3" });
  const severity = el("input", { type: "number", min: "1", max: "5", value: "3" });
  const button = el("button", {}, ["score"]);
  button.addEventListener("click", async () => {
    const ok = await guardedWrite(() =>
      client.score(
        scenarioId,
        Number(likelihood.value),
        Number(severity.value),
        "",
        state.sync.heldVersion,
      ),
    );
    if (ok) await render();
  });
  return el("div", { class: "score-form" }, [
    "likelihood ", likelihood, " severity ", severity, button,
  ]);
}

function networkSvg(moduleName: string, doc: ModelDocumentPayload): Node {
  const module = doc.model.modules.find((m) => m.name === moduleName);
  if (!module) return el("span");
  const diagram = layoutNetworkModel(module);
  const ns = "http://www.w3.org/2000/svg";
  const svg = document.createElementNS(ns, "svg");
  svg.setAttribute("width", String(diagram.width));
  svg.setAttribute("height", String(diagram.height));
  svg.setAttribute("class", "diagram");
  for (const edge of diagram.edges) {
    const line = document.createElementNS(ns, "line");
    line.setAttribute("x1", String(edge.from.x));
    line.setAttribute("y1", String(edge.from.y));
    line.setAttribute("x2", String(edge.to.x));
    line.setAttribute("y2", String(edge.to.y));
    line.setAttribute("class", "diagram-edge");
    svg.append(line);
    const text = document.createElementNS(ns, "text");
    text.setAttribute("x", String((edge.from.x + edge.to.x) / 2));
    text.setAttribute("y", String((edge.from.y + edge.to.y) / 2 - 4));
    text.setAttribute("class", "diagram-edge-label");
    text.textContent = edge.label;
    svg.append(text);
  }
  for (const node of diagram.nodes) {
    const shape = document.createElementNS(ns, node.kind === "participant" ? "circle" : "rect");
    if (node.kind === "participant") {
      shape.setAttribute("cx", String(node.x));
      shape.setAttribute("cy", String(node.y));
      shape.setAttribute("r", "18");
    } else {
      shape.setAttribute("x", String(node.x - 36));
      shape.setAttribute("y", String(node.y - 14));
      shape.setAttribute("width", "72");
      shape.setAttribute("height", "28");
    }
    shape.setAttribute("class", `diagram-node ${node.kind}`);
    svg.append(shape);
    const text = document.createElementNS(ns, "text");
    text.setAttribute("x", String(node.x));
    text.setAttribute("y", String(node.y + 32));
    text.setAttribute("class", "diagram-label");
    text.textContent = node.label;
    svg.append(text);
  }
  return el("figure", {}, [el("figcaption", {}, [moduleName]), svg]);
}

// ---------------------------------------------------------------------------
// Matrix view
// ---------------------------------------------------------------------------

async function renderMatrix(id: string): Promise<Node> {
  const payload = await client.matrix(id);
  state.sync = syncAdvanced(state.sync, payload.version);
  const model = buildGridViewModel(payload);

  const container = el("div", { class: "matrix-view" });
  container.append(
    el("h2", {}, [model.title]),
    el("p", {}, [
      `scope: ${model.roleScope.join(", ")} · ${model.coverage.total} cells · ` +
        `${model.coverage.eliminated} eliminated, ${model.coverage.merged} merged, ` +
        `${model.coverage.documented} documented, ${model.coverage.unresolved} unresolved`,
    ]),
    progressBar(model.coverage.fractionResolved, `${model.coverage.percentLabel} resolved`),
  );

  const table = el("table", { class: "matrix-grid" });
  const header = el("tr", {}, [el("th", {}, ["attackers \\ targets"])]);
  for (const target of model.targetColumns) header.append(el("th", {}, [target]));
  table.append(header);
  for (const row of model.rows) {
    const tr = el("tr", {}, [el("th", {}, [row[0].attackers])]);
    for (const cell of row) tr.append(gridCell(payload, cell));
    table.append(tr);
  }
  container.append(table);
  container.append(el("div", { id: "dialog-slot" }));
  return container;
}

function gridCell(payload: MatrixPayload, cell: GridCellView): HTMLElement {
  const td = el("td", {
    class: `cell ${cell.color}`,
    "data-cell": cell.cellId,
    title: cell.rationalePreview || cell.cellId,
  });
  td.append(cell.glyph);
  if (cell.mergeTarget) {
    td.append(el("span", { class: "merge-target" }, [` ${cell.mergeTarget}`]));
    td.addEventListener("mouseenter", () => highlightTarget(cell.mergeTarget, true));
    td.addEventListener("mouseleave", () => highlightTarget(cell.mergeTarget, false));
  }
  td.addEventListener("click", () => openCellDialog(payload, cell));
  return td;
}

function highlightTarget(targetCellId: string | null, on: boolean): void {
  if (!targetCellId) return;
  const target = document.querySelector(`[data-cell="${CSS.escape(targetCellId)}"]`);
  if (target) target.classList.toggle("merge-arrow-target", on);
}

function openCellDialog(payload: MatrixPayload, cell: GridCellView): void {
  const slot = document.getElementById("dialog-slot");
  if (!slot) return;
  slot.replaceChildren();
  const dialog = el("div", { class: "dialog" }, [
    el("h3", {}, [`${cell.cellId} — ${cell.state}`]),
  ]);
  if (cell.state === "unresolved") {
    dialog.append(eliminateForm(payload, cell), mergeForm(payload, cell), documentForm(payload, cell));
  } else {
    if (cell.rationalePreview) dialog.append(el("p", {}, [cell.rationalePreview]));
    dialog.append(reopenForm(payload, cell));
  }
  const close = el("button", { class: "dialog-close" }, ["close"]);
  close.addEventListener("click", () => slot.replaceChildren());
  dialog.append(close);
  slot.append(dialog);
}

function eliminateForm(payload: MatrixPayload, cell: GridCellView): Node {
  const rationale = el("textarea", { placeholder: "why this cell is no threat", required: "true" });
  const button = el("button", {}, ["eliminate"]);
  button.addEventListener("click", async () => {
    if (!rationale.value.trim()) return window.alert("a rationale is required");
    const ok = await guardedWrite(() =>
      client.eliminate(payload.id, cell.cellId, rationale.value, state.sync.heldVersion),
    );
    if (ok) await render();
  });
  return el("fieldset", {}, [el("legend", {}, ["eliminate"]), rationale, button]);
}

function mergeForm(payload: MatrixPayload, cell: GridCellView): Node {
  const select = el("select");
  const legal = new Set(legalMergeTargets(payload, cell.cellId));
  for (const attackers of payload.attacker_order) {
    for (const targets of payload.target_order) {
      const id = `${attackers}->${targets}`;
      if (id === cell.cellId) continue;
      const option = el("option", { value: id }, [id]);
      if (!legal.has(id)) {
        option.disabled = true;
        const reason = mergeTargetDisabledReason(payload, cell.cellId, id);
        option.textContent = `${id} — ${reason}`;
      }
      select.append(option);
    }
  }
  const rationale = el("textarea", { placeholder: "why the target covers this cell", required: "true" });
  const button = el("button", {}, ["merge"]);
  button.addEventListener("click", async () => {
    if (!rationale.value.trim()) return window.alert("a rationale is required");
    const ok = await guardedWrite(() =>
      client.merge(payload.id, cell.cellId, select.value, rationale.value, state.sync.heldVersion),
    );
    if (ok) await render();
  });
  return el("fieldset", {}, [el("legend", {}, ["merge into"]), select, rationale, button]);
}

/** Scenario form enforcing the documentation checklist as required fields. */
function documentForm(payload: MatrixPayload, cell: GridCellView): Node {
  const title = el("input", { placeholder: "title", required: "true" });
  const description = el("textarea", { placeholder: "attack description", required: "true" });
  const flow = el("textarea", { placeholder: "flow of actions, one step per line", required: "true" });
  const preconditions = el("textarea", { placeholder: "preconditions, one per line" });
  const assets = el("input", { placeholder: "assets, comma-separated", value: payload.asset });
  const button = el("button", {}, ["document"]);
  button.addEventListener("click", async () => {
    if (!title.value.trim() || !description.value.trim() || !flow.value.trim()) {
      return window.alert("title, description, and action flow are required");
    }
    const draft: ScenarioDraft = {
      title: title.value.trim(),
      description: description.value.trim(),
      attackers: cell.attackers,
      targets: cell.targets,
      asset_refs: assets.value.split(",").map((s) => s.trim()).filter(Boolean),
      action_flow: flow.value.split("\n").map((s) => s.trim()).filter(Boolean),
      preconditions: preconditions.value.split("\n").map((s) => s.trim()).filter(Boolean),
      capabilities: [],
    };
    const ok = await guardedWrite(() =>
      client.document(payload.id, cell.cellId, [draft], state.sync.heldVersion),
    );
    if (ok) await render();
  });
  return el("fieldset", {}, [
    el("legend", {}, ["document scenario"]),
    title, description, flow, preconditions, assets, button,
  ]);
}

function reopenForm(payload: MatrixPayload, cell: GridCellView): Node {
  const note = el("textarea", { placeholder: "audit note", required: "true" });
  const button = el("button", {}, ["reopen"]);
  button.addEventListener("click", async () => {
    if (!note.value.trim()) return window.alert("an audit note is required");
    const ok = await guardedWrite(() =>
      client.reopen(payload.id, cell.cellId, note.value, state.sync.heldVersion),
    );
    if (ok) await render();
  });
  return el("fieldset", {}, [el("legend", {}, ["reopen"]), note, button]);
}

// ---------------------------------------------------------------------------
// Routing and boot
// ---------------------------------------------------------------------------

function currentRoute(): AppState["view"] {
  const hash = window.location.hash;
  const match = /^#matrix\/(.+)$/.exec(hash);
  return match ? { kind: "matrix", id: match[1] } : { kind: "dashboard" };
}

async function render(): Promise<void> {
  state.view = currentRoute();
  const content =
    state.view.kind === "matrix" ? await renderMatrix(state.view.id) : await renderDashboard();
  const header = el("header", {}, [
    el("h1", {}, [el("a", { href: "#" }, ["threat workbench"])]),
    el("span", { class: "version" }, [`model v${state.sync.heldVersion}`]),
  ]);
  root().replaceChildren(header, renderBanner() as Node | string as Node, content);
}

window.addEventListener("hashchange", () => void render());
void render();
