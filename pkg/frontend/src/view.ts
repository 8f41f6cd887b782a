// HTML-string renderers for every panel. Kept free of DOM APIs so the
// unit tests can assert on output directly; main.ts assigns the strings
// to innerHTML and wires events.
//
// Numbers from the evaluation report are printed with String(), never
// reformatted, so what the panel shows is exactly what the API said.

import type {
  ApiErrorBody,
  ComponentSpecDoc,
  CompositionDoc,
  EvalReportDoc,
  ScenarioDoc,
} from "./types.js";
import type { HistoryEntry } from "./state.js";

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

export function renderScorePanel(report: EvalReportDoc | null): string {
  if (report === null) {
    return '<p class="empty">No evaluation yet.</p>';
  }
  const rows = (Object.entries(report.subscores) as [string, number][])
    .map(
      ([name, value]) =>
        `<tr><th>${escapeHtml(name)}</th><td data-score="${escapeHtml(name)}">${String(value)}</td></tr>`,
    )
    .join("");
  return (
    `<p class="autoscore">autoscore <strong data-score="autoscore">${String(report.autoscore)}</strong></p>` +
    `<table class="subscores">${rows}</table>`
  );
}

export function renderDiffList(report: EvalReportDoc | null): string {
  if (report === null || report.diffs.length === 0) {
    return '<p class="empty">No suggested diffs.</p>';
  }
  const items = report.diffs
    .map(
      (d) =>
        `<li><code>${escapeHtml(d.kind)}</code> ${escapeHtml(d.target)}: ${escapeHtml(d.detail)}</li>`,
    )
    .join("");
  return `<ul class="diffs">${items}</ul>`;
}

function renderComponentNode(spec: ComponentSpecDoc): string {
  const props = Object.entries(spec.props)
    .map(([k, v]) => `${escapeHtml(k)}=${escapeHtml(JSON.stringify(v))}`)
    .join(" ");
  const data = spec.data
    ? ` <em>${escapeHtml(spec.data.source)}.${escapeHtml(spec.data.field)}${spec.data.aggregate ? " " + escapeHtml(spec.data.aggregate) : ""}</em>`
    : "";
  const label =
    `<span class="node" data-component-id="${escapeHtml(spec.id)}">` +
    `<strong>${escapeHtml(spec.type)}</strong> #${escapeHtml(spec.id)} &rarr; ${escapeHtml(spec.slot)}` +
    (props ? ` <small>${props}</small>` : "") +
    data +
    `</span>`;
  const children = spec.children ?? [];
  if (children.length === 0) {
    return `<li>${label}</li>`;
  }
  return (
    `<li><details open><summary>${label}</summary>` +
    `<ul>${children.map(renderComponentNode).join("")}</ul>` +
    `</details></li>`
  );
}

export function renderCompositionTree(composition: CompositionDoc | null): string {
  if (composition === null) {
    return '<p class="empty">Nothing generated yet.</p>';
  }
  return (
    `<p class="template">template <code>${escapeHtml(composition.template)}</code></p>` +
    `<ul class="tree">${composition.components.map(renderComponentNode).join("")}</ul>`
  );
}

export function renderErrorBanner(error: ApiErrorBody | null): string {
  if (error === null) {
    return "";
  }
  const violations = (error.violations ?? [])
    .map(
      (v) =>
        `<li><code>${escapeHtml(v.code)}</code> at ${escapeHtml(v.path)}: ${escapeHtml(v.message)}</li>`,
    )
    .join("");
  return (
    `<div class="banner" role="alert"><strong>${escapeHtml(error.code)}</strong> ` +
    `${escapeHtml(error.message)}` +
    (violations ? `<ul>${violations}</ul>` : "") +
    `</div>`
  );
}

export function renderHistory(entries: HistoryEntry[]): string {
  if (entries.length === 0) {
    return '<p class="empty">No runs yet.</p>';
  }
  const items = entries
    .map(
      (e, i) =>
        `<li>#${i + 1} <q>${escapeHtml(shorten(e.intentText))}</q> &rarr; ${String(e.autoscore)}</li>`,
    )
    .join("");
  return `<ol class="history">${items}</ol>`;
}

function shorten(text: string): string {
  return text.length > 80 ? text.slice(0, 77) + "..." : text;
}

export function renderScenarioOptions(scenarios: ScenarioDoc[]): string {
  const options = scenarios
    .map(
      (s) =>
        `<option value="${escapeHtml(s.scenario_id)}">${escapeHtml(s.scenario_id)}</option>`,
    )
    .join("");
  return `<option value="">free text</option>${options}`;
}

// Hover linkage: outline the preview element whose data-component-id
// matches the hovered tree node. Works through contentDocument, which
// stays reachable because the frame is sandboxed without allow-scripts
// but with allow-same-origin.
export interface QueryableDoc {
  querySelector(selector: string): { style: { outline: string } } | null;
}

export function setPreviewHighlight(
  doc: QueryableDoc | null,
  componentId: string,
  on: boolean,
): void {
  if (doc === null) return;
  const safe = componentId.replace(/["\\]/g, "\\$&");
  const target = doc.querySelector(`[data-component-id="${safe}"]`);
  if (target !== null) {
    target.style.outline = on ? "2px solid #e5484d" : "";
  }
}
