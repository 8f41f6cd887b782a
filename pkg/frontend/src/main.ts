// Browser entry: wires the session state machine to the static shell in
// index.html. All rendering goes through the string views; the preview
// iframe gets the server HTML assigned as a property, byte for byte.

import { HttpApi } from "./api.js";
import { PlaygroundSession } from "./state.js";
import {
  renderCompositionTree,
  renderDiffList,
  renderErrorBanner,
  renderHistory,
  renderScenarioOptions,
  renderScorePanel,
  setPreviewHighlight,
} from "./view.js";
import type { ScenarioDoc } from "./types.js";

function byId<T extends HTMLElement>(id: string): T {
  const el = document.getElementById(id);
  if (el === null) throw new Error(`missing element #${id}`);
  return el as T;
}

const api = new HttpApi("");
const session = new PlaygroundSession(api);

const intentBox = byId<HTMLTextAreaElement>("intent");
const submitButton = byId<HTMLButtonElement>("submit");
const applyButton = byId<HTMLButtonElement>("apply-diffs");
const scenarioSelect = byId<HTMLSelectElement>("scenario");
const preview = byId<HTMLIFrameElement>("preview");
const treePane = byId<HTMLElement>("tree");
const scorePane = byId<HTMLElement>("scores");
const diffPane = byId<HTMLElement>("diffs");
const historyPane = byId<HTMLElement>("history");
const bannerPane = byId<HTMLElement>("banner");

let scenarioDocs: ScenarioDoc[] = [];

session.subscribe((state) => {
  if (intentBox.value !== state.intentText) intentBox.value = state.intentText;
  submitButton.disabled = !session.canSubmit();
  applyButton.disabled = !session.canApplyDiffs();
  treePane.innerHTML = renderCompositionTree(state.composition);
  scorePane.innerHTML = renderScorePanel(state.report);
  diffPane.innerHTML = renderDiffList(state.report);
  historyPane.innerHTML = renderHistory(state.history);
  bannerPane.innerHTML = renderErrorBanner(state.error);
  if (preview.srcdoc !== state.previewHtml) preview.srcdoc = state.previewHtml;
  document.body.classList.toggle("pending", state.pending);
});

intentBox.addEventListener("input", () => {
  session.setIntentText(intentBox.value);
});

submitButton.addEventListener("click", () => {
  void session.submitIntent();
});

applyButton.addEventListener("click", () => {
  void session.applySuggestedDiffs();
});

scenarioSelect.addEventListener("change", () => {
  const doc = scenarioDocs.find((s) => s.scenario_id === scenarioSelect.value) ?? null;
  session.selectScenario(doc);
});

treePane.addEventListener("mouseover", (event) => {
  const node = (event.target as HTMLElement).closest("[data-component-id]");
  if (node !== null) {
    setPreviewHighlight(
      preview.contentDocument,
      node.getAttribute("data-component-id") ?? "",
      true,
    );
  }
});

treePane.addEventListener("mouseout", (event) => {
  const node = (event.target as HTMLElement).closest("[data-component-id]");
  if (node !== null) {
    setPreviewHighlight(
      preview.contentDocument,
      node.getAttribute("data-component-id") ?? "",
      false,
    );
  }
});

api
  .scenarios()
  .then((docs) => {
    scenarioDocs = docs;
    scenarioSelect.innerHTML = renderScenarioOptions(docs);
  })
  .catch(() => {
    // Scenario list is a convenience; free text still works without it.
  });

// Paint the initial empty state.
session.setIntentText("");
