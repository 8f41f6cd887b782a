// Session state machine behind the playground. Pure TypeScript with an
// injected Api so the whole loop is testable without a browser.
//
// A submit runs generate -> render -> evaluate and commits the three
// results in one step, so the preview, tree, and score panel can never
// show a mixture of two runs. Failures leave the last good state intact
// and only set the error banner. At most one submission is live: a newer
// one supersedes any still in flight (epoch check on commit).

import { ApiError, type Api } from "./api.js";
import type {
  ApiErrorBody,
  CompositionDoc,
  EvalReportDoc,
  ScenarioDoc,
} from "./types.js";

export interface HistoryEntry {
  intentText: string;
  autoscore: number;
}

export interface SessionState {
  intentText: string;
  scenario: ScenarioDoc | null;
  composition: CompositionDoc | null;
  previewHtml: string;
  report: EvalReportDoc | null;
  pending: boolean;
  error: ApiErrorBody | null;
  history: HistoryEntry[];
}

export type Listener = (state: SessionState) => void;

const INITIAL: SessionState = {
  intentText: "",
  scenario: null,
  composition: null,
  previewHtml: "",
  report: null,
  pending: false,
  error: null,
  history: [],
};

export class PlaygroundSession {
  private state: SessionState = { ...INITIAL, history: [] };
  private epoch = 0;
  private listeners: Listener[] = [];

  constructor(private readonly api: Api) {}

  getState(): SessionState {
    return this.state;
  }

  subscribe(listener: Listener): void {
    this.listeners.push(listener);
  }

  private commit(patch: Partial<SessionState>): void {
    this.state = { ...this.state, ...patch };
    for (const listener of this.listeners) listener(this.state);
  }

  canSubmit(): boolean {
    return this.state.intentText.trim().length > 0 && !this.state.pending;
  }

  canApplyDiffs(): boolean {
    return (
      !this.state.pending &&
      this.state.report !== null &&
      this.state.report.diffs.length > 0
    );
  }

  setIntentText(text: string): void {
    this.commit({ intentText: text });
  }

  // Selecting a bundled scenario fills the box with its description and
  // pins evaluation to the full scenario document (expected block and
  // all); clearing it goes back to free-text everywhere.
  selectScenario(scenario: ScenarioDoc | null): void {
    this.commit({
      scenario,
      intentText: scenario === null ? this.state.intentText : scenario.description ?? "",
    });
  }

  async submitIntent(): Promise<void> {
    const text = this.state.intentText.trim();
    if (text.length === 0) return;
    const epoch = ++this.epoch;
    this.commit({ pending: true, error: null });
    try {
      const generated = await this.api.generate({ description: text });
      const rendered = await this.api.render(generated.composition);
      const scenario =
        this.state.scenario ?? { scenario_id: "adhoc", description: text };
      const report = await this.api.evaluate(scenario, rendered.html);
      if (epoch !== this.epoch) return; // superseded by a newer submission
      this.commit({
        composition: generated.composition,
        previewHtml: rendered.html,
        report,
        pending: false,
        error: null,
        history: [...this.state.history, { intentText: text, autoscore: report.autoscore }],
      });
    } catch (error) {
      if (epoch !== this.epoch) return;
      const body: ApiErrorBody =
        error instanceof ApiError
          ? { code: error.code, message: error.message, violations: error.violations }
          : { code: "ClientError", message: String(error) };
      this.commit({ pending: false, error: body });
    }
  }

  // The diffs come back as short imperative phrases the planner's
  // grammar understands ("add 1 chart"), so regeneration is literally a
  // new generate call with them appended to the intent.
  async applySuggestedDiffs(): Promise<void> {
    if (!this.canApplyDiffs()) return;
    const report = this.state.report as EvalReportDoc;
    const additions = report.diffs.map((d) => d.detail).join("; ");
    this.commit({
      intentText: `${this.state.intentText.trim()} Also: ${additions}.`,
    });
    await this.submitIntent();
  }
}
