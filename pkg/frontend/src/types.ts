// Wire types for the pipeline service API. Field names mirror the JSON
// exactly; nothing here is recomputed client-side.

export interface DataBindingDoc {
  source: string;
  field: string;
  aggregate?: string;
}

export interface ComponentSpecDoc {
  id: string;
  type: string;
  slot: string;
  props: Record<string, unknown>;
  data?: DataBindingDoc;
  children?: ComponentSpecDoc[];
}

export interface CompositionDoc {
  template: string;
  components: ComponentSpecDoc[];
}

export interface ViolationDoc {
  code: string;
  path: string;
  message: string;
}

export interface ValidationReportDoc {
  ok: boolean;
  violations: ViolationDoc[];
}

export interface GenerateResponse {
  composition: CompositionDoc;
  report: ValidationReportDoc;
  intent: Record<string, unknown>;
  trace: Record<string, unknown>;
}

export interface RenderStatsDoc {
  node_count: number;
  total_render_weight: number;
  max_depth: number;
}

export interface RenderResponse {
  html: string;
  stats: RenderStatsDoc;
}

export interface SubscoresDoc {
  cov: number;
  prop: number;
  data: number;
  layout: number;
  a11y: number;
  perf: number;
}

export interface SuggestedDiffDoc {
  kind: string;
  target: string;
  detail: string;
}

export interface EvalReportDoc {
  subscores: SubscoresDoc;
  autoscore: number;
  diffs: SuggestedDiffDoc[];
}

export interface ScenarioDoc {
  scenario_id: string;
  description?: string;
  [key: string]: unknown;
}

export interface ApiErrorBody {
  code: string;
  message: string;
  violations?: ViolationDoc[];
}
