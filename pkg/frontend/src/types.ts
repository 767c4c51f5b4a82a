// Shapes of the service's JSON bodies. The UI never computes statistics:
// every displayed number comes from one of these payloads.

export interface PowerConfig {
  kind: "power";
  control: number[];
  intervention: number[];
  total_sizes: number[];
  allocation: [number, number];
  tests: string[];
  alpha: number;
  replications: number;
  seed: number;
  dichotomization_cut: number | null;
}

export interface MErrorRoles {
  outcome: string;
  exposure: string;
  confounders: string[];
}

export interface MErrorConfig {
  kind: "merror";
  roles: MErrorRoles;
  targets: string[][];
  tau_grid: number[];
  replications: number;
  seed: number;
}

export interface SubmitBody {
  kind: "power" | "merror";
  config: Record<string, unknown>;
  data_csv?: string;
  synthetic?: Record<string, unknown>;
}

export interface JobStatus {
  id: string;
  kind: string;
  state: "queued" | "running" | "done" | "failed" | "cancelled";
  progress: number;
  submitted_at: string | null;
  started_at: string | null;
  finished_at: string | null;
  error: string | null;
  results_url: string | null;
}

export interface PowerCell {
  test: string;
  total_n: number;
  power: number | null;
  power_mc_se: number | null;
  power_ci95: [number, number] | null;
  type1: number | null;
  type1_mc_se: number | null;
  type1_ci95: [number, number] | null;
  h1_not_estimable: number;
  h0_not_estimable: number;
  replications: number;
}

export interface MErrorCell {
  target_set: string[];
  tau: number;
  mean: number | null;
  sd: number | null;
  q025: number | null;
  q975: number | null;
  relative_bias: number | null;
  not_estimable: number;
  replications: number;
}

export interface ResultDocument {
  schema_version: string;
  kind: "power" | "merror";
  config: Record<string, unknown>;
  results: Record<string, unknown>;
  provenance: Record<string, unknown>;
}

export interface PlotSeries {
  label: string;
  x: number[];
  y: (number | null)[];
  y_err: (number | null)[];
}

export interface PlotPayload {
  kind: string;
  metric: string;
  x_label: string;
  series: PlotSeries[];
  reference: { label: string; value: number };
}

export interface ValidationIssue {
  path: string;
  message: string;
}
