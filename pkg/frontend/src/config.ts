// Power-form state and its serialization to the service config schema.

import type { PowerConfig } from "./types.js";

export interface DistributionRow {
  control: number;
  intervention: number;
}

export interface PowerFormState {
  rows: DistributionRow[];
  totalSizes: number[];
  allocation: [number, number];
  tests: string[];
  alpha: number;
  replications: number;
  seed: number;
  dichotomizationCut: number | null;
}

export const ALL_TESTS = [
  "mann_whitney",
  "chi_square",
  "fisher_exact",
  "prop_odds_wald",
  "prop_odds_lrt",
  "dichotomized_chi_square",
] as const;

// six-category outcome-ranking example shipped with the workbench
export const DOOR_PRESET: PowerFormState = {
  rows: [
    { control: 0.265, intervention: 0.475 },
    { control: 0.275, intervention: 0.18 },
    { control: 0.247, intervention: 0.15 },
    { control: 0.151, intervention: 0.137 },
    { control: 0.02, intervention: 0.018 },
    { control: 0.042, intervention: 0.04 },
  ],
  totalSizes: [100, 200, 400, 800],
  allocation: [1, 1],
  tests: [...ALL_TESTS],
  alpha: 0.05,
  replications: 10000,
  seed: 20260809,
  dichotomizationCut: 1,
};

export function emptyForm(categories = 3): PowerFormState {
  return {
    rows: Array.from({ length: categories }, () => ({ control: 0, intervention: 0 })),
    totalSizes: [100, 200],
    allocation: [1, 1],
    tests: ["mann_whitney", "chi_square"],
    alpha: 0.05,
    replications: 10000,
    seed: 1,
    dichotomizationCut: null,
  };
}

export function toConfigPayload(state: PowerFormState): PowerConfig {
  return {
    kind: "power",
    control: state.rows.map((r) => r.control),
    intervention: state.rows.map((r) => r.intervention),
    total_sizes: [...state.totalSizes],
    allocation: [state.allocation[0], state.allocation[1]],
    tests: [...state.tests],
    alpha: state.alpha,
    replications: state.replications,
    seed: state.seed,
    dichotomization_cut: state.dichotomizationCut,
  };
}

export function fromConfigPayload(config: PowerConfig): PowerFormState {
  return {
    rows: config.control.map((c, i) => ({ control: c, intervention: config.intervention[i] })),
    totalSizes: [...config.total_sizes],
    allocation: [config.allocation[0], config.allocation[1]],
    tests: [...config.tests],
    alpha: config.alpha,
    replications: config.replications,
    seed: config.seed,
    dichotomizationCut: config.dichotomization_cut,
  };
}

export function parseNumberList(text: string): number[] | null {
  const parts = text.split(/[,\s]+/).filter(Boolean);
  if (!parts.length) return null;
  const values = parts.map(Number);
  return values.every((v) => Number.isFinite(v)) ? values : null;
}
