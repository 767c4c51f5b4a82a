// Client-side validation mirroring the server rules for responsiveness.
// The server remains authoritative: anything missed here comes back as a 422.

import type { PowerFormState } from "./config.js";

export const PROB_SUM_TOLERANCE = 1e-6;

export function probabilitySum(values: number[]): number {
  return values.reduce((acc, v) => acc + v, 0);
}

export function sumIsValid(values: number[]): boolean {
  return Math.abs(probabilitySum(values) - 1) <= PROB_SUM_TOLERANCE;
}

export function validatePowerForm(state: PowerFormState): string[] {
  const errors: string[] = [];
  if (state.rows.length < 2) errors.push("At least 2 outcome categories are required.");

  const control = state.rows.map((r) => r.control);
  const intervention = state.rows.map((r) => r.intervention);
  for (const [label, values] of [
    ["control", control],
    ["intervention", intervention],
  ] as const) {
    if (values.some((v) => !Number.isFinite(v) || v < 0)) {
      errors.push(`Every ${label} probability must be a number >= 0.`);
    } else if (!sumIsValid(values)) {
      errors.push(`The ${label} probabilities sum to ${probabilitySum(values).toFixed(6)}, not 1.`);
    }
  }

  if (!state.totalSizes.length) errors.push("Enter at least one total sample size.");
  if (state.totalSizes.some((n) => !Number.isInteger(n) || n < 4)) {
    errors.push("Total sample sizes must be integers >= 4.");
  }
  if (state.allocation.some((w) => !Number.isInteger(w) || w < 1)) {
    errors.push("Allocation weights must be positive integers.");
  }
  if (!state.tests.length) errors.push("Select at least one test.");
  if (!(state.alpha > 0 && state.alpha < 1)) errors.push("The significance level must lie in (0, 1).");
  if (!Number.isInteger(state.replications) || state.replications < 1) {
    errors.push("Replications must be a positive integer.");
  }
  if (!Number.isInteger(state.seed) || state.seed < 0) {
    errors.push("The seed must be a non-negative integer.");
  }
  if (state.tests.includes("dichotomized_chi_square")) {
    const cut = state.dichotomizationCut;
    const k = state.rows.length;
    if (cut === null || !Number.isInteger(cut) || cut < 1 || cut > k - 1) {
      errors.push(`The dichotomized test needs a cut between 1 and ${k - 1}.`);
    }
  }
  return errors;
}

export interface MErrorFormState {
  outcome: string;
  exposure: string;
  confounders: string[];
  targets: string[][];
  tauGrid: number[];
  replications: number;
  seed: number;
}

export function validateMErrorForm(state: MErrorFormState): string[] {
  const errors: string[] = [];
  if (!state.outcome) errors.push("Pick an outcome column.");
  if (!state.exposure) errors.push("Pick an exposure column.");
  const roles = [state.outcome, state.exposure, ...state.confounders].filter(Boolean);
  if (new Set(roles).size !== roles.length) errors.push("Role columns must be distinct.");
  if (!state.targets.length) errors.push("Add at least one target variable set.");
  if (state.targets.some((t) => !t.length)) errors.push("Target sets must not be empty.");
  const known = new Set(roles);
  for (const target of state.targets) {
    for (const column of target) {
      if (!known.has(column)) errors.push(`Target column ${column} is not a role column.`);
    }
  }
  if (!state.tauGrid.length) errors.push("Enter at least one error proportion.");
  if (state.tauGrid.some((t) => !Number.isFinite(t) || t < 0)) {
    errors.push("Error proportions must be numbers >= 0.");
  }
  if (!Number.isInteger(state.replications) || state.replications < 1) {
    errors.push("Replications must be a positive integer.");
  }
  return errors;
}
