import { describe, expect, it } from "vitest";

import { DOOR_PRESET } from "../src/config.js";
import { sumIsValid, validateMErrorForm, validatePowerForm } from "../src/validation.js";

const clone = () => structuredClone(DOOR_PRESET);

describe("power form validation", () => {
  it("accepts the DOOR preset", () => {
    expect(validatePowerForm(clone())).toEqual([]);
  });

  it("blocks probability sums off by more than 1e-6", () => {
    const state = clone();
    state.rows[0].control += 2e-6;
    const errors = validatePowerForm(state);
    expect(errors.some((e) => e.includes("control"))).toBe(true);
  });

  it("accepts sums within the 1e-6 tolerance", () => {
    const state = clone();
    state.rows[0].control += 5e-7;
    expect(validatePowerForm(state)).toEqual([]);
  });

  it("flags the 0.5/0.6 two-category example", () => {
    const state = clone();
    state.rows = [
      { control: 0.5, intervention: 0.2 },
      { control: 0.6, intervention: 0.8 },
    ];
    state.dichotomizationCut = 1;
    const errors = validatePowerForm(state);
    expect(errors.some((e) => e.includes("control") && e.includes("1.1"))).toBe(true);
  });

  it("requires a cut when the dichotomized test is selected", () => {
    const state = clone();
    state.dichotomizationCut = null;
    expect(validatePowerForm(state).some((e) => e.includes("cut"))).toBe(true);
    state.dichotomizationCut = 6; // K-1 = 5 is the maximum
    expect(validatePowerForm(state).some((e) => e.includes("cut"))).toBe(true);
    state.tests = state.tests.filter((t) => t !== "dichotomized_chi_square");
    expect(validatePowerForm(state)).toEqual([]);
  });

  it("checks ranges of the scalar fields", () => {
    const state = clone();
    state.alpha = 1.5;
    state.replications = 0;
    state.totalSizes = [3];
    const errors = validatePowerForm(state);
    expect(errors.length).toBeGreaterThanOrEqual(3);
  });
});

describe("sumIsValid", () => {
  it("is exact at the tolerance boundary", () => {
    expect(sumIsValid([0.5, 0.5])).toBe(true);
    expect(sumIsValid([0.5, 0.5 + 2e-6])).toBe(false);
  });
});

describe("merror form validation", () => {
  const base = {
    outcome: "sbp",
    exposure: "hba1c",
    confounders: ["bmi"],
    targets: [["hba1c"], ["bmi"]],
    tauGrid: [0, 0.5, 1],
    replications: 100,
    seed: 1,
  };

  it("accepts a complete form", () => {
    expect(validateMErrorForm({ ...base })).toEqual([]);
  });

  it("rejects negative tau and unknown targets", () => {
    const errors = validateMErrorForm({ ...base, tauGrid: [-1], targets: [["nope"]] });
    expect(errors.some((e) => e.includes(">= 0"))).toBe(true);
    expect(errors.some((e) => e.includes("nope"))).toBe(true);
  });

  it("requires distinct role columns", () => {
    const errors = validateMErrorForm({ ...base, exposure: "sbp" });
    expect(errors.some((e) => e.includes("distinct"))).toBe(true);
  });
});
