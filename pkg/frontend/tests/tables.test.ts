import { describe, expect, it } from "vitest";

import { baselineCoefficient, merrorTableRows, powerTableRows } from "../src/tables.js";
import type { ResultDocument } from "../src/types.js";

// fixture shaped exactly like a service results document
const powerDoc: ResultDocument = {
  schema_version: "1",
  kind: "power",
  config: { alpha: 0.05 },
  provenance: {},
  results: {
    test_ids: ["mann_whitney"],
    total_sizes: [100, 200],
    cells: [
      {
        test: "mann_whitney",
        total_n: 100,
        power: 0.4213,
        power_mc_se: 0.0049,
        power_ci95: [0.4117, 0.4309],
        type1: 0.0507,
        type1_mc_se: 0.0022,
        type1_ci95: [0.0464, 0.055],
        h1_not_estimable: 3,
        h0_not_estimable: 1,
        replications: 10000,
      },
      {
        test: "mann_whitney",
        total_n: 200,
        power: null,
        power_mc_se: null,
        power_ci95: null,
        type1: 0.049,
        type1_mc_se: 0.0021,
        type1_ci95: [0.0449, 0.0531],
        h1_not_estimable: 10000,
        h0_not_estimable: 0,
        replications: 10000,
      },
    ],
  },
};

describe("power table rows", () => {
  it("renders exactly the document's numbers, nothing recomputed", () => {
    const rows = powerTableRows(powerDoc, "power");
    expect(rows[0].estimate).toBe("0.4213");
    expect(rows[0].interval).toBe(`± ${(1.96 * 0.0049).toFixed(4)}`);
    expect(rows[0].failures).toBe(3);
    expect(rows[1].estimate).toBe("n/a");
    expect(rows[1].interval).toBe("");
  });

  it("switches to the type-I cells for the type1 tab", () => {
    const rows = powerTableRows(powerDoc, "type1");
    expect(rows[0].estimate).toBe("0.0507");
    expect(rows[0].failures).toBe(1);
    expect(rows[1].estimate).toBe("0.0490");
  });
});

const merrorDoc: ResultDocument = {
  schema_version: "1",
  kind: "merror",
  config: {},
  provenance: {},
  results: {
    baseline: { names: ["(intercept)", "x"], coefficients: [0.1, 0.987], standard_errors: [0.01, 0.02] },
    dropped_rows: 2,
    cells: [
      {
        target_set: ["x", "bmi"],
        tau: 0.5,
        mean: 0.671,
        sd: 0.012,
        q025: 0.65,
        q975: 0.69,
        relative_bias: -0.32,
        not_estimable: 0,
        replications: 200,
      },
    ],
  },
};

describe("merror table rows", () => {
  it("joins target sets and formats cells from the document", () => {
    const rows = merrorTableRows(merrorDoc);
    expect(rows[0].targetSet).toBe("x + bmi");
    expect(rows[0].mean).toBe("0.67100");
    expect(rows[0].quantiles).toBe("[0.6500, 0.6900]");
    expect(rows[0].relativeBias).toBe("-32.00 %");
  });

  it("reads the baseline exposure coefficient from the document", () => {
    expect(baselineCoefficient(merrorDoc)).toBe(0.987);
  });
});
