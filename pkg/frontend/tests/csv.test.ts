import { describe, expect, it } from "vitest";

import { headerColumns, rowCount } from "../src/csv.js";

describe("headerColumns", () => {
  it("splits and trims the header row", () => {
    expect(headerColumns("sbp, hba1c ,bmi\n1,2,3\n")).toEqual(["sbp", "hba1c", "bmi"]);
  });
  it("strips surrounding quotes", () => {
    expect(headerColumns('"y","x"\n1,2')).toEqual(["y", "x"]);
  });
  it("handles empty text", () => {
    expect(headerColumns("")).toEqual([]);
  });
});

describe("rowCount", () => {
  it("counts data rows ignoring trailing blank lines", () => {
    expect(rowCount("y,x\n1,2\n3,4\n\n")).toBe(2);
  });
});
