// Pure transforms from result documents to display rows. Every rendered
// number is taken verbatim from the document so the UI and any other
// consumer of the same file cannot disagree.

import type { MErrorCell, PowerCell, ResultDocument } from "./types.js";

export interface PowerTableRow {
  test: string;
  totalN: number;
  estimate: string;
  interval: string;
  failures: number;
}

function fmt(value: number | null, digits = 4): string {
  return value === null ? "n/a" : value.toFixed(digits);
}

export function powerCells(doc: ResultDocument): PowerCell[] {
  return (doc.results as { cells: PowerCell[] }).cells;
}

export function powerTableRows(doc: ResultDocument, metric: "power" | "type1"): PowerTableRow[] {
  return powerCells(doc).map((cell) => {
    const estimate = metric === "power" ? cell.power : cell.type1;
    const se = metric === "power" ? cell.power_mc_se : cell.type1_mc_se;
    const failures = metric === "power" ? cell.h1_not_estimable : cell.h0_not_estimable;
    return {
      test: cell.test,
      totalN: cell.total_n,
      estimate: fmt(estimate),
      interval: estimate === null || se === null ? "" : `± ${(1.96 * se).toFixed(4)}`,
      failures,
    };
  });
}

export interface MErrorTableRow {
  targetSet: string;
  tau: number;
  mean: string;
  sd: string;
  quantiles: string;
  relativeBias: string;
  failures: number;
}

export function merrorCells(doc: ResultDocument): MErrorCell[] {
  return (doc.results as { cells: MErrorCell[] }).cells;
}

export function baselineCoefficient(doc: ResultDocument): number {
  const baseline = doc.results as { baseline: { coefficients: number[] } };
  return baseline.baseline.coefficients[1];
}

export function merrorTableRows(doc: ResultDocument): MErrorTableRow[] {
  return merrorCells(doc).map((cell) => ({
    targetSet: cell.target_set.join(" + "),
    tau: cell.tau,
    mean: fmt(cell.mean, 5),
    sd: fmt(cell.sd, 5),
    quantiles: cell.q025 === null || cell.q975 === null ? "" : `[${cell.q025.toFixed(4)}, ${cell.q975.toFixed(4)}]`,
    relativeBias: cell.relative_bias === null ? "n/a" : `${(100 * cell.relative_bias).toFixed(2)} %`,
    failures: cell.not_estimable,
  }));
}
