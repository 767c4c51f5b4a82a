// Thin client for the /api/v1 endpoints.

import type { JobStatus, PlotPayload, ResultDocument, SubmitBody, ValidationIssue } from "./types.js";

const BASE = "/api/v1";

export class ConfigRejected extends Error {
  constructor(public issues: ValidationIssue[]) {
    super(issues.map((i) => `${i.path}: ${i.message}`).join("\n"));
  }
}

async function raiseForStatus(response: Response): Promise<void> {
  if (response.ok) return;
  if (response.status === 422) {
    const body = await response.json();
    throw new ConfigRejected(body.errors ?? []);
  }
  const text = await response.text();
  throw new Error(`HTTP ${response.status}: ${text}`);
}

export async function submitJob(body: SubmitBody): Promise<{ id: string; status_url: string }> {
  const response = await fetch(`${BASE}/simulations`, {
    method: "POST",
    headers: { "content-type": "application/json" },
    body: JSON.stringify(body),
  });
  await raiseForStatus(response);
  return response.json();
}

export async function jobStatus(id: string): Promise<JobStatus> {
  const response = await fetch(`${BASE}/simulations/${id}`);
  await raiseForStatus(response);
  return response.json();
}

export async function cancelJob(id: string): Promise<JobStatus> {
  const response = await fetch(`${BASE}/simulations/${id}`, { method: "DELETE" });
  await raiseForStatus(response);
  return response.json();
}

export async function fetchResults(id: string): Promise<ResultDocument> {
  const response = await fetch(`${BASE}/simulations/${id}/results`);
  await raiseForStatus(response);
  return response.json();
}

export async function fetchResultsText(id: string, format: "structured" | "csv"): Promise<string> {
  const accept = format === "csv" ? "text/csv" : "application/json";
  const response = await fetch(`${BASE}/simulations/${id}/results`, { headers: { accept } });
  await raiseForStatus(response);
  return response.text();
}

export async function fetchPlot(id: string, metric: string): Promise<PlotPayload> {
  const response = await fetch(`${BASE}/simulations/${id}/plot?metric=${encodeURIComponent(metric)}`);
  await raiseForStatus(response);
  return response.json();
}
