// Measurement-error page: CSV upload, role assignment, tau grid, bias curves.

import { cancelJob, fetchPlot, fetchResults, fetchResultsText, submitJob, ConfigRejected } from "./api.js";
import { renderChart } from "./charts.js";
import { parseNumberList } from "./config.js";
import { headerColumns, rowCount } from "./csv.js";
import { pollJob } from "./poll.js";
import { baselineCoefficient, merrorTableRows } from "./tables.js";
import type { JobStatus, MErrorConfig } from "./types.js";
import { MErrorFormState, validateMErrorForm } from "./validation.js";

let csvText: string | null = null;
let columns: string[] = [];
let targets: string[][] = [];
let running = false;
let lastJob: string | null = null;

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function roleSelect(id: string, multiple = false): string {
  const options = columns.map((c) => `<option value="${c}">${c}</option>`).join("");
  return `<select id="${id}" ${multiple ? "multiple size=4" : ""}><option value=""></option>${options}</select>`;
}

function readForm(): MErrorFormState {
  const confounders = Array.from(
    el<HTMLSelectElement>("role-confounders").selectedOptions,
  )
    .map((o) => o.value)
    .filter(Boolean);
  return {
    outcome: el<HTMLSelectElement>("role-outcome").value,
    exposure: el<HTMLSelectElement>("role-exposure").value,
    confounders,
    targets,
    tauGrid: parseNumberList(el<HTMLInputElement>("tau-grid").value) ?? [],
    replications: Number(el<HTMLInputElement>("merror-replications").value),
    seed: Number(el<HTMLInputElement>("merror-seed").value),
  };
}

function toConfig(state: MErrorFormState): MErrorConfig {
  return {
    kind: "merror",
    roles: {
      outcome: state.outcome,
      exposure: state.exposure,
      confounders: [...state.confounders],
    },
    targets: state.targets.map((t) => [...t]),
    tau_grid: [...state.tauGrid],
    replications: state.replications,
    seed: state.seed,
  };
}

function renderTargetChoices(): void {
  const state = readForm();
  const candidates = [state.exposure, ...state.confounders, state.outcome].filter(Boolean);
  el<HTMLDivElement>("target-choices").innerHTML = candidates
    .map((c) => `<label><input type="checkbox" value="${c}"> ${c}</label>`)
    .join("");
}

function renderTargetSets(): void {
  el<HTMLUListElement>("target-sets").innerHTML = targets
    .map(
      (set, i) =>
        `<li>{ ${set.join(", ")} } <button type="button" class="remove-target" data-index="${i}">remove</button></li>`,
    )
    .join("");
  document.querySelectorAll<HTMLButtonElement>(".remove-target").forEach((button) =>
    button.addEventListener("click", () => {
      targets.splice(Number(button.dataset.index), 1);
      renderTargetSets();
      refreshValidation();
    }),
  );
}

function refreshValidation(): void {
  const errors = csvText === null ? ["Upload a CSV dataset first."] : validateMErrorForm(readForm());
  el<HTMLUListElement>("merror-errors").innerHTML = errors.map((e) => `<li>${e}</li>`).join("");
  el<HTMLButtonElement>("merror-submit").disabled = errors.length > 0 || running;
}

function setProgress(status: JobStatus | null): void {
  const bar = el<HTMLProgressElement>("merror-progress");
  const label = el<HTMLSpanElement>("merror-progress-label");
  if (!status) {
    bar.value = 0;
    label.textContent = "";
    return;
  }
  bar.value = status.progress;
  label.textContent = `${status.state} ${(100 * status.progress).toFixed(0)}%`;
}

async function submit(): Promise<void> {
  const state = readForm();
  if (csvText === null || validateMErrorForm(state).length) return refreshValidation();
  const status = el<HTMLParagraphElement>("merror-status");
  running = true;
  refreshValidation();
  el<HTMLButtonElement>("merror-cancel").hidden = false;
  try {
    const submitted = await submitJob({
      kind: "merror",
      config: toConfig(state) as unknown as Record<string, unknown>,
      data_csv: csvText,
    });
    el<HTMLButtonElement>("merror-cancel").dataset.job = submitted.id;
    status.textContent = `job ${submitted.id} submitted`;
    const final = await pollJob(submitted.id, setProgress);
    if (final.state === "done") {
      status.textContent = `job ${submitted.id} done`;
      lastJob = submitted.id;
      const doc = await fetchResults(submitted.id);
      el<HTMLElement>("merror-results").hidden = false;
      el<HTMLSpanElement>("merror-baseline").textContent = baselineCoefficient(doc).toPrecision(6);
      el<HTMLTableSectionElement>("merror-table-body").innerHTML = merrorTableRows(doc)
        .map(
          (row) => `
          <tr>
            <td>${row.targetSet}</td><td>${row.tau}</td><td>${row.mean}</td>
            <td>${row.sd}</td><td>${row.quantiles}</td><td>${row.relativeBias}</td><td>${row.failures}</td>
          </tr>`,
        )
        .join("");
      const plot = await fetchPlot(submitted.id, "mean");
      el<HTMLDivElement>("merror-chart").innerHTML = renderChart(plot);
    } else {
      status.textContent = `job ${submitted.id} ${final.state}${final.error ? `: ${final.error}` : ""}`;
    }
  } catch (error) {
    status.textContent = error instanceof ConfigRejected ? `rejected: ${error.message}` : String(error);
  } finally {
    running = false;
    el<HTMLButtonElement>("merror-cancel").hidden = true;
    el<HTMLButtonElement>("merror-cancel").dataset.job = "";
    refreshValidation();
  }
}

export function initMErrorPage(): void {
  el<HTMLInputElement>("csv-file").addEventListener("change", async (event) => {
    const input = event.target as HTMLInputElement;
    const file = input.files?.[0];
    if (!file) return;
    csvText = await file.text();
    columns = headerColumns(csvText);
    el<HTMLSpanElement>("csv-info").textContent = `${file.name}: ${columns.length} columns, ${rowCount(csvText)} rows`;
    el<HTMLDivElement>("role-pickers").innerHTML = `
      <label>outcome ${roleSelect("role-outcome")}</label>
      <label>exposure ${roleSelect("role-exposure")}</label>
      <label>confounders ${roleSelect("role-confounders", true)}</label>`;
    ["role-outcome", "role-exposure", "role-confounders"].forEach((id) =>
      el<HTMLSelectElement>(id).addEventListener("change", () => {
        renderTargetChoices();
        refreshValidation();
      }),
    );
    targets = [];
    renderTargetChoices();
    renderTargetSets();
    refreshValidation();
  });

  el<HTMLButtonElement>("add-target-set").addEventListener("click", () => {
    const chosen = Array.from(
      document.querySelectorAll<HTMLInputElement>("#target-choices input:checked"),
    ).map((c) => c.value);
    if (chosen.length) {
      targets.push(chosen);
      renderTargetSets();
      refreshValidation();
    }
  });

  ["tau-grid", "merror-replications", "merror-seed"].forEach((id) =>
    el<HTMLInputElement>(id).addEventListener("input", refreshValidation),
  );

  el<HTMLButtonElement>("merror-submit").addEventListener("click", submit);
  el<HTMLButtonElement>("merror-cancel").addEventListener("click", async () => {
    const target = el<HTMLButtonElement>("merror-cancel").dataset.job;
    if (target) await cancelJob(target);
  });
  el<HTMLButtonElement>("merror-download-json").addEventListener("click", async () => {
    if (!lastJob) return;
    const text = await fetchResultsText(lastJob, "structured");
    const blob = new Blob([text], { type: "application/json" });
    const anchor = document.createElement("a");
    anchor.href = URL.createObjectURL(blob);
    anchor.download = "merror_results.json";
    anchor.click();
    URL.revokeObjectURL(anchor.href);
  });

  refreshValidation();
}
