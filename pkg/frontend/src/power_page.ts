// Power-study page: distribution form, submission, polling, results views.

import { cancelJob, fetchPlot, fetchResults, fetchResultsText, submitJob, ConfigRejected } from "./api.js";
import { renderChart } from "./charts.js";
import { ALL_TESTS, DOOR_PRESET, PowerFormState, emptyForm, parseNumberList, toConfigPayload } from "./config.js";
import { pollJob } from "./poll.js";
import { powerTableRows } from "./tables.js";
import type { JobStatus, ResultDocument } from "./types.js";
import { probabilitySum, sumIsValid, validatePowerForm } from "./validation.js";

let state: PowerFormState = structuredClone(DOOR_PRESET);
let running = false;
let lastJob: string | null = null; // last completed job, for downloads and re-plots
let currentDoc: ResultDocument | null = null;
let activeMetric: "power" | "type1" = "power";

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function renderDistributionTable(): void {
  const body = el<HTMLTableSectionElement>("dist-rows");
  body.innerHTML = state.rows
    .map(
      (row, i) => `
      <tr>
        <td>rank ${i + 1}</td>
        <td><input type="number" step="0.001" min="0" data-arm="control" data-row="${i}" value="${row.control}"></td>
        <td><input type="number" step="0.001" min="0" data-arm="intervention" data-row="${i}" value="${row.intervention}"></td>
        <td><button type="button" class="remove-row" data-row="${i}" title="remove category">x</button></td>
      </tr>`,
    )
    .join("");
  body.querySelectorAll("input").forEach((input) => {
    input.addEventListener("input", () => {
      const arm = input.dataset.arm as "control" | "intervention";
      const row = Number(input.dataset.row);
      state.rows[row][arm] = input.value === "" ? NaN : Number(input.value);
      refreshValidation();
    });
  });
  body.querySelectorAll<HTMLButtonElement>(".remove-row").forEach((button) => {
    button.addEventListener("click", () => {
      state.rows.splice(Number(button.dataset.row), 1);
      renderDistributionTable();
      refreshValidation();
    });
  });
}

function renderSums(): void {
  const control = state.rows.map((r) => r.control);
  const intervention = state.rows.map((r) => r.intervention);
  const controlSum = el<HTMLSpanElement>("control-sum");
  const interventionSum = el<HTMLSpanElement>("intervention-sum");
  controlSum.textContent = probabilitySum(control).toFixed(6);
  controlSum.className = sumIsValid(control) ? "sum ok" : "sum bad";
  interventionSum.textContent = probabilitySum(intervention).toFixed(6);
  interventionSum.className = sumIsValid(intervention) ? "sum ok" : "sum bad";
}

function readScalarInputs(): void {
  state.totalSizes = parseNumberList(el<HTMLInputElement>("total-sizes").value) ?? [];
  state.allocation = [
    Number(el<HTMLInputElement>("alloc-control").value),
    Number(el<HTMLInputElement>("alloc-intervention").value),
  ];
  state.alpha = Number(el<HTMLInputElement>("alpha").value);
  state.replications = Number(el<HTMLInputElement>("replications").value);
  state.seed = Number(el<HTMLInputElement>("seed").value);
  const cut = el<HTMLInputElement>("dichotomization-cut").value;
  state.dichotomizationCut = cut === "" ? null : Number(cut);
  state.tests = Array.from(
    document.querySelectorAll<HTMLInputElement>("#test-checkboxes input:checked"),
  ).map((c) => c.value);
}

function refreshValidation(): void {
  renderSums();
  const errors = validatePowerForm(state);
  const list = el<HTMLUListElement>("power-errors");
  list.innerHTML = errors.map((e) => `<li>${e}</li>`).join("");
  el<HTMLButtonElement>("power-submit").disabled = errors.length > 0 || running;
}

function writeFormInputs(): void {
  el<HTMLInputElement>("total-sizes").value = state.totalSizes.join(", ");
  el<HTMLInputElement>("alloc-control").value = String(state.allocation[0]);
  el<HTMLInputElement>("alloc-intervention").value = String(state.allocation[1]);
  el<HTMLInputElement>("alpha").value = String(state.alpha);
  el<HTMLInputElement>("replications").value = String(state.replications);
  el<HTMLInputElement>("seed").value = String(state.seed);
  el<HTMLInputElement>("dichotomization-cut").value =
    state.dichotomizationCut === null ? "" : String(state.dichotomizationCut);
  document.querySelectorAll<HTMLInputElement>("#test-checkboxes input").forEach((box) => {
    box.checked = state.tests.includes(box.value);
  });
  renderDistributionTable();
  refreshValidation();
}

function setProgress(status: JobStatus | null): void {
  const bar = el<HTMLProgressElement>("power-progress");
  const label = el<HTMLSpanElement>("power-progress-label");
  if (!status) {
    bar.value = 0;
    label.textContent = "";
    return;
  }
  bar.value = status.progress;
  label.textContent = `${status.state} ${(100 * status.progress).toFixed(0)}%`;
}

function renderMetricTable(): void {
  if (!currentDoc) return;
  const rows = powerTableRows(currentDoc, activeMetric);
  el<HTMLTableSectionElement>("power-table-body").innerHTML = rows
    .map(
      (row) => `
      <tr>
        <td>${row.test}</td>
        <td>${row.totalN}</td>
        <td>${row.estimate} ${row.interval}</td>
        <td>${row.failures}</td>
      </tr>`,
    )
    .join("");
  document.querySelectorAll<HTMLButtonElement>("#power-tabs button").forEach((button) => {
    button.classList.toggle("active", button.dataset.metric === activeMetric);
  });
}

async function renderResults(jobId: string, doc: ResultDocument): Promise<void> {
  currentDoc = doc;
  el<HTMLElement>("power-results").hidden = false;
  renderMetricTable();
  const plot = await fetchPlot(jobId, activeMetric);
  el<HTMLDivElement>("power-chart").innerHTML = renderChart(plot);
}

function download(name: string, text: string, type: string): void {
  const blob = new Blob([text], { type });
  const url = URL.createObjectURL(blob);
  const anchor = document.createElement("a");
  anchor.href = url;
  anchor.download = name;
  anchor.click();
  URL.revokeObjectURL(url);
}

async function submit(): Promise<void> {
  readScalarInputs();
  if (validatePowerForm(state).length) return refreshValidation();
  const payload = toConfigPayload(state);
  const status = el<HTMLParagraphElement>("power-status");
  running = true;
  refreshValidation();
  el<HTMLButtonElement>("power-cancel").hidden = false;
  let jobId: string | null = null;
  try {
    const submitted = await submitJob({ kind: "power", config: payload as unknown as Record<string, unknown> });
    jobId = submitted.id;
    el<HTMLButtonElement>("power-cancel").dataset.job = jobId;
    status.textContent = `job ${jobId} submitted`;
    const final = await pollJob(jobId, setProgress);
    if (final.state === "done") {
      status.textContent = `job ${jobId} done`;
      lastJob = jobId;
      await renderResults(jobId, await fetchResults(jobId));
    } else {
      status.textContent = `job ${jobId} ${final.state}${final.error ? `: ${final.error}` : ""}`;
    }
  } catch (error) {
    status.textContent = error instanceof ConfigRejected ? `rejected: ${error.message}` : String(error);
  } finally {
    running = false;
    el<HTMLButtonElement>("power-cancel").hidden = true;
    el<HTMLButtonElement>("power-cancel").dataset.job = "";
    refreshValidation();
  }
}

export function initPowerPage(): void {
  const tests = el<HTMLDivElement>("test-checkboxes");
  tests.innerHTML = ALL_TESTS.map(
    (t) => `<label><input type="checkbox" value="${t}" checked> ${t}</label>`,
  ).join("");
  tests.querySelectorAll("input").forEach((box) =>
    box.addEventListener("change", () => {
      readScalarInputs();
      refreshValidation();
    }),
  );

  ["total-sizes", "alloc-control", "alloc-intervention", "alpha", "replications", "seed", "dichotomization-cut"].forEach(
    (id) =>
      el<HTMLInputElement>(id).addEventListener("input", () => {
        readScalarInputs();
        refreshValidation();
      }),
  );

  el<HTMLButtonElement>("add-row").addEventListener("click", () => {
    state.rows.push({ control: 0, intervention: 0 });
    renderDistributionTable();
    refreshValidation();
  });
  el<HTMLButtonElement>("load-preset").addEventListener("click", () => {
    state = structuredClone(DOOR_PRESET);
    writeFormInputs();
  });
  el<HTMLButtonElement>("clear-form").addEventListener("click", () => {
    state = emptyForm();
    writeFormInputs();
  });
  el<HTMLButtonElement>("power-submit").addEventListener("click", submit);

  // cancel targets the job being polled; the button only shows while running
  el<HTMLButtonElement>("power-cancel").addEventListener("click", async () => {
    const target = el<HTMLButtonElement>("power-cancel").dataset.job;
    if (target) await cancelJob(target);
  });

  document.querySelectorAll<HTMLButtonElement>("#power-tabs button").forEach((button) =>
    button.addEventListener("click", async () => {
      activeMetric = (button.dataset.metric as "power" | "type1") ?? "power";
      renderMetricTable();
      if (lastJob) {
        const plot = await fetchPlot(lastJob, activeMetric);
        el<HTMLDivElement>("power-chart").innerHTML = renderChart(plot);
      }
    }),
  );

  el<HTMLButtonElement>("download-json").addEventListener("click", async () => {
    if (lastJob) download("power_results.json", await fetchResultsText(lastJob, "structured"), "application/json");
  });
  el<HTMLButtonElement>("download-csv").addEventListener("click", async () => {
    if (lastJob) download("power_results.csv", await fetchResultsText(lastJob, "csv"), "text/csv");
  });

  writeFormInputs();
}
