/**
 * Page wiring: form handling, payload upload/download, top-N selection and
 * the hover tooltip. All rendering goes through the pure functions in
 * core.ts; re-renders never touch the form fields.
 */

import {
  PlotState,
  TopN,
  VizPayload,
  formatWeight,
  parseManualInput,
  payloadFromJson,
  payloadToJson,
  renderPlotHtml,
} from "./core.js";

const byId = <T extends HTMLElement>(id: string): T =>
  document.getElementById(id) as T;

const titleInput = byId<HTMLInputElement>("title-input");
const summaryInput = byId<HTMLTextAreaElement>("summary-input");
const sentencesInput = byId<HTMLTextAreaElement>("sentences-input");
const weightsInput = byId<HTMLInputElement>("weights-input");
const topNSelect = byId<HTMLSelectElement>("top-n-select");
const errorBox = byId<HTMLDivElement>("form-error");
const plotBox = byId<HTMLDivElement>("plot");
const tooltip = byId<HTMLDivElement>("tooltip");
const fileInput = byId<HTMLInputElement>("payload-file");

const state: PlotState = {
  payload: { title: "", summary: "", sentences: [], weights: [] },
  topN: "all",
  hovered: null,
};

function showError(message: string): void {
  errorBox.textContent = message;
  errorBox.hidden = false;
}

function clearError(): void {
  errorBox.textContent = "";
  errorBox.hidden = true;
}

function selectedTopN(): TopN {
  const value = topNSelect.value;
  return value === "all" ? "all" : Number(value);
}

function rebuildTopNOptions(count: number): void {
  const previous = topNSelect.value;
  topNSelect.innerHTML = "";
  const allOption = document.createElement("option");
  allOption.value = "all";
  allOption.textContent = "All Sentences";
  topNSelect.appendChild(allOption);
  for (let n = 1; n <= count; n++) {
    const option = document.createElement("option");
    option.value = String(n);
    option.textContent = `Top ${n}`;
    topNSelect.appendChild(option);
  }
  const stillValid = previous === "all" || Number(previous) <= count;
  topNSelect.value = stillValid ? previous : "all";
}

function render(): void {
  state.topN = selectedTopN();
  plotBox.innerHTML = renderPlotHtml(state);
}

function adoptPayload(payload: VizPayload): void {
  state.payload = payload;
  rebuildTopNOptions(payload.sentences.length);
  render();
}

function fillFormFromPayload(payload: VizPayload): void {
  titleInput.value = payload.title;
  summaryInput.value = payload.summary;
  sentencesInput.value = payload.sentences.map((s) => `"${s}"`).join(", ");
  weightsInput.value = payload.weights.map((w) => String(w)).join(", ");
}

byId<HTMLButtonElement>("generate-button").addEventListener("click", () => {
  const result = parseManualInput(
    titleInput.value,
    summaryInput.value,
    sentencesInput.value,
    weightsInput.value,
  );
  if (!result.ok) {
    showError(result.error);
    return;
  }
  clearError();
  adoptPayload(result.payload);
});

topNSelect.addEventListener("change", render);

fileInput.addEventListener("change", () => {
  const file = fileInput.files?.[0];
  if (!file) return;
  file.text().then((text) => {
    const result = payloadFromJson(text);
    if (!result.ok) {
      showError(result.error);
      return;
    }
    clearError();
    fillFormFromPayload(result.payload);
    adoptPayload(result.payload);
  });
});

byId<HTMLButtonElement>("download-button").addEventListener("click", () => {
  if (state.payload.sentences.length === 0) {
    showError("Nothing to export yet.");
    return;
  }
  clearError();
  const blob = new Blob([payloadToJson(state.payload) + "\n"], {
    type: "application/json",
  });
  const url = URL.createObjectURL(blob);
  const anchor = document.createElement("a");
  anchor.href = url;
  anchor.download = "viz-payload.json";
  anchor.click();
  URL.revokeObjectURL(url);
});

// Floating tooltip mirroring the native title attribute, so the exact weight
// is visible immediately on hover.
plotBox.addEventListener("mouseover", (event) => {
  const target = (event.target as HTMLElement).closest("span.sentence") as HTMLElement | null;
  if (!target) return;
  state.hovered = Number(target.dataset.index);
  const weight = state.payload.weights[state.hovered];
  tooltip.textContent = `Attribution weight: ${formatWeight(weight)}`;
  tooltip.hidden = false;
});

plotBox.addEventListener("mousemove", (event) => {
  if (tooltip.hidden) return;
  tooltip.style.left = `${event.pageX + 12}px`;
  tooltip.style.top = `${event.pageY + 12}px`;
});

plotBox.addEventListener("mouseout", (event) => {
  if ((event.target as HTMLElement).closest("span.sentence")) {
    state.hovered = null;
    tooltip.hidden = true;
  }
});

render();
