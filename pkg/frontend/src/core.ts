/**
 * Pure logic for the explainable text plot: payload parsing, the blue color
 * scale, top-N filtering and HTML rendering. Everything here is DOM-free so
 * it can be unit tested directly; main.ts wires it to the page.
 */

export interface VizPayload {
  title: string;
  summary: string;
  sentences: string[];
  weights: number[];
}

export type TopN = number | "all";

export interface PlotState {
  payload: VizPayload;
  topN: TopN;
  hovered: number | null;
}

export interface Rgb {
  r: number;
  g: number;
  b: number;
}

export interface ColorScale {
  light: Rgb;
  dark: Rgb;
}

// Documented endpoints of the weight gradient. Channel deltas are divisible
// by 4, so the quarter-point colors used in tests are exact integers.
export const LIGHT_BLUE: Rgb = { r: 224, g: 240, b: 255 }; // #E0F0FF
export const DARK_SKY_BLUE: Rgb = { r: 0, g: 84, b: 147 }; // #005493
export const DEFAULT_SCALE: ColorScale = { light: LIGHT_BLUE, dark: DARK_SKY_BLUE };

export const DIMMED_BACKGROUND = "#e8e8e8";

export type ParseResult =
  | { ok: true; payload: VizPayload }
  | { ok: false; error: string };

/** Weight shown on hover, fixed 4-decimal precision. */
export function formatWeight(weight: number): string {
  return weight.toFixed(4);
}

/** Min-max normalization onto [0, 1]; a constant vector maps to all zeros. */
export function normalizeMinMax(values: number[]): number[] {
  const low = Math.min(...values);
  const high = Math.max(...values);
  if (high === low) return values.map(() => 0);
  return values.map((v) => (v - low) / (high - low));
}

/**
 * Channel-wise linear interpolation between the scale endpoints:
 * round(light + w * (dark - light)). Weight 0 is exactly the light endpoint,
 * 1 exactly the dark one. Out-of-range weights clamp with a console warning.
 */
export function colorForScore(weight: number, scale: ColorScale = DEFAULT_SCALE): string {
  if (weight < 0 || weight > 1 || Number.isNaN(weight)) {
    console.warn(`attribution weight ${weight} outside [0, 1]; clamping`);
    weight = Math.min(1, Math.max(0, Number.isNaN(weight) ? 0 : weight));
  }
  const channel = (light: number, dark: number) => Math.round(light + weight * (dark - light));
  const r = channel(scale.light.r, scale.dark.r);
  const g = channel(scale.light.g, scale.dark.g);
  const b = channel(scale.light.b, scale.dark.b);
  return `rgb(${r}, ${g}, ${b})`;
}

/**
 * Indices of the sentences that stay emphasized: all of them, or the topN by
 * weight with ties broken toward the lower index (the same tie-break the
 * analysis toolkit uses for its top-k sets).
 */
export function applyTopNFilter(state: PlotState): Set<number> {
  const count = state.payload.weights.length;
  if (state.topN === "all") {
    return new Set(Array.from({ length: count }, (_, i) => i));
  }
  const n = Math.max(0, Math.min(state.topN, count));
  const order = state.payload.weights
    .map((weight, index) => ({ weight, index }))
    .sort((a, b) => b.weight - a.weight || a.index - b.index);
  return new Set(order.slice(0, n).map((entry) => entry.index));
}

/**
 * Parse the manual form fields into a payload. Sentences are expected as
 * double-quoted, comma-separated strings (bare comma-separated text is
 * accepted as a fallback); weights are comma-separated numbers. Weights are
 * re-normalized with the min-max rule when any value falls outside [0, 1].
 */
export function parseManualInput(
  title: string,
  summary: string,
  sentencesField: string,
  weightsField: string,
): ParseResult {
  const quoted = [...sentencesField.matchAll(/"([^"]*)"/g)].map((m) => m[1]);
  const sentences = (quoted.length > 0
    ? quoted
    : sentencesField.split(",").map((s) => s.trim())
  ).filter((s) => s.length > 0);
  if (sentences.length === 0) {
    return { ok: false, error: "No input sentences found." };
  }

  const rawWeights = weightsField.split(",").map((s) => s.trim()).filter((s) => s.length > 0);
  const weights: number[] = [];
  for (let i = 0; i < rawWeights.length; i++) {
    const value = Number(rawWeights[i]);
    if (!Number.isFinite(value)) {
      return { ok: false, error: `Weight #${i + 1} ("${rawWeights[i]}") is not a number.` };
    }
    weights.push(value);
  }
  if (weights.length !== sentences.length) {
    return {
      ok: false,
      error: `${sentences.length} sentences but ${weights.length} weights; the counts must match.`,
    };
  }

  const normalized = weights.some((w) => w < 0 || w > 1)
    ? normalizeMinMax(weights)
    : weights;
  return { ok: true, payload: { title, summary, sentences, weights: normalized } };
}

/** Validate an uploaded VizPayload JSON document. */
export function payloadFromJson(text: string): ParseResult {
  let data: unknown;
  try {
    data = JSON.parse(text);
  } catch {
    return { ok: false, error: "The file is not valid JSON." };
  }
  const record = data as Record<string, unknown>;
  if (
    typeof record !== "object" || record === null ||
    !Array.isArray(record.sentences) || !Array.isArray(record.weights) ||
    !record.sentences.every((s) => typeof s === "string") ||
    !record.weights.every((w) => typeof w === "number" && Number.isFinite(w))
  ) {
    return { ok: false, error: "Expected fields: title, summary, sentences[], weights[]." };
  }
  if (record.sentences.length !== record.weights.length) {
    return {
      ok: false,
      error: `${record.sentences.length} sentences but ${record.weights.length} weights; the counts must match.`,
    };
  }
  const weights = record.weights as number[];
  return {
    ok: true,
    payload: {
      title: typeof record.title === "string" ? record.title : "",
      summary: typeof record.summary === "string" ? record.summary : "",
      sentences: record.sentences as string[],
      weights: weights.some((w) => w < 0 || w > 1) ? normalizeMinMax(weights) : weights,
    },
  };
}

export function payloadToJson(payload: VizPayload): string {
  return JSON.stringify(
    {
      title: payload.title,
      summary: payload.summary,
      sentences: payload.sentences,
      weights: payload.weights,
    },
    null,
    2,
  );
}

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

/**
 * Render the plot as an HTML string: title, the model-generated summary
 * block, then every sentence as an inline span shaded by its weight. Spans
 * filtered out by top-N stay in reading order but are greyed out. Hover
 * text carries the exact weight to 4 decimals.
 */
export function renderPlotHtml(state: PlotState): string {
  const { payload } = state;
  if (payload.sentences.length === 0) {
    return '<p class="placeholder">Nothing to plot yet: provide sentences and weights.</p>';
  }
  const visible = applyTopNFilter(state);
  const parts: string[] = [];
  if (payload.title) {
    parts.push(`<h2 class="plot-title">${escapeHtml(payload.title)}</h2>`);
  }
  if (payload.summary) {
    parts.push(
      '<div class="summary-block"><span class="summary-label">Model generated summary</span>' +
        `<p>${escapeHtml(payload.summary)}</p></div>`,
    );
  }
  const spans = payload.sentences.map((sentence, index) => {
    const weight = payload.weights[index];
    const tooltip = `Attribution weight: ${formatWeight(weight)}`;
    const dimmed = !visible.has(index);
    const background = dimmed ? DIMMED_BACKGROUND : colorForScore(weight);
    const textColor = !dimmed && weight >= 0.65 ? "#ffffff" : "#1a1a1a";
    const classes = dimmed ? "sentence dimmed" : "sentence";
    return (
      `<span class="${classes}" data-index="${index}" data-weight="${formatWeight(weight)}" ` +
      `title="${tooltip}" style="background-color: ${background}; color: ${textColor}">` +
      `${escapeHtml(sentence)}</span>`
    );
  });
  parts.push(`<p class="text-plot">${spans.join(" ")}</p>`);
  return parts.join("\n");
}
