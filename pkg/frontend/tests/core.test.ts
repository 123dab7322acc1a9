import { afterEach, describe, expect, it, vi } from "vitest";

import {
  DARK_SKY_BLUE,
  LIGHT_BLUE,
  PlotState,
  VizPayload,
  applyTopNFilter,
  colorForScore,
  formatWeight,
  normalizeMinMax,
  parseManualInput,
  payloadFromJson,
  payloadToJson,
  renderPlotHtml,
} from "../src/core.js";

function makeState(weights: number[], topN: PlotState["topN"] = "all"): PlotState {
  return {
    payload: {
      title: "t",
      summary: "s",
      sentences: weights.map((_, i) => `Sentence ${i}.`),
      weights,
    },
    topN,
    hovered: null,
  };
}

afterEach(() => {
  vi.restoreAllMocks();
});

describe("color scale", () => {
  it("hits the documented endpoint and quarter-point values exactly", () => {
    expect(colorForScore(0)).toBe("rgb(224, 240, 255)");
    expect(colorForScore(0.25)).toBe("rgb(168, 201, 228)");
    expect(colorForScore(0.5)).toBe("rgb(112, 162, 201)");
    expect(colorForScore(0.75)).toBe("rgb(56, 123, 174)");
    expect(colorForScore(1)).toBe("rgb(0, 84, 147)");
  });

  it("matches the endpoint constants", () => {
    expect(colorForScore(0)).toBe(`rgb(${LIGHT_BLUE.r}, ${LIGHT_BLUE.g}, ${LIGHT_BLUE.b})`);
    expect(colorForScore(1)).toBe(
      `rgb(${DARK_SKY_BLUE.r}, ${DARK_SKY_BLUE.g}, ${DARK_SKY_BLUE.b})`,
    );
  });

  it("clamps out-of-range weights with a console warning", () => {
    const warn = vi.spyOn(console, "warn").mockImplementation(() => {});
    expect(colorForScore(1.5)).toBe(colorForScore(1));
    expect(colorForScore(-0.2)).toBe(colorForScore(0));
    expect(warn).toHaveBeenCalledTimes(2);
  });

  it("darkens monotonically with weight", () => {
    const channels = (css: string) => css.match(/\d+/g)!.map(Number);
    let previous = channels(colorForScore(0));
    for (let w = 0.01; w <= 1.0001; w += 0.01) {
      const current = channels(colorForScore(Math.min(1, w)));
      for (let c = 0; c < 3; c++) expect(current[c]).toBeLessThanOrEqual(previous[c]);
      previous = current;
    }
    // strictly darker for clearly larger weights (beyond 8-bit quantization)
    const lighter = channels(colorForScore(0.3));
    const darker = channels(colorForScore(0.4));
    expect(darker[0]).toBeLessThan(lighter[0]);
  });
});

describe("top-N filter", () => {
  it("keeps every index for 'all'", () => {
    expect(applyTopNFilter(makeState([0.2, 0.9, 0.5]))).toEqual(new Set([0, 1, 2]));
  });

  it("keeps the n largest weights", () => {
    expect(applyTopNFilter(makeState([0.2, 0.9, 0.5], 2))).toEqual(new Set([1, 2]));
  });

  it("breaks ties toward the lower index, like the analysis toolkit", () => {
    expect(applyTopNFilter(makeState([0.5, 0.5], 1))).toEqual(new Set([0]));
    expect(applyTopNFilter(makeState([0.4, 0.5, 0.5], 2))).toEqual(new Set([1, 2]));
  });
});

describe("manual form parsing", () => {
  it("pairs quoted sentences with weights", () => {
    const result = parseManualInput("T", "S", '"One.", "Two, two.", "Three."', "0.1,0.5,0.9");
    expect(result.ok).toBe(true);
    if (result.ok) {
      expect(result.payload.sentences).toEqual(["One.", "Two, two.", "Three."]);
      expect(result.payload.weights).toEqual([0.1, 0.5, 0.9]);
    }
  });

  it("reports a count mismatch without crashing", () => {
    const result = parseManualInput("T", "S", '"a", "b", "c"', "0.1, 0.2");
    expect(result.ok).toBe(false);
    if (!result.ok) expect(result.error).toContain("3 sentences but 2 weights");
  });

  it("names the position of an unparsable weight", () => {
    const result = parseManualInput("T", "S", '"a", "b"', "0.1, oops");
    expect(result.ok).toBe(false);
    if (!result.ok) expect(result.error).toContain("Weight #2");
  });

  it("re-normalizes weights outside [0, 1] with the min-max rule", () => {
    const result = parseManualInput("T", "S", '"a", "b", "c"', "2, 4, 6");
    expect(result.ok).toBe(true);
    if (result.ok) expect(result.payload.weights).toEqual([0, 0.5, 1]);
  });

  it("keeps in-range weights untouched", () => {
    const result = parseManualInput("T", "S", '"a", "b"', "0.25, 0.75");
    expect(result.ok).toBe(true);
    if (result.ok) expect(result.payload.weights).toEqual([0.25, 0.75]);
  });
});

describe("rendering", () => {
  it("shades endpoints exactly and shows the 4-decimal weight on hover", () => {
    const html = renderPlotHtml(makeState([0, 0.8365, 1]));
    expect(html).toContain("rgb(224, 240, 255)");
    expect(html).toContain("rgb(0, 84, 147)");
    expect(html).toContain('title="Attribution weight: 0.8365"');
    expect(formatWeight(0.8365)).toBe("0.8365");
  });

  it("de-emphasizes exactly the sentences outside the top N", () => {
    const html = renderPlotHtml(makeState([0.1, 0.9, 0.3, 0.7, 0.2], 2));
    const dimmed = [...html.matchAll(/class="sentence dimmed" data-index="(\d+)"/g)].map(
      (m) => Number(m[1]),
    );
    expect(new Set(dimmed)).toEqual(new Set([0, 2, 4]));
    expect(html.match(/class="sentence"/g)).toHaveLength(2);
  });

  it("renders title and summary blocks and escapes markup", () => {
    const state = makeState([0.5]);
    state.payload.title = "<Title>";
    state.payload.summary = 'He said "go" & left';
    const html = renderPlotHtml(state);
    expect(html).toContain("&lt;Title&gt;");
    expect(html).toContain("He said &quot;go&quot; &amp; left");
    expect(html).toContain("Model generated summary");
  });

  it("shows a placeholder for an empty payload", () => {
    const html = renderPlotHtml(makeState([]));
    expect(html).toContain("placeholder");
  });
});

describe("payload round trip", () => {
  const payload: VizPayload = {
    title: "Example",
    summary: "The generated summary.",
    sentences: ["First point.", "Second point.", "Third point."],
    weights: [0, 0.25, 1],
  };

  it("file -> state -> file is the identity", () => {
    const parsed = payloadFromJson(payloadToJson(payload));
    expect(parsed.ok).toBe(true);
    if (parsed.ok) expect(parsed.payload).toEqual(payload);
  });

  it("file -> form fields -> parse yields an equal payload", () => {
    const sentencesField = payload.sentences.map((s) => `"${s}"`).join(", ");
    const weightsField = payload.weights.join(", ");
    const reparsed = parseManualInput(payload.title, payload.summary, sentencesField, weightsField);
    expect(reparsed.ok).toBe(true);
    if (reparsed.ok) expect(reparsed.payload).toEqual(payload);
  });

  it("rejects malformed uploads with an inline error", () => {
    expect(payloadFromJson("not json").ok).toBe(false);
    expect(payloadFromJson('{"sentences": ["a"], "weights": [0.5, 0.6]}').ok).toBe(false);
    expect(payloadFromJson('{"sentences": ["a"], "weights": ["x"]}').ok).toBe(false);
  });

  it("normalizes uploaded weights outside [0, 1]", () => {
    const parsed = payloadFromJson(
      '{"title": "", "summary": "", "sentences": ["a", "b"], "weights": [2, 6]}',
    );
    expect(parsed.ok).toBe(true);
    if (parsed.ok) expect(parsed.payload.weights).toEqual([0, 1]);
  });
});

describe("normalizeMinMax", () => {
  it("maps constant vectors to zeros", () => {
    expect(normalizeMinMax([3, 3, 3])).toEqual([0, 0, 0]);
  });
});
