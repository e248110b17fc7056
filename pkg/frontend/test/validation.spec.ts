/**
 * Client side of the shared validation corpus: the client validator must
 * agree with the constructed verdict on every case.  The server side of
 * the same corpus runs in tests/test_validation_parity.py, so agreement
 * on both sides gives 100% client/server parity.
 */

import { readFileSync } from "node:fs";
import { describe, expect, it } from "vitest";

import { validatePayload } from "../src/validation.js";
import type { ElementContext, ModeConfig, ModeKind } from "../src/types.js";

interface CorpusCase {
  id: string;
  mode: ModeKind;
  config: ModeConfig;
  context: {
    element_id: string;
    image_width: number;
    image_height: number;
    element_type: string;
    children: Array<[string, string]>;
    reference_text: string | null;
  };
  payload: unknown;
  verdict: "valid" | "invalid";
  violation_code?: string;
}

const corpusUrl = new URL("../../shared/validation_corpus.json", import.meta.url);
const corpus = JSON.parse(readFileSync(corpusUrl, "utf-8")) as { cases: CorpusCase[] };

function contextFrom(raw: CorpusCase["context"]): ElementContext {
  return {
    element_id: raw.element_id,
    image_width: raw.image_width,
    image_height: raw.image_height,
    element_type: raw.element_type,
    children: raw.children,
    reference_text: raw.reference_text,
  };
}

describe("shared validation corpus", () => {
  it("has 200 cases across all six modes", () => {
    expect(corpus.cases).toHaveLength(200);
    const modes = new Set(corpus.cases.map((c) => c.mode));
    expect(modes).toEqual(new Set([
      "classification", "structure", "transcription",
      "entities", "key_value", "grouping",
    ]));
  });

  it("agrees with every constructed verdict", () => {
    const disagreements: string[] = [];
    for (const testCase of corpus.cases) {
      const violations = validatePayload(
        testCase.mode, testCase.config,
        contextFrom(testCase.context), testCase.payload);
      const verdict = violations.length === 0 ? "valid" : "invalid";
      if (verdict !== testCase.verdict) {
        disagreements.push(
          `${testCase.id}: expected ${testCase.verdict}, got ${verdict} ` +
          JSON.stringify(violations));
      } else if (testCase.violation_code !== undefined) {
        const codes = violations.map((v) => v.code);
        if (!codes.includes(testCase.violation_code)) {
          disagreements.push(
            `${testCase.id}: expected code ${testCase.violation_code}, ` +
            `got ${codes.join(",")}`);
        }
      }
    }
    expect(disagreements).toEqual([]);
  });
});
