/**
 * Client-side payload validation.
 *
 * These rules are held in lockstep with the server validator: both sides
 * are tested against the shared corpus in shared/validation_corpus.json,
 * and the violation codes are identical, so the submit button can only
 * enable for payloads the server will accept.
 */

import type {
  AnnotationPayload,
  ClassificationConfig,
  ElementContext,
  EntitiesConfig,
  GroupingConfig,
  KeyValueConfig,
  FieldDef,
  ModeConfig,
  ModeKind,
  StructureConfig,
  TranscriptionConfig,
  Violation,
} from "./types.js";

const INTEGER_SHAPE = /^[+-]?[0-9]+$/;
const DATE_SHAPE = /^[0-9]{4}(-[0-9]{2})?(-[0-9]{2})?$/;

export function validatePayload(
  mode: ModeKind,
  config: ModeConfig,
  context: ElementContext,
  payload: unknown,
): Violation[] {
  if (!isPlainObject(payload)) {
    return [v("malformed", "payload must be an object")];
  }
  switch (mode) {
    case "classification":
      return checkClassification(config as ClassificationConfig, payload);
    case "structure":
      return checkStructure(config as StructureConfig, context, payload);
    case "transcription":
      return checkTranscription(config as TranscriptionConfig, context, payload);
    case "entities":
      return checkEntities(config as EntitiesConfig, context, payload);
    case "key_value":
      return checkKeyValue(config as KeyValueConfig, payload);
    case "grouping":
      return checkGrouping(config as GroupingConfig, context, payload);
  }
}

export function isValid(
  mode: ModeKind,
  config: ModeConfig,
  context: ElementContext,
  payload: unknown,
): boolean {
  return validatePayload(mode, config, context, payload).length === 0;
}

function v(code: string, detail: string): Violation {
  return { code, detail };
}

function isPlainObject(value: unknown): value is Record<string, unknown> {
  return typeof value === "object" && value !== null && !Array.isArray(value);
}

// -- classification -----------------------------------------------------------

function checkClassification(
  config: ClassificationConfig,
  payload: Record<string, unknown>,
): Violation[] {
  const classId = payload["class_id"];
  if (typeof classId !== "string" || classId === "") {
    return [v("malformed", "classification payload needs class_id")];
  }
  if (!config.classes.some((c) => c.class_id === classId)) {
    return [v("unknown_id", `unknown class_id ${JSON.stringify(classId)}`)];
  }
  return [];
}

// -- structure ------------------------------------------------------------------

function checkStructure(
  config: StructureConfig,
  context: ElementContext,
  payload: Record<string, unknown>,
): Violation[] {
  const zones = payload["zones"];
  if (!Array.isArray(zones)) {
    return [v("malformed", "structure payload needs a zones list")];
  }
  const known = new Set(config.zone_types.map((z) => z.type_id));
  const violations: Violation[] = [];
  zones.forEach((zone, i) => {
    if (!isPlainObject(zone)) {
      violations.push(v("malformed", `zones[${i}] must be an object`));
      return;
    }
    if (!known.has(zone["type_id"] as string)) {
      violations.push(v("unknown_id", `zones[${i}]: unknown type_id`));
    }
    const polygon = zone["polygon"];
    if (!Array.isArray(polygon)) {
      violations.push(v("malformed", `zones[${i}]: polygon must be a point list`));
      return;
    }
    const problem = polygonProblem(
      polygon, context.image_width, context.image_height);
    if (problem !== null) {
      violations.push(v("zone_polygon_invalid", `zones[${i}]: ${problem}`));
    }
  });
  return violations;
}

/** Null when the ring is valid; otherwise why it is not. */
export function polygonProblem(
  polygon: unknown[],
  width: number,
  height: number,
): string | null {
  const points: Array<[number, number]> = [];
  for (const entry of polygon) {
    if (!Array.isArray(entry) || entry.length < 2) {
      return "points must be [x, y] pairs";
    }
    const x = toNumber(entry[0]);
    const y = toNumber(entry[1]);
    if (x === null || y === null) {
      return "points must be numeric";
    }
    points.push([x, y]);
  }
  if (points.length < 3) {
    return `polygon needs at least 3 points, got ${points.length}`;
  }
  for (const [x, y] of points) {
    if (!(x >= 0 && x <= width && y >= 0 && y <= height)) {
      return `point (${x},${y}) outside image bounds ${width}x${height}`;
    }
  }
  if (allCollinear(points)) {
    return "degenerate polygon: all points collinear";
  }
  return null;
}

function toNumber(value: unknown): number | null {
  if (typeof value === "number" && Number.isFinite(value)) {
    return value;
  }
  if (typeof value === "string" && value.trim() !== "") {
    const parsed = Number(value);
    return Number.isFinite(parsed) ? parsed : null;
  }
  return null;
}

function allCollinear(points: Array<[number, number]>): boolean {
  const first = points[0]!;
  const [x0, y0] = first;
  let base: [number, number] | null = null;
  for (const [x, y] of points.slice(1)) {
    if (x !== x0 || y !== y0) {
      base = [x - x0, y - y0];
      break;
    }
  }
  if (base === null) {
    return true;
  }
  const [bx, by] = base;
  return points.slice(1).every(
    ([x, y]) => Math.abs(bx * (y - y0) - by * (x - x0)) < 1e-9);
}

// -- transcription -----------------------------------------------------------------

export function transcriptionTargets(
  config: TranscriptionConfig,
  context: ElementContext,
): Set<string> {
  if (config.granularity === "page_by_page") {
    return new Set([context.element_id]);
  }
  if (context.element_type === config.target_element_type) {
    return new Set([context.element_id]);
  }
  return new Set(
    context.children
      .filter(([, type]) => type === config.target_element_type)
      .map(([id]) => id),
  );
}

function checkTranscription(
  config: TranscriptionConfig,
  context: ElementContext,
  payload: Record<string, unknown>,
): Violation[] {
  const texts = payload["texts"];
  if (!Array.isArray(texts)) {
    return [v("malformed", "transcription payload needs a texts list")];
  }
  const targets = transcriptionTargets(config, context);
  const seen = new Set<string>();
  const violations: Violation[] = [];
  texts.forEach((entry, i) => {
    if (!isPlainObject(entry)) {
      violations.push(v("malformed", `texts[${i}] must be an object`));
      return;
    }
    const elementId = entry["element_id"];
    const text = entry["text"];
    if (typeof elementId !== "string" || typeof text !== "string") {
      violations.push(v("malformed", `texts[${i}] needs element_id and text`));
      return;
    }
    if (!targets.has(elementId)) {
      violations.push(
        v("unknown_id", `texts[${i}]: ${elementId} is not a transcription target`));
      return;
    }
    if (seen.has(elementId)) {
      violations.push(
        v("duplicate_target", `texts[${i}]: second text for ${elementId}`));
      return;
    }
    seen.add(elementId); // empty text is legal: an illegible or blank line
  });
  return violations;
}

// -- entities -------------------------------------------------------------------------

function checkEntities(
  config: EntitiesConfig,
  context: ElementContext,
  payload: Record<string, unknown>,
): Violation[] {
  const spans = payload["spans"];
  if (!Array.isArray(spans)) {
    return [v("malformed", "entities payload needs a spans list")];
  }
  const text = context.reference_text;
  if (text === null || text === undefined) {
    return [v("no_reference_text",
              "element has no transcription for spans to index into")];
  }
  const known = new Set(config.entity_types.map((e) => e.type_id));
  const violations: Violation[] = [];
  const accepted: Array<{ offset: number; length: number }> = [];
  spans.forEach((span, i) => {
    if (!isPlainObject(span)) {
      violations.push(v("malformed", `spans[${i}] must be an object`));
      return;
    }
    const offset = span["offset"];
    const length = span["length"];
    if (!isInt(offset) || !isInt(length)) {
      violations.push(
        v("malformed", `spans[${i}]: offset and length must be integers`));
      return;
    }
    if (offset < 0 || length < 1) {
      violations.push(
        v("malformed", `spans[${i}]: offset >= 0 and length >= 1 required`));
      return;
    }
    if (offset + length > text.length) {
      violations.push(v(
        "span_out_of_bounds",
        `spans[${i}]: [${offset},${offset + length}) exceeds text length ${text.length}`,
      ));
      return;
    }
    if (!known.has(span["type_id"] as string)) {
      violations.push(v("unknown_id", `spans[${i}]: unknown type_id`));
      return;
    }
    accepted.push({ offset, length });
  });
  for (let i = 0; i < accepted.length; i++) {
    for (let j = i + 1; j < accepted.length; j++) {
      if (spansOverlap(accepted[i]!, accepted[j]!)) {
        violations.push(v("span_overlap", `spans at index ${i} and ${j} overlap`));
      }
    }
  }
  return violations;
}

function isInt(value: unknown): value is number {
  return typeof value === "number" && Number.isInteger(value);
}

/** Half-open [offset, offset+length) interval intersection. */
export function spansOverlap(
  a: { offset: number; length: number },
  b: { offset: number; length: number },
): boolean {
  const [first, second] = a.offset <= b.offset ? [a, b] : [b, a];
  return second.offset < first.offset + first.length;
}

// -- key_value --------------------------------------------------------------------------

function checkKeyValue(
  config: KeyValueConfig,
  payload: Record<string, unknown>,
): Violation[] {
  const values = payload["values"];
  if (!isPlainObject(values)) {
    return [v("malformed", "key_value payload needs a values map")];
  }
  const byId = new Map(config.fields.map((f) => [f.field_id, f]));
  const violations: Violation[] = [];
  const normalized = new Map<string, string>();
  for (const [fieldId, value] of Object.entries(values)) {
    const spec = byId.get(fieldId);
    if (spec === undefined) {
      violations.push(v("unknown_field", `unknown field ${fieldId}`));
      continue;
    }
    const result = checkFieldValue(spec, value, violations);
    if (result !== null) {
      normalized.set(fieldId, result);
    }
  }
  for (const spec of config.fields) {
    if (spec.required && (normalized.get(spec.field_id) ?? "").trim() === "") {
      violations.push(
        v("missing_required_field", `required field ${spec.field_id} missing`));
    }
  }
  return violations;
}

function checkFieldValue(
  spec: FieldDef,
  value: unknown,
  violations: Violation[],
): string | null {
  if (value === null || value === undefined) {
    return "";
  }
  if (typeof value === "boolean" ||
      (typeof value !== "string" && typeof value !== "number")) {
    violations.push(
      v("bad_value_type", `field ${spec.field_id}: expected a scalar`));
    return null;
  }
  const text = String(value).trim();
  if (text === "") {
    return "";
  }
  if (spec.datatype === "integer") {
    if (!INTEGER_SHAPE.test(text)) {
      violations.push(
        v("bad_value_type", `field ${spec.field_id}: ${text} is not an integer`));
      return null;
    }
    return String(parseInt(text, 10));
  }
  if (spec.datatype === "date") {
    if (!validPartialDate(text)) {
      violations.push(v(
        "bad_value_type",
        `field ${spec.field_id}: ${text} is not a valid YYYY[-MM[-DD]] date`,
      ));
      return null;
    }
    return text;
  }
  if (spec.datatype === "choice") {
    if (!(spec.choices ?? []).includes(text)) {
      violations.push(
        v("bad_value_type", `field ${spec.field_id}: ${text} not in choices`));
      return null;
    }
    return text;
  }
  return text;
}

/** ISO-8601 calendar dates; partial YYYY and YYYY-MM accepted. */
export function validPartialDate(text: string): boolean {
  if (!DATE_SHAPE.test(text)) {
    return false;
  }
  const parts = text.split("-").map((p) => parseInt(p, 10));
  const year = parts[0]!;
  if (parts.length === 1) {
    return true;
  }
  const month = parts[1]!;
  if (month < 1 || month > 12) {
    return false;
  }
  if (parts.length === 2) {
    return true;
  }
  return parts[2]! >= 1 && parts[2]! <= daysInMonth(year, month);
}

function daysInMonth(year: number, month: number): number {
  const lengths = [31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31];
  if (month === 2 && isLeapYear(year)) {
    return 29;
  }
  return lengths[month - 1]!;
}

function isLeapYear(year: number): boolean {
  return year % 4 === 0 && (year % 100 !== 0 || year % 400 === 0);
}

// -- grouping ------------------------------------------------------------------------------

export function eligibleChildren(
  config: GroupingConfig,
  context: ElementContext,
): Set<string> {
  return new Set(
    context.children
      .filter(([, type]) => type === config.child_element_type)
      .map(([id]) => id),
  );
}

function checkGrouping(
  config: GroupingConfig,
  context: ElementContext,
  payload: Record<string, unknown>,
): Violation[] {
  const groups = payload["groups"];
  if (!Array.isArray(groups)) {
    return [v("malformed", "grouping payload needs a groups list")];
  }
  const eligible = eligibleChildren(config, context);
  const violations: Violation[] = [];
  const seenIndices = new Set<number>();
  const memberCounts = new Map<string, number>();
  groups.forEach((group, i) => {
    if (!isPlainObject(group)) {
      violations.push(v("malformed", `groups[${i}] must be an object`));
      return;
    }
    const index = group["group_index"];
    const members = group["member_element_ids"];
    if (!isInt(index)) {
      violations.push(
        v("malformed", `groups[${i}]: group_index must be an integer`));
      return;
    }
    if (seenIndices.has(index)) {
      violations.push(
        v("duplicate_group_index", `groups[${i}]: group_index ${index} reused`));
      return;
    }
    seenIndices.add(index);
    if (!Array.isArray(members) || members.length === 0) {
      violations.push(
        v("malformed", `groups[${i}]: member_element_ids must be non-empty`));
      return;
    }
    for (const member of members) {
      if (typeof member !== "string" || !eligible.has(member)) {
        violations.push(
          v("member_not_child", `groups[${i}]: ${member} is not an eligible child`));
        continue;
      }
      memberCounts.set(member, (memberCounts.get(member) ?? 0) + 1);
    }
  });
  for (const [member, count] of [...memberCounts.entries()].sort()) {
    if (count > 1) {
      violations.push(
        v("member_duplicated", `${member} appears in ${count} groups`));
    }
  }
  return violations;
}

export type { AnnotationPayload, ElementContext, ModeConfig, Violation };
