/**
 * Task workbench view-model: one task, one interface.
 *
 * Owns the claimed-task queue, the per-mode draft, local validation
 * (submit stays disabled until the draft passes the same rules the
 * server applies), local autosave so a dropped connection never loses
 * work, and 409 reconciliation when a task is stolen by stale release.
 */

import { ApiClient, ApiError } from "./api.js";
import { eligibleChildren, transcriptionTargets, validatePayload } from "./validation.js";
import type {
  AnnotationPayload,
  ElementContext,
  GroupingConfig,
  GroupPayloadItem,
  ModeConfig,
  Point,
  SpanPayloadItem,
  TaskDetail,
  TaskRecord,
  TextPayloadItem,
  TranscriptionConfig,
  Violation,
  ZonePayloadItem,
} from "./types.js";

export interface DraftStore {
  load(taskId: string): AnnotationPayload | null;
  save(taskId: string, draft: AnnotationPayload): void;
  clear(taskId: string): void;
}

/** In-memory autosave; the browser build swaps in a localStorage-backed one. */
export class MemoryDraftStore implements DraftStore {
  private drafts = new Map<string, string>();

  load(taskId: string): AnnotationPayload | null {
    const raw = this.drafts.get(taskId);
    return raw === undefined ? null : (JSON.parse(raw) as AnnotationPayload);
  }

  save(taskId: string, draft: AnnotationPayload): void {
    this.drafts.set(taskId, JSON.stringify(draft));
  }

  clear(taskId: string): void {
    this.drafts.delete(taskId);
  }
}

export type WorkbenchEvent =
  | { kind: "task_loaded"; taskId: string }
  | { kind: "submitted"; taskId: string }
  | { kind: "skipped"; taskId: string }
  | { kind: "conflict"; taskId: string }
  | { kind: "queue_empty" };

export class Workbench {
  detail: TaskDetail | null = null;
  draft: AnnotationPayload | null = null;
  dirty = false;
  /** Set when a submit bounced with 409: the task was stolen or moderated. */
  conflict = false;
  events: WorkbenchEvent[] = [];

  private queue: TaskRecord[] = [];
  private campaignId: string | null = null;
  private strategy: "sequential" | "random" = "sequential";

  constructor(
    private readonly api: ApiClient,
    private readonly drafts: DraftStore = new MemoryDraftStore(),
  ) {}

  // -- queue & loading -------------------------------------------------------

  async start(campaignId: string,
              strategy: "sequential" | "random" = "sequential"): Promise<boolean> {
    this.campaignId = campaignId;
    this.strategy = strategy;
    return this.advance();
  }

  /** Load the next claimed task, claiming a fresh batch when the queue runs dry. */
  async advance(): Promise<boolean> {
    if (this.queue.length === 0 && this.campaignId !== null) {
      this.queue = await this.api.claim(this.campaignId, this.strategy);
    }
    const next = this.queue.shift();
    if (next === undefined) {
      this.detail = null;
      this.draft = null;
      this.dirty = false;
      this.events.push({ kind: "queue_empty" });
      return false;
    }
    await this.loadTask(next.task_id);
    return true;
  }

  async loadTask(taskId: string): Promise<void> {
    this.detail = await this.api.taskDetail(taskId);
    this.conflict = false;
    // initial form state: local autosave wins, then the model prefill
    const saved = this.drafts.load(taskId);
    this.draft = saved ?? this.detail.prefill ?? this.emptyDraft();
    this.dirty = saved !== null;
    this.events.push({ kind: "task_loaded", taskId });
  }

  private emptyDraft(): AnnotationPayload {
    switch (this.mode) {
      case "classification":
        return { class_id: "" };
      case "structure":
        return { zones: [] };
      case "transcription": {
        const config = this.config as TranscriptionConfig;
        const targets = [...transcriptionTargets(config, this.context())];
        targets.sort((a, b) => this.childOrder(a) - this.childOrder(b));
        return { texts: targets.map((id) => ({ element_id: id, text: "" })) };
      }
      case "entities":
        return { spans: [] };
      case "key_value":
        return { values: {} };
      case "grouping":
        return { groups: [] };
    }
  }

  private childOrder(elementId: string): number {
    if (this.detail === null) {
      return 0;
    }
    if (elementId === this.detail.element.element_id) {
      return 0;
    }
    const child = this.detail.children.find((c) => c.element_id === elementId);
    return child === undefined ? 0 : child.order_index;
  }

  // -- accessors ----------------------------------------------------------------

  get mode() {
    if (this.detail === null) {
      throw new Error("no task loaded");
    }
    return this.detail.campaign.mode;
  }

  get config(): ModeConfig {
    if (this.detail === null) {
      throw new Error("no task loaded");
    }
    return this.detail.campaign.config;
  }

  /** The annotation guide, reachable from every task screen. */
  get guide(): string {
    return this.detail?.campaign.guide ?? "";
  }

  get imageUrl(): string {
    return this.detail?.context_image_url ?? "";
  }

  context(): ElementContext {
    if (this.detail === null) {
      throw new Error("no task loaded");
    }
    return {
      element_id: this.detail.element.element_id,
      image_width: this.detail.element.image.width,
      image_height: this.detail.element.image.height,
      element_type: this.detail.element.element_type,
      children: this.detail.children.map(
        (c) => [c.element_id, c.element_type] as [string, string]),
      reference_text: this.detail.reference_text,
    };
  }

  // -- validation gate ---------------------------------------------------------------

  validate(): Violation[] {
    if (this.detail === null || this.draft === null) {
      return [{ code: "no_task", detail: "no task loaded" }];
    }
    return validatePayload(this.mode, this.config, this.context(), this.draft);
  }

  canSubmit(): boolean {
    return this.validate().length === 0;
  }

  // -- draft edits (one small surface per mode) ------------------------------------------

  private touch(): void {
    this.dirty = true;
    if (this.detail !== null && this.draft !== null) {
      this.drafts.save(this.detail.task.task_id, this.draft);
    }
  }

  selectClass(classId: string): void {
    this.draft = { class_id: classId };
    this.touch();
  }

  /** Classification keyboard shortcut: digits 1-9 pick the nth class. */
  selectClassByIndex(index: number): boolean {
    if (this.mode !== "classification") {
      return false;
    }
    const classes = (this.config as { classes: Array<{ class_id: string }> }).classes;
    const chosen = classes[index];
    if (chosen === undefined) {
      return false;
    }
    this.selectClass(chosen.class_id);
    return true;
  }

  addZone(polygon: Point[], typeId: string): void {
    const zones = [...this.zonesDraft(), { polygon, type_id: typeId }];
    this.draft = { zones };
    this.touch();
  }

  removeZone(index: number): void {
    const zones = this.zonesDraft().filter((_, i) => i !== index);
    this.draft = { zones };
    this.touch();
  }

  private zonesDraft(): ZonePayloadItem[] {
    return (this.draft as { zones?: ZonePayloadItem[] }).zones ?? [];
  }

  setText(elementId: string, text: string): void {
    const texts = [...(this.draft as { texts?: TextPayloadItem[] }).texts ?? []];
    const existing = texts.findIndex((t) => t.element_id === elementId);
    if (existing >= 0) {
      texts[existing] = { element_id: elementId, text };
    } else {
      texts.push({ element_id: elementId, text });
    }
    this.draft = { texts };
    this.touch();
  }

  /**
   * Add a span over the rendered reference text.  The selection is bounded
   * by the rendered text, so out-of-range spans cannot be constructed.
   */
  addSpan(offset: number, length: number, typeId: string): boolean {
    const text = this.detail?.reference_text ?? "";
    if (offset < 0 || length < 1 || offset + length > text.length) {
      return false;
    }
    const spans = [...this.spansDraft(), { offset, length, type_id: typeId }];
    this.draft = { spans };
    this.touch();
    return true;
  }

  removeSpan(index: number): void {
    const spans = this.spansDraft().filter((_, i) => i !== index);
    this.draft = { spans };
    this.touch();
  }

  spanSurface(span: SpanPayloadItem): string {
    const text = this.detail?.reference_text ?? "";
    return text.slice(span.offset, span.offset + span.length);
  }

  private spansDraft(): SpanPayloadItem[] {
    return (this.draft as { spans?: SpanPayloadItem[] }).spans ?? [];
  }

  setField(fieldId: string, value: string): void {
    const values = { ...(this.draft as { values?: Record<string, string> }).values };
    values[fieldId] = value;
    this.draft = { values };
    this.touch();
  }

  fieldValue(fieldId: string): string {
    return (this.draft as { values?: Record<string, string> }).values?.[fieldId] ?? "";
  }

  /** Click-to-add grouping: adds the element to the given group, creating it. */
  addToGroup(groupIndex: number, elementId: string): void {
    const groups = [...this.groupsDraft().map((g) => ({
      group_index: g.group_index,
      member_element_ids: [...g.member_element_ids],
    }))];
    let group = groups.find((g) => g.group_index === groupIndex);
    if (group === undefined) {
      group = { group_index: groupIndex, member_element_ids: [] };
      groups.push(group);
    }
    if (!group.member_element_ids.includes(elementId)) {
      group.member_element_ids.push(elementId);
    }
    this.draft = { groups };
    this.touch();
  }

  removeFromGroup(groupIndex: number, elementId: string): void {
    const groups = this.groupsDraft()
      .map((g) => g.group_index === groupIndex
        ? { group_index: g.group_index,
            member_element_ids: g.member_element_ids.filter((m) => m !== elementId) }
        : g)
      .filter((g) => g.member_element_ids.length > 0);
    this.draft = { groups };
    this.touch();
  }

  groupableChildren(): string[] {
    if (this.mode !== "grouping") {
      return [];
    }
    const eligible = eligibleChildren(this.config as GroupingConfig, this.context());
    return this.detail!.children
      .filter((c) => eligible.has(c.element_id))
      .sort((a, b) => a.order_index - b.order_index)
      .map((c) => c.element_id);
  }

  private groupsDraft(): GroupPayloadItem[] {
    return (this.draft as { groups?: GroupPayloadItem[] }).groups ?? [];
  }

  // -- actions -----------------------------------------------------------------------------

  /** Submit the draft; on success advance to the next claimed task. */
  async submit(): Promise<boolean> {
    if (this.detail === null || this.draft === null) {
      throw new Error("no task loaded");
    }
    const violations = this.validate();
    if (violations.length > 0) {
      throw new Error(`draft does not validate: ${violations[0]!.code}`);
    }
    const taskId = this.detail.task.task_id;
    try {
      await this.api.submitAnnotation(taskId, this.draft);
    } catch (error) {
      if (error instanceof ApiError && error.status === 409) {
        // stolen by stale release or already moderated: reload and let the
        // user decide; the draft survives in the autosave store
        await this.loadTask(taskId);
        this.conflict = true;
        this.events.push({ kind: "conflict", taskId });
        return false;
      }
      throw error;
    }
    this.drafts.clear(taskId);
    this.dirty = false;
    this.events.push({ kind: "submitted", taskId });
    await this.advance();
    return true;
  }

  async skip(): Promise<void> {
    if (this.detail === null) {
      throw new Error("no task loaded");
    }
    const taskId = this.detail.task.task_id;
    await this.api.skipTask(taskId);
    this.drafts.clear(taskId);
    this.events.push({ kind: "skipped", taskId });
    await this.advance();
  }

  async flagUncertain(): Promise<void> {
    if (this.detail === null) {
      throw new Error("no task loaded");
    }
    await this.api.setFeedback(this.detail.task.task_id, "uncertain");
    this.detail.task.feedback = "uncertain";
  }

  async comment(body: string): Promise<void> {
    if (this.detail === null) {
      throw new Error("no task loaded");
    }
    const created = await this.api.addComment(this.detail.task.task_id, body);
    this.detail.comments.push(created);
  }
}
