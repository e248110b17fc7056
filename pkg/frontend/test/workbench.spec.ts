/**
 * Scripted workbench flows against a live seeded backend: claim one task
 * in each of the six modes, drive the mode's editor, and submit — the
 * same request sequence the browser UI issues.
 */

import { beforeAll, describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { handleKey } from "../src/keyboard.js";
import { Workbench } from "../src/workbench.js";
import { BASE_URL } from "./global-setup.js";
import type {
  CampaignInfo,
  EntitiesConfig,
  KeyValuePayload,
  ModeKind,
  StructureConfig,
} from "../src/types.js";

let campaignsByMode: Map<ModeKind, CampaignInfo>;
let projectId: string;
let userCounter = 0;

async function freshContributor(): Promise<ApiClient> {
  const api = new ApiClient(BASE_URL);
  const email = `flow${Date.now()}_${userCounter++}@test.org`;
  await api.register(email, "Flow Tester", "pw");
  await api.login(email, "pw");
  await api.joinProject(projectId);
  return api;
}

beforeAll(async () => {
  const api = new ApiClient(BASE_URL);
  await api.login("contributor@example.org", "contributor");
  const projects = await api.projects();
  expect(projects.length).toBeGreaterThan(0);
  projectId = projects[0]!.project_id;
  const campaigns = await api.campaigns(projectId);
  campaignsByMode = new Map(
    campaigns
      .filter((c) => c.state === "open")
      .map((c) => [c.mode, c]),
  );
});

describe("workbench flows, one per mode", () => {
  it("classification: keyboard-first select and submit", async () => {
    const api = await freshContributor();
    const workbench = new Workbench(api);
    const got = await workbench.start(
      campaignsByMode.get("classification")!.campaign_id);
    expect(got).toBe(true);
    const taskId = workbench.detail!.task.task_id;

    expect(workbench.canSubmit()).toBe(false); // nothing selected yet
    const picked = await handleKey(workbench, "1"); // digit picks first class
    expect(picked.handled).toBe(true);
    expect(workbench.canSubmit()).toBe(true);
    const submitted = await handleKey(workbench, "Enter"); // submit-and-next
    expect(submitted.handled).toBe(true);

    const done = await api.taskDetail(taskId);
    expect(done.task.status).toBe("annotated");
    expect(done.live_annotation!.payload).toHaveProperty("class_id");
  });

  it("structure: draw typed zones on the page", async () => {
    const api = await freshContributor();
    const workbench = new Workbench(api);
    await workbench.start(campaignsByMode.get("structure")!.campaign_id);
    const taskId = workbench.detail!.task.task_id;
    const config = workbench.config as StructureConfig;
    const { image_width, image_height } = workbench.context();

    workbench.addZone(
      [[0, 0], [image_width, 0], [image_width, 120], [0, 120]],
      config.zone_types[0]!.type_id);
    workbench.addZone(
      [[10, 200], [400, 200], [200, Math.min(600, image_height)]],
      config.zone_types[1]!.type_id);
    expect(workbench.canSubmit()).toBe(true);
    await workbench.submit();

    const done = await api.taskDetail(taskId);
    expect(done.task.status).toBe("annotated");
    const payload = done.live_annotation!.payload as { zones: unknown[] };
    expect(payload.zones).toHaveLength(2);
  });

  it("transcription: one text per target line", async () => {
    const api = await freshContributor();
    const workbench = new Workbench(api);
    await workbench.start(campaignsByMode.get("transcription")!.campaign_id);
    const taskId = workbench.detail!.task.task_id;

    // the empty draft pre-lists every target; fill them in order
    const draft = workbench.draft as { texts: Array<{ element_id: string }> };
    expect(draft.texts.length).toBeGreaterThan(0);
    draft.texts.forEach((entry, i) =>
      workbench.setText(entry.element_id, i % 2 === 0 ? `ligne ${i + 1}` : ""));
    expect(workbench.canSubmit()).toBe(true);
    await workbench.submit();

    const done = await api.taskDetail(taskId);
    expect(done.task.status).toBe("annotated");
  });

  it("entities: spans bounded by the rendered text", async () => {
    const api = await freshContributor();
    const workbench = new Workbench(api);
    await workbench.start(campaignsByMode.get("entities")!.campaign_id);
    const taskId = workbench.detail!.task.task_id;
    const text = workbench.detail!.reference_text!;
    expect(text.length).toBeGreaterThan(10);
    const config = workbench.config as EntitiesConfig;
    const personType = config.entity_types[0]!.type_id;

    // out-of-range selection is impossible by construction
    expect(workbench.addSpan(text.length - 2, 10, personType)).toBe(false);
    expect(workbench.addSpan(0, 11, personType)).toBe(true);
    expect(workbench.spanSurface({ offset: 0, length: 11, type_id: personType }))
      .toBe(text.slice(0, 11));
    expect(workbench.canSubmit()).toBe(true);
    await workbench.submit();

    const done = await api.taskDetail(taskId);
    const payload = done.live_annotation!.payload as { spans: unknown[] };
    expect(payload.spans).toHaveLength(1);
  });

  it("key_value: prefilled form accepted untouched records the prefill", async () => {
    const api = await freshContributor();
    const workbench = new Workbench(api);
    await workbench.start(campaignsByMode.get("key_value")!.campaign_id);
    const taskId = workbench.detail!.task.task_id;

    // the model prediction pre-populates the form as the initial state
    expect(workbench.detail!.prefill).not.toBeNull();
    const prefill = workbench.detail!.prefill as KeyValuePayload;
    expect(workbench.fieldValue("surname")).toBe(prefill.values["surname"]);
    expect(workbench.dirty).toBe(false);

    // untouched submit: the prefill becomes the annotation
    expect(workbench.canSubmit()).toBe(true);
    await workbench.submit();

    const done = await api.taskDetail(taskId);
    expect(done.task.status).toBe("annotated");
    expect(done.live_annotation!.payload).toEqual(prefill);
  });

  it("key_value: corrected field overrides the prefill", async () => {
    const api = await freshContributor();
    const workbench = new Workbench(api);
    await workbench.start(campaignsByMode.get("key_value")!.campaign_id);
    const taskId = workbench.detail!.task.task_id;

    workbench.setField("surname", "Corrected Name");
    expect(workbench.dirty).toBe(true);
    await workbench.submit();

    const done = await api.taskDetail(taskId);
    const payload = done.live_annotation!.payload as KeyValuePayload;
    expect(payload.values["surname"]).toBe("Corrected Name");
  });

  it("grouping: click children into groups", async () => {
    const api = await freshContributor();
    const workbench = new Workbench(api);
    await workbench.start(campaignsByMode.get("grouping")!.campaign_id);
    const taskId = workbench.detail!.task.task_id;

    const children = workbench.groupableChildren();
    expect(children.length).toBeGreaterThanOrEqual(3);
    workbench.addToGroup(0, children[0]!);
    workbench.addToGroup(0, children[1]!);
    workbench.addToGroup(1, children[2]!);
    expect(workbench.canSubmit()).toBe(true);
    await workbench.submit();

    const done = await api.taskDetail(taskId);
    const payload = done.live_annotation!.payload as {
      groups: Array<{ member_element_ids: string[] }>;
    };
    expect(payload.groups).toHaveLength(2);
    expect(payload.groups[0]!.member_element_ids).toHaveLength(2);
  });
});

describe("workbench behaviour", () => {
  it("skip passes through and advances", async () => {
    const api = await freshContributor();
    const workbench = new Workbench(api);
    await workbench.start(campaignsByMode.get("classification")!.campaign_id);
    const first = workbench.detail!.task.task_id;
    await workbench.skip();
    const skipped = await api.taskDetail(first);
    expect(skipped.task.status).toBe("skipped");
    expect(workbench.detail === null
           || workbench.detail.task.task_id !== first).toBe(true);
  });

  it("guide is reachable from the task screen in one interaction", async () => {
    const api = await freshContributor();
    const workbench = new Workbench(api);
    await workbench.start(campaignsByMode.get("classification")!.campaign_id);
    expect(workbench.guide.length).toBeGreaterThan(0);
    const toggled = await handleKey(workbench, "g");
    expect(toggled.guideToggled).toBe(true);
  });

  it("uncertainty flag and comment round-trip", async () => {
    const api = await freshContributor();
    const workbench = new Workbench(api);
    await workbench.start(campaignsByMode.get("structure")!.campaign_id);
    await workbench.flagUncertain();
    expect(workbench.detail!.task.feedback).toBe("uncertain");
    await workbench.comment("is the margin a zone?");
    expect(workbench.detail!.comments.at(-1)!.body).toBe("is the margin a zone?");
  });

  it("submit validation gate blocks invalid drafts locally", async () => {
    const api = await freshContributor();
    const workbench = new Workbench(api);
    await workbench.start(campaignsByMode.get("classification")!.campaign_id);
    workbench.selectClass("not-a-real-class");
    expect(workbench.canSubmit()).toBe(false);
    await expect(workbench.submit()).rejects.toThrow(/does not validate/);
  });

  it("409 conflict reconciles: reload, flag, draft survives", async () => {
    const api = await freshContributor();
    const tabOne = new Workbench(api);
    await tabOne.start(campaignsByMode.get("classification")!.campaign_id);
    const taskId = tabOne.detail!.task.task_id;

    // a second tab of the same session holds the same task
    const tabTwo = new Workbench(api);
    await tabTwo.loadTask(taskId);

    tabOne.selectClassByIndex(0);
    await tabOne.submit();

    tabTwo.selectClassByIndex(1);
    const ok = await tabTwo.submit();
    expect(ok).toBe(false);
    expect(tabTwo.conflict).toBe(true);
    expect(tabTwo.detail!.task.status).toBe("annotated"); // reloaded state
    expect(tabTwo.events.some((e) => e.kind === "conflict")).toBe(true);
  });

  it("autosaved draft is restored on reload", async () => {
    const api = await freshContributor();
    const workbench = new Workbench(api);
    await workbench.start(campaignsByMode.get("key_value")!.campaign_id);
    const taskId = workbench.detail!.task.task_id;
    workbench.setField("surname", "Half-typed nam");

    // simulate a dropped connection: new workbench over the same draft store
    const resumed = new Workbench(api, workbench["drafts"]);
    await resumed.loadTask(taskId);
    expect(resumed.fieldValue("surname")).toBe("Half-typed nam");
    expect(resumed.dirty).toBe(true);
  });
});
