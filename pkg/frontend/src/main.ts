/**
 * Single-page workbench app: login, project and campaign pickers, the
 * per-mode task workbench, and the campaign dashboard.  Vanilla DOM; all
 * behaviour lives in the view-model modules so it stays testable.
 */

import { ApiClient, ApiError } from "./api.js";
import { Dashboard, ModerationView } from "./dashboard.js";
import { canPerform, type Role } from "./guards.js";
import { handleKey } from "./keyboard.js";
import { MemoryDraftStore, Workbench, type DraftStore } from "./workbench.js";
import type {
  CampaignInfo,
  ClassificationConfig,
  EntitiesConfig,
  FieldDef,
  GroupingConfig,
  KeyValueConfig,
  ProjectInfo,
  StructureConfig,
} from "./types.js";

class LocalDraftStore implements DraftStore {
  load(taskId: string) {
    const raw = window.localStorage.getItem(`draft:${taskId}`);
    return raw === null ? null : JSON.parse(raw);
  }

  save(taskId: string, draft: unknown): void {
    window.localStorage.setItem(`draft:${taskId}`, JSON.stringify(draft));
  }

  clear(taskId: string): void {
    window.localStorage.removeItem(`draft:${taskId}`);
  }
}

const api = new ApiClient("/api/v1");
const drafts: DraftStore =
  typeof window === "undefined" ? new MemoryDraftStore() : new LocalDraftStore();
const workbench = new Workbench(api, drafts);

const root = document.getElementById("app")!;
let currentRole: Role | null = null;
let guideVisible = false;

function el(tag: string, attrs: Record<string, string> = {},
            ...children: Array<Node | string>): HTMLElement {
  const node = document.createElement(tag);
  for (const [key, value] of Object.entries(attrs)) {
    node.setAttribute(key, value);
  }
  node.append(...children);
  return node;
}

function clear(): HTMLElement {
  root.replaceChildren();
  return root;
}

// -- screens -------------------------------------------------------------------

function showLogin(message = ""): void {
  const email = el("input", { type: "email", placeholder: "email" }) as HTMLInputElement;
  const password = el("input", { type: "password", placeholder: "password" }) as HTMLInputElement;
  const status = el("p", { class: "status" }, message);
  const button = el("button", {}, "Sign in");
  button.addEventListener("click", async () => {
    try {
      await api.login(email.value, password.value);
      await showProjects();
    } catch (error) {
      status.textContent = error instanceof ApiError ? error.message : String(error);
    }
  });
  clear().append(el("section", { class: "login" },
    el("h1", {}, "scriptorium"), email, password, button, status));
}

async function showProjects(): Promise<void> {
  const projects = await api.projects();
  const list = el("ul", { class: "projects" });
  for (const project of projects) {
    const open = el("button", {}, project.name);
    open.addEventListener("click", () => showCampaigns(project));
    const item = el("li", {}, open, ` — ${project.role ?? "not a member"}`);
    if (project.role === null && project.visibility === "public") {
      const join = el("button", {}, "Join");
      join.addEventListener("click", async () => {
        await api.joinProject(project.project_id);
        await showProjects();
      });
      item.append(" ", join);
    }
    list.append(item);
  }
  clear().append(el("h1", {}, "Projects"), list);
}

async function showCampaigns(project: ProjectInfo): Promise<void> {
  currentRole = (project.role as Role | null) ?? null;
  const campaigns = await api.campaigns(project.project_id);
  const list = el("ul", { class: "campaigns" });
  for (const campaign of campaigns) {
    const item = el("li", {}, `${campaign.name} [${campaign.mode}] `);
    if (campaign.state === "open" && canPerform(currentRole, "claim_tasks")) {
      const work = el("button", {}, "Annotate");
      work.addEventListener("click", () => startWorkbench(campaign));
      item.append(work);
    }
    if (canPerform(currentRole, "view_progress")) {
      const stats = el("button", {}, "Dashboard");
      stats.addEventListener("click", () => showDashboard(campaign));
      item.append(" ", stats);
    }
    list.append(item);
  }
  clear().append(el("h1", {}, project.name), list);
}

async function startWorkbench(campaign: CampaignInfo): Promise<void> {
  const got = await workbench.start(campaign.campaign_id);
  if (!got) {
    clear().append(el("p", {}, "No tasks available — the pool is empty."));
    return;
  }
  renderWorkbench();
}

function renderWorkbench(): void {
  const detail = workbench.detail;
  if (detail === null) {
    clear().append(el("p", {}, "Queue finished. Thank you!"));
    return;
  }
  const pane = el("section", { class: "workbench" });
  pane.append(el("h2", {}, `${detail.campaign.name} — ${detail.element.name}`));

  const guideButton = el("button", { class: "guide-toggle" }, "Guide");
  guideButton.addEventListener("click", () => {
    guideVisible = !guideVisible;
    renderWorkbench();
  });
  pane.append(guideButton);
  if (guideVisible) {
    pane.append(el("aside", { class: "guide" }, workbench.guide));
  }

  // dual display: the image pane above, the mode editor below
  pane.append(el("img", { src: workbench.imageUrl, class: "context-image" }));
  pane.append(renderEditor());

  const violations = workbench.validate();
  const submit = el("button", { class: "submit" }, "Submit") as HTMLButtonElement;
  submit.disabled = violations.length > 0;
  submit.addEventListener("click", async () => {
    await workbench.submit();
    renderWorkbench();
  });
  const skip = el("button", {}, "Skip");
  skip.addEventListener("click", async () => {
    await workbench.skip();
    renderWorkbench();
  });
  const uncertain = el("button", {}, "Flag uncertain");
  uncertain.addEventListener("click", () => workbench.flagUncertain());
  pane.append(el("div", { class: "actions" }, submit, skip, uncertain));
  if (violations.length > 0) {
    pane.append(el("ul", { class: "violations" },
      ...violations.map((violation) => el("li", {}, violation.detail))));
  }
  if (workbench.conflict) {
    pane.append(el("p", { class: "conflict" },
      "This task changed on the server; review before resubmitting."));
  }
  clear().append(pane);
}

function renderEditor(): HTMLElement {
  switch (workbench.mode) {
    case "classification": {
      const config = workbench.config as ClassificationConfig;
      const buttons = config.classes.map((cls, i) => {
        const button = el("button", { class: "class-button" },
                          `${i + 1}. ${cls.label}`);
        button.addEventListener("click", () => {
          workbench.selectClass(cls.class_id);
          renderWorkbench();
        });
        return button;
      });
      return el("div", { class: "editor classification" }, ...buttons);
    }
    case "structure": {
      const config = workbench.config as StructureConfig;
      const note = el("p", {},
        "Draw zones on the image; each zone takes a type:");
      const types = el("ul", {}, ...config.zone_types.map(
        (z) => el("li", {}, `${z.type_id}: ${z.label}`)));
      return el("div", { class: "editor structure" }, note, types);
    }
    case "transcription": {
      const editor = el("div", { class: "editor transcription" });
      const texts = (workbench.draft as { texts: Array<{ element_id: string; text: string }> }).texts;
      for (const entry of texts) {
        const area = el("textarea", { "data-element": entry.element_id }) as HTMLTextAreaElement;
        area.value = entry.text;
        area.addEventListener("input", () =>
          workbench.setText(entry.element_id, area.value));
        editor.append(el("label", {}, entry.element_id), area);
      }
      return editor;
    }
    case "entities": {
      const config = workbench.config as EntitiesConfig;
      const editor = el("div", { class: "editor entities" });
      const textPane = el("pre", { class: "reference-text" },
                          workbench.detail!.reference_text ?? "");
      const palette = el("div", { class: "palette" });
      for (const entityType of config.entity_types) {
        const button = el("button", { style: `background:${entityType.color}` },
                          entityType.label);
        button.addEventListener("click", () => {
          const selection = window.getSelection();
          if (selection === null || selection.rangeCount === 0) {
            return;
          }
          const range = selection.getRangeAt(0);
          const offset = range.startOffset;
          const length = range.endOffset - range.startOffset;
          if (workbench.addSpan(offset, length, entityType.type_id)) {
            renderWorkbench();
          }
        });
        palette.append(button);
      }
      editor.append(textPane, palette);
      return editor;
    }
    case "key_value": {
      const config = workbench.config as KeyValueConfig;
      const form = el("form", { class: "editor key-value" });
      for (const field of config.fields) {
        form.append(el("label", {}, field.label), fieldInput(field));
      }
      return form;
    }
    case "grouping": {
      const config = workbench.config as GroupingConfig;
      const editor = el("div", { class: "editor grouping" },
        el("p", {}, `Group ${config.child_element_type}s into ` +
          `${config.group_label || "group"}s by clicking:`));
      const groups = (workbench.draft as { groups: Array<{ group_index: number; member_element_ids: string[] }> }).groups;
      const nextIndex = groups.length;
      for (const childId of workbench.groupableChildren()) {
        const inGroup = groups.find((g) => g.member_element_ids.includes(childId));
        const button = el("button", { class: inGroup ? "grouped" : "free" },
          inGroup ? `${childId} (group ${inGroup.group_index})` : childId);
        button.addEventListener("click", () => {
          if (inGroup === undefined) {
            workbench.addToGroup(nextIndex, childId);
          } else {
            workbench.removeFromGroup(inGroup.group_index, childId);
          }
          renderWorkbench();
        });
        editor.append(button);
      }
      return editor;
    }
  }
}

function fieldInput(field: FieldDef): HTMLElement {
  if (field.datatype === "choice") {
    const select = el("select", { name: field.field_id }) as HTMLSelectElement;
    select.append(el("option", { value: "" }, ""));
    for (const choice of field.choices ?? []) {
      select.append(el("option", { value: choice }, choice));
    }
    select.value = workbench.fieldValue(field.field_id);
    select.addEventListener("change", () => {
      workbench.setField(field.field_id, select.value);
      renderWorkbench();
    });
    return select;
  }
  const input = el("input", { name: field.field_id }) as HTMLInputElement;
  input.value = workbench.fieldValue(field.field_id);
  input.addEventListener("input", () =>
    workbench.setField(field.field_id, input.value));
  input.addEventListener("change", () => renderWorkbench());
  return input;
}

async function showDashboard(campaign: CampaignInfo): Promise<void> {
  const dashboard = new Dashboard(api, campaign.campaign_id);
  await dashboard.refresh();
  const pane = el("section", { class: "dashboard" },
    el("h2", {}, `${campaign.name} — progress`));
  const bars = el("div", { class: "bars" });
  for (const bar of dashboard.bars()) {
    bars.append(el("div", {
      class: `bar ${bar.status}`,
      style: `width:${(bar.fraction * 100).toFixed(1)}%`,
      title: bar.status,
    }));
  }
  pane.append(bars);
  const table = el("table", {},
    el("tr", {}, el("th", {}, "task"), el("th", {}, "status"),
       el("th", {}, "feedback"), el("th", {}, "assignee")));
  for (const task of dashboard.tasks) {
    const row = el("tr", {},
      el("td", {}, task.task_id), el("td", {}, task.status),
      el("td", {}, task.feedback), el("td", {}, task.assignee ?? ""));
    if (task.status === "annotated" && canPerform(currentRole, "moderate")) {
      const review = el("button", {}, "Review");
      review.addEventListener("click", () => showModeration(task.task_id));
      row.append(el("td", {}, review));
    }
    table.append(row);
  }
  pane.append(table);
  clear().append(pane);
}

async function showModeration(taskId: string): Promise<void> {
  const view = new ModerationView(api);
  await view.load(taskId);
  const detail = view.detail!;
  const pane = el("section", { class: "moderation" },
    el("h2", {}, `Moderate ${taskId}`),
    el("img", { src: detail.context_image_url }),
    el("pre", {}, JSON.stringify(detail.live_annotation?.payload, null, 2)));
  const note = el("input", { placeholder: "rejection note" }) as HTMLInputElement;
  const approve = el("button", {}, "Validate");
  approve.addEventListener("click", async () => {
    await view.validate();
    pane.append(el("p", {}, "validated"));
  });
  const reject = el("button", {}, "Reject");
  reject.addEventListener("click", async () => {
    await view.reject(note.value || undefined);
    pane.append(el("p", {}, "rejected"));
  });
  pane.append(approve, reject, note);
  clear().append(pane);
}

document.addEventListener("keydown", async (event) => {
  if (workbench.detail === null) {
    return;
  }
  const target = event.target as HTMLElement | null;
  if (target !== null && ["INPUT", "TEXTAREA", "SELECT"].includes(target.tagName)
      && event.key !== "Enter") {
    return;
  }
  const outcome = await handleKey(workbench, event.key);
  if (outcome.guideToggled) {
    guideVisible = !guideVisible;
  }
  if (outcome.handled) {
    renderWorkbench();
  }
});

showLogin();
