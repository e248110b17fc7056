/**
 * Campaign dashboard and moderation view-models.
 *
 * The dashboard renders progress bars from the progress report and the
 * task table with status / feedback / user filters; the moderation panel
 * shows the live annotation over the element image with validate/reject,
 * the comment thread, and the uncertainty flag.
 */

import { ApiClient } from "./api.js";
import type {
  FeedbackState,
  ProgressReport,
  TaskDetail,
  TaskRecord,
  TaskStatus,
} from "./types.js";

export interface TaskFilters {
  status?: TaskStatus;
  feedback?: FeedbackState;
  user?: string;
}

export class Dashboard {
  progress: ProgressReport | null = null;
  tasks: TaskRecord[] = [];
  filters: TaskFilters = {};

  constructor(private readonly api: ApiClient,
              readonly campaignId: string) {}

  async refresh(): Promise<void> {
    this.progress = await this.api.progress(this.campaignId);
    this.tasks = await this.api.listTasks(this.campaignId, this.filters);
  }

  async setFilters(filters: TaskFilters): Promise<void> {
    this.filters = filters;
    this.tasks = await this.api.listTasks(this.campaignId, this.filters);
  }

  /** status -> fraction of the total, for rendering stacked progress bars. */
  bars(): Array<{ status: TaskStatus; fraction: number }> {
    if (this.progress === null || this.progress.total === 0) {
      return [];
    }
    const order: TaskStatus[] = [
      "validated", "annotated", "rejected", "pending", "skipped", "draft"];
    return order.map((status) => ({
      status,
      fraction: (this.progress!.counts[status] ?? 0) / this.progress!.total,
    }));
  }
}

export class ModerationView {
  detail: TaskDetail | null = null;

  constructor(private readonly api: ApiClient) {}

  async load(taskId: string): Promise<void> {
    this.detail = await this.api.taskDetail(taskId);
  }

  private taskId(): string {
    if (this.detail === null) {
      throw new Error("no task loaded");
    }
    return this.detail.task.task_id;
  }

  async validate(): Promise<void> {
    const updated = await this.api.moderate(this.taskId(), "validate");
    this.detail!.task = updated;
  }

  async reject(note?: string): Promise<void> {
    const updated = await this.api.moderate(this.taskId(), "reject", note);
    this.detail!.task = updated;
    this.detail!.comments = await this.api.comments(updated.task_id);
  }

  async comment(body: string): Promise<void> {
    const created = await this.api.addComment(this.taskId(), body);
    this.detail!.comments.push(created);
  }
}
