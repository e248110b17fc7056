/** Typed client for /api/v1. Bearer-token auth; no direct storage access. */

import type {
  AgreementReport,
  AnnotationInfo,
  AnnotationPayload,
  CampaignInfo,
  CommentInfo,
  FeedbackState,
  JobInfo,
  ProgressReport,
  ProjectInfo,
  TaskDetail,
  TaskRecord,
  TaskStatus,
  UserInfo,
  Violation,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly error: string,
    detail: string,
    public readonly violations: Violation[] = [],
  ) {
    super(detail);
  }
}

export class ApiClient {
  private token: string | null = null;
  user: UserInfo | null = null;

  constructor(private readonly baseUrl: string) {}

  private async request<T>(method: string, path: string, body?: unknown,
                           raw = false): Promise<T> {
    const headers: Record<string, string> = {};
    if (body !== undefined) {
      headers["Content-Type"] = "application/json";
    }
    if (this.token !== null) {
      headers["Authorization"] = `Bearer ${this.token}`;
    }
    const response = await fetch(`${this.baseUrl}${path}`, {
      method,
      headers,
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    if (!response.ok) {
      let payload: Record<string, unknown> = {};
      try {
        payload = (await response.json()) as Record<string, unknown>;
      } catch {
        // non-JSON error body; fall through with the status alone
      }
      throw new ApiError(
        response.status,
        (payload["error"] as string) ?? "HttpError",
        (payload["detail"] as string) ?? response.statusText,
        (payload["violations"] as Violation[]) ?? [],
      );
    }
    if (raw) {
      return (await response.text()) as unknown as T;
    }
    return (await response.json()) as T;
  }

  // -- auth --------------------------------------------------------------

  async register(email: string, displayName: string, password: string): Promise<UserInfo> {
    return this.request<UserInfo>("POST", "/auth/register", {
      email, display_name: displayName, password,
    });
  }

  async login(email: string, password: string): Promise<UserInfo> {
    const out = await this.request<{ token: string; user: UserInfo }>(
      "POST", "/auth/login", { email, password });
    this.token = out.token;
    this.user = out.user;
    return out.user;
  }

  async logout(): Promise<void> {
    await this.request("POST", "/auth/logout", {});
    this.token = null;
    this.user = null;
  }

  // -- projects & campaigns -------------------------------------------------

  async projects(): Promise<ProjectInfo[]> {
    const page = await this.request<{ items: ProjectInfo[] }>("GET", "/projects");
    return page.items;
  }

  async joinProject(projectId: string): Promise<void> {
    await this.request("POST", `/projects/${projectId}/join`, {});
  }

  async joinInvitation(token: string): Promise<void> {
    await this.request("POST", `/invitations/${token}/join`, {});
  }

  async campaigns(projectId: string): Promise<CampaignInfo[]> {
    const page = await this.request<{ items: CampaignInfo[] }>(
      "GET", `/projects/${projectId}/campaigns`);
    return page.items;
  }

  async campaign(campaignId: string): Promise<CampaignInfo> {
    return this.request<CampaignInfo>("GET", `/campaigns/${campaignId}`);
  }

  async progress(campaignId: string): Promise<ProgressReport> {
    return this.request<ProgressReport>("GET", `/campaigns/${campaignId}/progress`);
  }

  async agreement(campaignId: string): Promise<AgreementReport> {
    return this.request<AgreementReport>("GET", `/campaigns/${campaignId}/agreement`);
  }

  // -- tasks ------------------------------------------------------------------

  async claim(campaignId: string,
              strategy: "sequential" | "random" = "sequential"): Promise<TaskRecord[]> {
    const out = await this.request<{ tasks: TaskRecord[] }>(
      "POST", `/campaigns/${campaignId}/claim`, { strategy });
    return out.tasks;
  }

  async taskDetail(taskId: string): Promise<TaskDetail> {
    return this.request<TaskDetail>("GET", `/tasks/${taskId}`);
  }

  async listTasks(campaignId: string, filters: {
    status?: TaskStatus; feedback?: FeedbackState; user?: string;
  } = {}): Promise<TaskRecord[]> {
    const params = new URLSearchParams();
    if (filters.status) params.set("status", filters.status);
    if (filters.feedback) params.set("feedback", filters.feedback);
    if (filters.user) params.set("user", filters.user);
    const suffix = params.size > 0 ? `?${params.toString()}` : "";
    const page = await this.request<{ items: TaskRecord[] }>(
      "GET", `/campaigns/${campaignId}/tasks${suffix}`);
    return page.items;
  }

  async submitAnnotation(taskId: string, payload: AnnotationPayload): Promise<TaskRecord> {
    return this.request<TaskRecord>("POST", `/tasks/${taskId}/annotation`, { payload });
  }

  async reviseAnnotation(taskId: string, payload: AnnotationPayload): Promise<AnnotationInfo> {
    return this.request<AnnotationInfo>("POST", `/tasks/${taskId}/revision`, { payload });
  }

  async skipTask(taskId: string): Promise<TaskRecord> {
    return this.request<TaskRecord>("POST", `/tasks/${taskId}/skip`, {});
  }

  async moderate(taskId: string, decision: "validate" | "reject",
                 note?: string): Promise<TaskRecord> {
    return this.request<TaskRecord>("POST", `/tasks/${taskId}/moderate`,
                                    { decision, note: note ?? null });
  }

  async addComment(taskId: string, body: string): Promise<CommentInfo> {
    return this.request<CommentInfo>("POST", `/tasks/${taskId}/comments`, { body });
  }

  async comments(taskId: string): Promise<CommentInfo[]> {
    const page = await this.request<{ items: CommentInfo[] }>(
      "GET", `/tasks/${taskId}/comments`);
    return page.items;
  }

  async setFeedback(taskId: string, feedback: FeedbackState): Promise<TaskRecord> {
    return this.request<TaskRecord>("POST", `/tasks/${taskId}/feedback`, { feedback });
  }

  // -- export jobs ---------------------------------------------------------------

  async startExport(campaignId: string, format: "csv" | "json"): Promise<JobInfo> {
    return this.request<JobInfo>("POST", `/campaigns/${campaignId}/export`, { format });
  }

  async job(jobId: string): Promise<JobInfo> {
    return this.request<JobInfo>("GET", `/jobs/${jobId}`);
  }

  async download(jobId: string): Promise<string> {
    return this.request<string>("GET", `/jobs/${jobId}/download`, undefined, true);
  }
}
