/** Wire types: the canonical JSON encodings served by /api/v1. */

export type ModeKind =
  | "classification"
  | "structure"
  | "transcription"
  | "entities"
  | "key_value"
  | "grouping";

export interface ClassDef {
  class_id: string;
  label: string;
}

export interface ZoneTypeDef {
  type_id: string;
  label: string;
}

export interface EntityTypeDef {
  type_id: string;
  label: string;
  color: string;
}

export type FieldDatatype = "text" | "integer" | "date" | "choice";

export interface FieldDef {
  field_id: string;
  label: string;
  datatype: FieldDatatype;
  required?: boolean;
  choices?: string[];
}

export interface ClassificationConfig {
  classes: ClassDef[];
}

export interface StructureConfig {
  zone_types: ZoneTypeDef[];
}

export interface TranscriptionConfig {
  granularity: "line_by_line" | "page_by_page";
  target_element_type: string;
}

export interface EntitiesConfig {
  entity_types: EntityTypeDef[];
}

export interface KeyValueConfig {
  fields: FieldDef[];
}

export interface GroupingConfig {
  group_label: string;
  child_element_type: string;
}

export type ModeConfig =
  | ClassificationConfig
  | StructureConfig
  | TranscriptionConfig
  | EntitiesConfig
  | KeyValueConfig
  | GroupingConfig;

export type Point = [number, number];

export interface ZonePayloadItem {
  polygon: Point[];
  type_id: string;
}

export interface TextPayloadItem {
  element_id: string;
  text: string;
}

export interface SpanPayloadItem {
  offset: number;
  length: number;
  type_id: string;
}

export interface GroupPayloadItem {
  group_index: number;
  member_element_ids: string[];
}

export interface ClassificationPayload {
  class_id: string;
}

export interface StructurePayload {
  zones: ZonePayloadItem[];
}

export interface TranscriptionPayload {
  texts: TextPayloadItem[];
}

export interface EntitiesPayload {
  spans: SpanPayloadItem[];
}

export interface KeyValuePayload {
  values: Record<string, string>;
}

export interface GroupingPayload {
  groups: GroupPayloadItem[];
}

export type AnnotationPayload =
  | ClassificationPayload
  | StructurePayload
  | TranscriptionPayload
  | EntitiesPayload
  | KeyValuePayload
  | GroupingPayload;

/** What the payload validator needs to know about the task's element. */
export interface ElementContext {
  element_id: string;
  image_width: number;
  image_height: number;
  element_type: string;
  children: Array<[string, string]>;
  reference_text: string | null;
}

export interface Violation {
  code: string;
  detail: string;
}

// -- API records -------------------------------------------------------------

export type TaskStatus =
  | "draft"
  | "pending"
  | "annotated"
  | "validated"
  | "rejected"
  | "skipped";

export type FeedbackState = "none" | "commented" | "uncertain";

export interface UserInfo {
  user_id: string;
  email: string;
  display_name: string;
  is_staff: boolean;
}

export interface ProjectInfo {
  project_id: string;
  name: string;
  description: string;
  visibility: "public" | "private";
  role: string | null;
}

export interface CampaignInfo {
  campaign_id: string;
  project_id: string;
  name: string;
  mode: ModeKind;
  config: ModeConfig;
  guide: string;
  state: "draft" | "open" | "closed";
  batch_size: number;
  context_margin: number;
}

export interface TaskRecord {
  task_id: string;
  campaign_id: string;
  element_id: string;
  status: TaskStatus;
  assignee: string | null;
  feedback: FeedbackState;
  prefill: AnnotationPayload | null;
  dup_group: string | null;
}

export interface ElementInfo {
  element_id: string;
  element_type: string;
  name: string;
  order_index: number;
  polygon: Point[];
  image: { uri: string; width: number; height: number };
  image_url: string;
  full_image_url: string;
}

export interface CommentInfo {
  comment_id: string;
  author: string;
  body: string;
  created_at: string;
}

export interface AnnotationInfo {
  annotation_id: string;
  author: string;
  payload: AnnotationPayload;
  created_at: string;
  superseded_by: string | null;
}

/** One response from GET /tasks/{id}: everything a workbench renders. */
export interface TaskDetail {
  task: TaskRecord;
  element: ElementInfo;
  campaign: {
    campaign_id: string;
    name: string;
    mode: ModeKind;
    config: ModeConfig;
    guide: string;
    context_margin: number;
  };
  context_image_url: string;
  context_region: { x: number; y: number; w: number; h: number };
  children: ElementInfo[];
  reference_text: string | null;
  prefill: AnnotationPayload | null;
  live_annotation: AnnotationInfo | null;
  comments: CommentInfo[];
}

export interface ProgressReport {
  campaign_id: string;
  counts: Record<TaskStatus, number>;
  total: number;
  completion_ratio: number;
  per_user: Record<string, number>;
  median_annotation_seconds: number | null;
}

export interface AgreementReport {
  campaign_id: string;
  mode: ModeKind;
  n_pairs: number;
  metrics: Record<string, number | null>;
  pairs: Array<Record<string, unknown>>;
}

export interface JobInfo {
  job_id: string;
  kind: string;
  state: "queued" | "running" | "done" | "failed";
  result_ref: string | null;
  error: string | null;
}
