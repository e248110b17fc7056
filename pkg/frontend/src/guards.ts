/**
 * UI-side action gates mirroring the server's authorization matrix, so no
 * control can issue a request the server would deny for the current role.
 */

export type Role = "contributor" | "moderator" | "manager";

export type UiAction =
  | "view_project"
  | "view_elements"
  | "view_campaign"
  | "view_progress"
  | "view_agreement"
  | "claim_tasks"
  | "annotate"
  | "skip"
  | "comment"
  | "flag_feedback"
  | "moderate"
  | "create_campaign"
  | "edit_campaign"
  | "create_tasks"
  | "publish_tasks"
  | "import_elements"
  | "ingest_manifest"
  | "rotate_invitation"
  | "set_member_role"
  | "export";

const RANK: Record<Role, number> = { contributor: 1, moderator: 2, manager: 3 };

export const MINIMUM_ROLE: Record<UiAction, Role> = {
  view_project: "contributor",
  view_elements: "contributor",
  view_campaign: "contributor",
  view_progress: "contributor",
  view_agreement: "moderator",
  claim_tasks: "contributor",
  annotate: "contributor",
  skip: "contributor",
  comment: "contributor",
  flag_feedback: "contributor",
  moderate: "moderator",
  create_campaign: "manager",
  edit_campaign: "manager",
  create_tasks: "manager",
  publish_tasks: "manager",
  import_elements: "manager",
  ingest_manifest: "manager",
  rotate_invitation: "manager",
  set_member_role: "manager",
  export: "manager",
};

export function canPerform(role: Role | null, action: UiAction): boolean {
  if (role === null) {
    return false;
  }
  return RANK[role] >= RANK[MINIMUM_ROLE[action]];
}

/** Everything the current role may see or press; drives menu rendering. */
export function allowedActions(role: Role | null): UiAction[] {
  return (Object.keys(MINIMUM_ROLE) as UiAction[])
    .filter((action) => canPerform(role, action));
}
