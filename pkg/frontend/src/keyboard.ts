/**
 * Keyboard-first flows: digits 1-9 pick a class, Enter submits and
 * advances, "s" skips, "u" flags uncertainty, "g" toggles the guide.
 */

import type { Workbench } from "./workbench.js";

export type KeyAction =
  | { kind: "select_class"; index: number }
  | { kind: "submit" }
  | { kind: "skip" }
  | { kind: "uncertain" }
  | { kind: "toggle_guide" }
  | { kind: "none" };

export function actionForKey(key: string): KeyAction {
  if (/^[1-9]$/.test(key)) {
    return { kind: "select_class", index: parseInt(key, 10) - 1 };
  }
  switch (key) {
    case "Enter":
      return { kind: "submit" };
    case "s":
      return { kind: "skip" };
    case "u":
      return { kind: "uncertain" };
    case "g":
      return { kind: "toggle_guide" };
    default:
      return { kind: "none" };
  }
}

export interface KeyboardOutcome {
  handled: boolean;
  guideToggled?: boolean;
}

/** Applies a key press to the workbench; ignores keys that do not apply. */
export async function handleKey(workbench: Workbench, key: string):
    Promise<KeyboardOutcome> {
  const action = actionForKey(key);
  switch (action.kind) {
    case "select_class":
      return { handled: workbench.selectClassByIndex(action.index) };
    case "submit":
      if (!workbench.canSubmit()) {
        return { handled: false };
      }
      await workbench.submit();
      return { handled: true };
    case "skip":
      await workbench.skip();
      return { handled: true };
    case "uncertain":
      await workbench.flagUncertain();
      return { handled: true };
    case "toggle_guide":
      return { handled: true, guideToggled: true };
    case "none":
      return { handled: false };
  }
}
