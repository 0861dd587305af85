import { h, VNode } from "../vdom.js";

export const PHASE_LABELS = [
  "Proteins",
  "Loops",
  "Flexibility",
  "Motion",
  "Pairing",
  "Grafting",
];

/** Workflow header: one tab per phase; phases not yet completed render
 * grayed out, the current phase is marked active. */
export function renderPhaseHeader(
  currentPhase: number,
  completion: Record<string, boolean>,
  onSelect?: (phase: number) => void,
): VNode {
  const tabs = PHASE_LABELS.map((label, i) => {
    const phase = i + 1;
    const complete = Boolean(completion[String(phase)]);
    const classes = ["phase-tab"];
    if (!complete && phase !== currentPhase) classes.push("grayed");
    if (phase === currentPhase) classes.push("active");
    return h(
      "div",
      { class: classes.join(" "), "data-phase": String(phase) },
      [label],
      onSelect ? { click: () => onSelect(phase) } : undefined,
    );
  });
  return h("div", { class: "phase-header" }, tabs);
}
