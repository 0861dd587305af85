import { loopColor, toCss } from "../color.js";
import type { LoopEntry, Role, Segment } from "../types.js";
import { h, VNode } from "../vdom.js";

export interface ResidueInfo {
  seq_num: number;
  name: string;
}

const GLYPH: Record<string, string> = {
  H: "helix",
  E: "arrow",
  G: "line",
  C: "line",
};

/** 1D sequence track: secondary-structure glyphs, loop brackets alternating
 * above/below the track, a separate layer for user-defined loops, and a
 * rectangle outline around candidate loops. */
export function renderSequenceView(
  segments: Segment[],
  loops: LoopEntry[],
  role: Role,
  residues?: ResidueInfo[],
  hoverIndex?: number,
): VNode {
  const glyphs = segments.map((seg) =>
    h("div", {
      class: `glyph glyph-${GLYPH[seg.ss_class]}`,
      "data-ss": seg.ss_class,
      "data-start": String(seg.start_index),
      "data-end": String(seg.end_index),
    }),
  );

  const extracted = loops.filter((l) => !l.custom);
  const custom = loops.filter((l) => l.custom);

  const bracket = (loop: LoopEntry, side: "above" | "below"): VNode => {
    const children: VNode[] = [];
    if (loop.triage === "candidate") {
      children.push(h("div", { class: "candidate-outline" }));
    }
    return h(
      "div",
      {
        class: `loop-bracket side-${side}`,
        "data-loop": loop.id,
        "data-start": String(loop.start_index),
        "data-end": String(loop.end_index),
        style: `color: ${toCss(loopColor(role, loop.ordinal))}`,
      },
      children,
    );
  };

  const brackets = extracted.map((loop, i) =>
    bracket(loop, i % 2 === 0 ? "above" : "below"),
  );
  const customLayer = h(
    "div",
    { class: "custom-loop-layer" },
    custom.map((loop, i) => bracket(loop, i % 2 === 0 ? "above" : "below")),
  );

  const children: VNode[] = [
    h("div", { class: "ss-track" }, glyphs),
    h("div", { class: "loop-layer" }, brackets),
    customLayer,
  ];

  if (hoverIndex !== undefined && residues && residues[hoverIndex]) {
    const res = residues[hoverIndex];
    const seg = segments.find(
      (s) => s.start_index <= hoverIndex && hoverIndex <= s.end_index,
    );
    children.push(
      h("div", { class: "tooltip" }, [
        `${res.name} ${res.seq_num} (${seg?.ss_class ?? "?"})`,
      ]),
    );
  }

  return h("div", { class: `sequence-view role-${role}` }, children);
}
