import { INSERT_COLOR, SCAFFOLD_COLOR, toCss } from "../color.js";
import { h, VNode } from "../vdom.js";

export interface SolutionRow {
  modelId: string;
  scores: Record<string, number>;
  /** per-residue provenance, "scaffold" | "grafted", in chimera order */
  originMask?: string[];
  error?: string;
}

/** Straight-line preview of one chimera: scaffold-red spans with grafted
 * (insert-blue) spans where the origin mask says so. */
export function renderPreviewLine(originMask: string[]): VNode {
  const spans: VNode[] = [];
  let start = 0;
  for (let i = 1; i <= originMask.length; i++) {
    if (i === originMask.length || originMask[i] !== originMask[start]) {
      const origin = originMask[start];
      spans.push(
        h("div", {
          class: `preview-span origin-${origin}`,
          "data-start": String(start),
          "data-end": String(i - 1),
          style: `background: ${toCss(origin === "grafted" ? INSERT_COLOR : SCAFFOLD_COLOR)}`,
        }),
      );
      start = i;
    }
  }
  return h("div", { class: "preview-line" }, spans);
}

/** Solutions table in the order delivered by the API (rank order: best
 * composite first). Rows whose model could not be fetched show an error
 * badge instead of a preview. */
export function renderSolutions(rows: SolutionRow[], scoreKey = "composite"): VNode {
  const body = rows.map((row, rank) =>
    h(
      "div",
      {
        class: "solution-row",
        "data-model": row.modelId,
        "data-rank": String(rank),
      },
      [
        h("div", { class: "score" }, [
          (row.scores[scoreKey] ?? NaN).toFixed(3),
        ]),
        row.error
          ? h("div", { class: "error-badge" }, [row.error])
          : renderPreviewLine(row.originMask ?? []),
      ],
    ),
  );
  return h("div", { class: "solutions-table" }, body);
}
