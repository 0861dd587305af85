import type { MethodCorrelation, XcorrPayload } from "../types.js";
import { h, VNode } from "../vdom.js";

/** Method-agreement matrix: cell size and darkness both encode |r|; entries
 * whose p-value exceeds 0.5 get a fuzzy border instead of a crisp one. */
export function renderMethodMatrix(corr: MethodCorrelation): VNode {
  const rows = corr.methods.map((rowName, i) =>
    h(
      "div",
      { class: "matrix-row", "data-method": rowName },
      corr.methods.map((colName, j) => {
        const magnitude = Math.abs(corr.r[i][j]);
        const fuzzy = corr.p[i][j] > 0.5;
        return h("div", {
          class: `matrix-cell${fuzzy ? " fuzzy-border" : ""}`,
          "data-row": rowName,
          "data-col": colName,
          "data-r": corr.r[i][j].toFixed(3),
          style:
            `width: ${(magnitude * 100).toFixed(0)}%; ` +
            `opacity: ${magnitude.toFixed(3)}`,
        });
      }),
    ),
  );
  return h("div", { class: "method-matrix" }, rows);
}

/** Motion matrix: candidate loops as columns, other loops as rows in the
 * API's sort order. Dual encoding per cell: the inner square's size/darkness
 * carries the periodic-flank correlation, the border color carries the
 * whole-loop correlation. */
export function renderMotionMatrix(payload: XcorrPayload): VNode {
  const header = h(
    "div",
    { class: "matrix-row matrix-header" },
    payload.columns.map((c) => h("div", { class: "col-label" }, [c])),
  );
  const rows = payload.rows.map((rowId) =>
    h(
      "div",
      { class: "matrix-row", "data-loop": rowId },
      payload.columns.map((colId) => {
        const pair = payload.pairs[`${rowId}|${colId}`];
        if (!pair) return h("div", { class: "matrix-cell empty" });
        const ssMag = Math.min(1, Math.abs(pair.ss_corr));
        const loopMag = Math.min(1, Math.abs(pair.loop_corr));
        return h(
          "div",
          {
            class: "matrix-cell dual",
            "data-row": rowId,
            "data-col": colId,
            "data-ss-corr": pair.ss_corr.toFixed(3),
            "data-loop-corr": pair.loop_corr.toFixed(3),
            "data-ss-to-coil": pair.ss_to_coil.toFixed(3),
            style: `border-width: ${(1 + loopMag * 3).toFixed(1)}px`,
          },
          [
            h("div", {
              class: "inner-square",
              style:
                `width: ${(ssMag * 100).toFixed(0)}%; ` +
                `opacity: ${ssMag.toFixed(3)}`,
            }),
          ],
        );
      }),
    ),
  );
  return h("div", { class: "motion-matrix" }, [header, ...rows]);
}
