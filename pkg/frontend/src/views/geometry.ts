import { grayscale, loopColor, rhoColor, toCss } from "../color.js";
import type { Descriptors, Role } from "../types.js";
import { h, VNode } from "../vdom.js";

export interface LoopPanelInput {
  loopId: string;
  role: Role;
  ordinal: number;
  descriptors: Descriptors;
}

/** Per-loop descriptor panel: linear grayscale bars for the three
 * non-periodic descriptors and the circular red/black/white scale for rho. */
export function renderLoopPanel(input: LoopPanelInput): VNode {
  const d = input.descriptors;
  const bar = (name: string, value: number, color: string, label: string) =>
    h("div", {
      class: `descriptor-bar descriptor-${name}`,
      "data-value": value.toFixed(2),
      "data-label": label,
      style: `background: ${color}`,
    });
  return h(
    "div",
    {
      class: "loop-panel",
      "data-loop": input.loopId,
      style: `border-color: ${toCss(loopColor(input.role, input.ordinal))}`,
    },
    [
      bar("D", d.D, "gray", `D = ${d.D.toFixed(1)} A`),
      bar("delta", d.delta, toCss(grayscale(d.delta)), `delta = ${d.delta.toFixed(0)} deg`),
      bar("theta", d.theta, toCss(grayscale(d.theta)), `theta = ${d.theta.toFixed(0)} deg`),
      bar("rho", d.rho, toCss(rhoColor(d.rho)), `rho = ${d.rho.toFixed(0)} deg`),
    ],
  );
}

/** Aggregate comparison: a D bar chart plus one tick per loop on each of the
 * three angular plots, tick color matching the loop's panel color. */
export function renderGeometryPanels(inputs: LoopPanelInput[]): VNode {
  const panels = inputs.map(renderLoopPanel);
  const dBars = inputs.map((inp) =>
    h("div", {
      class: "d-bar",
      "data-loop": inp.loopId,
      style: `height: ${inp.descriptors.D.toFixed(2)}px`,
    }),
  );
  const angular = (name: "delta" | "theta" | "rho") =>
    h(
      "div",
      { class: `angular-plot angular-${name}` },
      inputs.map((inp) =>
        h("div", {
          class: "tick",
          "data-loop": inp.loopId,
          "data-angle": inp.descriptors[name].toFixed(2),
          style: `color: ${toCss(loopColor(inp.role, inp.ordinal))}`,
        }),
      ),
    );
  return h("div", { class: "geometry-panels" }, [
    h("div", { class: "panel-row" }, panels),
    h("div", { class: "aggregate" }, [
      h("div", { class: "d-chart" }, dBars),
      angular("delta"),
      angular("theta"),
      angular("rho"),
    ]),
  ]);
}
