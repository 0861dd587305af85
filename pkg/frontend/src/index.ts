export { ApiClient, ApiError } from "./api.js";
export * from "./color.js";
export * from "./types.js";
export { h, mount, findAll, byClass, text } from "./vdom.js";
export type { VNode } from "./vdom.js";
export { ViewModel } from "./viewmodel.js";
export { renderSequenceView } from "./views/sequence.js";
export { renderGeometryPanels, renderLoopPanel } from "./views/geometry.js";
export { renderMethodMatrix, renderMotionMatrix } from "./views/matrices.js";
export { renderPreviewLine, renderSolutions } from "./views/solutions.js";
export { renderPhaseHeader, PHASE_LABELS } from "./views/phases.js";
