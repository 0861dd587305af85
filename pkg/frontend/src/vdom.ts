/** Minimal virtual node layer: views build plain trees that are trivial to
 * assert on in tests and are mounted to real DOM only in the browser. */

export interface VNode {
  tag: string;
  attrs: Record<string, string>;
  children: (VNode | string)[];
  on?: Record<string, (event?: unknown) => void>;
}

export function h(
  tag: string,
  attrs: Record<string, string> = {},
  children: (VNode | string)[] = [],
  on?: Record<string, (event?: unknown) => void>,
): VNode {
  return { tag, attrs, children, on };
}

export function mount(node: VNode, doc: Document): HTMLElement {
  const el = doc.createElement(node.tag);
  for (const [k, v] of Object.entries(node.attrs)) el.setAttribute(k, v);
  for (const [k, fn] of Object.entries(node.on ?? {})) {
    el.addEventListener(k, fn as EventListener);
  }
  for (const child of node.children) {
    el.append(typeof child === "string" ? doc.createTextNode(child) : mount(child, doc));
  }
  return el;
}

/** Depth-first search over a tree; handy in tests and event wiring. */
export function findAll(
  node: VNode,
  predicate: (n: VNode) => boolean,
): VNode[] {
  const out: VNode[] = [];
  const walk = (n: VNode) => {
    if (predicate(n)) out.push(n);
    for (const c of n.children) if (typeof c !== "string") walk(c);
  };
  walk(node);
  return out;
}

export function byClass(node: VNode, cls: string): VNode[] {
  return findAll(node, (n) => (n.attrs.class ?? "").split(" ").includes(cls));
}

export function text(node: VNode): string {
  return node.children
    .map((c) => (typeof c === "string" ? c : text(c)))
    .join("");
}
