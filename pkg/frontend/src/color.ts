/** Shared color conventions: scaffold is always a red, insert always a blue,
 * flexibility runs blue->orange, and the meridian angle rho uses a circular
 * red/black/white scale that wraps (rho=0 and rho=360 are the same color). */

export type RGB = [number, number, number];

export const SCAFFOLD_COLOR: RGB = [200, 40, 40];
export const INSERT_COLOR: RGB = [40, 70, 200];

/** Six brightness steps, cycled across loops in extraction order. */
const BRIGHTNESS_STEPS = [1.0, 0.8, 0.6, 1.2, 0.9, 0.7];

export function roleColor(role: "scaffold" | "insert"): RGB {
  return role === "scaffold" ? SCAFFOLD_COLOR : INSERT_COLOR;
}

export function loopColor(role: "scaffold" | "insert", ordinal: number): RGB {
  const base = roleColor(role);
  const k = BRIGHTNESS_STEPS[ordinal % BRIGHTNESS_STEPS.length];
  return base.map((c) => Math.max(0, Math.min(255, Math.round(c * k)))) as RGB;
}

function lerp(a: RGB, b: RGB, t: number): RGB {
  return [0, 1, 2].map((i) => Math.round(a[i] + (b[i] - a[i]) * t)) as RGB;
}

/** Linear grayscale for angles in [0, 180]: 0 -> white, 180 -> black. */
export function grayscale(angleDeg: number): RGB {
  const t = Math.max(0, Math.min(1, angleDeg / 180));
  const v = Math.round(255 * (1 - t));
  return [v, v, v];
}

const RED: RGB = [220, 30, 30];
const BLACK: RGB = [0, 0, 0];
const WHITE: RGB = [255, 255, 255];

/** Circular scale for rho in [0, 360): red near 0/360, through black and
 * white on the way around. Periodic by construction. */
export function rhoColor(rhoDeg: number): RGB {
  const x = ((rhoDeg % 360) + 360) % 360;
  if (x < 120) return lerp(RED, BLACK, x / 120);
  if (x < 240) return lerp(BLACK, WHITE, (x - 120) / 120);
  return lerp(WHITE, RED, (x - 240) / 120);
}

const FLEX_COLD: RGB = [50, 90, 200]; // rigid
const FLEX_HOT: RGB = [240, 140, 30]; // most flexible

/** Flexibility scale on normalized values in [0, 1]: blue -> orange. */
export function flexColor(normalized: number): RGB {
  const t = Math.max(0, Math.min(1, normalized));
  return lerp(FLEX_COLD, FLEX_HOT, t);
}

export function toCss([r, g, b]: RGB): string {
  return `rgb(${r}, ${g}, ${b})`;
}
