import { describe, expect, it } from "vitest";

import {
  flexColor,
  grayscale,
  INSERT_COLOR,
  loopColor,
  rhoColor,
  roleColor,
  SCAFFOLD_COLOR,
} from "../src/color.js";

describe("rho circular scale", () => {
  it("wraps: rho=0 and rho=360 map to the identical color", () => {
    expect(rhoColor(0)).toEqual(rhoColor(360));
  });

  it("is red near 0 and 360, not red mid-scale", () => {
    const nearZero = rhoColor(5);
    const nearFull = rhoColor(355);
    expect(nearZero[0]).toBeGreaterThan(nearZero[2]); // red dominates blue
    expect(nearFull[0]).toBeGreaterThan(nearFull[2]);
    expect(rhoColor(120)).toEqual([0, 0, 0]); // black waypoint
    expect(rhoColor(240)).toEqual([255, 255, 255]); // white waypoint
  });

  it("handles out-of-range inputs periodically", () => {
    expect(rhoColor(-30)).toEqual(rhoColor(330));
    expect(rhoColor(725)).toEqual(rhoColor(5));
  });
});

describe("role colors", () => {
  it("scaffold is a red, insert is a blue, never swapped", () => {
    expect(SCAFFOLD_COLOR[0]).toBeGreaterThan(SCAFFOLD_COLOR[2]);
    expect(INSERT_COLOR[2]).toBeGreaterThan(INSERT_COLOR[0]);
    expect(roleColor("scaffold")).toEqual(SCAFFOLD_COLOR);
    expect(roleColor("insert")).toEqual(INSERT_COLOR);
  });

  it("loop brightness cycles through six steps", () => {
    const seen = new Set<string>();
    for (let i = 0; i < 6; i++) seen.add(loopColor("scaffold", i).join(","));
    expect(seen.size).toBe(6);
    expect(loopColor("scaffold", 6)).toEqual(loopColor("scaffold", 0));
    // every brightness step stays a red for scaffold loops
    for (let i = 0; i < 6; i++) {
      const [r, , b] = loopColor("scaffold", i);
      expect(r).toBeGreaterThan(b);
    }
  });
});

describe("linear scales", () => {
  it("grayscale runs white (0 deg) to black (180 deg)", () => {
    expect(grayscale(0)).toEqual([255, 255, 255]);
    expect(grayscale(180)).toEqual([0, 0, 0]);
  });

  it("flexibility runs blue (rigid) to orange (flexible)", () => {
    const rigid = flexColor(0);
    const flexible = flexColor(1);
    expect(rigid[2]).toBeGreaterThan(rigid[0]);
    expect(flexible[0]).toBeGreaterThan(flexible[2]);
  });
});
