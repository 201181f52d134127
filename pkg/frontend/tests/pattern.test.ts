import { describe, expect, it } from "vitest";

import {
  clickImage,
  createWidgetState,
  emitPattern,
  parsePattern,
} from "../src/pattern.js";

// deterministic PRNG so a failing sequence is reproducible from the seed
function mulberry32(seed: number): () => number {
  let a = seed >>> 0;
  return () => {
    a = (a + 0x6d2b79f5) | 0;
    let t = Math.imul(a ^ (a >>> 15), 1 | a);
    t = (t + Math.imul(t ^ (t >>> 7), 61 | t)) ^ t;
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

describe("rotation widget state", () => {
  it("starts untouched at the all-zero pattern", () => {
    const state = createWidgetState(4);
    expect(emitPattern(state)).toBe("PhotoWall1_0_PhotoWall2_0_PhotoWall3_0_PhotoWall4_0");
  });

  it("each click adds exactly 90 degrees modulo 360", () => {
    const state = createWidgetState(4);
    clickImage(state, 2);
    expect(state.angles).toEqual([0, 0, 90, 0]);
    clickImage(state, 2);
    clickImage(state, 2);
    expect(state.angles).toEqual([0, 0, 270, 0]);
    clickImage(state, 2); // fourth click wraps back to 0
    expect(state.angles).toEqual([0, 0, 0, 0]);
  });

  it("a scripted click sequence produces the genesis pattern", () => {
    // image 1 once, image 2 twice, image 3 once, image 4 once
    const state = createWidgetState(4);
    for (const index of [0, 1, 1, 2, 3]) {
      clickImage(state, index);
    }
    expect(emitPattern(state)).toBe(
      "PhotoWall1_90_PhotoWall2_180_PhotoWall3_90_PhotoWall4_90",
    );
  });

  it("rejects clicks outside the wall", () => {
    const state = createWidgetState(4);
    expect(() => clickImage(state, 4)).toThrow(/no image at index 4/);
    expect(() => clickImage(state, -1)).toThrow(/no image at index -1/);
  });

  it("every random click sequence emits a grammar-valid pattern", () => {
    const rand = mulberry32(20260818);
    for (let trial = 0; trial < 1000; trial++) {
      const imageCount = 1 + Math.floor(rand() * 8);
      const state = createWidgetState(imageCount);
      const clicks = Math.floor(rand() * 40);
      for (let c = 0; c < clicks; c++) {
        clickImage(state, Math.floor(rand() * imageCount));
      }
      const pattern = emitPattern(state);
      // the strict parser round-trips the exact widget state
      expect(parsePattern(pattern, imageCount)).toEqual(state.angles);
    }
  });
});

describe("strict pattern parser", () => {
  it("accepts both known-good four-image patterns", () => {
    expect(parsePattern("PhotoWall1_90_PhotoWall2_180_PhotoWall3_90_PhotoWall4_90", 4)).toEqual([
      90, 180, 90, 90,
    ]);
    expect(parsePattern("PhotoWall1_270_PhotoWall2_180_PhotoWall3_90_PhotoWall4_90", 4)).toEqual([
      270, 180, 90, 90,
    ]);
  });

  it.each([
    ["PhotoWall1_45_PhotoWall2_0_PhotoWall3_0_PhotoWall4_0", "off-grid angle"],
    ["PhotoWall1_090_PhotoWall2_0_PhotoWall3_0_PhotoWall4_0", "zero-padded angle"],
    ["PhotoWall2_0_PhotoWall1_0_PhotoWall3_0_PhotoWall4_0", "indices out of order"],
    ["photowall1_0_PhotoWall2_0_PhotoWall3_0_PhotoWall4_0", "lowercase prefix"],
    ["PhotoWall1_0_PhotoWall2_0_PhotoWall3_0", "too few images"],
    ["PhotoWall1_0_PhotoWall2_0_PhotoWall3_0_PhotoWall4_0_", "trailing separator"],
    ["", "empty string"],
  ])("rejects %s (%s)", (bad) => {
    expect(() => parsePattern(bad, 4)).toThrow();
  });

  it("names the offending token in the error", () => {
    expect(() =>
      parsePattern("PhotoWall1_45_PhotoWall2_0_PhotoWall3_0_PhotoWall4_0", 4),
    ).toThrow(/'45'/);
  });
});
