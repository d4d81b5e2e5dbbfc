import { describe, expect, it } from "vitest";

import { grayToPanel, panelsEqual, renderPanel, valuesToGray } from "../src/render.js";

describe("valuesToGray", () => {
  it("maps disc samples from [0,1] with clamping", () => {
    const g = valuesToGray([0, 0.5, 1, 1.7, -0.2], "disc");
    expect(Array.from(g)).toEqual([0, 128, 255, 255, 0]);
  });

  it("maps vec samples from [-2,2]", () => {
    const g = valuesToGray([-2, 0, 2], "vec");
    expect(Array.from(g)).toEqual([0, 128, 255]);
  });
});

describe("grayToPanel", () => {
  it("upscales nearest-neighbor with opaque alpha", () => {
    const panel = grayToPanel(new Uint8ClampedArray([10, 200, 30, 40]), [2, 2], 4);
    expect(panel.width).toBe(8);
    expect(panel.height).toBe(8);
    expect(panel.rgba.length).toBe(8 * 8 * 4);
    // top-left block is the first pixel, top-right block the second
    expect(panel.rgba[0]).toBe(10);
    expect(panel.rgba[(0 * 8 + 7) * 4]).toBe(200);
    expect(panel.rgba[3]).toBe(255);
  });
});

describe("panelsEqual", () => {
  it("detects equality and differences", () => {
    const a = renderPanel([0.1, 0.2, 0.3, 0.4], "disc", [2, 2]);
    const b = renderPanel([0.1, 0.2, 0.3, 0.4], "disc", [2, 2]);
    const c = renderPanel([0.1, 0.2, 0.3, 0.5], "disc", [2, 2]);
    expect(panelsEqual(a, b)).toBe(true);
    expect(panelsEqual(a, c)).toBe(false);
  });
});
