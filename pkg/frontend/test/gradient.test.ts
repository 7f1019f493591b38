import { describe, expect, it } from "vitest";

import { NEUTRAL, gradientCss, hueToCss } from "../src/gradient";

const T0 = Date.parse("2022-12-31T00:00:00Z");
const T1 = Date.parse("2022-12-31T12:00:00Z");
const T2 = Date.parse("2023-01-01T00:00:00Z");

describe("timeline gradient", () => {
  it("renders pure green at the minimum and pure red at the maximum", () => {
    const css = gradientCss(
      [
        { t: "2022-12-31T00:00:00Z", hue: 120, sum: 10 },
        { t: "2022-12-31T12:00:00Z", hue: 60, sum: 20 },
        { t: "2023-01-01T00:00:00Z", hue: 0, sum: 30 },
      ],
      T0,
      T2,
    );
    expect(css).toBe(
      "linear-gradient(to right, hsl(120, 100%, 50%) 0%, hsl(60, 100%, 50%) 50%, hsl(0, 100%, 50%) 100%)",
    );
  });

  it("positions stops by timestamp, not index", () => {
    const css = gradientCss(
      [
        { t: "2022-12-31T00:00:00Z", hue: 120, sum: 1 },
        { t: "2022-12-31T06:00:00Z", hue: 0, sum: 9 },
        { t: "2023-01-01T00:00:00Z", hue: 120, sum: 1 },
      ],
      T0,
      T2,
    );
    expect(css).toContain("hsl(0, 100%, 50%) 25%");
  });

  it("flattens a single stop into a solid fill", () => {
    const css = gradientCss([{ t: "2022-12-31T12:00:00Z", hue: 120, sum: 5 }], T0, T2);
    expect(css).toBe(
      "linear-gradient(to right, hsl(120, 100%, 50%) 50%, hsl(120, 100%, 50%) 100%)",
    );
  });

  it("falls back to neutral when there are no stops", () => {
    expect(gradientCss([], T0, T2)).toContain(NEUTRAL);
  });

  it("formats hues", () => {
    expect(hueToCss(0)).toBe("hsl(0, 100%, 50%)");
    expect(hueToCss(119.994)).toBe("hsl(119.99, 100%, 50%)");
  });

  it("ignores hue stops outside the window by clamping", () => {
    const css = gradientCss([{ t: "2022-12-30T00:00:00Z", hue: 30, sum: 2 }], T0, T1);
    expect(css).toContain("hsl(30, 100%, 50%) 0%");
  });
});
