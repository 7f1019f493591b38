import { describe, expect, it } from "vitest";

import { lonLatToWorld, tileAt, tileUrl, worldToLonLat, zoomForSpan } from "../src/mercator";

describe("web mercator", () => {
  it("maps the origin to the world center", () => {
    const p = lonLatToWorld(0, 0);
    expect(p.x).toBeCloseTo(0.5, 12);
    expect(p.y).toBeCloseTo(0.5, 12);
  });

  it("maps the projection limits to the edges", () => {
    expect(lonLatToWorld(-180, 0).x).toBeCloseTo(0, 12);
    expect(lonLatToWorld(180, 0).x).toBeCloseTo(1, 12);
    expect(lonLatToWorld(0, 85.05112878).y).toBeCloseTo(0, 6);
    expect(lonLatToWorld(0, -85.05112878).y).toBeCloseTo(1, 6);
  });

  it("round-trips coordinates", () => {
    for (const [lon, lat] of [
      [144.9631, -37.8136],
      [-9.1393, 38.7223],
      [0.1, 0.2],
    ]) {
      const w = lonLatToWorld(lon, lat);
      const back = worldToLonLat(w.x, w.y);
      expect(back.lon).toBeCloseTo(lon, 9);
      expect(back.lat).toBeCloseTo(lat, 9);
    }
  });

  it("selects tiles", () => {
    expect(tileAt(0.5, 0.5, 1)).toEqual({ tx: 1, ty: 1 });
    expect(tileAt(0.999999, 0.999999, 2)).toEqual({ tx: 3, ty: 3 });
    expect(tileUrl("https://tile.example/{z}/{x}/{y}.png", 3, 1, 2)).toBe(
      "https://tile.example/3/1/2.png",
    );
  });

  it("chooses a sane zoom for a bbox span", () => {
    expect(zoomForSpan(1)).toBe(2);
    expect(zoomForSpan(0.001)).toBeGreaterThan(10);
    expect(zoomForSpan(0)).toBe(18);
  });
});
