import { describe, expect, it } from "vitest";

import { ViewStateStore } from "../src/state";

describe("view state", () => {
  it("clamps the instant into the loaded range", () => {
    const store = new ViewStateStore();
    store.setRange(1000, 2000);
    store.setInstant(500);
    expect(store.get().instantMs).toBe(1000);
    store.setInstant(9999);
    expect(store.get().instantMs).toBe(2000);
    store.setInstant(1500);
    expect(store.get().instantMs).toBe(1500);
  });

  it("re-clamps the instant when the range shrinks", () => {
    const store = new ViewStateStore();
    store.setRange(0, 10000);
    store.setInstant(8000);
    store.setRange(0, 5000);
    expect(store.get().instantMs).toBe(5000);
  });

  it("never lets color metric equal height metric", () => {
    const store = new ViewStateStore();
    store.setHeightMetric("total");
    expect(store.setColorMetric("total")).toBe(false);
    expect(store.get().colorMetric).toBeNull();
    expect(store.setColorMetric("density")).toBe(true);
    store.setHeightMetric("density"); // steals the color metric's id
    const state = store.get();
    expect(state.heightMetric).toBe("density");
    expect(state.colorMetric).toBeNull();
  });

  it("notifies subscribers with the changed fields", () => {
    const store = new ViewStateStore();
    const seen: string[][] = [];
    store.subscribe((_, changed) => seen.push([...changed].sort()));
    store.setRange(0, 100);
    store.setRegion([
      [0, 0],
      [1, 0],
      [1, 1],
    ]);
    expect(seen[0]).toEqual(["instantMs", "rangeFromMs", "rangeToMs"]);
    expect(seen[1]).toEqual(["region"]);
  });

  it("does not notify for no-op updates", () => {
    const store = new ViewStateStore();
    store.setRange(0, 100);
    let calls = 0;
    store.subscribe(() => calls++);
    store.setInstant(0); // already clamped there
    store.setLive(false); // already false
    expect(calls).toBe(0);
  });

  it("rejects inverted ranges", () => {
    const store = new ViewStateStore();
    expect(() => store.setRange(10, 5)).toThrow();
  });
});
