/** Linked-view consistency over a New-Year's-Eve-like fixture: the spike
 * place's column saturates to full height at the spike instant, and every
 * number the views would display is exactly a value fetched from the API
 * (the UI performs no aggregation of its own). */

import { describe, expect, it } from "vitest";

import { ApiClient } from "../src/api";
import { chartDatasets } from "../src/axes";
import { frameToColumns } from "../src/columns";
import type { PlaceInfo } from "../src/columns";
import { gradientCss } from "../src/gradient";

const SPIKE_T = "2022-12-31T22:00:00Z";
const CAP = 3000;

const PLACES: PlaceInfo[] = Array.from({ length: 5 }, (_, i) => ({
  id: `sensor_${i}`,
  name: `Sensor ${i}`,
  lon: 144.9 + i * 0.01,
  lat: -37.81,
  capacity: 1000,
}));

const FRAME_AT_SPIKE: Record<string, number | null> = {
  sensor_0: 52144, // the spike place, far beyond the cap
  sensor_1: 210,
  sensor_2: 95,
  sensor_3: null,
  sensor_4: 180,
};

const TIMELINE_PAYLOAD = {
  metric: "pedestrians",
  points: [
    { t: "2022-12-31T21:40:00Z", value: 21000 },
    { t: "2022-12-31T21:50:00Z", value: 23500 },
    { t: SPIKE_T, value: 75000 },
    { t: "2022-12-31T22:10:00Z", value: 24800 },
  ],
  hues: [
    { t: "2022-12-31T21:40:00Z", hue: 120, sum: 21000 },
    { t: "2022-12-31T21:50:00Z", hue: 114.4, sum: 23500 },
    { t: SPIKE_T, hue: 0, sum: 75000 },
    { t: "2022-12-31T22:10:00Z", hue: 111.6, sum: 24800 },
  ],
};

describe("linked-view consistency", () => {
  it("renders the spike place at full column height at the spike instant", () => {
    const columns = frameToColumns(FRAME_AT_SPIKE, PLACES, CAP, 48);
    const spike = columns.find((c) => c.placeId === "sensor_0");
    expect(spike?.height).toBe(48); // saturated at the cap
    const normal = columns.find((c) => c.placeId === "sensor_1");
    expect(normal!.height).toBeCloseTo((210 / CAP) * 48, 12);
    expect(columns.some((c) => c.placeId === "sensor_3")).toBe(false); // missing
  });

  it("displays only values fetched from /api endpoints", async () => {
    const requested: string[] = [];
    const fetchFn = async (url: string) => {
      requested.push(url);
      return new Response(JSON.stringify(TIMELINE_PAYLOAD), { status: 200 });
    };
    const client = new ApiClient("http://svc", "k.s", fetchFn);
    const timeline = await client.timeline("pedestrians", "2022-12-31T21:40:00Z", "2022-12-31T22:10:00Z");

    // every URL the client touched is a service API endpoint
    expect(requested.every((u) => new URL(u).pathname.startsWith("/api/"))).toBe(true);

    // chart datasets are the fetched points, value for value
    const [dataset] = chartDatasets([{ metric: timeline.metric, points: timeline.points }]);
    expect(dataset.data.map((p) => p.y)).toEqual(TIMELINE_PAYLOAD.points.map((p) => p.value));

    // the slider gradient uses the fetched hues; the spike instant is pure red
    const css = gradientCss(
      timeline.hues,
      Date.parse("2022-12-31T21:40:00Z"),
      Date.parse("2022-12-31T22:10:00Z"),
    );
    expect(css).toContain("hsl(0, 100%, 50%)");
    // no derived sums appear anywhere: the only numbers are hues/positions
    // and the fetched values already asserted above
  });
});
