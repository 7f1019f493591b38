/** Application bootstrap: three linked views (timeline slider, 3D column map,
 * evolution chart) over the service API. Changing the instant, region, or
 * metric in any view refreshes the others within one fetch cycle; every
 * displayed aggregate comes from /api responses. */

import { ApiClient, ApiError } from "./api";
import type { MetricInfo } from "./api";
import { frameToColumns, representativePoint } from "./columns";
import type { PlaceInfo } from "./columns";
import { EvolutionChart } from "./chart";
import { Map3D } from "./map3d";
import { readEventStream } from "./sse";
import { ViewStateStore } from "./state";
import { TimelineSlider } from "./timeline";

const KEY_STORAGE = "crowdlens-api-key";

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function toIso(ms: number): string {
  return new Date(ms).toISOString().replace(".000Z", "Z");
}

class Banner {
  private node = el<HTMLDivElement>("banner");
  private timer: number | null = null;

  show(message: string): void {
    this.node.textContent = message;
    this.node.hidden = false;
    if (this.timer !== null) window.clearTimeout(this.timer);
    this.timer = window.setTimeout(() => (this.node.hidden = true), 6000);
  }
}

async function promptForKey(): Promise<string> {
  const stored = sessionStorage.getItem(KEY_STORAGE);
  if (stored) return stored;
  return new Promise((resolve) => {
    const dialog = el<HTMLDivElement>("key-dialog");
    const input = el<HTMLInputElement>("key-input");
    const button = el<HTMLButtonElement>("key-submit");
    dialog.hidden = false;
    const submit = () => {
      const value = input.value.trim();
      if (!value) return;
      sessionStorage.setItem(KEY_STORAGE, value);
      dialog.hidden = true;
      resolve(value);
    };
    button.addEventListener("click", submit);
    input.addEventListener("keydown", (e) => {
      if (e.key === "Enter") submit();
    });
  });
}

class App {
  private state = new ViewStateStore();
  private banner = new Banner();
  private metrics: MetricInfo[] = [];
  private places: PlaceInfo[] = [];
  private map!: Map3D;
  private timeline!: TimelineSlider;
  private chart!: EvolutionChart;
  private frameCtl: AbortController | null = null;
  private seriesCtl: AbortController | null = null;
  private timelineCtl: AbortController | null = null;
  private liveCtl: AbortController | null = null;
  private playTimer: number | null = null;

  constructor(private api: ApiClient) {}

  async start(): Promise<void> {
    const [placesDoc, metrics] = await Promise.all([this.api.places(), this.api.metrics()]);
    this.metrics = metrics;
    this.places = placesDoc.features.map((f: any) => {
      const { lon, lat } = representativePoint(f.geometry);
      return {
        id: String(f.properties.id),
        name: String(f.properties.name),
        lon,
        lat,
        capacity: f.properties.capacity ?? null,
      };
    });

    this.buildControls();
    this.map = new Map3D(el("map"), this.places, {
      onHover: (info) => this.showHover(info),
      onRegionDrawn: (ring) => this.state.setRegion(ring),
    });
    this.timeline = new TimelineSlider(el("timeline-host"), {
      onScrub: (instant) => {
        this.state.setPlaying(false);
        this.state.setInstant(instant);
      },
    });
    this.chart = new EvolutionChart(el<HTMLCanvasElement>("chart-canvas"));

    this.state.subscribe((state, changed) => this.onStateChange(changed));

    const first = this.metrics[0]?.id;
    if (first) this.state.setHeightMetric(first);
    await this.autoFocusRange();
  }

  /** Center the initial window on wherever the data actually is. */
  private async autoFocusRange(): Promise<void> {
    const metric = this.state.get().heightMetric;
    if (!metric) return;
    try {
      const peak = await this.api.peak(metric, "2000-01-01T00:00:00Z", "2100-01-01T00:00:00Z");
      const peakMs = Date.parse(peak.t);
      this.state.setRange(peakMs - 24 * 3600 * 1000, peakMs + 24 * 3600 * 1000);
      this.state.setInstant(peakMs);
    } catch (err) {
      const now = Date.now();
      this.state.setRange(now - 24 * 3600 * 1000, now);
      if (err instanceof ApiError && err.code !== "empty_series") this.report(err);
    }
  }

  private buildControls(): void {
    const height = el<HTMLSelectElement>("height-metric");
    const color = el<HTMLSelectElement>("color-metric");
    height.innerHTML = "";
    color.innerHTML = '<option value="">(none)</option>';
    for (const m of this.metrics) {
      height.add(new Option(`${m.label} [${m.unit}]`, m.id));
      color.add(new Option(`${m.label} [${m.unit}]`, m.id));
    }
    height.addEventListener("change", () => this.state.setHeightMetric(height.value));
    color.addEventListener("change", () => {
      if (!this.state.setColorMetric(color.value || null)) {
        this.banner.show("color metric must differ from the height metric");
        color.value = this.state.get().colorMetric ?? "";
      }
    });
    el<HTMLButtonElement>("play-toggle").addEventListener("click", () => {
      this.state.setPlaying(!this.state.get().playing);
    });
    el<HTMLButtonElement>("live-toggle").addEventListener("click", () => {
      this.state.setLive(!this.state.get().live);
    });
    el<HTMLButtonElement>("draw-region").addEventListener("click", () => {
      this.map.startRegionDraw();
      this.banner.show("click to add vertices, double-click to close the polygon");
    });
    el<HTMLButtonElement>("clear-region").addEventListener("click", () => {
      this.map.clearRegion();
      this.state.setRegion(null);
    });
    const applyRange = el<HTMLButtonElement>("apply-range");
    applyRange.addEventListener("click", () => {
      const fromMs = Date.parse(el<HTMLInputElement>("range-from").value);
      const toMs = Date.parse(el<HTMLInputElement>("range-to").value);
      if (Number.isNaN(fromMs) || Number.isNaN(toMs) || toMs < fromMs) {
        this.banner.show("enter a valid ISO range");
        return;
      }
      this.state.setRange(fromMs, toMs);
    });
  }

  private onStateChange(changed: Set<string>): void {
    const rangeMoved =
      changed.has("rangeFromMs") || changed.has("rangeToMs") || changed.has("region");
    const metricsMoved = changed.has("heightMetric") || changed.has("colorMetric");
    if (rangeMoved || metricsMoved) {
      this.refreshTimeline();
      this.refreshChart();
      this.refreshFrame();
      this.syncRangeInputs();
    } else if (changed.has("instantMs")) {
      this.refreshFrame();
      const instant = this.state.get().instantMs;
      if (instant !== null) this.timeline.setInstant(instant);
    }
    if (changed.has("playing")) this.applyPlayback();
    if (changed.has("live")) this.applyLiveMode();
  }

  private syncRangeInputs(): void {
    const { rangeFromMs, rangeToMs, instantMs } = this.state.get();
    if (rangeFromMs === null || rangeToMs === null) return;
    el<HTMLInputElement>("range-from").value = toIso(rangeFromMs);
    el<HTMLInputElement>("range-to").value = toIso(rangeToMs);
    this.timeline.setWindow(rangeFromMs, rangeToMs);
    if (instantMs !== null) this.timeline.setInstant(instantMs);
  }

  private report(err: unknown): void {
    const message = err instanceof Error ? err.message : String(err);
    if (err instanceof DOMException && err.name === "AbortError") return;
    this.banner.show(message);
  }

  private window(): { fromIso: string; toIso: string } | null {
    const { rangeFromMs, rangeToMs } = this.state.get();
    if (rangeFromMs === null || rangeToMs === null) return null;
    return { fromIso: toIso(rangeFromMs), toIso: toIso(rangeToMs) };
  }

  private refreshTimeline(): void {
    const win = this.window();
    const { heightMetric, region } = this.state.get();
    if (!win || !heightMetric) return;
    this.timelineCtl?.abort();
    this.timelineCtl = new AbortController();
    this.api
      .timeline(heightMetric, win.fromIso, win.toIso, region, this.timelineCtl.signal)
      .then((payload) => {
        this.timeline.setGradient(payload.hues);
      })
      .catch((err) => this.report(err));
  }

  private refreshChart(): void {
    const win = this.window();
    const { heightMetric, colorMetric, region } = this.state.get();
    if (!win || !heightMetric) return;
    const metrics = colorMetric ? [heightMetric, colorMetric] : [heightMetric];
    this.seriesCtl?.abort();
    this.seriesCtl = new AbortController();
    this.api
      .series(metrics, win.fromIso, win.toIso, region, "sum", this.seriesCtl.signal)
      .then((payload) => {
        const { rangeFromMs, rangeToMs } = this.state.get();
        this.chart.setSeries(payload.series, rangeFromMs!, rangeToMs!);
      })
      .catch((err) => this.report(err));
  }

  private refreshFrame(): void {
    const { heightMetric, colorMetric, instantMs } = this.state.get();
    if (!heightMetric || instantMs === null) return;
    const instantIso = toIso(instantMs);
    this.frameCtl?.abort();
    this.frameCtl = new AbortController();
    const signal = this.frameCtl.signal;
    const heightReq = this.api.frames(heightMetric, instantIso, instantIso, 1, signal);
    const colorReq = colorMetric
      ? this.api.frames(colorMetric, instantIso, instantIso, 1, signal)
      : Promise.resolve(null);
    Promise.all([heightReq, colorReq])
      .then(([heightFrames, colorFrames]) => {
        const heightCap = this.metrics.find((m) => m.id === heightMetric)?.cap ?? 1;
        const colorCap = colorMetric
          ? this.metrics.find((m) => m.id === colorMetric)?.cap ?? null
          : null;
        const columns = frameToColumns(
          heightFrames.frames[0]?.values ?? {},
          this.places,
          heightCap,
          this.map.maxColumnHeight,
          colorFrames ? colorFrames.frames[0]?.values ?? {} : null,
          colorCap,
        );
        this.map.setColumns(columns);
      })
      .catch((err) => this.report(err));
  }

  private applyPlayback(): void {
    const playing = this.state.get().playing;
    el<HTMLButtonElement>("play-toggle").textContent = playing ? "pause" : "play";
    if (this.playTimer !== null) {
      window.clearInterval(this.playTimer);
      this.playTimer = null;
    }
    if (!playing) return;
    this.playTimer = window.setInterval(() => {
      const { instantMs, rangeToMs, playbackSpeed } = this.state.get();
      if (instantMs === null || rangeToMs === null) return;
      const next = instantMs + playbackSpeed * 1000;
      if (next >= rangeToMs) {
        this.state.setInstant(rangeToMs);
        this.state.setPlaying(false);
      } else {
        this.state.setInstant(next);
      }
    }, 1000);
  }

  private applyLiveMode(): void {
    const live = this.state.get().live;
    el<HTMLButtonElement>("live-toggle").textContent = live ? "live: on" : "live: off";
    this.liveCtl?.abort();
    this.liveCtl = null;
    if (!live) return;
    const metric = this.state.get().heightMetric;
    if (!metric) return;
    this.liveCtl = new AbortController();
    readEventStream(
      this.api.streamUrl(metric),
      this.api.key,
      (event) => {
        if (event.event !== "frame") return;
        const frame = JSON.parse(event.data) as { t: string };
        const tMs = Date.parse(frame.t);
        const { rangeFromMs, rangeToMs } = this.state.get();
        if (rangeFromMs !== null && rangeToMs !== null && tMs > rangeToMs) {
          this.state.setRange(rangeFromMs, tMs); // window follows the stream
        }
        this.state.setInstant(tMs);
        this.appendLiveChartPoint(tMs);
      },
      this.liveCtl.signal,
    ).catch((err) => {
      this.report(err);
      this.state.setLive(false);
    });
  }

  /** Chart values always come from the API: fetch the tail, never sum here. */
  private appendLiveChartPoint(tMs: number): void {
    const { heightMetric, colorMetric, region } = this.state.get();
    if (!heightMetric) return;
    const metrics = colorMetric ? [heightMetric, colorMetric] : [heightMetric];
    const fromIso = toIso(Math.max(0, tMs - 30 * 60 * 1000));
    this.api
      .series(metrics, fromIso, toIso(tMs), region, "sum")
      .then((payload) => this.chart.appendLivePoints(payload.series))
      .catch((err) => this.report(err));
  }

  private showHover(info: { name: string; value: number; colorValue: number | null; x: number; y: number } | null): void {
    const tooltip = el<HTMLDivElement>("map-tooltip");
    if (!info) {
      tooltip.hidden = true;
      return;
    }
    const color = info.colorValue !== null ? ` · color ${info.colorValue}` : "";
    tooltip.textContent = `${info.name}: ${info.value}${color}`;
    tooltip.style.left = `${info.x + 12}px`;
    tooltip.style.top = `${info.y + 12}px`;
    tooltip.hidden = false;
  }
}

async function boot(): Promise<void> {
  const key = await promptForKey();
  const api = new ApiClient(window.location.origin, key);
  const app = new App(api);
  try {
    await app.start();
  } catch (err) {
    if (err instanceof ApiError && err.status === 401) {
      sessionStorage.removeItem(KEY_STORAGE);
      document.getElementById("banner")!.textContent = "invalid API key, reload to retry";
      document.getElementById("banner")!.hidden = false;
      return;
    }
    throw err;
  }
}

boot();
