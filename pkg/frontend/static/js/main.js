/** Application bootstrap: three linked views (timeline slider, 3D column map,
 * evolution chart) over the service API. Changing the instant, region, or
 * metric in any view refreshes the others within one fetch cycle; every
 * displayed aggregate comes from /api responses. */
import { ApiClient, ApiError } from "./api";
import { frameToColumns, representativePoint } from "./columns";
import { EvolutionChart } from "./chart";
import { Map3D } from "./map3d";
import { readEventStream } from "./sse";
import { ViewStateStore } from "./state";
import { TimelineSlider } from "./timeline";
const KEY_STORAGE = "crowdlens-api-key";
function el(id) {
    const node = document.getElementById(id);
    if (!node)
        throw new Error(`missing element #${id}`);
    return node;
}
function toIso(ms) {
    return new Date(ms).toISOString().replace(".000Z", "Z");
}
class Banner {
    constructor() {
        this.node = el("banner");
        this.timer = null;
    }
    show(message) {
        this.node.textContent = message;
        this.node.hidden = false;
        if (this.timer !== null)
            window.clearTimeout(this.timer);
        this.timer = window.setTimeout(() => (this.node.hidden = true), 6000);
    }
}
async function promptForKey() {
    const stored = sessionStorage.getItem(KEY_STORAGE);
    if (stored)
        return stored;
    return new Promise((resolve) => {
        const dialog = el("key-dialog");
        const input = el("key-input");
        const button = el("key-submit");
        dialog.hidden = false;
        const submit = () => {
            const value = input.value.trim();
            if (!value)
                return;
            sessionStorage.setItem(KEY_STORAGE, value);
            dialog.hidden = true;
            resolve(value);
        };
        button.addEventListener("click", submit);
        input.addEventListener("keydown", (e) => {
            if (e.key === "Enter")
                submit();
        });
    });
}
class App {
    constructor(api) {
        this.api = api;
        this.state = new ViewStateStore();
        this.banner = new Banner();
        this.metrics = [];
        this.places = [];
        this.frameCtl = null;
        this.seriesCtl = null;
        this.timelineCtl = null;
        this.liveCtl = null;
        this.playTimer = null;
    }
    async start() {
        const [placesDoc, metrics] = await Promise.all([this.api.places(), this.api.metrics()]);
        this.metrics = metrics;
        this.places = placesDoc.features.map((f) => {
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
        this.chart = new EvolutionChart(el("chart-canvas"));
        this.state.subscribe((state, changed) => this.onStateChange(changed));
        const first = this.metrics[0]?.id;
        if (first)
            this.state.setHeightMetric(first);
        await this.autoFocusRange();
    }
    /** Center the initial window on wherever the data actually is. */
    async autoFocusRange() {
        const metric = this.state.get().heightMetric;
        if (!metric)
            return;
        try {
            const peak = await this.api.peak(metric, "2000-01-01T00:00:00Z", "2100-01-01T00:00:00Z");
            const peakMs = Date.parse(peak.t);
            this.state.setRange(peakMs - 24 * 3600 * 1000, peakMs + 24 * 3600 * 1000);
            this.state.setInstant(peakMs);
        }
        catch (err) {
            const now = Date.now();
            this.state.setRange(now - 24 * 3600 * 1000, now);
            if (err instanceof ApiError && err.code !== "empty_series")
                this.report(err);
        }
    }
    buildControls() {
        const height = el("height-metric");
        const color = el("color-metric");
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
        el("play-toggle").addEventListener("click", () => {
            this.state.setPlaying(!this.state.get().playing);
        });
        el("live-toggle").addEventListener("click", () => {
            this.state.setLive(!this.state.get().live);
        });
        el("draw-region").addEventListener("click", () => {
            this.map.startRegionDraw();
            this.banner.show("click to add vertices, double-click to close the polygon");
        });
        el("clear-region").addEventListener("click", () => {
            this.map.clearRegion();
            this.state.setRegion(null);
        });
        const applyRange = el("apply-range");
        applyRange.addEventListener("click", () => {
            const fromMs = Date.parse(el("range-from").value);
            const toMs = Date.parse(el("range-to").value);
            if (Number.isNaN(fromMs) || Number.isNaN(toMs) || toMs < fromMs) {
                this.banner.show("enter a valid ISO range");
                return;
            }
            this.state.setRange(fromMs, toMs);
        });
    }
    onStateChange(changed) {
        const rangeMoved = changed.has("rangeFromMs") || changed.has("rangeToMs") || changed.has("region");
        const metricsMoved = changed.has("heightMetric") || changed.has("colorMetric");
        if (rangeMoved || metricsMoved) {
            this.refreshTimeline();
            this.refreshChart();
            this.refreshFrame();
            this.syncRangeInputs();
        }
        else if (changed.has("instantMs")) {
            this.refreshFrame();
            const instant = this.state.get().instantMs;
            if (instant !== null)
                this.timeline.setInstant(instant);
        }
        if (changed.has("playing"))
            this.applyPlayback();
        if (changed.has("live"))
            this.applyLiveMode();
    }
    syncRangeInputs() {
        const { rangeFromMs, rangeToMs, instantMs } = this.state.get();
        if (rangeFromMs === null || rangeToMs === null)
            return;
        el("range-from").value = toIso(rangeFromMs);
        el("range-to").value = toIso(rangeToMs);
        this.timeline.setWindow(rangeFromMs, rangeToMs);
        if (instantMs !== null)
            this.timeline.setInstant(instantMs);
    }
    report(err) {
        const message = err instanceof Error ? err.message : String(err);
        if (err instanceof DOMException && err.name === "AbortError")
            return;
        this.banner.show(message);
    }
    window() {
        const { rangeFromMs, rangeToMs } = this.state.get();
        if (rangeFromMs === null || rangeToMs === null)
            return null;
        return { fromIso: toIso(rangeFromMs), toIso: toIso(rangeToMs) };
    }
    refreshTimeline() {
        const win = this.window();
        const { heightMetric, region } = this.state.get();
        if (!win || !heightMetric)
            return;
        this.timelineCtl?.abort();
        this.timelineCtl = new AbortController();
        this.api
            .timeline(heightMetric, win.fromIso, win.toIso, region, this.timelineCtl.signal)
            .then((payload) => {
            this.timeline.setGradient(payload.hues);
        })
            .catch((err) => this.report(err));
    }
    refreshChart() {
        const win = this.window();
        const { heightMetric, colorMetric, region } = this.state.get();
        if (!win || !heightMetric)
            return;
        const metrics = colorMetric ? [heightMetric, colorMetric] : [heightMetric];
        this.seriesCtl?.abort();
        this.seriesCtl = new AbortController();
        this.api
            .series(metrics, win.fromIso, win.toIso, region, "sum", this.seriesCtl.signal)
            .then((payload) => {
            const { rangeFromMs, rangeToMs } = this.state.get();
            this.chart.setSeries(payload.series, rangeFromMs, rangeToMs);
        })
            .catch((err) => this.report(err));
    }
    refreshFrame() {
        const { heightMetric, colorMetric, instantMs } = this.state.get();
        if (!heightMetric || instantMs === null)
            return;
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
            const columns = frameToColumns(heightFrames.frames[0]?.values ?? {}, this.places, heightCap, this.map.maxColumnHeight, colorFrames ? colorFrames.frames[0]?.values ?? {} : null, colorCap);
            this.map.setColumns(columns);
        })
            .catch((err) => this.report(err));
    }
    applyPlayback() {
        const playing = this.state.get().playing;
        el("play-toggle").textContent = playing ? "pause" : "play";
        if (this.playTimer !== null) {
            window.clearInterval(this.playTimer);
            this.playTimer = null;
        }
        if (!playing)
            return;
        this.playTimer = window.setInterval(() => {
            const { instantMs, rangeToMs, playbackSpeed } = this.state.get();
            if (instantMs === null || rangeToMs === null)
                return;
            const next = instantMs + playbackSpeed * 1000;
            if (next >= rangeToMs) {
                this.state.setInstant(rangeToMs);
                this.state.setPlaying(false);
            }
            else {
                this.state.setInstant(next);
            }
        }, 1000);
    }
    applyLiveMode() {
        const live = this.state.get().live;
        el("live-toggle").textContent = live ? "live: on" : "live: off";
        this.liveCtl?.abort();
        this.liveCtl = null;
        if (!live)
            return;
        const metric = this.state.get().heightMetric;
        if (!metric)
            return;
        this.liveCtl = new AbortController();
        readEventStream(this.api.streamUrl(metric), this.api.key, (event) => {
            if (event.event !== "frame")
                return;
            const frame = JSON.parse(event.data);
            const tMs = Date.parse(frame.t);
            const { rangeFromMs, rangeToMs } = this.state.get();
            if (rangeFromMs !== null && rangeToMs !== null && tMs > rangeToMs) {
                this.state.setRange(rangeFromMs, tMs); // window follows the stream
            }
            this.state.setInstant(tMs);
            this.appendLiveChartPoint(tMs);
        }, this.liveCtl.signal).catch((err) => {
            this.report(err);
            this.state.setLive(false);
        });
    }
    /** Chart values always come from the API: fetch the tail, never sum here. */
    appendLiveChartPoint(tMs) {
        const { heightMetric, colorMetric, region } = this.state.get();
        if (!heightMetric)
            return;
        const metrics = colorMetric ? [heightMetric, colorMetric] : [heightMetric];
        const fromIso = toIso(Math.max(0, tMs - 30 * 60 * 1000));
        this.api
            .series(metrics, fromIso, toIso(tMs), region, "sum")
            .then((payload) => this.chart.appendLivePoints(payload.series))
            .catch((err) => this.report(err));
    }
    showHover(info) {
        const tooltip = el("map-tooltip");
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
async function boot() {
    const key = await promptForKey();
    const api = new ApiClient(window.location.origin, key);
    const app = new App(api);
    try {
        await app.start();
    }
    catch (err) {
        if (err instanceof ApiError && err.status === 401) {
            sessionStorage.removeItem(KEY_STORAGE);
            document.getElementById("banner").textContent = "invalid API key, reload to retry";
            document.getElementById("banner").hidden = false;
            return;
        }
        throw err;
    }
}
boot();
