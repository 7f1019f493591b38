/** Shared view state linking the timeline, map, and chart.
 *
 * Invariants: the current instant stays inside the loaded range, and the
 * color metric never equals the height metric while both are set. Every
 * mutation notifies subscribers with the set of changed fields so each view
 * refreshes exactly when one of its inputs moved. */
export class ViewStateStore {
    constructor() {
        this.state = {
            instantMs: null,
            rangeFromMs: null,
            rangeToMs: null,
            heightMetric: null,
            colorMetric: null,
            region: null,
            playing: false,
            playbackSpeed: 60,
            live: false,
        };
        this.listeners = [];
    }
    get() {
        return { ...this.state, region: this.state.region ? [...this.state.region] : null };
    }
    subscribe(listener) {
        this.listeners.push(listener);
        return () => {
            this.listeners = this.listeners.filter((l) => l !== listener);
        };
    }
    emit(changed) {
        if (changed.size === 0)
            return;
        const snapshot = this.get();
        for (const listener of [...this.listeners]) {
            listener(snapshot, changed);
        }
    }
    clampInstant(t) {
        const { rangeFromMs, rangeToMs } = this.state;
        let out = t;
        if (rangeFromMs !== null && out < rangeFromMs)
            out = rangeFromMs;
        if (rangeToMs !== null && out > rangeToMs)
            out = rangeToMs;
        return out;
    }
    setRange(fromMs, toMs) {
        if (toMs < fromMs)
            throw new Error("range end before start");
        const changed = new Set();
        if (this.state.rangeFromMs !== fromMs) {
            this.state.rangeFromMs = fromMs;
            changed.add("rangeFromMs");
        }
        if (this.state.rangeToMs !== toMs) {
            this.state.rangeToMs = toMs;
            changed.add("rangeToMs");
        }
        const clamped = this.clampInstant(this.state.instantMs ?? fromMs);
        if (clamped !== this.state.instantMs) {
            this.state.instantMs = clamped;
            changed.add("instantMs");
        }
        this.emit(changed);
    }
    setInstant(tMs) {
        const clamped = this.clampInstant(tMs);
        if (clamped === this.state.instantMs)
            return;
        this.state.instantMs = clamped;
        this.emit(new Set(["instantMs"]));
    }
    setHeightMetric(metric) {
        const changed = new Set();
        if (this.state.colorMetric === metric) {
            this.state.colorMetric = null;
            changed.add("colorMetric");
        }
        if (this.state.heightMetric !== metric) {
            this.state.heightMetric = metric;
            changed.add("heightMetric");
        }
        this.emit(changed);
    }
    /** Returns false (and changes nothing) when it would equal the height metric. */
    setColorMetric(metric) {
        if (metric !== null && metric === this.state.heightMetric)
            return false;
        if (this.state.colorMetric === metric)
            return true;
        this.state.colorMetric = metric;
        this.emit(new Set(["colorMetric"]));
        return true;
    }
    setRegion(region) {
        this.state.region = region ? [...region] : null;
        this.emit(new Set(["region"]));
    }
    setPlaying(playing, speed) {
        const changed = new Set();
        if (speed !== undefined && speed !== this.state.playbackSpeed) {
            this.state.playbackSpeed = speed;
            changed.add("playbackSpeed");
        }
        if (this.state.playing !== playing) {
            this.state.playing = playing;
            changed.add("playing");
        }
        this.emit(changed);
    }
    setLive(live) {
        if (this.state.live === live)
            return;
        this.state.live = live;
        this.emit(new Set(["live"]));
    }
}
