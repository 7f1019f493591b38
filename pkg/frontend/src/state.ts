/** Shared view state linking the timeline, map, and chart.
 *
 * Invariants: the current instant stays inside the loaded range, and the
 * color metric never equals the height metric while both are set. Every
 * mutation notifies subscribers with the set of changed fields so each view
 * refreshes exactly when one of its inputs moved. */

export type Ring = [number, number][];

export interface ViewState {
  instantMs: number | null;
  rangeFromMs: number | null;
  rangeToMs: number | null;
  heightMetric: string | null;
  colorMetric: string | null;
  region: Ring | null;
  playing: boolean;
  playbackSpeed: number;
  live: boolean;
}

export type StateListener = (state: ViewState, changed: Set<keyof ViewState>) => void;

export class ViewStateStore {
  private state: ViewState = {
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
  private listeners: StateListener[] = [];

  get(): ViewState {
    return { ...this.state, region: this.state.region ? [...this.state.region] : null };
  }

  subscribe(listener: StateListener): () => void {
    this.listeners.push(listener);
    return () => {
      this.listeners = this.listeners.filter((l) => l !== listener);
    };
  }

  private emit(changed: Set<keyof ViewState>): void {
    if (changed.size === 0) return;
    const snapshot = this.get();
    for (const listener of [...this.listeners]) {
      listener(snapshot, changed);
    }
  }

  private clampInstant(t: number): number {
    const { rangeFromMs, rangeToMs } = this.state;
    let out = t;
    if (rangeFromMs !== null && out < rangeFromMs) out = rangeFromMs;
    if (rangeToMs !== null && out > rangeToMs) out = rangeToMs;
    return out;
  }

  setRange(fromMs: number, toMs: number): void {
    if (toMs < fromMs) throw new Error("range end before start");
    const changed = new Set<keyof ViewState>();
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

  setInstant(tMs: number): void {
    const clamped = this.clampInstant(tMs);
    if (clamped === this.state.instantMs) return;
    this.state.instantMs = clamped;
    this.emit(new Set(["instantMs"]));
  }

  setHeightMetric(metric: string): void {
    const changed = new Set<keyof ViewState>();
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
  setColorMetric(metric: string | null): boolean {
    if (metric !== null && metric === this.state.heightMetric) return false;
    if (this.state.colorMetric === metric) return true;
    this.state.colorMetric = metric;
    this.emit(new Set(["colorMetric"]));
    return true;
  }

  setRegion(region: Ring | null): void {
    this.state.region = region ? [...region] : null;
    this.emit(new Set(["region"]));
  }

  setPlaying(playing: boolean, speed?: number): void {
    const changed = new Set<keyof ViewState>();
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

  setLive(live: boolean): void {
    if (this.state.live === live) return;
    this.state.live = live;
    this.emit(new Set(["live"]));
  }
}
