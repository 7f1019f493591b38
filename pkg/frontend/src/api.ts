/** Typed client for the service API. Every number shown anywhere in the UI
 * comes from these endpoints; the UI never aggregates samples itself. */

export interface MetricInfo {
  id: string;
  label: string;
  unit: string;
  cap: number;
  kind: "base" | "derived";
  expression?: string;
}

export interface SeriesPoint {
  t: string;
  value: number | null;
}

export interface SeriesResponse {
  series: { metric: string; points: SeriesPoint[] }[];
}

export interface TimelineResponse {
  metric: string;
  points: SeriesPoint[];
  hues: { t: string; hue: number; sum: number }[];
}

export interface FramesResponse {
  metric: string;
  staleness_s: number;
  frames: { t: string; values: Record<string, number | null> }[];
}

export interface PeakResponse {
  metric: string;
  t: string;
  value: number;
}

export class ApiError extends Error {
  constructor(
    public status: number,
    public code: string,
    message: string,
  ) {
    super(message);
  }
}

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export function encodeRegion(ring: [number, number][]): string {
  return ring.map(([lon, lat]) => `${trim(lon)},${trim(lat)}`).join(";");
}

function trim(v: number): string {
  return String(Math.round(v * 1e6) / 1e6);
}

export class ApiClient {
  constructor(
    private baseUrl: string,
    private apiKey: string,
    private fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {
    this.baseUrl = baseUrl.replace(/\/$/, "");
  }

  private async get<T>(path: string, params: Record<string, string>, signal?: AbortSignal): Promise<T> {
    const query = new URLSearchParams(params).toString();
    const url = `${this.baseUrl}${path}${query ? "?" + query : ""}`;
    const response = await this.fetchFn(url, {
      headers: { "X-Api-Key": this.apiKey },
      signal,
    });
    if (!response.ok) {
      let code = "error";
      let message = `HTTP ${response.status}`;
      try {
        const body = (await response.json()) as { code?: string; message?: string };
        code = body.code ?? code;
        message = body.message ?? message;
      } catch {
        // non-JSON error body: keep the defaults
      }
      throw new ApiError(response.status, code, message);
    }
    return (await response.json()) as T;
  }

  places(signal?: AbortSignal) {
    return this.get<{ type: string; features: any[] }>("/api/places", {}, signal);
  }

  async metrics(signal?: AbortSignal): Promise<MetricInfo[]> {
    const body = await this.get<{ metrics: MetricInfo[] }>("/api/metrics", {}, signal);
    return body.metrics;
  }

  frames(metric: string, fromIso: string, toIso: string, stepS: number, signal?: AbortSignal) {
    return this.get<FramesResponse>(
      "/api/frames",
      { metric, from: fromIso, to: toIso, step: String(stepS) },
      signal,
    );
  }

  series(
    metrics: string[],
    fromIso: string,
    toIso: string,
    region: [number, number][] | null = null,
    agg: "sum" | "mean" = "sum",
    signal?: AbortSignal,
  ) {
    const params: Record<string, string> = {
      metrics: metrics.join(","),
      from: fromIso,
      to: toIso,
      agg,
    };
    if (region) params.region = encodeRegion(region);
    return this.get<SeriesResponse>("/api/series", params, signal);
  }

  timeline(
    metric: string,
    fromIso: string,
    toIso: string,
    region: [number, number][] | null = null,
    signal?: AbortSignal,
  ) {
    const params: Record<string, string> = { metric, from: fromIso, to: toIso };
    if (region) params.region = encodeRegion(region);
    return this.get<TimelineResponse>("/api/timeline", params, signal);
  }

  peak(
    metric: string,
    fromIso: string,
    toIso: string,
    region: [number, number][] | null = null,
    signal?: AbortSignal,
  ) {
    const params: Record<string, string> = { metric, from: fromIso, to: toIso };
    if (region) params.region = encodeRegion(region);
    return this.get<PeakResponse>("/api/peak", params, signal);
  }

  streamUrl(metric: string): string {
    return `${this.baseUrl}/api/stream?metric=${encodeURIComponent(metric)}`;
  }

  get key(): string {
    return this.apiKey;
  }
}
