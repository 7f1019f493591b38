/** Typed client for the service API. Every number shown anywhere in the UI
 * comes from these endpoints; the UI never aggregates samples itself. */
export class ApiError extends Error {
    constructor(status, code, message) {
        super(message);
        this.status = status;
        this.code = code;
    }
}
export function encodeRegion(ring) {
    return ring.map(([lon, lat]) => `${trim(lon)},${trim(lat)}`).join(";");
}
function trim(v) {
    return String(Math.round(v * 1e6) / 1e6);
}
export class ApiClient {
    constructor(baseUrl, apiKey, fetchFn = (input, init) => fetch(input, init)) {
        this.baseUrl = baseUrl;
        this.apiKey = apiKey;
        this.fetchFn = fetchFn;
        this.baseUrl = baseUrl.replace(/\/$/, "");
    }
    async get(path, params, signal) {
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
                const body = (await response.json());
                code = body.code ?? code;
                message = body.message ?? message;
            }
            catch {
                // non-JSON error body: keep the defaults
            }
            throw new ApiError(response.status, code, message);
        }
        return (await response.json());
    }
    places(signal) {
        return this.get("/api/places", {}, signal);
    }
    async metrics(signal) {
        const body = await this.get("/api/metrics", {}, signal);
        return body.metrics;
    }
    frames(metric, fromIso, toIso, stepS, signal) {
        return this.get("/api/frames", { metric, from: fromIso, to: toIso, step: String(stepS) }, signal);
    }
    series(metrics, fromIso, toIso, region = null, agg = "sum", signal) {
        const params = {
            metrics: metrics.join(","),
            from: fromIso,
            to: toIso,
            agg,
        };
        if (region)
            params.region = encodeRegion(region);
        return this.get("/api/series", params, signal);
    }
    timeline(metric, fromIso, toIso, region = null, signal) {
        const params = { metric, from: fromIso, to: toIso };
        if (region)
            params.region = encodeRegion(region);
        return this.get("/api/timeline", params, signal);
    }
    peak(metric, fromIso, toIso, region = null, signal) {
        const params = { metric, from: fromIso, to: toIso };
        if (region)
            params.region = encodeRegion(region);
        return this.get("/api/peak", params, signal);
    }
    streamUrl(metric) {
        return `${this.baseUrl}/api/stream?metric=${encodeURIComponent(metric)}`;
    }
    get key() {
        return this.apiKey;
    }
}
