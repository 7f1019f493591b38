/** Pure layout for the map columns: one frame -> cylinder specs.
 *
 * Height is the value normalized to the metric's cap (clamped to [0, 1])
 * times the maximum column height. Color is the hue 120->0 of the
 * color-mapped metric's normalized value, or neutral when no color metric is
 * selected (hue null). A missing value produces no column at all, never a
 * zero-height one. */
function clamp01(v) {
    if (v < 0)
        return 0;
    if (v > 1)
        return 1;
    return v;
}
export function normalizeToCap(value, cap) {
    if (cap <= 0)
        throw new Error("cap must be positive");
    return clamp01(value / cap);
}
export function valueToHue(value, cap) {
    return 120 * (1 - normalizeToCap(value, cap));
}
export function frameToColumns(values, places, heightCap, maxHeight, colorValues = null, colorCap = null) {
    const columns = [];
    for (const place of places) {
        const value = values[place.id];
        if (value === null || value === undefined)
            continue;
        let hue = null;
        let colorValue = null;
        if (colorValues !== null && colorCap !== null) {
            const cv = colorValues[place.id];
            if (cv !== null && cv !== undefined) {
                colorValue = cv;
                hue = valueToHue(cv, colorCap);
            }
        }
        columns.push({
            placeId: place.id,
            lon: place.lon,
            lat: place.lat,
            value,
            height: normalizeToCap(value, heightCap) * maxHeight,
            hue,
            colorValue,
        });
    }
    return columns;
}
/** Representative point of a GeoJSON feature: the point itself, or the
 * polygon ring's vertex centroid (columns stand at cell centers). */
export function representativePoint(geometry) {
    if (geometry.type === "Point") {
        const [lon, lat] = geometry.coordinates;
        return { lon, lat };
    }
    if (geometry.type === "Polygon") {
        const ring = geometry.coordinates[0];
        const open = ring.length > 1 ? ring.slice(0, -1) : ring;
        let lon = 0;
        let lat = 0;
        for (const [x, y] of open) {
            lon += x;
            lat += y;
        }
        return { lon: lon / open.length, lat: lat / open.length };
    }
    throw new Error(`unsupported geometry ${geometry.type}`);
}
