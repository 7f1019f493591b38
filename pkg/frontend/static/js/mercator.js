/** Web Mercator math for the tile ground plane and column placement. */
const MAX_LAT = 85.05112878;
export function lonLatToWorld(lon, lat) {
    const clampedLat = Math.max(-MAX_LAT, Math.min(MAX_LAT, lat));
    const x = (lon + 180) / 360;
    const phi = (clampedLat * Math.PI) / 180;
    const y = (1 - Math.log(Math.tan(Math.PI / 4 + phi / 2)) / Math.PI) / 2;
    return { x, y };
}
export function worldToLonLat(x, y) {
    const lon = x * 360 - 180;
    const n = Math.PI * (1 - 2 * y);
    const lat = (Math.atan(Math.sinh(n)) * 180) / Math.PI;
    return { lon, lat };
}
export function tileAt(x, y, zoom) {
    const n = 2 ** zoom;
    const clamp = (v) => Math.max(0, Math.min(n - 1, Math.floor(v * n)));
    return { tx: clamp(x), ty: clamp(y) };
}
export function tileUrl(template, zoom, tx, ty) {
    return template
        .replace("{z}", String(zoom))
        .replace("{x}", String(tx))
        .replace("{y}", String(ty));
}
/** Zoom level whose tiles roughly match the extent of the given bbox. */
export function zoomForSpan(span, tilesAcross = 4) {
    if (span <= 0)
        return 18;
    const zoom = Math.floor(Math.log2(tilesAcross / span));
    return Math.max(1, Math.min(18, zoom));
}
