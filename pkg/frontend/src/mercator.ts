/** Web Mercator math for the tile ground plane and column placement. */

const MAX_LAT = 85.05112878;

export interface WorldPoint {
  /** east, in [0, 1] across the world */
  x: number;
  /** south, in [0, 1] (0 at the north edge, like tile rows) */
  y: number;
}

export function lonLatToWorld(lon: number, lat: number): WorldPoint {
  const clampedLat = Math.max(-MAX_LAT, Math.min(MAX_LAT, lat));
  const x = (lon + 180) / 360;
  const phi = (clampedLat * Math.PI) / 180;
  const y = (1 - Math.log(Math.tan(Math.PI / 4 + phi / 2)) / Math.PI) / 2;
  return { x, y };
}

export function worldToLonLat(x: number, y: number): { lon: number; lat: number } {
  const lon = x * 360 - 180;
  const n = Math.PI * (1 - 2 * y);
  const lat = (Math.atan(Math.sinh(n)) * 180) / Math.PI;
  return { lon, lat };
}

export function tileAt(x: number, y: number, zoom: number): { tx: number; ty: number } {
  const n = 2 ** zoom;
  const clamp = (v: number) => Math.max(0, Math.min(n - 1, Math.floor(v * n)));
  return { tx: clamp(x), ty: clamp(y) };
}

export function tileUrl(template: string, zoom: number, tx: number, ty: number): string {
  return template
    .replace("{z}", String(zoom))
    .replace("{x}", String(tx))
    .replace("{y}", String(ty));
}

/** Zoom level whose tiles roughly match the extent of the given bbox. */
export function zoomForSpan(span: number, tilesAcross = 4): number {
  if (span <= 0) return 18;
  const zoom = Math.floor(Math.log2(tilesAcross / span));
  return Math.max(1, Math.min(18, zoom));
}
