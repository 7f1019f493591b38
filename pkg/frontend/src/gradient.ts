/** Timeline background: the per-instant hue stops from /api/timeline become a
 * CSS gradient. Hue 120 marks the lowest sum on the timeline, hue 0 the
 * highest; the mapping itself comes from the server, never recomputed here. */

export interface HueStop {
  t: string;
  hue: number;
  sum: number;
}

export const NEUTRAL = "#8a9099";

export function hueToCss(hue: number): string {
  return `hsl(${round2(hue)}, 100%, 50%)`;
}

function round2(v: number): number {
  return Math.round(v * 100) / 100;
}

export function gradientCss(stops: HueStop[], fromMs: number, toMs: number): string {
  if (stops.length === 0 || toMs <= fromMs) {
    return `linear-gradient(to right, ${NEUTRAL} 0%, ${NEUTRAL} 100%)`;
  }
  const span = toMs - fromMs;
  const pieces = stops.map((stop) => {
    const at = ((Date.parse(stop.t) - fromMs) / span) * 100;
    const clamped = Math.max(0, Math.min(100, at));
    return `${hueToCss(stop.hue)} ${round2(clamped)}%`;
  });
  if (stops.length === 1) {
    pieces.push(pieces[0].replace(/ [-\d.]+%$/, " 100%"));
  }
  return `linear-gradient(to right, ${pieces.join(", ")})`;
}
