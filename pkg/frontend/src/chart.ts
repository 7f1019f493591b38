/** Evolution chart glue around Chart.js (loaded as a UMD global).
 * Dual y-axes when two metrics are shown, hidden x-axis, ISO tooltips,
 * wheel zoom and drag pan on the time axis. */

import { chartDatasets, chartScales } from "./axes";
import type { SeriesPayload } from "./axes";

declare const Chart: any;

export class EvolutionChart {
  private chart: any;
  private fullFromMs = 0;
  private fullToMs = 1;

  constructor(canvas: HTMLCanvasElement) {
    this.chart = new Chart(canvas.getContext("2d"), {
      type: "line",
      data: { datasets: [] },
      options: {
        animation: false,
        parsing: false,
        normalized: true,
        responsive: true,
        maintainAspectRatio: false,
        interaction: { mode: "nearest", intersect: false },
        plugins: {
          legend: { display: true, labels: { boxWidth: 12 } },
          tooltip: {
            callbacks: {
              // hover reveals the timestamp the hidden x-axis would show
              title: (items: any[]) =>
                items.length
                  ? new Date(items[0].parsed.x).toISOString().replace(".000Z", "Z")
                  : "",
            },
          },
        },
        scales: {
          x: { type: "linear", display: false, min: 0, max: 1 },
        },
      },
    });
    canvas.addEventListener("wheel", (e) => this.onWheel(e), { passive: false });
    this.installDragPan(canvas);
  }

  setSeries(seriesList: SeriesPayload[], fromMs: number, toMs: number): void {
    this.fullFromMs = fromMs;
    this.fullToMs = Math.max(toMs, fromMs + 1);
    this.chart.data.datasets = chartDatasets(seriesList);
    const scales = chartScales(seriesList);
    this.chart.options.scales = {
      x: { type: "linear", display: false, min: fromMs, max: this.fullToMs },
      ...scales,
    };
    this.chart.update("none");
  }

  appendLivePoints(seriesList: SeriesPayload[]): void {
    const datasets = chartDatasets(seriesList);
    for (let i = 0; i < datasets.length && i < this.chart.data.datasets.length; i++) {
      const existing = this.chart.data.datasets[i].data as { x: number; y: number | null }[];
      const lastX = existing.length ? existing[existing.length - 1].x : -Infinity;
      for (const point of datasets[i].data) {
        if (point.x > lastX) existing.push(point); // in order, no duplicates
      }
    }
    const xScale = this.chart.options.scales.x;
    for (const dataset of this.chart.data.datasets) {
      const data = dataset.data as { x: number }[];
      if (data.length) xScale.max = Math.max(xScale.max, data[data.length - 1].x);
    }
    this.fullToMs = Math.max(this.fullToMs, xScale.max);
    this.chart.update("none");
  }

  private onWheel(event: WheelEvent): void {
    event.preventDefault();
    const xScale = this.chart.options.scales.x;
    const span = xScale.max - xScale.min;
    const factor = event.deltaY > 0 ? 1.2 : 1 / 1.2;
    const rect = (event.target as HTMLElement).getBoundingClientRect();
    const frac = (event.clientX - rect.left) / rect.width;
    const pivot = xScale.min + frac * span;
    let newSpan = span * factor;
    newSpan = Math.min(newSpan, this.fullToMs - this.fullFromMs);
    let min = pivot - frac * newSpan;
    let max = min + newSpan;
    if (min < this.fullFromMs) {
      min = this.fullFromMs;
      max = min + newSpan;
    }
    if (max > this.fullToMs) {
      max = this.fullToMs;
      min = max - newSpan;
    }
    xScale.min = min;
    xScale.max = max;
    this.chart.update("none");
  }

  private installDragPan(canvas: HTMLCanvasElement): void {
    let startX: number | null = null;
    let startMin = 0;
    let startMax = 0;
    canvas.addEventListener("pointerdown", (e) => {
      startX = e.clientX;
      startMin = this.chart.options.scales.x.min;
      startMax = this.chart.options.scales.x.max;
      canvas.setPointerCapture(e.pointerId);
    });
    canvas.addEventListener("pointermove", (e) => {
      if (startX === null) return;
      const rect = canvas.getBoundingClientRect();
      const span = startMax - startMin;
      let shift = ((startX - e.clientX) / rect.width) * span;
      shift = Math.max(this.fullFromMs - startMin, Math.min(this.fullToMs - startMax, shift));
      this.chart.options.scales.x.min = startMin + shift;
      this.chart.options.scales.x.max = startMax + shift;
      this.chart.update("none");
    });
    const stop = (e: PointerEvent) => {
      startX = null;
      if (canvas.hasPointerCapture(e.pointerId)) canvas.releasePointerCapture(e.pointerId);
    };
    canvas.addEventListener("pointerup", stop);
    canvas.addEventListener("pointercancel", stop);
  }
}
