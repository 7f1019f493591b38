/** Sliding timeline control: a gradient-backed track with a draggable handle.
 * Dragging changes the current instant (kinematic map); hovering the handle
 * shows the date and time being displayed. */

import { gradientCss } from "./gradient";
import type { HueStop } from "./gradient";

export interface TimelineCallbacks {
  onScrub: (instantMs: number) => void;
}

export class TimelineSlider {
  private track: HTMLElement;
  private handle: HTMLElement;
  private tooltip: HTMLElement;
  private fromMs = 0;
  private toMs = 1;
  private instantMs = 0;
  private dragging = false;

  constructor(container: HTMLElement, private callbacks: TimelineCallbacks) {
    container.classList.add("timeline");
    this.track = document.createElement("div");
    this.track.className = "timeline-track";
    this.handle = document.createElement("div");
    this.handle.className = "timeline-handle";
    this.tooltip = document.createElement("div");
    this.tooltip.className = "timeline-tooltip";
    this.tooltip.hidden = true;
    this.track.appendChild(this.handle);
    container.appendChild(this.track);
    container.appendChild(this.tooltip);

    this.track.addEventListener("pointerdown", (e) => {
      this.dragging = true;
      this.track.setPointerCapture(e.pointerId);
      this.scrubTo(e);
    });
    this.track.addEventListener("pointermove", (e) => {
      if (this.dragging) this.scrubTo(e);
    });
    this.track.addEventListener("pointerup", (e) => {
      this.dragging = false;
      this.track.releasePointerCapture(e.pointerId);
    });
    this.handle.addEventListener("pointerenter", () => this.showTooltip());
    this.handle.addEventListener("pointerleave", () => {
      this.tooltip.hidden = true;
    });
  }

  setWindow(fromMs: number, toMs: number): void {
    this.fromMs = fromMs;
    this.toMs = Math.max(toMs, fromMs + 1);
    this.position();
  }

  setGradient(stops: HueStop[]): void {
    this.track.style.background = gradientCss(stops, this.fromMs, this.toMs);
  }

  setInstant(instantMs: number): void {
    this.instantMs = instantMs;
    this.position();
    if (!this.tooltip.hidden) this.showTooltip();
  }

  private position(): void {
    const frac = (this.instantMs - this.fromMs) / (this.toMs - this.fromMs);
    this.handle.style.left = `${Math.max(0, Math.min(1, frac)) * 100}%`;
  }

  private showTooltip(): void {
    this.tooltip.textContent = new Date(this.instantMs).toISOString().replace(".000Z", "Z");
    this.tooltip.hidden = false;
    this.tooltip.style.left = this.handle.style.left;
  }

  private scrubTo(event: PointerEvent): void {
    const rect = this.track.getBoundingClientRect();
    const frac = Math.max(0, Math.min(1, (event.clientX - rect.left) / rect.width));
    const instant = this.fromMs + frac * (this.toMs - this.fromMs);
    this.callbacks.onScrub(Math.round(instant));
  }
}
