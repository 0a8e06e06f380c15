/** UI state: current encoding, presets, service availability. */

import type { Meta } from "./api.js";
import { clampToRanges, interpolateValues, swapSegment } from "./encoding.js";

export type Listener = () => void;

export class UiState {
  values: number[] = [];
  presetA: number[] | null = null;
  presetB: number[] | null = null;
  online = true;
  private listeners: Listener[] = [];

  constructor(public readonly meta: Meta) {}

  subscribe(fn: Listener): void {
    this.listeners.push(fn);
  }

  private emit(): void {
    for (const fn of this.listeners) fn();
  }

  setValues(values: number[]): void {
    if (values.length !== this.meta.min.length) {
      throw new RangeError(`expected ${this.meta.min.length} values, got ${values.length}`);
    }
    this.values = clampToRanges(values, this.meta.min, this.meta.max);
    this.emit();
  }

  setDimension(index: number, value: number): void {
    const next = this.values.slice();
    next[index] = value;
    this.setValues(next);
  }

  setOnline(online: boolean): void {
    if (online !== this.online) {
      this.online = online;
      this.emit();
    }
  }

  storePreset(which: "A" | "B"): void {
    if (which === "A") this.presetA = this.values.slice();
    else this.presetB = this.values.slice();
    this.emit();
  }

  /** Blend between the stored presets; t=0 is preset A. */
  interpolatePresets(t: number, segmentLabels?: string[]): void {
    if (!this.presetA || !this.presetB) throw new Error("both presets must be stored first");
    const segs = segmentLabels
      ? this.meta.layout.filter((s) => segmentLabels.includes(s.label))
      : undefined;
    this.setValues(interpolateValues(this.presetA, this.presetB, t, segs));
  }

  /** Replace one segment of preset A with preset B's values. */
  swapPresetSegment(label: string): void {
    if (!this.presetA || !this.presetB) throw new Error("both presets must be stored first");
    const seg = this.meta.layout.find((s) => s.label === label);
    if (!seg) throw new Error(`unknown segment ${label}`);
    this.setValues(swapSegment(this.presetA, this.presetB, seg));
  }
}
