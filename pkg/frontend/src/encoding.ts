/** Client-side encoding edits: grouped shifts, swap, interpolation, clamping. */

import type { Meta, SegmentInfo } from "./api.js";

export function clampToRanges(values: number[], min: number[], max: number[]): number[] {
  return values.map((v, i) => Math.min(Math.max(v, min[i]), max[i]));
}

/**
 * Group slider: shift every dimension of a segment proportionally to its
 * dataset range. `t` in [0, 1] maps the whole segment from its minimum to
 * its maximum observed values.
 */
export function segmentFromGroupValue(
  seg: SegmentInfo,
  t: number,
  min: number[],
  max: number[],
): number[] {
  const out: number[] = [];
  for (let i = seg.offset; i < seg.offset + seg.length; i++) {
    out.push(min[i] + t * (max[i] - min[i]));
  }
  return out;
}

/** Mean normalized position of a segment's values inside their ranges. */
export function groupValueFromSegment(
  seg: SegmentInfo,
  values: number[],
  min: number[],
  max: number[],
): number {
  let acc = 0;
  let counted = 0;
  for (let i = seg.offset; i < seg.offset + seg.length; i++) {
    const span = max[i] - min[i];
    if (span > 0) {
      acc += (values[i] - min[i]) / span;
      counted += 1;
    }
  }
  return counted ? acc / counted : 0;
}

export function swapSegment(a: number[], b: number[], seg: SegmentInfo): number[] {
  const out = a.slice();
  for (let i = seg.offset; i < seg.offset + seg.length; i++) out[i] = b[i];
  return out;
}

export function interpolateValues(
  a: number[],
  b: number[],
  t: number,
  segments?: SegmentInfo[],
): number[] {
  if (t < 0 || t > 1) throw new RangeError(`interpolation parameter ${t} outside [0, 1]`);
  if (a.length !== b.length) throw new RangeError("encoding length mismatch");
  const mask = new Array<boolean>(a.length).fill(segments === undefined);
  if (segments) {
    for (const seg of segments) {
      for (let i = seg.offset; i < seg.offset + seg.length; i++) mask[i] = true;
    }
  }
  return a.map((v, i) => (mask[i] ? (1 - t) * v + t * b[i] : v));
}

/** Midpoint of the dataset ranges: a neutral starting encoding. */
export function defaultEncoding(meta: Meta): number[] {
  return meta.min.map((lo, i) => 0.5 * (lo + meta.max[i]));
}
