import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";
import { debounce } from "../src/debounce.js";

describe("debounce", () => {
  beforeEach(() => vi.useFakeTimers());
  afterEach(() => vi.useRealTimers());

  it("fires once on the trailing edge with the latest arguments", () => {
    const calls: number[] = [];
    const fn = debounce((v: number) => calls.push(v), 50);
    fn(1);
    vi.advanceTimersByTime(20);
    fn(2);
    vi.advanceTimersByTime(20);
    fn(3);
    expect(calls).toEqual([]);
    vi.advanceTimersByTime(50);
    expect(calls).toEqual([3]);
  });

  it("fires again for a later burst", () => {
    const calls: number[] = [];
    const fn = debounce((v: number) => calls.push(v), 50);
    fn(1);
    vi.advanceTimersByTime(50);
    fn(2);
    vi.advanceTimersByTime(50);
    expect(calls).toEqual([1, 2]);
  });

  it("cancel drops the pending call", () => {
    const calls: number[] = [];
    const fn = debounce((v: number) => calls.push(v), 50);
    fn(1);
    fn.cancel();
    vi.advanceTimersByTime(100);
    expect(calls).toEqual([]);
  });

  it("flush runs the pending call immediately", () => {
    const calls: number[] = [];
    const fn = debounce((v: number) => calls.push(v), 50);
    fn(7);
    fn.flush();
    expect(calls).toEqual([7]);
    vi.advanceTimersByTime(100);
    expect(calls).toEqual([7]);
  });
});
