import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";

import { DEFAULT_DEBOUNCE_MS, Debouncer } from "../src/debounce.js";

describe("Debouncer", () => {
  beforeEach(() => {
    vi.useFakeTimers();
  });

  afterEach(() => {
    vi.useRealTimers();
  });

  it("fires once after a burst of rapid edits", () => {
    const debouncer = new Debouncer();
    const fire = vi.fn();
    for (let i = 0; i < 10; i++) {
      debouncer.schedule(fire);
      vi.advanceTimersByTime(50);
    }
    expect(fire).not.toHaveBeenCalled();
    vi.advanceTimersByTime(DEFAULT_DEBOUNCE_MS);
    expect(fire).toHaveBeenCalledTimes(1);
  });

  it("waits the full quiet period", () => {
    const debouncer = new Debouncer();
    const fire = vi.fn();
    debouncer.schedule(fire);
    vi.advanceTimersByTime(DEFAULT_DEBOUNCE_MS - 1);
    expect(fire).not.toHaveBeenCalled();
    vi.advanceTimersByTime(1);
    expect(fire).toHaveBeenCalledTimes(1);
  });

  it("cancel drops the pending call", () => {
    const debouncer = new Debouncer();
    const fire = vi.fn();
    debouncer.schedule(fire);
    debouncer.cancel();
    vi.advanceTimersByTime(DEFAULT_DEBOUNCE_MS * 2);
    expect(fire).not.toHaveBeenCalled();
  });
});
