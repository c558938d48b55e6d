import { describe, expect, it } from "vitest";

import { SuggestController } from "../src/controller.js";
import { editField, initialState, shouldRequest } from "../src/state.js";

function gate() {
  let release!: () => void;
  const waited = new Promise<void>((resolve) => {
    release = resolve;
  });
  return { waited, release };
}

describe("SuggestController", () => {
  it("keeps at most one request in flight", async () => {
    const first = gate();
    let calls = 0;
    const controller = new SuggestController(async () => {
      calls += 1;
      if (calls === 1) {
        await first.waited;
      }
    });
    const initial = controller.request();
    expect(controller.busy).toBe(true);
    void controller.request();
    void controller.request();
    expect(calls).toBe(1);
    first.release();
    await initial;
    await Promise.resolve();
    expect(calls).toBe(2); // the edits during flight collapse into one follow-up
  });

  it("runs sequential requests normally", async () => {
    let calls = 0;
    const controller = new SuggestController(async () => {
      calls += 1;
    });
    await controller.request();
    await controller.request();
    expect(calls).toBe(2);
  });

  it("releases the in-flight slot when the sender throws", async () => {
    let calls = 0;
    const controller = new SuggestController(async () => {
      calls += 1;
      throw new Error("boom");
    });
    await expect(controller.request()).rejects.toThrow("boom");
    expect(controller.busy).toBe(false);
    await expect(controller.request()).rejects.toThrow("boom");
    expect(calls).toBe(2);
  });
});

describe("shouldRequest", () => {
  it("blocks on a blank title", () => {
    let state = initialState();
    expect(shouldRequest(state)).toBe(false);
    state = editField(state, "title", "   ");
    expect(shouldRequest(state)).toBe(false);
    state = editField(state, "codeSnippet", "x = 1");
    expect(shouldRequest(state)).toBe(false);
  });

  it("allows once a title exists", () => {
    const state = editField(initialState(), "title", "why?");
    expect(shouldRequest(state)).toBe(true);
  });
});
