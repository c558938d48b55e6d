/** Trailing-edge debouncer: one callback per quiet period. */

export const DEFAULT_DEBOUNCE_MS = 400;

export class Debouncer {
  private handle: ReturnType<typeof setTimeout> | null = null;

  constructor(private readonly delayMs: number = DEFAULT_DEBOUNCE_MS) {}

  schedule(fn: () => void): void {
    this.cancel();
    this.handle = setTimeout(() => {
      this.handle = null;
      fn();
    }, this.delayMs);
  }

  cancel(): void {
    if (this.handle !== null) {
      clearTimeout(this.handle);
      this.handle = null;
    }
  }
}
