/** Serializes suggest requests: at most one in flight, latest edit wins. */

export class SuggestController {
  private inFlight = false;
  private pending = false;

  constructor(private readonly send: () => Promise<void>) {}

  /** Run the sender now, or remember to re-run it once the current one ends. */
  async request(): Promise<void> {
    if (this.inFlight) {
      this.pending = true;
      return;
    }
    this.inFlight = true;
    try {
      await this.send();
    } finally {
      this.inFlight = false;
      if (this.pending) {
        this.pending = false;
        await this.request();
      }
    }
  }

  get busy(): boolean {
    return this.inFlight;
  }
}
