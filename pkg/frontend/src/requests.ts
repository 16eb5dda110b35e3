/**
 * Per-view request discipline: slider interaction is debounced so a view
 * issues at most one in-flight request; responses carry a sequence id and
 * anything superseded is discarded (last write wins).
 */

export interface RequesterOptions<B, D> {
  fetcher: (body: B) => Promise<D>;
  onResult: (doc: D) => void;
  onError: (err: unknown) => void;
  debounceMs?: number;
  /** injectable for tests */
  schedule?: (fn: () => void, ms: number) => unknown;
  cancel?: (handle: unknown) => void;
}

export class ViewRequester<B, D> {
  private seq = 0;
  private inFlight = false;
  private pendingBody: B | undefined;
  private hasPending = false;
  private timer: unknown = null;
  private readonly debounceMs: number;
  private readonly schedule: (fn: () => void, ms: number) => unknown;
  private readonly cancelTimer: (handle: unknown) => void;

  constructor(private readonly options: RequesterOptions<B, D>) {
    this.debounceMs = options.debounceMs ?? 150;
    this.schedule = options.schedule ?? ((fn, ms) => setTimeout(fn, ms));
    this.cancelTimer = options.cancel ?? ((handle) => clearTimeout(handle as number));
  }

  /** Slider/input change entry point. */
  request(body: B): void {
    if (this.timer !== null) this.cancelTimer(this.timer);
    this.timer = this.schedule(() => {
      this.timer = null;
      this.fire(body);
    }, this.debounceMs);
  }

  /** Issue immediately (initial load). */
  fire(body: B): void {
    if (this.inFlight) {
      this.pendingBody = body;
      this.hasPending = true;
      return;
    }
    const id = ++this.seq;
    this.inFlight = true;
    this.options.fetcher(body).then(
      (doc) => this.settle(id, () => this.options.onResult(doc)),
      (err) => this.settle(id, () => this.options.onError(err)),
    );
  }

  private settle(id: number, deliver: () => void): void {
    this.inFlight = false;
    const superseded = this.hasPending;
    if (id === this.seq && !superseded) {
      deliver();
    }
    if (this.hasPending) {
      const body = this.pendingBody as B;
      this.hasPending = false;
      this.pendingBody = undefined;
      this.fire(body);
    }
  }
}
