/** Debounced, single-in-flight query scheduling with stale-response drops.
 *
 * One scheduler instance per query kind (solve, trace, coverage...).  A
 * burst of requests collapses to at most one fetch per settle window,
 * and responses computed against an older session revision than the
 * latest delivered one are discarded, never drawn.
 */

export const DEBOUNCE_MS = 50;

export interface Revisioned {
  revision: number;
}

type Clock = {
  setTimeout: (fn: () => void, ms: number) => unknown;
  clearTimeout: (handle: unknown) => void;
};

const realClock: Clock = {
  setTimeout: (fn, ms) => setTimeout(fn, ms),
  clearTimeout: (h) => clearTimeout(h as Parameters<typeof clearTimeout>[0]),
};

export class QueryScheduler<A, R extends Revisioned> {
  private timer: unknown = null;
  private pendingArgs: A | null = null;
  private inFlight = false;
  private latestDelivered = -1;
  private seq = 0;
  fetchCount = 0;

  constructor(
    private readonly run: (args: A) => Promise<R>,
    private readonly deliver: (result: R) => void,
    private readonly onError: (err: unknown) => void = () => {},
    private readonly debounceMs: number = DEBOUNCE_MS,
    private readonly clock: Clock = realClock,
  ) {}

  /** Queue a query; bursts within the debounce window collapse. */
  request(args: A): void {
    this.pendingArgs = args;
    if (this.timer !== null) this.clock.clearTimeout(this.timer);
    this.timer = this.clock.setTimeout(() => {
      this.timer = null;
      void this.fire();
    }, this.debounceMs);
  }

  private async fire(): Promise<void> {
    if (this.inFlight || this.pendingArgs === null) return;
    const args = this.pendingArgs;
    this.pendingArgs = null;
    this.inFlight = true;
    const ticket = ++this.seq;
    this.fetchCount += 1;
    try {
      const result = await this.run(args);
      // drop anything older than what the user has already seen, and
      // anything that lost the race to a newer fetch
      if (ticket === this.seq && result.revision >= this.latestDelivered) {
        this.latestDelivered = result.revision;
        this.deliver(result);
      }
    } catch (err) {
      this.onError(err);
    } finally {
      this.inFlight = false;
      if (this.pendingArgs !== null) void this.fire();
    }
  }
}
