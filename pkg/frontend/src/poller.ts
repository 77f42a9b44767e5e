/** Polling loop: one snapshot + incremental history per interval, at most
 *  one poll in flight, exponential backoff while the API is unreachable. */

import { ApiClient } from "./api.js";
import {
  PollPayload,
  ViewModel,
  applyPoll,
  applyPollFailure,
  emptyViewModel,
} from "./state.js";

export const DEFAULT_INTERVAL_MS = 1000;
const BACKOFF_FACTOR = 2;
const BACKOFF_MAX_MS = 10_000;

export class Poller {
  vm: ViewModel = emptyViewModel();
  private inFlight = false;
  private timer: ReturnType<typeof setTimeout> | null = null;
  private delayMs: number;

  constructor(
    private readonly api: ApiClient,
    private readonly onUpdate: (vm: ViewModel) => void,
    private readonly intervalMs: number = DEFAULT_INTERVAL_MS,
  ) {
    this.delayMs = intervalMs;
  }

  start(): void {
    void this.tick();
  }

  stop(): void {
    if (this.timer !== null) {
      clearTimeout(this.timer);
      this.timer = null;
    }
  }

  /** One poll cycle; safe to call re-entrantly (drops overlapping calls). */
  async tick(): Promise<void> {
    if (this.inFlight) {
      return;
    }
    this.inFlight = true;
    try {
      const latest = await this.api.latest();
      const history = await this.api.history(
        undefined,
        this.vm.lastHistoryIso ?? undefined,
      );
      const command =
        this.vm.motor.commandId !== null && this.vm.motor.badge === "pending"
          ? await this.api.command(this.vm.motor.commandId)
          : null;
      const rules = await this.api.alarmRules();
      const payload: PollPayload = { latest, history, rules, command };
      this.vm = applyPoll(this.vm, payload);
      this.delayMs = this.intervalMs;
    } catch {
      this.vm = applyPollFailure(this.vm);
      this.delayMs = Math.min(this.delayMs * BACKOFF_FACTOR, BACKOFF_MAX_MS);
    } finally {
      this.inFlight = false;
    }
    this.onUpdate(this.vm);
    this.timer = setTimeout(() => void this.tick(), this.delayMs);
  }
}
