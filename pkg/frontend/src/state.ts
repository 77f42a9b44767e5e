/** Dashboard view model and the pure transitions that drive it.
 *
 *  The model holds exactly what the API returned: chart series are the
 *  history endpoint's points one-to-one (no resampling), the control badge
 *  mirrors the last command journal status received, and the alert panel
 *  shows fired alarm events until the operator dismisses them.  Holding no
 *  authority of its own, the whole model can be rebuilt from the API at
 *  any time (a page refresh loses nothing).
 */

import type {
  AlarmEvent,
  AlarmRule,
  CommandEntry,
  HistoryEntry,
  LatestSnapshot,
} from "./api.js";

export type Connection = "connecting" | "live" | "degraded";

export type Badge = "idle" | "pending" | "acknowledged" | "failed" | "refused";

export interface SeriesPoint {
  t_us: number;
  iso: string;
  value: number;
}

export type SeriesName = "temp" | "humidity" | "soil" | "flame";

export interface MotorControl {
  commandId: number | null;
  badge: Badge;
  detail: string;
}

export interface ViewModel {
  connection: Connection;
  pollCount: number;
  latest: LatestSnapshot | null;
  series: Record<SeriesName, SeriesPoint[]>;
  lastHistoryIso: string | null;
  rules: AlarmRule[];
  events: AlarmEvent[];
  alert: AlarmEvent | null;
  motor: MotorControl;
}

export function emptyViewModel(): ViewModel {
  return {
    connection: "connecting",
    pollCount: 0,
    latest: null,
    series: { temp: [], humidity: [], soil: [], flame: [] },
    lastHistoryIso: null,
    rules: [],
    events: [],
    alert: null,
    motor: { commandId: null, badge: "idle", detail: "" },
  };
}

/** Map one journal record onto the chart series it feeds. */
function seriesOf(entry: HistoryEntry): Array<[SeriesName, number]> {
  switch (entry.kind) {
    case "dht":
      return [
        ["temp", Number(entry.values["temp_c"])],
        ["humidity", Number(entry.values["humidity_pct"])],
      ];
    case "soil":
      return [["soil", Number(entry.values["adc"])]];
    case "flame":
      return [["flame", Number(entry.values["adc"])]];
    default:
      return [];
  }
}

export interface PollPayload {
  latest: LatestSnapshot;
  history: HistoryEntry[];
  rules: AlarmRule[];
  command: CommandEntry | null;
}

export function applyPoll(vm: ViewModel, payload: PollPayload): ViewModel {
  const series: Record<SeriesName, SeriesPoint[]> = {
    temp: [...vm.series.temp],
    humidity: [...vm.series.humidity],
    soil: [...vm.series.soil],
    flame: [...vm.series.flame],
  };
  const seen = new Set<string>();
  for (const name of Object.keys(series) as SeriesName[]) {
    for (const point of series[name]) {
      seen.add(`${name}:${point.t_us}`);
    }
  }
  let lastIso = vm.lastHistoryIso;
  for (const entry of payload.history) {
    for (const [name, value] of seriesOf(entry)) {
      const key = `${name}:${entry.t_us}`;
      if (!seen.has(key)) {
        seen.add(key);
        series[name].push({ t_us: entry.t_us, iso: entry.iso, value });
      }
    }
    if (lastIso === null || entry.iso > lastIso) {
      lastIso = entry.iso;
    }
  }

  const events = payload.latest.alarm_events;
  const newEvents = events.slice(vm.events.length);
  const alert = newEvents.length > 0 ? newEvents[newEvents.length - 1]! : vm.alert;

  let motor = vm.motor;
  if (payload.command && payload.command.command_id === vm.motor.commandId) {
    motor = {
      ...vm.motor,
      badge: badgeFor(payload.command.status),
      detail: payload.command.status,
    };
  }

  return {
    connection: "live",
    pollCount: vm.pollCount + 1,
    latest: payload.latest,
    series,
    lastHistoryIso: lastIso,
    rules: payload.rules,
    events: [...events],
    alert,
    motor,
  };
}

export function applyPollFailure(vm: ViewModel): ViewModel {
  // Never present stale data as fresh: the connection flag degrades and
  // the view keeps (greyed) whatever was last confirmed.
  return { ...vm, connection: "degraded", pollCount: vm.pollCount + 1 };
}

export function badgeFor(status: string): Badge {
  switch (status) {
    case "pending":
      return "pending";
    case "acknowledged":
      return "acknowledged";
    case "refused_power_cutoff":
      return "refused";
    default:
      return "failed";
  }
}

export function applyCommandAccepted(vm: ViewModel, commandId: number): ViewModel {
  return { ...vm, motor: { commandId, badge: "pending", detail: "pending" } };
}

export function applyCommandRejected(vm: ViewModel, status: number, detail: string): ViewModel {
  const badge: Badge = status === 409 ? "refused" : "failed";
  return { ...vm, motor: { commandId: null, badge, detail } };
}

export function dismissAlert(vm: ViewModel): ViewModel {
  return { ...vm, alert: null };
}

/** The single client-side derivation the dashboard is allowed: duty %. */
export function dutyPercent(speed: number): number {
  return Math.round((speed / 255) * 1000) / 10;
}

export function controlsDisabled(vm: ViewModel): boolean {
  return vm.latest !== null && vm.latest.actuators.power_cutoff;
}
