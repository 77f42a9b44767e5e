import type {
  AlarmEvent,
  AlarmRule,
  HistoryEntry,
  LatestSnapshot,
} from "../src/api.js";

export function makeLatest(overrides: Partial<LatestSnapshot> = {}): LatestSnapshot {
  return {
    time: { t_us: 120_000_000, iso: "2020-07-09T10:30:00", date: "09-07-2020", clock: "10:30" },
    nodes: {
      node1: { kind: "flame", values: { adc: 0 }, received_iso: "2020-07-09T10:30:00", stale: false },
      node2: { kind: "soil", values: { adc: 293 }, received_iso: "2020-07-09T10:30:00", stale: false },
      node3: {
        kind: "dht",
        values: { temp_c: 33, humidity_pct: 70 },
        received_iso: "2020-07-09T10:30:00",
        stale: false,
      },
      node4: { kind: null, values: null, received_iso: null, stale: true },
    },
    motor: { speed: 0, direction: "stop", duty_cycle: 0, in3: 0, in4: 0 },
    actuators: { sprinkler_on: false, power_cutoff: false },
    lcd: ["T: 33C H: 70%   ", "SOIL: 293       ", "FLAME:   0      ", "M:  0 STP       "],
    counters: {},
    alarm_events: [],
    finished: false,
    ...overrides,
  };
}

export function makeHistory(
  entries: Array<{ t_us: number; node: string; kind: string; values: Record<string, number> }>,
): HistoryEntry[] {
  return entries.map((entry, index) => ({
    id: index + 1,
    iso: `2020-07-09T10:3${index}:00`,
    date: "09-07-2020",
    clock: `10:3${index}`,
    source: "sampled",
    ...entry,
  }));
}

export function fireEvent(): AlarmEvent {
  return {
    rule_id: "fire-default",
    t_us: 5_520_000_000,
    node: "node1",
    field: "adc",
    value: 1023,
    actions: [
      { action: "motor_stop", outcome: "acknowledged" },
      { action: "sprinkler_on", outcome: "on" },
      { action: "power_cutoff_flag", outcome: "on" },
    ],
  };
}

export function fireRule(): AlarmRule {
  return {
    id: "fire-default",
    node: "node1",
    field: "adc",
    comparator: ">",
    threshold: 0,
    debounce: 1,
    actions: ["motor_stop", "sprinkler_on", "power_cutoff_flag"],
    armed: true,
  };
}
