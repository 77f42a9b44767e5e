/** Typed client for the wsn-twin control API. Every dashboard number comes
 *  from one of these payloads. */

export interface TimeInfo {
  t_us: number;
  iso: string;
  date: string;
  clock: string;
}

export interface NodeReading {
  kind: string | null;
  values: Record<string, number | string> | null;
  received_iso: string | null;
  stale: boolean;
}

export interface MotorState {
  speed: number;
  direction: string;
  duty_cycle: number;
  in3: number;
  in4: number;
}

export interface Actuators {
  sprinkler_on: boolean;
  power_cutoff: boolean;
}

export interface ActionOutcome {
  action: string;
  outcome: string;
}

export interface AlarmEvent {
  rule_id: string;
  t_us: number;
  node: string;
  field: string;
  value: number;
  actions: ActionOutcome[];
}

export interface LatestSnapshot {
  time: TimeInfo;
  nodes: Record<string, NodeReading>;
  motor: MotorState;
  actuators: Actuators;
  lcd: string[];
  counters: Record<string, unknown>;
  alarm_events: AlarmEvent[];
  finished: boolean;
}

export interface HistoryEntry {
  id: number;
  t_us: number;
  iso: string;
  date: string;
  clock: string;
  node: string;
  kind: string;
  values: Record<string, number | string>;
  source: string;
}

export interface CommandEntry {
  command_id: number;
  speed?: number;
  direction?: string;
  origin?: string;
  issued_t_us?: number;
  status: string;
  resolved_t_us?: number | null;
}

export interface AlarmRule {
  id: string;
  node: string;
  field: string;
  comparator: string;
  threshold: number;
  debounce: number;
  actions: string[];
  armed: boolean;
}

export type Direction = "forward" | "reverse" | "stop";

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly detail: string,
  ) {
    super(`api error ${status}: ${detail}`);
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  constructor(
    private readonly baseUrl: string = "",
    private readonly fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchFn(this.baseUrl + path, init);
    if (!response.ok) {
      let detail = response.statusText;
      try {
        const body = await response.json();
        detail = typeof body.detail === "string" ? body.detail : JSON.stringify(body.detail);
      } catch {
        /* non-JSON error body */
      }
      throw new ApiError(response.status, detail);
    }
    return (await response.json()) as T;
  }

  latest(): Promise<LatestSnapshot> {
    return this.request("/api/readings/latest");
  }

  history(node?: string, fromIso?: string, toIso?: string): Promise<HistoryEntry[]> {
    const params = new URLSearchParams();
    if (node) params.set("node", node);
    if (fromIso) params.set("from", fromIso);
    if (toIso) params.set("to", toIso);
    const query = params.toString();
    return this.request(`/api/readings${query ? "?" + query : ""}`);
  }

  submitMotor(speed: number, direction: Direction): Promise<{ command_id: number; status: string }> {
    return this.request("/api/motor", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ speed, direction }),
    });
  }

  command(commandId: number): Promise<CommandEntry> {
    return this.request(`/api/commands/${commandId}`);
  }

  alarmRules(): Promise<AlarmRule[]> {
    return this.request("/api/alarms");
  }

  putAlarmRule(rule: AlarmRule): Promise<AlarmRule> {
    const { id, ...body } = rule;
    return this.request(`/api/alarms/${encodeURIComponent(id)}`, {
      method: "PUT",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
  }

  alarmEvents(): Promise<AlarmEvent[]> {
    return this.request("/api/alarms/events");
  }

  clearActuators(): Promise<{ actuators: Actuators }> {
    return this.request("/api/alarms/clear", { method: "POST" });
  }
}
