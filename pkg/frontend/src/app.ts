/** DOM wiring: renders the view model into the page and forwards operator
 *  actions to the API. All state lives in the ViewModel; this file only
 *  paints it. */

import { ApiClient, ApiError, Direction } from "./api.js";
import { chartSvg } from "./charts.js";
import { lcdMirrorText } from "./lcd.js";
import { Poller } from "./poller.js";
import {
  ViewModel,
  applyCommandAccepted,
  applyCommandRejected,
  controlsDisabled,
  dismissAlert,
  dutyPercent,
} from "./state.js";

const SERIES_COLORS = {
  temp: "#d9480f",
  humidity: "#1971c2",
  soil: "#2f9e44",
  flame: "#e03131",
} as const;

const NODE_LABELS: Record<string, string> = {
  node1: "Node 1 - flame",
  node2: "Node 2 - soil",
  node3: "Node 3 - temp/humidity",
  node4: "Node 4 - motor",
};

function el<T extends HTMLElement>(id: string): T {
  const found = document.getElementById(id);
  if (!found) {
    throw new Error(`missing element #${id}`);
  }
  return found as T;
}

export class App {
  private readonly api: ApiClient;
  private readonly poller: Poller;

  constructor(baseUrl = "") {
    this.api = new ApiClient(baseUrl);
    this.poller = new Poller(this.api, (vm) => this.render(vm));
  }

  start(): void {
    this.bindControls();
    this.poller.start();
  }

  private bindControls(): void {
    const slider = el<HTMLInputElement>("motor-speed");
    const speedOut = el<HTMLElement>("motor-speed-value");
    slider.addEventListener("input", () => {
      speedOut.textContent = `${slider.value} (duty ${dutyPercent(Number(slider.value))}%)`;
    });
    el<HTMLButtonElement>("motor-send").addEventListener("click", () => {
      void this.submitMotor();
    });
    el<HTMLButtonElement>("clear-cutoff").addEventListener("click", () => {
      void this.api.clearActuators().then(() => this.poller.tick());
    });
    el<HTMLButtonElement>("alert-dismiss").addEventListener("click", () => {
      this.poller.vm = dismissAlert(this.poller.vm);
      this.render(this.poller.vm);
    });
  }

  private async submitMotor(): Promise<void> {
    const speed = Number(el<HTMLInputElement>("motor-speed").value);
    const direction = el<HTMLSelectElement>("motor-direction").value as Direction;
    try {
      const accepted = await this.api.submitMotor(speed, direction);
      this.poller.vm = applyCommandAccepted(this.poller.vm, accepted.command_id);
    } catch (err) {
      if (err instanceof ApiError) {
        this.poller.vm = applyCommandRejected(this.poller.vm, err.status, err.detail);
      } else {
        this.poller.vm = applyCommandRejected(this.poller.vm, 0, String(err));
      }
    }
    this.render(this.poller.vm);
    void this.poller.tick();
  }

  private async toggleRule(ruleId: string, armed: boolean): Promise<void> {
    const rule = this.poller.vm.rules.find((r) => r.id === ruleId);
    if (!rule) {
      return;
    }
    await this.api.putAlarmRule({ ...rule, armed });
    void this.poller.tick();
  }

  render(vm: ViewModel): void {
    const banner = el<HTMLElement>("connection");
    banner.textContent =
      vm.connection === "live"
        ? `live - ${vm.latest?.time.clock ?? ""} ${vm.latest?.time.date ?? ""}`
        : vm.connection === "degraded"
          ? "connection lost - retrying, data may be stale"
          : "connecting...";
    banner.className = `banner ${vm.connection}`;
    document.body.classList.toggle("degraded-data", vm.connection === "degraded");

    if (vm.latest) {
      el<HTMLElement>("lcd").textContent = lcdMirrorText(vm.latest.lcd);
      this.renderNodes(vm);
      this.renderMotor(vm);
      this.renderActuators(vm);
    }
    this.renderCharts(vm);
    this.renderRules(vm);
    this.renderAlert(vm);
  }

  private renderNodes(vm: ViewModel): void {
    const container = el<HTMLElement>("nodes");
    const rows: string[] = [];
    for (const [nodeId, reading] of Object.entries(vm.latest!.nodes)) {
      const label = NODE_LABELS[nodeId] ?? nodeId;
      const badge = reading.stale
        ? '<span class="badge stale">stale</span>'
        : '<span class="badge fresh">fresh</span>';
      const values = reading.values
        ? Object.entries(reading.values)
            .map(([k, v]) => `${k}=${v}`)
            .join(" ")
        : "--";
      rows.push(
        `<div class="node-card"><div class="node-title">${label} ${badge}</div>` +
          `<div class="node-values">${values}</div>` +
          `<div class="node-time">${reading.received_iso ?? "never"}</div></div>`,
      );
    }
    container.innerHTML = rows.join("");
  }

  private renderCharts(vm: ViewModel): void {
    el<HTMLElement>("charts").innerHTML = [
      chartSvg("temp C", vm.series.temp, SERIES_COLORS.temp),
      chartSvg("humidity %", vm.series.humidity, SERIES_COLORS.humidity),
      chartSvg("soil ADC", vm.series.soil, SERIES_COLORS.soil),
      chartSvg("flame ADC", vm.series.flame, SERIES_COLORS.flame),
    ].join("");
  }

  private renderMotor(vm: ViewModel): void {
    const disabled = controlsDisabled(vm);
    el<HTMLInputElement>("motor-speed").disabled = disabled;
    el<HTMLSelectElement>("motor-direction").disabled = disabled;
    el<HTMLButtonElement>("motor-send").disabled = disabled;
    el<HTMLElement>("interlock-note").hidden = !disabled;

    const badge = el<HTMLElement>("motor-badge");
    badge.textContent = vm.motor.badge === "idle" ? "" : vm.motor.badge;
    badge.className = `badge ${vm.motor.badge}`;
    const motor = vm.latest!.motor;
    el<HTMLElement>("motor-state").textContent =
      `speed ${motor.speed}, ${motor.direction}, duty ${dutyPercent(motor.speed)}%` +
      ` (IN3=${motor.in3} IN4=${motor.in4})`;
    el<HTMLButtonElement>("motor-send").textContent =
      vm.motor.badge === "failed" ? "retry" : "send";
  }

  private renderActuators(vm: ViewModel): void {
    const actuators = vm.latest!.actuators;
    el<HTMLElement>("sprinkler").textContent = actuators.sprinkler_on ? "ON" : "off";
    el<HTMLElement>("cutoff").textContent = actuators.power_cutoff ? "ACTIVE" : "off";
    el<HTMLButtonElement>("clear-cutoff").disabled =
      !actuators.power_cutoff && !actuators.sprinkler_on;
  }

  private renderRules(vm: ViewModel): void {
    const container = el<HTMLElement>("rules");
    container.innerHTML = vm.rules
      .map(
        (rule) =>
          `<li><label><input type="checkbox" data-rule="${rule.id}" ${rule.armed ? "checked" : ""}/>` +
          ` ${rule.id}: ${rule.node}.${rule.field} ${rule.comparator} ${rule.threshold}` +
          ` (debounce ${rule.debounce}) -> ${rule.actions.join(", ")}</label></li>`,
      )
      .join("");
    for (const box of container.querySelectorAll<HTMLInputElement>("input[data-rule]")) {
      box.addEventListener("change", () => {
        void this.toggleRule(box.dataset.rule!, box.checked);
      });
    }
  }

  private renderAlert(vm: ViewModel): void {
    const panel = el<HTMLElement>("alert");
    if (!vm.alert) {
      panel.hidden = true;
      return;
    }
    panel.hidden = false;
    el<HTMLElement>("alert-text").textContent =
      `ALARM ${vm.alert.rule_id}: ${vm.alert.node}.${vm.alert.field} = ${vm.alert.value}`;
    el<HTMLElement>("alert-actions").textContent = vm.alert.actions
      .map((a) => `${a.action}: ${a.outcome}`)
      .join("; ");
  }
}
