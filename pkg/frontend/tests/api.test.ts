import { describe, expect, it } from "vitest";

import { ApiClient, ApiError } from "../src/api.js";
import { makeLatest } from "./fixtures.js";

interface Call {
  url: string;
  init?: RequestInit;
}

function stubFetch(responses: Array<{ status?: number; body: unknown }>) {
  const calls: Call[] = [];
  const queue = [...responses];
  const fetchFn = async (url: string, init?: RequestInit): Promise<Response> => {
    calls.push({ url, init });
    const next = queue.shift() ?? { status: 200, body: {} };
    return new Response(JSON.stringify(next.body), {
      status: next.status ?? 200,
      headers: { "content-type": "application/json" },
    });
  };
  return { calls, fetchFn };
}

describe("ApiClient", () => {
  it("fetches the latest snapshot", async () => {
    const { calls, fetchFn } = stubFetch([{ body: makeLatest() }]);
    const client = new ApiClient("", fetchFn);
    const latest = await client.latest();
    expect(calls[0]!.url).toBe("/api/readings/latest");
    expect(latest.nodes["node3"]!.values).toEqual({ temp_c: 33, humidity_pct: 70 });
  });

  it("builds history queries with ISO range params", async () => {
    const { calls, fetchFn } = stubFetch([{ body: [] }]);
    const client = new ApiClient("", fetchFn);
    await client.history("node2", "2020-07-09T10:30:00", "2020-07-09T14:30:00");
    expect(calls[0]!.url).toBe(
      "/api/readings?node=node2&from=2020-07-09T10%3A30%3A00&to=2020-07-09T14%3A30%3A00",
    );
  });

  it("posts motor commands as JSON", async () => {
    const { calls, fetchFn } = stubFetch([{ status: 202, body: { command_id: 1, status: "pending" } }]);
    const client = new ApiClient("", fetchFn);
    const accepted = await client.submitMotor(128, "forward");
    expect(accepted.command_id).toBe(1);
    expect(calls[0]!.url).toBe("/api/motor");
    expect(calls[0]!.init?.method).toBe("POST");
    expect(JSON.parse(String(calls[0]!.init?.body))).toEqual({ speed: 128, direction: "forward" });
  });

  it("surfaces the interlock as ApiError 409 with the explanation", async () => {
    const { fetchFn } = stubFetch([
      { status: 409, body: { detail: "power cutoff active; motor commands refused" } },
    ]);
    const client = new ApiClient("", fetchFn);
    await expect(client.submitMotor(10, "forward")).rejects.toThrowError(ApiError);
    try {
      await new ApiClient("", stubFetch([{ status: 409, body: { detail: "cutoff" } }]).fetchFn).submitMotor(1, "stop");
    } catch (err) {
      expect((err as ApiError).status).toBe(409);
      expect((err as ApiError).detail).toBe("cutoff");
    }
  });

  it("PUTs alarm rules without the id in the body", async () => {
    const { calls, fetchFn } = stubFetch([{ body: {} }]);
    const client = new ApiClient("", fetchFn);
    await client.putAlarmRule({
      id: "fire-default",
      node: "node1",
      field: "adc",
      comparator: ">",
      threshold: 0,
      debounce: 1,
      actions: ["sprinkler_on"],
      armed: false,
    });
    expect(calls[0]!.url).toBe("/api/alarms/fire-default");
    const body = JSON.parse(String(calls[0]!.init?.body));
    expect(body.id).toBeUndefined();
    expect(body.armed).toBe(false);
  });

  it("prefixes a base URL when given", async () => {
    const { calls, fetchFn } = stubFetch([{ body: [] }]);
    const client = new ApiClient("http://localhost:8000", fetchFn);
    await client.alarmEvents();
    expect(calls[0]!.url).toBe("http://localhost:8000/api/alarms/events");
  });
});
