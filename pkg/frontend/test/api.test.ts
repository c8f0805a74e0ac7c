import { describe, expect, test } from "vitest";

import { PredictClient, type FetchLike, type PredictResponse } from "../src/api.js";

const OK: PredictResponse = {
  status: "Ok",
  quantiles: { "0.5": 100 },
  in_range: true,
  model_id: "m",
};

function jsonResponse(payload: unknown, status = 200): Response {
  return new Response(JSON.stringify(payload), {
    status,
    headers: { "Content-Type": "application/json" },
  });
}

describe("PredictClient", () => {
  test("posts the three fields to /predict and parses the body", async () => {
    const calls: { url: string; body: unknown }[] = [];
    const fetchStub: FetchLike = async (url, init) => {
      calls.push({ url, body: JSON.parse(String(init?.body)) });
      return jsonResponse(OK);
    };
    const client = new PredictClient("http://svc:1", fetchStub);
    const result = await client.predict({
      current_hr: 120,
      current_bt: 37.2,
      age_months: 60,
    });
    expect(result).toEqual(OK);
    expect(calls).toHaveLength(1);
    expect(calls[0].url).toBe("http://svc:1/predict");
    expect(calls[0].body).toEqual({
      current_hr: 120,
      current_bt: 37.2,
      age_months: 60,
    });
  });

  test("a newer submission aborts the in-flight request (newest wins)", async () => {
    let firstSignal: AbortSignal | undefined;
    let release: (() => void) | undefined;
    const gate = new Promise<void>((resolve) => (release = resolve));
    let call = 0;
    const fetchStub: FetchLike = async (_url, init) => {
      call += 1;
      if (call === 1) {
        firstSignal = init?.signal ?? undefined;
        await gate; // hold the first request open until the second lands
        if (init?.signal?.aborted) {
          throw new DOMException("aborted", "AbortError");
        }
        return jsonResponse(OK);
      }
      release?.();
      return jsonResponse({ ...OK, model_id: "second" });
    };
    const client = new PredictClient("http://svc:1", fetchStub);
    const first = client.predict({ current_hr: 1, current_bt: 37, age_months: 1 });
    const second = client.predict({ current_hr: 2, current_bt: 37, age_months: 2 });
    const [r1, r2] = await Promise.all([first, second]);
    expect(firstSignal?.aborted).toBe(true);
    expect(r1).toBeNull(); // superseded, never rendered
    expect(r2).toEqual({ ...OK, model_id: "second" });
  });

  test("network failure rejects so the caller can show the retry banner", async () => {
    const fetchStub: FetchLike = async () => {
      throw new TypeError("network down");
    };
    const client = new PredictClient("http://svc:1", fetchStub);
    await expect(
      client.predict({ current_hr: 1, current_bt: 37, age_months: 1 }),
    ).rejects.toThrow("network down");
  });

  test("HTTP error status rejects", async () => {
    const fetchStub: FetchLike = async () => jsonResponse({ error: "boom" }, 500);
    const client = new PredictClient("http://svc:1", fetchStub);
    await expect(
      client.predict({ current_hr: 1, current_bt: 37, age_months: 1 }),
    ).rejects.toThrow("HTTP 500");
  });
});
