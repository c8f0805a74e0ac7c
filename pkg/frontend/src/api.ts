/**
 * Service client. One in-flight prediction at a time: a new submission
 * aborts the previous request (newest wins), so a stale response can
 * never paint a verdict.
 */

export interface PredictRequestBody {
  current_hr: number;
  current_bt: number;
  age_months: number;
}

export type PredictResponse =
  | { status: "Ok"; quantiles: Record<string, number>; in_range: boolean; model_id: string }
  | { status: "OutOfDomain"; model_id: string }
  | { status: "InvalidInput"; reason?: string; model_id: string };

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class PredictClient {
  private controller: AbortController | null = null;

  constructor(
    private readonly baseUrl: string,
    private readonly fetchImpl: FetchLike = (...args) => fetch(...args),
  ) {}

  /**
   * POST the three inputs to /predict. Returns null when this request
   * was superseded by a newer one; throws on network or HTTP failure.
   */
  async predict(body: PredictRequestBody): Promise<PredictResponse | null> {
    this.controller?.abort();
    const controller = new AbortController();
    this.controller = controller;
    let response: Response;
    try {
      response = await this.fetchImpl(`${this.baseUrl}/predict`, {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify(body),
        signal: controller.signal,
      });
    } catch (err) {
      if (controller.signal.aborted) return null;
      throw err;
    }
    if (controller.signal.aborted) return null;
    if (!response.ok) {
      throw new Error(`service error: HTTP ${response.status}`);
    }
    return (await response.json()) as PredictResponse;
  }
}
