/** Thin fetch client for the gateway. All UI data flows through here. */

import type { LabelAck, SearchResponse, SessionView, Side } from "./types.js";

export class GatewayError extends Error {
  constructor(message: string, readonly status: number | null = null) {
    super(message);
  }
}

async function asJson<T>(response: Response): Promise<T> {
  if (!response.ok) {
    let detail = `${response.status}`;
    try {
      const body = await response.json();
      if (body && typeof body.detail === "string") detail = body.detail;
    } catch {
      /* non-JSON error body; keep the status text */
    }
    throw new GatewayError(detail, response.status);
  }
  return (await response.json()) as T;
}

export class GatewayClient {
  constructor(readonly baseUrl: string = "") {}

  private url(path: string): string {
    return `${this.baseUrl}${path}`;
  }

  async search(query: string, k?: number): Promise<SearchResponse> {
    const params = new URLSearchParams({ q: query });
    if (k !== undefined) params.set("k", String(k));
    return asJson(await fetch(this.url(`/search?${params}`)));
  }

  async createSession(query: string, engineA: string, engineB: string): Promise<SessionView> {
    return asJson(
      await fetch(this.url("/annotation/session"), {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify({ query, engine_a: engineA, engine_b: engineB }),
      }),
    );
  }

  async getSession(sessionId: string): Promise<SessionView> {
    return asJson(await fetch(this.url(`/annotation/${encodeURIComponent(sessionId)}`)));
  }

  async submitLabel(
    sessionId: string,
    side: Side,
    position: number,
    grade: number,
  ): Promise<LabelAck> {
    return asJson(
      await fetch(this.url(`/annotation/${encodeURIComponent(sessionId)}/label`), {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify({ side, position, grade }),
      }),
    );
  }
}
