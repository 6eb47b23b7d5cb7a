/** Search view: validate, fetch, render. The host owns the actual DOM. */

import type { GatewayClient } from "./api.js";
import { renderErrorBanner, renderSearchResults, renderValidationHint } from "./render.js";

export interface Host {
  render(html: string): void;
}

export class SearchController {
  private lastQuery: string | null = null;

  constructor(
    private readonly api: Pick<GatewayClient, "search">,
    private readonly host: Host,
  ) {}

  /** Submit a query. Empty input renders inline validation and sends nothing. */
  async submit(query: string): Promise<void> {
    const trimmed = query.trim();
    if (!trimmed) {
      this.host.render(renderValidationHint("Enter a query first."));
      return;
    }
    this.lastQuery = trimmed;
    await this.run(trimmed);
  }

  /** Re-issue the last query (the error banner's retry affordance). */
  async retry(): Promise<void> {
    if (this.lastQuery !== null) {
      await this.run(this.lastQuery);
    }
  }

  private async run(query: string): Promise<void> {
    this.host.render(`<p class="loading">Searching…</p>`);
    try {
      const response = await this.api.search(query);
      this.host.render(renderSearchResults(response));
    } catch (error) {
      const message = error instanceof Error ? error.message : String(error);
      this.host.render(renderErrorBanner(`Search failed: ${message}`));
    }
  }
}
