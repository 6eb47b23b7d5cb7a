import { describe, expect, it, vi } from "vitest";

import { SearchController } from "../src/search.js";
import type { SearchResponse } from "../src/types.js";

function response(): SearchResponse {
  return {
    query_id: "q1",
    query: "law",
    results: [
      {
        doc_id: "d1",
        title: "Doc",
        url: null,
        display_text: "text",
        source: "local_index",
        rank: 1,
        score: 2.0,
        highlighted: false,
      },
    ],
    timings_s: { retrieval_s: 0.01 },
    warnings: [],
  };
}

function makeHost() {
  const frames: string[] = [];
  return { frames, host: { render: (html: string) => frames.push(html) } };
}

describe("SearchController", () => {
  it("renders results for a query", async () => {
    const search = vi.fn().mockResolvedValue(response());
    const { frames, host } = makeHost();
    await new SearchController({ search }, host).submit("  law  ");
    expect(search).toHaveBeenCalledWith("law");
    expect(frames.at(-1)).toContain(`data-rank="1"`);
  });

  it("validates empty input inline and sends no request", async () => {
    const search = vi.fn();
    const { frames, host } = makeHost();
    await new SearchController({ search }, host).submit("   ");
    expect(search).not.toHaveBeenCalled();
    expect(frames.at(-1)).toContain("inline-validation");
  });

  it("shows an error banner on failure and retries the same query", async () => {
    const search = vi
      .fn()
      .mockRejectedValueOnce(new Error("boom"))
      .mockResolvedValueOnce(response());
    const { frames, host } = makeHost();
    const controller = new SearchController({ search }, host);
    await controller.submit("law");
    expect(frames.at(-1)).toContain("Search failed: boom");
    expect(frames.at(-1)).toContain(`data-action="retry"`);
    await controller.retry();
    expect(search).toHaveBeenNthCalledWith(2, "law");
    expect(frames.at(-1)).toContain(`data-rank="1"`);
  });

  it("retry before any query is a no-op", async () => {
    const search = vi.fn();
    const { frames, host } = makeHost();
    await new SearchController({ search }, host).retry();
    expect(search).not.toHaveBeenCalled();
    expect(frames).toHaveLength(0);
  });
});
