/** Pure HTML renderers: every view is a function of gateway responses only.
 *
 * Nothing here touches the network or the DOM, so tests can snapshot the
 * output directly. Engine identities never appear — the gateway already
 * blinds sessions to "left"/"right" and these renderers add nothing.
 */

import type {
  AnnotationItem,
  GradeScale,
  SearchResponse,
  SearchResultEntry,
  SessionView,
  Side,
} from "./types.js";

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;")
    .replace(/'/g, "&#39;");
}

const GRADE_LABELS: Record<GradeScale, [number, string][]> = {
  binary: [
    [0, "Not relevant"],
    [1, "Relevant"],
  ],
  graded: [
    [0, "Not relevant"],
    [1, "On topic"],
    [2, "Relevant"],
  ],
};

export function renderResultCard(entry: SearchResultEntry): string {
  const title = entry.title ?? entry.doc_id;
  const heading = entry.url
    ? `<a href="${escapeHtml(entry.url)}" target="_blank" rel="noopener">${escapeHtml(title)}</a>`
    : escapeHtml(title);
  const textClass = entry.highlighted ? "display-text highlighted" : "display-text";
  return `
<article class="result-card" data-rank="${entry.rank}">
  <div class="result-head">
    <span class="rank">${entry.rank}</span>
    <h3>${heading}</h3>
    <span class="source-badge">${escapeHtml(entry.source)}</span>
  </div>
  <p class="${textClass}">${escapeHtml(entry.display_text)}</p>
</article>`.trim();
}

export function renderTimingsFooter(timings: Record<string, number>): string {
  const parts = Object.entries(timings)
    .map(([stage, seconds]) => `${escapeHtml(stage.replace(/_s$/, ""))} ${(seconds * 1000).toFixed(0)}ms`)
    .join(" · ");
  return `<footer class="timings">${parts}</footer>`;
}

export function renderSearchResults(response: SearchResponse): string {
  const warnings = response.warnings.length
    ? `<div class="banner warning">${response.warnings.map(escapeHtml).join("<br>")}</div>`
    : "";
  if (response.results.length === 0) {
    return `${warnings}<p class="empty">No results for “${escapeHtml(response.query)}”.</p>`;
  }
  // gateway order is authoritative: render in array order, never re-sort
  const cards = response.results.map(renderResultCard).join("\n");
  return `${warnings}\n<div class="results">\n${cards}\n</div>\n${renderTimingsFooter(response.timings_s)}`;
}

export function renderErrorBanner(message: string, retryable = true): string {
  const retry = retryable ? ` <button type="button" data-action="retry">Retry</button>` : "";
  return `<div class="banner error">${escapeHtml(message)}${retry}</div>`;
}

export function renderValidationHint(message: string): string {
  return `<p class="inline-validation">${escapeHtml(message)}</p>`;
}

function renderGradeButtons(
  scale: GradeScale,
  side: Side,
  item: AnnotationItem,
  pending: boolean,
): string {
  return GRADE_LABELS[scale]
    .map(([grade, label]) => {
      const selected = item.grade === grade ? " selected" : "";
      const disabled = pending ? " disabled" : "";
      return (
        `<button type="button" class="grade${selected}" data-side="${side}" ` +
        `data-position="${item.position}" data-grade="${grade}"${disabled}>${label}</button>`
      );
    })
    .join("");
}

function renderAnnotationItem(
  scale: GradeScale,
  side: Side,
  item: AnnotationItem,
  pending: boolean,
): string {
  const title = escapeHtml(item.title ?? item.doc_id);
  const status = item.grade !== null ? `<span class="labeled-mark">✓</span>` : "";
  return `
<li class="annotation-item${item.grade !== null ? " labeled" : ""}">
  <div class="item-head"><span class="rank">${item.position}</span> <strong>${title}</strong> ${status}</div>
  <p class="display-text">${escapeHtml(item.display_text)}</p>
  <div class="grade-buttons">${renderGradeButtons(scale, side, item, pending)}</div>
</li>`.trim();
}

export function renderColumn(
  view: SessionView,
  side: Side,
  pendingKeys: ReadonlySet<string>,
): string {
  const items = view[side]
    .map((item) => renderAnnotationItem(view.grade_scale, side, item, pendingKeys.has(`${side}:${item.position}`)))
    .join("\n");
  const label = side === "left" ? "Left" : "Right";
  return `<section class="column" data-side="${side}"><h2>${label}</h2><ol>\n${items}\n</ol></section>`;
}

export function renderAnnotationBoard(
  view: SessionView,
  pendingKeys: ReadonlySet<string> = new Set(),
): string {
  const done = view.labeled >= view.label_total;
  const progress = `<span class="progress">${view.labeled}/${view.label_total} labeled</span>`;
  const doneNote = done
    ? `<div class="banner done">All positions labeled — export judgments with ` +
      `<code>nsx export-judgments</code>.</div>`
    : "";
  return `
<header class="board-head">
  <h1>Which results are relevant for: “${escapeHtml(view.query)}”?</h1>
  ${progress}
</header>
${doneNote}
<div class="board">
${renderColumn(view, "left", pendingKeys)}
${renderColumn(view, "right", pendingKeys)}
</div>`.trim();
}

export function renderToast(message: string): string {
  return `<div class="toast error">${escapeHtml(message)}</div>`;
}
