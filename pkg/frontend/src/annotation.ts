/** Annotation board: one blinded session, grade clicks, progress.
 *
 * Labels are acknowledge-then-render: the board state changes only after the
 * gateway confirms the write, so the store stays authoritative. A failed
 * post leaves the item exactly as it was and raises a toast.
 */

import type { GatewayClient } from "./api.js";
import { renderAnnotationBoard, renderErrorBanner, renderToast } from "./render.js";
import type { SessionView, Side } from "./types.js";

export interface BoardHost {
  render(html: string): void;
  toast(html: string): void;
}

export class AnnotationController {
  private view: SessionView | null = null;
  private pending = new Set<string>();

  constructor(
    private readonly api: Pick<GatewayClient, "getSession" | "submitLabel">,
    private readonly host: BoardHost,
  ) {}

  get session(): SessionView | null {
    return this.view;
  }

  adopt(view: SessionView): void {
    this.view = view;
    this.pending.clear();
    this.host.render(renderAnnotationBoard(view, this.pending));
  }

  async load(sessionId: string): Promise<void> {
    try {
      this.adopt(await this.api.getSession(sessionId));
    } catch (error) {
      const message = error instanceof Error ? error.message : String(error);
      this.host.render(renderErrorBanner(`Could not load session: ${message}`, false));
    }
  }

  /** Handle one grade-button click. Repeated clicks while a write for the
   * same position is in flight are ignored; relabeling after the ack
   * overwrites. */
  async handleGrade(side: Side, position: number, grade: number): Promise<void> {
    if (this.view === null) return;
    const key = `${side}:${position}`;
    if (this.pending.has(key)) return;
    this.pending.add(key);
    this.host.render(renderAnnotationBoard(this.view, this.pending));
    try {
      const ack = await this.api.submitLabel(this.view.session_id, side, position, grade);
      const item = this.view[side].find((i) => i.position === position);
      if (item) item.grade = ack.grade;
      this.view.labeled = ack.labeled;
    } catch (error) {
      const message = error instanceof Error ? error.message : String(error);
      this.host.toast(renderToast(`Label failed: ${message}`));
    } finally {
      this.pending.delete(key);
      this.host.render(renderAnnotationBoard(this.view, this.pending));
    }
  }
}
