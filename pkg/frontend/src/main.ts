/** DOM bootstrap: tab switching and event delegation into the controllers. */

import { GatewayClient } from "./api.js";
import { AnnotationController } from "./annotation.js";
import { SearchController } from "./search.js";
import type { Side } from "./types.js";

function requireEl<T extends Element>(selector: string): T {
  const el = document.querySelector<T>(selector);
  if (!el) throw new Error(`missing element ${selector}`);
  return el;
}

export function boot(baseUrl = ""): void {
  const api = new GatewayClient(baseUrl);

  const searchOutput = requireEl<HTMLDivElement>("#search-output");
  const search = new SearchController(api, {
    render: (html) => {
      searchOutput.innerHTML = html;
    },
  });

  const boardOutput = requireEl<HTMLDivElement>("#board-output");
  const toastArea = requireEl<HTMLDivElement>("#toast-area");
  const annotation = new AnnotationController(api, {
    render: (html) => {
      boardOutput.innerHTML = html;
    },
    toast: (html) => {
      toastArea.innerHTML = html;
      window.setTimeout(() => {
        toastArea.innerHTML = "";
      }, 4000);
    },
  });

  requireEl<HTMLFormElement>("#search-form").addEventListener("submit", (event) => {
    event.preventDefault();
    void search.submit(requireEl<HTMLInputElement>("#search-input").value);
  });
  searchOutput.addEventListener("click", (event) => {
    const target = event.target as HTMLElement;
    if (target.matches("[data-action='retry']")) void search.retry();
  });

  requireEl<HTMLFormElement>("#session-form").addEventListener("submit", (event) => {
    event.preventDefault();
    const sessionId = requireEl<HTMLInputElement>("#session-input").value.trim();
    if (sessionId) void annotation.load(sessionId);
  });
  boardOutput.addEventListener("click", (event) => {
    const target = event.target as HTMLElement;
    if (target.matches("button.grade")) {
      const side = target.dataset.side as Side;
      void annotation.handleGrade(
        side,
        Number(target.dataset.position),
        Number(target.dataset.grade),
      );
    }
  });

  for (const tab of document.querySelectorAll<HTMLButtonElement>("[data-view]")) {
    tab.addEventListener("click", () => {
      for (const panel of document.querySelectorAll<HTMLElement>(".view")) {
        panel.hidden = panel.id !== `view-${tab.dataset.view}`;
      }
      for (const other of document.querySelectorAll<HTMLButtonElement>("[data-view]")) {
        other.classList.toggle("active", other === tab);
      }
    });
  }
}

if (typeof document !== "undefined" && document.getElementById("search-form")) {
  boot();
}
