/**
 * Browser shell: mounts the controllers, polls the API, and routes DOM
 * events. All rendering logic lives in the controllers (src/views/*),
 * which are plain string renderers tested without a DOM; this file is the
 * only one that touches `document`.
 */

import { PortalClient } from "./api.js";
import { loadConfig } from "./config.js";
import { AnchorController } from "./views/anchor.js";
import { DashboardController } from "./views/dashboard.js";
import { ExplorerController } from "./views/explorer.js";
import { LookupController } from "./views/lookup.js";

const TABS = ["dashboard", "anchoring", "lookup", "explorer"] as const;
type Tab = (typeof TABS)[number];

function must(id: string): HTMLElement {
  const el = document.getElementById(id);
  if (!el) {
    throw new Error(`portal markup is missing #${id}`);
  }
  return el;
}

export function startPortal(): void {
  const config = loadConfig();
  const client = new PortalClient(config);
  const dashboard = new DashboardController(client, config);
  const anchor = new AnchorController(client, config);
  const lookup = new LookupController(client, config);
  const explorer = new ExplorerController(client);

  const containers: Record<Tab, HTMLElement> = {
    dashboard: must("tab-dashboard"),
    anchoring: must("tab-anchoring"),
    lookup: must("tab-lookup"),
    explorer: must("tab-explorer"),
  };
  let active: Tab = "dashboard";
  let lastHistoryRender = "";

  function show(tab: Tab): void {
    active = tab;
    for (const name of TABS) {
      containers[name].hidden = name !== tab;
      document
        .querySelector(`[data-tab="${name}"]`)
        ?.classList.toggle("active", name === tab);
    }
  }

  function paintDashboard(): void {
    containers.dashboard.innerHTML = dashboard.render();
  }

  function paintAnchor(force = false): void {
    const html = anchor.render();
    // polls repaint only on change, so the select keeps focus while idle
    if (force || html !== lastHistoryRender) {
      containers.anchoring.innerHTML = html;
      lastHistoryRender = html;
    }
  }

  function paintLookup(): void {
    containers.lookup.innerHTML = lookup.render();
  }

  function paintExplorer(): void {
    containers.explorer.innerHTML = explorer.render();
  }

  async function poll(): Promise<void> {
    await Promise.all([dashboard.refresh(), anchor.refreshHistory()]);
    paintDashboard();
    paintAnchor();
  }

  document.addEventListener("click", (event) => {
    const target = event.target as HTMLElement;
    const tabButton = target.closest<HTMLElement>("[data-tab]");
    if (tabButton?.dataset.tab) {
      show(tabButton.dataset.tab as Tab);
      return;
    }
    const link = target.closest<HTMLElement>("a[data-selector]");
    if (link?.dataset.selector) {
      event.preventDefault();
      show("explorer");
      void explorer.open(link.dataset.selector).then(paintExplorer);
      paintExplorer();
      return;
    }
    const action = target.closest<HTMLElement>("[data-action]");
    switch (action?.dataset.action) {
      case "trigger":
        paintAnchor(true); // disabled state while in flight
        void anchor.trigger().then(() => paintAnchor(true));
        break;
      case "acknowledge-notice":
      case "dismiss-notice":
        anchor.acknowledge();
        paintAnchor(true);
        break;
      case "explore-latest":
        void explorer.open("latest").then(paintExplorer);
        paintExplorer();
        break;
    }
  });

  document.addEventListener("change", (event) => {
    const select = event.target as HTMLSelectElement;
    if (select.closest("[data-action='select-backend']")) {
      anchor.selectBackend(select.value);
    }
  });

  document.addEventListener("submit", (event) => {
    const form = event.target as HTMLFormElement;
    const action = form.dataset.action;
    if (action !== "lookup" && action !== "explore") {
      return;
    }
    event.preventDefault();
    if (action === "lookup") {
      const input = form.elements.namedItem("md5") as HTMLInputElement;
      lookup.setInput(input.value);
      void lookup.submit().then(paintLookup);
      paintLookup();
    } else {
      const input = form.elements.namedItem("selector") as HTMLInputElement;
      void explorer.open(input.value).then(paintExplorer);
      paintExplorer();
    }
  });

  show(active);
  paintDashboard();
  paintAnchor(true);
  paintLookup();
  paintExplorer();
  void poll();
  setInterval(() => void poll(), config.pollMs);
}

startPortal();
