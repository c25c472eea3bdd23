/** Dashboard view logic: a tracked-pages table, an add form, and a
 * per-page history panel. All state shown comes straight from API
 * responses; after any action the listing is re-fetched. */

import { ApiError, addPage, findAgain, getHistory, getKit, listPages } from "./api.js";
import { historyChart } from "./chart.js";
import type { HistoryEntry, KitEntry, PageSummary } from "./types.js";
import { formatValue } from "./types.js";

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

export class App {
  private pages: PageSummary[] = [];
  private notice = "";
  private error = "";
  private historyFor: PageSummary | null = null;
  private historyEntries: HistoryEntry[] = [];
  private kitEntries: KitEntry[] = [];
  private inflight: Promise<void> = Promise.resolve();

  constructor(private root: HTMLElement) {}

  /** Resolves when the last user-triggered action has settled. */
  settle(): Promise<void> {
    return this.inflight;
  }

  private track(work: Promise<void>): void {
    this.inflight = work.catch(() => undefined);
  }

  async init(): Promise<void> {
    await this.refresh();
  }

  async refresh(): Promise<void> {
    try {
      this.pages = await listPages();
      this.error = "";
    } catch {
      this.error = "The tracking service is unreachable.";
    }
    this.render();
  }

  async add(url: string): Promise<void> {
    this.notice = "";
    try {
      await addPage(url);
    } catch (err) {
      if (err instanceof ApiError && err.status === 409) {
        this.notice = "Already tracked: that URL is in the list below.";
      } else if (err instanceof ApiError) {
        this.notice = `Could not add the page: ${JSON.stringify(err.detail)}`;
      } else {
        this.notice = "The tracking service is unreachable.";
      }
    }
    await this.refresh();
  }

  async findAgainFor(id: string): Promise<void> {
    this.notice = "";
    try {
      await findAgain(id);
    } catch (err) {
      if (err instanceof ApiError && err.status === 404) {
        this.notice = "That page is gone from the store; the row was removed.";
      } else {
        this.notice = "The tracking service is unreachable.";
      }
    }
    if (this.historyFor?.id === id) {
      await this.loadHistory(this.historyFor);
      return;
    }
    await this.refresh();
  }

  async loadHistory(page: PageSummary): Promise<void> {
    try {
      this.historyEntries = await getHistory(page.id);
      this.kitEntries = await getKit(page.id);
      this.historyFor = page;
    } catch {
      this.notice = "Could not load the history.";
      this.historyFor = null;
    }
    await this.refresh();
  }

  closeHistory(): void {
    this.historyFor = null;
    this.render();
  }

  // -- rendering ---------------------------------------------------------

  private render(): void {
    this.root.replaceChildren();
    this.root.appendChild(el("h1", "title", "pricewatch"));

    if (this.error) {
      const banner = el("div", "banner error", this.error + " ");
      const retry = el("button", "retry", "Retry");
      retry.onclick = () => this.track(this.refresh());
      banner.appendChild(retry);
      this.root.appendChild(banner);
    }
    if (this.notice) {
      this.root.appendChild(el("div", "banner notice", this.notice));
    }

    this.root.appendChild(this.addForm());
    this.root.appendChild(this.pageTable());
    if (this.historyFor) {
      this.root.appendChild(this.historyPanel(this.historyFor));
    }
  }

  private addForm(): HTMLElement {
    const form = el("form", "add-form");
    const input = el("input");
    input.type = "url";
    input.placeholder = "https://shop.example/product";
    input.className = "url-input";
    const button = el("button", "add", "Follow this price");
    button.type = "submit";
    form.append(input, button);
    form.onsubmit = (event) => {
      event.preventDefault();
      if (input.value) {
        this.track(this.add(input.value));
      }
    };
    return form;
  }

  private pageTable(): HTMLElement {
    if (this.pages.length === 0 && !this.error) {
      return el("p", "empty-state",
        "Nothing tracked yet. Paste a product page URL above to follow its price.");
    }
    const table = el("table", "pages");
    const head = el("tr");
    for (const label of ["page", "latest price", "status", "checked", ""]) {
      head.appendChild(el("th", undefined, label));
    }
    table.appendChild(head);
    for (const page of this.pages) {
      table.appendChild(this.pageRow(page));
    }
    return table;
  }

  private pageRow(page: PageSummary): HTMLElement {
    const row = el("tr", "page-row");
    row.dataset.id = page.id;

    const name = el("td", "page-url");
    const link = el("a", undefined, page.title || page.url);
    link.setAttribute("href", page.url);
    name.appendChild(link);
    row.appendChild(name);

    const value = el("td", "page-value");
    if (page.latest_outcome === "MANY_PRICES") {
      // Candidates live in the history payload; expanding fetches it.
      const expand = el("button", "expand-candidates", "several prices …");
      expand.onclick = () => this.track(this.loadHistory(page));
      value.appendChild(expand);
    } else {
      value.textContent = page.latest_value ? formatValue(page.latest_value) : "—";
    }
    row.appendChild(value);

    const status = el("td");
    const badge = el("span",
      `badge badge-${(page.latest_outcome ?? "none").toLowerCase()}`,
      page.latest_outcome ?? "never checked");
    status.appendChild(badge);
    row.appendChild(status);

    row.appendChild(el("td", "page-checked", page.checked_at ?? ""));

    const actions = el("td", "page-actions");
    const againButton = el("button", "find-again", "Find again");
    againButton.onclick = () => this.track(this.findAgainFor(page.id));
    const historyButton = el("button", "show-history", "History");
    historyButton.onclick = () => this.track(this.loadHistory(page));
    actions.append(againButton, historyButton);
    row.appendChild(actions);
    return row;
  }

  private historyPanel(page: PageSummary): HTMLElement {
    const panel = el("section", "history-panel");
    const heading = el("h2", undefined, `History of ${page.title || page.url}`);
    const close = el("button", "close-history", "Close");
    close.onclick = () => this.closeHistory();
    heading.appendChild(close);
    panel.appendChild(heading);

    panel.appendChild(historyChart(this.historyEntries));

    const table = el("table", "history");
    const head = el("tr");
    for (const label of ["when", "status", "price", "route"]) {
      head.appendChild(el("th", undefined, label));
    }
    table.appendChild(head);
    for (const entry of this.historyEntries) {
      const row = el("tr", "history-row");
      row.appendChild(el("td", "history-ts", entry.timestamp));
      row.appendChild(el("td", "history-code", entry.code));
      let shown = "—";
      if (entry.value) {
        shown = formatValue(entry.value);
      } else if (entry.candidates?.length) {
        shown = `${entry.candidates.length} candidates: ` +
          entry.candidates.map(formatValue).join(", ");
      }
      row.appendChild(el("td", "history-value", shown));
      row.appendChild(el("td", "history-route",
        entry.from_scratch ? "from scratch" : "pattern"));
      table.appendChild(row);
    }
    panel.appendChild(table);

    if (this.kitEntries.length > 0) {
      const kitHeading = el("h3", undefined,
        `Extraction kit (${this.kitEntries.length} patterns)`);
      panel.appendChild(kitHeading);
      const list = el("ul", "kit");
      for (const entry of this.kitEntries) {
        list.appendChild(el("li", "kit-pattern",
          `${entry.created_at}  ${entry.expression}`));
      }
      panel.appendChild(list);
    }
    return panel;
  }
}
