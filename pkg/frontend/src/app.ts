import { ApiError, ClassifyClient, isAbort } from "./api.js";
import { DecisionLog, makeDecision } from "./decisions.js";
import type { ClassEntry, ClassifyResponse, SuggestionView } from "./types.js";

export interface AppOptions {
  client?: ClassifyClient;
  log?: DecisionLog;
  classList?: ClassEntry[];
}

export function percentOf(probability: number): number {
  return Math.round(probability * 100);
}

const SKELETON = `
  <h1>categoriza</h1>
  <form id="classify-form">
    <textarea id="description-input" rows="3"
      placeholder="paste the purchase description"></textarea>
    <button type="submit">Suggest classes</button>
  </form>
  <p id="form-error" class="error" hidden></p>
  <div id="error-banner" hidden>
    <span id="error-text"></span>
    <button type="button" id="retry-button">Retry</button>
  </div>
  <p id="fallback-notice" hidden>
    No word of this description is in the model vocabulary, so these
    suggestions rest on class frequencies alone.
  </p>
  <section id="suggestion-cards" aria-label="suggestions"></section>
  <section id="override-panel" hidden>
    <label for="class-search">Or pick a different class</label>
    <input id="class-search" type="search" placeholder="search by code or name">
    <ul id="class-matches"></ul>
  </section>
  <section id="decision-panel">
    <h2>Decisions</h2>
    <button type="button" id="export-button">Export JSONL</button>
    <textarea id="export-output" rows="4" readonly hidden></textarea>
    <ol id="decision-list"></ol>
  </section>
  <footer id="health-line"></footer>
`;

interface AppState {
  description: string;
  response: ClassifyResponse;
  views: SuggestionView[];
}

export function setupApp(root: HTMLElement, options: AppOptions = {}): void {
  const client = options.client ?? new ClassifyClient();
  const log = options.log ?? new DecisionLog();
  const classList = options.classList ?? [];

  root.innerHTML = SKELETON;
  const find = <T extends HTMLElement>(id: string): T => {
    const el = root.querySelector<T>(`#${id}`);
    if (!el) {
      throw new Error(`missing element #${id}`);
    }
    return el;
  };

  const form = find<HTMLFormElement>("classify-form");
  const input = find<HTMLTextAreaElement>("description-input");
  const formError = find<HTMLParagraphElement>("form-error");
  const banner = find<HTMLDivElement>("error-banner");
  const bannerText = find<HTMLSpanElement>("error-text");
  const retryButton = find<HTMLButtonElement>("retry-button");
  const fallbackNotice = find<HTMLParagraphElement>("fallback-notice");
  const cards = find<HTMLElement>("suggestion-cards");
  const overridePanel = find<HTMLElement>("override-panel");
  const searchInput = find<HTMLInputElement>("class-search");
  const matches = find<HTMLUListElement>("class-matches");
  const exportButton = find<HTMLButtonElement>("export-button");
  const exportOutput = find<HTMLTextAreaElement>("export-output");
  const decisionList = find<HTMLOListElement>("decision-list");
  const healthLine = find<HTMLElement>("health-line");

  let state: AppState | null = null;

  function renderCards(): void {
    cards.innerHTML = "";
    if (!state) {
      return;
    }
    for (const view of state.views) {
      const card = document.createElement("button");
      card.type = "button";
      card.className = view.selected ? "card selected" : "card";
      card.dataset.code = view.classCode;
      const code = document.createElement("span");
      code.className = "code";
      code.textContent = `#${view.classCode}`;
      const label = document.createElement("span");
      label.className = "label";
      label.textContent = view.label ?? "";
      const percent = document.createElement("span");
      percent.className = "percent";
      percent.textContent = `${view.probabilityPercent}%`;
      card.append(code, label, percent);
      card.addEventListener("click", () => choose(view.classCode));
      cards.appendChild(card);
    }
  }

  function renderDecisions(): void {
    decisionList.innerHTML = "";
    for (const record of log.all()) {
      const item = document.createElement("li");
      const verdict = record.accepted ? "accepted" : "override";
      item.textContent =
        `${record.timestamp} ${record.chosen} (${verdict}): ${record.description}`;
      decisionList.appendChild(item);
    }
  }

  function choose(code: string): void {
    if (!state) {
      return;
    }
    const suggestedCodes = state.response.suggestions.map((s) => s.class_code);
    log.append(makeDecision(state.description, suggestedCodes, code));
    state.views = state.views.map((view) => ({
      ...view,
      selected: view.classCode === code,
    }));
    renderCards();
    renderDecisions();
  }

  function showResponse(description: string, response: ClassifyResponse): void {
    state = {
      description,
      response,
      // views mirror the response order exactly; the UI never re-sorts
      views: response.suggestions.map((s) => ({
        classCode: s.class_code,
        label: s.label,
        probabilityPercent: percentOf(s.probability),
        selected: false,
      })),
    };
    fallbackNotice.hidden = !response.fallback;
    overridePanel.hidden = false;
    renderCards();
  }

  async function submit(description: string): Promise<void> {
    formError.hidden = true;
    banner.hidden = true;
    try {
      const response = await client.classify(description);
      showResponse(description, response);
    } catch (err) {
      if (isAbort(err)) {
        return; // a newer submit took over
      }
      if (err instanceof ApiError) {
        formError.textContent = err.message;
        formError.hidden = false;
      } else {
        bannerText.textContent = "the classification service did not answer";
        banner.hidden = false;
      }
    }
  }

  form.addEventListener("submit", (event) => {
    event.preventDefault();
    const description = input.value.trim();
    if (!description) {
      formError.textContent = "enter a description first";
      formError.hidden = false;
      return;
    }
    void submit(description);
  });

  retryButton.addEventListener("click", () => {
    const description = input.value.trim();
    if (description) {
      void submit(description);
    }
  });

  function renderMatches(query: string): void {
    matches.innerHTML = "";
    if (!query) {
      return;
    }
    const lowered = query.toLowerCase();
    const hits = classList
      .filter(
        (entry) =>
          entry.code.startsWith(query) ||
          entry.label.toLowerCase().includes(lowered),
      )
      .slice(0, 20);
    // a bare 4-digit code can be chosen even without a catalog entry
    if (/^\d{4}$/.test(query) && !hits.some((entry) => entry.code === query)) {
      hits.push({ code: query, label: "(code entered directly)" });
    }
    for (const entry of hits) {
      const item = document.createElement("li");
      const pick = document.createElement("button");
      pick.type = "button";
      pick.dataset.code = entry.code;
      pick.textContent = `#${entry.code} ${entry.label}`;
      pick.addEventListener("click", () => choose(entry.code));
      item.appendChild(pick);
      matches.appendChild(item);
    }
  }

  searchInput.addEventListener("input", () => {
    renderMatches(searchInput.value.trim());
  });

  exportButton.addEventListener("click", () => {
    const jsonl = log.exportJsonl();
    exportOutput.value = jsonl;
    exportOutput.hidden = false;
    downloadJsonl(jsonl);
  });

  renderDecisions();

  client
    .health()
    .then((health) => {
      healthLine.textContent =
        `model ${health.model_version}, ${health.class_count} classes`;
    })
    .catch(() => {
      healthLine.textContent = "service unreachable";
    });
}

function downloadJsonl(jsonl: string): void {
  // test environments have no object URLs; the textarea is the fallback
  if (typeof URL.createObjectURL !== "function") {
    return;
  }
  const blob = new Blob([jsonl], { type: "application/jsonl" });
  const url = URL.createObjectURL(blob);
  const anchor = document.createElement("a");
  anchor.href = url;
  anchor.download = "decisions.jsonl";
  anchor.click();
  URL.revokeObjectURL(url);
}
