import { ServiceClient, ServiceError } from "./api.js";
import { buildBody } from "./codeblock.js";
import { renderSelected, renderStatus, renderSuggestions } from "./chips.js";
import { SuggestController } from "./controller.js";
import { Debouncer } from "./debounce.js";
import { loadConfig } from "./config.js";
import {
  applyError,
  applyResponse,
  beginRequest,
  editField,
  initialState,
  shouldRequest,
  toggleTag,
  type ComposerState,
} from "./state.js";

function byId<T extends HTMLElement>(id: string): T {
  const el = document.getElementById(id);
  if (!el) {
    throw new Error(`missing element #${id}`);
  }
  return el as T;
}

async function start(): Promise<void> {
  const config = await loadConfig();
  const client = new ServiceClient(config.baseUrl);
  const debouncer = new Debouncer();

  const title = byId<HTMLInputElement>("title");
  const description = byId<HTMLTextAreaElement>("description");
  const codeSnippet = byId<HTMLTextAreaElement>("code");
  const suggestionArea = byId<HTMLElement>("suggestions");
  const selectedArea = byId<HTMLElement>("selected");
  const errorBanner = byId<HTMLElement>("error-banner");
  const noticeArea = byId<HTMLElement>("notice");
  const hint = byId<HTMLElement>("hint");

  let state: ComposerState = initialState();

  function render(): void {
    renderSuggestions(suggestionArea, state, onToggle, { showScores: config.showScores });
    renderSelected(selectedArea, state, onToggle);
    renderStatus(errorBanner, noticeArea, state);
    hint.hidden = shouldRequest(state);
  }

  function onToggle(name: string): void {
    state = toggleTag(state, name);
    render();
  }

  const controller = new SuggestController(async () => {
    const begun = beginRequest(state);
    state = begun.state;
    try {
      const response = await client.suggest({
        title: state.title,
        body: buildBody(state.description, state.codeSnippet),
        k: 5,
      });
      state = applyResponse(state, begun.seq, response.tags);
    } catch (err) {
      const message = err instanceof ServiceError ? err.message : "service unreachable";
      state = applyError(state, begun.seq, message);
    }
    render();
  });

  function onEdit(field: "title" | "description" | "codeSnippet", value: string): void {
    state = editField(state, field, value);
    render();
    debouncer.schedule(() => {
      if (shouldRequest(state)) {
        void controller.request();
      }
    });
  }

  title.addEventListener("input", () => onEdit("title", title.value));
  description.addEventListener("input", () => onEdit("description", description.value));
  codeSnippet.addEventListener("input", () => onEdit("codeSnippet", codeSnippet.value));
  render();
}

void start();
