/** Imperative DOM rendering for suggestion chips, selection, and status. */

import type { ComposerState } from "./state.js";

export interface RenderOptions {
  showScores: boolean;
}

export function renderSuggestions(
  container: HTMLElement,
  state: ComposerState,
  onToggle: (name: string) => void,
  options: RenderOptions = { showScores: true },
): void {
  container.replaceChildren();
  for (const suggestion of state.suggestions) {
    const chip = container.ownerDocument.createElement("button");
    chip.type = "button";
    chip.className = "chip";
    const active = state.selected.includes(suggestion.name);
    if (active) {
      chip.classList.add("active");
    }
    chip.dataset.tag = suggestion.name;
    const label = container.ownerDocument.createElement("span");
    label.className = "chip-name";
    label.textContent = suggestion.name;
    chip.appendChild(label);
    if (options.showScores) {
      const score = container.ownerDocument.createElement("span");
      score.className = "chip-score";
      score.textContent = suggestion.score.toFixed(2);
      chip.appendChild(score);
    }
    chip.addEventListener("click", () => onToggle(suggestion.name));
    container.appendChild(chip);
  }
}

export function renderSelected(
  container: HTMLElement,
  state: ComposerState,
  onRemove: (name: string) => void,
): void {
  container.replaceChildren();
  for (const name of state.selected) {
    const chip = container.ownerDocument.createElement("button");
    chip.type = "button";
    chip.className = "chip selected";
    chip.dataset.tag = name;
    chip.textContent = `${name} ×`;
    chip.addEventListener("click", () => onRemove(name));
    container.appendChild(chip);
  }
}

export function renderStatus(
  errorBanner: HTMLElement,
  noticeArea: HTMLElement,
  state: ComposerState,
): void {
  errorBanner.textContent = state.lastError ?? "";
  errorBanner.hidden = state.lastError === null;
  noticeArea.textContent = state.notice ?? "";
  noticeArea.hidden = state.notice === null;
}
