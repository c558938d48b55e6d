/** Composer state and its pure transitions. */

export interface TagSuggestion {
  name: string;
  score: number;
}

export const MAX_SELECTED = 5;

export interface ComposerState {
  title: string;
  description: string;
  codeSnippet: string;
  /** Service-ordered suggestions; the UI never reorders them. */
  suggestions: TagSuggestion[];
  selected: string[];
  requestInFlight: boolean;
  lastError: string | null;
  notice: string | null;
  /** Sequence number of the newest request issued. */
  latestSeq: number;
}

export function initialState(): ComposerState {
  return {
    title: "",
    description: "",
    codeSnippet: "",
    suggestions: [],
    selected: [],
    requestInFlight: false,
    lastError: null,
    notice: null,
    latestSeq: 0,
  };
}

export function editField(
  state: ComposerState,
  field: "title" | "description" | "codeSnippet",
  value: string,
): ComposerState {
  return { ...state, [field]: value };
}

/** Issue a new request sequence number and mark the request in flight. */
export function beginRequest(state: ComposerState): { state: ComposerState; seq: number } {
  const seq = state.latestSeq + 1;
  return { state: { ...state, latestSeq: seq, requestInFlight: true }, seq };
}

/**
 * Adopt a response unless a newer request has been issued since; stale
 * responses leave the state untouched. Selection always survives a refresh.
 */
export function applyResponse(
  state: ComposerState,
  seq: number,
  suggestions: TagSuggestion[],
): ComposerState {
  if (seq < state.latestSeq) {
    return state;
  }
  return {
    ...state,
    suggestions: [...suggestions],
    requestInFlight: false,
    lastError: null,
  };
}

/** Service failures keep the last good suggestions visible. */
export function applyError(state: ComposerState, seq: number, message: string): ComposerState {
  if (seq < state.latestSeq) {
    return state;
  }
  return { ...state, requestInFlight: false, lastError: message };
}

/** A suggest request is worthwhile only once there is a title to send. */
export function shouldRequest(state: ComposerState): boolean {
  return state.title.trim().length > 0;
}

export function toggleTag(state: ComposerState, name: string): ComposerState {
  if (state.selected.includes(name)) {
    return { ...state, selected: state.selected.filter((t) => t !== name), notice: null };
  }
  if (state.selected.length >= MAX_SELECTED) {
    return { ...state, notice: `At most ${MAX_SELECTED} tags can be selected.` };
  }
  return { ...state, selected: [...state.selected, name], notice: null };
}
