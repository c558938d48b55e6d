/** Builds the submitted body so the service's HTML path sees the code area. */

export function escapeHtml(raw: string): string {
  return raw
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

/**
 * Wrap a non-empty snippet in an escaped <pre><code> block after the
 * description; an empty snippet leaves the body as plain description text.
 */
export function buildBody(description: string, snippet: string): string {
  if (!snippet) {
    return description;
  }
  const block = `<pre><code>${escapeHtml(snippet)}</code></pre>`;
  return description ? `${description}\n${block}` : block;
}
