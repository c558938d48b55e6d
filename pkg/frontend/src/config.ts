/** Runtime configuration: optional config.json next to the static bundle. */

export interface UiConfig {
  baseUrl: string;
  showScores: boolean;
}

export const DEFAULT_CONFIG: UiConfig = {
  baseUrl: "http://127.0.0.1:8080",
  showScores: true,
};

export async function loadConfig(fetchFn: typeof fetch = globalThis.fetch): Promise<UiConfig> {
  try {
    const response = await fetchFn("./config.json");
    if (response.ok) {
      return { ...DEFAULT_CONFIG, ...((await response.json()) as Partial<UiConfig>) };
    }
  } catch {
    // missing config file falls back to defaults
  }
  return { ...DEFAULT_CONFIG };
}
