import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    environment: "happy-dom",
    // The served origin must be on the suggestion service's CORS allowlist
    // for the live end-to-end test.
    environmentOptions: {
      happyDOM: { url: "http://localhost:5173" },
    },
    include: ["tests/**/*.test.ts"],
  },
});
