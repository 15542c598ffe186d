import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    environment: "jsdom",
    include: ["tests/**/*.test.ts"],
    // The live-service flow test trains a small fixture model on first run.
    testTimeout: 120_000,
    hookTimeout: 180_000,
  },
});
