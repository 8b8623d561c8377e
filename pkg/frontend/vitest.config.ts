import { defineConfig } from "vitest/config";

// conformance tests spawn the python server and replay subprocesses
export default defineConfig({
  test: {
    testTimeout: 120_000,
    hookTimeout: 60_000,
  },
});
