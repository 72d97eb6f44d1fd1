import { defineConfig } from 'vitest/config';

export default defineConfig({
  test: {
    include: ['tests/**/*.test.ts'],
    environment: 'node',
    // the e2e spec generates a pipeline run and boots the engine server
    testTimeout: 60_000,
    hookTimeout: 240_000,
  },
});
