// Canonical server payloads the tests build on; shapes mirror the
// HTTP API responses exactly.

import { LayoutJson, RunJson, SessionJson } from "../src/types.js";

export const PANDA_LAYOUT: LayoutJson = {
  canvas: [512, 512],
  background_prompt: "A watercolor painting of a forest",
  objects: [
    { description: "a panda eating bambooo", box: [30, 133, 212, 226] },
    { description: "a panda eating bambooo", box: [262, 137, 222, 221] },
  ],
};

export const PANDA_PLUS_DOG: LayoutJson = {
  canvas: [512, 512],
  background_prompt: "A watercolor painting of a forest",
  objects: [
    { description: "a panda eating bambooo", box: [30, 133, 212, 226] },
    { description: "a panda eating bambooo", box: [262, 137, 222, 221] },
    { description: "a dog", box: [380, 370, 110, 100] },
  ],
};

export function session(overrides: Partial<SessionJson> = {}): SessionJson {
  return {
    id: "s1",
    messages: [
      { role: "user", content: "two pandas in a forest" },
      { role: "assistant", content: "placed 2 objects" },
    ],
    layout: PANDA_LAYOUT,
    diagnostic: null,
    created_at: "2024-01-01T00:00:00Z",
    updated_at: "2024-01-01T00:00:00Z",
    ...overrides,
  };
}

export function run(overrides: Partial<RunJson> = {}): RunJson {
  return {
    id: "r1",
    caption: "",
    status: "pending",
    layout: PANDA_LAYOUT,
    config: { seed: 0 },
    error: null,
    created_at: "2024-01-01T00:00:00Z",
    updated_at: "2024-01-01T00:00:00Z",
    artifacts: [],
    ...overrides,
  };
}

export function jsonResponse(payload: unknown, status = 200): Response {
  return new Response(JSON.stringify(payload), {
    status,
    headers: { "Content-Type": "application/json" },
  });
}
