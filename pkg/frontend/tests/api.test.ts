import { describe, expect, it } from "vitest";

import { ApiClient, ApiError } from "../src/api.js";
import { jsonResponse, run, session } from "./fixtures.js";

interface Recorded {
  url: string;
  method: string;
  body: unknown;
}

function stubClient(respond: (url: string) => Response) {
  const requests: Recorded[] = [];
  const client = new ApiClient("http://svc", async (url, init) => {
    requests.push({
      url,
      method: init?.method ?? "GET",
      body: init?.body ? JSON.parse(String(init.body)) : undefined,
    });
    return respond(url);
  });
  return { client, requests };
}

describe("ApiClient", () => {
  it("starts a session with caption and optional language", async () => {
    const { client, requests } = stubClient(() => jsonResponse(session()));
    await client.startSession("两只熊猫", "zh");
    expect(requests[0]).toEqual({
      url: "http://svc/v1/sessions",
      method: "POST",
      body: { caption: "两只熊猫", language: "zh" },
    });

    await client.startSession("two pandas");
    expect(requests[1].body).toEqual({ caption: "two pandas" });
  });

  it("sends a turn to the session's turn endpoint", async () => {
    const { client, requests } = stubClient(() => jsonResponse(session()));
    await client.sendTurn("s1", "add a dog on the right");
    expect(requests[0].url).toBe("http://svc/v1/sessions/s1/turn");
    expect(requests[0].body).toEqual({ instruction: "add a dog on the right" });
  });

  it("requests asynchronous generation", async () => {
    const { client, requests } = stubClient(() => jsonResponse(run(), 202));
    const started = await client.startGeneration(session().layout!, { seed: 7 });
    expect(started.status).toBe("pending");
    expect(requests[0].url).toBe("http://svc/v1/generate?async=true");
    expect(requests[0].body).toMatchObject({ config: { seed: 7 } });
  });

  it("builds the image url for a run", () => {
    const { client } = stubClient(() => jsonResponse({}));
    expect(client.imageUrl("r1")).toBe("http://svc/v1/runs/r1/image.png");
  });

  it("surfaces the server's error code and message", async () => {
    const { client } = stubClient(() =>
      jsonResponse({ error: { code: "layout_stage", message: "box out of bounds" } }, 422),
    );
    const failure = await client.getRun("r1").catch((err) => err);
    expect(failure).toBeInstanceOf(ApiError);
    expect(failure.code).toBe("layout_stage");
    expect(failure.message).toBe("box out of bounds");
    expect(failure.status).toBe(422);
  });

  it("copes with a non-JSON error body", async () => {
    const { client } = stubClient(() => new Response("boom", { status: 500 }));
    const failure = await client.getRun("r1").catch((err) => err);
    expect(failure).toBeInstanceOf(ApiError);
    expect(failure.code).toBe("http_error");
    expect(failure.status).toBe(500);
  });

  it("rejects a 200 body that fails the schema guard", async () => {
    const { client } = stubClient(() => jsonResponse({ id: "r1" }));
    await expect(client.getRun("r1")).rejects.toThrow(/run\./);
  });

  it("escapes path segments", async () => {
    const { client, requests } = stubClient(() => jsonResponse(session()));
    await client.getSession("s 1/x");
    expect(requests[0].url).toBe("http://svc/v1/sessions/s%201%2Fx");
  });
});
