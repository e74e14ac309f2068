import { describe, expect, it } from "vitest";

import { ApiError, FetchLike, GatewayClient } from "../src/api.js";

interface Call {
  url: string;
  init: RequestInit | undefined;
}

function clientWith(
  responder: (url: string, init?: RequestInit) => Response,
): { client: GatewayClient; calls: Call[] } {
  const calls: Call[] = [];
  const fetchImpl: FetchLike = async (url, init) => {
    calls.push({ url, init });
    return responder(url, init);
  };
  return { client: new GatewayClient("http://host:1/", fetchImpl), calls };
}

function json(doc: unknown, status = 200): Response {
  return new Response(JSON.stringify(doc), {
    status,
    headers: { "Content-Type": "application/json" },
  });
}

describe("GatewayClient", () => {
  it("joins paths onto the base url without double slashes", async () => {
    const { client, calls } = clientWith(() => json({ status: "ok" }));
    await client.health();
    expect(calls[0]?.url).toBe("http://host:1/health");
  });

  it("sends JSON bodies with the right method and header", async () => {
    const { client, calls } = clientWith(() => json({ learner_id: "L000001" }));
    const created = await client.createLearner("Ada");
    expect(created.learner_id).toBe("L000001");
    const init = calls[0]?.init;
    expect(init?.method).toBe("POST");
    expect(init?.body).toBe('{"name":"Ada"}');
    expect((init?.headers as Record<string, string>)["Content-Type"]).toBe(
      "application/json",
    );
  });

  it("encodes ids that need escaping", async () => {
    const { client, calls } = clientWith(() => json({}));
    await client.progress("sms-anon/odd id");
    expect(calls[0]?.url).toBe(
      "http://host:1/learners/sms-anon%2Fodd%20id/progress",
    );
  });

  it("sends answer and next as distinct input bodies", async () => {
    const step = { session_id: "s", prompts: [], prompt: null, state: "learning" };
    const { client, calls } = clientWith(() => json(step));
    await client.submitAnswer("L1-s1", 2);
    await client.submitNext("L1-s1");
    expect(calls[0]?.init?.body).toBe('{"answer":2}');
    expect(calls[1]?.init?.body).toBe('{"next":true}');
  });

  it("turns error payloads into ApiError with code, message, details", async () => {
    const { client } = clientWith(() =>
      json(
        {
          code: "ActiveSessionExists",
          message: "learner L000001 already has session L000001-s1",
          details: { session_id: "L000001-s1" },
        },
        409,
      ),
    );
    const err = await client.startSession("L000001").catch((e) => e);
    expect(err).toBeInstanceOf(ApiError);
    expect(err.code).toBe("ActiveSessionExists");
    expect(err.status).toBe(409);
    expect(err.message).toContain("already has session");
    expect(err.details.session_id).toBe("L000001-s1");
  });

  it("labels unparseable error bodies as network failures", async () => {
    const { client } = clientWith(
      () => new Response("<html>bad gateway</html>", { status: 502 }),
    );
    const err = await client.health().catch((e) => e);
    expect(err).toBeInstanceOf(ApiError);
    expect(err.code).toBe("NetworkError");
    expect(err.status).toBe(502);
  });

  it("labels transport failures as network errors with status 0", async () => {
    const fetchImpl: FetchLike = async () => {
      throw new TypeError("fetch failed");
    };
    const client = new GatewayClient("http://host:1", fetchImpl);
    const err = await client.course().catch((e) => e);
    expect(err).toBeInstanceOf(ApiError);
    expect(err.code).toBe("NetworkError");
    expect(err.status).toBe(0);
    expect(err.message).toContain("fetch failed");
  });
});
