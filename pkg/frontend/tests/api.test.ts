import { describe, expect, it } from "vitest";

import { ApiClient, ApiError, FetchLike } from "../src/api.js";
import { FakeGateway } from "./fake_gateway.js";

async function expectApiError(promise: Promise<unknown>): Promise<ApiError> {
  try {
    await promise;
  } catch (error) {
    expect(error).toBeInstanceOf(ApiError);
    return error as ApiError;
  }
  throw new Error("expected the call to fail");
}

function capture(): { fetch: FetchLike; calls: Array<{ url: string; init: RequestInit }> } {
  const calls: Array<{ url: string; init: RequestInit }> = [];
  const fetch: FetchLike = async (url, init = {}) => {
    calls.push({ url, init });
    return new Response("{}", { status: 200, headers: { "Content-Type": "application/json" } });
  };
  return { fetch, calls };
}

describe("ApiClient request shaping", () => {
  it("builds the authorize query from its arguments", async () => {
    const { fetch, calls } = capture();
    await new ApiClient(fetch).authorize("webui", "/callback", "xyz");
    const url = new URL(calls[0].url, "http://base");
    expect(url.pathname).toBe("/auth/authorize");
    expect(url.searchParams.get("client_id")).toBe("webui");
    expect(url.searchParams.get("redirect_uri")).toBe("/callback");
    expect(url.searchParams.get("state")).toBe("xyz");
  });

  it("form-encodes the code exchange", async () => {
    const { fetch, calls } = capture();
    await new ApiClient(fetch).exchangeCode("c0de", "webui", "/callback");
    const { url, init } = calls[0];
    expect(url).toBe("/auth/token");
    expect(new Headers(init.headers).get("Content-Type")).toBe(
      "application/x-www-form-urlencoded",
    );
    const form = new URLSearchParams(String(init.body));
    expect(form.get("grant_type")).toBe("authorization_code");
    expect(form.get("code")).toBe("c0de");
    expect(form.get("redirect_uri")).toBe("/callback");
  });

  it("attaches the bearer token once set and omits it before", async () => {
    const { fetch, calls } = capture();
    const client = new ApiClient(fetch);
    await client.me().catch(() => {});
    client.token = "tok";
    await client.me();
    expect(new Headers(calls[0].init.headers).get("Authorization")).toBeNull();
    expect(new Headers(calls[1].init.headers).get("Authorization")).toBe("Bearer tok");
  });

  it("prefixes every path with the configured base", async () => {
    const { fetch, calls } = capture();
    await new ApiClient(fetch, "http://gw:9000").jobs();
    expect(calls[0].url).toBe("http://gw:9000/api/qc/jobs?scope=own");
  });

  it("serializes submit options with defaults", async () => {
    const { fetch, calls } = capture();
    await new ApiClient(fetch).submitCode("pauli", "ZZ 0.5\n", { parameters: [0.5] });
    expect(calls[0].url).toBe("/api/qc/pauli/code");
    expect(JSON.parse(String(calls[0].init.body))).toEqual({
      code: "ZZ 0.5\n",
      parameters: [0.5],
      shots: 1024,
      seed: null,
    });
  });

  it("packs uploads as multipart form data", async () => {
    const { fetch, calls } = capture();
    await new ApiClient(fetch).submitUpload("qasm", "bell.qasm", "OPENQASM 2.0;\n", {
      shots: 32,
      seed: 4,
      parameters: { a: 1 },
    });
    const body = calls[0].init.body as FormData;
    expect(body).toBeInstanceOf(FormData);
    expect(body.get("shots")).toBe("32");
    expect(body.get("seed")).toBe("4");
    expect(body.get("parameters")).toBe('{"a":1}');
    const file = body.get("file") as File;
    expect(await file.text()).toBe("OPENQASM 2.0;\n");
  });
});

describe("ApiClient error handling", () => {
  it("maps the error envelope onto ApiError", async () => {
    const fetch: FetchLike = async () =>
      new Response(
        JSON.stringify({
          error_code: "QasmSyntaxError",
          message: "line 3, column 1: unknown statement",
          detail: { line: 3, column: 1 },
        }),
        { status: 400, headers: { "Content-Type": "application/json" } },
      );
    const error = await expectApiError(new ApiClient(fetch).submitCode("qasm", "bad"));
    expect(error.status).toBe(400);
    expect(error.errorCode).toBe("QasmSyntaxError");
    expect(error.detail).toEqual({ line: 3, column: 1 });
  });

  it("survives non-JSON error bodies", async () => {
    const fetch: FetchLike = async () => new Response("boom", { status: 502 });
    const error = await expectApiError(new ApiClient(fetch).me());
    expect(error.status).toBe(502);
    expect(error.errorCode).toBe("HttpError");
  });
});

describe("ApiClient against the fake gateway", () => {
  it("returns the CSV body as text", async () => {
    const gw = new FakeGateway();
    const client = new ApiClient(gw.fetch);
    client.token = gw.accessToken;
    const text = await client.jobCsv("fake-job-1");
    expect(text).toBe("bitstring,count\n00,52\n11,48\n");
  });

  it("rejects API calls without a token", async () => {
    const gw = new FakeGateway();
    const error = await expectApiError(new ApiClient(gw.fetch).jobs());
    expect(error.status).toBe(401);
  });
});
