/** Minimal in-memory stand-in for the gateway, used by unit tests.
 * The full contract is exercised against the real service in
 * session_live.test.ts; this fake only covers the shapes the UI consumes.
 */

import type { FetchLike, ResourceSample, ResultObject } from "../src/api.js";

export interface RequestLogEntry {
  method: string;
  path: string;
  search: string;
}

const USERS: Record<string, { password: string; group: string; roles: string[] }> = {
  alice: { password: "alice-pw", group: "external", roles: ["user"] },
  root: { password: "root-pw", group: "internal", roles: ["admin"] },
};

function json(status: number, body: unknown): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "Content-Type": "application/json" },
  });
}

function apiError(status: number, code: string, message: string, detail?: unknown): Response {
  return json(status, { error_code: code, message, ...(detail !== undefined ? { detail } : {}) });
}

export function fakeResult(overrides: Partial<ResultObject> = {}): ResultObject {
  return {
    job_id: "fake-job-1",
    status: "completed",
    backend: "statevector-sim",
    shots: 100,
    counts: { "00": 52, "11": 48 },
    parameters: null,
    source: "",
    generated_qasm: null,
    metadata: {
      n_qubits: 2,
      depth: 3,
      gate_counts: { h: 1, cx: 1, measure: 2 },
      seed: 7,
      wall_time_ms: 2,
      warnings: [],
      generator: "qgateway",
    },
    ...overrides,
  };
}

export function fakeSamples(n: number): ResourceSample[] {
  return Array.from({ length: n }, (_, i) => ({
    timestamp: new Date(1700000000000 + i * 5000).toISOString(),
    component: "gateway",
    cpu_percent: 1.5 + i,
    mem_bytes: (60 + i) * 2 ** 20,
    net_rx_bytes: 1000 * i,
    net_tx_bytes: 2000 * i,
  }));
}

export class FakeGateway {
  log: RequestLogEntry[] = [];
  pendingHandles = new Map<string, string>(); // handle -> state
  issuedCodes = new Set<string>();
  accessToken = "fake-access-token";
  loginState: string | null = null; // override to force a state mismatch
  result: ResultObject = fakeResult();
  samples: ResourceSample[] | null = null; // null -> 403 on the monitor route
  createdUsers: Array<{ username: string; group: string; roles: string[] }> = [];
  private lastUsername = "alice";

  fetch: FetchLike = async (input, init = {}) => {
    const url = new URL(input, "http://fake");
    const method = (init.method ?? "GET").toUpperCase();
    this.log.push({ method, path: url.pathname, search: url.search });
    const authed = (init.headers as Headers | undefined)?.get?.("Authorization") ===
      `Bearer ${this.accessToken}`;

    if (method === "GET" && url.pathname === "/auth/authorize") {
      const state = url.searchParams.get("state") ?? "";
      if (url.searchParams.get("client_id") !== "webui") {
        return apiError(400, "UnknownClient", "unknown client");
      }
      const handle = `handle-${this.pendingHandles.size}`;
      this.pendingHandles.set(handle, state);
      return json(200, { login_handle: handle });
    }

    if (method === "POST" && url.pathname === "/auth/login") {
      const body = JSON.parse(String(init.body));
      const state = this.pendingHandles.get(body.login_handle);
      if (state === undefined) {
        return apiError(400, "InvalidCode", "invalid code");
      }
      const user = USERS[body.username];
      if (!user || user.password !== body.password) {
        return apiError(401, "InvalidCredentials", "invalid username or password");
      }
      const code = `code-for-${body.username}`;
      this.issuedCodes.add(code);
      return json(200, {
        code,
        state: this.loginState ?? state,
        redirect_uri: "/callback",
      });
    }

    if (method === "POST" && url.pathname === "/auth/token") {
      const form = new URLSearchParams(String(init.body));
      if (form.get("grant_type") === "authorization_code") {
        if (!this.issuedCodes.delete(form.get("code") ?? "")) {
          return apiError(400, "InvalidCode", "invalid code");
        }
      } else if (form.get("grant_type") === "refresh_token") {
        this.accessToken = `${this.accessToken}+`;
      } else {
        return apiError(400, "UnsupportedGrant", "unsupported grant");
      }
      const username = (form.get("code") ?? "code-for-alice").replace("code-for-", "");
      this.lastUsername = username || this.lastUsername;
      return json(200, {
        access_token: this.accessToken,
        id_token: "fake-id-token",
        refresh_token: "fake-refresh-token",
        expires_in: 300,
        token_type: "Bearer",
      });
    }

    if (!authed) {
      return apiError(401, "Unauthorized", "missing bearer token");
    }

    if (method === "GET" && url.pathname === "/api/user/me") {
      const user = USERS[this.lastUsername];
      return json(200, { username: this.lastUsername, group: user.group, roles: user.roles });
    }
    if (method === "GET" && url.pathname === "/api/monitor/stats") {
      if (this.samples === null) {
        return apiError(403, "Forbidden", "read_monitor is not permitted for this principal");
      }
      return json(200, this.samples);
    }
    if (method === "POST" && /^\/api\/qc\/(qasm|pauli)\/(code|upload)$/.test(url.pathname)) {
      return json(200, this.result);
    }
    if (method === "GET" && url.pathname === "/api/qc/jobs") {
      return json(200, [
        {
          job_id: this.result.job_id,
          owner: this.lastUsername,
          submitted_at: "2026-01-01T00:00:00+00:00",
          input_format: "qasm",
          request: { source: "", parameters: null, shots: 100, seed: null },
          result: this.result,
        },
      ]);
    }
    if (method === "GET" && /^\/api\/qc\/jobs\/[^/]+\/result\.csv$/.test(url.pathname)) {
      // integer-like keys iterate first in JS objects; sort like the server
      const lines = Object.entries(this.result.counts)
        .sort(([a], [b]) => (a < b ? -1 : 1))
        .map(([bits, count]) => `${bits},${count}`)
        .join("\n");
      return new Response(`bitstring,count\n${lines}\n`, {
        status: 200,
        headers: { "Content-Type": "text/csv" },
      });
    }
    if (method === "POST" && url.pathname === "/api/admin/users") {
      const body = JSON.parse(String(init.body));
      this.createdUsers.push({ username: body.username, group: body.group, roles: body.roles });
      return json(201, { username: body.username, group: body.group, roles: body.roles });
    }
    if (method === "GET" && url.pathname === "/api/admin/users") {
      return json(200, [
        { username: "root", group: "internal", roles: ["admin"] },
        ...this.createdUsers,
      ]);
    }
    return apiError(404, "NotFound", `no route ${url.pathname}`);
  };
}
