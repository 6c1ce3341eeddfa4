/** Typed client for the gateway HTTP interface.
 *
 * Every request the UI makes goes through this module with an injectable
 * fetch, so tests can capture or substitute the transport. Nothing here
 * touches browser storage; the access token lives in memory only.
 */

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export type SubmitFormat = "qasm" | "pauli";
export type Parameters = Record<string, number> | number[] | null;

export interface TokenSet {
  access_token: string;
  id_token: string;
  refresh_token: string;
  expires_in: number;
  token_type: string;
}

export interface UserInfo {
  username: string;
  group: string;
  roles: string[];
}

export interface ResultMetadata {
  n_qubits: number;
  depth: number;
  gate_counts: Record<string, number>;
  seed: number;
  wall_time_ms: number | null;
  warnings: string[];
  generator: string;
  reason?: { error_code: string; message: string };
}

export interface ResultObject {
  job_id: string;
  status: "completed" | "failed";
  backend: string;
  shots: number;
  counts: Record<string, number>;
  parameters: Parameters;
  source: string;
  generated_qasm: string | null;
  metadata: ResultMetadata;
}

export interface JobRecord {
  job_id: string;
  owner: string;
  submitted_at: string;
  input_format: SubmitFormat;
  request: { source: string; parameters: Parameters; shots: number; seed: number | null };
  result: ResultObject;
}

export interface ResourceSample {
  timestamp: string;
  component: string;
  cpu_percent: number | null;
  mem_bytes: number | null;
  net_rx_bytes: number;
  net_tx_bytes: number;
}

export interface SubmitOptions {
  parameters?: Parameters;
  shots?: number;
  seed?: number | null;
}

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly errorCode: string,
    message: string,
    readonly detail?: unknown,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

async function raiseFromResponse(response: Response): Promise<never> {
  let code = "HttpError";
  let message = `HTTP ${response.status}`;
  let detail: unknown;
  try {
    const body = await response.json();
    if (body && typeof body.error_code === "string") {
      code = body.error_code;
      message = body.message ?? message;
      detail = body.detail;
    }
  } catch {
    // non-JSON error body; keep the generic message
  }
  throw new ApiError(response.status, code, message, detail);
}

export class ApiClient {
  /** Bearer token attached to /api requests; held in memory only. */
  token: string | null = null;

  constructor(
    private readonly fetchFn: FetchLike,
    readonly base: string = "",
  ) {}

  private async request(path: string, init: RequestInit = {}): Promise<Response> {
    const headers = new Headers(init.headers);
    if (this.token !== null && !headers.has("Authorization")) {
      headers.set("Authorization", `Bearer ${this.token}`);
    }
    const response = await this.fetchFn(this.base + path, { ...init, headers });
    if (!response.ok) {
      await raiseFromResponse(response);
    }
    return response;
  }

  private async json<T>(path: string, init: RequestInit = {}): Promise<T> {
    const response = await this.request(path, init);
    return (await response.json()) as T;
  }

  private postForm<T>(path: string, fields: Record<string, string>): Promise<T> {
    return this.json<T>(path, {
      method: "POST",
      headers: { "Content-Type": "application/x-www-form-urlencoded" },
      body: new URLSearchParams(fields).toString(),
    });
  }

  private postJson<T>(path: string, body: unknown): Promise<T> {
    return this.json<T>(path, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
  }

  // authentication

  authorize(clientId: string, redirectUri: string, state: string): Promise<{ login_handle: string }> {
    const query = new URLSearchParams({ client_id: clientId, redirect_uri: redirectUri, state });
    return this.json(`/auth/authorize?${query}`);
  }

  login(
    handle: string,
    username: string,
    password: string,
  ): Promise<{ code: string; state: string; redirect_uri: string }> {
    return this.postJson("/auth/login", { login_handle: handle, username, password });
  }

  exchangeCode(code: string, clientId: string, redirectUri: string): Promise<TokenSet> {
    return this.postForm("/auth/token", {
      grant_type: "authorization_code",
      code,
      client_id: clientId,
      redirect_uri: redirectUri,
    });
  }

  refresh(refreshToken: string): Promise<TokenSet> {
    return this.postForm("/auth/token", {
      grant_type: "refresh_token",
      refresh_token: refreshToken,
    });
  }

  me(): Promise<UserInfo> {
    return this.json("/api/user/me");
  }

  // submission and job history

  submitCode(format: SubmitFormat, code: string, options: SubmitOptions = {}): Promise<ResultObject> {
    return this.postJson(`/api/qc/${format}/code`, {
      code,
      parameters: options.parameters ?? null,
      shots: options.shots ?? 1024,
      seed: options.seed ?? null,
    });
  }

  submitUpload(
    format: SubmitFormat,
    filename: string,
    contents: Blob | string,
    options: SubmitOptions = {},
  ): Promise<ResultObject> {
    const form = new FormData();
    const blob = typeof contents === "string" ? new Blob([contents]) : contents;
    form.append("file", blob, filename);
    if (options.parameters != null) {
      form.append("parameters", JSON.stringify(options.parameters));
    }
    form.append("shots", String(options.shots ?? 1024));
    if (options.seed != null) {
      form.append("seed", String(options.seed));
    }
    return this.json(`/api/qc/${format}/upload`, { method: "POST", body: form });
  }

  jobs(scope: "own" | "all" = "own"): Promise<JobRecord[]> {
    return this.json(`/api/qc/jobs?scope=${scope}`);
  }

  job(id: string): Promise<JobRecord> {
    return this.json(`/api/qc/jobs/${encodeURIComponent(id)}`);
  }

  async jobCsv(id: string): Promise<string> {
    const response = await this.request(`/api/qc/jobs/${encodeURIComponent(id)}/result.csv`);
    return response.text();
  }

  // telemetry and administration

  monitorStats(windowS = 300): Promise<ResourceSample[]> {
    return this.json(`/api/monitor/stats?window_s=${windowS}`);
  }

  createUser(username: string, password: string, group: string, roles: string[]): Promise<UserInfo> {
    return this.postJson("/api/admin/users", { username, password, group, roles });
  }

  listUsers(): Promise<UserInfo[]> {
    return this.json("/api/admin/users");
  }
}
