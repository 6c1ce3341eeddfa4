/** Authorization-code session: login handshake and token lifecycle.
 *
 * The flow matches what a full page navigation would do: authorize yields a
 * login handle, credentials turn it into a one-time code, and the callback
 * exchanges the code for tokens. Only the pending state value crosses the
 * redirect (via sessionStorage when present); tokens stay in memory.
 */

import { ApiClient, TokenSet, UserInfo } from "./api.js";

const STATE_KEY = "qgw:pending-state";

function randomState(): string {
  const bytes = new Uint8Array(16);
  crypto.getRandomValues(bytes);
  return Array.from(bytes, (b) => b.toString(16).padStart(2, "0")).join("");
}

function stash(): Storage | null {
  try {
    return typeof sessionStorage === "undefined" ? null : sessionStorage;
  } catch {
    return null; // storage can be disabled; the state check is then skipped
  }
}

export class Session {
  user: UserInfo | null = null;
  private tokens: TokenSet | null = null;

  constructor(
    private readonly api: ApiClient,
    private readonly clientId = "webui",
    private readonly redirectUri = "/callback",
  ) {}

  get authenticated(): boolean {
    return this.user !== null;
  }

  /** Runs authorize + login; resolves to the redirect URL carrying the code. */
  async beginLogin(username: string, password: string): Promise<string> {
    const state = randomState();
    const { login_handle } = await this.api.authorize(this.clientId, this.redirectUri, state);
    const outcome = await this.api.login(login_handle, username, password);
    if (outcome.state !== state) {
      throw new Error("authorization state mismatch");
    }
    stash()?.setItem(STATE_KEY, state);
    const query = new URLSearchParams({ code: outcome.code, state: outcome.state });
    return `${outcome.redirect_uri}?${query}`;
  }

  /** Callback side: verifies the state echo and exchanges the code. */
  async completeLogin(code: string, state: string | null = null): Promise<UserInfo> {
    const pending = stash()?.getItem(STATE_KEY) ?? null;
    stash()?.removeItem(STATE_KEY);
    if (pending !== null && state !== null && pending !== state) {
      throw new Error("authorization state mismatch");
    }
    this.tokens = await this.api.exchangeCode(code, this.clientId, this.redirectUri);
    this.api.token = this.tokens.access_token;
    this.user = await this.api.me();
    return this.user;
  }

  /** Convenience for single-page use without a real navigation. */
  async login(username: string, password: string): Promise<UserInfo> {
    const redirect = await this.beginLogin(username, password);
    const query = new URLSearchParams(redirect.split("?", 2)[1]);
    return this.completeLogin(query.get("code") ?? "", query.get("state"));
  }

  async refresh(): Promise<void> {
    if (!this.tokens) {
      throw new Error("not logged in");
    }
    this.tokens = await this.api.refresh(this.tokens.refresh_token);
    this.api.token = this.tokens.access_token;
  }

  logout(): void {
    this.tokens = null;
    this.user = null;
    this.api.token = null;
  }
}
