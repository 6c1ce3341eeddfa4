/** Single-page app: login, program submission, job history, telemetry,
 * and user administration, all against the gateway's HTTP interface.
 *
 * The class owns no global state: it renders into the element it is given
 * and talks through the injected ApiClient, which makes the whole UI
 * drivable from tests with a recording transport and a synthetic DOM.
 */

import {
  ApiClient,
  ApiError,
  JobRecord,
  Parameters,
  ResourceSample,
  ResultObject,
  SubmitFormat,
  SubmitOptions,
  UserInfo,
} from "./api.js";
import { Session } from "./auth.js";
import { clear, el } from "./dom.js";
import { histogramSvg, sparklineSvg } from "./histogram.js";

export type ViewName = "compose" | "jobs" | "monitor" | "admin";

export interface AppOptions {
  /** Full-page navigation hook; defaults to location.assign. */
  navigate?: (url: string) => void;
  pollIntervalMs?: number;
}

/** Parses the parameter box: empty, a JSON object, or a JSON array. */
export function parseParameters(text: string): Parameters {
  const trimmed = text.trim();
  if (trimmed === "") {
    return null;
  }
  let value: unknown;
  try {
    value = JSON.parse(trimmed);
  } catch {
    throw new Error("parameters must be valid JSON");
  }
  const numeric = (v: unknown): v is number => typeof v === "number" && Number.isFinite(v);
  if (Array.isArray(value)) {
    if (!value.every(numeric)) {
      throw new Error("parameter array entries must be numbers");
    }
    return value;
  }
  if (value !== null && typeof value === "object") {
    const record = value as Record<string, unknown>;
    if (!Object.values(record).every(numeric)) {
      throw new Error("parameter values must be numbers");
    }
    return record as Record<string, number>;
  }
  throw new Error("parameters must be a JSON object or array");
}

export function describeError(error: unknown): string {
  if (error instanceof ApiError) {
    const detail = error.detail as { line?: number; column?: number } | undefined;
    const position =
      detail && typeof detail.line === "number"
        ? ` (line ${detail.line}, column ${detail.column ?? 1})`
        : "";
    return `${error.errorCode}: ${error.message}${position}`;
  }
  return error instanceof Error ? error.message : String(error);
}

export class App {
  readonly session: Session;
  monitorAllowed = false;
  private view: ViewName = "compose";
  private monitorTimer: ReturnType<typeof setInterval> | null = null;

  constructor(
    private readonly root: HTMLElement,
    readonly api: ApiClient,
    session?: Session,
    private readonly options: AppOptions = {},
  ) {
    this.session = session ?? new Session(api);
  }

  private get doc(): Document {
    return this.root.ownerDocument;
  }

  /** Browser entry point: finish a pending login callback, then render. */
  async start(): Promise<void> {
    const win = this.doc.defaultView;
    if (win && win.location.pathname === "/callback") {
      const query = new URLSearchParams(win.location.search);
      try {
        await this.session.completeLogin(query.get("code") ?? "", query.get("state"));
        win.history.replaceState({}, "", "/");
        await this.finishLogin();
        return;
      } catch (error) {
        win.history.replaceState({}, "", "/");
        this.render();
        this.showError("login-error", describeError(error));
        return;
      }
    }
    this.render();
  }

  /** Code-flow login without leaving the page; used by the form and tests. */
  async login(username: string, password: string): Promise<UserInfo> {
    const user = await this.session.login(username, password);
    await this.finishLogin();
    return user;
  }

  /** Code-flow login with a real redirect to /callback?code=…&state=…. */
  async loginWithRedirect(username: string, password: string): Promise<void> {
    const url = await this.session.beginLogin(username, password);
    const navigate =
      this.options.navigate ?? ((target: string) => this.doc.defaultView?.location.assign(target));
    navigate(url);
  }

  private async finishLogin(): Promise<void> {
    this.monitorAllowed = await this.probeMonitor();
    this.view = "compose";
    this.render();
  }

  logout(): void {
    this.stopMonitor();
    this.session.logout();
    this.monitorAllowed = false;
    this.render();
  }

  /** The telemetry tab exists only for principals the server permits. */
  private async probeMonitor(): Promise<boolean> {
    try {
      await this.api.monitorStats(60);
      return true;
    } catch (error) {
      if (error instanceof ApiError && (error.status === 403 || error.status === 401)) {
        return false;
      }
      throw error;
    }
  }

  async showView(view: ViewName): Promise<void> {
    this.view = view;
    if (view !== "monitor") {
      this.stopMonitor();
    }
    this.render();
    if (view === "jobs") {
      await this.loadJobs();
    } else if (view === "monitor") {
      await this.startMonitor();
    } else if (view === "admin") {
      await this.loadUsers();
    }
  }

  // rendering

  render(): void {
    clear(this.root);
    this.root.append(this.session.authenticated ? this.mainView() : this.loginView());
  }

  private loginView(): HTMLElement {
    const doc = this.doc;
    const form = el(doc, "form", { id: "login-form", class: "card" }, [
      el(doc, "h1", {}, ["qgateway"]),
      el(doc, "label", {}, [
        "Username",
        el(doc, "input", { id: "login-username", name: "username", autocomplete: "username" }),
      ]),
      el(doc, "label", {}, [
        "Password",
        el(doc, "input", {
          id: "login-password",
          name: "password",
          type: "password",
          autocomplete: "current-password",
        }),
      ]),
      el(doc, "button", { type: "submit" }, ["Sign in"]),
      el(doc, "p", { id: "login-error", class: "error", hidden: "" }),
    ]);
    form.addEventListener("submit", (event) => {
      event.preventDefault();
      const username = (doc.getElementById("login-username") as HTMLInputElement).value;
      const password = (doc.getElementById("login-password") as HTMLInputElement).value;
      this.login(username, password).catch((error) => {
        this.showError("login-error", describeError(error));
      });
    });
    return el(doc, "div", { class: "login-screen" }, [form]);
  }

  private mainView(): HTMLElement {
    const doc = this.doc;
    const user = this.session.user!;
    const tabs: Array<[ViewName, string]> = [
      ["compose", "Compose"],
      ["jobs", "Jobs"],
    ];
    if (this.monitorAllowed) {
      tabs.push(["monitor", "Monitor"]);
    }
    if (user.roles.includes("admin")) {
      tabs.push(["admin", "Users"]);
    }
    const nav = el(
      doc,
      "nav",
      { class: "tabs" },
      tabs.map(([name, label]) => {
        const button = el(
          doc,
          "button",
          { "data-view": name, class: name === this.view ? "active" : "" },
          [label],
        );
        button.addEventListener("click", () => void this.showView(name));
        return button;
      }),
    );
    const logout = el(doc, "button", { id: "logout", class: "ghost" }, ["Sign out"]);
    logout.addEventListener("click", () => this.logout());
    const header = el(doc, "header", {}, [
      el(doc, "span", { class: "brand" }, ["qgateway"]),
      nav,
      el(doc, "span", { class: "whoami" }, [
        `${user.username} (${user.group}: ${user.roles.join(", ") || "no roles"})`,
      ]),
      logout,
    ]);
    const body = el(doc, "main", { id: "view" });
    switch (this.view) {
      case "compose":
        body.append(this.composeView());
        break;
      case "jobs":
        body.append(this.jobsView());
        break;
      case "monitor":
        body.append(this.monitorView());
        break;
      case "admin":
        body.append(this.adminView());
        break;
    }
    return el(doc, "div", { class: "shell" }, [header, body]);
  }

  // compose view

  private composeView(): HTMLElement {
    const doc = this.doc;
    const form = el(doc, "form", { id: "submit-form", class: "card" }, [
      el(doc, "fieldset", { class: "format-toggle" }, [
        el(doc, "legend", {}, ["Input format"]),
        el(doc, "label", {}, [
          el(doc, "input", { type: "radio", name: "format", value: "qasm", checked: "" }),
          "OpenQASM 2.0",
        ]),
        el(doc, "label", {}, [
          el(doc, "input", { type: "radio", name: "format", value: "pauli" }),
          "Pauli rotations",
        ]),
      ]),
      el(doc, "label", {}, [
        "Program",
        el(doc, "textarea", { id: "source", rows: "12", spellcheck: "false" }),
      ]),
      el(doc, "label", {}, [
        "…or upload a file",
        el(doc, "input", { id: "file", type: "file" }),
      ]),
      el(doc, "label", {}, [
        "Parameters (JSON object or array)",
        el(doc, "input", { id: "params", placeholder: '{"theta": 0.5} or [0.5]' }),
      ]),
      el(doc, "div", { class: "row" }, [
        el(doc, "label", {}, [
          "Shots",
          el(doc, "input", { id: "shots", type: "number", value: "1024", min: "1" }),
        ]),
        el(doc, "label", {}, [
          "Seed (empty = random)",
          el(doc, "input", { id: "seed", type: "number" }),
        ]),
      ]),
      el(doc, "button", { type: "submit" }, ["Run"]),
      el(doc, "p", { id: "submit-error", class: "error", hidden: "" }),
    ]);
    form.addEventListener("submit", (event) => {
      event.preventDefault();
      void this.submitFromForm();
    });
    return el(doc, "div", {}, [form, el(doc, "section", { id: "result-panel" })]);
  }

  private async submitFromForm(): Promise<void> {
    const doc = this.doc;
    const format = (
      doc.querySelector('input[name="format"]:checked') as HTMLInputElement | null
    )?.value as SubmitFormat | undefined;
    const sourceBox = doc.getElementById("source") as HTMLTextAreaElement;
    const fileInput = doc.getElementById("file") as HTMLInputElement;
    const shotsBox = doc.getElementById("shots") as HTMLInputElement;
    const seedBox = doc.getElementById("seed") as HTMLInputElement;
    const paramsBox = doc.getElementById("params") as HTMLInputElement;
    try {
      const options: SubmitOptions = {
        parameters: parseParameters(paramsBox.value),
        shots: Number(shotsBox.value) || 1024,
        seed: seedBox.value === "" ? null : Number(seedBox.value),
      };
      const file = fileInput.files?.[0];
      const result = file
        ? await this.api.submitUpload(format ?? "qasm", file.name, file, options)
        : await this.api.submitCode(format ?? "qasm", sourceBox.value, options);
      this.hideError("submit-error");
      this.renderResult(doc.getElementById("result-panel")!, result);
    } catch (error) {
      this.showError("submit-error", describeError(error));
    }
  }

  /** Renders a result object: status, histogram, JSON toggle, CSV download. */
  renderResult(container: HTMLElement, result: ResultObject): void {
    const doc = this.doc;
    clear(container);
    const card = el(doc, "div", { class: "card result", "data-job-id": result.job_id });
    card.append(
      el(doc, "h3", {}, [`job ${result.job_id}: ${result.status}`]),
      el(doc, "p", { class: "meta" }, [
        `${result.backend}, ${result.shots} shots, seed ${result.metadata.seed}` +
          (result.metadata.wall_time_ms === null
            ? ""
            : `, ${result.metadata.wall_time_ms} ms`),
      ]),
    );
    if (result.status === "failed" && result.metadata.reason) {
      card.append(
        el(doc, "p", { class: "error" }, [
          `${result.metadata.reason.error_code}: ${result.metadata.reason.message}`,
        ]),
      );
    }
    for (const warning of result.metadata.warnings) {
      card.append(el(doc, "p", { class: "warning" }, [warning]));
    }
    const chart = el(doc, "div", { class: "histogram-box" });
    chart.innerHTML = histogramSvg(result.counts);
    card.append(chart);

    const jsonPre = el(doc, "pre", { id: "result-json", hidden: "" }, [
      JSON.stringify(result, null, 2),
    ]);
    const toggle = el(doc, "button", { id: "toggle-json", class: "ghost" }, ["JSON"]);
    toggle.addEventListener("click", () => {
      if (jsonPre.hasAttribute("hidden")) {
        jsonPre.removeAttribute("hidden");
      } else {
        jsonPre.setAttribute("hidden", "");
      }
    });
    const csv = el(doc, "button", { id: "download-csv", class: "ghost" }, ["CSV"]);
    csv.addEventListener("click", () => void this.downloadCsv(result.job_id));
    card.append(el(doc, "div", { class: "row" }, [toggle, csv]), jsonPre);

    if (result.generated_qasm) {
      card.append(
        el(doc, "details", {}, [
          el(doc, "summary", {}, ["lowered OpenQASM"]),
          el(doc, "pre", {}, [result.generated_qasm]),
        ]),
      );
    }
    container.append(card);
  }

  /** Fetches the CSV export; in a browser also triggers a download. */
  async downloadCsv(jobId: string): Promise<string> {
    const text = await this.api.jobCsv(jobId);
    const win = this.doc.defaultView as (Window & typeof globalThis) | null;
    if (win && typeof win.URL?.createObjectURL === "function") {
      const url = win.URL.createObjectURL(new win.Blob([text], { type: "text/csv" }));
      const anchor = el(this.doc, "a", { href: url, download: `${jobId}.csv` });
      this.doc.body.append(anchor);
      anchor.click();
      anchor.remove();
      win.URL.revokeObjectURL(url);
    }
    return text;
  }

  // jobs view

  private jobsView(): HTMLElement {
    const doc = this.doc;
    return el(doc, "div", {}, [
      el(doc, "table", { id: "jobs-table", class: "card" }, [
        el(doc, "thead", {}, [
          el(doc, "tr", {}, [
            el(doc, "th", {}, ["job"]),
            el(doc, "th", {}, ["submitted"]),
            el(doc, "th", {}, ["format"]),
            el(doc, "th", {}, ["status"]),
          ]),
        ]),
        el(doc, "tbody", { id: "jobs-body" }),
      ]),
      el(doc, "section", { id: "job-detail" }),
    ]);
  }

  async loadJobs(): Promise<JobRecord[]> {
    const records = await this.api.jobs();
    const doc = this.doc;
    const body = doc.getElementById("jobs-body");
    if (!body) {
      return records;
    }
    clear(body as HTMLElement);
    for (const record of records) {
      const row = el(doc, "tr", { "data-job-id": record.job_id }, [
        el(doc, "td", { class: "mono" }, [record.job_id]),
        el(doc, "td", {}, [record.submitted_at]),
        el(doc, "td", {}, [record.input_format]),
        el(doc, "td", {}, [record.result.status]),
      ]);
      row.addEventListener("click", () => {
        this.renderResult(doc.getElementById("job-detail")!, record.result);
      });
      body.append(row);
    }
    return records;
  }

  // monitor view

  private monitorView(): HTMLElement {
    const doc = this.doc;
    return el(doc, "div", { id: "monitor-panel", class: "card" }, [
      el(doc, "h3", {}, ["Resource telemetry"]),
      el(doc, "div", { id: "monitor-series" }),
      el(doc, "p", { id: "monitor-latest", class: "meta" }),
    ]);
  }

  private async startMonitor(): Promise<void> {
    await this.refreshMonitor();
    const interval = this.options.pollIntervalMs ?? 3000;
    this.monitorTimer = setInterval(() => void this.refreshMonitor().catch(() => {}), interval);
  }

  stopMonitor(): void {
    if (this.monitorTimer !== null) {
      clearInterval(this.monitorTimer);
      this.monitorTimer = null;
    }
  }

  async refreshMonitor(): Promise<ResourceSample[]> {
    const samples = await this.api.monitorStats(600);
    const doc = this.doc;
    const series = doc.getElementById("monitor-series");
    const latest = doc.getElementById("monitor-latest");
    if (!series || !latest) {
      return samples;
    }
    const deltas = (values: number[]): Array<number | null> =>
      values.map((value, index) => (index === 0 ? null : value - values[index - 1]));
    series.innerHTML =
      sparklineSvg(samples.map((s) => s.cpu_percent), { label: "cpu %" }) +
      sparklineSvg(samples.map((s) => (s.mem_bytes === null ? null : s.mem_bytes / 2 ** 20)), {
        label: "rss MiB",
      }) +
      sparklineSvg(deltas(samples.map((s) => s.net_rx_bytes)), { label: "rx B/sample" }) +
      sparklineSvg(deltas(samples.map((s) => s.net_tx_bytes)), { label: "tx B/sample" });
    const last = samples[samples.length - 1];
    latest.textContent = last
      ? `${samples.length} samples; latest: ` +
        `cpu ${last.cpu_percent ?? "n/a"}%, ` +
        `rss ${last.mem_bytes === null ? "n/a" : (last.mem_bytes / 2 ** 20).toFixed(0)} MiB, ` +
        `rx ${last.net_rx_bytes} B, tx ${last.net_tx_bytes} B`
      : "no samples yet";
    return samples;
  }

  // admin view

  private adminView(): HTMLElement {
    const doc = this.doc;
    const form = el(doc, "form", { id: "user-form", class: "card" }, [
      el(doc, "h3", {}, ["Create user"]),
      el(doc, "label", {}, ["Username", el(doc, "input", { id: "new-username" })]),
      el(doc, "label", {}, [
        "Password",
        el(doc, "input", { id: "new-password", type: "password" }),
      ]),
      el(doc, "label", {}, [
        "Group",
        el(doc, "select", { id: "new-group" }, [
          el(doc, "option", { value: "external" }, ["external"]),
          el(doc, "option", { value: "internal" }, ["internal"]),
        ]),
      ]),
      el(doc, "fieldset", {}, [
        el(doc, "legend", {}, ["Roles"]),
        el(doc, "label", {}, [
          el(doc, "input", { type: "checkbox", id: "role-user", checked: "" }),
          "user",
        ]),
        el(doc, "label", {}, [el(doc, "input", { type: "checkbox", id: "role-admin" }), "admin"]),
      ]),
      el(doc, "button", { type: "submit" }, ["Create"]),
      el(doc, "p", { id: "admin-error", class: "error", hidden: "" }),
    ]);
    form.addEventListener("submit", (event) => {
      event.preventDefault();
      void this.createUserFromForm();
    });
    return el(doc, "div", {}, [
      form,
      el(doc, "table", { id: "users-table", class: "card" }, [
        el(doc, "thead", {}, [
          el(doc, "tr", {}, [
            el(doc, "th", {}, ["username"]),
            el(doc, "th", {}, ["group"]),
            el(doc, "th", {}, ["roles"]),
          ]),
        ]),
        el(doc, "tbody", { id: "users-body" }),
      ]),
    ]);
  }

  private async createUserFromForm(): Promise<void> {
    const doc = this.doc;
    const roles = [
      ...((doc.getElementById("role-user") as HTMLInputElement).checked ? ["user"] : []),
      ...((doc.getElementById("role-admin") as HTMLInputElement).checked ? ["admin"] : []),
    ];
    try {
      await this.api.createUser(
        (doc.getElementById("new-username") as HTMLInputElement).value,
        (doc.getElementById("new-password") as HTMLInputElement).value,
        (doc.getElementById("new-group") as HTMLSelectElement).value,
        roles,
      );
      this.hideError("admin-error");
      await this.loadUsers();
    } catch (error) {
      this.showError("admin-error", describeError(error));
    }
  }

  async loadUsers(): Promise<UserInfo[]> {
    const users = await this.api.listUsers();
    const doc = this.doc;
    const body = doc.getElementById("users-body");
    if (!body) {
      return users;
    }
    clear(body as HTMLElement);
    for (const user of users) {
      body.append(
        el(doc, "tr", {}, [
          el(doc, "td", {}, [user.username]),
          el(doc, "td", {}, [user.group]),
          el(doc, "td", {}, [user.roles.join(", ")]),
        ]),
      );
    }
    return users;
  }

  // error line helpers

  private showError(id: string, message: string): void {
    const node = this.doc.getElementById(id);
    if (node) {
      node.textContent = message;
      node.removeAttribute("hidden");
    }
  }

  private hideError(id: string): void {
    const node = this.doc.getElementById(id);
    if (node) {
      node.setAttribute("hidden", "");
    }
  }
}
