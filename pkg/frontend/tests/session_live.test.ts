/** Scripted UI session against the real gateway over real HTTP.
 *
 * Spawns the Python service with a seeded journal, then drives the App
 * through a recording fetch: code-flow login, Bell submission, histogram
 * vs API counts, CSV download, monitor visibility per principal, and a
 * final capture check that no request left the gateway's declared routes.
 */

import { execFileSync, spawn, type ChildProcess } from "node:child_process";
import { mkdtempSync, rmSync, writeFileSync } from "node:fs";
import { createServer } from "node:net";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { Window } from "happy-dom";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { ApiClient, type FetchLike } from "../src/api.js";
import { App } from "../src/app.js";

const BELL = [
  "OPENQASM 2.0;",
  'include "qelib1.inc";',
  "qreg q[2];",
  "creg c[2];",
  "h q[0];",
  "cx q[0],q[1];",
  "measure q[0] -> c[0];",
  "measure q[1] -> c[1];",
  "",
].join("\n");

const ALLOWED_ROUTES = [
  /^\/auth\/authorize$/,
  /^\/auth\/login$/,
  /^\/auth\/token$/,
  /^\/api\/user\/me$/,
  /^\/api\/qc\/(qasm|pauli)\/(code|upload)$/,
  /^\/api\/qc\/jobs$/,
  /^\/api\/qc\/jobs\/[^/]+$/,
  /^\/api\/qc\/jobs\/[^/]+\/result\.csv$/,
  /^\/api\/monitor\/stats$/,
  /^\/api\/admin\/users$/,
];

const realFetch = globalThis.fetch.bind(globalThis);

function freePort(): Promise<number> {
  return new Promise((resolve, reject) => {
    const server = createServer();
    server.on("error", reject);
    server.listen(0, "127.0.0.1", () => {
      const { port } = server.address() as { port: number };
      server.close(() => resolve(port));
    });
  });
}

let workDir: string;
let proc: ChildProcess;
let base: string;
const captured: string[] = [];

function mountApp(): { app: App; doc: Document } {
  const win = new Window({ url: base + "/" });
  const doc = win.document as unknown as Document;
  doc.body.innerHTML = '<div id="app"></div>';
  const recorder: FetchLike = (url, init) => {
    captured.push(url);
    return realFetch(url, init);
  };
  const api = new ApiClient(recorder, base);
  const app = new App(doc.getElementById("app")!, api, undefined, { pollIntervalMs: 100000 });
  app.render();
  return { app, doc };
}

beforeAll(async () => {
  workDir = mkdtempSync(join(tmpdir(), "qgateway-ui-"));
  const journal = join(workDir, "ui.journal");
  for (const args of [
    ["admin", "--password", "admin-pw-12345", "--group", "internal", "--roles", "admin"],
    ["alice", "--password", "alice-pw-12345", "--group", "external", "--roles", "user"],
  ]) {
    execFileSync("python3", ["-m", "qgateway", "user", "add", ...args, "--journal", journal]);
  }
  const port = await freePort();
  base = `http://127.0.0.1:${port}`;
  const configPath = join(workDir, "config.json");
  writeFileSync(
    configPath,
    JSON.stringify({
      token_secret: "ui-session-secret",
      listen_port: port,
      journal_path: journal,
      sample_interval_s: 0.25,
    }),
  );
  proc = spawn("python3", ["-m", "qgateway", "serve", "--config", configPath], {
    stdio: "ignore",
  });
  const deadline = Date.now() + 20000;
  for (;;) {
    try {
      await realFetch(base + "/api/user/me");
      break;
    } catch {
      if (Date.now() > deadline || proc.exitCode !== null) {
        throw new Error("gateway did not start");
      }
      await new Promise((resolve) => setTimeout(resolve, 50));
    }
  }
});

afterAll(() => {
  proc?.kill("SIGKILL");
  rmSync(workDir, { recursive: true, force: true });
});

describe("scripted session against the live gateway", () => {
  it("logs in via the code flow, runs Bell, and downloads the exact CSV", async () => {
    const { app, doc } = mountApp();
    const user = await app.login("alice", "alice-pw-12345");
    expect(user).toEqual({ username: "alice", group: "external", roles: ["user"] });

    const result = await app.api.submitCode("qasm", BELL, { shots: 1000, seed: 99 });
    expect(result.status).toBe("completed");
    expect(["00", "11"]).toEqual(expect.arrayContaining(Object.keys(result.counts)));

    // histogram bars reproduce the API counts exactly
    const panel = doc.getElementById("result-panel")!;
    app.renderResult(panel, result);
    const bars = [...panel.querySelectorAll(".bar")];
    const barCounts = Object.fromEntries(
      bars.map((bar) => [
        bar.getAttribute("data-bitstring"),
        Number(bar.getAttribute("data-count")),
      ]),
    );
    expect(barCounts).toEqual(result.counts);

    // the CSV the UI downloads is byte-identical to the server's export
    const uiCsv = await app.downloadCsv(result.job_id);
    const direct = await realFetch(`${base}/api/qc/jobs/${result.job_id}/result.csv`, {
      headers: { Authorization: `Bearer ${app.api.token}` },
    });
    expect(uiCsv).toBe(await direct.text());
    expect(uiCsv.startsWith("bitstring,count\n")).toBe(true);
    const csvTotal = uiCsv
      .trimEnd()
      .split("\n")
      .slice(1)
      .reduce((acc, line) => acc + Number(line.split(",")[1]), 0);
    expect(csvTotal).toBe(1000);
  });

  it("keeps the monitor panel away from external users", async () => {
    const { app, doc } = mountApp();
    await app.login("alice", "alice-pw-12345");
    expect(app.monitorAllowed).toBe(false);
    expect(doc.querySelector('[data-view="monitor"]')).toBeNull();
    expect(doc.getElementById("monitor-panel")).toBeNull();
  });

  it("plots at least one telemetry point for an internal admin", async () => {
    const { app, doc } = mountApp();
    await app.login("admin", "admin-pw-12345");
    expect(app.monitorAllowed).toBe(true);
    expect(doc.querySelector('[data-view="monitor"]')).not.toBeNull();
    await app.showView("monitor");
    app.stopMonitor();
    const sparks = [...doc.querySelectorAll("#monitor-series .sparkline")];
    expect(sparks.length).toBe(4);
    expect(Number(sparks[0].getAttribute("data-points"))).toBeGreaterThanOrEqual(1);
  });

  it("accepts a multipart upload with bound parameters", async () => {
    const { app } = mountApp();
    await app.login("alice", "alice-pw-12345");
    const result = await app.api.submitUpload("pauli", "ansatz.pauli", "ZZ 0.5\nXX 1.0 a\n", {
      parameters: { a: 0.8 },
      shots: 256,
      seed: 3,
    });
    expect(result.status).toBe("completed");
    expect(result.parameters).toEqual({ a: 0.8 });
    expect(Object.values(result.counts).reduce((a, b) => a + b, 0)).toBe(256);
    expect(result.generated_qasm).toContain("rz(1.0*0.8)");
  });

  it("shows the submission history for the logged-in user", async () => {
    const { app, doc } = mountApp();
    await app.login("alice", "alice-pw-12345");
    await app.showView("jobs");
    const rows = [...doc.querySelectorAll("#jobs-body tr")];
    expect(rows.length).toBeGreaterThanOrEqual(2); // Bell + upload from earlier tests
    (rows[0] as HTMLElement).click();
    expect(doc.querySelector("#job-detail .result")).not.toBeNull();
  });

  it("never talked to anything but the gateway's declared routes", () => {
    expect(captured.length).toBeGreaterThan(10);
    for (const raw of captured) {
      const url = new URL(raw);
      expect(url.origin).toBe(base);
      const allowed = ALLOWED_ROUTES.some((route) => route.test(url.pathname));
      expect(allowed, `unexpected path ${url.pathname}`).toBe(true);
    }
  });
});
