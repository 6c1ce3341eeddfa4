/** Browser bootstrap: wire the app to the real DOM, fetch, and location. */

import { ApiClient } from "./api.js";
import { App } from "./app.js";

const root = document.getElementById("app");
if (root) {
  const api = new ApiClient(window.fetch.bind(window), "");
  const app = new App(root, api);
  void app.start();
}
