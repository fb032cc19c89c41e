// Browser entry point; tests import initConsole directly instead.

import { initConsole } from "./main.js";

const params = new URLSearchParams(window.location.search);
const base = params.get("api") ?? "http://127.0.0.1:7711";

window.addEventListener("DOMContentLoaded", () => {
  const root = document.getElementById("app");
  if (root) {
    initConsole(root, base);
  }
});
