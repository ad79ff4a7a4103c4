import { setupApp } from "./app.js";
import type { ClassEntry } from "./types.js";

// The class catalog is a static sidecar published next to the page, the
// same {code: label} object shape the API server takes for --labels.
async function loadClassList(): Promise<ClassEntry[]> {
  try {
    const response = await fetch("classes.json");
    if (!response.ok) {
      return [];
    }
    const data = (await response.json()) as Record<string, string>;
    return Object.entries(data)
      .map(([code, label]) => ({ code, label }))
      .sort((a, b) => a.code.localeCompare(b.code));
  } catch {
    return [];
  }
}

const root = document.getElementById("app");
if (root instanceof HTMLElement) {
  void loadClassList().then((classList) => setupApp(root, { classList }));
}
