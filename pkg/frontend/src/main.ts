import { Api } from "./api.js";
import { renderApp } from "./render.js";
import { PlannerStore } from "./state.js";

/** Boot: session id lives in the URL hash so a hard refresh reattaches
 * to the same session and reproduces the identical plan. */

function apiBase(): string {
  const params = new URLSearchParams(window.location.search);
  return params.get("api") ?? "";
}

async function boot(): Promise<void> {
  const root = document.getElementById("app");
  if (!root) throw new Error("missing #app element");
  const store = new PlannerStore(new Api(apiBase()));
  store.subscribe((vm) => {
    renderApp(root, vm, store);
    if (vm.sessionId && window.location.hash !== `#${vm.sessionId}`) {
      window.location.hash = vm.sessionId;
    }
  });
  const fromHash = window.location.hash.replace(/^#/, "");
  try {
    await store.init(fromHash || undefined);
  } catch {
    store.vm.banner = "cannot reach the advisor service";
    renderApp(root, store.vm, store);
  }
}

void boot();
