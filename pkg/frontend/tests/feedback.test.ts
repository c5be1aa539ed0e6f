import { describe, expect, test } from "vitest";

import { Api } from "../src/api.js";
import { renderApp } from "../src/render.js";
import { PlannerStore } from "../src/state.js";
import { FIX, mountRoot, renderedGroupMembers, soloDouble } from "./helpers.js";

const SID = FIX.solo.sessionView.id;

describe("commit feedback loop (acceptance)", () => {
  test("committing sends exactly one commit request and re-renders from a fresh read", async () => {
    const double = soloDouble();
    const store = new PlannerStore(new Api("", double.fetch));
    await store.init(SID);

    await store.commit("danio");

    const commits = double.log.filter(
      (r) =>
        r.method === "POST" &&
        r.url.includes("/whatif") &&
        r.url.includes("commit=true"),
    );
    expect(commits).toHaveLength(1);
    expect(commits[0].body).toEqual({ species: "danio" });

    // groups now mirror the post-commit GET suggestions payload exactly
    const reads = double.log.filter(
      (r) => r.method === "GET" && r.url.endsWith("/suggestions"),
    );
    expect(reads.length).toBeGreaterThanOrEqual(2); // initial load + post-commit

    const root = mountRoot();
    renderApp(root, store.vm, store);
    expect(renderedGroupMembers(root)).toEqual(
      FIX.solo.suggestionsAfter.groups.map((g) => g.members),
    );
    const scores = [
      ...root.querySelectorAll("[data-testid^='group-'] h3 [data-cf]"),
    ].map((badge) => badge.getAttribute("data-cf"));
    expect(scores).toEqual(
      FIX.solo.suggestionsAfter.groups.map((g) => String(g.score)),
    );
    // the committed fish is now a resident
    expect(store.vm.residents).toContain("danio");
  });

  test("preview highlights drop-outs without mutating the session", async () => {
    const double = soloDouble();
    const store = new PlannerStore(new Api("", double.fetch));
    await store.init(SID);
    const groupsBefore = store.vm.groups;

    await store.preview("danio");

    expect(double.log.some((r) => r.url.includes("commit=true"))).toBe(false);
    expect(store.vm.pendingWhatif?.removed).toEqual(
      FIX.solo.preview.removed_candidates,
    );
    expect(store.vm.groups).toEqual(groupsBefore);

    const root = mountRoot();
    renderApp(root, store.vm, store);
    const note = root.querySelector("[data-testid='preview-note']")!;
    expect(note.textContent).toContain("Asian Fish (asst.)");
    const struck = [...root.querySelectorAll("li.member.would-drop")].map(
      (li) => li.getAttribute("data-member"),
    );
    for (const name of FIX.solo.preview.removed_candidates) {
      expect(struck).toContain(name);
    }
  });

  test("preview on the discus fixture drops no current candidate", async () => {
    const double = (await import("./helpers.js")).discusDouble();
    const store = new PlannerStore(new Api("", double.fetch));
    await store.init(FIX.sessionView.id);
    await store.preview("catfish-corydoras");
    expect(store.vm.pendingWhatif?.removed).toEqual([]);
    const root = mountRoot();
    renderApp(root, store.vm, store);
    expect(
      root.querySelector("[data-testid='preview-note']")!.textContent,
    ).toContain("drops no current candidate");
  });

  test("stale candidate: 409 shows a toast and refreshes the view", async () => {
    const double = soloDouble();
    double.whatifStatus = { status: 409, json: FIX.error409 };
    const store = new PlannerStore(new Api("", double.fetch));
    await store.init(SID);
    const readsBefore = double.log.filter((r) => r.url.endsWith("/suggestions")).length;

    await store.commit("angelfish");

    expect(store.vm.toast).toBe("no longer a candidate");
    const readsAfter = double.log.filter((r) => r.url.endsWith("/suggestions")).length;
    expect(readsAfter).toBe(readsBefore + 1); // refreshed
    const root = mountRoot();
    renderApp(root, store.vm, store);
    expect(root.querySelector("[data-testid='toast']")).not.toBeNull();
  });
});
