import { cfBadge, cfText } from "./badges.js";
import type { PlannerStore, PlannerViewModel } from "./state.js";
import type { ExplanationNode, SuggestionGroup } from "./types.js";

/** DOM rendering: view model in, elements out. No state lives here. */

function el<K extends keyof HTMLElementTagNameMap>(
  doc: Document,
  tag: K,
  attrs: Record<string, string> = {},
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = doc.createElement(tag);
  for (const [key, value] of Object.entries(attrs)) {
    node.setAttribute(key, value);
  }
  if (text !== undefined) node.textContent = text;
  return node;
}

function cfBadgeEl(doc: Document, cf: number): HTMLElement {
  const badge = el(doc, "span", {
    class: `cf-badge cf-${cfBadge(cf)}`,
    "data-cf": cfText(cf),
  });
  badge.textContent = cfText(cf);
  return badge;
}

function speciesName(vm: PlannerViewModel, id: string): string {
  const profile = vm.species.find((s) => s.id === id);
  return profile ? profile.name : id;
}

function renderConditionsForm(doc: Document, vm: PlannerViewModel, store: PlannerStore): HTMLElement {
  const section = el(doc, "section", { "data-testid": "conditions" });
  section.appendChild(el(doc, "h2", {}, "Tank conditions"));
  type TextField = "temperature_f" | "ph" | "hardness_dgh" | "tank_size_gal" | "stocking_ratio";
  const fields: Array<[TextField, string]> = [
    ["temperature_f", "Temperature (°F)"],
    ["ph", "pH"],
    ["hardness_dgh", "Hardness (°dGH)"],
    ["tank_size_gal", "Tank size (gal)"],
    ["stocking_ratio", "Stocking ratio (fish/gal)"],
  ];
  for (const [field, label] of fields) {
    const row = el(doc, "label", { class: "field" });
    row.appendChild(el(doc, "span", {}, label));
    const input = el(doc, "input", {
      name: field,
      value: vm.form[field],
      "data-testid": `input-${field}`,
    });
    input.addEventListener("input", () => {
      vm.form[field] = input.value;
    });
    row.appendChild(input);
    const error = vm.fieldErrors[field];
    if (error) {
      row.appendChild(
        el(doc, "span", { class: "field-error", "data-testid": `error-${field}` }, error),
      );
    }
    section.appendChild(row);
  }
  const hiding = el(doc, "label", { class: "field" });
  hiding.appendChild(el(doc, "span", {}, "Hiding places"));
  const checkbox = el(doc, "input", { type: "checkbox", "data-testid": "input-hiding" });
  (checkbox as HTMLInputElement).checked = vm.form.has_hiding_places;
  checkbox.addEventListener("change", () => {
    vm.form.has_hiding_places = (checkbox as HTMLInputElement).checked;
  });
  hiding.appendChild(checkbox);
  section.appendChild(hiding);

  const submit = el(doc, "button", { "data-testid": "submit-conditions" }, "Update plan");
  (submit as HTMLButtonElement).disabled = vm.pending;
  submit.addEventListener("click", () => void store.submitConditions());
  section.appendChild(submit);
  return section;
}

function renderEliminations(doc: Document, vm: PlannerViewModel, store: PlannerStore): HTMLElement {
  const section = el(doc, "section", { "data-testid": "eliminated" });
  section.appendChild(el(doc, "h2", {}, `Eliminated (${vm.eliminated.length})`));
  const list = el(doc, "ul");
  for (const record of vm.eliminated) {
    const item = el(doc, "li", { "data-testid": `eliminated-${record.species}` });
    item.appendChild(el(doc, "span", {}, `${speciesName(vm, record.species)}: `));
    const why = el(
      doc,
      "button",
      { class: "reason", "data-testid": `reason-${record.species}` },
      `${record.reason} (tank ${record.offending}, bound ${record.bound})`,
    );
    why.addEventListener("click", () =>
      void store.showExplanation(`elimination:${record.species}`),
    );
    item.appendChild(why);
    list.appendChild(item);
  }
  section.appendChild(list);
  return section;
}

function renderAdequate(doc: Document, vm: PlannerViewModel): HTMLElement {
  const section = el(doc, "section", { "data-testid": "adequate" });
  section.appendChild(el(doc, "h2", {}, `Adequate (${vm.adequate.length})`));
  const list = el(doc, "ul");
  for (const id of vm.adequate) {
    list.appendChild(el(doc, "li", { "data-testid": `adequate-${id}` }, speciesName(vm, id)));
  }
  section.appendChild(list);
  return section;
}

function renderResidents(doc: Document, vm: PlannerViewModel, store: PlannerStore): HTMLElement {
  const section = el(doc, "section", { "data-testid": "residents" });
  section.appendChild(el(doc, "h2", {}, "Residents"));
  const list = el(doc, "ul");
  for (const id of vm.residents) {
    const item = el(doc, "li", {}, `${speciesName(vm, id)} `);
    const remove = el(doc, "button", { "data-testid": `remove-${id}` }, "remove");
    (remove as HTMLButtonElement).disabled = vm.pending;
    remove.addEventListener("click", () => void store.removeResident(id));
    item.appendChild(remove);
    list.appendChild(item);
  }
  section.appendChild(list);

  const picker = el(doc, "select", { "data-testid": "resident-picker" });
  picker.appendChild(el(doc, "option", { value: "" }, "add a resident…"));
  for (const profile of vm.species) {
    picker.appendChild(el(doc, "option", { value: profile.id }, profile.name));
  }
  picker.addEventListener("change", () => {
    const choice = (picker as HTMLSelectElement).value;
    if (choice) void store.addResident(choice);
  });
  section.appendChild(picker);
  return section;
}

function memberId(vm: PlannerViewModel, name: string): string {
  const profile = vm.species.find((s) => s.name === name);
  return profile ? profile.id : name;
}

function renderGroup(
  doc: Document,
  vm: PlannerViewModel,
  store: PlannerStore,
  group: SuggestionGroup,
  rank: number,
): HTMLElement {
  const dropouts = new Set(vm.pendingWhatif?.removed ?? []);
  const card = el(doc, "article", { class: "group", "data-testid": `group-${rank}` });
  const heading = el(doc, "h3", {}, `#${rank} `);
  heading.appendChild(cfBadgeEl(doc, group.score));
  heading.appendChild(el(doc, "span", { class: "mean" }, ` mean ${cfText(group.mean)}`));
  card.appendChild(heading);

  const list = el(doc, "ul");
  for (const member of group.members) {
    const item = el(doc, "li", {
      class: dropouts.has(member) ? "member would-drop" : "member",
      "data-member": member,
    });
    item.appendChild(el(doc, "span", {}, member));
    const preview = el(
      doc,
      "button",
      { "data-testid": `preview-${memberId(vm, member)}` },
      "preview",
    );
    (preview as HTMLButtonElement).disabled = vm.pending;
    preview.addEventListener("click", () => void store.preview(memberId(vm, member)));
    const commit = el(
      doc,
      "button",
      { "data-testid": `commit-${memberId(vm, member)}` },
      "add to tank",
    );
    (commit as HTMLButtonElement).disabled = vm.pending;
    commit.addEventListener("click", () => void store.commit(memberId(vm, member)));
    item.appendChild(preview);
    item.appendChild(commit);
    list.appendChild(item);
  }
  card.appendChild(list);

  const witnesses = el(doc, "details", { class: "witnesses" });
  witnesses.appendChild(el(doc, "summary", {}, "pairings"));
  const pairList = el(doc, "ul");
  for (const witness of group.witnesses) {
    const line = el(doc, "li", {}, `${witness.pair[0]} × ${witness.pair[1]} `);
    line.appendChild(cfBadgeEl(doc, witness.adjusted_cf));
    pairList.appendChild(line);
  }
  witnesses.appendChild(pairList);
  card.appendChild(witnesses);
  return card;
}

function renderGroups(doc: Document, vm: PlannerViewModel, store: PlannerStore): HTMLElement {
  const section = el(doc, "section", { "data-testid": "groups" });
  const title =
    vm.threshold === null
      ? "Suggested groups"
      : `Suggested groups (threshold ${cfText(vm.threshold)})`;
  section.appendChild(el(doc, "h2", {}, title));
  if (vm.pendingWhatif) {
    const note = el(
      doc,
      "p",
      { class: "preview-note", "data-testid": "preview-note" },
      vm.pendingWhatif.removed.length === 0
        ? `Committing ${speciesName(vm, vm.pendingWhatif.species)} drops no current candidate.`
        : `Committing ${speciesName(vm, vm.pendingWhatif.species)} drops: ` +
          vm.pendingWhatif.removed.join(", "),
    );
    const dismiss = el(doc, "button", { "data-testid": "dismiss-preview" }, "dismiss");
    dismiss.addEventListener("click", () => store.dismissPreview());
    note.appendChild(dismiss);
    section.appendChild(note);
  }
  vm.groups.forEach((group, index) => {
    section.appendChild(renderGroup(doc, vm, store, group, index + 1));
  });
  if (vm.groups.length === 0 && vm.conditionsSet) {
    section.appendChild(el(doc, "p", { "data-testid": "no-groups" }, "no compatible additions"));
  }
  for (const warning of vm.warnings) {
    section.appendChild(el(doc, "p", { class: "warning" }, warning));
  }
  return section;
}

export function renderTree(doc: Document, node: ExplanationNode): HTMLElement {
  if (node.children.length === 0) {
    return el(doc, "p", { class: `tree-leaf tree-${node.kind}` }, node.label);
  }
  const details = el(doc, "details", { class: `tree-node tree-${node.kind}`, open: "" });
  details.appendChild(el(doc, "summary", {}, node.label));
  for (const child of node.children) {
    details.appendChild(renderTree(doc, child));
  }
  return details;
}

function renderExplanation(doc: Document, vm: PlannerViewModel): HTMLElement {
  const section = el(doc, "section", { "data-testid": "explanation" });
  section.appendChild(el(doc, "h2", {}, "Explanation"));
  if (vm.explanationNotice) {
    section.appendChild(
      el(doc, "p", { class: "notice", "data-testid": "explanation-notice" }, vm.explanationNotice),
    );
  } else if (vm.explanation) {
    section.appendChild(renderTree(doc, vm.explanation.tree));
  } else {
    section.appendChild(el(doc, "p", {}, "click an elimination reason to see why"));
  }
  return section;
}

export function renderApp(root: HTMLElement, vm: PlannerViewModel, store: PlannerStore): void {
  const doc = root.ownerDocument;
  root.textContent = "";
  if (vm.banner) {
    const banner = el(doc, "div", { class: "banner", "data-testid": "banner" }, vm.banner + " ");
    const retry = el(doc, "button", { "data-testid": "retry" }, "retry");
    retry.addEventListener("click", () => void store.retry());
    banner.appendChild(retry);
    root.appendChild(banner);
  }
  if (vm.toast) {
    const toast = el(doc, "div", { class: "toast", "data-testid": "toast" }, vm.toast + " ");
    const ok = el(doc, "button", {}, "ok");
    ok.addEventListener("click", () => store.clearToast());
    toast.appendChild(ok);
    root.appendChild(toast);
  }
  root.appendChild(renderConditionsForm(doc, vm, store));
  root.appendChild(renderResidents(doc, vm, store));
  root.appendChild(renderAdequate(doc, vm));
  root.appendChild(renderEliminations(doc, vm, store));
  root.appendChild(renderGroups(doc, vm, store));
  root.appendChild(renderExplanation(doc, vm));
}
