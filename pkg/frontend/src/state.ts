import { Api, ApiError, NetworkError } from "./api.js";
import type {
  EliminationRecord,
  ExplanationNode,
  SpeciesProfile,
  SuggestionGroup,
} from "./types.js";
import { ConditionForm, EMPTY_FORM, FieldErrors, validateForm } from "./validate.js";

/**
 * The planner view model: a pure projection of the latest service
 * responses. Every certainty factor held here was copied verbatim from
 * a payload; nothing is re-derived client-side.
 */
export interface PlannerViewModel {
  sessionId: string | null;
  species: SpeciesProfile[];
  form: ConditionForm;
  fieldErrors: FieldErrors;
  banner: string | null;
  toast: string | null;
  conditionsSet: boolean;
  residents: string[];
  adequate: string[];
  eliminated: EliminationRecord[];
  warnings: string[];
  threshold: number | null;
  groups: SuggestionGroup[];
  pendingWhatif: {
    species: string;
    groups: SuggestionGroup[];
    removed: string[];
  } | null;
  explanation: { target: string; tree: ExplanationNode } | null;
  explanationNotice: string | null;
  pending: boolean;
}

function emptyViewModel(): PlannerViewModel {
  return {
    sessionId: null,
    species: [],
    form: { ...EMPTY_FORM },
    fieldErrors: {},
    banner: null,
    toast: null,
    conditionsSet: false,
    residents: [],
    adequate: [],
    eliminated: [],
    warnings: [],
    threshold: null,
    groups: [],
    pendingWhatif: null,
    explanation: null,
    explanationNotice: null,
    pending: false,
  };
}

type Listener = (vm: PlannerViewModel) => void;

export class PlannerStore {
  readonly vm: PlannerViewModel = emptyViewModel();
  private listeners: Listener[] = [];

  constructor(private readonly api: Api) {}

  subscribe(listener: Listener): void {
    this.listeners.push(listener);
  }

  private notify(): void {
    for (const listener of this.listeners) listener(this.vm);
  }

  /** Fetch the species list once and attach to (or create) a session. */
  async init(sessionId?: string): Promise<void> {
    this.vm.species = (await this.api.listSpecies()).species;
    if (sessionId) {
      this.vm.sessionId = sessionId;
      await this.refresh();
    } else {
      this.vm.sessionId = (await this.api.createSession()).id;
      this.notify();
    }
  }

  /** Rebuild the whole view from the service: the hard-refresh path. */
  async refresh(): Promise<void> {
    const sid = this.requireSession();
    const view = await this.api.getSession(sid);
    this.vm.residents = view.residents;
    this.vm.conditionsSet = view.conditions !== null;
    if (view.conditions !== null) {
      this.vm.form = {
        temperature_f: String(view.conditions.temperature_f),
        ph: String(view.conditions.ph),
        hardness_dgh: String(view.conditions.hardness_dgh),
        tank_size_gal: String(view.conditions.tank_size_gal),
        has_hiding_places: view.conditions.has_hiding_places,
        stocking_ratio: String(view.conditions.stocking_ratio),
      };
    }
    if (view.result !== null) {
      this.vm.adequate = view.result.adequate;
      this.vm.eliminated = view.result.eliminated;
      this.vm.warnings = view.result.warnings;
    }
    if (this.vm.conditionsSet) {
      const suggestions = await this.api.getSuggestions(sid);
      this.vm.threshold = suggestions.threshold;
      this.vm.groups = suggestions.groups;
    }
    this.vm.pendingWhatif = null;
    this.notify();
  }

  async submitConditions(): Promise<void> {
    if (this.vm.pending) return;
    const { values, errors } = validateForm(this.vm.form);
    this.vm.fieldErrors = errors;
    if (!values) {
      this.notify();
      return;
    }
    await this.mutate(async () => {
      const sid = this.requireSession();
      const result = await this.api.setConditions(sid, values);
      this.vm.conditionsSet = true;
      this.vm.adequate = result.adequate;
      this.vm.eliminated = result.eliminated;
      this.vm.warnings = result.warnings;
      const suggestions = await this.api.getSuggestions(sid);
      this.vm.threshold = suggestions.threshold;
      this.vm.groups = suggestions.groups;
      this.vm.pendingWhatif = null;
    });
  }

  async addResident(species: string): Promise<void> {
    await this.residentOp(() => this.api.addResident(this.requireSession(), species));
  }

  async removeResident(species: string): Promise<void> {
    await this.residentOp(() => this.api.removeResident(this.requireSession(), species));
  }

  private async residentOp(op: () => Promise<import("./types.js").SessionView>): Promise<void> {
    if (this.vm.pending) return;
    await this.mutate(async () => {
      const view = await op();
      this.vm.residents = view.residents;
      if (view.result !== null) {
        this.vm.adequate = view.result.adequate;
        this.vm.eliminated = view.result.eliminated;
        this.vm.warnings = view.result.warnings;
      }
      if (this.vm.conditionsSet) {
        const suggestions = await this.api.getSuggestions(this.requireSession());
        this.vm.threshold = suggestions.threshold;
        this.vm.groups = suggestions.groups;
      }
      this.vm.pendingWhatif = null;
    });
  }

  /** Preview what committing a species would do; highlights drop-outs. */
  async preview(species: string): Promise<void> {
    if (this.vm.pending) return;
    await this.mutate(async () => {
      try {
        const payload = await this.api.whatif(this.requireSession(), species, false);
        this.vm.pendingWhatif = {
          species,
          groups: payload.groups,
          removed: payload.removed_candidates,
        };
      } catch (error) {
        if (error instanceof ApiError && error.status === 409) {
          this.vm.toast = "no longer a candidate";
          await this.refreshGroups();
          return;
        }
        throw error;
      }
    });
  }

  /** Commit a suggestion: exactly one commit request, then re-rank from
   * a fresh suggestions read. */
  async commit(species: string): Promise<void> {
    if (this.vm.pending) return;
    await this.mutate(async () => {
      try {
        await this.api.whatif(this.requireSession(), species, true);
      } catch (error) {
        if (error instanceof ApiError && error.status === 409) {
          this.vm.toast = "no longer a candidate";
          await this.refreshGroups();
          return;
        }
        throw error;
      }
      this.vm.pendingWhatif = null;
      const sid = this.requireSession();
      const view = await this.api.getSession(sid);
      this.vm.residents = view.residents;
      if (view.result !== null) {
        this.vm.adequate = view.result.adequate;
        this.vm.eliminated = view.result.eliminated;
        this.vm.warnings = view.result.warnings;
      }
      if (view.conditions !== null) {
        this.vm.form.stocking_ratio = String(view.conditions.stocking_ratio);
      }
      const suggestions = await this.api.getSuggestions(sid);
      this.vm.threshold = suggestions.threshold;
      this.vm.groups = suggestions.groups;
    });
  }

  dismissPreview(): void {
    this.vm.pendingWhatif = null;
    this.notify();
  }

  async showExplanation(target: string): Promise<void> {
    this.vm.explanationNotice = null;
    try {
      const tree = await this.api.getExplanation(this.requireSession(), target);
      this.vm.explanation = { target, tree };
    } catch (error) {
      if (error instanceof ApiError && error.status === 404) {
        this.vm.explanation = null;
        this.vm.explanationNotice = "no explanation available for that item";
      } else if (error instanceof NetworkError) {
        this.vm.banner = error.message;
      } else {
        throw error;
      }
    }
    this.notify();
  }

  /** Re-run the last failed mutation after the banner's retry button. */
  async retry(): Promise<void> {
    this.vm.banner = null;
    this.notify();
    if (this.lastMutation) {
      const again = this.lastMutation;
      this.lastMutation = null;
      await again();
    }
  }

  clearToast(): void {
    this.vm.toast = null;
    this.notify();
  }

  private lastMutation: (() => Promise<void>) | null = null;

  private async refreshGroups(): Promise<void> {
    const suggestions = await this.api.getSuggestions(this.requireSession());
    this.vm.threshold = suggestions.threshold;
    this.vm.groups = suggestions.groups;
    this.vm.pendingWhatif = null;
  }

  private requireSession(): string {
    if (!this.vm.sessionId) throw new Error("no session yet");
    return this.vm.sessionId;
  }

  /** Shared mutation wrapper: one in flight, banner on network trouble,
   * inline field errors on 422. */
  private async mutate(body: () => Promise<void>): Promise<void> {
    this.vm.pending = true;
    this.vm.toast = null;
    this.notify();
    try {
      await body();
      this.vm.banner = null;
      this.vm.fieldErrors = {};
      this.lastMutation = null;
    } catch (error) {
      if (error instanceof NetworkError) {
        this.vm.banner = error.message;
        this.lastMutation = () => this.mutate(body);
      } else if (error instanceof ApiError && error.status === 422 && error.field) {
        this.vm.fieldErrors = { [error.field]: error.message };
      } else if (error instanceof ApiError) {
        this.vm.toast = error.message;
      } else {
        throw error;
      }
    } finally {
      this.vm.pending = false;
      this.notify();
    }
  }
}
