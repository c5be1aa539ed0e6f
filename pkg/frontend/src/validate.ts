import type { ConditionValues } from "./types.js";

/** Raw form state: input strings plus the hiding-places checkbox. */
export interface ConditionForm {
  temperature_f: string;
  ph: string;
  hardness_dgh: string;
  tank_size_gal: string;
  has_hiding_places: boolean;
  stocking_ratio: string;
}

export const EMPTY_FORM: ConditionForm = {
  temperature_f: "",
  ph: "",
  hardness_dgh: "",
  tank_size_gal: "",
  has_hiding_places: false,
  stocking_ratio: "0",
};

export type FieldErrors = Partial<Record<keyof ConditionForm, string>>;

/**
 * Client-side mirror of the tank-state invariants, so obviously bad
 * values never leave the browser. The service re-validates everything.
 */
export function validateForm(
  form: ConditionForm,
): { values?: ConditionValues; errors: FieldErrors } {
  const errors: FieldErrors = {};

  const num = (field: keyof ConditionForm, raw: string): number => {
    const value = Number(raw);
    if (raw.trim() === "" || !Number.isFinite(value)) {
      errors[field] = "enter a number";
      return NaN;
    }
    return value;
  };

  const temperature = num("temperature_f", form.temperature_f);
  const ph = num("ph", form.ph);
  const hardness = num("hardness_dgh", form.hardness_dgh);
  const gallons = num("tank_size_gal", form.tank_size_gal);
  const stocking = num("stocking_ratio", form.stocking_ratio);

  if (!Number.isNaN(ph) && !(ph > 0 && ph <= 14)) {
    errors.ph = "ph out of range (0, 14]";
  }
  if (!Number.isNaN(hardness) && hardness < 0) {
    errors.hardness_dgh = "must be >= 0";
  }
  if (!Number.isNaN(gallons) && gallons <= 0) {
    errors.tank_size_gal = "must be > 0";
  }
  if (!Number.isNaN(stocking) && stocking < 0) {
    errors.stocking_ratio = "must be >= 0";
  }

  if (Object.keys(errors).length > 0) {
    return { errors };
  }
  return {
    errors,
    values: {
      temperature_f: temperature,
      ph,
      hardness_dgh: hardness,
      tank_size_gal: gallons,
      has_hiding_places: form.has_hiding_places,
      stocking_ratio: stocking,
    },
  };
}
