/** Display-only CF bucketing for badge colors. The number shown next to a
 * badge is always the verbatim payload value (String(cf)); these cutoffs
 * pick a CSS class and are unrelated to the engine's grouping threshold. */

export type BadgeLevel = "high" | "medium" | "low";

export function cfBadge(cf: number): BadgeLevel {
  if (cf >= 0.7) return "high";
  if (cf >= 0.4) return "medium";
  return "low";
}

/** Render a payload number exactly as received, no rounding. */
export function cfText(cf: number): string {
  return String(cf);
}
