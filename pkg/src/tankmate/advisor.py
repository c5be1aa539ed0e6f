"""Consultation pipeline: eliminate by conditions, score pairs, group.

Elimination runs through the inference engine (one constraint rule per
water factor) so the explanation facility covers it; scoring and
grouping are direct computations over the compatibility matrix.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations

from .cf import cf_combine
from .cliques import greedy_groups, max_cliques
from .engine import Trace, WorkingMemory, run
from .kb import (
    CfModifier,
    CompatibilityMatrix,
    CompatLevel,
    FishProfile,
    KnowledgeBase,
    ProfileSet,
    TankState,
    packaged_data,
    validate_tank,
)
from .rulelang import RuleSet, parse_rules


class ConsultationError(Exception):
    """A consultation-level contract violation (bad threshold, bad what-if)."""


@dataclass(frozen=True)
class AdvisorConfig:
    """Tunables in one place: the qualitative-level mapping and defaults.

    H/M/L map to 0.9/0.5/0.1 so the three labels sit evenly around the
    0.5 default threshold: M qualifies exactly at the default, L never
    does. Negative modifier deltas scale belief down (cf * (1 + d)) to
    stay inside [0, 1].
    """

    cf_high: float = 0.9
    cf_medium: float = 0.5
    cf_low: float = 0.1
    default_threshold: float = 0.5
    clique_cap: int = 10_000

    def level_cf(self, level: CompatLevel) -> float:
        return {"H": self.cf_high, "M": self.cf_medium, "L": self.cf_low}[level.value]


DEFAULT_CONFIG = AdvisorConfig()

REASONS = (
    "too-cold",
    "too-hot",
    "ph-low",
    "ph-high",
    "hardness-low",
    "hardness-high",
    "tank-too-small",
)


@dataclass(frozen=True)
class EliminationRecord:
    species: str
    reason: str
    offending: float
    bound: float

    def to_dict(self) -> dict:
        return {
            "species": self.species,
            "reason": self.reason,
            "offending": self.offending,
            "bound": self.bound,
        }


@dataclass(frozen=True)
class PairScore:
    """Compatibility belief for one species pair under the tank context."""

    a: str
    b: str
    level: CompatLevel | None
    base: float
    adjusted: float
    applied: tuple[str, ...]
    known: bool

    def to_dict(self) -> dict:
        return {
            "pair": sorted((self.a, self.b)),
            "level": self.level.value if self.level else None,
            "base_cf": self.base,
            "adjusted_cf": self.adjusted,
            "modifiers": list(self.applied),
            "known": self.known,
        }


@dataclass(frozen=True)
class SuggestionGroup:
    """A maximal set of mutually compatible candidates.

    ``score`` is the weakest witness pair (one bad pairing is what
    injures fish); ``mean`` is a secondary display value. A lone
    candidate with no residents has no witness pairs and scores 1.0.
    """

    members: tuple[str, ...]
    score: float
    mean: float
    witnesses: tuple[PairScore, ...]

    def to_dict(self) -> dict:
        return {
            "members": list(self.members),
            "score": self.score,
            "mean": self.mean,
            "witnesses": [w.to_dict() for w in self.witnesses],
        }


def base_cf(level: CompatLevel, config: AdvisorConfig = DEFAULT_CONFIG) -> float:
    """Certainty granted by a bare compatibility level."""
    return config.level_cf(level)


def adjusted_pair_cf(
    a: str,
    b: str,
    matrix: CompatibilityMatrix,
    tank: TankState,
    modifiers: list[CfModifier],
    config: AdvisorConfig = DEFAULT_CONFIG,
) -> PairScore:
    """Score one pair: base level certainty folded with active modifiers.

    Modifiers apply in ascending id order; positive deltas combine as
    independent evidence, negative deltas scale down. A pair absent from
    the matrix scores 0.0 and is flagged unknown — never recommended.
    """
    level = matrix.lookup(a, b)
    if level is None:
        return PairScore(a=a, b=b, level=None, base=0.0, adjusted=0.0, applied=(), known=False)
    base = config.level_cf(level)
    cf = base
    applied: list[str] = []
    for mod in sorted(modifiers, key=lambda m: m.id):
        if mod.applies_to(tank):
            applied.append(mod.id)
            if mod.delta >= 0:
                cf = cf_combine(cf, mod.delta)
            else:
                cf = cf * (1.0 + mod.delta)
    cf = min(1.0, max(0.0, cf))
    return PairScore(a=a, b=b, level=level, base=base, adjusted=cf, applied=tuple(applied), known=True)


# --- condition filtering -----------------------------------------------------


@lru_cache(maxsize=1)
def default_rules() -> RuleSet:
    """The packaged water-condition constraint rules."""
    return parse_rules(packaged_data("constraints.rules"))


def fish_fact_slots(profile: FishProfile) -> dict:
    """Slot layout of a profile fact as the constraint rules expect it."""
    return {
        "id": profile.id,
        "name": profile.name,
        "tempmin": profile.temp_min_f,
        "tempmax": profile.temp_max_f,
        "phmin": profile.ph_min,
        "phmax": profile.ph_max,
        "hardmin": profile.hardness_min_dgh,
        "hardmax": profile.hardness_max_dgh,
        "mintank": profile.min_tank_gal,
    }


def seed_working_memory(tank: TankState, profiles: ProfileSet) -> WorkingMemory:
    """Profiles first, then the measured conditions."""
    wm = WorkingMemory()
    for profile in profiles:
        wm.assert_fact("fish", fish_fact_slots(profile))
    wm.assert_fact("aqua-temp", {"0": tank.temperature_f})
    wm.assert_fact("aqua-ph", {"0": tank.ph})
    wm.assert_fact("aqua-hardness", {"0": tank.hardness_dgh})
    wm.assert_fact("aqua-size", {"0": tank.tank_size_gal})
    return wm


_FACTORS = {
    "temp": ("temperature_f", "temp_min_f", "temp_max_f", "too-cold", "too-hot"),
    "ph": ("ph", "ph_min", "ph_max", "ph-low", "ph-high"),
    "hardness": ("hardness_dgh", "hardness_min_dgh", "hardness_max_dgh",
                 "hardness-low", "hardness-high"),
}


def _envelope_violation(profile: FishProfile, tank: TankState) -> tuple[str, float, float] | None:
    """First violated constraint in fixed factor order, or None."""
    for tank_field, lo_field, hi_field, lo_reason, hi_reason in _FACTORS.values():
        value = getattr(tank, tank_field)
        lo, hi = getattr(profile, lo_field), getattr(profile, hi_field)
        if value < lo:
            return (lo_reason, value, lo)
        if value > hi:
            return (hi_reason, value, hi)
    if tank.tank_size_gal < profile.min_tank_gal:
        return ("tank-too-small", tank.tank_size_gal, profile.min_tank_gal)
    return None


def _reason_for(rule_name: str | None, profile: FishProfile, tank: TankState
                ) -> tuple[str, float, float]:
    """Reason code for a retraction, from the rule name plus a recheck."""
    suffix = (rule_name or "").rsplit("check-", 1)[-1] if rule_name else ""
    if suffix == "tank-size":
        return ("tank-too-small", tank.tank_size_gal, profile.min_tank_gal)
    factor = _FACTORS.get(suffix)
    if factor is not None:
        tank_field, lo_field, hi_field, lo_reason, hi_reason = factor
        value = getattr(tank, tank_field)
        lo, hi = getattr(profile, lo_field), getattr(profile, hi_field)
        if value < lo:
            return (lo_reason, value, lo)
        if value > hi:
            return (hi_reason, value, hi)
    violation = _envelope_violation(profile, tank)
    if violation is None:  # pragma: no cover - retraction without violation
        raise ConsultationError(
            f"rule {rule_name!r} retracted {profile.id!r} but no constraint is violated"
        )
    return violation


def _run_filter(
    tank: TankState, profiles: ProfileSet, rules: RuleSet
) -> tuple[list[str], list[EliminationRecord], WorkingMemory]:
    wm = seed_working_memory(tank, profiles)
    budget = max(64, 2 * (len(profiles) + 4) * (len(rules) + 1))
    result = run(wm, rules, max_cycles=budget)
    if result.interrupted:
        raise ConsultationError("constraint rules did not settle within the cycle budget")

    live_ids = {f.slots.get("id") for f in wm.live() if f.template == "fish"}
    adequate = [p.id for p in profiles if p.id in live_ids]

    eliminated: list[EliminationRecord] = []
    for ev in wm.trace:
        if ev.kind != "retract" or ev.redundant or ev.fact.get("template") != "fish":
            continue
        slots = ev.fact.get("slots", {})
        profile = profiles.get(slots.get("id")) or profiles.by_name.get(slots.get("name"))
        if profile is None:
            continue
        reason, offending, bound = _reason_for(ev.rule, profile, tank)
        eliminated.append(
            EliminationRecord(species=profile.id, reason=reason, offending=offending, bound=bound)
        )
    return adequate, eliminated, wm


def filter_by_conditions(
    tank: TankState, profiles: ProfileSet, rules: RuleSet | None = None
) -> tuple[list[str], list[EliminationRecord]]:
    """Partition profiles into condition-adequate species and eliminations.

    Bounds are inclusive: a measurement sitting exactly on a profile
    bound is adequate. Runs the constraint rules through the engine so
    every elimination is explainable from the trace.
    """
    adequate, eliminated, _ = _run_filter(tank, profiles, rules or default_rules())
    return adequate, eliminated


# --- grouping ----------------------------------------------------------------


def _check_threshold(threshold: float) -> float:
    if not 0.0 <= threshold <= 1.0:
        raise ConsultationError(f"threshold out of range [0, 1]: {threshold!r}")
    return float(threshold)


def _suggest(
    tank: TankState,
    adequate: list[str],
    profiles: ProfileSet,
    matrix: CompatibilityMatrix,
    modifiers: list[CfModifier],
    threshold: float,
    config: AdvisorConfig,
) -> tuple[list[SuggestionGroup], bool]:
    threshold = _check_threshold(threshold)
    resident_names = [
        profiles.get(r).name for r in tank.residents if profiles.get(r) is not None
    ]

    def pair(a: str, b: str) -> PairScore:
        return adjusted_pair_cf(a, b, matrix, tank, modifiers, config)

    scores: dict[tuple[str, str], PairScore] = {}

    def score_of(a: str, b: str) -> PairScore:
        key = (a, b) if a <= b else (b, a)
        if key not in scores:
            scores[key] = pair(*key)
        return scores[key]

    candidates: list[str] = []
    for sid in adequate:
        if sid in tank.residents:
            continue
        name = profiles.get(sid).name
        if all(score_of(name, rn).adjusted >= threshold for rn in resident_names):
            candidates.append(name)

    neighbors: dict[str, set[str]] = {c: set() for c in candidates}
    for a, b in combinations(sorted(candidates), 2):
        if score_of(a, b).adjusted >= threshold:
            neighbors[a].add(b)
            neighbors[b].add(a)

    member_sets, truncated = max_cliques(candidates, neighbors, cap=config.clique_cap)
    if truncated:
        member_sets = greedy_groups(candidates, neighbors)

    groups: list[SuggestionGroup] = []
    for member_set in member_sets:
        members = tuple(sorted(member_set))
        witnesses = [score_of(a, b) for a, b in combinations(members, 2)]
        witnesses += [score_of(m, rn) for m in members for rn in resident_names]
        if witnesses:
            score = min(w.adjusted for w in witnesses)
            mean = sum(w.adjusted for w in witnesses) / len(witnesses)
        else:
            score = mean = 1.0
        groups.append(
            SuggestionGroup(members=members, score=score, mean=mean, witnesses=tuple(witnesses))
        )
    groups.sort(key=lambda g: (-g.score, -len(g.members), g.members))
    return groups, truncated


def suggest_groups(
    tank: TankState,
    adequate: list[str],
    profiles: ProfileSet,
    matrix: CompatibilityMatrix,
    modifiers: list[CfModifier],
    threshold: float,
    config: AdvisorConfig = DEFAULT_CONFIG,
) -> list[SuggestionGroup]:
    """Ranked maximal groups of mutually compatible candidates.

    A candidate must clear the threshold against every resident; groups
    are maximal cliques of the pairwise-threshold graph, scored by their
    weakest witness pair and sorted by score, then size, then names.
    """
    groups, _ = _suggest(tank, adequate, profiles, matrix, modifiers, threshold, config)
    return groups


# --- full consultation --------------------------------------------------------


@dataclass(frozen=True)
class ConsultationResult:
    adequate: tuple[str, ...]
    eliminated: tuple[EliminationRecord, ...]
    groups: tuple[SuggestionGroup, ...]
    warnings: tuple[str, ...]
    trace: Trace
    threshold: float
    grouping_degraded: bool = False

    @property
    def trace_ref(self) -> str:
        digest = hashlib.sha256(self.trace.to_jsonl().encode("utf-8")).hexdigest()
        return f"sha256:{digest}"

    def to_dict(self) -> dict:
        return {
            "adequate": list(self.adequate),
            "eliminated": [e.to_dict() for e in self.eliminated],
            "groups": [g.to_dict() for g in self.groups],
            "warnings": list(self.warnings),
            "trace_ref": self.trace_ref,
        }

    def to_json(self, indent: int | None = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent)

    def candidate_names(self) -> list[str]:
        """Every species name appearing in some group, sorted."""
        names: set[str] = set()
        for g in self.groups:
            names.update(g.members)
        return sorted(names)


def run_consultation(
    tank: TankState,
    kb: KnowledgeBase,
    rules: RuleSet | None = None,
    threshold: float | None = None,
    config: AdvisorConfig = DEFAULT_CONFIG,
) -> ConsultationResult:
    """The full pipeline; a pure function of its inputs."""
    validate_tank(tank)
    threshold = _check_threshold(
        config.default_threshold if threshold is None else threshold
    )
    rules = rules or default_rules()
    adequate, eliminated, wm = _run_filter(tank, kb.profiles, rules)

    warnings: list[str] = []
    for resident in tank.residents:
        profile = kb.profiles.get(resident)
        if profile is None:
            warnings.append(
                f"unknown species {resident!r} excluded from compatibility scoring"
            )
            continue
        violation = _envelope_violation(profile, tank)
        if violation is not None:
            reason, offending, bound = violation
            warnings.append(
                f"resident {resident!r} is outside its envelope: "
                f"{reason} (tank {offending:g}, bound {bound:g})"
            )

    groups, degraded = _suggest(
        tank, adequate, kb.profiles, kb.matrix, kb.modifiers, threshold, config
    )
    if degraded:
        warnings.append(
            "compatible combinations exceeded the enumeration cap; groups were formed greedily"
        )
    return ConsultationResult(
        adequate=tuple(adequate),
        eliminated=tuple(eliminated),
        groups=tuple(groups),
        warnings=tuple(warnings),
        trace=wm.trace,
        threshold=threshold,
        grouping_degraded=degraded,
    )


def elimination_trace_target(trace: Trace, species_id: str) -> str | None:
    """Trace target for a species' elimination, or None if it was kept."""
    for ev in trace:
        if (
            ev.kind == "retract"
            and not ev.redundant
            and ev.fact.get("template") == "fish"
            and ev.fact.get("slots", {}).get("id") == species_id
        ):
            return f"retract:{ev.fact['id']}"
    return None


def profile_fact_target(trace: Trace, species_id: str) -> str | None:
    """Trace target for a species' seeded profile fact."""
    for ev in trace:
        if (
            ev.kind == "assert"
            and ev.fact.get("template") == "fish"
            and ev.fact.get("slots", {}).get("id") == species_id
        ):
            return f"fact:{ev.fact['id']}"
    return None


def whatif_add(
    result: ConsultationResult,
    tank: TankState,
    kb: KnowledgeBase,
    species_id: str,
    rules: RuleSet | None = None,
    config: AdvisorConfig = DEFAULT_CONFIG,
) -> ConsultationResult:
    """Re-run the consultation as if one suggested species were committed.

    The species must appear in a current group. The previous result and
    tank are untouched; the stocking ratio gains one fish's worth.
    """
    profile = kb.profiles.get(species_id)
    suggested = profile is not None and any(
        profile.name in g.members for g in result.groups
    )
    if not suggested:
        raise ConsultationError(f"{species_id!r} is not a current candidate")
    new_tank = dataclasses.replace(
        tank,
        residents=tank.residents + (species_id,),
        stocking_ratio=tank.stocking_ratio + 1.0 / tank.tank_size_gal,
    )
    return run_consultation(new_tank, kb, rules=rules, threshold=result.threshold, config=config)
