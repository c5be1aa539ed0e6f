"""Forward-chaining inference: working memory, matching, and the run loop.

Matching is a naive rescan per cycle rather than a discrimination
network; at desk scale (hundreds of facts, tens of rules) that is ample,
and the matcher lives behind ``_activations`` so a network matcher could
replace it without touching the loop.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .cf import cf_combine, cf_conjunction
from .rulelang import (
    CRLF_MARK,
    AssertFact,
    If,
    Pattern,
    Printout,
    Retract,
    RuleAst,
    RuleSet,
    Var,
)


class EngineError(Exception):
    """Invalid working-memory operation or rule execution failure."""


def _norm_value(v: object) -> object:
    """Slot values are floats, bools, or strings; ints become floats."""
    if isinstance(v, bool) or isinstance(v, str):
        return v
    if isinstance(v, (int, float)):
        return float(v)
    raise EngineError(f"unsupported slot value {v!r}")


@dataclass
class Fact:
    id: int
    template: str
    slots: dict[str, object]
    cf: float = 1.0

    def snapshot(self) -> dict:
        return {
            "id": self.id,
            "template": self.template,
            "slots": dict(self.slots),
            "cf": self.cf,
        }

    def render(self) -> str:
        inner = " ".join(f"{k} {_fmt(v)}" for k, v in self.slots.items())
        return f"#{self.id} ({self.template} {inner}) cf={_fmt(self.cf)}"


@dataclass
class TraceEvent:
    """One step of the session history.

    ``kind`` is one of fire / assert / retract / print / cf-update.
    ``fire_ordinal`` links an action event to the firing that caused it
    (None when the mutation came from outside a run).
    """

    ordinal: int
    kind: str
    rule: str | None
    fact: dict | None
    text: str
    fire_ordinal: int | None = None
    matched: tuple[int, ...] = ()
    redundant: bool = False

    def to_json_line(self) -> str:
        payload = {
            "ordinal": self.ordinal,
            "kind": self.kind,
            "rule": self.rule,
            "fact": self.fact,
            "text": self.text,
        }
        return json.dumps(payload, separators=(",", ":"))


class Trace:
    """Append-only event list with strictly increasing ordinals."""

    def __init__(self):
        self.events: list[TraceEvent] = []

    def add(self, kind: str, rule: str | None, fact: dict | None, text: str,
            fire_ordinal: int | None = None, matched: tuple[int, ...] = (),
            redundant: bool = False) -> TraceEvent:
        ev = TraceEvent(
            ordinal=len(self.events) + 1,
            kind=kind,
            rule=rule,
            fact=fact,
            text=text,
            fire_ordinal=fire_ordinal,
            matched=matched,
            redundant=redundant,
        )
        self.events.append(ev)
        return ev

    def __iter__(self):
        return iter(self.events)

    def __len__(self):
        return len(self.events)

    def to_jsonl(self) -> str:
        return "\n".join(ev.to_json_line() for ev in self.events) + ("\n" if self.events else "")


class WorkingMemory:
    """Session-scoped fact store; fact ids are never reused."""

    def __init__(self):
        self.facts: dict[int, Fact] = {}
        self.retracted: set[int] = set()
        self.retraction_log: list[tuple[int, str | None]] = []
        self._next_id = 1
        self.trace = Trace()

    def live(self) -> list[Fact]:
        return [self.facts[fid] for fid in sorted(self.facts)]

    def get(self, fact_id: int) -> Fact:
        fact = self.facts.get(fact_id)
        if fact is None:
            if fact_id in self.retracted:
                raise EngineError(f"fact {fact_id} is retracted")
            raise EngineError(f"fact {fact_id} was never asserted")
        return fact

    def assert_fact(
        self,
        template: str,
        slots: dict[str, object],
        cf: float = 1.0,
        rule: str | None = None,
        fire_ordinal: int | None = None,
    ) -> int:
        """Add a fact, or strengthen the cf of an identical live fact.

        Duplicate (template, slots) asserts merge via cf_combine and keep
        the existing id, so repeated evidence accumulates monotonically.
        """
        if not 0.0 <= cf <= 1.0:
            raise EngineError(f"cf out of range [0, 1]: {cf!r}")
        norm = {str(k): _norm_value(v) for k, v in slots.items()}
        for fact in self.facts.values():
            if fact.template == template and fact.slots == norm:
                old = fact.cf
                fact.cf = cf_combine(old, cf)
                self.trace.add(
                    "cf-update",
                    rule,
                    fact.snapshot(),
                    f"cf of #{fact.id} {_fmt(old)} + {_fmt(cf)} -> {_fmt(fact.cf)}",
                    fire_ordinal=fire_ordinal,
                )
                return fact.id
        fact = Fact(id=self._next_id, template=template, slots=norm, cf=float(cf))
        self._next_id += 1
        self.facts[fact.id] = fact
        self.trace.add(
            "assert", rule, fact.snapshot(), f"assert {fact.render()}",
            fire_ordinal=fire_ordinal,
        )
        return fact.id

    def retract_fact(
        self,
        fact_id: int,
        rule: str | None = None,
        fire_ordinal: int | None = None,
    ) -> bool:
        """Remove a live fact. Retracting an already-retracted id is a
        recorded no-op; an id that never existed is an error."""
        fact = self.facts.get(fact_id)
        if fact is not None:
            del self.facts[fact_id]
            self.retracted.add(fact_id)
            self.retraction_log.append((fact_id, rule))
            self.trace.add(
                "retract", rule, fact.snapshot(), f"retract {fact.render()}",
                fire_ordinal=fire_ordinal,
            )
            return True
        if fact_id in self.retracted:
            self.trace.add(
                "retract", rule, {"id": fact_id},
                f"retract #{fact_id} (no-op, already retracted)",
                fire_ordinal=fire_ordinal, redundant=True,
            )
            return False
        raise EngineError(f"fact {fact_id} was never asserted")


@dataclass(frozen=True)
class Activation:
    """One matched (rule, fact tuple), ready to fire at most once."""

    rule_name: str
    rule_index: int
    fact_ids: tuple[int, ...]
    env: dict[str, object] = field(compare=False, hash=False)

    @property
    def key(self) -> tuple[str, tuple[int, ...]]:
        return (self.rule_name, self.fact_ids)

    @property
    def timestamp(self) -> int:
        return max(self.fact_ids)


def _match_pattern(pattern: Pattern, fact: Fact, env: dict[str, object]) -> dict | None:
    """Try to extend ``env`` so that ``pattern`` matches ``fact``."""
    if pattern.template != fact.template:
        return None
    new_env = env
    for slot, term in pattern.slots:
        if slot not in fact.slots:
            return None
        value = fact.slots[slot]
        if isinstance(term, Var):
            bound = new_env.get(term.name, _UNBOUND)
            if bound is _UNBOUND:
                if new_env is env:
                    new_env = dict(env)
                new_env[term.name] = value
            elif bound != value:
                return None
        elif term != value:
            return None
    if pattern.binding is not None:
        if new_env is env:
            new_env = dict(env)
        new_env[pattern.binding] = fact.id
    return new_env if new_env is not env else dict(env)


_UNBOUND = object()


def _activations(rules: RuleSet, wm: WorkingMemory) -> list[Activation]:
    live = wm.live()
    by_template: dict[str, list[Fact]] = {}
    for fact in live:
        by_template.setdefault(fact.template, []).append(fact)

    found: list[Activation] = []
    for index, rule in enumerate(rules):
        partial: list[tuple[dict[str, object], tuple[int, ...]]] = [({}, ())]
        for pattern in rule.patterns:
            extended: list[tuple[dict[str, object], tuple[int, ...]]] = []
            candidates = by_template.get(pattern.template, ())
            for env, ids in partial:
                for fact in candidates:
                    new_env = _match_pattern(pattern, fact, env)
                    if new_env is not None:
                        extended.append((new_env, ids + (fact.id,)))
            partial = extended
            if not partial:
                break
        for env, ids in partial:
            found.append(Activation(rule_name=rule.name, rule_index=index, fact_ids=ids, env=env))
    return found


@dataclass
class RunResult:
    fired: int
    trace: Trace
    interrupted: bool = False


def run(wm: WorkingMemory, rules: RuleSet, max_cycles: int = 10_000) -> RunResult:
    """Match, select, act until the agenda empties or the budget runs out.

    Conflict resolution: most recent matched fact first (higher max fact
    id), then earlier rule in the set, then ascending fact-id tuple.
    Refraction guarantees each (rule, fact tuple) fires at most once.
    """
    if max_cycles < 1:
        raise EngineError("max_cycles must be >= 1")
    fired_keys: set[tuple[str, tuple[int, ...]]] = set()
    fired = 0
    while fired < max_cycles:
        agenda = [a for a in _activations(rules, wm) if a.key not in fired_keys]
        if not agenda:
            return RunResult(fired=fired, trace=wm.trace, interrupted=False)
        agenda.sort(key=lambda a: (-a.timestamp, a.rule_index, a.fact_ids))
        act = agenda[0]
        fired_keys.add(act.key)
        fired += 1
        fire_ev = wm.trace.add(
            "fire",
            act.rule_name,
            {"matched": list(act.fact_ids)},
            f"fire {act.rule_name} on " + ", ".join(f"#{i}" for i in act.fact_ids),
            matched=act.fact_ids,
        )
        premise_cf = cf_conjunction([wm.get(fid).cf for fid in act.fact_ids])
        rule = _rule_by_index(rules, act.rule_index)
        for action in rule.actions:
            _execute(action, act, wm, premise_cf, fire_ev.ordinal)
    remaining = [a for a in _activations(rules, wm) if a.key not in fired_keys]
    return RunResult(fired=fired, trace=wm.trace, interrupted=bool(remaining))


def _rule_by_index(rules: RuleSet, index: int) -> RuleAst:
    return rules.rules[index]


def _value_of(term, env: dict[str, object]):
    if isinstance(term, Var):
        return env[term.name]
    return term


def _numeric(value, what: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise EngineError(f"{what} is not numeric: {value!r}")
    return float(value)


_COMPARE = {
    "<": lambda a, b: a < b,
    ">": lambda a, b: a > b,
    "<=": lambda a, b: a <= b,
    ">=": lambda a, b: a >= b,
    "=": lambda a, b: a == b,
    "!=": lambda a, b: a != b,
}


def _execute(action, act: Activation, wm: WorkingMemory, premise_cf: float,
             fire_ordinal: int) -> None:
    if isinstance(action, Printout):
        parts = []
        for item in action.items:
            if item is CRLF_MARK:
                parts.append("\n")
            elif isinstance(item, Var):
                parts.append(_fmt(act.env[item.name]))
            elif isinstance(item, float):
                parts.append(_fmt(item))
            else:
                parts.append(str(item))
        text = "".join(parts)
        wm.trace.add("print", act.rule_name, None, text, fire_ordinal=fire_ordinal)
    elif isinstance(action, Retract):
        fact_id = act.env[action.var]
        if not isinstance(fact_id, int) or isinstance(fact_id, bool):
            raise EngineError(f"?{action.var} is not a fact binding")
        wm.retract_fact(fact_id, rule=act.rule_name, fire_ordinal=fire_ordinal)
    elif isinstance(action, AssertFact):
        slots = {name: _value_of(term, act.env) for name, term in action.slots}
        wm.assert_fact(
            action.template, slots, cf=premise_cf,
            rule=act.rule_name, fire_ordinal=fire_ordinal,
        )
    elif isinstance(action, If):
        left = _numeric(_value_of(action.left, act.env), f"left operand of {action.op}")
        right = _numeric(_value_of(action.right, act.env), f"right operand of {action.op}")
        branch = action.then if _COMPARE[action.op](left, right) else action.orelse
        for sub in branch:
            _execute(sub, act, wm, premise_cf, fire_ordinal)
    else:  # pragma: no cover - parser only produces the four kinds
        raise EngineError(f"unknown action {action!r}")


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "TRUE" if value else "FALSE"
    if isinstance(value, float):
        return f"{value:g}"
    return str(value)
