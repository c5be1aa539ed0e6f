"""Trace-backed explanations: how a fact, retraction, or message came to be.

A node names the rule that produced the target and recurses into the
facts that matched that rule, bottoming out at externally given facts.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .engine import Trace, TraceEvent, _fmt


class ExplainError(LookupError):
    """The requested target does not appear in the trace."""


@dataclass
class ExplanationNode:
    kind: str  # "rule" | "given" | "external"
    label: str
    rule: str | None = None
    fact: dict | None = None
    children: list["ExplanationNode"] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "label": self.label,
            "rule": self.rule,
            "fact": self.fact,
            "children": [c.to_dict() for c in self.children],
        }

    def render(self, indent: int = 0) -> str:
        lines = ["  " * indent + self.label]
        for child in self.children:
            lines.append(child.render(indent + 1))
        return "\n".join(lines)


def _fact_label(fact: dict) -> str:
    slots = fact.get("slots", {})
    inner = " ".join(f"{k} {_fmt(v)}" for k, v in slots.items())
    if inner:
        return f"({fact.get('template')} {inner})"
    return f"({fact.get('template')})"


class _Index:
    def __init__(self, trace: Trace):
        self.events = list(trace)
        self.fires: dict[int, TraceEvent] = {}
        self.asserts: dict[int, TraceEvent] = {}
        self.retracts: dict[int, TraceEvent] = {}
        for ev in self.events:
            if ev.kind == "fire":
                self.fires[ev.ordinal] = ev
            elif ev.kind == "assert":
                self.asserts[ev.fact["id"]] = ev
            elif ev.kind == "retract" and not ev.redundant:
                self.retracts[ev.fact["id"]] = ev


def explain(trace: Trace, target: int | str) -> ExplanationNode:
    """Explain a trace target.

    Targets: a fact id (int or ``"fact:N"``), a retraction
    (``"retract:N"``), or a printed message (``"message:TEXT"``, prefix
    match). Unknown targets raise ExplainError.
    """
    index = _Index(trace)
    if isinstance(target, int):
        return _explain_fact(index, target, set())
    if target.startswith("fact:"):
        return _explain_fact(index, _int_suffix(target), set())
    if target.startswith("retract:"):
        return _explain_retraction(index, _int_suffix(target))
    if target.startswith("message:"):
        return _explain_message(index, target[len("message:"):])
    raise ExplainError(f"unrecognized explanation target {target!r}")


def _int_suffix(target: str) -> int:
    raw = target.split(":", 1)[1]
    try:
        return int(raw)
    except ValueError:
        raise ExplainError(f"bad fact id in target {target!r}") from None


def _explain_fact(index: _Index, fact_id: int, seen: set[int]) -> ExplanationNode:
    ev = index.asserts.get(fact_id)
    if ev is None:
        raise ExplainError(f"fact {fact_id} does not appear in the trace")
    if fact_id in seen:
        return ExplanationNode(kind="given", label=f"{_fact_label(ev.fact)} [see above]",
                               fact=ev.fact)
    seen = seen | {fact_id}
    if ev.rule is None:
        return ExplanationNode(
            kind="given", label=f"{_fact_label(ev.fact)} [given]", fact=ev.fact
        )
    fire = index.fires.get(ev.fire_ordinal)
    node = ExplanationNode(
        kind="rule",
        label=f"{_fact_label(ev.fact)} [asserted by {ev.rule}]",
        rule=ev.rule,
        fact=ev.fact,
    )
    if fire is not None:
        node.children = [_explain_fact(index, fid, seen) for fid in fire.matched]
    return node


def _explain_retraction(index: _Index, fact_id: int) -> ExplanationNode:
    ev = index.retracts.get(fact_id)
    if ev is None:
        raise ExplainError(f"no retraction of fact {fact_id} in the trace")
    if ev.rule is None:
        node = ExplanationNode(
            kind="external",
            label=f"{_fact_label(ev.fact)} [retracted externally]",
            fact=ev.fact,
        )
        node.children = [_explain_fact(index, fact_id, set())]
        return node
    node = ExplanationNode(
        kind="rule",
        label=f"{_fact_label(ev.fact)} [retracted by {ev.rule}]",
        rule=ev.rule,
        fact=ev.fact,
    )
    fire = index.fires.get(ev.fire_ordinal)
    if fire is not None:
        node.children = [_explain_fact(index, fid, set()) for fid in fire.matched]
    return node


def _explain_message(index: _Index, prefix: str) -> ExplanationNode:
    for ev in index.events:
        if ev.kind == "print" and ev.text.startswith(prefix):
            node = ExplanationNode(
                kind="rule",
                label=f"{ev.text.strip()!r} [printed by {ev.rule}]",
                rule=ev.rule,
            )
            fire = index.fires.get(ev.fire_ordinal)
            if fire is not None:
                node.children = [_explain_fact(index, fid, set()) for fid in fire.matched]
            return node
    raise ExplainError(f"no printed message starting with {prefix!r}")
