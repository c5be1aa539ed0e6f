"""A small CLIPS-style rule language: tokenizer, parser, renderer.

The grammar covers exactly what the engine executes: ``defrule`` with
fact patterns (ordered or named slots, optional ``?var <-`` fact
binding), and an action body of ``printout`` / ``retract`` / ``assert``
/ ``if`` with binary numeric comparisons. ``;`` starts a line comment.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterator, Union


class RuleSyntaxError(Exception):
    """Lex or parse failure; carries a 1-based line:column position."""

    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"{line}:{col}: {message}")
        self.line = line
        self.col = col


class RuleSemanticError(Exception):
    """Structurally valid text that violates rule semantics."""


# --- tokens ---------------------------------------------------------------

LPAREN = "LPAREN"
RPAREN = "RPAREN"
SYM = "SYM"
VAR = "VAR"
NUM = "NUM"
STR = "STR"
ARROW = "ARROW"
BINDER = "BINDER"
CRLF = "CRLF"


@dataclass(frozen=True)
class Token:
    kind: str
    value: object
    line: int
    col: int


_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<comment>;[^\n]*)
  | (?P<lparen>\()
  | (?P<rparen>\))
  | (?P<arrow>=>)
  | (?P<binder><-)
  | (?P<num>[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?(?=[\s()";]|$))
  | (?P<var>\?[^\s()";?]+)
  | (?P<string>"(?:\\.|[^"\\\n])*")
  | (?P<badstring>"(?:\\.|[^"\\\n])*)
  | (?P<sym>[^\s()";?]+)
    """,
    re.VERBOSE,
)

_ESCAPES = {'"': '"', "\\": "\\"}


def _unescape(body: str) -> str:
    out = []
    i = 0
    while i < len(body):
        ch = body[i]
        if ch == "\\" and i + 1 < len(body):
            nxt = body[i + 1]
            out.append(_ESCAPES.get(nxt, "\\" + nxt))
            i += 2
        else:
            out.append(ch)
            i += 1
    return "".join(out)


def tokenize(text: str) -> list[Token]:
    """Lex rule text into positioned tokens; comments are dropped."""
    tokens: list[Token] = []
    pos = 0
    line = 1
    line_start = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise RuleSyntaxError(
                f"unexpected character {text[pos]!r}", line, pos - line_start + 1
            )
        col = pos - line_start + 1
        kind = m.lastgroup
        lexeme = m.group()
        if kind == "badstring":
            raise RuleSyntaxError("unterminated string", line, col)
        if kind == "lparen":
            tokens.append(Token(LPAREN, "(", line, col))
        elif kind == "rparen":
            tokens.append(Token(RPAREN, ")", line, col))
        elif kind == "arrow":
            tokens.append(Token(ARROW, "=>", line, col))
        elif kind == "binder":
            tokens.append(Token(BINDER, "<-", line, col))
        elif kind == "num":
            tokens.append(Token(NUM, float(lexeme), line, col))
        elif kind == "var":
            tokens.append(Token(VAR, lexeme[1:], line, col))
        elif kind == "string":
            tokens.append(Token(STR, _unescape(lexeme[1:-1]), line, col))
        elif kind == "sym":
            tok_kind = CRLF if lexeme == "crlf" else SYM
            tokens.append(Token(tok_kind, lexeme, line, col))
        # ws and comment fall through
        newlines = lexeme.count("\n")
        if newlines:
            line += newlines
            line_start = pos + lexeme.rfind("\n") + 1
        pos = m.end()
    return tokens


# --- AST ------------------------------------------------------------------


@dataclass(frozen=True)
class Var:
    name: str


class Crlf:
    """Singleton newline marker inside printout."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "crlf"


CRLF_MARK = Crlf()

Term = Union[Var, float, str]


@dataclass(frozen=True)
class Pattern:
    template: str
    slots: tuple[tuple[str, Term], ...]
    binding: str | None = None

    @property
    def is_ordered(self) -> bool:
        return all(name.isdigit() for name, _ in self.slots) and self.slots != ()


@dataclass(frozen=True)
class Printout:
    items: tuple[object, ...]  # str | float | Var | Crlf


@dataclass(frozen=True)
class Retract:
    var: str


@dataclass(frozen=True)
class AssertFact:
    template: str
    slots: tuple[tuple[str, Term], ...]


COMPARISONS = ("<", ">", "<=", ">=", "=", "!=")


@dataclass(frozen=True)
class If:
    op: str
    left: Term
    right: Term
    then: tuple["Action", ...]
    orelse: tuple["Action", ...] = ()


Action = Union[Printout, Retract, AssertFact, If]


@dataclass(frozen=True)
class RuleAst:
    name: str
    patterns: tuple[Pattern, ...]
    actions: tuple[Action, ...]


@dataclass(frozen=True)
class RuleSet:
    rules: tuple[RuleAst, ...]

    def __iter__(self) -> Iterator[RuleAst]:
        return iter(self.rules)

    def __len__(self) -> int:
        return len(self.rules)

    def get(self, name: str) -> RuleAst | None:
        for r in self.rules:
            if r.name == name:
                return r
        return None


# --- s-expression reading --------------------------------------------------


@dataclass
class _Node:
    """Either an atom token or a parenthesized list of nodes."""

    token: Token | None
    children: list["_Node"] = field(default_factory=list)
    open_tok: Token | None = None

    @property
    def is_list(self) -> bool:
        return self.token is None

    @property
    def pos(self) -> tuple[int, int]:
        t = self.token or self.open_tok
        return (t.line, t.col)


def _read_forms(tokens: list[Token]) -> list[_Node]:
    forms: list[_Node] = []
    stack: list[_Node] = []
    for tok in tokens:
        if tok.kind == LPAREN:
            node = _Node(token=None, open_tok=tok)
            if stack:
                stack[-1].children.append(node)
            stack.append(node)
        elif tok.kind == RPAREN:
            if not stack:
                raise RuleSyntaxError("unbalanced ')'", tok.line, tok.col)
            node = stack.pop()
            if not stack:
                forms.append(node)
        else:
            if not stack:
                raise RuleSyntaxError(
                    f"unexpected top-level token {tok.value!r}", tok.line, tok.col
                )
            stack[-1].children.append(_Node(token=tok))
    if stack:
        t = stack[-1].open_tok
        raise RuleSyntaxError("unbalanced '('", t.line, t.col)
    return forms


# --- parsing ----------------------------------------------------------------


def _err(node: _Node, message: str) -> RuleSyntaxError:
    line, col = node.pos
    return RuleSyntaxError(message, line, col)


def _term(node: _Node) -> Term:
    if node.is_list:
        raise _err(node, "expected a value, got a list")
    tok = node.token
    if tok.kind == VAR:
        return Var(tok.value)
    if tok.kind == NUM:
        return float(tok.value)
    if tok.kind in (STR, SYM, CRLF):
        return str(tok.value)
    raise _err(node, f"unexpected token {tok.value!r}")


def _parse_fact_form(node: _Node, what: str) -> tuple[str, tuple[tuple[str, Term], ...]]:
    """Parse ``(template v ...)`` or ``(template (slot v) ...)``."""
    if not node.is_list or not node.children:
        raise _err(node, f"{what} must be a non-empty list")
    head = node.children[0]
    if head.is_list or head.token.kind != SYM:
        raise _err(head, f"{what} must start with a template name")
    template = head.token.value
    rest = node.children[1:]
    listy = [c for c in rest if c.is_list]
    if listy and len(listy) != len(rest):
        raise _err(node, f"{what} mixes ordered values and named slots")
    slots: list[tuple[str, Term]] = []
    if listy:
        seen = set()
        for child in rest:
            if len(child.children) != 2:
                raise _err(child, "slot must be (name value)")
            name_node, value_node = child.children
            if name_node.is_list or name_node.token.kind != SYM:
                raise _err(name_node, "slot name must be a symbol")
            name = name_node.token.value
            if name in seen:
                raise _err(name_node, f"duplicate slot {name!r}")
            seen.add(name)
            slots.append((name, _term(value_node)))
    else:
        for i, child in enumerate(rest):
            slots.append((str(i), _term(child)))
    return template, tuple(slots)


def _parse_pattern(node: _Node, binding: str | None) -> Pattern:
    template, slots = _parse_fact_form(node, "pattern")
    return Pattern(template=template, slots=slots, binding=binding)


def _parse_action(node: _Node) -> Action:
    if not node.is_list or not node.children:
        raise _err(node, "action must be a non-empty list")
    head = node.children[0]
    if head.is_list or head.token.kind != SYM:
        raise _err(head, "action must start with a keyword")
    kw = head.token.value
    args = node.children[1:]

    if kw == "printout":
        if not args or args[0].is_list or args[0].token.kind != SYM or args[0].token.value != "t":
            raise _err(node, "printout needs the t destination")
        items: list[object] = []
        for child in args[1:]:
            if child.is_list:
                raise _err(child, "printout items must be atoms")
            tok = child.token
            if tok.kind == STR:
                items.append(str(tok.value))
            elif tok.kind == VAR:
                items.append(Var(tok.value))
            elif tok.kind == NUM:
                items.append(float(tok.value))
            elif tok.kind == CRLF:
                items.append(CRLF_MARK)
            else:
                raise _err(child, f"cannot print {tok.value!r}")
        return Printout(items=tuple(items))

    if kw == "retract":
        if len(args) != 1 or args[0].is_list or args[0].token.kind != VAR:
            raise _err(node, "retract takes one fact-binding variable")
        return Retract(var=args[0].token.value)

    if kw == "assert":
        if len(args) != 1 or not args[0].is_list:
            raise _err(node, "assert takes one fact form")
        template, slots = _parse_fact_form(args[0], "assert fact")
        return AssertFact(template=template, slots=slots)

    if kw == "if":
        return _parse_if(node, args)

    raise _err(head, f"unknown action {kw!r}")


def _parse_if(node: _Node, args: list[_Node]) -> If:
    if not args or not args[0].is_list or len(args[0].children) != 3:
        raise _err(node, "if needs a (op lhs rhs) test")
    op_node, lhs, rhs = args[0].children
    if op_node.is_list or op_node.token.kind != SYM or op_node.token.value not in COMPARISONS:
        raise _err(op_node, "comparison must be one of " + " ".join(COMPARISONS))

    def operand(n: _Node) -> Term:
        t = _term(n)
        if isinstance(t, str):
            raise _err(n, "comparisons are numeric: operand must be a variable or number")
        return t

    test_op = op_node.token.value
    left, right = operand(lhs), operand(rhs)

    then_actions: list[Action] = []
    else_actions: list[Action] = []
    bucket: list[Action] | None = None
    saw_then = False
    for child in args[1:]:
        if not child.is_list and child.token.kind == SYM and child.token.value == "then":
            bucket = then_actions
            saw_then = True
            continue
        if not child.is_list and child.token.kind == SYM and child.token.value == "else":
            if not saw_then:
                raise _err(child, "else before then")
            bucket = else_actions
            continue
        if bucket is None:
            raise _err(child, "if body must start with then")
        bucket.append(_parse_action(child))
    if not saw_then:
        raise _err(node, "if without then")
    return If(op=test_op, left=left, right=right, then=tuple(then_actions), orelse=tuple(else_actions))


def _parse_rule(form: _Node) -> RuleAst:
    kids = form.children
    if not kids or kids[0].is_list or kids[0].token.value != "defrule":
        raise _err(form, "top-level form must be (defrule ...)")
    if len(kids) < 2 or kids[1].is_list or kids[1].token.kind != SYM:
        raise _err(form, "defrule needs a name")
    name = kids[1].token.value

    patterns: list[Pattern] = []
    actions: list[Action] = []
    i = 2
    in_actions = False
    pending_binding: str | None = None
    while i < len(kids):
        node = kids[i]
        if not node.is_list and node.token.kind == ARROW:
            if pending_binding is not None:
                raise _err(node, "dangling fact binding before =>")
            in_actions = True
            i += 1
            continue
        if in_actions:
            actions.append(_parse_action(node))
            i += 1
            continue
        if not node.is_list and node.token.kind == VAR:
            if (
                i + 1 < len(kids)
                and not kids[i + 1].is_list
                and kids[i + 1].token.kind == BINDER
            ):
                pending_binding = node.token.value
                i += 2
                continue
            raise _err(node, "pattern variable must be followed by <-")
        if node.is_list:
            patterns.append(_parse_pattern(node, pending_binding))
            pending_binding = None
            i += 1
            continue
        raise _err(node, f"unexpected token {node.token.value!r} in rule body")

    if not in_actions:
        raise _err(form, "defrule without =>")
    rule = RuleAst(name=name, patterns=tuple(patterns), actions=tuple(actions))
    _check_rule(rule)
    return rule


def _action_var_uses(action: Action) -> Iterator[tuple[str, str]]:
    """Yield (kind, var name) uses: kind is 'value' or 'binding'."""
    if isinstance(action, Printout):
        for item in action.items:
            if isinstance(item, Var):
                yield "value", item.name
    elif isinstance(action, Retract):
        yield "binding", action.var
    elif isinstance(action, AssertFact):
        for _, term in action.slots:
            if isinstance(term, Var):
                yield "value", term.name
    elif isinstance(action, If):
        for t in (action.left, action.right):
            if isinstance(t, Var):
                yield "value", t.name
        for sub in action.then + action.orelse:
            yield from _action_var_uses(sub)


def _check_rule(rule: RuleAst) -> None:
    if not rule.patterns:
        raise RuleSemanticError(f"rule {rule.name!r} has no patterns")
    bindings = {p.binding for p in rule.patterns if p.binding}
    slot_vars = {
        t.name for p in rule.patterns for _, t in p.slots if isinstance(t, Var)
    }
    bound = bindings | slot_vars
    for action in rule.actions:
        for kind, name in _action_var_uses(action):
            if name not in bound:
                raise RuleSemanticError(
                    f"rule {rule.name!r}: unbound variable ?{name}"
                )
            if kind == "binding" and name not in bindings:
                raise RuleSemanticError(
                    f"rule {rule.name!r}: retract needs a fact binding, ?{name} is not one"
                )


def parse_rules(text: str) -> RuleSet:
    """Parse rule text into a RuleSet; rule names must be unique."""
    forms = _read_forms(tokenize(text))
    rules: list[RuleAst] = []
    names: set[str] = set()
    for form in forms:
        rule = _parse_rule(form)
        if rule.name in names:
            raise RuleSemanticError(f"duplicate rule {rule.name!r}")
        names.add(rule.name)
        rules.append(rule)
    return RuleSet(rules=tuple(rules))


# --- rendering ---------------------------------------------------------------


def _num_text(x: float) -> str:
    if x == int(x) and abs(x) < 1e15:
        return str(int(x))
    return repr(x)


def _term_text(t: Term) -> str:
    if isinstance(t, Var):
        return f"?{t.name}"
    if isinstance(t, float):
        return _num_text(t)
    body = str(t).replace("\\", "\\\\").replace('"', '\\"')
    return f'"{body}"'


def _fact_form_text(template: str, slots: tuple[tuple[str, Term], ...]) -> str:
    if slots and all(name.isdigit() for name, _ in slots):
        inner = " ".join(_term_text(v) for _, v in slots)
        return f"({template} {inner})"
    if not slots:
        return f"({template})"
    inner = " ".join(f"({name} {_term_text(v)})" for name, v in slots)
    return f"({template} {inner})"


def _render_action(action: Action, indent: int) -> list[str]:
    pad = " " * indent
    if isinstance(action, Printout):
        parts = []
        for item in action.items:
            if item is CRLF_MARK:
                parts.append("crlf")
            elif isinstance(item, Var):
                parts.append(f"?{item.name}")
            elif isinstance(item, float):
                parts.append(_num_text(item))
            else:
                parts.append(_term_text(str(item)))
        return [pad + "(printout t " + " ".join(parts) + ")"]
    if isinstance(action, Retract):
        return [pad + f"(retract ?{action.var})"]
    if isinstance(action, AssertFact):
        return [pad + f"(assert {_fact_form_text(action.template, action.slots)})"]
    lines = [pad + f"(if ({action.op} {_term_text(action.left)} {_term_text(action.right)})"]
    lines.append(pad + "  then")
    for sub in action.then:
        lines.extend(_render_action(sub, indent + 2))
    if action.orelse:
        lines.append(pad + "  else")
        for sub in action.orelse:
            lines.extend(_render_action(sub, indent + 2))
    lines[-1] += ")"
    return lines


def render_rule(rule: RuleAst) -> str:
    """Emit canonical text; parsing it back gives a structurally equal AST."""
    lines = [f"(defrule {rule.name}"]
    for p in rule.patterns:
        prefix = f"?{p.binding} <- " if p.binding else ""
        lines.append("  " + prefix + _fact_form_text(p.template, p.slots))
    lines.append("  =>")
    for action in rule.actions:
        lines.extend(_render_action(action, 2))
    return "\n".join(lines) + ")"


def render_rules(ruleset: RuleSet) -> str:
    return "\n\n".join(render_rule(r) for r in ruleset) + "\n"
