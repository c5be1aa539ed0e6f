import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tankmate import (
    RuleSemanticError,
    RuleSyntaxError,
    parse_rules,
    render_rule,
    render_rules,
    tokenize,
)
from tankmate.rulelang import (
    ARROW,
    BINDER,
    CRLF,
    CRLF_MARK,
    LPAREN,
    NUM,
    RPAREN,
    STR,
    SYM,
    VAR,
    AssertFact,
    If,
    Pattern,
    Printout,
    Retract,
    RuleAst,
    RuleSet,
    Var,
)


class TestTokenize:
    def test_retract_form(self):
        toks = tokenize("(retract ?cfish)")
        assert [(t.kind, t.value) for t in toks] == [
            (LPAREN, "("),
            (SYM, "retract"),
            (VAR, "cfish"),
            (RPAREN, ")"),
        ]

    def test_empty_input(self):
        assert tokenize("") == []

    def test_string_preserves_trailing_space(self):
        toks = tokenize('"Your aqua is too cold for "')
        assert len(toks) == 1
        assert toks[0].kind == STR
        assert toks[0].value == "Your aqua is too cold for "

    def test_unterminated_string_positioned(self):
        with pytest.raises(RuleSyntaxError) as exc:
            tokenize('(printout t "oops)')
        assert exc.value.line == 1
        assert exc.value.col == 13

    def test_comments_dropped(self):
        toks = tokenize("; a comment\n(x) ; trailing\n")
        assert [t.kind for t in toks] == [LPAREN, SYM, RPAREN]

    def test_special_tokens(self):
        toks = tokenize("=> <- crlf 6.5 -2 ?v")
        assert [t.kind for t in toks] == [ARROW, BINDER, CRLF, NUM, NUM, VAR]
        assert toks[3].value == 6.5
        assert toks[4].value == -2.0

    def test_positions_track_lines(self):
        toks = tokenize("(a\n  ?b)")
        var = [t for t in toks if t.kind == VAR][0]
        assert (var.line, var.col) == (2, 3)

    def test_string_escapes(self):
        toks = tokenize(r'"say \"hi\" \\"')
        assert toks[0].value == 'say "hi" \\'


class TestParse:
    def test_check_temp_rule_structure(self, check_temp_text):
        ruleset = parse_rules(check_temp_text)
        assert len(ruleset) == 1
        rule = ruleset.rules[0]
        assert rule.name == "MAIN::check-temp"

        assert len(rule.patterns) == 2
        aqua, fish = rule.patterns
        assert aqua == Pattern(template="aqua-temp", slots=(("0", Var("temp")),))
        assert fish.template == "fish"
        assert fish.binding == "cfish"
        assert fish.slots == (
            ("name", Var("fname")),
            ("tempmin", Var("ftempmin")),
            ("tempmax", Var("ftempmax")),
        )

        assert len(rule.actions) == 2
        cold, hot = rule.actions
        assert isinstance(cold, If) and isinstance(hot, If)
        assert (cold.op, cold.left, cold.right) == (">", Var("ftempmin"), Var("temp"))
        assert (hot.op, hot.left, hot.right) == ("<", Var("ftempmax"), Var("temp"))
        for branch in (cold, hot):
            assert len(branch.then) == 2
            assert branch.orelse == ()
            printed, retracted = branch.then
            assert isinstance(printed, Printout)
            assert isinstance(retracted, Retract)
            assert retracted.var == "cfish"
            assert printed.items[-1] is CRLF_MARK
            assert printed.items[1] == Var("fname")
        assert cold.then[0].items[0] == "Your aqua is too cold for "
        assert hot.then[0].items[0] == "Your aqua is too hot for "

    def test_unbound_variable_named(self):
        with pytest.raises(RuleSemanticError, match=r"\?b"):
            parse_rules("(defrule r (f (x ?a)) => (retract ?b))")

    def test_duplicate_rule_name(self):
        text = "(defrule r (f (x ?a)) => )\n(defrule r (f (x ?a)) => )"
        with pytest.raises(RuleSemanticError, match="duplicate rule"):
            parse_rules(text)

    def test_unbalanced_parens_positioned(self):
        with pytest.raises(RuleSyntaxError) as exc:
            parse_rules("(defrule r (f (x ?a)) =>")
        assert (exc.value.line, exc.value.col) == (1, 1)

    def test_unbalanced_close_positioned(self):
        with pytest.raises(RuleSyntaxError) as exc:
            parse_rules("(defrule r (f) => ))")
        assert exc.value.col == 20

    def test_retract_of_slot_variable_rejected(self):
        with pytest.raises(RuleSemanticError, match="fact binding"):
            parse_rules("(defrule r (f (x ?a)) => (retract ?a))")

    def test_rule_without_patterns_rejected(self):
        with pytest.raises(RuleSemanticError, match="no patterns"):
            parse_rules("(defrule r => (printout t crlf))")

    def test_duplicate_slot_rejected(self):
        with pytest.raises(RuleSyntaxError, match="duplicate slot"):
            parse_rules("(defrule r (f (x ?a) (x ?b)) => )")

    def test_if_needs_then(self):
        with pytest.raises(RuleSyntaxError, match="then"):
            parse_rules("(defrule r (f (x ?a)) => (if (> ?a 1) (retract ?a)))")

    def test_comparison_operand_must_be_numeric(self):
        with pytest.raises(RuleSyntaxError, match="numeric"):
            parse_rules('(defrule r (f (x ?a)) => (if (> ?a "one") then))')

    def test_assert_and_else_branch(self):
        text = (
            "(defrule r (f (x ?a))\n"
            "  =>\n"
            "  (if (>= ?a 2)\n"
            "    then\n"
            "    (assert (g (y ?a)))\n"
            "    else\n"
            '    (printout t "small" crlf)))'
        )
        rule = parse_rules(text).rules[0]
        branch = rule.actions[0]
        assert isinstance(branch.then[0], AssertFact)
        assert branch.then[0].slots == (("y", Var("a")),)
        assert isinstance(branch.orelse[0], Printout)

    def test_ordered_fact_assert(self):
        rule = parse_rules("(defrule r (f ?a) => (assert (g ?a 2)))").rules[0]
        assert rule.actions[0].slots == (("0", Var("a")), ("1", 2.0))

    def test_identical_text_identical_ast(self, check_temp_text):
        assert parse_rules(check_temp_text) == parse_rules(check_temp_text)


class TestRender:
    def test_check_temp_round_trip(self, check_temp_text):
        ruleset = parse_rules(check_temp_text)
        rendered = render_rules(ruleset)
        assert parse_rules(rendered) == ruleset

    def test_render_is_stable(self):
        rule = parse_rules('(defrule r (f (x ?a)) => (printout t "hi " ?a crlf))').rules[0]
        assert render_rule(rule) == render_rule(rule)

    def test_string_escaping_round_trips(self):
        rule = RuleAst(
            name="r",
            patterns=(Pattern(template="f", slots=(("x", Var("a")),)),),
            actions=(Printout(items=('he said "hi"\\', Var("a"))),),
        )
        again = parse_rules(render_rule(rule)).rules[0]
        assert again == rule


# --- generated round-trip property -------------------------------------------

_sym = st.from_regex(r"[a-z][a-z0-9-]{0,6}", fullmatch=True).filter(
    lambda s: s not in ("crlf", "then", "else")
)
_varname = st.from_regex(r"[a-z][a-z0-9]{0,5}", fullmatch=True)
_text = st.text(
    alphabet=st.characters(min_codepoint=32, max_codepoint=126), max_size=12
)
_number = st.floats(allow_nan=False, allow_infinity=False)


@st.composite
def _rule_asts(draw):
    patterns = []
    value_vars: list[str] = []
    binding_vars: list[str] = []
    for i in range(draw(st.integers(1, 3))):
        template = draw(_sym)
        binding = None
        if draw(st.booleans()):
            binding = f"b{i}{draw(_varname)}"
            binding_vars.append(binding)
        n_slots = draw(st.integers(0, 3))
        ordered = draw(st.booleans()) and n_slots > 0
        slots = []
        names = draw(
            st.lists(_sym, min_size=n_slots, max_size=n_slots, unique=True)
        )
        for j in range(n_slots):
            choice = draw(st.integers(0, 2))
            if choice == 0:
                var = f"v{i}s{j}"
                value_vars.append(var)
                term = Var(var)
            elif choice == 1:
                term = draw(_number)
            else:
                term = draw(_text)
            slots.append((str(j) if ordered else names[j], term))
        patterns.append(Pattern(template=template, slots=tuple(slots), binding=binding))

    def gen_action(depth: int):
        kinds = ["printout", "assert"]
        if binding_vars:
            kinds.append("retract")
        if value_vars and depth < 3:
            kinds.append("if")
        kind = draw(st.sampled_from(kinds))
        if kind == "printout":
            items = []
            for _ in range(draw(st.integers(0, 3))):
                pick = draw(st.integers(0, 2 if value_vars else 1))
                if pick == 0:
                    items.append(draw(_text))
                elif pick == 1:
                    items.append(CRLF_MARK)
                else:
                    items.append(Var(draw(st.sampled_from(value_vars))))
            return Printout(items=tuple(items))
        if kind == "retract":
            return Retract(var=draw(st.sampled_from(binding_vars)))
        if kind == "assert":
            n = draw(st.integers(0, 2))
            names = draw(st.lists(_sym, min_size=n, max_size=n, unique=True))
            slots = []
            for name in names:
                if value_vars and draw(st.booleans()):
                    slots.append((name, Var(draw(st.sampled_from(value_vars)))))
                else:
                    slots.append((name, draw(_number)))
            return AssertFact(template=draw(_sym), slots=tuple(slots))
        operand = lambda: (
            Var(draw(st.sampled_from(value_vars)))
            if draw(st.booleans())
            else draw(_number)
        )
        return If(
            op=draw(st.sampled_from(["<", ">", "<=", ">=", "=", "!="])),
            left=operand(),
            right=operand(),
            then=tuple(gen_action(depth + 1) for _ in range(draw(st.integers(1, 2)))),
            orelse=tuple(gen_action(depth + 1) for _ in range(draw(st.integers(0, 2)))),
        )

    actions = tuple(gen_action(1) for _ in range(draw(st.integers(0, 3))))
    return RuleAst(name=f"gen::{draw(_sym)}", patterns=tuple(patterns), actions=actions)


class TestGeneratedRoundTrip:
    @settings(max_examples=200, deadline=None)
    @given(_rule_asts())
    def test_parse_render_identity(self, rule):
        ruleset = parse_rules(render_rule(rule))
        assert len(ruleset) == 1
        assert ruleset.rules[0] == rule

    @settings(max_examples=50, deadline=None)
    @given(st.lists(_rule_asts(), min_size=1, max_size=3))
    def test_multi_rule_round_trip(self, rule_list):
        named = {}
        for i, rule in enumerate(rule_list):
            named[f"r{i}::{rule.name}"] = RuleAst(
                name=f"r{i}::{rule.name}", patterns=rule.patterns, actions=rule.actions
            )
        ruleset = RuleSet(rules=tuple(named.values()))
        assert parse_rules(render_rules(ruleset)) == ruleset
