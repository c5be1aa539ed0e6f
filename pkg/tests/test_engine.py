import random

import pytest

from tankmate import EngineError, WorkingMemory, parse_rules, run

MOLLY_SLOTS = {"name": "Molly", "tempmin": 65, "tempmax": 82}


def seeded_wm(temp):
    wm = WorkingMemory()
    wm.assert_fact("aqua-temp", {"0": temp})
    wm.assert_fact("fish", MOLLY_SLOTS)
    return wm


class TestAssert:
    def test_first_id_is_one(self):
        wm = WorkingMemory()
        assert wm.assert_fact("aqua-temp", {"0": 75}) == 1

    def test_duplicate_assert_merges_cf(self):
        wm = WorkingMemory()
        fid1 = wm.assert_fact("fish", MOLLY_SLOTS, cf=0.5)
        fid2 = wm.assert_fact("fish", MOLLY_SLOTS, cf=0.5)
        assert fid1 == fid2
        assert len(wm.live()) == 1
        assert wm.get(fid1).cf == 0.75
        kinds = [ev.kind for ev in wm.trace]
        assert kinds == ["assert", "cf-update"]

    def test_cf_out_of_range(self):
        wm = WorkingMemory()
        with pytest.raises(EngineError, match="cf out of range"):
            wm.assert_fact("fish", MOLLY_SLOTS, cf=1.5)

    def test_int_slots_normalize_to_float(self):
        wm = WorkingMemory()
        fid = wm.assert_fact("aqua-temp", {"0": 75})
        assert wm.get(fid).slots["0"] == 75.0
        assert isinstance(wm.get(fid).slots["0"], float)


class TestRetract:
    def test_retracted_fact_no_longer_matches(self):
        wm = seeded_wm(60)
        rules = parse_rules("(defrule r ?f <- (fish (name ?n)) => )")
        wm.retract_fact(2)
        result = run(wm, rules)
        assert result.fired == 0

    def test_double_retract_is_recorded_noop(self):
        wm = seeded_wm(60)
        assert wm.retract_fact(2) is True
        assert wm.retract_fact(2) is False
        retracts = [ev for ev in wm.trace if ev.kind == "retract"]
        assert len(retracts) == 2
        assert [ev.redundant for ev in retracts] == [False, True]
        assert "no-op" in retracts[1].text

    def test_unknown_id_is_error(self):
        wm = seeded_wm(60)
        with pytest.raises(EngineError, match="never asserted"):
            wm.retract_fact(999)

    def test_lookup_of_retracted_id_fails_cleanly(self):
        wm = seeded_wm(60)
        wm.retract_fact(1)
        with pytest.raises(EngineError, match="retracted"):
            wm.get(1)


class TestRun:
    def test_cold_tank_retracts_molly(self, check_temp_text):
        wm = seeded_wm(60)
        result = run(wm, parse_rules(check_temp_text))
        assert result.fired == 1
        assert not result.interrupted
        prints = [ev.text for ev in result.trace if ev.kind == "print"]
        assert prints == ["Your aqua is too cold for Molly\n"]
        assert all(f.template != "fish" for f in wm.live())

    def test_adequate_tank_keeps_molly(self, check_temp_text):
        wm = seeded_wm(75)
        before = len(wm.live())
        result = run(wm, parse_rules(check_temp_text))
        assert result.fired == 1
        assert len(wm.live()) == before
        assert [ev.kind for ev in result.trace if ev.kind == "retract"] == []

    def test_empty_wm_no_fires_empty_trace(self, check_temp_text):
        wm = WorkingMemory()
        result = run(wm, parse_rules(check_temp_text))
        assert result.fired == 0
        assert len(result.trace) == 0

    def test_hot_tank_message(self, check_temp_text):
        wm = seeded_wm(90)
        result = run(wm, parse_rules(check_temp_text))
        prints = [ev.text for ev in result.trace if ev.kind == "print"]
        assert prints == ["Your aqua is too hot for Molly\n"]

    def test_budget_exhaustion_flags_interrupted(self):
        wm = WorkingMemory()
        for i in range(4):
            wm.assert_fact("fish", {"name": f"f{i}", "tempmin": 99, "tempmax": 100})
        wm.assert_fact("aqua-temp", {"0": 60})
        rules = parse_rules(
            "(defrule r (aqua-temp ?t) ?f <- (fish (name ?n) (tempmin ?lo))"
            " => (if (> ?lo ?t) then (retract ?f)))"
        )
        result = run(wm, rules, max_cycles=2)
        assert result.fired == 2
        assert result.interrupted

    def test_max_cycles_must_be_positive(self):
        with pytest.raises(EngineError):
            run(WorkingMemory(), parse_rules("(defrule r (f) => )"), max_cycles=0)

    def test_refraction_no_tuple_fires_twice(self, check_temp_text):
        wm = seeded_wm(75)
        for i in range(3):
            wm.assert_fact("fish", {"name": f"ok{i}", "tempmin": 70, "tempmax": 80})
        result = run(wm, parse_rules(check_temp_text))
        fires = [(ev.rule, ev.matched) for ev in result.trace if ev.kind == "fire"]
        assert len(fires) == len(set(fires))
        assert result.fired == 4

    def test_assert_action_chains_and_cf_propagates(self):
        wm = WorkingMemory()
        wm.assert_fact("a", {"x": 1}, cf=0.8)
        wm.assert_fact("b", {"y": 2}, cf=0.6)
        rules = parse_rules(
            "(defrule first (a (x ?x)) (b (y ?y)) => (assert (c (z ?x))))\n"
            "(defrule second (c (z ?z)) => (assert (d (w ?z))))"
        )
        result = run(wm, rules)
        assert result.fired == 2
        derived = {f.template: f for f in wm.live()}
        assert derived["c"].cf == 0.6  # min of premises
        assert derived["d"].cf == 0.6

    def test_else_branch_runs(self):
        wm = WorkingMemory()
        wm.assert_fact("n", {"0": 1})
        rules = parse_rules(
            '(defrule r (n ?v) => (if (> ?v 5) then (printout t "big") '
            'else (printout t "small")))'
        )
        result = run(wm, rules)
        prints = [ev.text for ev in result.trace if ev.kind == "print"]
        assert prints == ["small"]

    def test_comparison_on_string_is_engine_error(self):
        wm = WorkingMemory()
        wm.assert_fact("n", {"0": "abc"})
        rules = parse_rules("(defrule r (n ?v) => (if (> ?v 5) then ))")
        with pytest.raises(EngineError, match="not numeric"):
            run(wm, rules)

    def test_literal_slot_constraint_filters(self):
        wm = WorkingMemory()
        wm.assert_fact("f", {"kind": "good"})
        wm.assert_fact("f", {"kind": "bad"})
        rules = parse_rules('(defrule r (f (kind "good")) => (assert (hit)))')
        result = run(wm, rules)
        assert result.fired == 1


class TestConflictResolution:
    def test_recency_wins(self):
        wm = WorkingMemory()
        wm.assert_fact("f", {"n": 1})
        wm.assert_fact("f", {"n": 2})
        rules = parse_rules("(defrule r ?f <- (f (n ?n)) => )")
        result = run(wm, rules)
        fires = [ev.matched for ev in result.trace if ev.kind == "fire"]
        assert fires == [(2,), (1,)]

    def test_rule_order_breaks_timestamp_ties(self):
        wm = WorkingMemory()
        wm.assert_fact("f", {"n": 1})
        rules = parse_rules(
            "(defrule second ?f <- (f (n ?n)) => )\n(defrule first ?f <- (f (n ?n)) => )"
        )
        result = run(wm, rules)
        order = [ev.rule for ev in result.trace if ev.kind == "fire"]
        assert order == ["second", "first"]

    def test_identical_inputs_identical_traces(self, check_temp_text):
        def transcript():
            wm = seeded_wm(60)
            wm.assert_fact("fish", {"name": "Other", "tempmin": 50, "tempmax": 55})
            run(wm, parse_rules(check_temp_text))
            return [(ev.ordinal, ev.kind, ev.rule, ev.text) for ev in wm.trace]

        assert transcript() == transcript()


class TestTermination:
    def test_retract_only_rules_terminate_within_bound(self):
        rng = random.Random(7)
        for trial in range(20):
            wm = WorkingMemory()
            n_facts = rng.randint(1, 8)
            templates = ["a", "b", "c"]
            for i in range(n_facts):
                wm.assert_fact(rng.choice(templates), {"n": float(i)})
            rule_text = []
            n_rules = rng.randint(1, 4)
            for r in range(n_rules):
                t = rng.choice(templates)
                rule_text.append(f"(defrule r{r} ?f <- ({t} (n ?n)) => (retract ?f))")
            rules = parse_rules("\n".join(rule_text))
            result = run(wm, rules, max_cycles=n_facts * n_rules + 1)
            assert not result.interrupted
            assert result.fired <= n_facts * n_rules


class TestTraceCompleteness:
    def replay(self, trace):
        facts = {}
        for ev in trace:
            if ev.kind == "assert":
                facts[ev.fact["id"]] = dict(ev.fact)
            elif ev.kind == "cf-update":
                facts[ev.fact["id"]] = dict(ev.fact)
            elif ev.kind == "retract" and not ev.redundant:
                del facts[ev.fact["id"]]
        return facts

    def test_replay_reproduces_final_wm(self, check_temp_text):
        wm = seeded_wm(60)
        wm.assert_fact("fish", {"name": "Ok", "tempmin": 50, "tempmax": 70}, cf=0.5)
        wm.assert_fact("fish", {"name": "Ok", "tempmin": 50, "tempmax": 70}, cf=0.5)
        run(wm, parse_rules(check_temp_text))
        replayed = self.replay(wm.trace)
        final = {fid: fact.snapshot() for fid, fact in wm.facts.items()}
        assert replayed == final

    def test_every_mutation_has_one_event(self):
        wm = WorkingMemory()
        wm.assert_fact("a", {"x": 1})
        wm.assert_fact("a", {"x": 1}, cf=0.5)
        wm.retract_fact(1)
        wm.retract_fact(1)
        kinds = [ev.kind for ev in wm.trace]
        assert kinds == ["assert", "cf-update", "retract", "retract"]

    def test_jsonl_export_field_names(self):
        wm = WorkingMemory()
        wm.assert_fact("a", {"x": 1})
        import json

        line = json.loads(wm.trace.to_jsonl().splitlines()[0])
        assert list(line) == ["ordinal", "kind", "rule", "fact", "text"]
