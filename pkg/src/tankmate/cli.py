"""Command-line surface: interactive consultation, batch runs, and serving."""

from __future__ import annotations

import dataclasses
import json
import sys

import click

from .advisor import (
    ConsultationError,
    ConsultationResult,
    default_rules,
    elimination_trace_target,
    profile_fact_target,
    run_consultation,
    whatif_add,
)
from .explain import ExplainError, explain
from .kb import KbError, KnowledgeBase, TankFieldError, TankState, load_kb, tank_from_dict
from .rulelang import RuleSemanticError, RuleSet, RuleSyntaxError, parse_rules

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_KB = 2
EXIT_ABORT = 130


def kb_options(f):
    for name, envvar in (
        ("--rules", "TANKMATE_RULES"),
        ("--modifiers", "TANKMATE_MODIFIERS"),
        ("--matrix", "TANKMATE_MATRIX"),
        ("--profiles", "TANKMATE_PROFILES"),
    ):
        f = click.option(
            name, name.lstrip("-") + "_path", envvar=envvar,
            type=click.Path(dir_okay=False), default=None,
            help=f"Path to a custom {name.lstrip('-')} file (default: packaged seed).",
        )(f)
    return f


def _load_kb_or_exit(profiles_path, matrix_path, modifiers_path, rules_path):
    try:
        kb = load_kb(profiles_path, matrix_path, modifiers_path)
        if rules_path is None:
            rules = default_rules()
        else:
            with open(rules_path, encoding="utf-8") as fh:
                rules = parse_rules(fh.read())
    except (KbError, RuleSyntaxError, RuleSemanticError, OSError) as exc:
        click.echo(f"cannot load knowledge base: {exc}", err=True)
        sys.exit(EXIT_KB)
    return kb, rules


@click.group()
def main():
    """Stocking advisor for ornamental aquariums."""


# --- batch ---------------------------------------------------------------------


@main.command()
@kb_options
@click.option("--input", "input_path", required=True, type=click.Path(dir_okay=False),
              help="TankState JSON file.")
@click.option("--threshold", type=float, default=None,
              help="Compatibility threshold in [0, 1] (default 0.5).")
def batch(profiles_path, matrix_path, modifiers_path, rules_path, input_path, threshold):
    """Run one consultation from a JSON file and print the result JSON."""
    kb, rules = _load_kb_or_exit(profiles_path, matrix_path, modifiers_path, rules_path)
    try:
        with open(input_path, encoding="utf-8") as fh:
            raw = fh.read()
    except OSError as exc:
        click.echo(f"cannot read input: {exc}", err=True)
        sys.exit(EXIT_INPUT)
    try:
        data = json.loads(raw)
    except json.JSONDecodeError as exc:
        click.echo(f"{input_path}:{exc.lineno}:{exc.colno}: {exc.msg}", err=True)
        sys.exit(EXIT_INPUT)
    try:
        tank = tank_from_dict(data)
    except TankFieldError as exc:
        click.echo(f"invalid input field {exc.field}: {exc}", err=True)
        sys.exit(EXIT_INPUT)
    try:
        result = run_consultation(tank, kb, rules=rules, threshold=threshold)
    except ConsultationError as exc:
        click.echo(str(exc), err=True)
        sys.exit(EXIT_INPUT)
    click.echo(result.to_json())
    sys.exit(EXIT_OK)


# --- serve ---------------------------------------------------------------------


@main.command()
@kb_options
@click.option("--port", envvar="TANKMATE_PORT", default=8080, show_default=True)
@click.option("--host", envvar="TANKMATE_HOST", default="127.0.0.1", show_default=True)
@click.option("--data-dir", envvar="TANKMATE_DATA_DIR", default="tankmate-data",
              show_default=True, help="Directory for session event logs.")
@click.option("--threshold", type=float, default=None)
def serve(profiles_path, matrix_path, modifiers_path, rules_path, port, host,
          data_dir, threshold):
    """Start the JSON API service."""
    import uvicorn

    from .service import create_app

    kb, rules = _load_kb_or_exit(profiles_path, matrix_path, modifiers_path, rules_path)
    app = create_app(kb=kb, rules=rules, data_dir=data_dir, threshold=threshold)
    uvicorn.run(app, host=host, port=port)


# --- interactive ------------------------------------------------------------------


class _Abort(Exception):
    pass


class Prompter:
    """Reads answers from a script file or interactively; supports `why`."""

    def __init__(self, answers: list[str] | None):
        self.answers = answers

    def read(self, label: str) -> str:
        if self.answers is not None:
            if not self.answers:
                raise _Abort()
            line = self.answers.pop(0)
            click.echo(f"{label}{line}")
            return line
        try:
            return input(label)
        except EOFError:
            raise _Abort() from None

    def ask(self, label: str, why_text: str, parse, default=None):
        while True:
            raw = self.read(label).strip()
            if raw == "why":
                click.echo(why_text)
                continue
            if raw == "" and default is not None:
                return default
            try:
                return parse(raw)
            except ValueError as exc:
                click.echo(f"  !! {exc}")


def _parse_float(raw: str) -> float:
    try:
        return float(raw)
    except ValueError:
        raise ValueError(f"not a number: {raw!r}") from None


def _parse_ph(raw: str) -> float:
    value = _parse_float(raw)
    if not 0 < value <= 14:
        raise ValueError("ph out of range (0, 14]")
    return value


def _parse_nonneg(raw: str) -> float:
    value = _parse_float(raw)
    if value < 0:
        raise ValueError("must be >= 0")
    return value


def _parse_positive(raw: str) -> float:
    value = _parse_float(raw)
    if value <= 0:
        raise ValueError("must be > 0")
    return value


def _parse_yn(raw: str) -> bool:
    lowered = raw.lower()
    if lowered in ("y", "yes", "true"):
        return True
    if lowered in ("n", "no", "false"):
        return False
    raise ValueError("answer y or n")


def _print_partition(kb: KnowledgeBase, result: ConsultationResult) -> None:
    click.echo(f"\nAdequate for these conditions ({len(result.adequate)}):")
    for sid in result.adequate:
        click.echo(f"  - {kb.profiles.get(sid).name} ({sid})")
    click.echo(f"Eliminated ({len(result.eliminated)}):")
    for rec in result.eliminated:
        name = kb.profiles.get(rec.species).name
        click.echo(
            f"  - {name} ({rec.species}): {rec.reason}"
            f" (tank {rec.offending:g}, bound {rec.bound:g})"
        )


def _print_groups(result: ConsultationResult) -> None:
    click.echo(f"\nSuggested groups (threshold {result.threshold:g}):")
    if not result.groups:
        click.echo("  (none)")
    for i, group in enumerate(result.groups, 1):
        members = ", ".join(group.members)
        click.echo(f"  {i}. {members}  [cf {group.score:.2f}]")
    for warning in result.warnings:
        click.echo(f"  note: {warning}")


def _explain_species(kb: KnowledgeBase, result: ConsultationResult, species: str) -> str:
    target = elimination_trace_target(result.trace, species)
    if target is None:
        target = profile_fact_target(result.trace, species)
    if target is None:
        return f"no species {species!r} in this consultation"
    try:
        return explain(result.trace, target).render()
    except ExplainError as exc:  # pragma: no cover - targets come from the trace
        return str(exc)


_WHY = {
    "temperature": "Consumed by rule MAIN::check-temp against each profile's range.",
    "ph": "Consumed by rule MAIN::check-ph against each profile's range.",
    "hardness": "Consumed by rule MAIN::check-hardness against each profile's range.",
    "tank-size": "Consumed by rule MAIN::check-tank-size against each profile's minimum.",
    "hiding": "Context flag for compatibility modifiers conditioned on has_hiding_places.",
    "stocking": "Context value for compatibility modifiers conditioned on stocking_ratio.",
    "residents": "Every suggestion must clear the compatibility threshold against each resident.",
}


@main.command()
@kb_options
@click.option("--threshold", type=float, default=None)
@click.option("--answers", "answers_path", type=click.Path(dir_okay=False), default=None,
              help="Scripted answers, one per prompt line (for tests).")
def advise(profiles_path, matrix_path, modifiers_path, rules_path, threshold, answers_path):
    """Interactive consultation: conditions, then residents, then groups."""
    kb, rules = _load_kb_or_exit(profiles_path, matrix_path, modifiers_path, rules_path)
    if threshold is not None and not 0.0 <= threshold <= 1.0:
        click.echo("threshold out of range [0, 1]", err=True)
        sys.exit(EXIT_INPUT)
    answers = None
    if answers_path is not None:
        try:
            with open(answers_path, encoding="utf-8") as fh:
                answers = fh.read().splitlines()
        except OSError as exc:
            click.echo(f"cannot read answers: {exc}", err=True)
            sys.exit(EXIT_INPUT)
    prompter = Prompter(answers)
    try:
        _advise_loop(kb, rules, threshold, prompter)
    except (_Abort, KeyboardInterrupt):
        click.echo("\naborted")
        sys.exit(EXIT_ABORT)
    sys.exit(EXIT_OK)


def _advise_loop(kb, rules: RuleSet, threshold, prompter: Prompter) -> None:
    temp = prompter.ask("Water temperature (°F): ", _WHY["temperature"], _parse_float)
    ph = prompter.ask("Water pH: ", _WHY["ph"], _parse_ph)
    hardness = prompter.ask("Water hardness (°dGH): ", _WHY["hardness"], _parse_nonneg)
    gallons = prompter.ask("Tank size (gallons): ", _WHY["tank-size"], _parse_positive)
    hiding = prompter.ask("Hiding places in the tank? [y/n]: ", _WHY["hiding"], _parse_yn)
    stocking = prompter.ask(
        "Stocking ratio (fish per gallon) [0]: ", _WHY["stocking"], _parse_nonneg, default=0.0
    )

    def consult(tank: TankState) -> ConsultationResult:
        return run_consultation(tank, kb, rules=rules, threshold=threshold)

    tank = TankState(
        temperature_f=temp, ph=ph, hardness_dgh=hardness, tank_size_gal=gallons,
        has_hiding_places=hiding, stocking_ratio=stocking,
    )
    result = consult(tank)
    _print_partition(kb, result)

    raw = prompter.ask(
        "\nCurrent residents (species ids, comma separated; empty for none): ",
        _WHY["residents"], str, default="",
    )
    residents = tuple(s.strip() for s in raw.split(",") if s.strip())
    tank = dataclasses.replace(tank, residents=residents)
    result = consult(tank)
    _print_groups(result)

    click.echo("\nCommands: how <species-id>, add <species-id>, why, quit")
    while True:
        try:
            raw = prompter.read("> ").strip()
        except _Abort:
            return  # EOF at the command prompt is a normal goodbye
        if not raw:
            continue
        if raw in ("quit", "exit"):
            return
        if raw == "why":
            click.echo(_WHY["residents"])
            continue
        verb, _, arg = raw.partition(" ")
        arg = arg.strip()
        if verb == "how" and arg:
            click.echo(_explain_species(kb, result, arg))
        elif verb == "add" and arg:
            try:
                result = whatif_add(result, tank, kb, arg, rules=rules)
            except ConsultationError as exc:
                click.echo(f"  !! {exc}")
                continue
            tank = dataclasses.replace(
                tank,
                residents=tank.residents + (arg,),
                stocking_ratio=tank.stocking_ratio + 1.0 / tank.tank_size_gal,
            )
            _print_groups(result)
        else:
            click.echo("  ?? commands: how <species-id>, add <species-id>, why, quit")


if __name__ == "__main__":
    main()
