"""Knowledge base: fish profiles, the compatibility chart, and context modifiers.

Everything here is immutable after load and safe to share between
concurrent consultations. Loading itself is single-threaded.
"""

from __future__ import annotations

import csv
import dataclasses
import io
import json
import math
from dataclasses import dataclass, field
from enum import Enum
from importlib import resources
from typing import Iterable, Iterator, TextIO


class KbError(Exception):
    """A knowledge-base file could not be loaded or is inconsistent."""


class TankFieldError(ValueError):
    """A tank-state field failed validation. Carries the field name."""

    def __init__(self, field_name: str, message: str):
        super().__init__(message)
        self.field = field_name


PROFILE_HEADER = (
    "id,name,family,life_span_years,min_tank_gal,temp_min_f,temp_max_f,"
    "ph_min,ph_max,hardness_min_dgh,hardness_max_dgh"
)
COMPAT_HEADER = "species_a,species_b,level"


class CompatLevel(Enum):
    """Three-valued compatibility: usually / sometimes / rarely compatible."""

    H = "H"
    M = "M"
    L = "L"

    @property
    def rank(self) -> int:
        return {"L": 0, "M": 1, "H": 2}[self.value]

    def __str__(self) -> str:  # pragma: no cover - repr sugar
        return self.value


@dataclass(frozen=True)
class FishProfile:
    """One species' environmental envelope."""

    id: str
    name: str
    family: str
    life_span_years: float
    min_tank_gal: float
    temp_min_f: float
    temp_max_f: float
    ph_min: float
    ph_max: float
    hardness_min_dgh: float
    hardness_max_dgh: float

    def __post_init__(self):
        if not self.id:
            raise ValueError("empty id")
        if self.life_span_years <= 0:
            raise ValueError("life_span_years must be positive")
        if self.min_tank_gal <= 0:
            raise ValueError("min_tank_gal must be positive")
        if self.temp_min_f > self.temp_max_f:
            raise ValueError("temp_min exceeds temp_max")
        if self.ph_min > self.ph_max:
            raise ValueError("ph_min exceeds ph_max")
        if not (0 < self.ph_min and self.ph_max <= 14):
            raise ValueError("ph out of range (0, 14]")
        if self.hardness_min_dgh > self.hardness_max_dgh:
            raise ValueError("hardness_min exceeds hardness_max")


class ProfileSet:
    """Ordered collection of profiles with unique ids."""

    def __init__(self, profiles: Iterable[FishProfile]):
        self.profiles: list[FishProfile] = list(profiles)
        self.by_id: dict[str, FishProfile] = {}
        self.by_name: dict[str, FishProfile] = {}
        for p in self.profiles:
            if p.id in self.by_id:
                raise ValueError(f"duplicate id {p.id!r}")
            self.by_id[p.id] = p
            self.by_name.setdefault(p.name, p)

    def __iter__(self) -> Iterator[FishProfile]:
        return iter(self.profiles)

    def __len__(self) -> int:
        return len(self.profiles)

    def __contains__(self, species_id: str) -> bool:
        return species_id in self.by_id

    def __eq__(self, other) -> bool:
        return isinstance(other, ProfileSet) and self.profiles == other.profiles

    def get(self, species_id: str) -> FishProfile | None:
        return self.by_id.get(species_id)

    def to_csv(self) -> str:
        """Serialize back to the canonical CSV; reloading round-trips."""
        out = io.StringIO()
        out.write(PROFILE_HEADER + "\n")
        w = csv.writer(out, lineterminator="\n")
        for p in self.profiles:
            w.writerow(
                [p.id, p.name, p.family]
                + [
                    _num_str(v)
                    for v in (
                        p.life_span_years,
                        p.min_tank_gal,
                        p.temp_min_f,
                        p.temp_max_f,
                        p.ph_min,
                        p.ph_max,
                        p.hardness_min_dgh,
                        p.hardness_max_dgh,
                    )
                ]
            )
        return out.getvalue()


class CompatibilityMatrix:
    """Symmetric species-pair map of compatibility levels.

    Keys are unordered pairs; self pairs (a, a) are legal entries.
    """

    def __init__(self, species: Iterable[str]):
        self.species: list[str] = list(species)
        self._known = set(self.species)
        self.entries: dict[tuple[str, str], CompatLevel] = {}
        self.warnings: list[str] = []

    @staticmethod
    def _key(a: str, b: str) -> tuple[str, str]:
        return (a, b) if a <= b else (b, a)

    def put(self, a: str, b: str, level: CompatLevel) -> None:
        """Store a pair, merging duplicates to the more conservative level."""
        for s in (a, b):
            if s not in self._known:
                raise KbError(f"species {s!r} not in species list")
        key = self._key(a, b)
        old = self.entries.get(key)
        if old is None:
            self.entries[key] = level
        elif old is not level:
            kept = min(old, level, key=lambda lv: lv.rank)
            self.entries[key] = kept
            self.warnings.append(
                f"conflicting levels for ({key[0]}, {key[1]}): "
                f"{old.value} vs {level.value}, kept {kept.value}"
            )

    def lookup(self, a: str, b: str) -> CompatLevel | None:
        return self.entries.get(self._key(a, b))

    def pairs(self) -> Iterator[tuple[str, str, CompatLevel]]:
        for (a, b), lv in sorted(self.entries.items()):
            yield a, b, lv

    def __len__(self) -> int:
        return len(self.entries)


MODIFIER_OPS = ("eq", "gte", "lte")


@dataclass(frozen=True)
class CfModifier:
    """A context condition that nudges pairwise compatibility belief.

    ``when_op`` "eq" on the residents field means list membership; on
    scalar fields it is plain equality. "gte"/"lte" compare numerically.
    """

    id: str
    description: str
    when_field: str
    when_op: str
    when_value: object
    delta: float

    def __post_init__(self):
        if self.when_op not in MODIFIER_OPS:
            raise ValueError(f"unknown op {self.when_op!r}")
        if not -1.0 <= self.delta <= 1.0:
            raise ValueError("delta outside [-1, 1]")

    def applies_to(self, tank: "TankState") -> bool:
        if self.when_field not in TANK_FIELDS:
            return False
        actual = getattr(tank, self.when_field)
        if self.when_field == "residents":
            return self.when_value in actual
        if self.when_op == "eq":
            return actual == self.when_value
        if self.when_op == "gte":
            return actual >= self.when_value
        return actual <= self.when_value


@dataclass(frozen=True)
class TankState:
    """Water conditions, context flags, and residents for one consultation."""

    temperature_f: float
    ph: float
    hardness_dgh: float
    tank_size_gal: float
    has_hiding_places: bool = False
    stocking_ratio: float = 0.0
    residents: tuple[str, ...] = ()

    def __post_init__(self):
        for name in ("temperature_f", "ph", "hardness_dgh", "tank_size_gal", "stocking_ratio"):
            v = getattr(self, name)
            if isinstance(v, (int, float)) and not isinstance(v, bool):
                object.__setattr__(self, name, float(v))
        object.__setattr__(self, "residents", tuple(self.residents))


TANK_FIELDS = frozenset(f.name for f in dataclasses.fields(TankState))
TANK_NUMERIC_FIELDS = (
    "temperature_f",
    "ph",
    "hardness_dgh",
    "tank_size_gal",
    "stocking_ratio",
)


def validate_tank(tank: TankState) -> None:
    """Raise TankFieldError on the first invalid field."""
    for name in TANK_NUMERIC_FIELDS:
        v = getattr(tank, name)
        if not isinstance(v, (int, float)) or isinstance(v, bool) or not math.isfinite(v):
            raise TankFieldError(name, f"{name} must be a finite number")
    if not 0 < tank.ph <= 14:
        raise TankFieldError("ph", "ph out of range (0, 14]")
    if tank.hardness_dgh < 0:
        raise TankFieldError("hardness_dgh", "hardness_dgh must be >= 0")
    if tank.tank_size_gal <= 0:
        raise TankFieldError("tank_size_gal", "tank_size_gal must be > 0")
    if tank.stocking_ratio < 0:
        raise TankFieldError("stocking_ratio", "stocking_ratio must be >= 0")
    if not isinstance(tank.has_hiding_places, bool):
        raise TankFieldError("has_hiding_places", "has_hiding_places must be a boolean")


def tank_from_dict(data: dict) -> TankState:
    """Build a validated TankState from JSON-ish input, naming bad fields."""
    if not isinstance(data, dict):
        raise TankFieldError("", "tank state must be an object")
    required = ("temperature_f", "ph", "hardness_dgh", "tank_size_gal")
    for name in required:
        if name not in data:
            raise TankFieldError(name, f"missing field {name}")
    unknown = set(data) - TANK_FIELDS
    if unknown:
        bad = sorted(unknown)[0]
        raise TankFieldError(bad, f"unknown field {bad}")
    residents = data.get("residents", ())
    if not isinstance(residents, (list, tuple)) or not all(
        isinstance(r, str) for r in residents
    ):
        raise TankFieldError("residents", "residents must be a list of species ids")
    tank = TankState(
        temperature_f=data["temperature_f"],
        ph=data["ph"],
        hardness_dgh=data["hardness_dgh"],
        tank_size_gal=data["tank_size_gal"],
        has_hiding_places=data.get("has_hiding_places", False),
        stocking_ratio=data.get("stocking_ratio", 0.0),
        residents=tuple(residents),
    )
    validate_tank(tank)
    return tank


def tank_to_dict(tank: TankState) -> dict:
    return {
        "temperature_f": tank.temperature_f,
        "ph": tank.ph,
        "hardness_dgh": tank.hardness_dgh,
        "tank_size_gal": tank.tank_size_gal,
        "has_hiding_places": tank.has_hiding_places,
        "stocking_ratio": tank.stocking_ratio,
        "residents": list(tank.residents),
    }


# ---------------------------------------------------------------------------
# loading


def _iter_csv_rows(source: str | TextIO) -> Iterator[tuple[int, list[str]]]:
    """Yield (line number, parsed row), skipping comments and blank lines."""
    text = source if isinstance(source, str) else source.read()
    for lineno, line in enumerate(text.splitlines(), 1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        yield lineno, next(csv.reader([line]))


def _float_field(raw: str, field_name: str, lineno: int) -> float:
    try:
        return float(raw)
    except ValueError:
        raise KbError(f"line {lineno}: field {field_name}: not a number: {raw!r}") from None


def load_profiles(source: str | TextIO) -> ProfileSet:
    """Load fish profiles from CSV with the canonical header."""
    rows = _iter_csv_rows(source)
    try:
        lineno, header = next(rows)
    except StopIteration:
        raise KbError("empty profile file (missing header)") from None
    if header != PROFILE_HEADER.split(","):
        raise KbError(f"line {lineno}: bad header, expected {PROFILE_HEADER!r}")

    names = PROFILE_HEADER.split(",")
    profiles: list[FishProfile] = []
    seen: set[str] = set()
    for lineno, row in rows:
        if len(row) != len(names):
            raise KbError(f"line {lineno}: expected {len(names)} fields, got {len(row)}")
        rec = dict(zip(names, row))
        if rec["id"] in seen:
            raise KbError(f"line {lineno}: duplicate id {rec['id']!r}")
        seen.add(rec["id"])
        numeric = {k: _float_field(rec[k], k, lineno) for k in names[3:]}
        try:
            profiles.append(
                FishProfile(id=rec["id"], name=rec["name"], family=rec["family"], **numeric)
            )
        except ValueError as exc:
            raise KbError(f"line {lineno}: {exc}") from None
    return ProfileSet(profiles)


def load_compatibility(
    source: str | TextIO, species: Iterable[str] | None = None
) -> CompatibilityMatrix:
    """Load the pair-list CSV into a symmetric matrix.

    With an explicit ``species`` list, rows naming other labels are load
    errors. Without one, the species list is collected from the rows in
    first-appearance order and cross-checking is validate_kb's job.
    Conflicting duplicate pairs keep the more conservative level and add
    a warning.
    """
    rows = _iter_csv_rows(source)
    try:
        lineno, header = next(rows)
    except StopIteration:
        raise KbError("empty compatibility file (missing header)") from None
    if header != COMPAT_HEADER.split(","):
        raise KbError(f"line {lineno}: bad header, expected {COMPAT_HEADER!r}")

    parsed: list[tuple[int, str, str, CompatLevel]] = []
    order: list[str] = []
    seen: set[str] = set()
    for lineno, row in rows:
        if len(row) != 3:
            raise KbError(f"line {lineno}: expected 3 fields, got {len(row)}")
        a, b, raw_level = row
        try:
            level = CompatLevel(raw_level.strip())
        except ValueError:
            raise KbError(f"line {lineno}: unknown level {raw_level!r}") from None
        parsed.append((lineno, a, b, level))
        for s in (a, b):
            if s not in seen:
                seen.add(s)
                order.append(s)

    matrix = CompatibilityMatrix(order if species is None else species)
    for lineno, a, b, level in parsed:
        try:
            matrix.put(a, b, level)
        except KbError as exc:
            raise KbError(f"line {lineno}: {exc}") from None
    return matrix


def load_modifiers(source: str | TextIO) -> list[CfModifier]:
    """Load context modifiers from their JSON array form."""
    text = source if isinstance(source, str) else source.read()
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise KbError(f"modifiers: invalid JSON: {exc}") from None
    if not isinstance(raw, list):
        raise KbError("modifiers: expected a JSON array")
    mods: list[CfModifier] = []
    for i, obj in enumerate(raw):
        try:
            when = obj["when"]
            mods.append(
                CfModifier(
                    id=obj["id"],
                    description=obj.get("description", ""),
                    when_field=when["field"],
                    when_op=when["op"],
                    when_value=when["value"],
                    delta=obj["delta"],
                )
            )
        except (KeyError, TypeError) as exc:
            raise KbError(f"modifiers[{i}]: missing or malformed field: {exc}") from None
        except ValueError as exc:
            raise KbError(f"modifiers[{i}]: {exc}") from None
    return mods


@dataclass
class ValidationReport:
    """Cross-reference report; empty iff the KB is closed and consistent."""

    missing_from_matrix: list[str] = field(default_factory=list)
    missing_profiles: list[str] = field(default_factory=list)
    unknown_modifier_fields: list[tuple[str, str]] = field(default_factory=list)

    @property
    def is_empty(self) -> bool:
        return not (
            self.missing_from_matrix or self.missing_profiles or self.unknown_modifier_fields
        )

    def lines(self) -> list[str]:
        out = []
        for name in self.missing_from_matrix:
            out.append(f"profile {name!r} has no compatibility entries")
        for name in self.missing_profiles:
            out.append(f"matrix species {name!r} has no profile")
        for mod_id, fname in self.unknown_modifier_fields:
            out.append(f"modifier {mod_id!r} references unknown field {fname!r}")
        return out


def validate_kb(
    profiles: ProfileSet,
    matrix: CompatibilityMatrix,
    modifiers: Iterable[CfModifier] = (),
) -> ValidationReport:
    """Cross-check profiles, matrix, and modifiers. Reports, never raises."""
    report = ValidationReport()
    matrix_species = set(matrix.species)
    profile_names = {p.name for p in profiles}
    for p in profiles:
        if p.name not in matrix_species:
            report.missing_from_matrix.append(p.name)
    for s in matrix.species:
        if s not in profile_names:
            report.missing_profiles.append(s)
    for m in modifiers:
        if m.when_field not in TANK_FIELDS:
            report.unknown_modifier_fields.append((m.id, m.when_field))
    return report


@dataclass
class KnowledgeBase:
    """Bundle of everything a consultation needs besides the tank."""

    profiles: ProfileSet
    matrix: CompatibilityMatrix
    modifiers: list[CfModifier]


def packaged_data(name: str) -> str:
    """Text of one of the seed data files shipped inside the package."""
    return resources.files("tankmate").joinpath(f"data/{name}").read_text(encoding="utf-8")


def load_kb(
    profiles_path: str | None = None,
    matrix_path: str | None = None,
    modifiers_path: str | None = None,
) -> KnowledgeBase:
    """Load a knowledge base; None falls back to the packaged seed files."""

    def read(path: str | None, default_name: str) -> str:
        if path is None:
            return packaged_data(default_name)
        with open(path, encoding="utf-8") as fh:
            return fh.read()

    profiles = load_profiles(read(profiles_path, "profiles.csv"))
    matrix = load_compatibility(read(matrix_path, "compatibility.csv"))
    modifiers = load_modifiers(read(modifiers_path, "modifiers.json"))
    return KnowledgeBase(profiles=profiles, matrix=matrix, modifiers=modifiers)


def _num_str(v: float) -> str:
    if float(v).is_integer():
        return str(int(v))
    return repr(float(v))
