"""Seeded synthetic patient/disease datasets.

The model is deliberately simple and is *not* a clinical model: every
disease is a Bernoulli draw with its catalog prevalence, taken in catalog
order, and a boost ``(given, target, m)`` multiplies the probability of
``target`` by ``m`` for patients who already drew ``given`` (clamped to
[0, 1]). Patients who draw no disease at all are redrawn.

Randomness comes from Python's ``random.Random`` (Mersenne Twister
MT19937) seeded with the integer seed, and only its ``random()`` method is
used. CPython guarantees that ``random()`` yields the same sequence for the
same integer seed across versions, which keeps generated files stable.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

from .errors import ConfigError, GenerationError, ValidationError
from .model import AGE_MAX, AGE_MIN, Demographics, Sex, TransactionTable, normalize_disease

MAX_ORDINAL = 999_999_999
MAX_REDRAWS = 1000
SEED_LIMIT = 2**64

DEFAULT_CATALOG: tuple[tuple[str, float], ...] = (
    ("Heart-Block", 0.334),
    ("Hypertension", 0.549),
    ("Myocarditis", 0.532),
    ("Cardiac-Arrest", 0.536),
    ("Bradycardia", 0.305),
)


def id_format(ordinal: int) -> str:
    """``1 -> 'P000000001'``."""
    if isinstance(ordinal, bool) or not isinstance(ordinal, int):
        raise ValidationError(f"ordinal must be an integer, got {ordinal!r}")
    if not 1 <= ordinal <= MAX_ORDINAL:
        raise ValidationError(f"ordinal {ordinal} outside [1, {MAX_ORDINAL}]")
    return f"P{ordinal:09d}"


@dataclass(frozen=True)
class Boost:
    given: str
    target: str
    multiplier: float


@dataclass(frozen=True)
class GeneratorConfig:
    patient_count: int = 1000
    catalog: tuple[tuple[str, float], ...] = DEFAULT_CATALOG
    boosts: tuple[Boost, ...] = ()
    age_range: tuple[int, int] = (18, 90)
    sex_distribution: tuple[float, float, float] = (0.5, 0.5, 0.0)  # female, male, other
    seed: int = 0

    def __post_init__(self) -> None:
        if isinstance(self.patient_count, bool) or not isinstance(self.patient_count, int):
            raise ConfigError("patient_count must be an integer")
        if not 1 <= self.patient_count <= MAX_ORDINAL:
            raise ConfigError(f"patient_count must lie in [1, {MAX_ORDINAL}], got {self.patient_count}")
        if not self.catalog:
            raise ConfigError("catalog must list at least one disease")
        names = []
        catalog = []
        for entry in self.catalog:
            try:
                name, prevalence = entry
                name = normalize_disease(name)
                prevalence = float(prevalence)
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"bad catalog entry {entry!r}: {exc}") from exc
            if not 0.0 <= prevalence <= 1.0:
                raise ConfigError(f"prevalence of {name} must lie in [0, 1], got {prevalence}")
            names.append(name)
            catalog.append((name, prevalence))
        if len(set(names)) != len(names):
            raise ConfigError("catalog lists a disease twice")
        object.__setattr__(self, "catalog", tuple(catalog))

        position = {n: i for i, n in enumerate(names)}
        boosts = []
        for b in self.boosts:
            if not isinstance(b, Boost):
                raise ConfigError(f"bad boost {b!r}")
            given, target = normalize_disease(b.given), normalize_disease(b.target)
            for n in (given, target):
                if n not in position:
                    raise ConfigError(f"boost names {n!r}, which is not in the catalog")
            if position[given] >= position[target]:
                raise ConfigError(
                    f"boost {given} -> {target}: the given disease must precede the target in catalog order"
                )
            if not b.multiplier >= 0:
                raise ConfigError(f"boost multiplier must be >= 0, got {b.multiplier}")
            boosts.append(Boost(given, target, float(b.multiplier)))
        object.__setattr__(self, "boosts", tuple(boosts))

        lo, hi = self.age_range
        if not (isinstance(lo, int) and isinstance(hi, int)) or not AGE_MIN <= lo <= hi <= AGE_MAX:
            raise ConfigError(f"age range must be integers with {AGE_MIN} <= lo <= hi <= {AGE_MAX}")
        probs = tuple(float(p) for p in self.sex_distribution)
        if len(probs) != 3 or any(p < 0 for p in probs) or abs(sum(probs) - 1.0) > 1e-9:
            raise ConfigError("sex distribution must be three non-negative probabilities summing to 1")
        object.__setattr__(self, "sex_distribution", probs)
        if isinstance(self.seed, bool) or not isinstance(self.seed, int) or not 0 <= self.seed < SEED_LIMIT:
            raise ConfigError(f"seed must be an unsigned 64-bit integer, got {self.seed!r}")

    def with_seed(self, seed: int) -> "GeneratorConfig":
        return GeneratorConfig(
            self.patient_count, self.catalog, self.boosts, self.age_range, self.sex_distribution, seed
        )

    def as_dict(self) -> dict[str, Any]:
        female, male, other = self.sex_distribution
        return {
            "patient_count": self.patient_count,
            "catalog": [{"name": n, "prevalence": p} for n, p in self.catalog],
            "boosts": [
                {"given": b.given, "target": b.target, "multiplier": b.multiplier} for b in self.boosts
            ],
            "age": {"lo": self.age_range[0], "hi": self.age_range[1]},
            "sex": {"female": female, "male": male, "other": other},
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "GeneratorConfig":
        """Build from the JSON config layout; missing keys take defaults."""
        if not isinstance(data, Mapping):
            raise ConfigError("generator config must be a JSON object")
        known = {"patient_count", "catalog", "boosts", "age", "sex", "seed"}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        kwargs: dict[str, Any] = {}
        try:
            if "patient_count" in data:
                kwargs["patient_count"] = data["patient_count"]
            if "catalog" in data:
                kwargs["catalog"] = tuple(
                    (e["name"], e["prevalence"]) if isinstance(e, Mapping) else tuple(e)
                    for e in data["catalog"]
                )
            if "boosts" in data:
                kwargs["boosts"] = tuple(
                    Boost(b["given"], b["target"], float(b["multiplier"])) for b in data["boosts"]
                )
            if "age" in data:
                kwargs["age_range"] = (data["age"]["lo"], data["age"]["hi"])
            if "sex" in data:
                sex = data["sex"]
                kwargs["sex_distribution"] = (
                    sex.get("female", 0.0), sex.get("male", 0.0), sex.get("other", 0.0)
                )
            if "seed" in data:
                kwargs["seed"] = data["seed"]
        except (KeyError, TypeError, ValueError, AttributeError) as exc:
            raise ConfigError(f"malformed generator config: {exc!r}") from exc
        return cls(**kwargs)


def load_config(path: str | Path) -> GeneratorConfig:
    """Read a JSON generator config. ``OSError`` propagates; bad content raises ``ConfigError``."""
    text = Path(path).read_text(encoding="utf-8")
    try:
        data = json.loads(text) if text.strip() else {}
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON: {exc}") from exc
    return GeneratorConfig.from_dict(data)


def _draw_diseases(rng: random.Random, config: GeneratorConfig) -> list[str]:
    boosts_by_target: dict[str, list[Boost]] = {}
    for b in config.boosts:
        boosts_by_target.setdefault(b.target, []).append(b)
    for _ in range(MAX_REDRAWS):
        drawn: list[str] = []
        have: set[str] = set()
        for name, prevalence in config.catalog:
            p = prevalence
            for b in boosts_by_target.get(name, ()):
                if b.given in have:
                    p *= b.multiplier
            p = min(1.0, max(0.0, p))
            if rng.random() < p:
                drawn.append(name)
                have.add(name)
        if drawn:
            return drawn
    raise GenerationError(f"no disease drawn after {MAX_REDRAWS} attempts; check catalog prevalences")


def _draw_sex(rng: random.Random, probs: Sequence[float]) -> Sex:
    u = rng.random()
    acc = 0.0
    members = list(Sex)
    for member, p in zip(members, probs):
        acc += p
        if u < acc:
            return member
    # Rounding slack: fall back to the last category with positive mass.
    return next(m for m, p in zip(reversed(members), reversed(probs)) if p > 0)


def generate(config: GeneratorConfig) -> tuple[TransactionTable, dict[str, Demographics]]:
    """Draw ``config.patient_count`` patients with ids ``P000000001``, ``P000000002``, ...

    Per patient the draw order is: diseases (with redraws), age, sex.
    """
    rng = random.Random(config.seed)
    lo, hi = config.age_range
    span = hi - lo + 1
    entries: dict[str, list[str]] = {}
    demographics: dict[str, Demographics] = {}
    for i in range(1, config.patient_count + 1):
        pid = id_format(i)
        entries[pid] = _draw_diseases(rng, config)
        age = lo + min(int(rng.random() * span), span - 1)
        demographics[pid] = Demographics(pid, age, _draw_sex(rng, config.sex_distribution))
    return TransactionTable(entries), demographics


def from_profile(profile: Iterable[tuple[Iterable[str], int]], start: int = 1) -> TransactionTable:
    """Deterministic table from ``(disease set, how many patients)`` groups.

    Useful to manufacture datasets with exact, known support counts, e.g.
    26 patients with ``{Bradycardia, Cardiac-Arrest}``.
    """
    entries: dict[str, frozenset[str]] = {}
    ordinal = start
    for diseases, n in profile:
        ds = frozenset(diseases)
        if n < 0:
            raise ValidationError("group size must be non-negative")
        for _ in range(n):
            entries[id_format(ordinal)] = ds
            ordinal += 1
    return TransactionTable(entries)
