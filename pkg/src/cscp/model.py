"""Domain types shared by ingest, mining, strata, synth and the CLI.

All types are immutable after construction. Percentages are exact
``Fraction`` values; rounding happens only in :func:`format_pct`.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from decimal import Decimal
from fractions import Fraction
from types import MappingProxyType
from typing import Iterable, Iterator, Mapping

from .errors import ConfigError, ValidationError

AGE_MIN = 0
AGE_MAX = 150

# Characters that would corrupt one of the CSV layouts we read or write.
_FORBIDDEN_IN_NAME = (",", "|")
_LINE_BREAKS = ("\n", "\r", "\x0b", "\x0c", "\x85", "\u2028", "\u2029")


def normalize_disease(raw: str) -> str:
    """Trim and collapse internal whitespace; case is preserved."""
    if not isinstance(raw, str):
        raise ValidationError(f"disease name must be text, got {type(raw).__name__}")
    if any(ch in raw for ch in _LINE_BREAKS):
        raise ValidationError(f"disease name contains a line break: {raw!r}")
    name = " ".join(raw.split())
    if not name:
        raise ValidationError("disease name is empty")
    for ch in _FORBIDDEN_IN_NAME:
        if ch in name:
            raise ValidationError(f"disease name contains reserved character {ch!r}: {name!r}")
    return name


def normalize_patient_id(raw: str) -> str:
    if not isinstance(raw, str):
        raise ValidationError(f"patient id must be text, got {type(raw).__name__}")
    pid = raw.strip()
    if not pid:
        raise ValidationError("patient id is empty")
    return pid


def as_fraction(value: int | float | Fraction | Decimal | str) -> Fraction:
    """Exact rational from a user-facing number.

    Floats go through their shortest repr so that ``0.01`` becomes exactly
    1/100 rather than the nearest binary double.
    """
    if isinstance(value, bool):
        raise ConfigError("boolean is not a number here")
    if isinstance(value, float):
        return Fraction(repr(value))
    return Fraction(value)


def format_pct(value: Fraction) -> str:
    """Round half-up to two decimals, e.g. ``Fraction(26, 305) * 100 -> '8.52'``."""
    value = Fraction(value)
    sign = "-" if value < 0 else ""
    hundredths = (abs(value) * 100 + Fraction(1, 2)).__floor__()
    whole, frac = divmod(hundredths, 100)
    return f"{sign}{whole}.{frac:02d}"


@dataclass(frozen=True, slots=True, order=True)
class ItemSet:
    """A non-empty, code-point ordered, duplicate-free tuple of disease names.

    Build from arbitrary input with :func:`canonicalize_itemset`; the
    constructor itself only accepts an already canonical tuple.
    """

    items: tuple[str, ...]

    def __post_init__(self) -> None:
        if not isinstance(self.items, tuple):
            object.__setattr__(self, "items", tuple(self.items))
        if not self.items:
            raise ValidationError("itemset must be non-empty")
        for a, b in zip(self.items, self.items[1:]):
            if not a < b:
                raise ValidationError(f"itemset is not canonical: {self.items!r}")

    @classmethod
    def of(cls, *names: str) -> "ItemSet":
        return canonicalize_itemset(names)

    def __len__(self) -> int:
        return len(self.items)

    def __iter__(self) -> Iterator[str]:
        return iter(self.items)

    def __contains__(self, name: object) -> bool:
        return name in self.items

    def issubset(self, diseases: Iterable[str]) -> bool:
        pool = diseases if isinstance(diseases, (set, frozenset)) else set(diseases)
        return all(d in pool for d in self.items)

    def union(self, other: "ItemSet") -> "ItemSet":
        return canonicalize_itemset(self.items + other.items)

    def label(self, sep: str = "|") -> str:
        return sep.join(self.items)

    def __str__(self) -> str:
        return "{" + ", ".join(self.items) + "}"


def canonicalize_itemset(items: Iterable[str]) -> ItemSet:
    """Sorted, deduplicated, normalized itemset. Idempotent."""
    if isinstance(items, ItemSet):
        return items
    names = {normalize_disease(x) for x in items}
    if not names:
        raise ValidationError("cannot build an itemset from no items")
    return ItemSet(tuple(sorted(names)))


@dataclass(frozen=True, slots=True)
class TransactionTable:
    """Patient id -> set of diseases. One patient is one transaction."""

    entries: Mapping[str, frozenset[str]]

    def __post_init__(self) -> None:
        frozen = {}
        for pid, diseases in self.entries.items():
            pid = normalize_patient_id(pid)
            ds = frozenset(normalize_disease(d) for d in diseases)
            if not ds:
                raise ValidationError(f"patient {pid} has no diseases")
            if pid in frozen:
                raise ValidationError(f"patient {pid} appears twice after normalization")
            frozen[pid] = ds
        object.__setattr__(self, "entries", MappingProxyType(frozen))

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[str, str]]) -> "TransactionTable":
        acc: dict[str, set[str]] = {}
        for pid, disease in pairs:
            acc.setdefault(pid, set()).add(disease)
        return cls(acc)

    @property
    def total_patients(self) -> int:
        return len(self.entries)

    def __len__(self) -> int:
        return len(self.entries)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, TransactionTable):
            return NotImplemented
        return dict(self.entries) == dict(other.entries)

    def __hash__(self) -> int:
        return hash(frozenset(self.entries.items()))

    def patients(self) -> list[str]:
        return sorted(self.entries)

    def universe(self) -> list[str]:
        """All distinct diseases, code-point ordered."""
        seen: set[str] = set()
        for ds in self.entries.values():
            seen.update(ds)
        return sorted(seen)

    def restrict(self, patients: Iterable[str]) -> "TransactionTable":
        """Sub-table for the given patients; ids not in the table are ignored."""
        keep = set(patients)
        return TransactionTable({p: ds for p, ds in self.entries.items() if p in keep})

    def pairs(self) -> Iterator[tuple[str, str]]:
        for pid in self.patients():
            for d in sorted(self.entries[pid]):
                yield pid, d


@dataclass(frozen=True, slots=True)
class PatientRecord:
    patient: str
    count: int
    diseases: tuple[str, ...]

    def __post_init__(self) -> None:
        if self.count != len(self.diseases):
            raise ValidationError("count must equal the number of diseases")
        for a, b in zip(self.diseases, self.diseases[1:]):
            if not a < b:
                raise ValidationError("diseases must be strictly ordered")

    def diseases_text(self) -> str:
        return ", ".join(self.diseases)


class Sex(enum.Enum):
    FEMALE = "female"
    MALE = "male"
    OTHER = "other"

    @property
    def token(self) -> str:
        return self.value[0].upper()

    @classmethod
    def from_token(cls, token: str) -> "Sex | None":
        """``F``/``M``/``O`` (any case, or the full word); empty means absent."""
        t = token.strip().lower()
        if not t:
            return None
        for member in cls:
            if t in (member.value, member.value[0]):
                return member
        raise ValidationError(f"unrecognized sex token {token!r}")


@dataclass(frozen=True, slots=True)
class Demographics:
    patient: str
    age: int | None = None
    sex: Sex | None = None

    def __post_init__(self) -> None:
        if self.age is not None:
            if isinstance(self.age, bool) or not isinstance(self.age, int):
                raise ValidationError(f"age must be an integer, got {self.age!r}")
            if not AGE_MIN <= self.age <= AGE_MAX:
                raise ValidationError(f"age {self.age} outside [{AGE_MIN}, {AGE_MAX}]")


@dataclass(frozen=True, slots=True)
class ItemsetCount:
    """An itemset with its absolute support; ``k`` is the pass (= size)."""

    itemset: ItemSet
    support_count: int
    k: int

    def __post_init__(self) -> None:
        if self.k != len(self.itemset):
            raise ValidationError(f"pass {self.k} does not match itemset size {len(self.itemset)}")
        if self.support_count < 0:
            raise ValidationError("support count is negative")


@dataclass(frozen=True, slots=True)
class MiningConfig:
    """Mining thresholds.

    ``minsup`` is an absolute patient count when given as ``int`` and a
    fraction of the patients otherwise (float, Fraction, Decimal). It is
    stored either as ``int`` or as an exact ``Fraction``.
    """

    maxpass: int = 2
    minsup: int | Fraction = 1
    min_conf: Fraction = Fraction(0)

    def __post_init__(self) -> None:
        if isinstance(self.maxpass, bool) or not isinstance(self.maxpass, int) or self.maxpass < 1:
            raise ConfigError(f"maxpass must be an integer >= 1, got {self.maxpass!r}")
        minsup = self.minsup
        if isinstance(minsup, bool):
            raise ConfigError("minsup must be a number")
        if isinstance(minsup, int):
            if minsup < 1:
                raise ConfigError(f"absolute minsup must be >= 1, got {minsup}")
        else:
            try:
                minsup = as_fraction(minsup)
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"bad minsup {self.minsup!r}") from exc
            if not 0 < minsup <= 1:
                raise ConfigError(f"relative minsup must lie in (0, 1], got {float(minsup):g}")
            object.__setattr__(self, "minsup", minsup)
        try:
            conf = as_fraction(self.min_conf)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad min_conf {self.min_conf!r}") from exc
        if not 0 <= conf <= 1:
            raise ConfigError(f"min_conf must lie in [0, 1], got {self.min_conf}")
        object.__setattr__(self, "min_conf", conf)

    @property
    def relative(self) -> bool:
        return isinstance(self.minsup, Fraction)

    def describe(self) -> dict[str, object]:
        minsup: object = str(self.minsup) if self.relative else self.minsup
        return {
            "maxpass": self.maxpass,
            "minsup": minsup,
            "minsup_kind": "relative" if self.relative else "absolute",
            "min_conf": str(self.min_conf),
        }


@dataclass(frozen=True, slots=True)
class Rule:
    """Directed rule antecedent -> consequent.

    The antecedent plays the role of the primary disease (reason for the
    visit) and the consequent the secondary, co-occurring one(s).
    """

    antecedent: ItemSet
    consequent: ItemSet
    support_count: int
    antecedent_count: int
    total_patients: int

    def __post_init__(self) -> None:
        if set(self.antecedent.items) & set(self.consequent.items):
            raise ValidationError("antecedent and consequent overlap")
        if not 0 < self.support_count <= self.antecedent_count <= self.total_patients:
            raise ValidationError(
                "rule counts must satisfy 0 < support <= antecedent support <= total, got "
                f"{self.support_count}, {self.antecedent_count}, {self.total_patients}"
            )

    @property
    def itemset(self) -> ItemSet:
        return self.antecedent.union(self.consequent)

    @property
    def support_pct(self) -> Fraction:
        return Fraction(100 * self.support_count, self.total_patients)

    @property
    def confidence_pct(self) -> Fraction:
        return Fraction(100 * self.support_count, self.antecedent_count)

    @property
    def confidence(self) -> Fraction:
        return Fraction(self.support_count, self.antecedent_count)

    def sort_key(self) -> tuple[ItemSet, ItemSet]:
        return (self.antecedent, self.consequent)

    def __str__(self) -> str:
        return (
            f"{self.antecedent} -> {self.consequent} "
            f"supp {format_pct(self.support_pct)}% conf {format_pct(self.confidence_pct)}%"
        )


def default_age_bands(width: int = 5) -> tuple[tuple[int, int], ...]:
    """Half-open bands ``[0, 5), [5, 10), ..., [145, 150)``."""
    return tuple((lo, min(lo + width, AGE_MAX)) for lo in range(AGE_MIN, AGE_MAX, width))


@dataclass(frozen=True, slots=True)
class StratumSpec:
    attribute: str
    age_bands: tuple[tuple[int, int], ...] = field(default_factory=default_age_bands)

    def __post_init__(self) -> None:
        if self.attribute not in ("age", "sex"):
            raise ConfigError(f"stratify attribute must be 'age' or 'sex', got {self.attribute!r}")
        bands = tuple((int(lo), int(hi)) for lo, hi in self.age_bands)
        object.__setattr__(self, "age_bands", bands)
        if self.attribute == "age":
            _check_bands(bands)

    def band_label(self, band: tuple[int, int]) -> str:
        return f"{band[0]}-{band[1]}"


def _check_bands(bands: tuple[tuple[int, int], ...]) -> None:
    if not bands:
        raise ConfigError("age bands are empty")
    expected_lo = AGE_MIN
    for lo, hi in bands:
        if lo >= hi:
            raise ConfigError(f"empty or inverted age band [{lo}, {hi})")
        if lo != expected_lo:
            raise ConfigError(
                f"age bands must be ascending, non-overlapping and contiguous from {AGE_MIN}; "
                f"expected a band starting at {expected_lo}, got [{lo}, {hi})"
            )
        expected_lo = hi
    if expected_lo != AGE_MAX:
        raise ConfigError(f"age bands must cover up to {AGE_MAX}, last band ends at {expected_lo}")


def parse_age_bands(text: str) -> tuple[tuple[int, int], ...]:
    """Parse ``"0:45,45:50,50:150"`` into validated half-open bands."""
    bands = []
    for chunk in text.split(","):
        chunk = chunk.strip()
        if not chunk:
            continue
        lo, sep, hi = chunk.partition(":")
        if not sep:
            raise ConfigError(f"age band {chunk!r} is not of the form lo:hi")
        try:
            bands.append((int(lo), int(hi)))
        except ValueError as exc:
            raise ConfigError(f"age band {chunk!r} has non-integer bounds") from exc
    result = tuple(bands)
    _check_bands(result)
    return result
