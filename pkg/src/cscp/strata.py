"""Demographic stratification and per-stratum metrics.

Each stratum is mined as an independent dataset: percentages use the
stratum's own patient count as denominator and relative ``minsup`` values
are resolved against the stratum size.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .errors import ValidationError
from .mining import derive_rules, find_support, mine_frequent, resolve_minsup
from .model import (
    AGE_MAX,
    Demographics,
    ItemSet,
    MiningConfig,
    Sex,
    StratumSpec,
    TransactionTable,
    canonicalize_itemset,
    normalize_disease,
)

UNKNOWN = "unknown"


@dataclass(frozen=True)
class Stratum:
    label: str
    patients: frozenset[str]

    def __len__(self) -> int:
        return len(self.patients)


@dataclass(frozen=True)
class Target:
    """A directed itemset to follow across strata: ``antecedent -> consequent``."""

    antecedent: ItemSet
    consequent: ItemSet

    @classmethod
    def parse(cls, text: str) -> "Target":
        """``"Hypertension,Heart-Block"``: first name is the antecedent, the rest the consequent."""
        names = [normalize_disease(x) for x in text.split(",") if x.strip()]
        if len(names) < 2:
            raise ValidationError(f"target {text!r} needs at least two diseases")
        if len(set(names)) != len(names):
            raise ValidationError(f"target {text!r} repeats a disease")
        return cls(canonicalize_itemset(names[:1]), canonicalize_itemset(names[1:]))

    @property
    def itemset(self) -> ItemSet:
        return self.antecedent.union(self.consequent)


@dataclass(frozen=True)
class StratumRow:
    stratum: str
    patient_count: int
    antecedent: ItemSet | None = None
    consequent: ItemSet | None = None
    support_count: int = 0
    antecedent_count: int = 0

    @property
    def has_metrics(self) -> bool:
        return self.antecedent is not None

    @property
    def itemset_label(self) -> str:
        if self.antecedent is None or self.consequent is None:
            return ""
        return f"{self.antecedent.label()} -> {self.consequent.label()}"

    @property
    def support_pct(self) -> Fraction | None:
        if not self.has_metrics:
            return None
        return Fraction(100 * self.support_count, self.patient_count)

    @property
    def confidence_pct(self) -> Fraction | None:
        if not self.has_metrics:
            return None
        return Fraction(100 * self.support_count, self.antecedent_count)


@dataclass(frozen=True)
class StratifiedReport:
    spec: StratumSpec | None
    rows: tuple[StratumRow, ...]
    strata_sizes: dict[str, int]
    omitted: int = 0
    # Per target: was it frequent (under the stratum's minsup) in at least one stratum?
    target_frequent: dict[Target, bool] = field(default_factory=dict)

    def metric_rows(self) -> list[StratumRow]:
        return [r for r in self.rows if r.has_metrics]

    def series(self, target: Target) -> list[StratumRow]:
        return [
            r for r in self.rows
            if r.antecedent == target.antecedent and r.consequent == target.consequent
        ]


def stratum_labels(spec: StratumSpec) -> list[str]:
    if spec.attribute == "age":
        labels = [spec.band_label(b) for b in spec.age_bands]
    else:
        labels = [s.value for s in Sex]
    return labels + [UNKNOWN]


def _age_label(spec: StratumSpec, age: int) -> str:
    for lo, hi in spec.age_bands:
        if lo <= age < hi:
            return spec.band_label((lo, hi))
    if age == AGE_MAX:
        # Ages are valid up to and including 150; bands are half-open at 150.
        return spec.band_label(spec.age_bands[-1])
    return UNKNOWN


def stratify(
    demographics: Mapping[str, Demographics],
    patients: Iterable[str],
    spec: StratumSpec,
) -> list[Stratum]:
    """Partition ``patients``. Every label is emitted, including empty strata and ``unknown``."""
    buckets: dict[str, set[str]] = {label: set() for label in stratum_labels(spec)}
    for pid in patients:
        info = demographics.get(pid)
        if spec.attribute == "age":
            label = UNKNOWN if info is None or info.age is None else _age_label(spec, info.age)
        else:
            label = UNKNOWN if info is None or info.sex is None else info.sex.value
        buckets[label].add(pid)
    return [Stratum(label, frozenset(members)) for label, members in buckets.items()]


def check_partition(strata: Sequence[Stratum], patients: Iterable[str]) -> None:
    seen: set[str] = set()
    for s in strata:
        if seen & s.patients:
            raise ValidationError(f"stratum {s.label} overlaps another stratum")
        seen |= s.patients
    if seen != set(patients):
        raise ValidationError("strata do not cover exactly the table's patients")


def mine_strata(
    table: TransactionTable,
    strata: Sequence[Stratum],
    config: MiningConfig,
    target_itemsets: Sequence[Target] | None = None,
    spec: StratumSpec | None = None,
) -> StratifiedReport:
    """Per-stratum metrics.

    With targets, one row per (stratum, target) regardless of minsup; a
    target whose antecedent never occurs in a stratum is omitted there and
    counted. Without targets, every rule mined inside the stratum is
    reported.
    """
    check_partition(strata, table.entries)
    rows: list[StratumRow] = []
    sizes: dict[str, int] = {}
    omitted = 0
    frequent_somewhere = {t: False for t in target_itemsets or ()}

    for stratum in strata:
        sub = table.restrict(stratum.patients)
        n = sub.total_patients
        sizes[stratum.label] = n
        stratum_rows: list[StratumRow] = []
        if n:
            if target_itemsets is not None:
                minsup_n = resolve_minsup(config.minsup, n)
                wanted = sorted(
                    {t.itemset for t in target_itemsets} | {t.antecedent for t in target_itemsets}
                )
                counts = {ic.itemset: ic.support_count for ic in find_support(sub, wanted)}
                for t in target_itemsets:
                    ante_n = counts[t.antecedent]
                    if ante_n == 0:
                        omitted += 1
                        continue
                    if counts[t.itemset] >= minsup_n and len(t.itemset) <= config.maxpass:
                        frequent_somewhere[t] = True
                    stratum_rows.append(StratumRow(
                        stratum.label, n, t.antecedent, t.consequent, counts[t.itemset], ante_n,
                    ))
            else:
                for rule in derive_rules(mine_frequent(sub, config), sub):
                    stratum_rows.append(StratumRow(
                        stratum.label, n, rule.antecedent, rule.consequent,
                        rule.support_count, rule.antecedent_count,
                    ))
        elif target_itemsets is not None:
            omitted += len(target_itemsets)
        if not stratum_rows:
            stratum_rows.append(StratumRow(stratum.label, n))
        rows.extend(stratum_rows)

    return StratifiedReport(spec, tuple(rows), sizes, omitted, frequent_somewhere)
