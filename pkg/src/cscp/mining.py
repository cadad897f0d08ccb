"""Level-wise Apriori mining and rule derivation.

Support counting uses one bitmap (a Python ``int``) per disease, where bit
``i`` is set when the ``i``-th patient (in sorted patient-id order) carries
the disease. The support of an itemset is the popcount of the AND of its
members' bitmaps. :func:`count_by_scan` is the plain per-patient subset
test; both must agree exactly.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Iterator, Mapping, Sequence

from .errors import UndefinedConfidenceError, ValidationError
from .model import (
    ItemSet,
    ItemsetCount,
    MiningConfig,
    Rule,
    TransactionTable,
    as_fraction,
)


def resolve_minsup(minsup: int | float | Fraction, total_patients: int) -> int:
    """Absolute support threshold.

    Integers pass through; fractions resolve to ``ceil(f * total_patients)``.
    The result is never below 1.
    """
    if total_patients < 0:
        raise ValidationError("total_patients must be non-negative")
    # MiningConfig does the range checks for both kinds.
    config = MiningConfig(minsup=minsup)
    if not config.relative:
        return config.minsup
    return max(1, math.ceil(config.minsup * total_patients))


def disease_bitmaps(table: TransactionTable) -> dict[str, int]:
    """Vertical layout: disease -> bitmask over patients in sorted id order."""
    n = table.total_patients
    buffers: dict[str, bytearray] = {}
    for i, pid in enumerate(table.patients()):
        byte, bit = divmod(i, 8)
        for d in table.entries[pid]:
            buf = buffers.get(d)
            if buf is None:
                buf = buffers[d] = bytearray((n + 7) // 8)
            buf[byte] |= 1 << bit
    return {d: int.from_bytes(buf, "little") for d, buf in buffers.items()}


def _bitmap_of(itemset: ItemSet, bitmaps: Mapping[str, int]) -> int:
    acc = -1
    for d in itemset.items:
        bm = bitmaps.get(d)
        if bm is None:
            return 0
        acc &= bm
    return acc


def find_support(table: TransactionTable, candidates: Sequence[ItemSet]) -> list[ItemsetCount]:
    """Exact support count of every candidate, in input order."""
    bitmaps = disease_bitmaps(table)
    return [
        ItemsetCount(c, _bitmap_of(c, bitmaps).bit_count(), len(c))
        for c in candidates
    ]


def count_by_scan(table: TransactionTable, candidates: Sequence[ItemSet]) -> list[ItemsetCount]:
    """Reference counting path: one pass over patients, merge-style subset test."""
    counts = [0] * len(candidates)
    for pid in table.patients():
        diseases = sorted(table.entries[pid])
        for j, c in enumerate(candidates):
            if _sorted_contains(diseases, c.items):
                counts[j] += 1
    return [ItemsetCount(c, n, len(c)) for c, n in zip(candidates, counts)]


def _sorted_contains(haystack: list[str], needle: tuple[str, ...]) -> bool:
    i = 0
    n = len(haystack)
    for item in needle:
        while i < n and haystack[i] < item:
            i += 1
        if i == n or haystack[i] != item:
            return False
        i += 1
    return True


def generate_candidates(frequent_k: Iterable[ItemSet]) -> list[ItemSet]:
    """Apriori join + prune.

    Two frequent k-itemsets sharing their first k-1 items join into a
    (k+1)-itemset, which survives only if every k-subset is frequent.
    """
    level = sorted(set(frequent_k))
    if not level:
        return []
    k = len(level[0])
    if any(len(s) != k for s in level):
        raise ValidationError("generate_candidates needs itemsets of a single size")
    known = set(level)
    groups: dict[tuple[str, ...], list[str]] = defaultdict(list)
    for s in level:
        groups[s.items[:-1]].append(s.items[-1])

    out: list[ItemSet] = []
    for prefix, tails in groups.items():
        for a, b in combinations(tails, 2):
            items = prefix + (a, b)
            if k > 1 and not all(
                ItemSet(items[:i] + items[i + 1:]) in known for i in range(k - 1)
            ):
                # The two subsets dropping a or b are the joined parents.
                continue
            out.append(ItemSet(items))
    out.sort()
    return out


@dataclass(frozen=True)
class FrequentItemsets:
    """Surviving itemsets per pass; passes with no survivors are absent."""

    by_pass: dict[int, tuple[ItemsetCount, ...]]
    total_patients: int
    config: MiningConfig
    minsup_count: int

    def level(self, k: int) -> tuple[ItemsetCount, ...]:
        return self.by_pass.get(k, ())

    def __iter__(self) -> Iterator[ItemsetCount]:
        for k in sorted(self.by_pass):
            yield from self.by_pass[k]

    def __len__(self) -> int:
        return sum(len(v) for v in self.by_pass.values())

    def counts(self) -> dict[ItemSet, int]:
        return {ic.itemset: ic.support_count for ic in self}

    def support(self, itemset: ItemSet) -> int | None:
        for ic in self.level(len(itemset)):
            if ic.itemset == itemset:
                return ic.support_count
        return None

    def same_itemsets(self, other: "FrequentItemsets") -> bool:
        """Itemset-for-itemset and count-for-count equality."""
        return self.by_pass == other.by_pass and self.total_patients == other.total_patients

    def check_invariants(self) -> list[str]:
        """Structural violations (empty when healthy): sizes, ordering, closure, monotonicity."""
        problems: list[str] = []
        counts = self.counts()
        for k, level in self.by_pass.items():
            names = [ic.itemset for ic in level]
            if names != sorted(set(names)):
                problems.append(f"pass {k} is not unique and sorted")
            for ic in level:
                if len(ic.itemset) != k or ic.k != k:
                    problems.append(f"{ic.itemset} has wrong size for pass {k}")
                if ic.support_count < self.minsup_count:
                    problems.append(f"{ic.itemset} is below minsup")
                if ic.support_count > self.total_patients:
                    problems.append(f"{ic.itemset} exceeds total patients")
                if k > 1:
                    for sub in combinations(ic.itemset.items, k - 1):
                        sub_count = counts.get(ItemSet(sub))
                        if sub_count is None:
                            problems.append(f"{ic.itemset}: subset {sub} missing (closure)")
                        elif sub_count < ic.support_count:
                            problems.append(f"{ic.itemset}: subset {sub} has lower support")
        return problems


def mine_frequent(table: TransactionTable, config: MiningConfig) -> FrequentItemsets:
    """Frequent itemsets of size 1..maxpass with support >= the resolved minsup."""
    total = table.total_patients
    minsup = resolve_minsup(config.minsup, total)
    bitmaps = disease_bitmaps(table)

    current: dict[ItemSet, int] = {}
    for d in sorted(bitmaps):
        bm = bitmaps[d]
        if bm.bit_count() >= minsup:
            current[ItemSet((d,))] = bm

    by_pass: dict[int, tuple[ItemsetCount, ...]] = {}
    k = 1
    while current:
        by_pass[k] = tuple(ItemsetCount(s, bm.bit_count(), k) for s, bm in current.items())
        if k == config.maxpass:
            break
        nxt: dict[ItemSet, int] = {}
        for cand in generate_candidates(current):
            # The prefix parent is frequent, so its bitmap is already known.
            bm = current[ItemSet(cand.items[:-1])] & bitmaps[cand.items[-1]]
            if bm.bit_count() >= minsup:
                nxt[cand] = bm
        current = nxt
        k += 1
    return FrequentItemsets(by_pass, total, config, minsup)


def compute_rule_metrics(pair_count: int, antecedent_count: int, total: int) -> tuple[Fraction, Fraction]:
    """``(support_pct, confidence_pct)`` as exact fractions.

    >>> from cscp.model import format_pct
    >>> [format_pct(x) for x in compute_rule_metrics(26, 305, 1000)]
    ['2.60', '8.52']
    """
    if antecedent_count == 0:
        raise UndefinedConfidenceError("confidence is undefined for an antecedent with zero support")
    if total < 1:
        raise ValidationError("total must be >= 1")
    if not 0 <= pair_count <= antecedent_count <= total:
        raise ValidationError(
            f"need 0 <= pair <= antecedent <= total, got {pair_count}, {antecedent_count}, {total}"
        )
    return Fraction(100 * pair_count, total), Fraction(100 * pair_count, antecedent_count)


@dataclass(frozen=True)
class RuleSet:
    rules: tuple[Rule, ...]
    total_patients: int

    def __iter__(self) -> Iterator[Rule]:
        return iter(self.rules)

    def __len__(self) -> int:
        return len(self.rules)

    def find(self, antecedent: ItemSet, consequent: ItemSet) -> Rule | None:
        for r in self.rules:
            if r.antecedent == antecedent and r.consequent == consequent:
                return r
        return None


def derive_rules(
    frequent: FrequentItemsets,
    table: TransactionTable,
    min_conf: float | Fraction | None = None,
) -> RuleSet:
    """Every directed split of every frequent itemset of size >= 2 meeting ``min_conf``.

    ``min_conf`` defaults to the value carried in ``frequent.config``.
    """
    threshold = frequent.config.min_conf if min_conf is None else as_fraction(min_conf)
    counts = frequent.counts()
    missing = set()
    for z in list(counts):
        for r in range(1, len(z)):
            for ante in combinations(z.items, r):
                if ItemSet(ante) not in counts:
                    missing.add(ItemSet(ante))
    if missing:
        # Only reachable when the caller trimmed `frequent`; count from the table.
        for ic in find_support(table, sorted(missing)):
            counts[ic.itemset] = ic.support_count

    rules: list[Rule] = []
    total = frequent.total_patients
    for ic in frequent:
        z, z_count = ic.itemset, ic.support_count
        if len(z) < 2 or z_count == 0:
            continue
        for r in range(1, len(z)):
            for ante_items in combinations(z.items, r):
                ante = ItemSet(ante_items)
                cons = ItemSet(tuple(x for x in z.items if x not in ante_items))
                ante_count = counts[ante]
                _, conf_pct = compute_rule_metrics(z_count, ante_count, total)
                if conf_pct < threshold * 100:
                    continue
                rules.append(Rule(ante, cons, z_count, ante_count, total))
    rules.sort(key=Rule.sort_key)
    return RuleSet(tuple(rules), total)
