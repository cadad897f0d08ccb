"""Brute-force reference miners for tests.

Nothing here reuses the counting code in :mod:`cscp.mining`: subsets of the
disease universe are enumerated exhaustively and each one is counted by a
direct scan using ``frozenset`` inclusion.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import combinations

from .errors import OracleGuardError
from .mining import FrequentItemsets
from .model import ItemSet, ItemsetCount, MiningConfig, Rule, TransactionTable

MAX_UNIVERSE = 20


def _universe(table: TransactionTable) -> list[str]:
    names = sorted({d for ds in table.entries.values() for d in ds})
    if len(names) > MAX_UNIVERSE:
        raise OracleGuardError(
            f"{len(names)} distinct diseases exceeds the oracle limit of {MAX_UNIVERSE}"
        )
    return names


def _scan_count(transactions: list[frozenset[str]], subset: frozenset[str]) -> int:
    return sum(1 for t in transactions if subset <= t)


def brute_force_counts(table: TransactionTable, maxk: int) -> dict[tuple[str, ...], int]:
    """Support of every subset of the universe with 1..maxk items (zeros included)."""
    universe = _universe(table)
    transactions = list(table.entries.values())
    out = {}
    for k in range(1, min(maxk, len(universe)) + 1):
        for combo in combinations(universe, k):
            out[combo] = _scan_count(transactions, frozenset(combo))
    return out


def brute_force_frequent(table: TransactionTable, minsup: int, maxk: int) -> FrequentItemsets:
    if minsup < 1 or maxk < 1:
        raise ValueError("minsup and maxk must be >= 1")
    by_pass: dict[int, list[ItemsetCount]] = {}
    for combo, n in brute_force_counts(table, maxk).items():
        if n >= minsup:
            by_pass.setdefault(len(combo), []).append(ItemsetCount(ItemSet(combo), n, len(combo)))
    frozen = {k: tuple(sorted(v, key=lambda ic: ic.itemset)) for k, v in by_pass.items()}
    return FrequentItemsets(
        frozen, table.total_patients, MiningConfig(maxpass=maxk, minsup=minsup), minsup
    )


def brute_force_rules(
    table: TransactionTable, minsup: int, maxk: int, min_conf: Fraction = Fraction(0)
) -> list[Rule]:
    """Naive rules: every frequent set, every split, counts rescanned from raw transactions."""
    transactions = list(table.entries.values())
    total = len(transactions)
    rules = []
    for ic in brute_force_frequent(table, minsup, maxk):
        z = ic.itemset.items
        if len(z) < 2:
            continue
        for r in range(1, len(z)):
            for ante in combinations(z, r):
                cons = tuple(x for x in z if x not in ante)
                pair = _scan_count(transactions, frozenset(z))
                ante_n = _scan_count(transactions, frozenset(ante))
                if Fraction(pair, ante_n) >= min_conf:
                    rules.append(Rule(ItemSet(ante), ItemSet(cons), pair, ante_n, total))
    rules.sort(key=lambda r: (r.antecedent, r.consequent))
    return rules
