"""Disease co-occurrence mining: Apriori frequent itemsets, directed rules,
demographic strata and a seeded synthetic data generator."""

from .errors import (
    ConfigError,
    CscpError,
    FormatError,
    GenerationError,
    IngestIOError,
    OracleGuardError,
    UndefinedConfidenceError,
    ValidationError,
)
from .ingest import IngestReport, count_diseases, parse_demographics, parse_transactions
from .mining import (
    FrequentItemsets,
    RuleSet,
    compute_rule_metrics,
    derive_rules,
    find_support,
    generate_candidates,
    mine_frequent,
    resolve_minsup,
)
from .model import (
    Demographics,
    ItemSet,
    ItemsetCount,
    MiningConfig,
    PatientRecord,
    Rule,
    Sex,
    StratumSpec,
    TransactionTable,
    canonicalize_itemset,
    format_pct,
)
from .strata import StratifiedReport, Stratum, Target, mine_strata, stratify
from .synth import GeneratorConfig, generate, id_format

__version__ = "0.1.0"
