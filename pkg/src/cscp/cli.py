"""Command line entry point: ``cscp gen | mine | stratify``.

Exit codes: 0 success, 2 usage or configuration error, 3 I/O error.
"""

from __future__ import annotations

import argparse
import io
import logging
import sys
from fractions import Fraction
from pathlib import Path
from typing import Sequence

from .errors import ConfigError, FormatError, ValidationError
from .ingest import (
    IngestReport,
    parse_demographics,
    parse_transactions,
    write_demographics,
    write_transactions,
)
from .mining import derive_rules, mine_frequent
from .model import MiningConfig, StratumSpec, TransactionTable, as_fraction, parse_age_bands
from .report import (
    atomic_write,
    build_manifest,
    manifest_text,
    render_itemsets,
    render_rules,
    render_stratified,
)
from .strata import Target, mine_strata, stratify
from .synth import generate, load_config

log = logging.getLogger("cscp")

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_IO = 3


def parse_minsup(text: str) -> int | Fraction:
    """``"10"`` is an absolute count, ``"0.01"`` a fraction of patients."""
    text = text.strip()
    try:
        if "." in text:
            return Fraction(text)
        return int(text)
    except ValueError:
        raise ConfigError(f"--minsup {text!r} is neither an integer count nor a decimal fraction") from None


def _mining_config(args: argparse.Namespace) -> MiningConfig:
    try:
        min_conf = as_fraction(args.min_conf)
    except ValueError:
        raise ConfigError(f"--min-conf {args.min_conf!r} is not a number") from None
    return MiningConfig(maxpass=args.maxpass, minsup=parse_minsup(args.minsup), min_conf=min_conf)


def _read_transactions(path: Path) -> tuple[TransactionTable, IngestReport]:
    with open(path, encoding="utf-8", newline="") as fh:
        table, report = parse_transactions(fh)
    for line, reason in report.malformed_rows:
        log.warning("%s:%d: skipped malformed row: %s", path, line, reason)
    if report.duplicate_rows_dropped:
        log.info("%s: dropped %d duplicate rows", path, report.duplicate_rows_dropped)
    return table, report


def cmd_gen(args: argparse.Namespace, argv: Sequence[str]) -> int:
    config = load_config(args.config)
    if args.seed is not None:
        config = config.with_seed(args.seed)
    table, demographics = generate(config)

    tx_buf, demo_buf = io.StringIO(), io.StringIO()
    write_transactions(table, tx_buf)
    write_demographics(demographics, demo_buf)
    outputs = {"transactions.csv": tx_buf.getvalue(), "demographics.csv": demo_buf.getvalue()}

    out = Path(args.out)
    for name, text in outputs.items():
        atomic_write(out / name, text)
    manifest = build_manifest(
        command="gen", argv=argv, config=config.as_dict(), inputs=[Path(args.config)],
        outputs=outputs, seed=config.seed,
    )
    atomic_write(out / "manifest.json", manifest_text(manifest))
    log.info("wrote %d patients to %s", table.total_patients, out)
    return EXIT_OK


def cmd_mine(args: argparse.Namespace, argv: Sequence[str]) -> int:
    config = _mining_config(args)
    path = Path(args.input)
    table, ingest_report = _read_transactions(path)
    frequent = mine_frequent(table, config)
    rules = derive_rules(frequent, table)

    outputs = {"itemsets.csv": render_itemsets(frequent), "rules.csv": render_rules(rules)}
    out = Path(args.out)
    for name, text in outputs.items():
        atomic_write(out / name, text)
    manifest = build_manifest(
        command="mine", argv=argv,
        config={**config.describe(), "resolved_minsup": frequent.minsup_count},
        inputs=[path], outputs=outputs,
        diagnostics={"ingest": ingest_report.as_dict()},
    )
    atomic_write(out / "manifest.json", manifest_text(manifest))
    log.info("%d frequent itemsets, %d rules", len(frequent), len(rules))
    return EXIT_OK


def cmd_stratify(args: argparse.Namespace, argv: Sequence[str]) -> int:
    config = _mining_config(args)
    if args.by == "age":
        spec = StratumSpec("age", parse_age_bands(args.age_bands)) if args.age_bands else StratumSpec("age")
    else:
        if args.age_bands:
            log.warning("--age-bands is ignored with --by sex")
        spec = StratumSpec("sex")
    targets = [Target.parse(t) for t in args.target] if args.target else None

    tx_path, demo_path = Path(args.input), Path(args.demographics)
    table, ingest_report = _read_transactions(tx_path)
    with open(demo_path, encoding="utf-8", newline="") as fh:
        demographics, demo_report = parse_demographics(fh)
    for line, reason in demo_report.malformed_rows:
        log.warning("%s:%d: skipped malformed row: %s", demo_path, line, reason)
    if demo_report.overridden_rows:
        log.warning("%s: %d later rows overrode earlier rows for the same patient",
                    demo_path, demo_report.overridden_rows)

    strata = stratify(demographics, table.patients(), spec)
    report = mine_strata(table, strata, config, targets, spec)
    text = render_stratified(report)
    if targets and not any(report.target_frequent.values()):
        log.warning("no target itemset is frequent in any stratum; writing an empty report")
        text = render_stratified(None)

    out = Path(args.out)
    outputs = {"stratified.csv": text}
    atomic_write(out / "stratified.csv", text)
    manifest = build_manifest(
        command="stratify", argv=argv,
        config={
            **config.describe(),
            "by": spec.attribute,
            "age_bands": [list(b) for b in spec.age_bands] if spec.attribute == "age" else None,
            "targets": [
                {"antecedent": t.antecedent.label(), "consequent": t.consequent.label()}
                for t in targets or ()
            ],
        },
        inputs=[tx_path, demo_path], outputs=outputs,
        diagnostics={
            "ingest": ingest_report.as_dict(),
            "demographics": demo_report.as_dict(),
            "strata_sizes": report.strata_sizes,
            "omitted_rows": report.omitted,
        },
    )
    atomic_write(out / "manifest.json", manifest_text(manifest))
    return EXIT_OK


def _add_mining_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--minsup", required=True,
                   help="absolute patient count (integer) or fraction of patients (e.g. 0.005)")
    p.add_argument("--maxpass", type=int, default=2, help="largest itemset size (default 2)")
    p.add_argument("--min-conf", default="0", help="minimum rule confidence in [0, 1] (default 0)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cscp", description="Mine disease co-occurrence rules.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate a synthetic dataset")
    g.add_argument("--config", required=True, help="JSON generator config ({} for defaults)")
    g.add_argument("--out", required=True, help="output directory")
    g.add_argument("--seed", type=int, default=None, help="override the config seed (unsigned 64-bit)")
    g.set_defaults(func=cmd_gen)

    m = sub.add_parser("mine", help="mine frequent itemsets and rules")
    m.add_argument("--input", required=True, help="transactions CSV")
    _add_mining_flags(m)
    m.add_argument("--out", required=True, help="output directory")
    m.set_defaults(func=cmd_mine)

    s = sub.add_parser("stratify", help="per-stratum support and confidence")
    s.add_argument("--input", required=True, help="transactions CSV")
    s.add_argument("--demographics", required=True, help="demographics CSV")
    s.add_argument("--by", required=True, choices=("age", "sex"))
    s.add_argument("--age-bands", default=None, help="e.g. 0:45,45:50,50:150 (default: 5-year bands)")
    s.add_argument("--target", action="append", default=None,
                   help="antecedent first, e.g. Hypertension,Heart-Block (repeatable)")
    _add_mining_flags(s)
    s.add_argument("--out", required=True, help="output directory")
    s.set_defaults(func=cmd_stratify)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter("cscp: %(levelname)s: %(message)s"))
    log.addHandler(handler)
    log.setLevel(logging.INFO if args.verbose else logging.WARNING)
    log.propagate = False
    try:
        return args.func(args, argv)
    except (ValidationError, FormatError) as exc:
        log.error("%s", exc)
        return EXIT_USAGE
    except OSError as exc:
        log.error("%s", exc)
        return EXIT_IO
    finally:
        log.removeHandler(handler)


if __name__ == "__main__":
    sys.exit(main())
