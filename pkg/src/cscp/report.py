"""CSV rendering of mining results and the JSON run manifest.

Data files never carry timestamps, so equal inputs give byte-identical
files; the manifest written next to them holds the run metadata.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import os
import tempfile
from datetime import datetime, timezone
from fractions import Fraction
from pathlib import Path
from typing import Any, Iterable, Sequence

from .mining import FrequentItemsets, RuleSet
from .model import format_pct
from .strata import StratifiedReport

ITEMSETS_HEADER = ("pass", "itemset", "support_count", "support_pct")
RULES_HEADER = ("antecedent", "consequent", "support_count", "support_pct", "confidence_pct")
STRATIFIED_HEADER = ("stratum", "itemset", "patient_count", "support_pct", "confidence_pct")


def _csv_text(header: Sequence[str], rows: Iterable[Sequence[object]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def render_itemsets(frequent: FrequentItemsets) -> str:
    total = frequent.total_patients
    rows = []
    for ic in frequent:
        pct = format_pct(Fraction(100 * ic.support_count, total))
        rows.append((ic.k, ic.itemset.label(), ic.support_count, pct))
    return _csv_text(ITEMSETS_HEADER, rows)


def render_rules(rules: RuleSet) -> str:
    rows = [
        (
            r.antecedent.label(),
            r.consequent.label(),
            r.support_count,
            format_pct(r.support_pct),
            format_pct(r.confidence_pct),
        )
        for r in rules
    ]
    return _csv_text(RULES_HEADER, rows)


def render_stratified(report: StratifiedReport | None) -> str:
    if report is None:
        return _csv_text(STRATIFIED_HEADER, [])
    rows = []
    for r in report.rows:
        supp, conf = r.support_pct, r.confidence_pct
        rows.append((
            r.stratum,
            r.itemset_label,
            r.patient_count,
            "" if supp is None else format_pct(supp),
            "" if conf is None else format_pct(conf),
        ))
    return _csv_text(STRATIFIED_HEADER, rows)


def atomic_write(path: Path, data: str | bytes) -> None:
    """Write via a temp file in the same directory, then rename over ``path``."""
    payload = data.encode("utf-8") if isinstance(data, str) else data
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(payload)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except FileNotFoundError:
            pass
        raise


def sha256_file(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def build_manifest(
    *,
    command: str,
    argv: Sequence[str],
    config: dict[str, Any],
    inputs: Iterable[Path] = (),
    outputs: dict[str, str] | None = None,
    seed: int | None = None,
    diagnostics: dict[str, Any] | None = None,
) -> dict[str, Any]:
    from . import __version__

    manifest: dict[str, Any] = {
        "tool": "cscp",
        "version": __version__,
        "command": command,
        "argv": list(argv),
        "config": config,
        "inputs": {str(p): sha256_file(p) for p in inputs},
        "outputs": {
            name: hashlib.sha256(text.encode("utf-8")).hexdigest()
            for name, text in (outputs or {}).items()
        },
        "timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds"),
    }
    if seed is not None:
        manifest["seed"] = seed
    if diagnostics:
        manifest["diagnostics"] = diagnostics
    return manifest


def manifest_text(manifest: dict[str, Any]) -> str:
    return json.dumps(manifest, indent=2, sort_keys=True) + "\n"
