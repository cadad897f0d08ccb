"""Read and write the transaction and demographics CSV files.

Transaction file::

    patient_id,disease
    P000000001,Bradycardia
    P000000001,Cardiac Arrest

Demographics file::

    patient_id,age,sex
    P000000001,47,F
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Iterable, Mapping, TextIO

from .errors import FormatError, IngestIOError, ValidationError
from .model import (
    Demographics,
    PatientRecord,
    Sex,
    TransactionTable,
    normalize_disease,
    normalize_patient_id,
)

TRANSACTION_HEADER = ("patient_id", "disease")
DEMOGRAPHICS_HEADER = ("patient_id", "age", "sex")


@dataclass
class IngestReport:
    rows_read: int = 0
    duplicate_rows_dropped: int = 0
    patients: int = 0
    distinct_diseases: int = 0
    malformed_rows: list[tuple[int, str]] = field(default_factory=list)

    @property
    def accepted_rows(self) -> int:
        return self.rows_read - self.duplicate_rows_dropped - len(self.malformed_rows)

    def as_dict(self) -> dict[str, object]:
        return {
            "rows_read": self.rows_read,
            "duplicate_rows_dropped": self.duplicate_rows_dropped,
            "patients": self.patients,
            "distinct_diseases": self.distinct_diseases,
            "malformed_rows": [list(m) for m in self.malformed_rows],
        }


@dataclass
class DemographicsReport:
    rows_read: int = 0
    overridden_rows: int = 0
    malformed_rows: list[tuple[int, str]] = field(default_factory=list)

    def as_dict(self) -> dict[str, object]:
        return {
            "rows_read": self.rows_read,
            "overridden_rows": self.overridden_rows,
            "malformed_rows": [list(m) for m in self.malformed_rows],
        }


def _rows(stream: TextIO, header: tuple[str, ...]) -> Iterable[tuple[int, list[str]]]:
    """Yield ``(line_number, fields)`` for non-blank data rows after checking the header."""
    reader = csv.reader(stream)
    try:
        try:
            first = next(reader)
        except StopIteration:
            raise FormatError(f"missing header line, expected {','.join(header)!r}") from None
        if first:
            first[0] = first[0].lstrip("\ufeff")
        if tuple(f.strip() for f in first) != header:
            raise FormatError(f"header {','.join(first)!r} does not match {','.join(header)!r}")
        for fields in reader:
            if not fields or (len(fields) == 1 and not fields[0].strip()):
                continue
            yield reader.line_num, fields
    except UnicodeDecodeError as exc:
        raise IngestIOError(f"input is not valid UTF-8: {exc}") from exc
    except csv.Error as exc:
        raise FormatError(f"CSV syntax error near line {reader.line_num}: {exc}") from exc


def parse_transactions(stream: TextIO) -> tuple[TransactionTable, IngestReport]:
    """Parse a transaction CSV into a table plus an ingest report.

    Duplicate ``(patient, disease)`` rows collapse into one membership and
    are counted; malformed rows are recorded and skipped.
    """
    report = IngestReport()
    acc: dict[str, set[str]] = {}
    for line, fields in _rows(stream, TRANSACTION_HEADER):
        report.rows_read += 1
        if len(fields) != 2:
            report.malformed_rows.append((line, f"expected 2 fields, got {len(fields)}"))
            continue
        try:
            pid = normalize_patient_id(fields[0])
            disease = normalize_disease(fields[1])
        except ValidationError as exc:
            report.malformed_rows.append((line, str(exc)))
            continue
        diseases = acc.setdefault(pid, set())
        if disease in diseases:
            report.duplicate_rows_dropped += 1
        else:
            diseases.add(disease)
    table = TransactionTable(acc)
    report.patients = table.total_patients
    report.distinct_diseases = len(table.universe())
    return table, report


def parse_demographics(stream: TextIO) -> tuple[dict[str, Demographics], DemographicsReport]:
    """Parse the demographics CSV. A repeated patient row overrides the earlier one."""
    report = DemographicsReport()
    out: dict[str, Demographics] = {}
    for line, fields in _rows(stream, DEMOGRAPHICS_HEADER):
        report.rows_read += 1
        if len(fields) != 3:
            report.malformed_rows.append((line, f"expected 3 fields, got {len(fields)}"))
            continue
        raw_pid, raw_age, raw_sex = fields
        try:
            pid = normalize_patient_id(raw_pid)
            age_text = raw_age.strip()
            if age_text:
                try:
                    age: int | None = int(age_text)
                except ValueError:
                    raise ValidationError(f"age {age_text!r} is not an integer") from None
            else:
                age = None
            record = Demographics(pid, age, Sex.from_token(raw_sex))
        except ValidationError as exc:
            report.malformed_rows.append((line, str(exc)))
            continue
        if pid in out:
            report.overridden_rows += 1
        out[pid] = record
    return out, report


def count_diseases(table: TransactionTable) -> list[PatientRecord]:
    """One record per patient with its disease count, ordered by patient id."""
    return [
        PatientRecord(pid, len(table.entries[pid]), tuple(sorted(table.entries[pid])))
        for pid in table.patients()
    ]


def write_transactions(table: TransactionTable, stream: TextIO) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(TRANSACTION_HEADER)
    writer.writerows(table.pairs())


def write_demographics(demographics: Mapping[str, Demographics], stream: TextIO) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(DEMOGRAPHICS_HEADER)
    for pid in sorted(demographics):
        d = demographics[pid]
        writer.writerow([
            pid,
            "" if d.age is None else d.age,
            "" if d.sex is None else d.sex.token,
        ])
