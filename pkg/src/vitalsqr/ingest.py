"""Cohort file parsing into PatientRecord values.

Four comma-delimited UTF-8 files with header rows: patients, vitals,
comfort scores, and medication intervals. Malformed rows are rejected
with a reason and counted, never silently dropped; rows belonging to a
patient flagged for exclusion are counted separately so every input row
is accounted for.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

from .domain import (
    MAX_RECORD_SPAN_S,
    SCALE_RANGES,
    AgeAtAdmission,
    ComfortAssessment,
    ComfortScale,
    DrugClass,
    MeasurementMode,
    MedicationInterval,
    PatientRecord,
    TempSite,
    VitalKind,
    VitalSample,
)


class IngestError(ValueError):
    pass


class FileMissingError(IngestError):
    pass


class HeaderMismatchError(IngestError):
    pass


class DuplicatePatientError(IngestError):
    pass


@dataclass(frozen=True)
class CohortFiles:
    patients_path: str
    vitals_path: str
    scores_path: str
    meds_path: str


@dataclass
class IngestReport:
    patients_read: int = 0
    patients_excluded: int = 0
    rows_total: int = 0
    rows_loaded: int = 0
    rows_excluded_patient: int = 0
    rows_rejected: int = 0
    reject_reasons: dict[str, int] = field(default_factory=dict)

    def reject(self, reason: str) -> None:
        self.rows_rejected += 1
        self.reject_reasons[reason] = self.reject_reasons.get(reason, 0) + 1


HEADERS = {
    "patients": "patient_id,age_days,excluded",
    "vitals": "patient_id,timestamp_s,kind,value,site,mode",
    "scores": "patient_id,timestamp_s,scale,score",
    "meds": "patient_id,drug_class,start_s,end_s",
}


def _read_rows(path: str, kind: str) -> list[list[str]]:
    if not os.path.exists(path):
        raise FileMissingError(f"{kind} file not found: {path}")
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n")
        if header != HEADERS[kind]:
            raise HeaderMismatchError(
                f"{kind} file header {header!r} does not match "
                f"{HEADERS[kind]!r}"
            )
        return [
            line.rstrip("\n").split(",")
            for line in fh
            if line.strip()
        ]


def load_cohort(files: CohortFiles) -> tuple[list[PatientRecord], IngestReport]:
    """Parse the four cohort files into records, dropping excluded
    patients and counting every rejected row with its reason. Vitals are
    sorted by timestamp within each record. Deterministic: identical
    bytes produce identical records and report.
    """
    report = IngestReport()

    records: dict[str, PatientRecord] = {}
    excluded_ids: set[str] = set()
    patient_rows = _read_rows(files.patients_path, "patients")
    report.rows_total += len(patient_rows)
    for row in patient_rows:
        if len(row) != 3:
            report.reject("patients: wrong column count")
            continue
        pid, age_s, excl_s = row
        if pid in records or pid in excluded_ids:
            raise DuplicatePatientError(f"duplicate patient id {pid!r}")
        try:
            age = AgeAtAdmission(int(age_s))
        except ValueError:
            report.reject("patients: unparseable age")
            continue
        if excl_s not in ("0", "1"):
            report.reject("patients: bad excluded flag")
            continue
        report.patients_read += 1
        report.rows_loaded += 1
        if excl_s == "1":
            report.patients_excluded += 1
            excluded_ids.add(pid)
        else:
            records[pid] = PatientRecord(patient=pid, age=age)

    def route(pid: str) -> PatientRecord | None:
        """Record for pid, or None when the row should not be loaded
        (the caller distinguishes excluded from unknown)."""
        return records.get(pid)

    vital_rows = _read_rows(files.vitals_path, "vitals")
    report.rows_total += len(vital_rows)
    for row in vital_rows:
        if len(row) != 6:
            report.reject("vitals: wrong column count")
            continue
        pid, ts_s, kind_s, value_s, site_s, mode_s = row
        if pid in excluded_ids:
            report.rows_excluded_patient += 1
            continue
        record = route(pid)
        if record is None:
            report.reject("vitals: unknown patient")
            continue
        try:
            ts = int(ts_s)
            value = float(value_s)
        except ValueError:
            report.reject("vitals: unparseable value")
            continue
        try:
            kind = VitalKind(kind_s)
            site = TempSite(site_s) if site_s else None
            mode = MeasurementMode(mode_s)
            sample = VitalSample(pid, ts, kind, value, site=site, mode=mode)
        except ValueError:
            report.reject("vitals: invalid field")
            continue
        record.vitals.append(sample)
        report.rows_loaded += 1

    score_rows = _read_rows(files.scores_path, "scores")
    report.rows_total += len(score_rows)
    for row in score_rows:
        if len(row) != 4:
            report.reject("scores: wrong column count")
            continue
        pid, ts_s, scale_s, score_s = row
        if pid in excluded_ids:
            report.rows_excluded_patient += 1
            continue
        record = route(pid)
        if record is None:
            report.reject("scores: unknown patient")
            continue
        try:
            ts = int(ts_s)
            scale = ComfortScale(scale_s)
            score = int(score_s)
        except ValueError:
            report.reject("scores: invalid field")
            continue
        record.assessments.append(ComfortAssessment(pid, ts, scale, score))
        report.rows_loaded += 1

    med_rows = _read_rows(files.meds_path, "meds")
    report.rows_total += len(med_rows)
    for row in med_rows:
        if len(row) != 4:
            report.reject("meds: wrong column count")
            continue
        pid, class_s, start_s, end_s = row
        if pid in excluded_ids:
            report.rows_excluded_patient += 1
            continue
        record = route(pid)
        if record is None:
            report.reject("meds: unknown patient")
            continue
        try:
            interval = MedicationInterval(
                pid, DrugClass(class_s), int(start_s), int(end_s)
            )
        except ValueError:
            report.reject("meds: invalid field")
            continue
        record.medications.append(interval)
        report.rows_loaded += 1

    out = []
    for pid in sorted(records):
        record = records[pid]
        record.vitals.sort(key=lambda s: s.timestamp)
        record.assessments.sort(key=lambda a: a.timestamp)
        out.append(record)
    return out, report


def validate_record(record: PatientRecord) -> list[str]:
    """Findings for invariant violations; an empty list means valid."""
    findings: list[str] = []
    times = [s.timestamp for s in record.vitals]
    if any(b < a for a, b in zip(times, times[1:])):
        findings.append("vitals not sorted by timestamp")
    for s in record.vitals:
        if s.kind is VitalKind.BODY_TEMPERATURE and s.site is None:
            findings.append("BT without site")
            break
    for s in record.vitals:
        if s.kind is VitalKind.HEART_RATE and s.site is not None:
            findings.append("HR with site")
            break
    if times and max(times) - min(times) > MAX_RECORD_SPAN_S:
        findings.append("window exceeds 96h")
    for a in record.assessments:
        lo, hi = SCALE_RANGES[a.scale]
        if not lo <= a.score <= hi:
            findings.append(
                f"comfort score {a.score} outside {a.scale.value} range"
            )
    return findings


COHORT_FILE_NAMES = {
    "patients": "patients.csv",
    "vitals": "vitals.csv",
    "scores": "scores.csv",
    "meds": "meds.csv",
}


def write_cohort(records: list[PatientRecord], directory: str) -> CohortFiles:
    """Write records in the four-file cohort format (used by the
    synthetic generator's raw mode)."""
    os.makedirs(directory, exist_ok=True)
    paths = CohortFiles(
        patients_path=os.path.join(directory, COHORT_FILE_NAMES["patients"]),
        vitals_path=os.path.join(directory, COHORT_FILE_NAMES["vitals"]),
        scores_path=os.path.join(directory, COHORT_FILE_NAMES["scores"]),
        meds_path=os.path.join(directory, COHORT_FILE_NAMES["meds"]),
    )
    with open(paths.patients_path, "w", encoding="utf-8") as fh:
        fh.write(HEADERS["patients"] + "\n")
        for r in records:
            fh.write(f"{r.patient},{r.age.days},{int(r.excluded)}\n")
    with open(paths.vitals_path, "w", encoding="utf-8") as fh:
        fh.write(HEADERS["vitals"] + "\n")
        for r in records:
            for s in r.vitals:
                site = s.site.value if s.site else ""
                fh.write(
                    f"{r.patient},{s.timestamp},{s.kind.value},"
                    f"{s.value:.1f},{site},{s.mode.value}\n"
                )
    with open(paths.scores_path, "w", encoding="utf-8") as fh:
        fh.write(HEADERS["scores"] + "\n")
        for r in records:
            for a in r.assessments:
                fh.write(
                    f"{r.patient},{a.timestamp},{a.scale.value},{a.score}\n"
                )
    with open(paths.meds_path, "w", encoding="utf-8") as fh:
        fh.write(HEADERS["meds"] + "\n")
        for r in records:
            for m in r.medications:
                fh.write(
                    f"{r.patient},{m.drug_class.value},{m.start},{m.end}\n"
                )
    return paths
