"""The eight-rule preprocessing pipeline, from patient records to
deduplicated observation pairs with a full audit trail.

Per patient: heart-rate samples inside a medication window are dropped
before aggregation (a medicated minute must not contaminate a median),
temperatures are normalized (axillary +0.5 C) and quantized to the
pairs-file precision of 0.1 C, minute medians are computed, and each
temperature reading is paired with the median of the minute medians
inside its closed +/-5-minute window. Temperature readings inside a
medication window are carried through pairing so the pair they lose is
counted, then removed; movement gating, the temperature-range filter,
the 30-240 bpm bounds, and the one-pair-per-patient-per-bucket
deduplication follow, in that order.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass, field

from .domain import (
    MAX_RECORD_SPAN_S,
    SCALE_RANGES,
    AgeGroup,
    ComfortAssessment,
    ComfortScale,
    MedicationInterval,
    ObservationPair,
    PatientRecord,
    TempSite,
    VitalKind,
    VitalSample,
    age_group,
    bucket_of,
)

CALM_RULES = {
    ComfortScale.CAPD: lambda s: s < 9,
    ComfortScale.COMFORT_B: lambda s: 11 <= s <= 17,
    ComfortScale.FLACC: lambda s: 0 <= s <= 3,
    ComfortScale.RFLACC: lambda s: 0 <= s <= 3,
    ComfortScale.VNS: lambda s: 0 <= s <= 3,
    ComfortScale.RASS: lambda s: -5 <= s <= 1,
}

PAIR_WINDOW_S = 300
BUCKETS = tuple(range(33, 41))
GROUP_ORDER = (
    AgeGroup.NEWBORN,
    AgeGroup.INFANT,
    AgeGroup.TODDLER,
    AgeGroup.CHILD,
    AgeGroup.TEENAGER,
)


class IllegalScoreError(ValueError):
    pass


@dataclass(frozen=True)
class MinuteMedianEntry:
    minute_start: int
    median_hr: float


@dataclass
class PipelineAudit:
    pairs_before: int = 0
    removed_movement: int = 0
    removed_medication: int = 0
    removed_hr_bounds: int = 0
    removed_bt_range: int = 0
    removed_dedupe: int = 0
    pairs_after: int = 0
    # counts of surviving pairs by (bucket floor, age group)
    matrix: dict[tuple[int, AgeGroup], int] = field(default_factory=dict)

    def removals(self) -> int:
        return (
            self.removed_movement
            + self.removed_medication
            + self.removed_hr_bounds
            + self.removed_bt_range
            + self.removed_dedupe
        )


@dataclass(frozen=True)
class RawPair:
    patient: str
    timestamp: int
    bt_celsius: float
    hr_bpm: float


def is_calm(a: ComfortAssessment) -> bool:
    """Calm/no-movement verdict per bedside scale thresholds."""
    lo, hi = SCALE_RANGES[a.scale]
    if not lo <= a.score <= hi:
        raise IllegalScoreError(
            f"{a.scale.value} score {a.score} outside legal range [{lo}, {hi}]"
        )
    return CALM_RULES[a.scale](a.score)


def normalize_bt(value: float, site: TempSite) -> float:
    """Axillary readings are raised by 0.5 C; other sites pass through."""
    if site is TempSite.AXILLARY:
        return value + 0.5
    return value


def in_medication_window(t: int, meds: list[MedicationInterval]) -> bool:
    """True when t falls inside any closed treatment interval."""
    return any(m.start <= t <= m.end for m in meds)


def minute_medians(hr_samples: list[VitalSample]) -> list[MinuteMedianEntry]:
    """Median heart rate per one-minute interval (floor-of-60 aligned).

    Samples must be HR and time-sorted; even-sized groups take the mean
    of the two central values; empty minutes emit nothing.
    """
    entries: list[MinuteMedianEntry] = []
    values: list[float] = []
    current: int | None = None
    for s in hr_samples:
        if s.kind is not VitalKind.HEART_RATE:
            raise ValueError("minute_medians expects HR samples only")
        minute = (s.timestamp // 60) * 60
        if current is None:
            current = minute
        elif minute != current:
            if minute < current:
                raise ValueError("minute_medians expects time-sorted samples")
            entries.append(MinuteMedianEntry(current, _median(values)))
            values = []
            current = minute
        values.append(s.value)
    if current is not None:
        entries.append(MinuteMedianEntry(current, _median(values)))
    return entries


def _median(values: list[float]) -> float:
    ordered = sorted(values)
    n = len(ordered)
    mid = n // 2
    if n % 2 == 1:
        return ordered[mid]
    return (ordered[mid - 1] + ordered[mid]) / 2.0


def pair_hr_bt(
    minutes: list[MinuteMedianEntry],
    bt_events: list[tuple[int, float]],
    patient: str = "",
) -> list[RawPair]:
    """Pair each temperature reading with the median of the minute
    medians inside its closed [T-300, T+300] window; readings with an
    empty window produce no pair.
    """
    pairs: list[RawPair] = []
    starts = [m.minute_start for m in minutes]
    for ts, bt in bt_events:
        lo = bisect.bisect_left(starts, ts - PAIR_WINDOW_S)
        hi = bisect.bisect_right(starts, ts + PAIR_WINDOW_S)
        if hi <= lo:
            continue
        hr = _median([m.median_hr for m in minutes[lo:hi]])
        pairs.append(RawPair(patient, ts, bt, hr))
    return pairs


def nearest_bt_timestamp(t: int, bt_timestamps: list[int]) -> int | None:
    """Closest reading time to t; ties go to the earlier reading."""
    if not bt_timestamps:
        return None
    best = None
    best_dist = None
    for ts in bt_timestamps:
        d = abs(ts - t)
        if best_dist is None or d < best_dist:
            best, best_dist = ts, d
    return best


def gate_movement(
    pairs: list[RawPair],
    assessments: list[ComfortAssessment],
    bt_timestamps: list[int],
) -> tuple[list[RawPair], int]:
    """Drop pairs whose associated comfort scores indicate movement.

    Each assessment attaches to its nearest temperature reading; a pair
    is dropped iff any attached assessment fails the calm rule. Pairs
    with no attached assessment are kept.
    """
    agitated_ts: set[int] = set()
    for a in assessments:
        ts = nearest_bt_timestamp(a.timestamp, bt_timestamps)
        if ts is not None and not is_calm(a):
            agitated_ts.add(ts)
    kept = [p for p in pairs if p.timestamp not in agitated_ts]
    return kept, len(pairs) - len(kept)


def filter_hr_bounds(pairs: list[RawPair]) -> tuple[list[RawPair], int]:
    """Keep pairs with 30 <= hr <= 240 (bounds inclusive)."""
    kept = [p for p in pairs if 30.0 <= p.hr_bpm <= 240.0]
    return kept, len(pairs) - len(kept)


def dedupe_per_patient_bucket(
    pairs: list[ObservationPair],
) -> tuple[list[ObservationPair], int]:
    """One pair per (patient, bucket): the chronologically earliest
    survives; timestamp ties break toward lower hr, then lower bt.
    """
    best: dict[tuple[str, int], ObservationPair] = {}
    order: list[tuple[str, int]] = []
    for p in pairs:
        key = (p.patient, p.bucket.floor_celsius)
        cur = best.get(key)
        if cur is None:
            best[key] = p
            order.append(key)
        elif (p.timestamp, p.hr_bpm, p.bt_celsius) < (
            cur.timestamp,
            cur.hr_bpm,
            cur.bt_celsius,
        ):
            best[key] = p
    kept = [best[key] for key in order]
    return kept, len(pairs) - len(kept)


def _process_patient(record: PatientRecord) -> tuple[list[RawPair], dict]:
    """Candidate pairs for one patient plus per-patient removal counts
    for the medication rule and movement gating.
    """
    meds = record.medications
    hr_clean = [
        s
        for s in record.vitals
        if s.kind is VitalKind.HEART_RATE
        and not in_medication_window(s.timestamp, meds)
    ]
    bt_all: list[tuple[int, float, bool]] = []
    for s in record.vitals:
        if s.kind is not VitalKind.BODY_TEMPERATURE:
            continue
        value = round(normalize_bt(s.value, s.site), 1)
        medicated = in_medication_window(s.timestamp, meds)
        bt_all.append((s.timestamp, value, medicated))

    minutes = minute_medians(hr_clean)
    candidates = pair_hr_bt(
        minutes, [(ts, v) for ts, v, _ in bt_all], record.patient
    )
    medicated_ts = {ts for ts, _, medicated in bt_all if medicated}
    pairs = [p for p in candidates if p.timestamp not in medicated_ts]
    removed_medication = len(candidates) - len(pairs)

    clean_bt_ts = [ts for ts, _, medicated in bt_all if not medicated]
    pairs, removed_movement = gate_movement(
        pairs, record.assessments, clean_bt_ts
    )
    return pairs, {
        "pairs_before": len(candidates),
        "removed_medication": removed_medication,
        "removed_movement": removed_movement,
    }


def run_pipeline(
    records: list[PatientRecord],
) -> tuple[list[ObservationPair], PipelineAudit]:
    """Run the full pipeline over a cohort; deterministic and insensitive
    to the ordering of the input records.
    """
    audit = PipelineAudit()
    survivors: list[ObservationPair] = []
    for record in sorted(records, key=lambda r: r.patient):
        if record.excluded:
            continue
        pairs, counts = _process_patient(record)
        audit.pairs_before += counts["pairs_before"]
        audit.removed_medication += counts["removed_medication"]
        audit.removed_movement += counts["removed_movement"]
        months = record.age.months
        for p in pairs:
            bucket = bucket_of(p.bt_celsius)
            if bucket is None:
                audit.removed_bt_range += 1
                continue
            if not 30.0 <= p.hr_bpm <= 240.0:
                audit.removed_hr_bounds += 1
                continue
            survivors.append(
                ObservationPair(
                    patient=p.patient,
                    age_months=months,
                    bt_celsius=p.bt_celsius,
                    hr_bpm=p.hr_bpm,
                    bucket=bucket,
                    timestamp=p.timestamp,
                )
            )
    survivors, removed_dedupe = dedupe_per_patient_bucket(survivors)
    audit.removed_dedupe = removed_dedupe
    audit.pairs_after = len(survivors)

    ages = {r.patient: r.age for r in records}
    for p in survivors:
        group = age_group(ages[p.patient])
        key = (p.bucket.floor_celsius, group)
        audit.matrix[key] = audit.matrix.get(key, 0) + 1
    return survivors, audit


def render_audit(audit: PipelineAudit) -> str:
    """Text audit: the bucket-by-age-group table plus the counters block."""
    groups = [g.value for g in GROUP_ORDER]
    header = ["BT range (C)"] + groups + ["Total"]
    rows = [header]
    col_totals = [0] * (len(groups) + 1)
    for bucket in BUCKETS:
        row = [f"{bucket}-{bucket}.9"]
        total = 0
        for j, group in enumerate(GROUP_ORDER):
            count = audit.matrix.get((bucket, group), 0)
            total += count
            col_totals[j] += count
            row.append(str(count))
        row.append(str(total))
        col_totals[-1] += total
        rows.append(row)
    rows.append(["Total"] + [str(v) for v in col_totals])

    widths = [max(len(r[i]) for r in rows) for i in range(len(header))]
    lines = [
        "  ".join(cell.rjust(widths[i]) for i, cell in enumerate(row))
        for row in rows
    ]
    counters = [
        f"{name.ljust(19)}{value}"
        for name, value in [
            ("pairs_before", audit.pairs_before),
            ("removed_movement", audit.removed_movement),
            ("removed_medication", audit.removed_medication),
            ("removed_hr_bounds", audit.removed_hr_bounds),
            ("removed_bt_range", audit.removed_bt_range),
            ("removed_dedupe", audit.removed_dedupe),
            ("pairs_after", audit.pairs_after),
        ]
    ]
    return "\n".join(lines) + "\n\n" + "\n".join(counters) + "\n"


PAIRS_HEADER = "patient_id,age_months,bt_celsius,hr_bpm,bucket,timestamp_s"


def write_pairs(pairs: list[ObservationPair], path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(PAIRS_HEADER + "\n")
        for p in pairs:
            fh.write(
                f"{p.patient},{p.age_months:.6f},{p.bt_celsius:.1f},"
                f"{p.hr_bpm:.1f},{p.bucket.floor_celsius},{p.timestamp}\n"
            )


def read_pairs(path: str) -> list[ObservationPair]:
    pairs: list[ObservationPair] = []
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n")
        if header != PAIRS_HEADER:
            raise ValueError(
                f"unexpected pairs header {header!r}; expected {PAIRS_HEADER!r}"
            )
        for lineno, line in enumerate(fh, start=2):
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != 6:
                raise ValueError(f"line {lineno}: expected 6 columns")
            bucket = bucket_of(float(parts[2]))
            if bucket is None or bucket.floor_celsius != int(parts[4]):
                raise ValueError(
                    f"line {lineno}: bucket column disagrees with bt value"
                )
            pairs.append(
                ObservationPair(
                    patient=parts[0],
                    age_months=float(parts[1]),
                    bt_celsius=float(parts[2]),
                    hr_bpm=float(parts[3]),
                    bucket=bucket,
                    timestamp=int(parts[5]),
                )
            )
    return pairs
