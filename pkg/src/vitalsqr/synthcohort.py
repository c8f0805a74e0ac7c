"""Seeded synthetic cohorts with a known heart-rate law.

The generator stands in for private bedside data: pairs are drawn cell
by cell from the reference bucket-by-age-group observation counts,
ages uniformly inside each group, temperatures on the 0.1-degree grid
inside each bucket. Heart rate follows a median curve anchored inside
the PALS reference bands (rising to a peak inside the first month, then
decaying smoothly from 150 bpm at one month toward 75 bpm at 18 years)
plus a linear temperature effect and Gaussian noise, so every
conditional quantile has a closed form for oracle checks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import norm

from .domain import (
    DAYS_PER_MONTH,
    DAYS_PER_YEAR,
    AgeAtAdmission,
    AgeGroup,
    ComfortAssessment,
    ComfortScale,
    DrugClass,
    MeasurementMode,
    MedicationInterval,
    ObservationPair,
    PatientRecord,
    TempSite,
    VitalKind,
    VitalSample,
    bucket_of,
)

# Observation counts per (bucket, age group) that the sampler reproduces
# proportionally; buckets 33..40 by rows, groups by columns.
BUCKET_GROUP_COUNTS: dict[int, dict[AgeGroup, int]] = {
    33: {AgeGroup.NEWBORN: 2, AgeGroup.INFANT: 2, AgeGroup.TODDLER: 0,
         AgeGroup.CHILD: 1, AgeGroup.TEENAGER: 1},
    34: {AgeGroup.NEWBORN: 8, AgeGroup.INFANT: 3, AgeGroup.TODDLER: 0,
         AgeGroup.CHILD: 4, AgeGroup.TEENAGER: 2},
    35: {AgeGroup.NEWBORN: 10, AgeGroup.INFANT: 15, AgeGroup.TODDLER: 3,
         AgeGroup.CHILD: 18, AgeGroup.TEENAGER: 13},
    36: {AgeGroup.NEWBORN: 110, AgeGroup.INFANT: 335, AgeGroup.TODDLER: 139,
         AgeGroup.CHILD: 640, AgeGroup.TEENAGER: 391},
    37: {AgeGroup.NEWBORN: 136, AgeGroup.INFANT: 442, AgeGroup.TODDLER: 201,
         AgeGroup.CHILD: 752, AgeGroup.TEENAGER: 420},
    38: {AgeGroup.NEWBORN: 48, AgeGroup.INFANT: 168, AgeGroup.TODDLER: 53,
         AgeGroup.CHILD: 243, AgeGroup.TEENAGER: 117},
    39: {AgeGroup.NEWBORN: 5, AgeGroup.INFANT: 28, AgeGroup.TODDLER: 13,
         AgeGroup.CHILD: 78, AgeGroup.TEENAGER: 28},
    40: {AgeGroup.NEWBORN: 0, AgeGroup.INFANT: 3, AgeGroup.TODDLER: 2,
         AgeGroup.CHILD: 21, AgeGroup.TEENAGER: 7},
}

TOTAL_REFERENCE_PAIRS = 4462

# Age-group boundaries in days (open/closed per the admission-age rules).
GROUP_DAY_RANGES: dict[AgeGroup, tuple[float, float]] = {
    AgeGroup.NEWBORN: (0.0, 28.0),
    AgeGroup.INFANT: (28.0, DAYS_PER_YEAR),
    AgeGroup.TODDLER: (DAYS_PER_YEAR, 2 * DAYS_PER_YEAR),
    AgeGroup.CHILD: (2 * DAYS_PER_YEAR, 12 * DAYS_PER_YEAR),
    AgeGroup.TEENAGER: (12 * DAYS_PER_YEAR, 18 * DAYS_PER_YEAR),
}

_PEAK_MONTHS = 0.75
_PEAK_BPM = 155.0
_BIRTH_BPM = 145.0
_ONE_MONTH_BPM = 150.0
_FLOOR_BPM = 72.0
_DECAY_RATE = math.log((_ONE_MONTH_BPM - _FLOOR_BPM) / (75.0 - _FLOOR_BPM)) / 215.0


def median_curve(age_months) -> np.ndarray:
    """Median heart rate (bpm) at reference temperature 37 C.

    Rises from 145 bpm at birth to a 155 bpm peak at ~3 weeks, then
    decays exponentially from 150 bpm at one month to exactly 75 bpm at
    216 months; non-increasing everywhere past one month.
    """
    m = np.asarray(age_months, dtype=np.float64)
    rise = _PEAK_BPM - (_PEAK_BPM - _BIRTH_BPM) / _PEAK_MONTHS**2 * (m - _PEAK_MONTHS) ** 2
    fall = _PEAK_BPM - (_PEAK_BPM - _ONE_MONTH_BPM) / (1.0 - _PEAK_MONTHS) ** 2 * (
        m - _PEAK_MONTHS
    ) ** 2
    decay = _FLOOR_BPM + (_ONE_MONTH_BPM - _FLOOR_BPM) * np.exp(
        -_DECAY_RATE * (m - 1.0)
    )
    out = np.where(m <= _PEAK_MONTHS, rise, np.where(m <= 1.0, fall, decay))
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class SynthConfig:
    n_pairs: int = TOTAL_REFERENCE_PAIRS
    seed: int = 1
    bt_slope_bpm_per_c: float = 10.0
    noise_sd_bpm: float = 12.0
    heteroscedastic: bool = False
    raw_mode: bool = False

    def __post_init__(self) -> None:
        if self.n_pairs <= 0:
            raise ValueError("n_pairs must be > 0")
        if self.noise_sd_bpm <= 0:
            raise ValueError("noise_sd_bpm must be > 0")


@dataclass(frozen=True)
class GroundTruth:
    slope_bpm_per_c: float
    noise_sd_bpm: float
    heteroscedastic: bool

    def median_hr(self, age_months) -> np.ndarray:
        return median_curve(age_months)

    def noise_sd(self, age_months):
        if self.heteroscedastic:
            return self.noise_sd_bpm * median_curve(age_months) / 120.0
        if np.ndim(age_months) == 0:
            return self.noise_sd_bpm
        return np.full(np.shape(age_months), self.noise_sd_bpm)


def oracle_quantile(gt: GroundTruth, age_months, bt_celsius, tau: float):
    """Exact conditional tau-quantile of the synthetic law (pre-clamping)."""
    if not 0.0 < tau < 1.0:
        raise ValueError(f"tau must be in (0, 1), got {tau}")
    med = gt.median_hr(age_months) + gt.slope_bpm_per_c * (
        np.asarray(bt_celsius, dtype=np.float64) - 37.0
    )
    z = float(norm.ppf(tau))
    return med + gt.noise_sd(age_months) * z


def _cells() -> list[tuple[int, AgeGroup, int]]:
    out = []
    for bucket in sorted(BUCKET_GROUP_COUNTS):
        for group in AgeGroup:
            out.append((bucket, group, BUCKET_GROUP_COUNTS[bucket][group]))
    return out


def _sample_age_months(rng: np.random.Generator, group: AgeGroup, size: int):
    lo, hi = GROUP_DAY_RANGES[group]
    days = rng.uniform(lo + 1e-3, hi - 1e-3, size=size)
    return days / DAYS_PER_MONTH


def _sample_bt(rng: np.random.Generator, bucket: int, size: int) -> np.ndarray:
    # One-decimal grid inside the bucket, matching the pairs-file precision.
    return bucket + rng.integers(0, 10, size=size) / 10.0


def generate(config: SynthConfig):
    """Generate the synthetic cohort.

    Returns (pairs, ground_truth) by default, or (records, ground_truth)
    in raw mode, where records are unprocessed PatientRecord streams for
    exercising the preprocessing pipeline end to end.
    """
    gt = GroundTruth(
        slope_bpm_per_c=config.bt_slope_bpm_per_c,
        noise_sd_bpm=config.noise_sd_bpm,
        heteroscedastic=config.heteroscedastic,
    )
    if config.raw_mode:
        return _generate_raw(config, gt), gt
    return _generate_pairs(config, gt), gt


def _generate_pairs(config: SynthConfig, gt: GroundTruth) -> list[ObservationPair]:
    cells = _cells()
    weights = np.asarray([c[2] for c in cells], dtype=np.float64)
    probs = weights / weights.sum()
    root = np.random.SeedSequence(config.seed)
    children = root.spawn(len(cells) + 1)
    counts = np.random.default_rng(children[0]).multinomial(config.n_pairs, probs)

    pairs: list[ObservationPair] = []
    serial = 0
    for (bucket, group, _), count, child in zip(cells, counts, children[1:]):
        if count == 0:
            continue
        rng = np.random.default_rng(child)
        ages = _sample_age_months(rng, group, count)
        bts = _sample_bt(rng, bucket, count)
        noise = rng.standard_normal(count)
        hrs = (
            gt.median_hr(ages)
            + gt.slope_bpm_per_c * (bts - 37.0)
            + gt.noise_sd(ages) * noise
        )
        hrs = np.clip(hrs, 30.0, 240.0)
        for age, bt, hr in zip(ages, bts, hrs):
            serial += 1
            pairs.append(
                ObservationPair(
                    patient=f"S{serial:06d}",
                    age_months=float(age),
                    bt_celsius=float(bt),
                    hr_bpm=float(hr),
                    bucket=bucket_of(float(bt)),
                    timestamp=serial * 60,
                )
            )
    return pairs


def _generate_raw(config: SynthConfig, gt: GroundTruth) -> list[PatientRecord]:
    """Unprocessed per-patient streams: HR bursts at 5-second cadence
    around each temperature reading, manual BT every 2-4 hours, sprinkled
    comfort scores, occasional medication windows, agitation episodes,
    axillary sites, and excluded patients, so every pipeline rule fires.
    """
    cells = _cells()
    weights = np.asarray([c[2] for c in cells], dtype=np.float64)
    probs = weights / weights.sum()
    rng = np.random.default_rng(np.random.SeedSequence(config.seed).spawn(1)[0])

    records: list[PatientRecord] = []
    cell_idx = rng.choice(len(cells), size=config.n_pairs, p=probs)
    for i in range(config.n_pairs):
        bucket, group, _ = cells[cell_idx[i]]
        pid = f"R{i + 1:06d}"
        lo, hi = GROUP_DAY_RANGES[group]
        age_days = int(rng.integers(int(lo) + 1, max(int(hi) - 1, int(lo) + 2)))
        if group is AgeGroup.NEWBORN:
            age_days = int(rng.integers(0, 29))
        age = AgeAtAdmission(age_days)
        age_months = age.months

        excluded = bool(rng.random() < 0.03)
        record = PatientRecord(patient=pid, age=age, excluded=excluded)

        n_readings = int(rng.integers(3, 6))
        t = int(rng.integers(1800, 7200))
        vitals: list[VitalSample] = []
        assessments: list[ComfortAssessment] = []
        medications: list[MedicationInterval] = []

        gate_reading = int(rng.integers(0, n_readings)) if rng.random() < 0.08 else -1
        med_reading = int(rng.integers(0, n_readings)) if rng.random() < 0.08 else -1

        for r in range(n_readings):
            bt_true = float(bucket + rng.integers(0, 10) / 10.0)
            axillary = rng.random() < 0.10
            site = TempSite.AXILLARY if axillary else TempSite.RECTAL
            bt_recorded = round(bt_true - 0.5, 1) if axillary else bt_true
            vitals.append(
                VitalSample(pid, t, VitalKind.BODY_TEMPERATURE, bt_recorded,
                            site=site, mode=MeasurementMode.MANUAL)
            )
            level_noise = float(rng.standard_normal()) * float(gt.noise_sd(age_months))
            base_hr = float(gt.median_hr(age_months)) + gt.slope_bpm_per_c * (
                bt_true - 37.0
            ) + level_noise
            for ts in range(t - 360, t + 361, 5):
                if ts < 0:
                    continue
                jitter = float(rng.uniform(-1.5, 1.5))
                hr = min(max(base_hr + jitter, 20.0), 250.0)
                vitals.append(
                    VitalSample(pid, ts, VitalKind.HEART_RATE, round(hr, 1))
                )
            if r == gate_reading:
                assessments.append(
                    ComfortAssessment(pid, t + int(rng.integers(10, 90)),
                                      ComfortScale.RASS, 3)
                )
            elif rng.random() < 0.7:
                assessments.append(
                    ComfortAssessment(pid, t + int(rng.integers(10, 90)),
                                      ComfortScale.RASS, int(rng.integers(-3, 1)))
                )
            if r == med_reading:
                drug = (DrugClass.SLOWS_HR, DrugClass.RAISES_HR,
                        DrugClass.DEXMEDETOMIDINE)[int(rng.integers(0, 3))]
                # Window covers the reading but leaves the early part of
                # its pairing window unmedicated, so the dropped pair is
                # attributable to the medication rule.
                medications.append(
                    MedicationInterval(pid, drug, t - 150,
                                       t + int(rng.integers(120, 900)))
                )
            t += int(rng.integers(2 * 3600, 4 * 3600))

        vitals.sort(key=lambda s: s.timestamp)
        record.vitals = vitals
        record.assessments = assessments
        record.medications = medications
        records.append(record)
    return records
