"""Core value types shared by the pipeline, models, and service.

Ages are stored in integer days and converted to months through the mean
Gregorian month (30.4375 days), so one year is exactly 12 months and group
boundaries stay consistent between the day-based and month-based views.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

DAYS_PER_MONTH = 30.4375
DAYS_PER_YEAR = 365.25

HR_MIN_BPM = 30.0
HR_MAX_BPM = 240.0
BT_BUCKET_MIN = 33
BT_BUCKET_MAX = 40

MAX_RECORD_SPAN_S = 96 * 3600


class OutOfPopulationError(ValueError):
    """Age beyond the 0-18 year population this artifact covers."""


class AgeGroup(enum.Enum):
    NEWBORN = "Newborn"
    INFANT = "Infant"
    TODDLER = "Toddler"
    CHILD = "Child"
    TEENAGER = "Teenager"


class VitalKind(enum.Enum):
    HEART_RATE = "HR"
    BODY_TEMPERATURE = "BT"


class TempSite(enum.Enum):
    RECTAL = "RECTAL"
    ESOPHAGEAL = "ESOPHAGEAL"
    AXILLARY = "AXILLARY"
    ORAL = "ORAL"


class MeasurementMode(enum.Enum):
    CONTINUOUS = "CONT"
    MANUAL = "MANUAL"


class ComfortScale(enum.Enum):
    CAPD = "CAPD"
    COMFORT_B = "COMFORTB"
    FLACC = "FLACC"
    RFLACC = "RFLACC"
    VNS = "VNS"
    RASS = "RASS"


# Legal score range per bedside scale, inclusive.
SCALE_RANGES: dict[ComfortScale, tuple[int, int]] = {
    ComfortScale.CAPD: (0, 32),
    ComfortScale.COMFORT_B: (6, 30),
    ComfortScale.FLACC: (0, 10),
    ComfortScale.RFLACC: (0, 10),
    ComfortScale.VNS: (0, 10),
    ComfortScale.RASS: (-5, 4),
}


class DrugClass(enum.Enum):
    SLOWS_HR = "SLOWS_HR"
    RAISES_HR = "RAISES_HR"
    DEXMEDETOMIDINE = "DEXMEDETOMIDINE"


@dataclass(frozen=True)
class AgeAtAdmission:
    """Age in whole days at PICU admission; months are always derived."""

    days: int

    def __post_init__(self) -> None:
        if self.days < 0:
            raise ValueError(f"age days must be >= 0, got {self.days}")

    @property
    def months(self) -> float:
        return self.days / DAYS_PER_MONTH


@dataclass(frozen=True)
class TemperatureBucket:
    """One 1-degree-wide temperature group, [floor, floor + 1)."""

    floor_celsius: int

    def __post_init__(self) -> None:
        if not BT_BUCKET_MIN <= self.floor_celsius <= BT_BUCKET_MAX:
            raise ValueError(
                f"bucket floor must be in [{BT_BUCKET_MIN}, {BT_BUCKET_MAX}], "
                f"got {self.floor_celsius}"
            )

    @property
    def label(self) -> str:
        return f"{self.floor_celsius}-{self.floor_celsius}.9"


@dataclass(frozen=True)
class VitalSample:
    patient: str
    timestamp: int
    kind: VitalKind
    value: float
    site: TempSite | None = None
    mode: MeasurementMode = MeasurementMode.CONTINUOUS

    def __post_init__(self) -> None:
        # Site pairing (HR never, BT always) is checked by
        # ingest.validate_record so malformed records can be reported as
        # findings instead of being unconstructible.
        if not math.isfinite(self.value):
            raise ValueError("vital sample value must be finite")


@dataclass(frozen=True)
class ComfortAssessment:
    patient: str
    timestamp: int
    scale: ComfortScale
    score: int


@dataclass(frozen=True)
class MedicationInterval:
    patient: str
    drug_class: DrugClass
    start: int
    end: int

    def __post_init__(self) -> None:
        if self.start > self.end:
            raise ValueError("medication interval start must not exceed end")


@dataclass
class PatientRecord:
    patient: str
    age: AgeAtAdmission
    excluded: bool = False
    vitals: list[VitalSample] = field(default_factory=list)
    assessments: list[ComfortAssessment] = field(default_factory=list)
    medications: list[MedicationInterval] = field(default_factory=list)


@dataclass(frozen=True)
class ObservationPair:
    """One (age, BT, HR-median) training point; the pipeline's output unit."""

    patient: str
    age_months: float
    bt_celsius: float
    hr_bpm: float
    bucket: TemperatureBucket
    timestamp: int

    def __post_init__(self) -> None:
        if self.age_months < 0:
            raise ValueError("age_months must be >= 0")
        if not HR_MIN_BPM <= self.hr_bpm <= HR_MAX_BPM:
            raise ValueError(
                f"hr_bpm {self.hr_bpm} outside [{HR_MIN_BPM}, {HR_MAX_BPM}]"
            )
        expected = bucket_of(self.bt_celsius)
        if expected is None or expected != self.bucket:
            raise ValueError(
                f"bucket {self.bucket.floor_celsius} inconsistent with "
                f"bt {self.bt_celsius}"
            )


def age_group(age: AgeAtAdmission) -> AgeGroup:
    """Classify an admission age into the five pediatric groups.

    Groups partition [0 days, 18 years]: newborn (0-28 days), infant
    (29 days to <1 year), toddler [1, 2) years, child [2, 12) years,
    teenager [12, 18] years. Older ages raise OutOfPopulationError.
    """
    days = age.days
    if days > 18 * DAYS_PER_YEAR:
        raise OutOfPopulationError(f"{days} days exceeds the 18-year population")
    if days <= 28:
        return AgeGroup.NEWBORN
    if days < DAYS_PER_YEAR:
        return AgeGroup.INFANT
    if days < 2 * DAYS_PER_YEAR:
        return AgeGroup.TODDLER
    if days < 12 * DAYS_PER_YEAR:
        return AgeGroup.CHILD
    return AgeGroup.TEENAGER


def age_group_from_months(age_months: float) -> AgeGroup:
    """Group for a continuous age in months (same boundaries as age_group)."""
    days = age_months * DAYS_PER_MONTH
    if days > 18 * DAYS_PER_YEAR:
        raise OutOfPopulationError(
            f"{age_months} months exceeds the 18-year population"
        )
    if days < 0:
        raise ValueError("age must be >= 0")
    if days <= 28:
        return AgeGroup.NEWBORN
    if days < DAYS_PER_YEAR:
        return AgeGroup.INFANT
    if days < 2 * DAYS_PER_YEAR:
        return AgeGroup.TODDLER
    if days < 12 * DAYS_PER_YEAR:
        return AgeGroup.CHILD
    return AgeGroup.TEENAGER


def bucket_of(bt_celsius: float) -> TemperatureBucket | None:
    """Temperature bucket containing bt, or None outside [33, 41)."""
    if not math.isfinite(bt_celsius):
        return None
    if not BT_BUCKET_MIN <= bt_celsius < BT_BUCKET_MAX + 1:
        return None
    return TemperatureBucket(int(math.floor(bt_celsius)))
