import random

import pytest
from hypothesis import given, settings, strategies as st

from vitalsqr.domain import (
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
    TemperatureBucket,
    VitalKind,
    VitalSample,
)
from vitalsqr.ingest import CohortFiles, load_cohort
from vitalsqr.preprocess import (
    IllegalScoreError,
    MinuteMedianEntry,
    RawPair,
    dedupe_per_patient_bucket,
    filter_hr_bounds,
    gate_movement,
    in_medication_window,
    is_calm,
    minute_medians,
    normalize_bt,
    pair_hr_bt,
    render_audit,
    run_pipeline,
)


class TestIsCalm:
    @pytest.mark.parametrize(
        "scale,score,expected",
        [
            (ComfortScale.CAPD, 8, True),
            (ComfortScale.CAPD, 9, False),
            (ComfortScale.COMFORT_B, 10, False),
            (ComfortScale.COMFORT_B, 11, True),
            (ComfortScale.COMFORT_B, 17, True),
            (ComfortScale.COMFORT_B, 18, False),
            (ComfortScale.FLACC, 0, True),
            (ComfortScale.FLACC, 3, True),
            (ComfortScale.FLACC, 4, False),
            (ComfortScale.RFLACC, 3, True),
            (ComfortScale.RFLACC, 4, False),
            (ComfortScale.VNS, 3, True),
            (ComfortScale.VNS, 4, False),
            (ComfortScale.RASS, -5, True),
            (ComfortScale.RASS, 1, True),
            (ComfortScale.RASS, 2, False),
        ],
    )
    def test_thresholds(self, scale, score, expected):
        assert is_calm(ComfortAssessment("p", 0, scale, score)) is expected

    @pytest.mark.parametrize(
        "scale,score",
        [
            (ComfortScale.CAPD, 33),
            (ComfortScale.COMFORT_B, 5),
            (ComfortScale.RASS, 5),
            (ComfortScale.VNS, -1),
        ],
    )
    def test_illegal_scores(self, scale, score):
        with pytest.raises(IllegalScoreError):
            is_calm(ComfortAssessment("p", 0, scale, score))


class TestNormalizeBt:
    def test_axillary_raised(self):
        assert normalize_bt(36.5, TempSite.AXILLARY) == 37.0

    @pytest.mark.parametrize("site", [TempSite.RECTAL, TempSite.ESOPHAGEAL, TempSite.ORAL])
    def test_other_sites_unchanged(self, site):
        assert normalize_bt(38.0, site) == 38.0

    @given(st.floats(min_value=30, max_value=43))
    def test_order_preserving_and_exact_offset(self, value):
        assert normalize_bt(value, TempSite.AXILLARY) == value + 0.5
        assert normalize_bt(value, TempSite.RECTAL) == value


class TestMedicationWindow:
    INTERVAL = [MedicationInterval("p", DrugClass.SLOWS_HR, 50, 150)]

    @pytest.mark.parametrize(
        "t,expected", [(100, True), (50, True), (150, True), (151, False), (49, False)]
    )
    def test_closed_interval(self, t, expected):
        assert in_medication_window(t, self.INTERVAL) is expected

    def test_no_intervals(self):
        assert in_medication_window(100, []) is False


def _hr(t, v):
    return VitalSample("p", t, VitalKind.HEART_RATE, v)


class TestMinuteMedians:
    def test_odd_group(self):
        out = minute_medians([_hr(0, 80), _hr(30, 90), _hr(59, 100)])
        assert [(e.minute_start, e.median_hr) for e in out] == [(0, 90)]

    def test_even_group_mean_of_central(self):
        out = minute_medians([_hr(0, 80), _hr(30, 90)])
        assert [(e.minute_start, e.median_hr) for e in out] == [(0, 85)]

    def test_empty(self):
        assert minute_medians([]) == []

    def test_gap_minutes_emit_nothing(self):
        out = minute_medians([_hr(0, 80), _hr(200, 90)])
        assert [e.minute_start for e in out] == [0, 180]

    def test_rejects_bt_samples(self):
        bt = VitalSample("p", 0, VitalKind.BODY_TEMPERATURE, 37.0, site=TempSite.RECTAL)
        with pytest.raises(ValueError):
            minute_medians([bt])

    @given(
        st.lists(
            st.tuples(
                st.integers(min_value=0, max_value=590),
                st.floats(min_value=40, max_value=200),
            ),
            min_size=1,
            max_size=40,
        )
    )
    @settings(max_examples=50)
    def test_median_within_minute_extremes(self, raw):
        raw.sort(key=lambda r: r[0])
        samples = [_hr(t, v) for t, v in raw]
        for entry in minute_medians(samples):
            group = [v for t, v in raw if (t // 60) * 60 == entry.minute_start]
            assert min(group) <= entry.median_hr <= max(group)

    def test_invariant_under_equal_timestamp_permutation(self):
        samples = [_hr(10, 80), _hr(10, 120), _hr(10, 100)]
        a = minute_medians(samples)
        b = minute_medians([samples[2], samples[0], samples[1]])
        assert a == b


class TestPairHrBt:
    MINUTES = [
        MinuteMedianEntry(0, 100.0),
        MinuteMedianEntry(60, 110.0),
        MinuteMedianEntry(120, 120.0),
    ]

    def test_window_median(self):
        pairs = pair_hr_bt(self.MINUTES, [(60, 37.0)], "p")
        assert len(pairs) == 1
        assert pairs[0].hr_bpm == 110.0

    def test_empty_window_no_pair(self):
        assert pair_hr_bt([MinuteMedianEntry(0, 100.0)], [(1000, 37.0)], "p") == []

    def test_even_count_mean_of_central(self):
        minutes = [MinuteMedianEntry(0, 100.0), MinuteMedianEntry(60, 120.0)]
        pairs = pair_hr_bt(minutes, [(30, 37.0)], "p")
        assert pairs[0].hr_bpm == 110.0

    def test_window_closed_at_300s(self):
        minutes = [MinuteMedianEntry(300, 90.0)]
        assert pair_hr_bt(minutes, [(0, 37.0)], "p")[0].hr_bpm == 90.0
        assert pair_hr_bt(minutes, [(601, 37.0)], "p") == []


class TestGateMovement:
    def test_agitated_assessment_drops_pair(self):
        pairs = [RawPair("p", 0, 37.0, 100.0)]
        scores = [ComfortAssessment("p", 10, ComfortScale.RASS, 3)]
        kept, removed = gate_movement(pairs, scores, [0])
        assert kept == [] and removed == 1

    def test_calm_assessment_keeps_pair(self):
        pairs = [RawPair("p", 0, 37.0, 100.0)]
        scores = [ComfortAssessment("p", 10, ComfortScale.CAPD, 5)]
        kept, removed = gate_movement(pairs, scores, [0])
        assert kept == pairs and removed == 0

    def test_no_assessments_keeps_pair(self):
        pairs = [RawPair("p", 0, 37.0, 100.0)]
        kept, removed = gate_movement(pairs, [], [0])
        assert kept == pairs and removed == 0

    def test_assessment_attaches_to_nearest_bt_only(self):
        pairs = [RawPair("p", 0, 37.0, 100.0), RawPair("p", 1000, 38.0, 110.0)]
        scores = [ComfortAssessment("p", 990, ComfortScale.RASS, 3)]
        kept, removed = gate_movement(pairs, scores, [0, 1000])
        assert [p.timestamp for p in kept] == [0] and removed == 1

    def test_tie_attaches_to_earlier_reading(self):
        pairs = [RawPair("p", 0, 37.0, 100.0), RawPair("p", 200, 38.0, 110.0)]
        scores = [ComfortAssessment("p", 100, ComfortScale.RASS, 3)]
        kept, _ = gate_movement(pairs, scores, [0, 200])
        assert [p.timestamp for p in kept] == [200]


class TestFilterHrBounds:
    def test_bounds_inclusive(self):
        pairs = [
            RawPair("p", 0, 37.0, 240.0),
            RawPair("p", 1, 37.0, 240.5),
            RawPair("p", 2, 37.0, 30.0),
            RawPair("p", 3, 37.0, 29.5),
            RawPair("p", 4, 37.0, 100.0),
        ]
        kept, removed = filter_hr_bounds(pairs)
        assert [p.hr_bpm for p in kept] == [240.0, 30.0, 100.0]
        assert removed == 2


def _obs(patient, bucket, ts, hr=100.0, bt=None):
    bt = bt if bt is not None else bucket + 0.2
    return ObservationPair(
        patient=patient,
        age_months=10.0,
        bt_celsius=bt,
        hr_bpm=hr,
        bucket=TemperatureBucket(bucket),
        timestamp=ts,
    )


class TestDedupe:
    def test_same_patient_same_bucket_keeps_earliest(self):
        kept, removed = dedupe_per_patient_bucket(
            [_obs("a", 37, 20), _obs("a", 37, 10)]
        )
        assert [p.timestamp for p in kept] == [10] and removed == 1

    def test_different_buckets_both_survive(self):
        kept, removed = dedupe_per_patient_bucket(
            [_obs("a", 36, 10), _obs("a", 37, 20)]
        )
        assert len(kept) == 2 and removed == 0

    def test_different_patients_both_survive(self):
        kept, removed = dedupe_per_patient_bucket(
            [_obs("a", 37, 10), _obs("b", 37, 10)]
        )
        assert len(kept) == 2 and removed == 0

    def test_timestamp_tie_breaks_to_lower_hr(self):
        kept, _ = dedupe_per_patient_bucket(
            [_obs("a", 37, 10, hr=120.0), _obs("a", 37, 10, hr=90.0)]
        )
        assert kept[0].hr_bpm == 90.0

    def test_idempotent(self):
        pairs = [
            _obs("a", 37, 20),
            _obs("a", 37, 10),
            _obs("b", 36, 5),
            _obs("b", 36, 7),
            _obs("b", 37, 7),
        ]
        once, _ = dedupe_per_patient_bucket(pairs)
        twice, removed = dedupe_per_patient_bucket(once)
        assert twice == once and removed == 0


class TestRunPipeline:
    def test_golden_fixture(self, golden_dir):
        files = CohortFiles(
            patients_path=f"{golden_dir}/patients.csv",
            vitals_path=f"{golden_dir}/vitals.csv",
            scores_path=f"{golden_dir}/scores.csv",
            meds_path=f"{golden_dir}/meds.csv",
        )
        records, _ = load_cohort(files)
        pairs, audit = run_pipeline(records)

        assert [
            (p.patient, p.timestamp, p.bt_celsius, p.hr_bpm, p.bucket.floor_celsius)
            for p in pairs
        ] == [
            ("P1", 600, 37.2, 120.0, 37),
            ("P1", 20000, 36.4, 120.0, 36),
        ]
        assert pairs[0].age_months == pytest.approx(400 / 30.4375)
        assert audit.pairs_before == 6
        assert audit.removed_movement == 1
        assert audit.removed_medication == 1
        assert audit.removed_hr_bounds == 1
        assert audit.removed_bt_range == 0
        assert audit.removed_dedupe == 1
        assert audit.pairs_after == 2
        assert audit.matrix == {
            (37, AgeGroup.TODDLER): 1,
            (36, AgeGroup.TODDLER): 1,
        }

    def test_empty_cohort(self):
        pairs, audit = run_pipeline([])
        assert pairs == []
        assert audit.pairs_before == 0 and audit.pairs_after == 0
        assert audit.removals() == 0

    def test_single_calm_patient(self):
        record = PatientRecord(patient="q", age=AgeAtAdmission(100))
        record.vitals = [
            VitalSample(
                "q", 0, VitalKind.BODY_TEMPERATURE, 37.2,
                site=TempSite.RECTAL, mode=MeasurementMode.MANUAL,
            )
        ] + [_hr(t, 120.0) for t in range(0, 301, 30)]
        record.vitals.sort(key=lambda s: s.timestamp)
        pairs, audit = run_pipeline([record])
        assert len(pairs) == 1
        assert pairs[0].bt_celsius == 37.2
        assert pairs[0].hr_bpm == 120.0
        assert pairs[0].bucket.floor_celsius == 37
        assert audit.pairs_after == 1

    def test_order_insensitive(self, raw_cohort_processed):
        records, pairs, audit, _ = raw_cohort_processed
        shuffled = list(records)
        random.Random(3).shuffle(shuffled)
        pairs2, audit2 = run_pipeline(shuffled)
        assert pairs2 == pairs
        assert audit2 == audit

    def test_accounting_invariant(self, raw_cohort_processed):
        _, _, audit, _ = raw_cohort_processed
        assert audit.pairs_before - audit.removals() == audit.pairs_after
        assert sum(audit.matrix.values()) == audit.pairs_after

    def test_survivors_satisfy_invariants(self, raw_cohort_processed):
        _, pairs, _, _ = raw_cohort_processed
        for p in pairs:
            assert 30.0 <= p.hr_bpm <= 240.0
            assert p.bucket.floor_celsius <= p.bt_celsius < p.bucket.floor_celsius + 1

    def test_audit_render_shape(self, raw_cohort_processed):
        _, _, audit, _ = raw_cohort_processed
        text = render_audit(audit)
        assert "36-36.9" in text
        assert "pairs_before" in text
        assert "Teenager" in text
