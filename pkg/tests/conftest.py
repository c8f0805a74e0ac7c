import os

import pytest

from vitalsqr.preprocess import run_pipeline
from vitalsqr.synthcohort import SynthConfig, generate

FIXTURES = os.path.join(os.path.dirname(__file__), "fixtures")


@pytest.fixture(scope="session")
def golden_dir() -> str:
    return os.path.join(FIXTURES, "golden")


@pytest.fixture(scope="session")
def small_pairs():
    """600 synthetic pairs; enough signal for quick model checks."""
    pairs, _ = generate(SynthConfig(n_pairs=600, seed=11))
    return pairs


@pytest.fixture(scope="session")
def small_pairs_arrays(small_pairs):
    import numpy as np

    age = np.asarray([p.age_months for p in small_pairs])
    bt = np.asarray([p.bt_celsius for p in small_pairs])
    hr = np.asarray([p.hr_bpm for p in small_pairs])
    return age, bt, hr


@pytest.fixture(scope="session")
def raw_cohort_processed():
    records, gt = generate(SynthConfig(n_pairs=150, seed=5, raw_mode=True))
    pairs, audit = run_pipeline(records)
    return records, pairs, audit, gt
