"""Seeded multi-experiment runner and report rendering.

Each experiment shuffles its own train/test split (seed = base + index),
tunes any family with a declared hyperparameter grid on a 75/25 sub-split
of the training side (test data never touches tuning), refits on the full
training side, and evaluates on test. Quantile families report mean
pinball per level and the total quantile loss; point families report
R-squared and MSE. Aggregates are means and sample standard deviations
across experiments (a single experiment reports SD = 0).
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import metrics
from .domain import ObservationPair
from .models import (
    DEFAULT_LEVELS,
    POINT_FAMILIES,
    QUANTILE_FAMILIES,
    QuantileModelBundle,
    build_features,
    fit_bundle,
    fit_linear_svr,
    fit_ols,
    load_model,
    save_model,
)
from .models.features import FEATURE_SETS

__all__ = [
    "ExperimentConfig",
    "ExperimentReport",
    "FamilyOutcome",
    "InsufficientDataError",
    "TUNING_GRIDS",
    "export_quantile_scatter",
    "load_model",
    "render_report_csv",
    "render_report_text",
    "run_experiments",
    "save_model",
    "write_scatter",
]

TUNING_GRIDS: dict[str, list[dict]] = {
    "gbm": [
        {"depth": d, "learning_rate": lr, "n_trees": t}
        for d in (2, 3, 4)
        for lr in (0.05, 0.1)
        for t in (100, 200)
    ],
    "rf": [{"depth": d} for d in (6, 8)],
    "mlp": [{"hidden": h} for h in (16, 32)],
}

ALL_FAMILIES = ("lr", "mlr", "pr1", "svr", "statistical", "ols", "qr",
                "gbm", "rf", "mlp")


class InsufficientDataError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    families: tuple[str, ...]
    levels: tuple[float, ...] = DEFAULT_LEVELS
    n_experiments: int = 5
    base_seed: int = 1
    split: float = 0.8
    split_by_patient: bool = False
    jobs: int = 1

    def __post_init__(self) -> None:
        if self.n_experiments < 1:
            raise ValueError("n_experiments must be >= 1")
        if not 0.0 < self.split < 1.0:
            raise ValueError("split must be in (0, 1)")
        unknown = [f for f in self.families if f not in ALL_FAMILIES]
        if unknown:
            raise ValueError(f"unknown families: {unknown}")


@dataclass
class FamilyOutcome:
    family: str
    total_quantile_loss: float | None = None
    per_level: dict[float, float] = field(default_factory=dict)
    r2: float | None = None
    mse: float | None = None
    chosen_params: dict = field(default_factory=dict)
    error: str | None = None


@dataclass
class ExperimentReport:
    config: ExperimentConfig
    seeds: tuple[int, ...]
    # outcomes[i][family] -> FamilyOutcome for experiment i
    outcomes: list[dict[str, FamilyOutcome]]

    def mean_sd_total_ql(self, family: str) -> tuple[float, float]:
        values = [
            o[family].total_quantile_loss
            for o in self.outcomes
            if o[family].total_quantile_loss is not None
        ]
        if not values:
            raise ValueError(f"family {family} produced no quantile losses")
        mean = float(np.mean(values))
        sd = float(np.std(values, ddof=1)) if len(values) > 1 else 0.0
        return mean, sd

    def mean_point_metrics(self, family: str) -> tuple[float, float]:
        r2s = [o[family].r2 for o in self.outcomes if o[family].r2 is not None]
        mses = [o[family].mse for o in self.outcomes if o[family].mse is not None]
        return float(np.mean(r2s)), float(np.mean(mses))

    def mean_per_level(self, family: str) -> dict[float, float]:
        out: dict[float, float] = {}
        for level in self.config.levels:
            vals = [
                o[family].per_level[level]
                for o in self.outcomes
                if level in o[family].per_level
            ]
            if vals:
                out[level] = float(np.mean(vals))
        return out


def _pair_arrays(pairs: list[ObservationPair]):
    age = np.asarray([p.age_months for p in pairs])
    bt = np.asarray([p.bt_celsius for p in pairs])
    hr = np.asarray([p.hr_bpm for p in pairs])
    return age, bt, hr


def _split_indices(
    pairs: list[ObservationPair], seed: int, split: float, by_patient: bool
) -> tuple[np.ndarray, np.ndarray]:
    n = len(pairs)
    rng = np.random.default_rng(seed)
    if not by_patient:
        perm = rng.permutation(n)
        n_train = int(round(split * n))
        return perm[:n_train], perm[n_train:]
    patients = sorted({p.patient for p in pairs})
    order = rng.permutation(len(patients))
    target = split * n
    train_patients: set[str] = set()
    count = 0
    per_patient = {pid: 0 for pid in patients}
    for p in pairs:
        per_patient[p.patient] += 1
    for idx in order:
        if count >= target:
            break
        pid = patients[idx]
        train_patients.add(pid)
        count += per_patient[pid]
    train = np.asarray(
        [i for i, p in enumerate(pairs) if p.patient in train_patients],
        dtype=np.intp,
    )
    test = np.asarray(
        [i for i, p in enumerate(pairs) if p.patient not in train_patients],
        dtype=np.intp,
    )
    return train, test


def _fit_seed(base_seed: int, experiment: int, family: str, config_idx: int) -> int:
    family_idx = ALL_FAMILIES.index(family)
    ss = np.random.SeedSequence((base_seed, experiment, family_idx, config_idx))
    return int(ss.generate_state(1)[0])


def _evaluate_bundle(bundle: QuantileModelBundle, age, bt, hr, levels):
    preds = bundle.predict_matrix(age, bt)
    result = metrics.evaluate_quantile_predictions(
        hr, {float(tau): preds[:, j] for j, tau in enumerate(levels)}
    )
    return result.per_level_pinball, result.total_quantile_loss


def _run_family(
    family: str,
    pairs: list[ObservationPair],
    train_idx: np.ndarray,
    test_idx: np.ndarray,
    config: ExperimentConfig,
    experiment: int,
) -> FamilyOutcome:
    outcome = FamilyOutcome(family=family)
    age, bt, hr = _pair_arrays(pairs)
    tr_age, tr_bt, tr_hr = age[train_idx], bt[train_idx], hr[train_idx]
    te_age, te_bt, te_hr = age[test_idx], bt[test_idx], hr[test_idx]

    try:
        if family in QUANTILE_FAMILIES:
            params: dict = {}
            grid = TUNING_GRIDS.get(family)
            if grid:
                n_sub = int(round(0.75 * len(train_idx)))
                sub, val = train_idx[:n_sub], train_idx[n_sub:]
                best = None
                for config_idx, candidate in enumerate(grid):
                    b = fit_bundle(
                        family,
                        age[sub],
                        bt[sub],
                        hr[sub],
                        levels=config.levels,
                        seed=_fit_seed(
                            config.base_seed, experiment, family, config_idx
                        ),
                        params=candidate,
                    )
                    _, tql = _evaluate_bundle(
                        b, age[val], bt[val], hr[val], config.levels
                    )
                    if best is None or tql < best[0]:
                        best = (tql, candidate)
                params = best[1]
            bundle = fit_bundle(
                family,
                tr_age,
                tr_bt,
                tr_hr,
                levels=config.levels,
                seed=_fit_seed(config.base_seed, experiment, family, 9999),
                params=params,
            )
            outcome.chosen_params = dict(bundle.params)
            outcome.per_level, outcome.total_quantile_loss = _evaluate_bundle(
                bundle, te_age, te_bt, te_hr, config.levels
            )
            if family in POINT_FAMILIES:
                point_pred = _bundle_point_predictions(bundle, te_age, te_bt)
                outcome.r2 = metrics.r2(te_hr, point_pred)
                outcome.mse = metrics.mse(te_hr, point_pred)
        else:
            feature_set = POINT_FAMILIES[family]
            Xtr = build_features(tr_age, tr_bt, feature_set)
            Xte = build_features(te_age, te_bt, feature_set)
            names = FEATURE_SETS[feature_set]
            if family == "svr":
                model = fit_linear_svr(Xtr, tr_hr, feature_names=names)
            else:
                model = fit_ols(Xtr, tr_hr, feature_names=names)
            pred = model.predict(Xte)
            outcome.r2 = metrics.r2(te_hr, pred)
            outcome.mse = metrics.mse(te_hr, pred)
    except Exception as exc:  # recorded per family, never fatal to the run
        outcome.error = f"{type(exc).__name__}: {exc}"
    return outcome


def _bundle_point_predictions(bundle: QuantileModelBundle, age, bt) -> np.ndarray:
    """Point prediction for Table-II style metrics: the median-level
    model for per-level families, the shared fit otherwise."""
    if bundle.models is not None:
        taus = sorted(bundle.models, key=lambda t: abs(t - 0.5))
        return np.asarray(bundle.predict_level(taus[0], age, bt))
    return np.asarray(bundle.predict_level(bundle.levels[0], age, bt))


def _run_single_experiment(
    experiment: int, pairs: list[ObservationPair], config: ExperimentConfig
) -> dict[str, FamilyOutcome]:
    seed = config.base_seed + experiment
    train_idx, test_idx = _split_indices(
        pairs, seed, config.split, config.split_by_patient
    )
    return {
        family: _run_family(
            family, pairs, train_idx, test_idx, config, experiment
        )
        for family in config.families
    }


def run_experiments(
    pairs: list[ObservationPair], config: ExperimentConfig
) -> ExperimentReport:
    if len(pairs) < 50:
        raise InsufficientDataError(
            f"need at least 50 pairs, got {len(pairs)}"
        )
    seeds = tuple(config.base_seed + i for i in range(config.n_experiments))
    if config.jobs > 1:
        with ThreadPoolExecutor(max_workers=config.jobs) as pool:
            futures = [
                pool.submit(_run_single_experiment, i, pairs, config)
                for i in range(config.n_experiments)
            ]
            outcomes = [f.result() for f in futures]
    else:
        outcomes = [
            _run_single_experiment(i, pairs, config)
            for i in range(config.n_experiments)
        ]
    return ExperimentReport(config=config, seeds=seeds, outcomes=outcomes)


def render_report_text(report: ExperimentReport) -> str:
    config = report.config
    lines: list[str] = []
    lines.append(
        f"experiments={config.n_experiments} base_seed={config.base_seed} "
        f"split={config.split:g} levels={','.join(f'{t:g}' for t in config.levels)}"
    )
    lines.append(f"seeds={','.join(str(s) for s in report.seeds)}")

    point_rows = []
    for family in config.families:
        if family in POINT_FAMILIES and all(
            o[family].r2 is not None for o in report.outcomes
        ):
            r2_mean, mse_mean = report.mean_point_metrics(family)
            point_rows.append((family, r2_mean, mse_mean))
    if point_rows:
        lines.append("")
        lines.append("Linear model performance (held-out R2 / MSE)")
        lines.append(f"{'model':<14}{'R2':>10}{'MSE':>14}")
        for family, r2_mean, mse_mean in point_rows:
            lines.append(f"{family:<14}{r2_mean:>10.4f}{mse_mean:>14.4f}")

    ql_rows = []
    for family in config.families:
        if family in QUANTILE_FAMILIES and all(
            o[family].total_quantile_loss is not None for o in report.outcomes
        ):
            mean, sd = report.mean_sd_total_ql(family)
            ql_rows.append((family, mean, sd))
    if ql_rows:
        lines.append("")
        lines.append(
            f"Mean total quantile loss and SD from "
            f"{config.n_experiments} experiments"
        )
        lines.append(f"{'model':<14}{'mean total QL':>16}{'SD':>14}")
        for family, mean, sd in sorted(ql_rows, key=lambda r: r[1]):
            lines.append(f"{family:<14}{mean:>16.4f}{sd:>14.4e}")

        lines.append("")
        lines.append("Mean pinball loss per level")
        head = f"{'model':<14}" + "".join(
            f"{t:>10.2f}" for t in config.levels
        )
        lines.append(head)
        for family, _, _ in ql_rows:
            per = report.mean_per_level(family)
            lines.append(
                f"{family:<14}"
                + "".join(f"{per[t]:>10.4f}" for t in config.levels)
            )

    errors = []
    for i, outcome in enumerate(report.outcomes):
        for family, fo in outcome.items():
            if fo.error:
                errors.append(f"experiment {i} {family}: {fo.error}")
    if errors:
        lines.append("")
        lines.append("Errors")
        lines.extend(errors)
    return "\n".join(lines) + "\n"


def render_report_csv(report: ExperimentReport) -> str:
    config = report.config
    level_cols = [f"ql_{t:g}" for t in config.levels]
    header = (
        ["family", "experiment", "seed", "total_quantile_loss", "r2", "mse"]
        + level_cols
        + ["params", "error"]
    )
    rows = [",".join(header)]
    for i, outcome in enumerate(report.outcomes):
        for family in config.families:
            fo = outcome[family]
            params = ";".join(
                f"{k}:{fo.chosen_params[k]}" for k in sorted(fo.chosen_params)
            )
            cells = [
                family,
                str(i),
                str(report.seeds[i]),
                _num(fo.total_quantile_loss),
                _num(fo.r2),
                _num(fo.mse),
            ]
            cells += [
                _num(fo.per_level.get(t)) for t in config.levels
            ]
            cells += [params, fo.error or ""]
            rows.append(",".join(cells))
    return "\n".join(rows) + "\n"


def _num(value: float | None) -> str:
    return "" if value is None else format(value, ".10g")


def export_quantile_scatter(
    bundle: QuantileModelBundle, pairs: list[ObservationPair], level: float
) -> list[tuple[float, float, float, float]]:
    """(age_months, bt, hr_true, hr_pred) rows at one level, sorted by
    age then bt, one row per pair."""
    if level not in bundle.levels:
        raise ValueError(f"bundle has no level {level}")
    age, bt, hr = _pair_arrays(pairs)
    pred = np.asarray(bundle.predict_level(level, age, bt))
    rows = [
        (float(a), float(b), float(h), float(p))
        for a, b, h, p in zip(age, bt, hr, pred)
    ]
    rows.sort(key=lambda r: (r[0], r[1]))
    return rows


def write_scatter(rows, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("age_months,bt_celsius,hr_true,hr_pred\n")
        for age, bt, true, pred in rows:
            fh.write(f"{age:.6f},{bt:.1f},{true:.6g},{pred:.6g}\n")
