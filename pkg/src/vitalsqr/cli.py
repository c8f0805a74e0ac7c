"""Command-line entry point: synth, preprocess, train, evaluate,
export-scatter, predict, serve.

Exit codes: 0 success, 1 usage error, 2 data or model error. Every stage
resolves a seed (flag, then VITALS_QR_SEED, then 1) and prints its
effective configuration before running; --deterministic-output suppresses
timing lines so reruns are byte-identical.
"""

from __future__ import annotations

import argparse
import os
import sys
import time

from . import harness, metrics, preprocess, service, synthcohort
from .ingest import CohortFiles, IngestError, load_cohort, write_cohort
from .models import (
    DEFAULT_LEVELS,
    ModelFormatError,
    QUANTILE_FAMILIES,
    fit_bundle,
    load_model,
    predict_band,
    save_model,
)
from .models.bundle import DomainStatus

USAGE_EXIT = 1
DATA_EXIT = 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        raise UsageError(message)


def _resolve_seed(args) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get("VITALS_QR_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise UsageError(f"VITALS_QR_SEED={env!r} is not an integer")
    return 1


def _print_config(command: str, options: dict) -> None:
    rendered = " ".join(f"{k}={options[k]}" for k in sorted(options))
    print(f"config: command={command} {rendered}")


def _parse_levels(raw: str) -> tuple[float, ...]:
    try:
        levels = tuple(float(v) for v in raw.split(","))
    except ValueError:
        raise UsageError(f"bad levels list {raw!r}")
    if not levels or any(not 0 < t < 1 for t in levels):
        raise UsageError("levels must lie in (0, 1)")
    if list(levels) != sorted(set(levels)):
        raise UsageError("levels must be strictly increasing")
    return levels


def build_parser() -> _Parser:
    parser = _Parser(prog="vitalsqr", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic cohort")
    p.add_argument("--n", type=int, default=4462)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", help="pairs csv path (pairs mode)")
    p.add_argument("--raw-dir", help="emit raw cohort files to this directory")
    p.add_argument("--heteroscedastic", action="store_true")
    p.add_argument("--bt-slope", type=float, default=10.0)
    p.add_argument("--noise-sd", type=float, default=12.0)

    p = sub.add_parser("preprocess", help="run the pipeline on cohort files")
    p.add_argument("--patients", required=True)
    p.add_argument("--vitals", required=True)
    p.add_argument("--scores", required=True)
    p.add_argument("--meds", required=True)
    p.add_argument("--out", required=True, help="pairs csv path")
    p.add_argument("--audit", help="audit text path (default: stdout)")
    p.add_argument("--seed", type=int, default=None)

    p = sub.add_parser("train", help="fit a quantile bundle on a pairs file")
    p.add_argument("--family", required=True, choices=sorted(QUANTILE_FAMILIES))
    p.add_argument("--levels", default=",".join(str(t) for t in DEFAULT_LEVELS))
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--gbm-trees", type=int)
    p.add_argument("--gbm-depth", type=int)
    p.add_argument("--gbm-learning-rate", type=float)
    p.add_argument("--gbm-min-leaf", type=int)
    p.add_argument("--rf-trees", type=int)
    p.add_argument("--rf-depth", type=int)
    p.add_argument("--mlp-hidden", type=int)
    p.add_argument("--mlp-epochs", type=int)

    p = sub.add_parser("evaluate", help="seeded multi-experiment comparison")
    p.add_argument("--families", required=True)
    p.add_argument("--experiments", type=int, default=5)
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--levels", default=",".join(str(t) for t in DEFAULT_LEVELS))
    p.add_argument("--split", type=float, default=0.8)
    p.add_argument("--split-by-patient", action="store_true")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--report", help="write the text report here too")
    p.add_argument("--csv", help="write per-experiment rows here")
    p.add_argument("--deterministic-output", action="store_true")

    p = sub.add_parser("export-scatter", help="per-level prediction export")
    p.add_argument("--model", required=True)
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--level", type=float, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=None)

    p = sub.add_parser("predict", help="one percentile prediction")
    p.add_argument("--model", required=True)
    p.add_argument("--hr", type=float, required=True)
    p.add_argument("--bt", type=float, required=True)
    p.add_argument("--age-months", type=float, required=True)
    p.add_argument("--seed", type=int, default=None)

    p = sub.add_parser("serve", help="start the prediction service")
    p.add_argument("--model", required=True)
    p.add_argument("--bind", default="127.0.0.1:8099")
    p.add_argument("--seed", type=int, default=None)
    return parser


def _cmd_synth(args, seed: int) -> int:
    if not args.out and not args.raw_dir:
        raise UsageError("synth requires --out or --raw-dir")
    config = synthcohort.SynthConfig(
        n_pairs=args.n,
        seed=seed,
        bt_slope_bpm_per_c=args.bt_slope,
        noise_sd_bpm=args.noise_sd,
        heteroscedastic=args.heteroscedastic,
        raw_mode=bool(args.raw_dir),
    )
    result, _gt = synthcohort.generate(config)
    if args.raw_dir:
        paths = write_cohort(result, args.raw_dir)
        print(
            f"wrote {len(result)} patient records to {args.raw_dir} "
            f"({os.path.basename(paths.vitals_path)} etc.)"
        )
    else:
        preprocess.write_pairs(result, args.out)
        print(f"wrote {len(result)} pairs to {args.out}")
    return 0


def _cmd_preprocess(args, seed: int) -> int:
    files = CohortFiles(
        patients_path=args.patients,
        vitals_path=args.vitals,
        scores_path=args.scores,
        meds_path=args.meds,
    )
    records, report = load_cohort(files)
    pairs, audit = preprocess.run_pipeline(records)
    preprocess.write_pairs(pairs, args.out)
    audit_text = preprocess.render_audit(audit)
    if args.audit:
        with open(args.audit, "w", encoding="utf-8") as fh:
            fh.write(audit_text)
    else:
        print(audit_text, end="")
    print(
        f"patients_read={report.patients_read} "
        f"patients_excluded={report.patients_excluded} "
        f"rows_rejected={report.rows_rejected}"
    )
    print(f"wrote {len(pairs)} pairs to {args.out}")
    return 0


def _train_params(args) -> dict:
    params = {}
    mapping = {
        "gbm_trees": "n_trees",
        "gbm_depth": "depth",
        "gbm_learning_rate": "learning_rate",
        "gbm_min_leaf": "min_leaf",
        "rf_trees": "n_trees",
        "rf_depth": "depth",
        "mlp_hidden": "hidden",
        "mlp_epochs": "epochs",
    }
    for flag, key in mapping.items():
        value = getattr(args, flag, None)
        if value is not None:
            params[key] = value
    return params


def _cmd_train(args, seed: int) -> int:
    levels = _parse_levels(args.levels)
    pairs = preprocess.read_pairs(args.input)
    if not pairs:
        raise ValueError("pairs file is empty")
    age = [p.age_months for p in pairs]
    bt = [p.bt_celsius for p in pairs]
    hr = [p.hr_bpm for p in pairs]
    bundle = fit_bundle(
        args.family, age, bt, hr, levels=levels, seed=seed,
        params=_train_params(args),
    )
    save_model(bundle, args.out)
    print(
        f"trained {args.family} on {len(pairs)} pairs "
        f"(age {bundle.age_bounds[0]:.2f}-{bundle.age_bounds[1]:.2f} months, "
        f"bt {bundle.bt_bounds[0]:.1f}-{bundle.bt_bounds[1]:.1f} C); "
        f"saved to {args.out}"
    )
    return 0


def _cmd_evaluate(args, seed: int) -> int:
    families = tuple(f.strip() for f in args.families.split(",") if f.strip())
    config = harness.ExperimentConfig(
        families=families,
        levels=_parse_levels(args.levels),
        n_experiments=args.experiments,
        base_seed=seed,
        split=args.split,
        split_by_patient=args.split_by_patient,
        jobs=args.jobs,
    )
    pairs = preprocess.read_pairs(args.input)
    start = time.time()
    report = harness.run_experiments(pairs, config)
    text = harness.render_report_text(report)
    print(text, end="")
    if not args.deterministic_output:
        print(f"elapsed: {time.time() - start:.1f}s")
    if args.report:
        with open(args.report, "w", encoding="utf-8") as fh:
            fh.write(text)
    if args.csv:
        with open(args.csv, "w", encoding="utf-8") as fh:
            fh.write(harness.render_report_csv(report))
    return 0


def _cmd_export_scatter(args, seed: int) -> int:
    bundle = load_model(args.model)
    pairs = preprocess.read_pairs(args.input)
    rows = harness.export_quantile_scatter(bundle, pairs, args.level)
    harness.write_scatter(rows, args.out)
    print(f"wrote {len(rows)} rows to {args.out}")
    return 0


def _cmd_predict(args, seed: int) -> int:
    bundle = load_model(args.model)
    band = predict_band(
        bundle, args.age_months, args.bt, observed_hr=args.hr
    )
    if band.domain_status is DomainStatus.OUT_OF_DOMAIN:
        print("OUT-OF-DOMAIN: inputs fall outside the model's training ranges")
        print(
            f"  trained age {bundle.age_bounds[0]:.2f}-"
            f"{bundle.age_bounds[1]:.2f} months, "
            f"bt {bundle.bt_bounds[0]:.1f}-{bundle.bt_bounds[1]:.1f} C"
        )
        return 0
    for level, value in zip(band.levels, band.quantiles_bpm):
        print(f"q{level:g}: {value:.1f} bpm")
    verdict = "IN-RANGE" if band.in_range else "OUT-OF-RANGE"
    print(
        f"observed hr {args.hr:g} bpm is {verdict} "
        f"[{band.quantiles_bpm[0]:.1f}, {band.quantiles_bpm[-1]:.1f}]"
    )
    return 0


def _cmd_serve(args, seed: int) -> int:
    service.serve_forever(args.model, args.bind)
    return 0


COMMANDS = {
    "synth": _cmd_synth,
    "preprocess": _cmd_preprocess,
    "train": _cmd_train,
    "evaluate": _cmd_evaluate,
    "export-scatter": _cmd_export_scatter,
    "predict": _cmd_predict,
    "serve": _cmd_serve,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        seed = _resolve_seed(args)
        options = {
            k: v for k, v in sorted(vars(args).items()) if k != "command"
        }
        options["seed"] = seed
        _print_config(args.command, options)
        return COMMANDS[args.command](args, seed)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return USAGE_EXIT
    except (IngestError, ModelFormatError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return DATA_EXIT


if __name__ == "__main__":
    sys.exit(main())
