"""Subcommand front-end: simulate -> derive-hi -> build-features -> train -> evaluate.

Every stage reads its inputs from and writes its outputs to the working
directory given by --out, so any prefix of the pipeline can be run
standalone and rerunning with the same seed overwrites artifacts with
byte-identical bytes. Failures exit non-zero with a single parsable
line on stderr: ``ERROR <ConfigError|DataError|ModelError>: <message>``.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path
from typing import Optional, Sequence

from . import dataio
from .config import (
    PipelineConfig,
    config_hash,
    config_to_ini,
    default_config,
    load_config,
)
from .errors import (
    ChamberHealthError,
    ConfigError,
    DataError,
    ModelError,
)
from .evaluation import evaluate_all
from .features import build_supervised, chrono_split
from .hi import derive_hi
from .models import (
    MODEL_KINDS,
    RegressorSpec,
    load_model,
    save_model,
    train_model,
)
from .simgen import simulate_history

EXIT_CODES = {ConfigError: 2, DataError: 3, ModelError: 4}


def stage_simulate(cfg: PipelineConfig) -> None:
    seed = cfg.require_seed()
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    dataset = simulate_history(
        cfg.chamber,
        cfg.recipes,
        n_assets=cfg.n_assets,
        n_runs_total=cfg.n_runs_total,
        cycle_length=cfg.sim_cycle_length,
        seed=seed,
        recipe_probs=cfg.recipe_probs,
    )
    dataio.write_dataset(out, dataset)


def stage_derive_hi(cfg: PipelineConfig) -> None:
    out = Path(cfg.out_dir)
    sensor_ids = [s.sensor_id for s in cfg.chamber.sensors]
    runs, _ = dataio.read_dataset(out, sensor_ids)
    fits, series = derive_hi(
        runs,
        cfg.chamber.sensors,
        cfg.segments,
        cycle_length=cfg.hi_cycle_length,
        analysis_limit=cfg.analysis_limit,
    )
    dataio.write_fits_csv(out / dataio.FITS_CSV, fits)
    dataio.write_hi_csv(out / dataio.HI_CSV, series)


def stage_build_features(cfg: PipelineConfig) -> None:
    out = Path(cfg.out_dir)
    sensor_ids = [s.sensor_id for s in cfg.chamber.sensors]
    runs, plan = dataio.read_dataset(out, sensor_ids)
    hi_map = dataio.read_hi_csv(out / dataio.HI_CSV)
    sset = build_supervised(
        runs, hi_map, plan, cfg.chamber.sensors, horizon=cfg.horizon
    )
    train, test = chrono_split(sset, train_frac=cfg.train_frac)
    dataio.write_supervised(out, train, test)


def stage_train(cfg: PipelineConfig, kinds: Optional[Sequence[str]] = None) -> None:
    seed = cfg.require_seed()
    out = Path(cfg.out_dir)
    train, _ = dataio.read_supervised(out)
    models_dir = out / dataio.MODELS_DIR
    models_dir.mkdir(parents=True, exist_ok=True)
    for kind in kinds or MODEL_KINDS:
        spec = RegressorSpec(kind, dict(cfg.model_params.get(kind, {})), seed=seed)
        model = train_model(spec, train, threads=cfg.threads)
        save_model(model, models_dir / f"{kind}.json")


def stage_evaluate(cfg: PipelineConfig) -> None:
    seed = cfg.require_seed()
    out = Path(cfg.out_dir)
    train, test = dataio.read_supervised(out)
    models_dir = out / dataio.MODELS_DIR
    paths = sorted(models_dir.glob("*.json")) if models_dir.is_dir() else []
    if not paths:
        raise ModelError(f"no trained models found under {models_dir}")
    models = {p.stem: load_model(p) for p in paths}

    fingerprint = {
        "seed": seed,
        "config_hash": config_hash(cfg),
        "horizon": cfg.horizon,
        "train_frac": cfg.train_frac,
        "train_rows": train.n_rows,
        "test_rows": test.n_rows,
    }
    report = evaluate_all(models, train, test, fingerprint, keep_predictions=True)
    dataio.atomic_write_text(out / dataio.REPORT_JSON, report.to_json() + "\n")
    best_kind = report.results[0][0]
    dataio.write_plot_hi_csv(out / dataio.PLOT_HI_CSV, test, best_kind, report.predictions)
    if cfg.dump_predictions:
        dataio.write_predictions_csv(out / dataio.PREDICTIONS_CSV, test, report.predictions)


def run_pipeline(cfg: PipelineConfig) -> None:
    """All five stages in order over one working directory."""
    stage_simulate(cfg)
    stage_derive_hi(cfg)
    stage_build_features(cfg)
    stage_train(cfg)
    stage_evaluate(cfg)


def _add_common_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", type=str, default=None, help="INI config file")
    parser.add_argument("--seed", type=int, default=None, help="master seed (required unless set in config)")
    parser.add_argument("--out", type=str, default=None, help="working directory for all artifacts")
    parser.add_argument("--threads", type=int, default=None, help="thread cap for forest training")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="chamberhealth",
        description="Chamber contamination health index: simulate, derive, forecast, evaluate.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="generate the synthetic dataset CSVs")
    _add_common_flags(p)
    p.add_argument("--n-assets", type=int, default=None)
    p.add_argument("--n-runs-total", type=int, default=None)
    p.add_argument("--cycle-length", type=int, default=None)

    p = sub.add_parser("derive-hi", help="fit segments and extract the health index")
    _add_common_flags(p)
    p.add_argument("--analysis-limit", type=int, default=None)

    p = sub.add_parser("build-features", help="build the horizon-N supervised split")
    _add_common_flags(p)
    p.add_argument("--horizon", type=int, default=None)
    p.add_argument("--train-frac", type=float, default=None)

    p = sub.add_parser("train", help="train forecasting models")
    _add_common_flags(p)
    p.add_argument("--model", choices=list(MODEL_KINDS) + ["all"], default="all")
    p.add_argument("--dt-max-depth", type=int, default=None)
    p.add_argument("--dt-min-samples-leaf", type=int, default=None)
    p.add_argument("--rf-n-trees", type=int, default=None)
    p.add_argument("--rf-max-depth", type=int, default=None)
    p.add_argument("--rf-features-per-split", type=int, default=None)
    p.add_argument("--knn-k", type=int, default=None)
    p.add_argument("--svr-epsilon", type=float, default=None)
    p.add_argument("--svr-steps", type=int, default=None)
    p.add_argument("--mlp-hidden-units", type=int, default=None)
    p.add_argument("--mlp-epochs", type=int, default=None)

    p = sub.add_parser("evaluate", help="score models and benchmarks, write report.json")
    _add_common_flags(p)
    p.add_argument("--dump-predictions", action="store_true", default=None)

    p = sub.add_parser("pipeline", help="run all stages in order")
    _add_common_flags(p)
    p.add_argument("--n-assets", type=int, default=None)
    p.add_argument("--n-runs-total", type=int, default=None)
    p.add_argument("--cycle-length", type=int, default=None)
    p.add_argument("--horizon", type=int, default=None)
    p.add_argument("--train-frac", type=float, default=None)
    p.add_argument("--dump-predictions", action="store_true", default=None)

    p = sub.add_parser("show-config", help="print the fully resolved configuration")
    _add_common_flags(p)

    return parser


_MODEL_FLAGS = {
    "dt_max_depth": ("dt", "max_depth"),
    "dt_min_samples_leaf": ("dt", "min_samples_leaf"),
    "rf_n_trees": ("rf", "n_trees"),
    "rf_max_depth": ("rf", "max_depth"),
    "rf_features_per_split": ("rf", "features_per_split"),
    "knn_k": ("knn", "k"),
    "svr_epsilon": ("svr", "epsilon"),
    "svr_steps": ("svr", "steps"),
    "mlp_hidden_units": ("mlp", "hidden_units"),
    "mlp_epochs": ("mlp", "epochs"),
}


def resolve_config(args: argparse.Namespace) -> PipelineConfig:
    """Defaults, then config file, then command-line flags."""
    cfg = load_config(args.config) if args.config else default_config()
    if args.seed is not None:
        cfg = replace(cfg, seed=args.seed)
    if args.out is not None:
        cfg = replace(cfg, out_dir=args.out)
    if args.threads is not None:
        if args.threads < 1:
            raise ConfigError(f"--threads must be >= 1, got {args.threads}")
        cfg = replace(cfg, threads=args.threads)

    simple = {
        "n_assets": "n_assets",
        "n_runs_total": "n_runs_total",
        "cycle_length": "sim_cycle_length",
        "analysis_limit": "analysis_limit",
        "horizon": "horizon",
        "train_frac": "train_frac",
        "dump_predictions": "dump_predictions",
    }
    for flag, attr in simple.items():
        value = getattr(args, flag, None)
        if value is not None:
            cfg = replace(cfg, **{attr: value})

    overrides: dict[str, dict[str, float]] = {k: dict(v) for k, v in cfg.model_params.items()}
    for flag, (kind, name) in _MODEL_FLAGS.items():
        value = getattr(args, flag, None)
        if value is not None:
            overrides.setdefault(kind, {})[name] = value
    if overrides != dict(cfg.model_params):
        cfg = replace(cfg, model_params=overrides)
    return cfg


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve_config(args)
        # effective configuration, defaults resolved, before any action
        sys.stdout.write(config_to_ini(cfg))
        sys.stdout.flush()
        if args.command == "show-config":
            return 0
        if args.command == "simulate":
            stage_simulate(cfg)
        elif args.command == "derive-hi":
            stage_derive_hi(cfg)
        elif args.command == "build-features":
            stage_build_features(cfg)
        elif args.command == "train":
            kinds = list(MODEL_KINDS) if args.model == "all" else [args.model]
            stage_train(cfg, kinds)
        elif args.command == "evaluate":
            stage_evaluate(cfg)
        elif args.command == "pipeline":
            run_pipeline(cfg)
        else:  # pragma: no cover - argparse enforces choices
            raise ConfigError(f"unknown command {args.command!r}")
    except ChamberHealthError as exc:
        for cls, code in EXIT_CODES.items():
            if isinstance(exc, cls):
                sys.stderr.write(f"ERROR {cls.__name__}: {exc}\n")
                return code
        sys.stderr.write(f"ERROR {type(exc).__name__}: {exc}\n")
        return 1
    except FileNotFoundError as exc:
        sys.stderr.write(f"ERROR DataError: {exc}\n")
        return EXIT_CODES[DataError]
    return 0


if __name__ == "__main__":
    sys.exit(main())
