"""Pipeline configuration: defaults, INI round-trip, fingerprint hash.

The config file is INI-style ``key = value`` with one section per
module ([simgen], [hi], [features], [models], [eval]) plus [cli] for
seed, output directory and thread cap. Flags override file keys; every
subcommand prints the fully resolved form before acting. The config
hash covers only the science-relevant sections, so runs that differ
merely in output path or thread count reproduce identical reports.
"""

from __future__ import annotations

import configparser
import hashlib
import io
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Mapping, Optional, Union

from .core import SegmentSpec, SensorSpec
from .errors import ConfigError
from .models import DEFAULT_HYPERPARAMS, MODEL_KINDS
from .simgen import (
    DEFAULT_RECIPE_PROBS,
    ChamberConfig,
    RecipeSpec,
    default_recipes,
    default_segments,
)

HASHED_SECTIONS = ("simgen", "hi", "features", "models", "eval")


@dataclass(frozen=True)
class PipelineConfig:
    """Everything the CLI needs to run any stage."""

    chamber: ChamberConfig = field(default_factory=ChamberConfig)
    recipes: tuple[RecipeSpec, ...] = field(default_factory=default_recipes)
    recipe_probs: Mapping[str, float] = field(default_factory=lambda: dict(DEFAULT_RECIPE_PROBS))
    n_assets: int = 5
    n_runs_total: int = 2000
    sim_cycle_length: int = 100
    segments: tuple[SegmentSpec, ...] = field(default_factory=default_segments)
    hi_cycle_length: int = 100
    analysis_limit: int = 400
    horizon: int = 10
    train_frac: float = 0.7
    model_params: Mapping[str, Mapping[str, float]] = field(default_factory=dict)
    dump_predictions: bool = False
    seed: Optional[int] = None
    out_dir: str = "out"
    threads: int = 1

    def require_seed(self) -> int:
        if self.seed is None:
            raise ConfigError("a seed is required: pass --seed or set seed in [cli]")
        return self.seed


def default_config() -> PipelineConfig:
    return PipelineConfig()


def _fmt_value(value) -> str:
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, bool):
        return "true" if value else "false"
    return str(value)


def _sensors_to_str(sensors) -> str:
    return ", ".join(
        f"{s.sensor_id}:{_fmt_value(s.valid_range[0])}:{_fmt_value(s.valid_range[1])}:{s.priority}"
        for s in sensors
    )


def _segments_to_str(segments) -> str:
    return ", ".join(
        f"{s.index}:{_fmt_value(s.upper)}:{_fmt_value(s.lower)}" for s in segments
    )


def _recipes_to_str(recipes) -> str:
    return ", ".join(
        f"{r.recipe_id}:{_fmt_value(r.deposition_weight)}:{_fmt_value(r.duration_scale)}"
        for r in recipes
    )


def _mapping_to_str(mapping: Mapping[str, float]) -> str:
    return ", ".join(f"{k}:{_fmt_value(float(v))}" for k, v in mapping.items())


def config_to_ini(cfg: PipelineConfig) -> str:
    """Canonical resolved INI text (also the hashing input)."""
    chamber = cfg.chamber
    sigma = chamber.sigma_by_sensor()
    parser = configparser.ConfigParser(interpolation=None)
    parser["cli"] = {
        "seed": "" if cfg.seed is None else str(cfg.seed),
        "out": cfg.out_dir,
        "threads": str(cfg.threads),
    }
    parser["simgen"] = {
        "n_assets": str(cfg.n_assets),
        "n_runs_total": str(cfg.n_runs_total),
        "cycle_length": str(cfg.sim_cycle_length),
        "tau_stage1": _fmt_value(chamber.tau_stage1),
        "tau_stage2": _fmt_value(chamber.tau_stage2),
        "crossover_pressure": _fmt_value(chamber.crossover_pressure),
        "p_atm": _fmt_value(chamber.p_atm),
        "base_outgassing_q0": _fmt_value(chamber.base_outgassing_q0),
        "outgassing_per_unit": _fmt_value(chamber.outgassing_per_unit),
        "target_pressure": _fmt_value(chamber.target_pressure),
        "sample_dt": _fmt_value(chamber.sample_dt),
        "tail_samples": str(chamber.tail_samples),
        "noise_sigma": _mapping_to_str(sigma),
        "sensors": _sensors_to_str(chamber.sensors),
        "seasonal_amplitude": _fmt_value(chamber.seasonal_amplitude),
        "seasonal_period_s": _fmt_value(chamber.seasonal_period_s),
        "weather_sigma": _fmt_value(chamber.weather_sigma),
        "weather_rho": _fmt_value(chamber.weather_rho),
        "maintenance_residual": _fmt_value(chamber.maintenance_residual),
        "time_origin": _fmt_value(chamber.time_origin),
        "run_interval_s": _fmt_value(chamber.run_interval_s),
        "temp_base_c": _fmt_value(chamber.temp_base_c),
        "temp_seasonal_amplitude": _fmt_value(chamber.temp_seasonal_amplitude),
        "temp_run_noise": _fmt_value(chamber.temp_run_noise),
        "temp_sample_noise": _fmt_value(chamber.temp_sample_noise),
        "flow_base": _fmt_value(chamber.flow_base),
        "flow_per_weight": _fmt_value(chamber.flow_per_weight),
        "flow_run_noise": _fmt_value(chamber.flow_run_noise),
        "flow_sample_noise": _fmt_value(chamber.flow_sample_noise),
        "recipes": _recipes_to_str(cfg.recipes),
        "recipe_probs": _mapping_to_str(cfg.recipe_probs),
    }
    parser["hi"] = {
        "segments": _segments_to_str(cfg.segments),
        "cycle_length": str(cfg.hi_cycle_length),
        "analysis_limit": str(cfg.analysis_limit),
    }
    parser["features"] = {
        "horizon": str(cfg.horizon),
        "train_frac": _fmt_value(cfg.train_frac),
    }
    models_section = {}
    for kind in MODEL_KINDS:
        resolved = dict(DEFAULT_HYPERPARAMS[kind])
        resolved.update(cfg.model_params.get(kind, {}))
        for key, value in resolved.items():
            models_section[f"{kind}_{key}"] = _fmt_value(value)
    parser["models"] = models_section
    parser["eval"] = {"dump_predictions": _fmt_value(cfg.dump_predictions)}

    buf = io.StringIO()
    parser.write(buf)
    return buf.getvalue()


def config_hash(cfg: PipelineConfig) -> str:
    """Hash of the science-relevant sections of the resolved config."""
    parser = configparser.ConfigParser(interpolation=None)
    parser.read_string(config_to_ini(cfg))
    digest = hashlib.sha256()
    for section in HASHED_SECTIONS:
        for key, value in sorted(parser[section].items()):
            digest.update(f"{section}.{key}={value}\n".encode())
    return digest.hexdigest()[:16]


def _parse_triples(text: str, what: str, n_fields: int) -> list[list[str]]:
    out = []
    for chunk in text.split(","):
        chunk = chunk.strip()
        if not chunk:
            continue
        parts = [p.strip() for p in chunk.split(":")]
        if len(parts) != n_fields:
            raise ConfigError(f"bad {what} entry {chunk!r}: expected {n_fields} ':'-separated fields")
        out.append(parts)
    if not out:
        raise ConfigError(f"{what} must not be empty")
    return out


def _parse_sensors(text: str) -> tuple[SensorSpec, ...]:
    return tuple(
        SensorSpec(p[0], (float(p[1]), float(p[2])), int(p[3]))
        for p in _parse_triples(text, "sensor", 4)
    )


def _parse_segments(text: str) -> tuple[SegmentSpec, ...]:
    return tuple(
        SegmentSpec(int(p[0]), float(p[1]), float(p[2]))
        for p in _parse_triples(text, "segment", 3)
    )


def _parse_recipes(text: str) -> tuple[RecipeSpec, ...]:
    return tuple(
        RecipeSpec(p[0], float(p[1]), float(p[2]))
        for p in _parse_triples(text, "recipe", 3)
    )


def _parse_mapping(text: str, what: str) -> dict[str, float]:
    try:
        return {p[0]: float(p[1]) for p in _parse_triples(text, what, 2)}
    except ValueError as exc:
        raise ConfigError(f"bad {what}: {exc}") from None


def _parse_bool(text: str, key: str) -> bool:
    lowered = text.strip().lower()
    if lowered in ("true", "1", "yes", "on"):
        return True
    if lowered in ("false", "0", "no", "off"):
        return False
    raise ConfigError(f"bad boolean for {key}: {text!r}")


def config_from_ini(text: str) -> PipelineConfig:
    """Parse an INI string, starting from defaults and overriding present keys."""
    parser = configparser.ConfigParser(interpolation=None)
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"bad config file: {exc}") from None
    known = set(HASHED_SECTIONS) | {"cli"}
    unknown = set(parser.sections()) - known
    if unknown:
        raise ConfigError(f"unknown config sections: {sorted(unknown)}")

    cfg = default_config()
    chamber_kwargs: dict = {}

    def get(section: str, key: str) -> Optional[str]:
        if parser.has_section(section) and key in parser[section]:
            return parser[section][key]
        return None

    try:
        if (v := get("cli", "seed")) not in (None, ""):
            cfg = replace(cfg, seed=int(v))
        if (v := get("cli", "out")) is not None:
            cfg = replace(cfg, out_dir=v)
        if (v := get("cli", "threads")) is not None:
            cfg = replace(cfg, threads=int(v))

        int_keys = {"tail_samples"}
        float_keys = {
            "tau_stage1", "tau_stage2", "crossover_pressure", "p_atm",
            "base_outgassing_q0", "outgassing_per_unit", "target_pressure",
            "sample_dt", "seasonal_amplitude", "seasonal_period_s",
            "weather_sigma", "weather_rho",
            "maintenance_residual", "time_origin", "run_interval_s",
            "temp_base_c", "temp_seasonal_amplitude", "temp_run_noise",
            "temp_sample_noise", "flow_base", "flow_per_weight",
            "flow_run_noise", "flow_sample_noise",
        }
        if parser.has_section("simgen"):
            for key, value in parser["simgen"].items():
                if key == "n_assets":
                    cfg = replace(cfg, n_assets=int(value))
                elif key == "n_runs_total":
                    cfg = replace(cfg, n_runs_total=int(value))
                elif key == "cycle_length":
                    cfg = replace(cfg, sim_cycle_length=int(value))
                elif key == "recipes":
                    cfg = replace(cfg, recipes=_parse_recipes(value))
                elif key == "recipe_probs":
                    cfg = replace(cfg, recipe_probs=_parse_mapping(value, "recipe_probs"))
                elif key == "sensors":
                    chamber_kwargs["sensors"] = _parse_sensors(value)
                elif key == "noise_sigma":
                    if ":" in value:
                        chamber_kwargs["noise_sigma"] = _parse_mapping(value, "noise_sigma")
                    else:
                        chamber_kwargs["noise_sigma"] = float(value)
                elif key in int_keys:
                    chamber_kwargs[key] = int(value)
                elif key in float_keys:
                    chamber_kwargs[key] = float(value)
                else:
                    raise ConfigError(f"unknown [simgen] key: {key}")

        if (v := get("hi", "segments")) is not None:
            cfg = replace(cfg, segments=_parse_segments(v))
        if (v := get("hi", "cycle_length")) is not None:
            cfg = replace(cfg, hi_cycle_length=int(v))
        if (v := get("hi", "analysis_limit")) is not None:
            cfg = replace(cfg, analysis_limit=int(v))
        if parser.has_section("hi"):
            unknown_keys = set(parser["hi"]) - {"segments", "cycle_length", "analysis_limit"}
            if unknown_keys:
                raise ConfigError(f"unknown [hi] keys: {sorted(unknown_keys)}")

        if (v := get("features", "horizon")) is not None:
            cfg = replace(cfg, horizon=int(v))
        if (v := get("features", "train_frac")) is not None:
            cfg = replace(cfg, train_frac=float(v))
        if parser.has_section("features"):
            unknown_keys = set(parser["features"]) - {"horizon", "train_frac"}
            if unknown_keys:
                raise ConfigError(f"unknown [features] keys: {sorted(unknown_keys)}")

        if parser.has_section("models"):
            params: dict[str, dict[str, float]] = {}
            for key, value in parser["models"].items():
                kind, _, name = key.partition("_")
                if kind not in MODEL_KINDS or name not in DEFAULT_HYPERPARAMS[kind]:
                    raise ConfigError(f"unknown [models] key: {key}")
                # keep the default's type so counts stay integers
                if isinstance(DEFAULT_HYPERPARAMS[kind][name], int):
                    params.setdefault(kind, {})[name] = int(float(value))
                else:
                    params.setdefault(kind, {})[name] = float(value)
            merged = {k: dict(v) for k, v in cfg.model_params.items()}
            for kind, kv in params.items():
                merged.setdefault(kind, {}).update(kv)
            cfg = replace(cfg, model_params=merged)

        if (v := get("eval", "dump_predictions")) is not None:
            cfg = replace(cfg, dump_predictions=_parse_bool(v, "dump_predictions"))
        if parser.has_section("eval"):
            unknown_keys = set(parser["eval"]) - {"dump_predictions"}
            if unknown_keys:
                raise ConfigError(f"unknown [eval] keys: {sorted(unknown_keys)}")
    except ValueError as exc:
        raise ConfigError(f"bad config value: {exc}") from None

    if chamber_kwargs:
        cfg = replace(cfg, chamber=replace(cfg.chamber, **chamber_kwargs))
    return cfg


def load_config(path: Union[str, Path]) -> PipelineConfig:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    return config_from_ini(path.read_text(encoding="utf-8"))
