"""Synthetic pumpdown generator and closed-form physics oracle.

Stands in for a proprietary production dataset. The chamber is pumped
in two stages: a backing pump takes it from atmosphere down to the
crossover pressure as a pure exponential with time constant
``tau_stage1``; from there a turbopump pulls an exponential toward an
outgassing-limited floor

    p_ss(c) = q0 + q_per_unit * c  (+ optional seasonal drift)

so accumulated wall contamination ``c`` slows evacuation most near the
floor. The linearity of p_ss in c is an assumption of this generator,
not an established physical law. Every run also records the noiseless
truth so downstream derivations can be checked against the closed form.

Determinism: a (config, seed) pair fully determines the dataset. Assets
draw from independent seeded substreams, so per-asset generation could
run concurrently without changing a single byte of output.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Mapping, Optional, Sequence, Union

import numpy as np

from .core import RunRecord, SegmentSpec, SensorSpec, check_sensor_priorities
from .errors import ConfigError, InfeasibleSegment

SECONDS_PER_YEAR = 365.0 * 86400.0


def default_sensors() -> tuple[SensorSpec, ...]:
    """Four-gauge cascade covering 1e-6..1.2e3 mbar with overlaps.

    s2 is the precise mid-range gauge (it measures both health-index
    segment bounds); the high-vacuum gauges s3/s4 are markedly noisier,
    as cold-cathode style gauges tend to be.
    """
    return (
        SensorSpec("s1", (5e-1, 2.0e3), priority=4),
        SensorSpec("s2", (1e-3, 5.0), priority=1),
        SensorSpec("s3", (1.2e-4, 1.5e-3), priority=2),
        SensorSpec("s4", (1e-6, 1.5e-3), priority=3),
    )


def default_segments() -> tuple[SegmentSpec, ...]:
    """Default pressure intervals in mbar.

    dp1 ends where the turbopump engages; dp2 is the low-pressure
    interval that carries the contamination signal. dp3..dp5 bounds are
    this artifact's own defaults. Overlaps/gaps between segments are
    allowed because every duration is measured from crossings
    independently.
    """
    return (
        SegmentSpec(1, 1013.0, 0.02),
        SegmentSpec(2, 0.03, 0.002),
        SegmentSpec(3, 0.002, 5e-4),
        SegmentSpec(4, 5e-4, 2e-4),
        SegmentSpec(5, 2e-4, 1e-4),
    )


DEFAULT_NOISE_SIGMA: Mapping[str, float] = {
    "s1": 0.05,
    "s2": 0.0005,
    "s3": 0.05,
    "s4": 0.30,
}


@dataclass(frozen=True)
class RecipeSpec:
    """A product recipe: how much contamination a run deposits and how
    it scales the non-pumpdown process time."""

    recipe_id: str
    deposition_weight: float
    duration_scale: float = 1.0

    def __post_init__(self) -> None:
        if self.deposition_weight < 0:
            raise ConfigError(f"recipe {self.recipe_id}: deposition_weight must be >= 0")
        if self.duration_scale <= 0:
            raise ConfigError(f"recipe {self.recipe_id}: duration_scale must be > 0")


def default_recipes() -> tuple[RecipeSpec, ...]:
    return (
        RecipeSpec("std", deposition_weight=0.8, duration_scale=1.0),
        RecipeSpec("light", deposition_weight=0.0, duration_scale=0.85),
        RecipeSpec("heavy", deposition_weight=2.4, duration_scale=1.25),
    )


DEFAULT_RECIPE_PROBS: Mapping[str, float] = {"std": 0.5, "light": 0.3, "heavy": 0.2}


@dataclass(frozen=True)
class ChamberState:
    """Latent chamber condition between runs.

    ``weather`` is a slow ambient offset on the outgassing floor in
    mbar (humidity/temperature fronts); unlike contamination it is not
    reset by maintenance and is not directly measurable.
    """

    contamination: float = 0.0
    n_runs: int = 0
    seasonal_phase: float = 0.0
    weather: float = 0.0

    def __post_init__(self) -> None:
        if self.contamination < 0:
            raise ConfigError(f"contamination must be >= 0, got {self.contamination}")


@dataclass(frozen=True)
class ChamberConfig:
    """Physics, sensor and sampling parameters of one chamber model."""

    tau_stage1: float = 2.5
    tau_stage2: float = 4.0
    crossover_pressure: float = 0.02
    p_atm: float = 1013.0
    base_outgassing_q0: float = 4.0e-6
    outgassing_per_unit: float = 4.8e-7
    target_pressure: float = 9.5e-5
    sample_dt: float = 0.5
    tail_samples: int = 4
    max_samples: int = 200_000
    # multiplicative log-normal noise on every gauge reading; a scalar
    # applies to all sensors, a mapping sets per-sensor sigmas
    noise_sigma: Union[float, Mapping[str, float]] = field(
        default_factory=lambda: dict(DEFAULT_NOISE_SIGMA)
    )
    sensors: tuple[SensorSpec, ...] = field(default_factory=default_sensors)
    # additive drift on p_ss: amplitude * sin(2*pi*phase + pi), one
    # period per year, rising over the late-year months
    seasonal_amplitude: float = 1.2e-5
    seasonal_period_s: float = SECONDS_PER_YEAR
    # slow AR(1) ambient wander on p_ss (stationary sigma in mbar,
    # per-run correlation); persists across maintenance
    weather_sigma: float = 3.0e-6
    weather_rho: float = 0.99
    maintenance_residual: float = 0.0
    # production timeline
    time_origin: float = 1.6e9
    run_interval_s: float = 78840.0
    # extra process channels
    temp_base_c: float = 21.0
    temp_seasonal_amplitude: float = 3.0
    temp_run_noise: float = 2.5
    temp_sample_noise: float = 0.1
    flow_base: float = 12.0
    flow_per_weight: float = 3.0
    flow_run_noise: float = 0.3
    flow_sample_noise: float = 0.2

    def __post_init__(self) -> None:
        if self.tau_stage1 <= 0 or self.tau_stage2 <= 0:
            raise ConfigError("pump time constants must be > 0")
        if not (0 < self.target_pressure < self.crossover_pressure < self.p_atm):
            raise ConfigError(
                "need 0 < target_pressure < crossover_pressure < p_atm, got "
                f"({self.target_pressure}, {self.crossover_pressure}, {self.p_atm})"
            )
        if self.base_outgassing_q0 < 0 or self.outgassing_per_unit < 0:
            raise ConfigError("outgassing coefficients must be >= 0")
        if self.sample_dt <= 0:
            raise ConfigError("sample_dt must be > 0")
        if self.seasonal_amplitude < 0:
            raise ConfigError("seasonal_amplitude must be >= 0")
        if self.weather_sigma < 0 or not (0.0 <= self.weather_rho < 1.0):
            raise ConfigError("need weather_sigma >= 0 and 0 <= weather_rho < 1")
        if not self.sensors:
            raise ConfigError("at least one sensor is required")
        check_sensor_priorities(self.sensors)
        for sigma in self.sigma_by_sensor().values():
            if sigma < 0:
                raise ConfigError("noise sigma must be >= 0")

    def sigma_by_sensor(self) -> dict[str, float]:
        if isinstance(self.noise_sigma, (int, float)):
            return {s.sensor_id: float(self.noise_sigma) for s in self.sensors}
        out = {}
        for s in self.sensors:
            if s.sensor_id not in self.noise_sigma:
                raise ConfigError(f"noise_sigma mapping is missing sensor {s.sensor_id}")
            out[s.sensor_id] = float(self.noise_sigma[s.sensor_id])
        return out

    def seasonal_drift(self, phase: float) -> float:
        """Additive p_ss offset in mbar at a given fraction of the year."""
        if self.seasonal_amplitude == 0:
            return 0.0
        return self.seasonal_amplitude * math.sin(2.0 * math.pi * phase + math.pi)

    def steady_state_pressure(
        self, contamination: float, phase: float = 0.0, weather: float = 0.0
    ) -> float:
        """Outgassing floor p_ss(c) in mbar, clamped at >= 0."""
        p_ss = (
            self.base_outgassing_q0
            + self.outgassing_per_unit * contamination
            + self.seasonal_drift(phase)
            + weather
        )
        return max(p_ss, 0.0)


def closed_form_segment_duration(p_a: float, p_b: float, tau: float, p_ss: float) -> float:
    """Time for an exponential pumpdown with floor p_ss to go p_a -> p_b.

        t = tau * ln((p_a - p_ss) / (p_b - p_ss))

    Strictly increasing in p_ss for fixed bounds. Raises
    InfeasibleSegment when the pump can never reach p_b.
    """
    if tau <= 0:
        raise ConfigError(f"tau must be > 0, got {tau}")
    if p_ss < 0 or not p_a > p_b:
        raise ConfigError(f"need p_a > p_b and p_ss >= 0, got ({p_a}, {p_b}, {p_ss})")
    if p_b <= p_ss:
        raise InfeasibleSegment(
            f"target {p_b} mbar is at or below the steady-state floor {p_ss} mbar"
        )
    return tau * math.log((p_a - p_ss) / (p_b - p_ss))


def true_time_to_pressure(pressure: float, config: ChamberConfig, p_ss: float) -> float:
    """Time since run start at which the noiseless curve reaches a pressure.

    Piecewise composition of the closed form over the two pump stages;
    a pressure at or above atmosphere maps to t = 0.
    """
    if pressure >= config.p_atm:
        return 0.0
    if pressure >= config.crossover_pressure:
        return closed_form_segment_duration(config.p_atm, pressure, config.tau_stage1, 0.0)
    t_cross = closed_form_segment_duration(
        config.p_atm, config.crossover_pressure, config.tau_stage1, 0.0
    )
    return t_cross + closed_form_segment_duration(
        config.crossover_pressure, pressure, config.tau_stage2, p_ss
    )


def true_segment_duration(segment: SegmentSpec, config: ChamberConfig, p_ss: float) -> float:
    """Noiseless duration of one pressure interval, via the closed form."""
    return true_time_to_pressure(segment.lower, config, p_ss) - true_time_to_pressure(
        segment.upper, config, p_ss
    )


def true_pressure_curve(t: np.ndarray, config: ChamberConfig, p_ss: float) -> np.ndarray:
    """Noiseless pressure at each sample time of the two-stage pumpdown."""
    t_cross = config.tau_stage1 * math.log(config.p_atm / config.crossover_pressure)
    stage1 = config.p_atm * np.exp(-t / config.tau_stage1)
    stage2 = p_ss + (config.crossover_pressure - p_ss) * np.exp(
        -(t - t_cross) / config.tau_stage2
    )
    return np.where(t < t_cross, stage1, stage2)


def advance_contamination(
    state: ChamberState,
    recipe: RecipeSpec,
    maintenance_due: bool,
    residual: float = 0.0,
) -> ChamberState:
    """State transition after one production run.

    Maintenance wipes contamination down to the configured residual and
    resets the run counter; otherwise the run's deposition accumulates.
    """
    if maintenance_due:
        return replace(state, contamination=residual, n_runs=0)
    return replace(
        state,
        contamination=state.contamination + recipe.deposition_weight,
        n_runs=state.n_runs + 1,
    )


def simulate_run(
    state: ChamberState,
    recipe: RecipeSpec,
    config: ChamberConfig,
    seed: Union[int, np.random.Generator],
    run_id: str = "run-0",
    asset_id: str = "asset1",
    start_time: Optional[float] = None,
) -> RunRecord:
    """Simulate one pumpdown and return its RunRecord.

    The noiseless curve is sampled every ``sample_dt`` seconds until it
    reaches ``target_pressure``, plus a short hold so the floor region
    is observable; gauge readings are the true pressure under
    per-sensor multiplicative log-normal noise, marked invalid outside
    each gauge's range. Ground truth (curve, contamination, floor) is
    attached for test use. Deterministic given the seed.
    """
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    p_ss = config.steady_state_pressure(
        state.contamination, state.seasonal_phase, state.weather
    )
    if config.target_pressure <= p_ss:
        raise ConfigError(
            f"target pressure {config.target_pressure} mbar unreachable: floor is {p_ss} mbar"
        )
    t_target = true_time_to_pressure(config.target_pressure, config, p_ss)
    n_pump = int(math.ceil(t_target / config.sample_dt)) + 1
    n_samples = n_pump + config.tail_samples
    if n_samples > config.max_samples:
        raise ConfigError(f"run would exceed max_samples ({n_samples} > {config.max_samples})")

    t = np.arange(n_samples, dtype=np.float64) * config.sample_dt
    truth = true_pressure_curve(t, config, p_ss)

    sigmas = config.sigma_by_sensor()
    z = rng.standard_normal((n_samples, len(config.sensors)))
    readings = np.empty_like(z)
    for j, spec in enumerate(config.sensors):
        col = truth * np.exp(sigmas[spec.sensor_id] * z[:, j])
        lo, hi = spec.valid_range
        col[(col < lo) | (col > hi)] = np.nan
        readings[:, j] = col

    temp_level = (
        config.temp_base_c
        + config.temp_seasonal_amplitude * math.sin(2.0 * math.pi * state.seasonal_phase + math.pi)
        + config.temp_run_noise * rng.standard_normal()
    )
    temp = temp_level + config.temp_sample_noise * rng.standard_normal(n_samples)
    flow_level = (
        config.flow_base
        + config.flow_per_weight * recipe.deposition_weight
        + config.flow_run_noise * rng.standard_normal()
    )
    flow = flow_level + config.flow_sample_noise * rng.standard_normal(n_samples)

    if start_time is None:
        start_time = config.time_origin + state.seasonal_phase * config.seasonal_period_s
    return RunRecord(
        run_id=run_id,
        asset_id=asset_id,
        start_time=float(start_time),
        recipe_id=recipe.recipe_id,
        n_runs=state.n_runs,
        t=t,
        readings=readings,
        sensor_ids=tuple(s.sensor_id for s in config.sensors),
        extra_channels={"temp_c": temp, "gas_flow": flow},
        true_pressure=truth,
        true_c=state.contamination,
        true_p_ss=p_ss,
    )


@dataclass(frozen=True)
class PlanEntry:
    """Scheduled recipe for one future run of an asset."""

    asset_id: str
    position: int
    recipe_id: str


@dataclass(frozen=True)
class SimDataset:
    """Generator output: runs ordered by (asset_id, start_time) plus the
    full recipe plan, so a forecaster legitimately knows future recipes."""

    runs: tuple[RunRecord, ...]
    plan: tuple[PlanEntry, ...]

    def plan_by_asset(self) -> dict[str, list[str]]:
        out: dict[str, list[str]] = {}
        for entry in self.plan:
            out.setdefault(entry.asset_id, []).append(entry.recipe_id)
        return out


def simulate_history(
    config: ChamberConfig,
    recipes: Sequence[RecipeSpec],
    n_assets: int,
    n_runs_total: int,
    cycle_length: int,
    seed: int,
    recipe_probs: Optional[Mapping[str, float]] = None,
) -> SimDataset:
    """Generate a multi-asset production history.

    ``n_runs_total`` runs are spread as evenly as possible over
    ``n_assets`` assets; each asset is cleaned every ``cycle_length``
    runs. Recipes are drawn per run from ``recipe_probs`` (uniform when
    omitted) by a dedicated schedule stream, then each asset's runs are
    generated in order from its own seeded substream.
    """
    if n_assets < 1:
        raise ConfigError(f"n_assets must be >= 1, got {n_assets}")
    if cycle_length < 2:
        raise ConfigError(f"cycle_length must be >= 2, got {cycle_length}")
    if n_runs_total < 1:
        raise ConfigError(f"n_runs_total must be >= 1, got {n_runs_total}")
    if not recipes:
        raise ConfigError("at least one recipe is required")

    recipe_by_id = {r.recipe_id: r for r in recipes}
    if len(recipe_by_id) != len(recipes):
        raise ConfigError("recipe ids must be unique")
    if recipe_probs is None:
        probs = np.full(len(recipes), 1.0 / len(recipes))
    else:
        missing = [r.recipe_id for r in recipes if r.recipe_id not in recipe_probs]
        if missing:
            raise ConfigError(f"recipe_probs is missing recipes: {missing}")
        probs = np.array([float(recipe_probs[r.recipe_id]) for r in recipes])
        if np.any(probs < 0) or probs.sum() <= 0:
            raise ConfigError("recipe probabilities must be non-negative and sum > 0")
        probs = probs / probs.sum()

    base, extra = divmod(n_runs_total, n_assets)
    counts = [base + (1 if a < extra else 0) for a in range(n_assets)]
    asset_ids = [f"asset{a + 1}" for a in range(n_assets)]

    schedule_rng = np.random.default_rng(np.random.SeedSequence((seed, 90001)))
    plan: list[PlanEntry] = []
    plan_ids: dict[str, list[str]] = {}
    for asset_id, count in zip(asset_ids, counts):
        draws = schedule_rng.choice(len(recipes), size=count, p=probs)
        ids = [recipes[int(i)].recipe_id for i in draws]
        plan_ids[asset_id] = ids
        plan.extend(PlanEntry(asset_id, pos, rid) for pos, rid in enumerate(ids))

    runs: list[RunRecord] = []
    sigma_w = config.weather_sigma
    rho = config.weather_rho
    step_w = sigma_w * math.sqrt(1.0 - rho * rho)
    for a_idx, (asset_id, count) in enumerate(zip(asset_ids, counts)):
        rng = np.random.default_rng(np.random.SeedSequence((seed, a_idx)))
        state = ChamberState(contamination=config.maintenance_residual, n_runs=0)
        start = config.time_origin + a_idx * config.run_interval_s / n_assets
        weather = sigma_w * float(rng.standard_normal()) if sigma_w > 0 else 0.0
        for pos in range(count):
            if sigma_w > 0 and pos > 0:
                weather = rho * weather + step_w * float(rng.standard_normal())
            # clamp keeps the floor safely below the pumpdown target
            weather = min(max(weather, -3.0 * sigma_w), 3.0 * sigma_w)
            recipe = recipe_by_id[plan_ids[asset_id][pos]]
            phase = ((start - config.time_origin) % config.seasonal_period_s) / config.seasonal_period_s
            state = replace(state, seasonal_phase=phase, weather=weather)
            runs.append(
                simulate_run(
                    state,
                    recipe,
                    config,
                    rng,
                    run_id=f"{asset_id}-{pos:05d}",
                    asset_id=asset_id,
                    start_time=start,
                )
            )
            maintenance_due = (pos + 1) % cycle_length == 0
            state = advance_contamination(
                state, recipe, maintenance_due, residual=config.maintenance_residual
            )
            start += config.run_interval_s * recipe.duration_scale

    runs.sort(key=lambda r: (r.asset_id, r.start_time))
    return SimDataset(runs=tuple(runs), plan=tuple(plan))
