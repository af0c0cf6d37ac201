"""Domain types for pumpdown runs and multi-sensor pressure fusion.

A chamber is instrumented with four pressure gauges whose valid ranges
overlap to cover roughly 1e-6 to 1e3 mbar. ``composite_pressure`` fuses
one sample's readings into a single value by picking the
highest-priority gauge that is both valid and inside its own range;
``composite_curve`` applies the same rule to a whole run.

All types are immutable after construction and safe to share across
threads.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

import numpy as np

from .errors import ConfigError, DataError, NoValidReading


@dataclass(frozen=True)
class SensorSpec:
    """One pressure gauge: identity, usable range in mbar, priority rank.

    Lower ``priority`` wins when several gauges cover the same pressure
    (rank 1 is consulted first). Range bounds are inclusive.
    """

    sensor_id: str
    valid_range: tuple[float, float]
    priority: int

    def __post_init__(self) -> None:
        lo, hi = self.valid_range
        if not (0.0 < lo < hi):
            raise ConfigError(
                f"sensor {self.sensor_id}: valid_range must satisfy 0 < min < max, got {self.valid_range}"
            )

    def in_range(self, value: float) -> bool:
        lo, hi = self.valid_range
        return lo <= value <= hi


def check_sensor_priorities(sensors: Sequence[SensorSpec]) -> None:
    """Priorities must be unique within one chamber configuration."""
    ranks = [s.priority for s in sensors]
    if len(set(ranks)) != len(ranks):
        raise ConfigError(f"sensor priorities must be unique, got {ranks}")


@dataclass(frozen=True)
class PressureSample:
    """One timestamped set of gauge readings.

    ``readings`` maps sensor_id to pressure in mbar; an invalid or
    missing reading is represented as None, never as a sentinel number
    (sentinels would corrupt log-domain interpolation downstream).
    """

    t: float
    readings: Mapping[str, Optional[float]]

    def __post_init__(self) -> None:
        if self.t < 0:
            raise DataError(f"sample time must be non-negative, got {self.t}")
        for sid, value in self.readings.items():
            if value is not None and not (np.isfinite(value) and value > 0):
                raise DataError(f"sensor {sid}: reading must be finite and > 0, got {value}")


@dataclass(frozen=True)
class SegmentSpec:
    """A pressure interval (upper, lower) in mbar, 1-based index."""

    index: int
    upper: float
    lower: float

    def __post_init__(self) -> None:
        if not (self.upper > self.lower > 0):
            raise ConfigError(
                f"segment {self.index}: need upper > lower > 0, got ({self.upper}, {self.lower})"
            )

    @property
    def name(self) -> str:
        return f"dp{self.index}"


@dataclass(frozen=True)
class RunRecord:
    """One production run: identity, recipe, maintenance counter, samples.

    Sample data is stored columnar: ``t`` is the sample clock in seconds
    since run start (strictly increasing, nominal 0.5 s spacing) and
    ``readings`` is an (n_samples, n_sensors) array with NaN marking
    invalid readings, columns ordered like ``sensor_ids``.

    ``true_pressure`` / ``true_c`` / ``true_p_ss`` carry the generator's
    noiseless ground truth when the run is synthetic; they are test-only
    metadata, never exported as model features.
    """

    run_id: str
    asset_id: str
    start_time: float
    recipe_id: str
    n_runs: int
    t: np.ndarray
    readings: np.ndarray
    sensor_ids: tuple[str, ...]
    extra_channels: Mapping[str, np.ndarray] = field(default_factory=dict)
    true_pressure: Optional[np.ndarray] = None
    true_c: Optional[float] = None
    true_p_ss: Optional[float] = None

    def __post_init__(self) -> None:
        if self.n_runs < 0:
            raise DataError(f"run {self.run_id}: n_runs must be >= 0, got {self.n_runs}")
        if self.t.ndim != 1 or self.t.size == 0:
            raise DataError(f"run {self.run_id}: samples must be non-empty")
        if np.any(np.diff(self.t) <= 0):
            raise DataError(f"run {self.run_id}: sample times must be strictly increasing")
        if self.readings.shape != (self.t.size, len(self.sensor_ids)):
            raise DataError(
                f"run {self.run_id}: readings shape {self.readings.shape} does not match "
                f"{self.t.size} samples x {len(self.sensor_ids)} sensors"
            )
        for name, series in self.extra_channels.items():
            if np.asarray(series).shape != (self.t.size,):
                raise DataError(
                    f"run {self.run_id}: channel {name} has {np.asarray(series).size} "
                    f"samples, expected {self.t.size}"
                )
        valid = self.readings[~np.isnan(self.readings)]
        if valid.size and not (np.all(np.isfinite(valid)) and np.all(valid > 0)):
            raise DataError(f"run {self.run_id}: valid readings must be finite and > 0")

    @property
    def n_samples(self) -> int:
        return int(self.t.size)

    def sample(self, i: int) -> PressureSample:
        """Materialize sample i as a PressureSample."""
        row = self.readings[i]
        readings = {
            sid: (None if np.isnan(row[j]) else float(row[j]))
            for j, sid in enumerate(self.sensor_ids)
        }
        return PressureSample(t=float(self.t[i]), readings=readings)

    def samples(self):
        """Iterate samples in time order."""
        for i in range(self.n_samples):
            yield self.sample(i)


def composite_pressure(sample: PressureSample, sensors: Sequence[SensorSpec]) -> float:
    """Fuse one sample's readings into a single pressure in mbar.

    Returns the reading of the highest-priority sensor whose value is
    valid and inside that sensor's own range. Raises NoValidReading if
    no sensor qualifies. Pure and deterministic.
    """
    for spec in sorted(sensors, key=lambda s: s.priority):
        value = sample.readings.get(spec.sensor_id)
        if value is not None and spec.in_range(value):
            return float(value)
    raise NoValidReading(f"no valid in-range reading at t={sample.t}: {sample.readings}")


def composite_curve(run: RunRecord, sensors: Sequence[SensorSpec]) -> np.ndarray:
    """Apply the composite_pressure rule to every sample of a run.

    Vectorized equivalent of calling composite_pressure per sample;
    raises NoValidReading if any sample has no usable reading.
    """
    order = {sid: j for j, sid in enumerate(run.sensor_ids)}
    out = np.full(run.n_samples, np.nan)
    for spec in sorted(sensors, key=lambda s: s.priority):
        j = order.get(spec.sensor_id)
        if j is None:
            continue
        col = run.readings[:, j]
        lo, hi = spec.valid_range
        usable = np.isnan(out) & ~np.isnan(col) & (col >= lo) & (col <= hi)
        out[usable] = col[usable]
    if np.any(np.isnan(out)):
        i = int(np.flatnonzero(np.isnan(out))[0])
        raise NoValidReading(f"run {run.run_id}: no valid in-range reading at t={run.t[i]}")
    return out
