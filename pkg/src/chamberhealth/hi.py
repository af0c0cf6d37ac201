"""Health-index derivation from pumpdown curves.

Pipeline: slice each run's composite pressure curve into configured
pressure intervals, measure the evacuation time through each interval,
regress those durations on the runs-since-maintenance counter, and
promote the interval whose fit explains the most variance to be the
health index. The HI of a run is then simply the measured duration of
the selected interval, in seconds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .core import RunRecord, SegmentSpec, SensorSpec, composite_curve
from .errors import (
    DegenerateInput,
    EmptyCurve,
    NoCleanRuns,
    NoViableSegment,
    ZeroBaseline,
    ZeroVariance,
)

# clean-machine baseline pools runs with n_runs in {0..9}
CLEAN_RUN_MAX_N = 9


@dataclass(frozen=True)
class DegradationFit:
    """Per-segment linear degradation fit: duration = k * n_runs + d."""

    segment: SegmentSpec
    k: float
    d: float
    r2: float
    t_bar: float
    alpha: float
    n_points: int


@dataclass(frozen=True)
class HiEntry:
    run_id: str
    asset_id: str
    start_time: float
    n_runs: int
    hi: float


@dataclass(frozen=True)
class HiSeries:
    """Health-index value per complete pumpdown run."""

    entries: tuple[HiEntry, ...]
    selected_segment: SegmentSpec

    def by_run_id(self) -> dict[str, float]:
        return {e.run_id: e.hi for e in self.entries}


def first_crossing_time(t: np.ndarray, pressure: np.ndarray, threshold: float) -> Optional[float]:
    """First time the curve reaches <= threshold, or None if it never does.

    Interpolates linearly in log(pressure) between the bracketing
    samples, which is exact for exponential decay. Later re-crossings
    caused by noise are ignored.
    """
    if t.size == 0:
        raise EmptyCurve("pressure curve has no samples")
    below = pressure <= threshold
    if not below.any():
        return None
    i = int(np.argmax(below))
    if i == 0:
        return float(t[0])
    # pressure[i-1] > threshold >= pressure[i], both > 0
    lo = math.log(pressure[i])
    hi = math.log(pressure[i - 1])
    frac = (hi - math.log(threshold)) / (hi - lo)
    return float(t[i - 1] + frac * (t[i] - t[i - 1]))


def extract_segment_duration(
    t: np.ndarray, pressure: np.ndarray, segment: SegmentSpec
) -> Optional[float]:
    """Evacuation time through one pressure interval, or None if the
    curve never crosses one of the bounds (incomplete pumpdown)."""
    t_upper = first_crossing_time(t, pressure, segment.upper)
    t_lower = first_crossing_time(t, pressure, segment.lower)
    if t_upper is None or t_lower is None:
        return None
    return t_lower - t_upper


def fit_ols(n_runs: np.ndarray, durations: np.ndarray) -> tuple[float, float]:
    """Ordinary least squares with intercept: duration = k * n_runs + d.

    Computed from centered sums (the test suite checks it against an
    explicit normal-equations solve).
    """
    x = np.asarray(n_runs, dtype=np.float64)
    y = np.asarray(durations, dtype=np.float64)
    if x.size < 2 or y.size != x.size:
        raise DegenerateInput(f"need >= 2 paired points, got {x.size}")
    x_bar = x.mean()
    y_bar = y.mean()
    sxx = float(np.sum((x - x_bar) ** 2))
    if sxx == 0.0:
        raise DegenerateInput("all n_runs values are equal")
    k = float(np.sum((x - x_bar) * (y - y_bar)) / sxx)
    d = float(y_bar - k * x_bar)
    return k, d


def r_squared(n_runs: np.ndarray, durations: np.ndarray, k: float, d: float) -> float:
    """Coefficient of determination 1 - SSres/SStot about the mean."""
    x = np.asarray(n_runs, dtype=np.float64)
    y = np.asarray(durations, dtype=np.float64)
    if y.size < 2:
        raise DegenerateInput(f"need >= 2 points, got {y.size}")
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    if ss_tot == 0.0:
        raise ZeroVariance("constant durations: R^2 undefined")
    ss_res = float(np.sum((y - (k * x + d)) ** 2))
    return 1.0 - ss_res / ss_tot


def clean_baseline(n_runs: np.ndarray, durations: np.ndarray) -> float:
    """Mean duration over runs with n_runs <= 9, pooled across cycles."""
    x = np.asarray(n_runs)
    y = np.asarray(durations, dtype=np.float64)
    mask = x <= CLEAN_RUN_MAX_N
    if not mask.any():
        raise NoCleanRuns("no runs with n_runs <= 9 in the analysis subset")
    return float(y[mask].mean())


def impact(k: float, t_bar: float, cycle_length: int = 100) -> float:
    """Relative duration growth over one cleaning cycle, in percent.

    impact(0.12, 21) = 57.1 %/cycle at the default 100-run cycle.
    """
    if t_bar <= 0:
        raise ZeroBaseline(f"clean baseline must be > 0, got {t_bar}")
    return k * cycle_length / t_bar * 100.0


def run_segment_durations(
    runs: Sequence[RunRecord],
    sensors: Sequence[SensorSpec],
    segments: Sequence[SegmentSpec],
) -> list[dict[int, Optional[float]]]:
    """Measured duration of every segment for every run (None = incomplete)."""
    out = []
    for run in runs:
        curve = composite_curve(run, sensors)
        out.append({seg.index: extract_segment_duration(run.t, curve, seg) for seg in segments})
    return out


def select_analysis_subset(
    runs: Sequence[RunRecord], limit: int = 400
) -> list[int]:
    """Indices of the derivation subset: the (asset, recipe) pair with the
    most runs, oldest first, capped at ``limit`` runs.

    Restricting to a single asset and recipe rules out recipe-dependent
    factors in the degradation fit; the HI itself is extracted for all
    runs afterwards.
    """
    groups: dict[tuple[str, str], list[int]] = {}
    for i, run in enumerate(runs):
        groups.setdefault((run.asset_id, run.recipe_id), []).append(i)
    key = min(groups, key=lambda g: (-len(groups[g]), g))
    chosen = sorted(groups[key], key=lambda i: (runs[i].start_time, runs[i].run_id))
    return chosen[:limit]


def derive_hi(
    runs: Sequence[RunRecord],
    sensors: Sequence[SensorSpec],
    segments: Sequence[SegmentSpec],
    cycle_length: int = 100,
    analysis_limit: int = 400,
) -> tuple[list[DegradationFit], HiSeries]:
    """Fit every segment on the analysis subset and select the HI segment.

    Selection is argmax R^2, ties broken by larger impact, then lower
    segment index. Incomplete durations are excluded per segment;
    segments that end up degenerate or constant are skipped entirely.
    The returned HiSeries covers ALL runs where the winning segment
    completed, not just the analysis subset.
    """
    if not runs:
        raise EmptyCurve("no runs to derive a health index from")
    durations = run_segment_durations(runs, sensors, segments)
    subset = select_analysis_subset(runs, analysis_limit)

    fits: list[DegradationFit] = []
    for seg in segments:
        pts = [
            (runs[i].n_runs, durations[i][seg.index])
            for i in subset
            if durations[i][seg.index] is not None
        ]
        if not pts:
            continue
        x = np.array([p[0] for p in pts], dtype=np.float64)
        y = np.array([p[1] for p in pts], dtype=np.float64)
        try:
            k, d = fit_ols(x, y)
            r2 = r_squared(x, y, k, d)
            t_bar = clean_baseline(x, y)
            alpha = impact(k, t_bar, cycle_length)
        except (DegenerateInput, ZeroVariance, NoCleanRuns, ZeroBaseline):
            continue
        fits.append(
            DegradationFit(
                segment=seg, k=k, d=d, r2=r2, t_bar=t_bar, alpha=alpha, n_points=x.size
            )
        )

    if not fits:
        raise NoViableSegment("every segment was degenerate or constant on the analysis subset")

    best = min(fits, key=lambda f: (-f.r2, -f.alpha, f.segment.index))
    entries = tuple(
        HiEntry(
            run_id=run.run_id,
            asset_id=run.asset_id,
            start_time=run.start_time,
            n_runs=run.n_runs,
            hi=durations[i][best.segment.index],
        )
        for i, run in enumerate(runs)
        if durations[i][best.segment.index] is not None
    )
    return fits, HiSeries(entries=entries, selected_segment=best.segment)
