"""Supervised dataset construction for horizon-10 HI forecasting.

Each row describes one run t and predicts the health index of the run
ten positions later on the same asset. Inputs available at time t are
the run's per-channel aggregates (mean, min, max, population std), the
maintenance counter, the current recipe, and the planned recipes of the
next ten runs; nothing from the future leaks in. One-hot vocabularies
and standardization statistics come from the chronological train
partition only.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Mapping, Optional, Sequence, Union

import numpy as np

from .core import RunRecord, SensorSpec, composite_curve
from .errors import (
    BadPlanLength,
    DataError,
    EmptyChannel,
    TooFewRows,
    VocabularyEmpty,
)
from .hi import HiSeries

AGGREGATE_SUFFIXES = ("mean", "min", "max", "std")


def aggregate_channels(
    run: RunRecord, sensors: Sequence[SensorSpec]
) -> dict[str, tuple[float, float, float, float]]:
    """Per-channel (mean, min, max, population std) for one run.

    Channels are the fused composite pressure plus every extra process
    channel; population std keeps n=1 channels well defined.
    """
    channels: dict[str, np.ndarray] = {"pressure": composite_curve(run, sensors)}
    channels.update(run.extra_channels)
    out = {}
    for name in sorted(channels):
        values = np.asarray(channels[name], dtype=np.float64)
        if values.size == 0:
            raise EmptyChannel(f"run {run.run_id}: channel {name} is empty")
        out[name] = (
            float(values.mean()),
            float(values.min()),
            float(values.max()),
            float(values.std()),
        )
    return out


def encode_recipe_plan(
    plan: Sequence[str], vocab: Sequence[str], horizon: int = 10
) -> np.ndarray:
    """One-hot encode the next ``horizon`` recipes against a fixed vocabulary.

    Block b encodes plan[b]; a recipe missing from the vocabulary
    encodes to an all-zero block (open-vocabulary fallback).
    """
    if len(plan) != horizon:
        raise BadPlanLength(f"plan length {len(plan)} != horizon {horizon}")
    index = {rid: j for j, rid in enumerate(vocab)}
    out = np.zeros(horizon * len(vocab), dtype=np.float64)
    for b, rid in enumerate(plan):
        j = index.get(rid)
        if j is not None:
            out[b * len(vocab) + j] = 1.0
    return out


@dataclass(frozen=True)
class RowMeta:
    """Bookkeeping for one supervised row (current run t, target run t+h)."""

    asset_id: str
    run_id: str
    run_id_target: str
    start_time: float
    n_runs: int
    n_runs_target: int
    hi_current: float
    recipe_id: str
    plan: tuple[str, ...]


@dataclass(frozen=True)
class SupervisedSet:
    """Feature matrix, target vector and row metadata, time ordered.

    Straight out of ``build_supervised`` the matrix holds only the
    numeric block; ``chrono_split`` appends the recipe one-hot blocks
    once the training vocabulary is known and sets ``vocab``.
    """

    X: np.ndarray
    y: np.ndarray
    feature_names: tuple[str, ...]
    meta: tuple[RowMeta, ...]
    vocab: Optional[tuple[str, ...]] = None

    @property
    def n_rows(self) -> int:
        return int(self.y.size)


def build_supervised(
    runs: Sequence[RunRecord],
    hi: Union[HiSeries, Mapping[str, float]],
    plan: Optional[Mapping[str, Sequence[str]]],
    sensors: Sequence[SensorSpec],
    horizon: int = 10,
) -> SupervisedSet:
    """One row per run that has a same-asset run ``horizon`` positions later.

    ``hi`` is the derived health index, either as a HiSeries or a plain
    run_id -> seconds mapping. ``plan`` maps asset_id to that asset's
    scheduled recipe sequence; when omitted, the realized recipe
    sequence stands in for it (they coincide for generated data). Rows
    spanning a maintenance event are kept: the post-cleaning drop is
    part of the target. Rows are sorted by start_time.
    """
    if horizon < 1:
        raise DataError(f"horizon must be >= 1, got {horizon}")
    hi_by_run = hi.by_run_id() if hasattr(hi, "by_run_id") else dict(hi)
    by_asset: dict[str, list[RunRecord]] = {}
    for run in runs:
        by_asset.setdefault(run.asset_id, []).append(run)

    rows = []
    for asset_id in sorted(by_asset):
        seq = sorted(by_asset[asset_id], key=lambda r: (r.start_time, r.run_id))
        recipe_seq = list(plan[asset_id]) if plan is not None else [r.recipe_id for r in seq]
        if len(recipe_seq) < len(seq):
            raise DataError(f"plan for {asset_id} covers {len(recipe_seq)} of {len(seq)} runs")
        for t in range(len(seq) - horizon):
            cur, tgt = seq[t], seq[t + horizon]
            if cur.run_id not in hi_by_run or tgt.run_id not in hi_by_run:
                continue
            aggs = aggregate_channels(cur, sensors)
            numeric = [v for name in sorted(aggs) for v in aggs[name]]
            numeric.append(float(cur.n_runs))
            rows.append(
                (
                    cur.start_time,
                    cur.run_id,
                    np.array(numeric, dtype=np.float64),
                    hi_by_run[tgt.run_id],
                    RowMeta(
                        asset_id=asset_id,
                        run_id=cur.run_id,
                        run_id_target=tgt.run_id,
                        start_time=cur.start_time,
                        n_runs=cur.n_runs,
                        n_runs_target=tgt.n_runs,
                        hi_current=hi_by_run[cur.run_id],
                        recipe_id=cur.recipe_id,
                        plan=tuple(recipe_seq[t + 1 : t + 1 + horizon]),
                    ),
                )
            )

    if not rows:
        raise TooFewRows("no supervised rows could be built")
    rows.sort(key=lambda r: (r[0], r[1]))

    channel_names = sorted(aggregate_channels(runs[0], sensors)) if runs else []
    names = tuple(
        f"{ch}_{suffix}" for ch in channel_names for suffix in AGGREGATE_SUFFIXES
    ) + ("n_runs",)
    X = np.stack([r[2] for r in rows])
    y = np.array([r[3] for r in rows], dtype=np.float64)
    meta = tuple(r[4] for r in rows)
    return SupervisedSet(X=X, y=y, feature_names=names, meta=meta, vocab=None)


def _encode_with_vocab(sset: SupervisedSet, vocab: tuple[str, ...], horizon: int) -> SupervisedSet:
    """Append current-recipe and plan one-hot blocks to the numeric matrix."""
    blocks = []
    for m in sset.meta:
        current = encode_recipe_plan([m.recipe_id], vocab, horizon=1)
        future = encode_recipe_plan(m.plan, vocab, horizon=horizon)
        blocks.append(np.concatenate([current, future]))
    names = list(sset.feature_names)
    names += [f"recipe_{rid}" for rid in vocab]
    for b in range(1, horizon + 1):
        names += [f"plan{b}_{rid}" for rid in vocab]
    X = np.hstack([sset.X, np.stack(blocks)])
    return replace(sset, X=X, feature_names=tuple(names), vocab=vocab)


def chrono_split(
    sset: SupervisedSet, train_frac: float = 0.7
) -> tuple[SupervisedSet, SupervisedSet]:
    """Split time-ordered rows into the oldest train_frac and the rest.

    The recipe vocabulary is collected from the train partition only
    (current recipes plus planned recipes, both known at train time)
    and applied to both partitions, so a test-only recipe encodes to a
    zero block and never changes a train feature.
    """
    if sset.n_rows < 10:
        raise TooFewRows(f"need >= 10 rows to split, got {sset.n_rows}")
    if not (0.0 < train_frac < 1.0):
        raise DataError(f"train_frac must be in (0, 1), got {train_frac}")
    n_train = int(np.floor(train_frac * sset.n_rows))
    if n_train == 0 or n_train == sset.n_rows:
        raise TooFewRows(f"degenerate split sizes ({n_train}, {sset.n_rows - n_train})")

    horizon = len(sset.meta[0].plan)
    seen: set[str] = set()
    for m in sset.meta[:n_train]:
        seen.add(m.recipe_id)
        seen.update(m.plan)
    if not seen:
        raise VocabularyEmpty("no recipes in the train partition")
    vocab = tuple(sorted(seen))

    def take(lo: int, hi: int) -> SupervisedSet:
        part = SupervisedSet(
            X=sset.X[lo:hi],
            y=sset.y[lo:hi],
            feature_names=sset.feature_names,
            meta=sset.meta[lo:hi],
            vocab=None,
        )
        return _encode_with_vocab(part, vocab, horizon)

    return take(0, n_train), take(n_train, sset.n_rows)


@dataclass(frozen=True)
class Standardizer:
    """Per-column z-scoring frozen to train statistics.

    Constant train columns (sigma = 0) map to 0 rather than NaN.
    """

    mu: np.ndarray
    sigma: np.ndarray

    @classmethod
    def fit(cls, train_X: np.ndarray) -> "Standardizer":
        if train_X.size == 0:
            raise DataError("cannot standardize an empty matrix")
        return cls(mu=train_X.mean(axis=0), sigma=train_X.std(axis=0))

    def transform(self, X: np.ndarray) -> np.ndarray:
        safe = np.where(self.sigma == 0.0, 1.0, self.sigma)
        out = (X - self.mu) / safe
        return np.where(self.sigma == 0.0, 0.0, out)


def standardize(train_X: np.ndarray, X: np.ndarray) -> np.ndarray:
    """z-score ``X`` using column statistics of ``train_X``."""
    return Standardizer.fit(train_X).transform(X)
