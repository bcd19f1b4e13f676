"""
Tenfold cross-validation harness.

Each rotation trains on seven folds, stops on one validation fold and is
scored on two test folds. Hyperparameters are tuned once on rotation 0 and
reused everywhere unless per-rotation tuning is requested.
"""

from __future__ import annotations

import csv
import logging
import statistics
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import TextIO

import numpy as np

from src.evaluation.metrics import rmse
from src.shdi.folds import DEFAULT_FOLDS, FoldSplit, kfold_split
from src.shdi.matrix import ShdiMatrix
from src.solver.params import HyperParams, TrainConfig
from src.solver.psnl import train
from src.tuning.space import SearchSpace, TpeConfig
from src.tuning.tpe import ObservationSet, run_search

logger = logging.getLogger(__name__)

CSV_HEADER = ("rotation", "rmse", "n_pairs", "train_seconds", "tune_seconds")


@dataclass
class EvalResult:
    rotation: int
    rmse: float
    n_pairs: int
    wall_time_train: float
    wall_time_tune: float = 0.0
    hyperparams: HyperParams | None = None
    # one RMSE per random initialisation; `rmse` is their mean
    init_rmses: list[float] = field(default_factory=list)
    seeds: list[int] = field(default_factory=list)


@dataclass
class CvSummary:
    results: list[EvalResult]
    seeds: list[int]
    observations: list[ObservationSet] = field(default_factory=list)

    @property
    def rmses(self) -> list[float]:
        return [r.rmse for r in self.results]

    @property
    def mean_rmse(self) -> float:
        return statistics.fmean(self.rmses)

    @property
    def std_rmse(self) -> float:
        return statistics.pstdev(self.rmses)

    @property
    def tune_seconds(self) -> float:
        return sum(r.wall_time_tune for r in self.results)

    @property
    def train_seconds(self) -> float:
        return sum(r.wall_time_train for r in self.results)

    def write_csv(self, out: TextIO, timings: bool = True) -> None:
        """`timings=False` zeroes the wall-clock columns so reruns compare byte for byte."""
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for r in self.results:
            train_s = f"{r.wall_time_train:.3f}" if timings else "0"
            tune_s = f"{r.wall_time_tune:.3f}" if timings else "0"
            writer.writerow([r.rotation, repr(r.rmse), r.n_pairs, train_s, tune_s])

    def render_table(self) -> str:
        lines = [
            "=" * 70,
            "Cross-validation summary",
            "=" * 70,
            f"{'rotation':>8}  {'rmse':>12}  {'pairs':>8}  {'train s':>10}  {'tune s':>10}",
        ]
        for r in self.results:
            lines.append(
                f"{r.rotation:>8}  {r.rmse:>12.6f}  {r.n_pairs:>8}  "
                f"{r.wall_time_train:>10.2f}  {r.wall_time_tune:>10.2f}"
            )
        lines.append("-" * 70)
        lines.append(f"RMSE: {self.mean_rmse:.6f} ± {self.std_rmse:.2e}")
        lines.append(f"Tuning: {self.tune_seconds:.2f}s   Testing: {self.train_seconds:.2f}s")
        return "\n".join(lines)


def init_seeds(seed: int, rotation: int, n_inits: int) -> list[int]:
    """Per-rotation initialisation seeds, independent of thread scheduling."""
    sequence = np.random.SeedSequence([seed, rotation])
    return [int(s) for s in sequence.generate_state(n_inits, dtype=np.uint32)]


def evaluate_rotation(
    mat: ShdiMatrix,
    split: FoldSplit,
    rotation: int,
    hp: HyperParams,
    cfg: TrainConfig,
    seeds: list[int],
) -> EvalResult:
    train_idx, valid_idx, test_idx = split.rotation(rotation)
    mat_train, mat_valid, mat_test = (
        mat.subset(train_idx), mat.subset(valid_idx), mat.subset(test_idx)
    )
    started = time.perf_counter()
    scores = []
    for seed in seeds:
        state, _ = train(mat_train, mat_valid, hp, cfg.model_copy(update={"seed": seed}))
        scores.append(rmse(mat_test, state))
    elapsed = time.perf_counter() - started
    result = EvalResult(
        rotation=rotation,
        rmse=statistics.fmean(scores),
        n_pairs=mat_test.edge_count,
        wall_time_train=elapsed,
        hyperparams=hp,
        init_rmses=scores,
        seeds=seeds,
    )
    logger.info("Rotation %d: test RMSE %.6f over %d pairs", rotation, result.rmse, result.n_pairs)
    return result


def cross_validate(
    mat: ShdiMatrix,
    cfg: TrainConfig,
    space: SearchSpace,
    tpe_cfg: TpeConfig,
    seed: int = 0,
    *,
    hp: HyperParams | None = None,
    tune: bool = True,
    retune_each_rotation: bool = False,
    n_inits: int = 1,
    k: int = DEFAULT_FOLDS,
    threads: int = 1,
    split: FoldSplit | None = None,
) -> CvSummary:
    """
    Run all k rotations and aggregate test RMSE.

    With `tune=False` the given `hp` (or defaults) is used for every rotation.
    A given `split` replaces the seeded one and sets k; `seed` still drives
    tuning and initialisation.
    """
    folds = split if split is not None else kfold_split(mat, k=k, seed=seed)
    k = folds.k
    observations: list[ObservationSet] = []

    def tuned_for(rotation: int) -> tuple[HyperParams, float]:
        train_idx, valid_idx, _ = folds.rotation(rotation)
        found = run_search(
            mat.subset(train_idx), mat.subset(valid_idx), space, tpe_cfg, cfg,
            seed=seed, threads=threads,
        )
        observations.append(found.observations)
        return found.best, found.wall_time

    chosen: list[tuple[HyperParams, float]]
    if not tune:
        chosen = [(hp or HyperParams(), 0.0)] * k
    elif retune_each_rotation:
        chosen = [tuned_for(r) for r in range(k)]
    else:
        best, seconds = tuned_for(0)
        chosen = [(best, seconds)] + [(best, 0.0)] * (k - 1)

    seeds = [init_seeds(seed, r, n_inits) for r in range(k)]

    def run(rotation: int) -> EvalResult:
        params, tune_seconds = chosen[rotation]
        result = evaluate_rotation(mat, folds, rotation, params, cfg, seeds[rotation])
        result.wall_time_tune = tune_seconds
        return result

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(run, range(k)))
    else:
        results = [run(r) for r in range(k)]

    summary = CvSummary(
        results=results, seeds=[s for group in seeds for s in group], observations=observations
    )
    logger.info("Cross-validation: RMSE %.6f ± %.2e", summary.mean_rmse, summary.std_rmse)
    return summary
