"""
Tree-structured Parzen Estimator search over s = {lambda, gamma, mu, eta}.

Observed trials are ranked by validation RMSE b; the best ceil(theta * beta)
form the "good" set with density l(s), the rest the "bad" set with density
g(s). Candidates are drawn from l and the one maximizing l(s) / g(s) is
suggested. The four parameters are modelled independently, so l and g are
products of one-dimensional Parzen estimators.
"""

from __future__ import annotations

import logging
import math
import time
from collections.abc import Callable, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Literal, TextIO

import numpy as np

from src.errors import DivergenceError, TuningError
from src.shdi.matrix import ShdiMatrix
from src.solver.params import HyperParams, TrainConfig
from src.solver.psnl import train
from src.tuning.parzen import mixture_pdf, sample_parzen
from src.tuning.space import SearchSpace, TpeConfig

logger = logging.getLogger(__name__)

TrialStatus = Literal["ok", "diverged"]

# Loss recorded for a diverged trial: 10 x worst finite loss so far, or 10 x 1e3
SENTINEL_FACTOR = 10.0
SENTINEL_FALLBACK = 1e3


@dataclass(frozen=True)
class Trial:
    index: int
    s: HyperParams
    b: float
    status: TrialStatus = "ok"
    iterations: int = 0

    def log_line(self) -> str:
        lam, gamma, mu, eta = self.s.as_tuple()
        return f"{self.index}\t{lam!r}\t{gamma!r}\t{mu!r}\t{eta!r}\t{self.b!r}\t{self.status}\n"


@dataclass
class ObservationSet:
    trials: list[Trial] = field(default_factory=list)
    theta: float = 0.25

    def __post_init__(self) -> None:
        if not 0.0 < self.theta < 1.0:
            raise ValueError(f"theta must lie in (0, 1), got {self.theta}")

    def __len__(self) -> int:
        return len(self.trials)

    def add(self, trial: Trial) -> None:
        self.trials.append(trial)

    def sentinel(self) -> float:
        finite = [t.b for t in self.trials if t.status == "ok"]
        return SENTINEL_FACTOR * (max(finite) if finite else SENTINEL_FALLBACK)

    def good_count(self) -> int:
        # rounding guards against theta * beta landing a hair above an integer
        return math.ceil(round(self.theta * len(self.trials), 9))

    def best(self) -> Trial:
        """Minimal b; ties go to the earliest trial."""
        if not self.trials:
            raise ValueError("no trials observed")
        return min(self.trials, key=lambda t: (t.b, t.index))

    def best_so_far(self) -> list[float]:
        history: list[float] = []
        best = math.inf
        for trial in self.trials:
            best = min(best, trial.b)
            history.append(best)
        return history

    @property
    def all_diverged(self) -> bool:
        return bool(self.trials) and all(t.status == "diverged" for t in self.trials)


def split_observations(obs: ObservationSet) -> tuple[list[Trial], list[Trial]]:
    ranked = sorted(obs.trials, key=lambda t: (t.b, t.index))
    cut = obs.good_count()
    return ranked[:cut], ranked[cut:]


def suggest(
    obs: ObservationSet,
    space: SearchSpace,
    seed: int | np.random.SeedSequence | np.random.Generator,
    n_startup: int = 20,
    n_candidates: int = 24,
) -> HyperParams:
    rng = np.random.default_rng(seed)
    ranges = space.ranges()
    if len(obs) < n_startup:
        return space.make(tuple(float(sample_parzen([], r, 1, rng)[0]) for r in ranges))  # type: ignore[arg-type]

    good, bad = split_observations(obs)
    score = np.zeros(n_candidates)
    columns = []
    for i, dim in enumerate(ranges):
        good_points = [t.s.as_tuple()[i] for t in good]
        bad_points = [t.s.as_tuple()[i] for t in bad]
        candidates = sample_parzen(good_points, dim, n_candidates, rng)
        score += np.log(mixture_pdf(good_points, dim, candidates))
        score -= np.log(mixture_pdf(bad_points, dim, candidates))
        columns.append(candidates)
    pick = int(np.argmax(score))
    return space.make(tuple(float(c[pick]) for c in columns))  # type: ignore[arg-type]


@dataclass
class SearchResult:
    best: HyperParams
    observations: ObservationSet
    wall_time: float = 0.0


def trial_seed(seed: int, index: int) -> np.random.SeedSequence:
    return np.random.SeedSequence([seed, index])


Objective = Callable[[HyperParams], tuple[float, int]]


def budgeted_objective(
    mat_train: ShdiMatrix, mat_valid: ShdiMatrix, cfg: TrainConfig, budget: int
) -> Objective:
    """Validation RMSE after at most `budget` sweeps; NaN marks divergence."""
    trial_cfg = cfg.model_copy(update={"max_iters": budget})

    def objective(hp: HyperParams) -> tuple[float, int]:
        try:
            _, report = train(mat_train, mat_valid, hp, trial_cfg)
        except DivergenceError as exc:
            logger.warning("Trial diverged at %s: %s", hp.as_tuple(), exc)
            return math.nan, 0
        return report.final_rmse, report.iterations_run

    return objective


def search(
    objective: Objective,
    space: SearchSpace,
    tpe_cfg: TpeConfig,
    seed: int = 0,
    threads: int = 1,
    trial_log: TextIO | None = None,
) -> SearchResult:
    """Sequential TPE loop; the random startup trials may run on a thread pool."""
    started = time.perf_counter()
    obs = ObservationSet(theta=tpe_cfg.theta)
    n_startup = min(tpe_cfg.n_startup, tpe_cfg.n_trials)

    def commit(index: int, hp: HyperParams, outcome: tuple[float, int]) -> None:
        loss, iterations = outcome
        if math.isfinite(loss):
            trial = Trial(index, hp, loss, "ok", iterations)
        else:
            trial = Trial(index, hp, obs.sentinel(), "diverged", iterations)
        obs.add(trial)
        if trial_log is not None:
            trial_log.write(trial.log_line())
            trial_log.flush()
        logger.info("Trial %d: b=%.6f (%s) s=%s", index, trial.b, trial.status, hp.as_tuple())

    startup = [
        suggest(obs, space, trial_seed(seed, i), n_startup, tpe_cfg.n_candidates)
        for i in range(n_startup)
    ]
    outcomes: Sequence[tuple[float, int]]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            outcomes = list(pool.map(objective, startup))
    else:
        outcomes = [objective(hp) for hp in startup]
    for index, (hp, outcome) in enumerate(zip(startup, outcomes, strict=True)):
        commit(index, hp, outcome)

    for index in range(n_startup, tpe_cfg.n_trials):
        hp = suggest(obs, space, trial_seed(seed, index), n_startup, tpe_cfg.n_candidates)
        commit(index, hp, objective(hp))

    if obs.all_diverged:
        raise TuningError(f"all {len(obs)} trials diverged", obs)
    best = obs.best()
    logger.info("Best trial %d: b=%.6f s=%s", best.index, best.b, best.s.as_tuple())
    return SearchResult(best=best.s, observations=obs, wall_time=time.perf_counter() - started)


def run_search(
    mat_train: ShdiMatrix,
    mat_valid: ShdiMatrix,
    space: SearchSpace,
    tpe_cfg: TpeConfig,
    cfg: TrainConfig,
    seed: int = 0,
    threads: int = 1,
    trial_log: TextIO | None = None,
) -> SearchResult:
    """Tune on (train, validation); each trial is a budgeted training run."""
    objective = budgeted_objective(mat_train, mat_valid, cfg, tpe_cfg.trial_budget_iters)
    return search(objective, space, tpe_cfg, seed=seed, threads=threads, trial_log=trial_log)
