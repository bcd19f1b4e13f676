"""SQLite store for tuning histories and cross-validation summaries"""

from __future__ import annotations

from datetime import datetime
from pathlib import Path
from types import TracebackType

from sqlalchemy import Engine, create_engine, select
from sqlalchemy.orm import Session

from src.evaluation.harness import CvSummary
from src.models import Base, RotationRecord, Run, TrialRecord
from src.solver.params import HyperParams
from src.tuning.tpe import ObservationSet


class ResultStore:
    """
    Context manager around one SQLite file.

    Usage:
        with ResultStore("output/results.db") as store:
            run_id = store.record_search("tune", observations, manifest_json)
    """

    def __init__(self, db_path: str | Path) -> None:
        self.db_path = Path(db_path)
        self.engine: Engine | None = None

    def __enter__(self) -> ResultStore:
        self.db_path.parent.mkdir(parents=True, exist_ok=True)
        self.engine = create_engine(f"sqlite:///{self.db_path}")
        Base.metadata.create_all(self.engine)
        return self

    def __exit__(
        self,
        exc_type: type[BaseException] | None,
        exc_val: BaseException | None,
        exc_tb: TracebackType | None,
    ) -> None:
        if self.engine is not None:
            self.engine.dispose()
            self.engine = None

    def _session(self) -> Session:
        if self.engine is None:
            raise RuntimeError("ResultStore used outside its context")
        return Session(self.engine)

    @staticmethod
    def _new_run(command: str, manifest: str | None, best: HyperParams | None) -> Run:
        run = Run(command=command, created_at=datetime.now(), manifest=manifest)
        if best is not None:
            run.best_lambda, run.best_gamma, run.best_mu, run.best_eta = best.as_tuple()
        return run

    @staticmethod
    def _trial_records(observations: ObservationSet) -> list[TrialRecord]:
        records = []
        for trial in observations.trials:
            lam, gamma, mu, eta = trial.s.as_tuple()
            records.append(TrialRecord(
                position=trial.index,
                lambda_=lam,
                gamma=gamma,
                mu=mu,
                eta=eta,
                loss=trial.b,
                status=trial.status,
                iterations=trial.iterations,
            ))
        return records

    def record_search(
        self, command: str, observations: ObservationSet, manifest: str | None = None
    ) -> int:
        with self._session() as session:
            run = self._new_run(command, manifest, observations.best().s)
            run.trials = self._trial_records(observations)
            session.add(run)
            session.commit()
            return run.id

    def record_cv(self, summary: CvSummary, manifest: str | None = None) -> int:
        best = summary.results[0].hyperparams if summary.results else None
        with self._session() as session:
            run = self._new_run("cv", manifest, best)
            for observations in summary.observations:
                run.trials.extend(self._trial_records(observations))
            run.rotations = [
                RotationRecord(
                    rotation=r.rotation,
                    rmse=r.rmse,
                    n_pairs=r.n_pairs,
                    train_seconds=r.wall_time_train,
                    tune_seconds=r.wall_time_tune,
                )
                for r in summary.results
            ]
            session.add(run)
            session.commit()
            return run.id

    def rotation_rmses(self, run_id: int) -> list[float]:
        with self._session() as session:
            rows = session.scalars(
                select(RotationRecord)
                .where(RotationRecord.run_id == run_id)
                .order_by(RotationRecord.rotation)
            )
            return [row.rmse for row in rows]

    def trial_losses(self, run_id: int) -> list[float]:
        with self._session() as session:
            rows = session.scalars(
                select(TrialRecord)
                .where(TrialRecord.run_id == run_id)
                .order_by(TrialRecord.id)
            )
            return [row.loss for row in rows]
