import pytest
from sqlalchemy import select
from sqlalchemy.orm import Session

from src.evaluation.harness import CvSummary, EvalResult
from src.evaluation.store import ResultStore
from src.models import Run
from src.solver.params import HyperParams
from src.tuning.tpe import ObservationSet, Trial


def history() -> ObservationSet:
    obs = ObservationSet()
    obs.add(Trial(0, HyperParams(gamma=0.3), 0.4))
    obs.add(Trial(1, HyperParams(gamma=0.6), 0.2, iterations=50))
    obs.add(Trial(2, HyperParams(gamma=0.9), 4.0, "diverged"))
    return obs


def summary() -> CvSummary:
    results = [
        EvalResult(rotation=r, rmse=0.1 * (r + 1), n_pairs=20, wall_time_train=1.5, hyperparams=HyperParams())
        for r in range(3)
    ]
    return CvSummary(results=results, seeds=[0, 1, 2], observations=[history()])


def test_record_search(tmp_path):
    with ResultStore(tmp_path / "results.db") as store:
        run_id = store.record_search("tune", history(), '{"command": "tune"}')
        assert store.trial_losses(run_id) == [0.4, 0.2, 4.0]
        with Session(store.engine) as session:
            run = session.scalars(select(Run).where(Run.id == run_id)).one()
            assert run.command == "tune"
            assert run.best_gamma == 0.6
            assert run.manifest == '{"command": "tune"}'
            assert [t.status for t in run.trials] == ["ok", "ok", "diverged"]


def test_record_cv(tmp_path):
    with ResultStore(tmp_path / "nested" / "cv.db") as store:
        run_id = store.record_cv(summary())
        assert store.rotation_rmses(run_id) == pytest.approx([0.1, 0.2, 0.3])
        assert store.trial_losses(run_id) == [0.4, 0.2, 4.0]


def test_runs_accumulate(tmp_path):
    path = tmp_path / "results.db"
    with ResultStore(path) as store:
        first = store.record_search("tune", history())
    with ResultStore(path) as store:
        second = store.record_search("tune", history())
        assert second == first + 1
        assert store.trial_losses(first) == store.trial_losses(second)


def test_outside_context():
    with pytest.raises(RuntimeError):
        ResultStore("unused.db").trial_losses(1)
