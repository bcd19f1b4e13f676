#!/usr/bin/env python3
"""Demo run on a synthetic network: split, tune, train, cross-validate"""

from pathlib import Path

from src.evaluation.experiments import holdout, mean_baseline
from src.evaluation.harness import cross_validate
from src.evaluation.metrics import rmse
from src.evaluation.store import ResultStore
from src.shdi.parser import serialize_edges
from src.shdi.synthetic import make_synthetic
from src.solver.model_io import save_model
from src.solver.params import TrainConfig
from src.solver.psnl import predict, train
from src.tuning.space import SearchSpace, TpeConfig
from src.tuning.tpe import run_search


def run_demo() -> None:
    print("=" * 70)
    print("PSNL - Demo Run")
    print("=" * 70)

    output_dir = Path("output")
    output_dir.mkdir(exist_ok=True)
    db_path = output_dir / "demo.db"

    # Step 1: synthetic network
    print("\n[1/4] Generating a synthetic network...")
    mat, _ = make_synthetic(80, rank=4, density=0.3, noise=0.01, seed=1)
    edges_path = output_dir / "demo_edges.tsv"
    with edges_path.open("w", encoding="utf-8") as f:
        serialize_edges(mat, f)
    print(f"   📊 {mat.node_count} nodes, {mat.edge_count} observed pairs")
    print(f"   ✓ Wrote {edges_path}")

    # Step 2: tune on rotation 0
    print("\n[2/4] Tuning hyperparameters on the validation fold...")
    mat_train, mat_valid, mat_test = holdout(mat, seed=1)
    cfg = TrainConfig(rank=4, seed=1)
    space = SearchSpace()
    tpe_cfg = TpeConfig(n_trials=20, n_startup=10, trial_budget_iters=100)
    found = run_search(mat_train, mat_valid, space, tpe_cfg, cfg, seed=1)
    print(f"   ✓ Best of {len(found.observations)} trials: "
          f"validation RMSE {found.observations.best().b:.6f}")
    for name, value in found.best.model_dump(by_alias=True).items():
        print(f"     {name:7}: {value:.5g}")

    # Step 3: train and save
    print("\n[3/4] Training with the tuned hyperparameters...")
    state, report = train(mat_train, mat_valid, found.best, cfg)
    model_path = output_dir / "demo.psnl"
    with model_path.open("w", encoding="utf-8") as f:
        save_model(f, state, mat_train.labels)
    print(f"   ✓ {report.iterations_run} sweeps ({report.stop_reason}), "
          f"constraint gap {report.final_gap:.2e}")
    print(f"   ✓ Test RMSE {rmse(mat_test, state):.6f} "
          f"(mean baseline {mean_baseline(mat_train, mat_test):.6f})")
    print(f"   ✓ Saved {model_path}")
    print(f"   Prediction for (0, 1): {predict(state, 0, 1):.6f}")

    # Step 4: cross-validate and store
    print("\n[4/4] Cross-validating over ten rotations...")
    summary = cross_validate(mat, cfg, space, tpe_cfg, seed=1, hp=found.best, tune=False)
    with ResultStore(db_path) as store:
        search_id = store.record_search("tune", found.observations)
        cv_id = store.record_cv(summary)
        losses = store.trial_losses(search_id)
        stored_rmses = store.rotation_rmses(cv_id)
    print(summary.render_table())
    print(f"   ✓ Stored {len(losses)} trials (best {min(losses):.6f}) as run {search_id}")
    print(f"   ✓ Stored {len(stored_rmses)} rotations (worst {max(stored_rmses):.6f}) as run {cv_id}")

    print("\n" + "=" * 70)
    print("✅ Demo completed successfully!")
    print("\n📁 Output files:")
    print(f"   - Edges:     {edges_path}")
    print(f"   - Model:     {model_path}")
    print(f"   - Database:  {db_path} (runs {search_id} and {cv_id})")
    print("\n💡 Quick test:")
    print(f"   psnl eval --model {model_path} --test {edges_path}")
    print("=" * 70)


if __name__ == "__main__":
    run_demo()
