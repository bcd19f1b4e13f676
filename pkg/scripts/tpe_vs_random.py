#!/usr/bin/env python3
"""
Best validation RMSE of TPE against random search at the same trial count.

Usage:
    python scripts/tpe_vs_random.py
    python scripts/tpe_vs_random.py --repeats 5 --threads 4
"""

import argparse
import json
import logging
import sys
from datetime import datetime, timezone
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent))

from src.evaluation.experiments import tpe_vs_random  # noqa: E402

STATS_DIR = Path("stats")


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[1])
    parser.add_argument("--repeats", type=int, default=20)
    parser.add_argument("--nodes", type=int, default=200)
    parser.add_argument("--rank", type=int, default=4)
    parser.add_argument("--density", type=float, default=0.1)
    parser.add_argument("--trials", type=int, default=60)
    parser.add_argument("--trial-budget", type=int, default=200)
    parser.add_argument("--threads", type=int, default=1)
    args = parser.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(asctime)s %(name)s: %(message)s")

    print("=" * 70)
    print(f"TPE vs random search: {args.repeats} repeats of {args.trials} trials")
    print("=" * 70)
    print()

    result = tpe_vs_random(
        repeats=args.repeats,
        n_nodes=args.nodes,
        rank=args.rank,
        density=args.density,
        n_trials=args.trials,
        trial_budget_iters=args.trial_budget,
        threads=args.threads,
    )
    summary = result.to_dict()

    STATS_DIR.mkdir(exist_ok=True)
    timestamp = datetime.now(timezone.utc).strftime("%Y%m%d_%H%M%S")
    stats_path = STATS_DIR / f"search_{timestamp}.json"
    stats = {"generated_at": datetime.now(timezone.utc).isoformat(), "setup": vars(args)}
    stats_path.write_text(json.dumps(stats | summary, indent=2), encoding="utf-8")

    wins = sum(t <= r for t, r in zip(result.tpe, result.random, strict=True))
    print()
    print("=" * 70)
    print(f"Median best RMSE  TPE: {summary['median_tpe']:.6f}   random: {summary['median_random']:.6f}")
    print(f"TPE at least as good in {wins}/{args.repeats} repeats")
    print(f"✅ {stats_path}")
    print("=" * 70)


if __name__ == "__main__":
    main()
