#!/usr/bin/env python3
"""
Compare held-out RMSE with the proximal term tuned against mu forced to 0.

Usage:
    python scripts/proximal_ablation.py
    python scripts/proximal_ablation.py --seeds 20 --noise 0.1
"""

import argparse
import json
import logging
import sys
from datetime import datetime, timezone
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent))

from src.evaluation.experiments import proximal_ablation  # noqa: E402
from src.tuning.space import TpeConfig  # noqa: E402

STATS_DIR = Path("stats")


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[1])
    parser.add_argument("--seeds", type=int, default=10)
    parser.add_argument("--nodes", type=int, default=100)
    parser.add_argument("--rank", type=int, default=4)
    parser.add_argument("--density", type=float, default=0.3)
    parser.add_argument("--noise", type=float, default=0.05)
    parser.add_argument("--trials", type=int, default=60)
    args = parser.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(asctime)s %(name)s: %(message)s")

    print("=" * 70)
    print(f"Proximal ablation over {args.seeds} seeds")
    print("=" * 70)
    print()

    result = proximal_ablation(
        range(args.seeds), args.nodes, args.rank, args.density, args.noise,
        TpeConfig(n_trials=args.trials),
    )

    print(f"{'seed':>6}  {'mu > 0':>12}  {'mu = 0':>12}")
    for seed, (with_mu, without) in enumerate(zip(result.proximal, result.ablated, strict=True)):
        marker = "✓" if with_mu <= without else " "
        print(f"{seed:>6}  {with_mu:>12.6f}  {without:>12.6f}  {marker}")

    STATS_DIR.mkdir(exist_ok=True)
    timestamp = datetime.now(timezone.utc).strftime("%Y%m%d_%H%M%S")
    stats_path = STATS_DIR / f"ablation_{timestamp}.json"
    stats = {"generated_at": datetime.now(timezone.utc).isoformat(), "setup": vars(args)}
    stats_path.write_text(json.dumps(stats | result.to_dict(), indent=2), encoding="utf-8")

    print()
    print("=" * 70)
    print(f"Median RMSE  mu > 0: {result.median_proximal:.6f}   mu = 0: {result.median_ablated:.6f}")
    print(f"✅ {stats_path}")
    print("=" * 70)


if __name__ == "__main__":
    main()
