"""
Command-line front-end.

Usage:
    psnl split --input edges.tsv --seed 42 --out folds.tsv --rotation 0 --export-dir rot0
    psnl train --train rot0/train.tsv --valid rot0/valid.tsv --nodes rot0/nodes.tsv --model m.psnl
    psnl tune  --train tr.tsv --valid va.tsv --trial-log trials.tsv --model m.psnl
    psnl predict --model m.psnl --pair 3 17
    psnl eval  --model m.psnl --test te.tsv
    psnl cv    --input edges.tsv --fold-file folds.tsv --summary-csv cv.csv
    psnl stats --input edges.tsv
    psnl rerun --manifest m.psnl.manifest.json

Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical divergence.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from collections.abc import Iterator, Sequence
from contextlib import contextmanager
from pathlib import Path
from typing import Any, Literal, NoReturn, TextIO

try:
    from typing import Self
except ImportError:  # Python < 3.11
    from typing_extensions import Self

from pydantic import (
    BaseModel,
    ConfigDict,
    Field,
    NonNegativeInt,
    PositiveInt,
    ValidationError,
    model_validator,
)

from src.errors import DataError, DivergenceError, TuningError, UsageError
from src.evaluation.harness import cross_validate
from src.evaluation.metrics import rmse
from src.evaluation.store import ResultStore
from src.shdi.folds import FoldSplit, kfold_split, read_fold_file, write_fold_file
from src.shdi.matrix import ShdiMatrix, matrix_stats
from src.shdi.parser import (
    EdgeFormat,
    parse_edge_files,
    parse_edges,
    read_labels,
    serialize_edges,
    write_labels,
)
from src.solver.model_io import SavedModel, load_model, save_model
from src.solver.params import HyperParams, TrainConfig
from src.solver.psnl import predict, train
from src.tuning.space import ParamRange, SearchSpace, TpeConfig
from src.tuning.tpe import run_search

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_DIVERGED = 3

Command = Literal["split", "train", "tune", "predict", "eval", "cv", "stats"]

REQUIRED: dict[str, tuple[str, ...]] = {
    "split": ("input",),
    "train": ("train", "valid", "model"),
    "tune": ("train", "valid"),
    "predict": ("model",),
    "eval": ("model", "test"),
    "cv": ("input",),
    "stats": ("input",),
}


class RunConfig(BaseModel):
    """Fully resolved configuration of one CLI run; written out as the manifest."""

    model_config = ConfigDict(frozen=True, extra="forbid", ser_json_inf_nan="constants")

    command: Command
    format: EdgeFormat = "tsv"
    input: str | None = None
    out: str | None = None
    train: str | None = None
    valid: str | None = None
    test: str | None = None
    model: str | None = None
    pairs: str | None = None
    pair: list[tuple[str, str]] = Field(default_factory=list)
    report: str | None = None
    trial_log: str | None = None
    summary_csv: str | None = None
    db: str | None = None
    export_dir: str | None = None
    manifest: str | None = None
    resume: str | None = None
    nodes: str | None = None
    fold_file: str | None = None

    seed: NonNegativeInt = 0
    threads: PositiveInt = 1
    folds: int = Field(10, ge=3)
    rotation: int | None = None
    checkpoint: bool = False
    tune: bool = True
    retune: bool = False
    inits: PositiveInt = 1
    timings: bool = True

    training: TrainConfig = Field(default_factory=TrainConfig)
    hyper: HyperParams = Field(default_factory=HyperParams)
    space: SearchSpace = Field(default_factory=SearchSpace)
    tpe: TpeConfig = Field(default_factory=TpeConfig)

    @model_validator(mode="after")
    def _paths_present(self) -> Self:
        missing = [name for name in REQUIRED[self.command] if getattr(self, name) is None]
        if missing:
            flags = ", ".join("--" + name.replace("_", "-") for name in missing)
            raise ValueError(f"{self.command} requires {flags}")
        if self.command == "split" and not (self.out or self.fold_file):
            raise ValueError("split requires --out or --fold-file")
        if self.command == "predict" and not (self.pairs or self.pair):
            raise ValueError("predict requires --pairs or --pair")
        if self.rotation is not None and not 0 <= self.rotation < self.folds:
            raise ValueError(f"--rotation must lie in [0, {self.folds})")
        if (self.rotation is None) != (self.export_dir is None):
            raise ValueError("--rotation and --export-dir go together")
        return self

    def manifest_path(self) -> Path:
        if self.manifest:
            return Path(self.manifest)
        primary = {
            "split": self.out, "train": self.model, "tune": self.trial_log or self.model,
            "predict": self.out, "eval": self.report, "cv": self.summary_csv, "stats": self.out,
        }[self.command]
        if primary:
            return Path(primary + ".manifest.json")
        return Path(f"psnl_{self.command}.manifest.json")

    def to_json(self) -> str:
        return self.model_dump_json(by_alias=True, indent=2)


# ============================================================================
# Argument parsing
# ============================================================================

class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> NoReturn:
        raise UsageError(f"{self.prog}: {message}")


def _count(text: str) -> int:
    """Integer flag that also accepts scientific notation such as 1e3."""
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not value.is_integer():
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    return int(value)


def _common_flags() -> argparse.ArgumentParser:
    p = _Parser(add_help=False)
    p.add_argument("--seed", type=_count, default=0)
    p.add_argument("--threads", type=_count, default=1)
    p.add_argument("--format", choices=["tsv", "mtx"], default="tsv")
    p.add_argument("--manifest", help="where to write the resolved configuration")
    p.add_argument("--verbose", "-v", action="count", default=0)
    p.add_argument("--quiet", "-q", action="store_true", help="log errors only")
    return p


def _training_flags() -> argparse.ArgumentParser:
    p = _Parser(add_help=False)
    cfg, hp = TrainConfig(), HyperParams()
    p.add_argument("--rank", type=_count, default=cfg.rank)
    p.add_argument("--max-iters", type=_count, default=cfg.max_iters)
    p.add_argument("--tol", type=float, default=cfg.tol)
    p.add_argument("--init-scale", type=float, default=cfg.init_scale)
    p.add_argument("--refresh-every", type=_count, default=cfg.refresh_every)
    p.add_argument("--ablate-proximal", action="store_true", help="force mu = 0")
    p.add_argument("--lambda", dest="lambda_", type=float, default=hp.lambda_)
    p.add_argument("--gamma", type=float, default=hp.gamma)
    p.add_argument("--mu", type=float, default=hp.mu)
    p.add_argument("--eta", type=float, default=hp.eta)
    return p


def _tuning_flags() -> argparse.ArgumentParser:
    p = _Parser(add_help=False)
    defaults = SearchSpace()
    for name, rng in zip(("lambda", "gamma", "mu", "eta"), defaults.ranges(), strict=True):
        p.add_argument(
            f"--{name}-range", type=float, nargs=2, metavar=("LOW", "HIGH"),
            default=[rng.lower, rng.upper],
        )
        p.add_argument(f"--{name}-scale", choices=["log", "linear"], default=rng.scale)
    p.add_argument("--trials", type=_count, default=60)
    p.add_argument("--startup", type=_count, default=20)
    p.add_argument("--candidates", type=_count, default=24)
    p.add_argument("--theta", type=float, default=0.25)
    p.add_argument("--trial-budget", type=_count, default=200)
    p.add_argument("--db", help="SQLite file receiving the trial history")
    return p


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="psnl", description="Proximal symmetric nonnegative latent-factor analysis")
    sub = parser.add_subparsers(dest="command", required=True)
    common, training, tuning = _common_flags(), _training_flags(), _tuning_flags()

    p = sub.add_parser("split", parents=[common], help="write a tenfold split")
    p.add_argument("--input", required=True)
    p.add_argument("--out", help="fold file to write")
    p.add_argument("--fold-file", help="reuse the folds of an earlier split instead of --seed")
    p.add_argument("--folds", type=_count, default=10)
    p.add_argument("--rotation", type=_count)
    p.add_argument(
        "--export-dir", help="write train/valid/test edge files of --rotation and nodes.tsv here"
    )

    p = sub.add_parser("train", parents=[common, training], help="train one model")
    p.add_argument("--train", required=True)
    p.add_argument("--valid", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--report", help="JSON training report")
    p.add_argument("--checkpoint", action="store_true", help="also store X and W")
    p.add_argument("--resume", help="continue from a checkpointed model")
    p.add_argument("--nodes", help="node list (nodes.tsv of split) fixing the model universe")

    p = sub.add_parser("tune", parents=[common, training, tuning], help="TPE hyperparameter search")
    p.add_argument("--train", required=True)
    p.add_argument("--valid", required=True)
    p.add_argument("--trial-log")
    p.add_argument("--nodes", help="node list (nodes.tsv of split) fixing the model universe")
    p.add_argument("--model", help="retrain at the best point with the full budget and save")

    p = sub.add_parser("predict", parents=[common], help="predict entries")
    p.add_argument("--model", required=True)
    p.add_argument("--pairs", help="file of <label_a>\\t<label_b> lines")
    p.add_argument("--pair", nargs=2, action="append", default=[], metavar=("A", "B"))
    p.add_argument("--out")

    p = sub.add_parser("eval", parents=[common], help="RMSE of a saved model")
    p.add_argument("--model", required=True)
    p.add_argument("--test", required=True)
    p.add_argument("--report", help="JSON evaluation report")

    p = sub.add_parser("cv", parents=[common, training, tuning], help="tenfold cross-validation")
    p.add_argument("--input", required=True)
    p.add_argument("--fold-file", help="folds written by split instead of seeded ones")
    p.add_argument("--folds", type=_count, default=10)
    p.add_argument("--no-tune", dest="tune", action="store_false")
    p.add_argument("--retune", action="store_true", help="tune again for every rotation")
    p.add_argument("--inits", type=_count, default=1, help="random initialisations per rotation")
    p.add_argument("--summary-csv")
    p.add_argument("--no-timings", dest="timings", action="store_false")

    p = sub.add_parser("stats", parents=[common], help="dataset statistics")
    p.add_argument("--input", required=True)
    p.add_argument("--out", help="JSON output")

    p = sub.add_parser("rerun", help="execute a manifest again")
    p.add_argument("--manifest", required=True)
    p.add_argument("--verbose", "-v", action="count", default=0)
    p.add_argument("--quiet", "-q", action="store_true")
    return parser


def resolve(args: argparse.Namespace) -> RunConfig:
    """Namespace -> validated RunConfig (raises pydantic ValidationError)."""
    values: dict[str, Any] = {
        key: value for key, value in vars(args).items()
        if key in RunConfig.model_fields and value is not None
    }
    if hasattr(args, "rank"):
        values["training"] = TrainConfig(
            rank=args.rank, max_iters=args.max_iters, tol=args.tol, seed=args.seed,
            init_scale=args.init_scale, ablate_proximal=args.ablate_proximal,
            refresh_every=args.refresh_every,
        )
        values["hyper"] = HyperParams(
            **{"lambda": args.lambda_, "gamma": args.gamma, "mu": args.mu, "eta": args.eta}
        )
    if hasattr(args, "trials"):
        values["space"] = SearchSpace(**{
            name: ParamRange(
                lower=getattr(args, f"{name}_range")[0],
                upper=getattr(args, f"{name}_range")[1],
                scale=getattr(args, f"{name}_scale"),
            )
            for name in ("lambda", "gamma", "mu", "eta")
        })
        values["tpe"] = TpeConfig(
            n_trials=args.trials, n_startup=args.startup, n_candidates=args.candidates,
            theta=args.theta, trial_budget_iters=args.trial_budget,
        )
    values["pair"] = [tuple(p) for p in getattr(args, "pair", [])]
    return RunConfig(**values)


# ============================================================================
# Commands
# ============================================================================

@contextmanager
def _reading(path: str) -> Iterator[TextIO]:
    try:
        handle = open(path, encoding="utf-8")
    except FileNotFoundError:
        raise DataError(f"input file not found: {path}") from None
    with handle:
        yield handle


def _writing(path: str | Path) -> TextIO:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    return open(path, "w", encoding="utf-8", newline="\n")


def _load_matrix(path: str, fmt: EdgeFormat) -> ShdiMatrix:
    with _reading(path) as f:
        return parse_edges(f, fmt)


def _load_model(path: str) -> SavedModel:
    with _reading(path) as f:
        return load_model(f)


def _load_folds(cfg: RunConfig, mat: ShdiMatrix) -> FoldSplit:
    if cfg.fold_file is None:
        return kfold_split(mat, k=cfg.folds, seed=cfg.seed)
    with _reading(cfg.fold_file) as f:
        return read_fold_file(f, mat)


def _load_pair(cfg: RunConfig) -> tuple[ShdiMatrix, ShdiMatrix, SavedModel | None]:
    """
    Train and validation matrices on one universe.

    The universe is, in order of precedence, the resumed model's labels, the
    --nodes list, or the labels seen in the two files.
    """
    assert cfg.train is not None and cfg.valid is not None
    resumed = _load_model(cfg.resume) if cfg.resume else None
    labels: Sequence[str] | None = resumed.labels if resumed else None
    if cfg.nodes:
        with _reading(cfg.nodes) as f:
            listed = read_labels(f)
        if labels is not None and list(labels) != listed:
            raise DataError(f"{cfg.nodes} does not match the labels of {cfg.resume}")
        labels = listed
    with _reading(cfg.train) as tr, _reading(cfg.valid) as va:
        mat_train, mat_valid = parse_edge_files([tr, va], cfg.format, labels=labels)
    return mat_train, mat_valid, resumed


def _banner(title: str) -> None:
    print("=" * 70)
    print(title)
    print("=" * 70)


def cmd_split(cfg: RunConfig) -> None:
    assert cfg.input is not None
    mat = _load_matrix(cfg.input, cfg.format)
    split = _load_folds(cfg, mat)
    sizes = [len(fold) for fold in split.folds]
    print(f"✓ {mat.edge_count} pairs in {split.k} folds (sizes {min(sizes)}-{max(sizes)})")
    if cfg.out:
        with _writing(cfg.out) as f:
            write_fold_file(split, mat, f)
        print(f"✓ Fold file: {cfg.out}")

    if cfg.rotation is not None and cfg.export_dir is not None:
        if cfg.rotation >= split.k:
            raise UsageError(f"--rotation must lie in [0, {split.k})")
        export = Path(cfg.export_dir)
        with _writing(export / "nodes.tsv") as f:
            write_labels(mat.labels, f)
        for name, idx in zip(("train", "valid", "test"), split.rotation(cfg.rotation), strict=True):
            with _writing(export / f"{name}.tsv") as f:
                serialize_edges(mat.subset(idx), f, "tsv")
        print(f"✓ Rotation {cfg.rotation} exported to {export}/")


def cmd_train(cfg: RunConfig) -> None:
    assert cfg.model is not None
    mat_train, mat_valid, resumed = _load_pair(cfg)
    if resumed is not None and not resumed.has_checkpoint:
        raise DataError(f"{cfg.resume} has no #CHECKPOINT section")
    state, report = train(
        mat_train, mat_valid, cfg.hyper, cfg.training, state=resumed.state if resumed else None
    )
    with _writing(cfg.model) as f:
        save_model(f, state, mat_train.labels, checkpoint=cfg.checkpoint)
    print(f"✓ {report.iterations_run} sweeps, stop: {report.stop_reason}")
    print(f"✓ Validation RMSE: {report.final_rmse:.6f}")
    print(f"✓ Constraint gap: {report.final_gap:.3e}")
    print(f"✓ Model saved: {cfg.model}")
    if cfg.report:
        with _writing(cfg.report) as f:
            json.dump({
                "iterations_run": report.iterations_run,
                "stop_reason": report.stop_reason,
                "initial_rmse": report.initial_rmse,
                "rmse_history": report.rmse_history,
                "final_gap": report.final_gap,
                "wall_time": report.wall_time,
            }, f, indent=2)


def cmd_tune(cfg: RunConfig) -> None:
    mat_train, mat_valid, _ = _load_pair(cfg)
    log = _writing(cfg.trial_log) if cfg.trial_log else None
    try:
        result = run_search(
            mat_train, mat_valid, cfg.space, cfg.tpe, cfg.training,
            seed=cfg.seed, threads=cfg.threads, trial_log=log,
        )
    finally:
        if log is not None:
            log.close()
    best = result.observations.best()
    print(f"✓ {len(result.observations)} trials in {result.wall_time:.1f}s")
    print(f"✓ Best trial {best.index}: b = {best.b:.6f}")
    lam, gamma, mu, eta = best.s.as_tuple()
    print(f"   lambda={lam!r} gamma={gamma!r} mu={mu!r} eta={eta!r}")
    if cfg.db:
        with ResultStore(cfg.db) as store:
            run_id = store.record_search("tune", result.observations, cfg.to_json())
            stored = store.trial_losses(run_id)
        print(f"✓ Stored {len(stored)} trials as run {run_id} in {cfg.db}")
    if cfg.model:
        state, report = train(mat_train, mat_valid, best.s, cfg.training)
        with _writing(cfg.model) as f:
            save_model(f, state, mat_train.labels)
        print(f"✓ Retrained ({report.iterations_run} sweeps), RMSE {report.final_rmse:.6f} -> {cfg.model}")


def _pairs(cfg: RunConfig) -> list[tuple[str, str]]:
    pairs = list(cfg.pair)
    if cfg.pairs:
        with _reading(cfg.pairs) as f:
            for lineno, line in enumerate(f, 1):
                line = line.rstrip("\n")
                if not line.strip() or line.startswith("#"):
                    continue
                fields = line.split("\t")
                if len(fields) < 2:
                    raise DataError("expected <label_a>\\t<label_b>", line=lineno)
                pairs.append((fields[0], fields[1]))
    return pairs


def cmd_predict(cfg: RunConfig) -> None:
    assert cfg.model is not None
    saved = _load_model(cfg.model)
    index = saved.id_map
    lines = []
    for a, b in _pairs(cfg):
        if a not in index or b not in index:
            raise DataError(f"unknown node label in pair {a}-{b}")
        lines.append(f"{a}\t{b}\t{predict(saved.state, index[a], index[b])!r}\n")
    if cfg.out:
        with _writing(cfg.out) as f:
            f.writelines(lines)
    else:
        sys.stdout.writelines(lines)


def cmd_eval(cfg: RunConfig) -> None:
    assert cfg.model is not None and cfg.test is not None
    saved = _load_model(cfg.model)
    with _reading(cfg.test) as f:
        (mat_test,) = parse_edge_files([f], cfg.format, labels=saved.labels)
    score = rmse(mat_test, saved.state)
    print(f"RMSE\t{score!r}\t{mat_test.edge_count}")
    if cfg.report:
        with _writing(cfg.report) as f:
            json.dump({"rmse": score, "n_pairs": mat_test.edge_count}, f, indent=2)


def cmd_cv(cfg: RunConfig) -> None:
    assert cfg.input is not None
    mat = _load_matrix(cfg.input, cfg.format)
    summary = cross_validate(
        mat, cfg.training, cfg.space, cfg.tpe, seed=cfg.seed,
        hp=cfg.hyper, tune=cfg.tune, retune_each_rotation=cfg.retune,
        n_inits=cfg.inits, threads=cfg.threads, split=_load_folds(cfg, mat),
    )
    print(summary.render_table())
    if cfg.summary_csv:
        with _writing(cfg.summary_csv) as f:
            summary.write_csv(f, timings=cfg.timings)
        print(f"✓ Summary CSV: {cfg.summary_csv}")
    if cfg.db:
        with ResultStore(cfg.db) as store:
            run_id = store.record_cv(summary, cfg.to_json())
            stored = store.rotation_rmses(run_id)
        print(f"✓ Stored {len(stored)} rotations as run {run_id} in {cfg.db}")


def cmd_stats(cfg: RunConfig) -> None:
    assert cfg.input is not None
    stats = matrix_stats(_load_matrix(cfg.input, cfg.format))
    stats["source"] = cfg.input
    text = json.dumps(stats, indent=2)
    if cfg.out:
        with _writing(cfg.out) as f:
            f.write(text + "\n")
    print(text)


COMMANDS = {
    "split": cmd_split,
    "train": cmd_train,
    "tune": cmd_tune,
    "predict": cmd_predict,
    "eval": cmd_eval,
    "cv": cmd_cv,
    "stats": cmd_stats,
}


def execute(cfg: RunConfig) -> None:
    """Write the manifest, then run the command."""
    with _writing(cfg.manifest_path()) as f:
        f.write(cfg.to_json() + "\n")
    logger.info("Manifest written to %s", cfg.manifest_path())
    COMMANDS[cfg.command](cfg)


def _setup_logging(verbosity: int, quiet: bool = False) -> None:
    if quiet:
        level = logging.ERROR
    else:
        level = {0: logging.WARNING, 1: logging.INFO}.get(verbosity, logging.DEBUG)
    logging.basicConfig(level=level, format="%(asctime)s %(levelname)s %(name)s: %(message)s")


def main(argv: Sequence[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        _setup_logging(args.verbose, args.quiet)
        if args.command == "rerun":
            with _reading(args.manifest) as f:
                cfg = RunConfig.model_validate_json(f.read())
        else:
            cfg = resolve(args)
        execute(cfg)
    except SystemExit as exc:  # --help
        return exc.code if isinstance(exc.code, int) else EXIT_OK
    except (UsageError, ValidationError) as exc:
        print(f"usage error: {'; '.join(str(exc).splitlines())}", file=sys.stderr)
        return EXIT_USAGE
    except (DataError, OSError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (DivergenceError, TuningError) as exc:
        print(f"diverged: {exc}", file=sys.stderr)
        return EXIT_DIVERGED
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
