"""Command-line interface.

Subcommands: extract (feature CSV), evaluate (train/test accuracy
report), kfold (cross-validation), roc (verification FAR/GAR sweep).
Flag precedence: command-line flags override a --config JSON file,
which overrides built-in defaults. Every run drops a config.json echo
next to its CSV so it can be reproduced exactly. Exit codes: 0 success,
1 usage error, 2 data error, 3 internal error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import traceback
from dataclasses import dataclass
from pathlib import Path

from .classify import LabeledSample
from .contours import ContourVariant
from .evaluation import (
    ClassifierConfig,
    SplitSpec,
    evaluate,
    kfold,
    roc_far_gar,
    split_per_class,
    write_folds_csv,
    write_report_csv,
    write_roc_csv,
)
from .features import extract_many, write_features_csv
from .image_io import DatasetError, PgmParseError, load_dataset
from .infoset import FuzzifierRef

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_INTERNAL = 3

DEFAULTS: dict[str, object] = {
    "resize": "63x63",
    "variant": "g1",
    "ref": "avg",
    "classifier": "knn",
    "k": 1,
    "distance": "log",
    "degree": 1,
    "C": 1.0,
    "offset": 1.0,
    "tol": 1e-3,
    "max_passes": 100,
    "train_per_class": 7,
    "folds": 10,
    "seed": 0,
    "out": "out",
    "workers": None,
    "zscore": False,
    "shuffle_split": False,
    "skip_errors": False,
    "thresholds": 200,
}


class UsageError(Exception):
    pass


class _ArgParser(argparse.ArgumentParser):
    # argparse exits 2 on bad usage by default; this tool reserves 2 for
    # data errors, so remap to 1
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(EXIT_USAGE)


@dataclass(frozen=True)
class RunConfig:
    command: str
    data: Path
    resize: tuple[int, int]
    variant: ContourVariant
    ref: FuzzifierRef
    classifier: str
    k: int
    distance: str
    degree: int
    c: float
    offset: float
    tol: float
    max_passes: int
    train_per_class: int
    folds: int
    seed: int
    out: Path
    workers: int
    zscore: bool
    shuffle_split: bool
    skip_errors: bool
    thresholds: int


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--data", help="dataset root: one subdirectory per class, PGM images inside")
    parser.add_argument("--config", help="JSON file with defaults for any flag (flags win)")
    parser.add_argument("--resize", metavar="WxH", help="resize target, multiples of 3 (default 63x63)")
    parser.add_argument("--variant", choices=["g1", "g2", "g3"], help="gradient contour variant (default g1)")
    parser.add_argument("--ref", choices=["avg", "max", "min"], help="fuzzifier reference statistic (default avg)")
    parser.add_argument("--seed", type=int, help="seed for shuffled splits and the SVM solver (default 0)")
    parser.add_argument("--out", help="output directory (default ./out)")
    parser.add_argument("--workers", type=int, help="parallel extraction processes; env NBLGC_WORKERS, else all cores")
    parser.add_argument("--skip-errors", action="store_true", default=None, dest="skip_errors",
                        help="warn and skip unreadable dataset files instead of aborting")


def _add_classifier(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--classifier", choices=["knn", "svm"], help="classifier (default knn)")
    parser.add_argument("--k", type=int, help="KNN neighbor count (default 1)")
    parser.add_argument("--distance", choices=["log", "euclidean"], help="KNN/ROC distance (default log)")
    parser.add_argument("--degree", type=int, choices=[1, 2], help="SVM polynomial degree (default 1)")
    parser.add_argument("--C", type=float, dest="C", help="SVM regularization bound (default 1)")
    parser.add_argument("--offset", type=float, help="SVM kernel offset (default 1)")
    parser.add_argument("--tol", type=float, help="SVM KKT tolerance (default 1e-3)")
    parser.add_argument("--max-passes", type=int, dest="max_passes",
                        help="SVM sweeps without change before stopping (default 100)")
    parser.add_argument("--zscore", action="store_true", default=None,
                        help="standardize features using training statistics")


def build_parser() -> argparse.ArgumentParser:
    parser = _ArgParser(prog="nblgc", description=__doc__.strip().splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p_extract = sub.add_parser("extract", parents=[], help="write per-image feature vectors to features.csv")
    _add_common(p_extract)

    p_eval = sub.add_parser("evaluate", help="train/test split accuracy report")
    _add_common(p_eval)
    _add_classifier(p_eval)
    p_eval.add_argument("--train-per-class", type=int, dest="train_per_class",
                        help="training images per class (default 7)")
    p_eval.add_argument("--shuffle-split", action="store_true", default=None, dest="shuffle_split",
                        help="pick training images per class with a seeded shuffle instead of load order")

    p_kfold = sub.add_parser("kfold", help="stratified k-fold cross-validation")
    _add_common(p_kfold)
    _add_classifier(p_kfold)
    p_kfold.add_argument("--folds", type=int, help="fold count (default 10)")

    p_roc = sub.add_parser("roc", help="verification FAR/GAR threshold sweep")
    _add_common(p_roc)
    p_roc.add_argument("--distance", choices=["log", "euclidean"], help="trial score distance (default log)")
    p_roc.add_argument("--train-per-class", type=int, dest="train_per_class",
                        help="training images per class (default 7)")
    p_roc.add_argument("--shuffle-split", action="store_true", default=None, dest="shuffle_split",
                        help="pick training images per class with a seeded shuffle instead of load order")
    p_roc.add_argument("--thresholds", type=int, help="evenly spaced thresholds in the sweep (default 200)")

    return parser


def _parse_resize(text: str) -> tuple[int, int]:
    parts = str(text).lower().split("x")
    if len(parts) != 2:
        raise UsageError(f"--resize wants WxH, got {text!r}")
    try:
        w, h = int(parts[0]), int(parts[1])
    except ValueError:
        raise UsageError(f"--resize wants integers, got {text!r}") from None
    if w < 3 or h < 3 or w % 3 or h % 3:
        raise UsageError(f"--resize {text!r}: dimensions must be positive multiples of 3")
    return w, h


def _resolve_workers(value) -> int:
    if value is None:
        env = os.environ.get("NBLGC_WORKERS")
        if env is not None:
            try:
                value = int(env)
            except ValueError:
                raise UsageError(f"NBLGC_WORKERS must be an integer, got {env!r}") from None
        else:
            value = os.cpu_count() or 1
    value = int(value)
    if value < 1:
        raise UsageError("worker count must be at least 1")
    return value


def _merge(args: argparse.Namespace) -> RunConfig:
    merged = dict(DEFAULTS)
    if getattr(args, "config", None):
        cfg_path = Path(args.config)
        if not cfg_path.is_file():
            raise UsageError(f"config file {cfg_path} not found")
        try:
            loaded = json.loads(cfg_path.read_text())
        except json.JSONDecodeError as err:
            raise UsageError(f"config file {cfg_path} is not valid JSON: {err}") from None
        if not isinstance(loaded, dict):
            raise UsageError(f"config file {cfg_path} must hold a JSON object")
        unknown = set(loaded) - set(DEFAULTS) - {"data"}
        if unknown:
            raise UsageError(f"config file {cfg_path} has unknown keys: {sorted(unknown)}")
        merged.update(loaded)
    for key in list(merged) + ["data"]:
        flag = getattr(args, key, None)
        if flag is not None:
            merged[key] = flag
    if merged.get("data") is None:
        raise UsageError("--data is required (directly or via the config file)")

    data = Path(str(merged["data"]))
    if not data.is_dir():
        raise DatasetError(f"dataset root {data} is not a directory")
    try:
        variant = ContourVariant.from_string(str(merged["variant"]))
        ref = FuzzifierRef.from_string(str(merged["ref"]))
    except ValueError as err:
        raise UsageError(str(err)) from None
    for name in ("k", "degree", "max_passes", "train_per_class", "folds", "seed", "thresholds"):
        merged[name] = int(merged[name])
    if merged["degree"] not in (1, 2):
        raise UsageError("--degree must be 1 or 2")
    if merged["k"] < 1:
        raise UsageError("--k must be at least 1")
    if merged["folds"] < 2:
        raise UsageError("--folds must be at least 2")
    if merged["train_per_class"] < 1:
        raise UsageError("--train-per-class must be at least 1")
    if merged["thresholds"] < 2:
        raise UsageError("--thresholds must be at least 2")
    if str(merged["classifier"]) not in ("knn", "svm"):
        raise UsageError(f"unknown classifier {merged['classifier']!r}")
    if str(merged["distance"]) not in ("log", "euclidean"):
        raise UsageError(f"unknown distance {merged['distance']!r}")

    return RunConfig(
        command=args.command,
        data=data,
        resize=_parse_resize(str(merged["resize"])),
        variant=variant,
        ref=ref,
        classifier=str(merged["classifier"]),
        k=merged["k"],
        distance=str(merged["distance"]),
        degree=merged["degree"],
        c=float(merged["C"]),
        offset=float(merged["offset"]),
        tol=float(merged["tol"]),
        max_passes=merged["max_passes"],
        train_per_class=merged["train_per_class"],
        folds=merged["folds"],
        seed=merged["seed"],
        out=Path(str(merged["out"])),
        workers=_resolve_workers(merged["workers"]),
        zscore=bool(merged["zscore"]),
        shuffle_split=bool(merged["shuffle_split"]),
        skip_errors=bool(merged["skip_errors"]),
        thresholds=merged["thresholds"],
    )


def _config_echo(cfg: RunConfig) -> dict[str, object]:
    return {
        "command": cfg.command,
        "data": str(cfg.data),
        "resize": f"{cfg.resize[0]}x{cfg.resize[1]}",
        "variant": cfg.variant.value,
        "ref": cfg.ref.value,
        "classifier": cfg.classifier,
        "k": cfg.k,
        "distance": cfg.distance,
        "degree": cfg.degree,
        "C": cfg.c,
        "offset": cfg.offset,
        "tol": cfg.tol,
        "max_passes": cfg.max_passes,
        "train_per_class": cfg.train_per_class,
        "folds": cfg.folds,
        "seed": cfg.seed,
        "zscore": cfg.zscore,
        "shuffle_split": cfg.shuffle_split,
        "skip_errors": cfg.skip_errors,
        "thresholds": cfg.thresholds,
    }


def _load_samples(cfg: RunConfig):
    entries = load_dataset(cfg.data, cfg.resize, skip_errors=cfg.skip_errors)
    vectors = extract_many([e.image for e in entries], cfg.variant, cfg.ref, cfg.workers)
    samples = [LabeledSample(fv.values, e.class_label) for e, fv in zip(entries, vectors)]
    return entries, vectors, samples


def _write_echo_json(cfg: RunConfig) -> None:
    path = cfg.out / "config.json"
    path.write_text(json.dumps(_config_echo(cfg), indent=2, sort_keys=True) + "\n")


def _classifier_config(cfg: RunConfig) -> ClassifierConfig:
    return ClassifierConfig(
        kind=cfg.classifier,
        neighbors_k=cfg.k,
        distance=cfg.distance,
        degree=cfg.degree,
        c=cfg.c,
        offset=cfg.offset,
        tol=cfg.tol,
        max_passes=cfg.max_passes,
        seed=cfg.seed,
        zscore=cfg.zscore,
    )


def _split_spec(cfg: RunConfig) -> SplitSpec:
    return SplitSpec(cfg.train_per_class, cfg.seed if cfg.shuffle_split else None)


def cmd_extract(cfg: RunConfig) -> int:
    entries, vectors, _ = _load_samples(cfg)
    n_features = (cfg.resize[0] // 3) * (cfg.resize[1] // 3)
    out_path = cfg.out / "features.csv"
    write_features_csv(
        out_path,
        [(e.source_path, e.class_label, fv) for e, fv in zip(entries, vectors)],
        n_features=n_features,
    )
    _write_echo_json(cfg)
    print(f"wrote {len(entries)} feature rows to {out_path}")
    return EXIT_OK


def cmd_evaluate(cfg: RunConfig) -> int:
    _, _, samples = _load_samples(cfg)
    train, test = split_per_class(samples, _split_spec(cfg))
    report = evaluate(train, test, _classifier_config(cfg), _config_echo(cfg))
    out_path = cfg.out / "report.csv"
    write_report_csv(report, out_path)
    _write_echo_json(cfg)
    correct = sum(c for c, _ in report.per_class.values())
    total = sum(t for _, t in report.per_class.values())
    print(f"accuracy {report.accuracy:.6g}% ({correct}/{total}) -> {out_path}")
    return EXIT_OK


def cmd_kfold(cfg: RunConfig) -> int:
    _, _, samples = _load_samples(cfg)
    report = kfold(samples, cfg.folds, _classifier_config(cfg), _config_echo(cfg))
    out_path = cfg.out / "folds.csv"
    write_folds_csv(report, out_path)
    _write_echo_json(cfg)
    mean = sum(report.fold_accuracies) / len(report.fold_accuracies)
    print(f"kfold mean accuracy {mean:.6g}% over {cfg.folds} folds -> {out_path}")
    return EXIT_OK


def cmd_roc(cfg: RunConfig) -> int:
    _, _, samples = _load_samples(cfg)
    train, test = split_per_class(samples, _split_spec(cfg))
    points = roc_far_gar(train, test, cfg.distance, cfg.thresholds)
    out_path = cfg.out / "roc.csv"
    write_roc_csv(points, _config_echo(cfg), out_path)
    _write_echo_json(cfg)
    print(f"wrote {len(points)} roc points to {out_path}")
    return EXIT_OK


_COMMANDS = {
    "extract": cmd_extract,
    "evaluate": cmd_evaluate,
    "kfold": cmd_kfold,
    "roc": cmd_roc,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _merge(args)
        cfg.out.mkdir(parents=True, exist_ok=True)
        return _COMMANDS[cfg.command](cfg)
    except UsageError as err:
        print(f"nblgc: error: {err}", file=sys.stderr)
        return EXIT_USAGE
    except (DatasetError, PgmParseError, OSError, ValueError) as err:
        print(f"nblgc: data error: {err}", file=sys.stderr)
        return EXIT_DATA
    except Exception:
        print("nblgc: internal error", file=sys.stderr)
        traceback.print_exc()
        return EXIT_INTERNAL


def run() -> None:
    sys.exit(main())


if __name__ == "__main__":
    run()
