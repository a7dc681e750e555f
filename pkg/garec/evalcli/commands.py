"""
Command-line front-end.

Each verb is one pipeline stage, so intermediate artifacts (prepared splits, factors,
checkpoints) can be reused across runs:

    garec prepare --input u.data --format tab100k --out data/ml100k --split 0.8 --seed 0
    garec factorize --data data/ml100k --config run.cfg --out factors.ckpt
    garec train --data data/ml100k --factors factors.ckpt --config run.cfg --out model.ckpt
    garec evaluate --data data/ml100k --model model.ckpt --out result.json
    garec baseline-nmf --data data/ml100k --factors factors.ckpt --out nmf.json
    garec crossval --input u.data --format tab100k --folds 5 --config run.cfg --out cv.json
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

from garec import __version__
from garec.config import NmfConfig, TrainConfig, config_echo, load_config, train_config_from_echo
from garec.data import (
    RatingFormat,
    SplitSpec,
    build_matrix,
    dataset_stats,
    load_prepared,
    parse_ratings,
    save_prepared,
    split,
)
from garec.exceptions import GarecError
from garec.graph import build_corating_graph
from garec.nmf import factorize_with_trace, load_factors_with_meta, masked_rmse, save_factors
from garec.train import carve_validation, fit, fit_portion_record, load_checkpoint, save_checkpoint
from garec.utils import configure_logging, logger, throw

from .protocol import crossval, evaluate, evaluate_nmf_baseline

LOGGER = logger("cli")


def _write_json(path: str, payload: dict) -> str:
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(payload, handle, indent=2, sort_keys=True)
        handle.write("\n")
    LOGGER.info(f"Wrote {path}")
    return path


def _split_label(meta: dict):
    if "fold" in meta:
        return f"fold {meta['fold']}/{meta['n_folds']}"
    return meta.get("split")


def _train_overrides(args) -> dict:
    """Command-line values that override the config file; unset flags are None."""
    overrides = {
        "seed": args.seed,
        "max_epochs": args.epochs,
        "learning_rate": args.lr,
        "batch_size": args.batch_size,
        "d": args.d,
        "d_prime": args.d_prime,
        "cap": args.cap,
        "n_jobs": args.n_jobs,
    }
    if args.freeze_factors:
        overrides["freeze_factors"] = True
    return overrides


def cmd_prepare(args) -> None:
    dataset = parse_ratings(args.input, args.format)
    stats = dataset_stats(dataset)
    LOGGER.info(
        f"{stats['n_ratings']} ratings, {stats['n_users']} users, {stats['n_items']} items, "
        f"density {stats['density']:.4f}, mean rating {stats['mean_rating']:.3f}"
    )
    meta = {"input": os.path.abspath(args.input), "format": args.format, "seed": args.seed}
    if args.folds:
        for fold in range(args.folds):
            train, test = split(dataset, SplitSpec(fold_index=fold, n_folds=args.folds, seed=args.seed))
            fold_meta = {**meta, "fold": fold, "n_folds": args.folds}
            save_prepared(os.path.join(args.out, f"fold_{fold}"), train, test, fold_meta)
        return
    train, test = split(dataset, SplitSpec(train_fraction=args.split, seed=args.seed))
    save_prepared(args.out, train, test, {**meta, "split": args.split})


def _factorize_overrides(args) -> dict:
    return {
        "d": args.d,
        "seed": args.seed,
        "nmf_max_iters": args.iters,
        "nmf_rel_tol": args.rel_tol,
        "nmf_epsilon": args.epsilon,
    }


def cmd_factorize(args) -> None:
    prepared = load_prepared(args.data)
    cfg = load_config(args.config, _factorize_overrides(args))
    fit_part, _ = carve_validation(prepared.train, cfg.validation_fraction, cfg.seed)
    R = build_matrix(fit_part)
    nmf_cfg = cfg.nmf_config()
    result = factorize_with_trace(R, nmf_cfg)
    LOGGER.info(
        f"NMF finished after {result.iterations} iteration(s) "
        f"({'converged' if result.converged else 'budget exhausted'}), "
        f"rmse {masked_rmse(R, result.factors):.4f} on {len(fit_part)} of {len(prepared.train)} training ratings"
    )
    save_factors(
        result.factors,
        args.out,
        seed=nmf_cfg.seed,
        config=config_echo(nmf_cfg),
        fit_portion=fit_portion_record(prepared.train, cfg),
    )


def cmd_train(args) -> None:
    prepared = load_prepared(args.data)
    cfg = load_config(args.config, _train_overrides(args))
    factors = None
    if args.factors:
        factors, meta = load_factors_with_meta(args.factors, expect_d=cfg.d)
        expected = fit_portion_record(prepared.train, cfg)
        if meta.get("fit_portion") != expected:
            throw(
                f"{args.factors}: factors were fitted on {meta.get('fit_portion')}, but this run trains on "
                f"{expected}; rerun factorize with the same config and seed"
            )
    state, report = fit(prepared.train, cfg, factors=factors, progress=args.progress)
    save_checkpoint(state, args.out)
    if args.report:
        report.to_jsonl(args.report)
    LOGGER.info(f"Best epoch {report.best_epoch} of {len(report.epochs)}")


def cmd_evaluate(args) -> None:
    prepared = load_prepared(args.data)
    state = load_checkpoint(args.model)
    if state.config:
        cfg = train_config_from_echo(state.config)
    else:
        cfg = TrainConfig(d=state.d, d_prime=state.d_prime)
    R_train = build_matrix(prepared.train)
    graph = build_corating_graph(R_train, cfg.cap, args.n_jobs or cfg.n_jobs)
    result = evaluate(state, prepared.test, graph, R_train, n_jobs=args.n_jobs or cfg.n_jobs)
    _write_json(
        args.out,
        {
            **result.to_dict(),
            "method": "garec",
            "split": _split_label(prepared.meta),
            "seed": state.seed,
            "config_echo": config_echo(cfg),
        },
    )


def cmd_baseline_nmf(args) -> None:
    prepared = load_prepared(args.data)
    fp, meta = load_factors_with_meta(args.factors)
    result = evaluate_nmf_baseline(fp, prepared.test)
    _write_json(
        args.out,
        {
            **result.to_dict(),
            "method": "nmf",
            "split": _split_label(prepared.meta),
            "seed": meta["seed"],
            "config_echo": meta.get("config", {"d": fp.d}),
        },
    )


def cmd_crossval(args) -> None:
    dataset = parse_ratings(args.input, args.format)
    cfg = load_config(args.config, _train_overrides(args))
    report = crossval(dataset, args.folds, cfg, progress=args.progress)
    _write_json(args.out, {**report.to_dict(), "split": f"{args.folds}-fold", "seed": cfg.seed})


def _add_train_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="flat key = value config file")
    parser.add_argument("--seed", type=int)
    parser.add_argument("--epochs", type=int, help="overrides max_epochs")
    parser.add_argument("--lr", type=float, help="overrides learning_rate")
    parser.add_argument("--batch-size", type=int)
    parser.add_argument("--d", type=int)
    parser.add_argument("--d-prime", type=int)
    parser.add_argument("--cap", type=int, help="neighbor cap T")
    parser.add_argument("--n-jobs", type=int)
    parser.add_argument("--freeze-factors", action="store_true", help="keep NMF factors fixed")
    parser.add_argument("--progress", action="store_true", help="show progress bars")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="garec", description="Graph attention rating prediction")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)
    formats = [f.value for f in RatingFormat]

    p = sub.add_parser("prepare", help="parse a rating log and write train/test splits")
    p.add_argument("--input", required=True)
    p.add_argument("--format", choices=formats, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--split", type=float, default=0.8, help="train fraction")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--folds", type=int, help="write fold_<k>/ directories instead of one split")
    p.set_defaults(func=cmd_prepare)

    p = sub.add_parser("factorize", help="masked NMF on the portion of the training split that train fits")
    p.add_argument("--data", required=True)
    p.add_argument("--config", help="flat key = value config file; its d, seed, validation_fraction and nmf_* keys apply")
    p.add_argument("--d", type=int)
    p.add_argument("--iters", type=int, help="overrides nmf_max_iters")
    p.add_argument("--rel-tol", type=float, help="overrides nmf_rel_tol")
    p.add_argument("--epsilon", type=float, help="overrides nmf_epsilon")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_factorize)

    p = sub.add_parser("train", help="end-to-end training")
    p.add_argument("--data", required=True)
    p.add_argument("--factors", help="precomputed factors checkpoint")
    p.add_argument("--out", required=True)
    p.add_argument("--report", help="per-epoch JSON lines")
    _add_train_flags(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("evaluate", help="score a model checkpoint on the test split")
    p.add_argument("--data", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--n-jobs", type=int)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("baseline-nmf", help="score the NMF dot-product baseline on the test split")
    p.add_argument("--data", required=True)
    p.add_argument("--factors", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_baseline_nmf)

    p = sub.add_parser("crossval", help="k-fold train and evaluate, GARec and NMF")
    p.add_argument("--input", required=True)
    p.add_argument("--format", choices=formats, required=True)
    p.add_argument("--folds", type=int, default=5)
    p.add_argument("--out", required=True)
    _add_train_flags(p)
    p.set_defaults(func=cmd_crossval)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(logging.DEBUG if args.verbose else logging.INFO)
    try:
        args.func(args)
    except GarecError as e:
        print(f"garec: error: {e}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
