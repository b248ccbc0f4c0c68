"""Command-line pipelines over the file formats in logo.io.

Subcommands: generate, pretrain, adapt, pseudolabel, sinkhorn, evaluate.
Every run is reproducible from its --seed; reports are canonical JSON so
identical runs produce byte-identical files. Set LOGO_LOG=info|debug for
progress diagnostics (default off).
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import os
import sys
from pathlib import Path

from . import io as lio
from .core import ClassPrior, FeatureMatrix, LogoError, ProbMatrix, split_seed
from .ensemble import EnsembleConfig, aggregate_views
from .metrics import evaluate as evaluate_labels
from .pipeline import ASSIGNMENT_MODES, refine, refine_stats
from .prototype import AnchorConfig
from .synth import default_scenarios, generate
from .trainer import TrainConfig, adapt, source_pretrain
from .transport import CostMatrix, SinkhornConfig, assign_labels, expand_plan, sinkhorn_solve

log = logging.getLogger("logo.cli")

_LOG_LEVELS = {"off": logging.WARNING, "info": logging.INFO, "debug": logging.DEBUG}


def configure_logging() -> None:
    level = os.environ.get("LOGO_LOG", "off").lower()
    logging.basicConfig(level=_LOG_LEVELS.get(level, logging.WARNING), stream=sys.stderr)


def _print_json(payload: dict) -> None:
    print(json.dumps(payload, indent=2, sort_keys=True))


def _sinkhorn_config(args) -> SinkhornConfig:
    return SinkhornConfig(lam=args.lam, max_iters=args.max_iters, tol=args.tol)


def cmd_generate(args) -> int:
    presets = default_scenarios()
    if args.config:
        cfg = lio.scenario_config_from_dict(lio.read_json(args.config))
    else:
        if args.scenario not in presets:
            raise LogoError(
                f"unknown scenario {args.scenario!r}; presets: {sorted(presets)}"
            )
        cfg = presets[args.scenario]
    if args.seed is not None:
        cfg = dataclasses.replace(cfg, seed=args.seed)
    scenario = generate(cfg)
    out = Path(args.out_dir)
    os.makedirs(out, exist_ok=True)
    lio.write_matrix(out / "source_features.lgf", scenario.source_features)
    lio.write_labels(out / "source_labels.lgl", scenario.source_labels)
    lio.write_matrix(out / "target_features.lgf", scenario.target_features)
    lio.write_labels(out / "target_labels.lgl", scenario.target_labels)
    lio.write_json(out / "scenario.json", lio.config_to_dict(cfg))
    log.info("wrote scenario %s to %s", args.scenario, out)
    return 0


def cmd_pretrain(args) -> int:
    features = FeatureMatrix(lio.read_matrix(args.features))
    labels = lio.read_labels(args.labels)
    cfg = TrainConfig(
        epochs=args.epochs,
        steps_per_epoch=args.steps_per_epoch,
        batch_size=args.batch_size,
        learning_rate=args.learning_rate,
        seed=args.seed,
    )
    log.info("pretraining on %d samples, %d classes", features.n, labels.k)
    model = source_pretrain(features, labels, cfg)
    lio.save_model(args.out_model, model)
    pred = model.predict(features.data)
    accuracy = float((pred == labels.labels).mean())
    _print_json({"train_accuracy": accuracy, "model_dir": str(args.out_model)})
    return 0


def _train_config(args) -> TrainConfig:
    if args.config:
        return lio.train_config_from_dict(lio.read_json(args.config))
    return TrainConfig(
        epochs=args.epochs,
        steps_per_epoch=args.steps_per_epoch,
        batch_size=args.batch_size,
        learning_rate=args.learning_rate,
        ema_momentum=args.ema_momentum,
        ensemble=EnsembleConfig(
            views=args.views,
            noise_sigma=args.noise_sigma,
            seed=split_seed(args.seed, 3),
        ),
        anchor=AnchorConfig(rho=args.rho, min_anchors=args.min_anchors),
        sinkhorn=_sinkhorn_config(args),
        seed=args.seed,
        assignment=args.mode,
    )


def cmd_adapt(args) -> int:
    model = lio.load_model(args.model)
    features = FeatureMatrix(lio.read_matrix(args.features))
    truth = lio.read_labels(args.truth) if args.truth else None
    cfg = _train_config(args)
    log.info("adapting over %d samples for %d epochs (%s assignment)",
             features.n, cfg.epochs, cfg.assignment)
    report = adapt(model, features, cfg, ground_truth=truth)
    lio.save_model(args.out_model, report.teacher)
    if args.report:
        lio.write_json(args.report, report.to_dict())
    _print_json(report.to_dict())
    return 0


def cmd_pseudolabel(args) -> int:
    features = FeatureMatrix(lio.read_matrix(args.features))
    views = [ProbMatrix(lio.read_matrix(v)) for v in args.views]
    out = aggregate_views(views, [features])
    result = refine(
        out,
        AnchorConfig(rho=args.rho, min_anchors=args.min_anchors),
        _sinkhorn_config(args),
        mode=args.mode,
    )
    lio.write_labels(args.out_labels, result.labels)
    stats = refine_stats(result)
    if args.report:
        lio.write_json(args.report, stats)
    _print_json(stats)
    return 0


def cmd_sinkhorn(args) -> int:
    cost_values = lio.read_matrix(args.cost)
    prior_row = lio.read_matrix(args.prior)
    if prior_row.shape[0] != 1:
        raise LogoError(f"prior must be a 1 x K matrix, got {prior_row.shape}")
    weights = prior_row[0]
    prior = ClassPrior(weights=weights / weights.sum(), active=weights > 0)
    if prior.k != cost_values.shape[1]:
        raise LogoError(
            f"prior k={prior.k} does not match cost columns {cost_values.shape[1]}"
        )
    cost = CostMatrix(values=cost_values, column_active=prior.active.copy())
    plan = sinkhorn_solve(cost, prior, _sinkhorn_config(args))
    log.info("solve finished after %d iterations (error %.2e)",
             plan.iterations, plan.marginal_error)
    lio.write_matrix(args.out_plan, expand_plan(plan))
    lio.write_labels(args.out_labels, assign_labels(plan))
    info = {
        "converged": bool(plan.converged),
        "iterations": int(plan.iterations),
        "marginal_error": float(plan.marginal_error),
    }
    if args.report:
        lio.write_json(args.report, info)
    _print_json(info)
    return 0


def cmd_evaluate(args) -> int:
    truth = lio.read_labels(args.truth)
    pred = lio.read_labels(args.pred)
    report = evaluate_labels(truth, pred, count_ignored=args.count_ignored)
    if args.report:
        lio.write_json(args.report, report)
    _print_json(report)
    return 0


def _sinkhorn_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--lambda", dest="lam", type=float, default=0.05)
    p.add_argument("--max-iters", type=int, default=1000)
    p.add_argument("--tol", type=float, default=1e-6)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="logo",
        description="Pseudo-label refinement and source-free self-training pipelines.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write a synthetic benchmark scenario")
    p.add_argument("--scenario", default="severe-shift")
    p.add_argument("--config", default=None, help="ScenarioConfig JSON file")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(fn=cmd_generate)

    p = sub.add_parser("pretrain", help="train the source classifier")
    p.add_argument("--features", required=True)
    p.add_argument("--labels", required=True)
    p.add_argument("--out-model", required=True)
    p.add_argument("--epochs", type=int, default=3)
    p.add_argument("--steps-per-epoch", type=int, default=300)
    p.add_argument("--batch-size", type=int, default=128)
    p.add_argument("--learning-rate", type=float, default=0.5)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(fn=cmd_pretrain)

    p = sub.add_parser("adapt", help="self-train the adapter on target features")
    p.add_argument("--model", required=True)
    p.add_argument("--features", required=True)
    p.add_argument("--out-model", required=True)
    p.add_argument("--report", default=None)
    p.add_argument("--truth", default=None, help="optional labels for per-epoch metrics")
    p.add_argument("--config", default=None, help="TrainConfig JSON file (overrides flags)")
    p.add_argument("--epochs", type=int, default=3)
    p.add_argument("--steps-per-epoch", type=int, default=50)
    p.add_argument("--batch-size", type=int, default=64)
    p.add_argument("--learning-rate", type=float, default=1e-3)
    p.add_argument("--ema-momentum", type=float, default=0.999)
    p.add_argument("--views", type=int, default=4)
    p.add_argument("--noise-sigma", type=float, default=0.1)
    p.add_argument("--rho", type=float, default=0.8)
    p.add_argument("--min-anchors", type=int, default=1)
    _sinkhorn_flags(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--mode", choices=ASSIGNMENT_MODES, default="full")
    p.set_defaults(fn=cmd_adapt)

    p = sub.add_parser("pseudolabel", help="refine dumped per-view predictions")
    p.add_argument("--features", required=True)
    p.add_argument("--views", nargs="+", required=True, help="per-view probability files")
    p.add_argument("--out-labels", required=True)
    p.add_argument("--report", default=None)
    p.add_argument("--rho", type=float, default=0.8)
    p.add_argument("--min-anchors", type=int, default=1)
    _sinkhorn_flags(p)
    p.add_argument("--mode", choices=ASSIGNMENT_MODES, default="full")
    p.set_defaults(fn=cmd_pseudolabel)

    p = sub.add_parser("sinkhorn", help="solve one transport problem from files")
    p.add_argument("--cost", required=True)
    p.add_argument("--prior", required=True, help="1 x K matrix file of class weights")
    p.add_argument("--out-plan", required=True)
    p.add_argument("--out-labels", required=True)
    p.add_argument("--report", default=None)
    _sinkhorn_flags(p)
    p.set_defaults(fn=cmd_sinkhorn)

    p = sub.add_parser("evaluate", help="score predictions against ground truth")
    p.add_argument("--truth", required=True)
    p.add_argument("--pred", required=True)
    p.add_argument("--count-ignored", action="store_true")
    p.add_argument("--report", default=None)
    p.set_defaults(fn=cmd_evaluate)
    return parser


def main(argv=None) -> int:
    configure_logging()
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except LogoError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
