import argparse
import json
import logging
import sys
from typing import List, Optional, Sequence

from .configs import config_path
from .datasets import LorenzConfig, generate_lorenz, save_dataset
from .exceptions import LFADSException, error_payload
from .run import SearchSpace, run_multi, run_pbt, run_single
from .trainer import evaluate_run
from .utils.logger import configure_logging, logger


def _generate_lorenz(args: argparse.Namespace) -> int:
    cfg = LorenzConfig(
        n_trials=args.trials,
        n_neurons=args.neurons,
        n_heldout=args.heldout,
        n_bins=args.bins,
        fp_steps=args.fp_steps,
        base_rate=args.base_rate,
        seed=args.seed,
    )
    save_dataset(generate_lorenz(cfg), args.out)
    return 0


def _train(args: argparse.Namespace) -> int:
    run_dir = run_single(config_path(args.config), args.overrides, run_dir=args.run_dir, resume=args.resume)
    print(run_dir)
    return 0


def _search(args: argparse.Namespace) -> int:
    summary = run_multi(
        config_path(args.config),
        SearchSpace.from_yaml(config_path(args.space)),
        n_samples=args.samples,
        n_workers=args.workers,
        seed=args.seed,
        out_dir=args.out,
        overrides=args.overrides,
        executor=args.executor,
    )
    print(summary.to_string(index=False))
    return 0


def _pbt(args: argparse.Namespace) -> int:
    history = run_pbt(
        config_path(args.config),
        SearchSpace.from_yaml(config_path(args.space)),
        population_size=args.population,
        generation_epochs=args.gen_epochs,
        n_generations=args.generations,
        exploit_quantile=args.quantile,
        seed=args.seed,
        out_dir=args.out,
        overrides=args.overrides,
        n_workers=args.workers,
        executor=args.executor,
    )
    print(json.dumps([{"generation": g["generation"], "best_loss": g["best_loss"]} for g in history]))
    return 0


def _eval(args: argparse.Namespace) -> int:
    print(json.dumps(evaluate_run(args.run_dir, args.data, split=args.split), sort_keys=True))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lfads", description="Latent factor analysis via dynamical systems.")
    parser.add_argument("--log-level", default="INFO", choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    commands = parser.add_subparsers(dest="command", required=True)

    gen = commands.add_parser("generate-lorenz", help="Write a synthetic Lorenz spiking dataset.")
    gen.add_argument("--out", required=True)
    gen.add_argument("--trials", type=int, default=1000)
    gen.add_argument("--neurons", type=int, default=30)
    gen.add_argument("--heldout", type=int, default=0)
    gen.add_argument("--bins", type=int, default=50)
    gen.add_argument("--fp-steps", type=int, default=0)
    gen.add_argument("--base-rate", type=float, default=0.3)
    gen.add_argument("--seed", type=int, default=0)
    gen.set_defaults(handler=_generate_lorenz)

    train = commands.add_parser("train", help="Train a single model.")
    train.add_argument("config")
    train.add_argument("overrides", nargs="*", metavar="key=value")
    train.add_argument("--run-dir")
    train.add_argument("--resume", action="store_true")
    train.set_defaults(handler=_train)

    for name, handler, help_text in (("search", _search, "Random hyperparameter search."),
                                     ("pbt", _pbt, "Population-based training.")):
        sub = commands.add_parser(name, help=help_text)
        sub.add_argument("config")
        sub.add_argument("overrides", nargs="*", metavar="key=value")
        sub.add_argument("--space", required=True)
        sub.add_argument("--seed", type=int, default=0)
        sub.add_argument("--out", default=f"runs/{name}")
        sub.add_argument("--executor", choices=["process", "thread"], default="process")
        sub.set_defaults(handler=handler)
        if name == "search":
            sub.add_argument("--samples", type=int, required=True)
            sub.add_argument("--workers", type=int, default=1)
        else:
            sub.add_argument("--population", type=int, required=True)
            sub.add_argument("--generations", type=int, required=True)
            sub.add_argument("--gen-epochs", type=int, required=True)
            sub.add_argument("--quantile", type=float, default=0.25)
            sub.add_argument("--workers", type=int)

    ev = commands.add_parser("eval", help="Score a run's posterior means (co-bps, fp-bps, R²).")
    ev.add_argument("run_dir")
    ev.add_argument("--data", required=True)
    ev.add_argument("--split", choices=["train", "valid"], default="valid")
    ev.set_defaults(handler=_eval)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(getattr(logging, args.log_level))
    try:
        return args.handler(args)
    except Exception as e:
        if isinstance(e, (LFADSException, OSError, ValueError)):
            logger.debug("Command failed", exc_info=True)
        else:
            logger.error("Unexpected failure", exc_info=True)
        print(json.dumps(error_payload(e)), file=sys.stderr)
        return 1


def run(argv: Optional[List[str]] = None) -> None:
    sys.exit(main(argv))


if __name__ == "__main__":
    run()
