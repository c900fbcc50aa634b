"""Command line front end: train, sweep, benchmark, demo a recovery."""

import argparse
import os
import sys
from pathlib import Path

import numpy as np

from .codec import ScoreParams
from .env import CompressionEnv
from .exceptions import ConfigError, DataFormatError, RecoveryError
from .experiment import (
    OUT_DIR_ENV,
    ExperimentConfig,
    _build_codec,
    bench_timing,
    resolve_dataset,
    run_experiment,
    sweep_scores,
)


def _load_config(args):
    if args.config:
        cfg = ExperimentConfig.from_file(args.config)
    else:
        cfg = ExperimentConfig()
    if args.dataset:
        cfg.dataset = args.dataset
    if args.agent:
        cfg.agent = args.agent
    if getattr(args, "steps", None) is not None:
        cfg.steps = args.steps
    if args.seed is not None:
        cfg.seeds = [args.seed]
    if args.out_dir:
        cfg.out_dir = args.out_dir
    cfg.validate()
    return cfg


def _out_dir(args, cfg):
    out = Path(args.out_dir or cfg.out_dir or os.environ.get(OUT_DIR_ENV, "runs"))
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_run(args):
    cfg = _load_config(args)
    summary = run_experiment(cfg, out_dir=_out_dir(args, cfg))
    for seed in summary["seeds"]:
        for kind, res in summary["results"][str(seed)].items():
            print(
                f"seed {seed} {kind}: final {res['final_score']:.4f}  "
                f"best {res['best_score']:.4f}  mean_last10 {res['mean_last10']:.4f}"
                if res["final_score"] is not None
                else f"seed {seed} {kind}: no evaluations (steps=0)"
            )
    print(f"outputs in {summary['out_dir']}")
    return 0


def cmd_sweep(args):
    cfg = _load_config(args)
    if args.ratios:
        ratios = [float(tok) for tok in args.ratios.split(",") if tok.strip()]
    else:
        ratios = [round(0.1 * i, 10) for i in range(1, 11)]
    out = _out_dir(args, cfg)
    rows = sweep_scores(cfg.dataset, ratios, cfg, out_path=out / "sweep.csv")
    print(f"{'ratio':>6s} {'mean_score':>11s} {'mean_error':>11s}")
    for c in ratios:
        scores = [r[4] for r in rows if r[1] == c]
        errors = [r[3] for r in rows if r[1] == c]
        print(f"{c:6.2f} {np.mean(scores):11.4f} {np.mean(errors):11.4f}")
    print(f"curve written to {out / 'sweep.csv'}")
    return 0


def cmd_bench(args):
    cfg = _load_config(args)
    out = _out_dir(args, cfg)
    report = bench_timing(cfg, reps=args.reps, out_path=out / "bench.csv")
    for op in sorted(report["medians_s"]):
        note = report["complexity"].get(op, "")
        print(f"{op:26s} {report['medians_s'][op] * 1e3:10.4f} ms  {note}")
    print(f"inference ratio osqnet/acoselm: {report['inference_ratio']:.2f}")
    print(f"doubling |A| ratio: {report['actions_doubling_ratio']:.2f}")
    print(f"update ratio acoselm/osqnet: {report['update_ratio']:.2f}")
    print(f"report written to {out / 'bench.csv'}")
    return 0


def cmd_recover_demo(args):
    cfg = _load_config(args)
    dataset = resolve_dataset(cfg.dataset, cfg.data_seed)
    if not 0 <= args.index < dataset.n_samples:
        print(
            f"error: index {args.index} out of range for {dataset.n_samples} samples",
            file=sys.stderr,
        )
        return 1
    codec = _build_codec(cfg, dataset.n_features)
    env = CompressionEnv(dataset, codec, ScoreParams.from_list(cfg.score_params))
    res = env.step(dataset.X[args.index], args.ratio)
    print(f"c={res.ratio:.3f} m={res.m} e={res.error:.6f} score={res.reward:.6f}")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="adaptivecs",
        description="Compressed sensing with a learned per-datum compression ratio.",
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file (ExperimentConfig fields)")
    common.add_argument("--dataset", help="dataset spec, e.g. synth:n=64,k=4,count=100")
    common.add_argument("--agent", choices=["osqnet", "acoselm", "both"],
                        help="agent kind override")
    common.add_argument("--seed", type=int, help="replace the seed list with one seed")
    common.add_argument("--out-dir",
                        help=f"output directory (default ${OUT_DIR_ENV} or ./runs)")

    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", parents=[common], help="train agent(s) online")
    p_run.add_argument("--steps", type=int, help="training steps override")
    p_run.set_defaults(func=cmd_run)

    p_sweep = sub.add_parser("sweep", parents=[common],
                             help="score curve over fixed ratios")
    p_sweep.add_argument("--ratios", help="comma-separated ratios (default 0.1..1.0)")
    p_sweep.set_defaults(func=cmd_sweep)

    p_bench = sub.add_parser("bench", parents=[common],
                             help="median wall-clock of core operations")
    p_bench.add_argument("--reps", type=int, default=100,
                         help="repetitions per operation (default 100)")
    p_bench.set_defaults(func=cmd_bench)

    p_demo = sub.add_parser("recover-demo", parents=[common],
                            help="compress/recover one datum and print its score")
    p_demo.add_argument("--index", type=int, default=0, help="sample index")
    p_demo.add_argument("--ratio", type=float, default=0.5, help="compression ratio")
    p_demo.set_defaults(func=cmd_recover_demo)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ConfigError as exc:
        print(f"error: invalid config: {exc}", file=sys.stderr)
        return 1
    except DataFormatError as exc:
        print(f"error: bad data: {exc}", file=sys.stderr)
        return 1
    except RecoveryError as exc:
        print(f"error: recovery failed: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
