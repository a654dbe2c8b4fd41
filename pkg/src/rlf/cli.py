"""Batch experiment harness.

Subcommands wrap the library: predicate analysis, mixing diagnostics,
advantage estimation, predictor-gap measurement, and end-to-end reduction
runs. Output is machine-first JSON on stdout (and optionally a file), with
a short human summary on stderr. Given the same arguments and seed, the
``result`` section is byte-identical across runs and worker counts; the
``manifest`` section holds the volatile fields (wall clock, worker count,
paths) and is excluded from reproducibility comparisons.

Exit codes: 0 completed (including a reduction that reports failure),
2 bad arguments, 3 infeasible parameters.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time

import numpy as np

from . import __version__
from .distinguish import by_name as distinguisher_by_name
from .distinguish import estimate_advantage
from .errors import InfeasibleParameterError, OracleExhaustedError
from .hypergraph import (
    deviation_decay_curve,
    mixing_time,
    mixing_tv_samples,
)
from .localfn import Secret, SecretOracle, sample_secret_with_weight
from .predicate import NoisyPredicate, Predicate, builtin, builtin_names
from .reduction import (
    ReductionConfig,
    predictor_gap_table,
    resolve_params,
    search,
    search_noisy,
)
from .seeding import generator, substream
from .stats import tv_empirical_to_exact

EXIT_OK = 0
EXIT_BAD_ARGS = 2
EXIT_INFEASIBLE = 3


def _load_predicate(spec: str, noisy_beta=None):
    if spec.startswith("builtin:"):
        pred = builtin(spec[len("builtin:"):])
    elif os.path.exists(spec):
        with open(spec) as fh:
            obj = json.load(fh)
        if "beta" in obj and noisy_beta is None:
            return NoisyPredicate.from_json(obj)
        pred = Predicate.from_json(obj)
    else:
        raise ValueError(
            f"predicate {spec!r} is neither builtin:NAME nor an existing "
            f"file; builtins: {', '.join(builtin_names())}")
    if noisy_beta is not None:
        pred = NoisyPredicate(pred, float(noisy_beta))
    return pred


def _parse_secret(spec: str, n: int, rng):
    if spec == "random":
        return Secret.random(n, rng)
    if spec == "balanced":
        return sample_secret_with_weight(n, n // 2, rng)
    if spec.startswith("weight:"):
        return sample_secret_with_weight(n, int(spec.split(":", 1)[1]), rng)
    secret = Secret.from_string(spec)
    if secret.n != n:
        raise ValueError(f"secret has {secret.n} bits, expected {n}")
    return secret


def _emit(args, subcommand: str, result: dict, started: float) -> None:
    arg_echo = {k: v for k, v in sorted(vars(args).items())
                if k != "handler"}
    report = {
        "manifest": {
            "subcommand": subcommand,
            "seed": args.seed,
            "version": __version__,
            "workers": args.workers,
            "out": args.out,
            "args": arg_echo,
            "wall_clock_s": round(time.monotonic() - started, 3),
        },
        "result": result,
    }
    text = json.dumps(report, sort_keys=True, indent=2)
    print(text)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")


def _summary(line: str) -> None:
    print(line, file=sys.stderr)


# -- subcommands -----------------------------------------------------------------


def cmd_analyze_predicate(args) -> int:
    started = time.monotonic()
    pred = _load_predicate(args.predicate, args.noisy_beta)
    base = pred.base if isinstance(pred, NoisyPredicate) else pred
    bounds = tuple(args.bias_bounds) if args.bias_bounds else (0.05, 0.95)
    profile = base.profile(bias_bounds=bounds)
    result = profile.as_dict()
    result["predicate"] = pred.to_json()
    if isinstance(pred, NoisyPredicate):
        result["noisy_bias"] = pred.bias()
    if base.arity <= 12:
        result["fourier"] = profile.fourier.tolist()
    else:
        result["fourier"] = None  # table too large to dump
    constant = profile.correlation_order is None
    _emit(args, "analyze-predicate", result, started)
    _summary(f"bias={result['bias']:.4f} order={result['correlation_order']} "
             f"sensitive={profile.sensitive}")
    if constant and args.strict:
        _summary("constant predicate rejected in strict mode")
        return EXIT_INFEASIBLE
    return EXIT_OK


def cmd_mixing(args) -> int:
    started = time.monotonic()
    t = mixing_time(args.n, args.m, args.d, args.eps)
    curve_steps = min(t, args.max_curve_steps)
    rng_curve = generator(substream(args.seed, "mixing", "curve"))
    means, stderr = deviation_decay_curve(args.n, curve_steps, args.trials,
                                          rng_curve, workers=args.workers)
    v0 = (args.n - 1) / args.n
    expected = [v0 * (1 - 1 / args.n) ** i for i in range(curve_steps + 1)]
    result = {
        "n": args.n, "m": args.m, "d": args.d, "eps": args.eps,
        "t": t,
        "trials": args.trials,
        "v_curve": means.tolist(),
        "v_stderr": stderr.tolist(),
        "v_expected": expected,
        "tv_checkpoints": None,
    }
    space = args.n ** (args.m * args.d)
    if space <= 10 ** 6:
        checkpoints = sorted(set([0, t // 4, t // 2, (3 * t) // 4, t]))
        rng_tv = generator(substream(args.seed, "mixing", "tv"))
        hists = mixing_tv_samples(args.n, args.m, args.d, checkpoints,
                                  args.trials, rng_tv, workers=args.workers)
        rows = []
        boot = generator(substream(args.seed, "mixing", "boot"))
        for step in checkpoints:
            counts = hists[step]
            samples = np.repeat(np.arange(space), counts)
            est = tv_empirical_to_exact(samples, "uniform", support=space,
                                        rng=boot)
            rows.append({"step": step, "tv": est.value,
                         "ci_halfwidth": est.ci_halfwidth})
        result["tv_checkpoints"] = rows
    _emit(args, "mixing", result, started)
    if args.csv:
        with open(args.csv, "w") as fh:
            fh.write("step,mean_v,stderr,expected\n")
            for i in range(curve_steps + 1):
                fh.write(f"{i},{means[i]!r},{stderr[i]!r},{expected[i]!r}\n")
    _summary(f"t={t}, final mean V={means[-1]:.3e}")
    return EXIT_OK


def cmd_estimate_advantage(args) -> int:
    started = time.monotonic()
    pred = _load_predicate(args.predicate, args.noisy_beta)
    if args.d is not None and pred.arity != args.d:
        raise ValueError(f"--d {args.d} does not match predicate arity "
                         f"{pred.arity}")
    D = distinguisher_by_name(args.distinguisher, pred=pred)
    rng = generator(substream(args.seed, "advantage"))
    report = estimate_advantage(D, pred, args.n, args.m, args.trials, rng,
                                workers=args.workers, distinct=args.distinct)
    result = {
        "n": args.n, "m": args.m, "d": pred.arity,
        "distinguisher": D.name,
        "predicate": pred.to_json(),
        "distinct": args.distinct,
        "advantage_report": report.as_dict(),
    }
    _emit(args, "estimate-advantage", result, started)
    _summary(f"advantage={report.advantage:+.4f} ± {report.ci_halfwidth:.4f} "
             f"(planted={report.p_planted:.4f}, null={report.p_null:.4f})")
    return EXIT_OK


def _reduction_config(args) -> ReductionConfig:
    overrides = json.loads(args.config) if args.config else {}
    return ReductionConfig(eps=args.eps, seed=args.seed, **overrides)


def cmd_reduce(args) -> int:
    started = time.monotonic()
    pred = _load_predicate(args.predicate, args.noisy_beta)
    if args.d is not None and pred.arity != args.d:
        raise ValueError(f"--d {args.d} does not match predicate arity "
                         f"{pred.arity}")
    config = _reduction_config(args)
    D = distinguisher_by_name(args.distinguisher, pred=pred)
    oracle_rng = generator(substream(args.seed, "oracle"))
    secret = None
    if args.secret is not None:
        secret = _parse_secret(args.secret,
                               args.n, generator(substream(args.seed, "secret")))
    oracle = SecretOracle(pred, args.n, args.m, oracle_rng, secret=secret,
                          distinct=args.distinct)
    planted = oracle.secret
    if oracle.noisy:
        outcome = search_noisy(oracle, D, config, workers=args.workers)
        contains = any(np.array_equal(c.bits, planted.bits)
                       for c in outcome.candidates)
        result = {
            "mode": "noisy",
            "planted_secret": planted.to_string(),
            "secret_in_candidates": contains,
            "report": outcome.report,
        }
        _emit(args, "reduce", result, started)
        _summary(f"candidates={len(outcome.candidates)} "
                 f"secret_found={contains}")
    else:
        outcome = search(oracle, D, config, workers=args.workers)
        result = {
            "mode": "exact",
            "planted_secret": planted.to_string(),
            "success": outcome.success,
            "candidate": outcome.secret.to_string() if outcome.secret else None,
            "exact_match": bool(
                outcome.secret is not None
                and np.array_equal(outcome.secret.bits, planted.bits)),
            "report": outcome.report,
        }
        _emit(args, "reduce", result, started)
        _summary(f"success={outcome.success}")
    return EXIT_OK


def cmd_predictor_gap(args) -> int:
    started = time.monotonic()
    pred = _load_predicate(args.predicate, args.noisy_beta)
    if args.d is not None and pred.arity != args.d:
        raise ValueError(f"--d {args.d} does not match predicate arity "
                         f"{pred.arity}")
    D = distinguisher_by_name(args.distinguisher, pred=pred)
    config = _reduction_config(args)
    params = resolve_params(config, args.n, args.m, pred.arity, args.distinct)
    secret = _parse_secret(args.secret, args.n,
                           generator(substream(args.seed, "secret")))
    rng = generator(substream(args.seed, "predictor-gap"))
    table = predictor_gap_table(pred, secret, D, params.t, args.m,
                                args.trials, rng, distinct=args.distinct,
                                workers=args.workers)
    result = {
        "n": args.n, "m": args.m, "d": pred.arity,
        "distinguisher": D.name,
        "secret": secret.to_string(),
        "eps": args.eps,
        "gap_table": table,
    }
    _emit(args, "predictor-gap", result, started)
    unequal = [r["gap"] for r in table["rows"] if not r["equal_truth"]]
    floor = min(unequal) if unequal else float("nan")
    _summary(f"eq={table['eq']:.4f}, min unequal gap={floor:.5f}, "
             f"t={params.t}")
    return EXIT_OK


# -- parser ------------------------------------------------------------------------


def _add_common(sub):
    sub.add_argument("--seed", type=int, default=0,
                     help="64-bit unsigned master seed")
    sub.add_argument("--workers", type=int, default=1,
                     help="worker threads; results are worker-count independent")
    sub.add_argument("--out", type=str, default=None,
                     help="also write the JSON report to this path")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rlf",
        description="Random local function experiment harness (JSON reports)")
    subs = parser.add_subparsers(dest="subcommand", required=True)

    p = subs.add_parser("analyze-predicate", help="bias, spectrum, "
                        "correlation order, sensitivity")
    p.add_argument("--predicate", required=True)
    p.add_argument("--noisy-beta", type=float, default=None)
    p.add_argument("--bias-bounds", type=float, nargs=2, default=None,
                   metavar=("C1", "C2"))
    p.add_argument("--strict", action="store_true",
                   help="nonzero exit on constant predicates")
    _add_common(p)
    p.set_defaults(handler=cmd_analyze_predicate)

    p = subs.add_parser("mixing", help="deviation decay curve and, when the "
                        "support is enumerable, empirical TV to uniform")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--trials", type=int, default=10000)
    p.add_argument("--max-curve-steps", type=int, default=512)
    p.add_argument("--csv", type=str, default=None,
                   help="write the decay curve as CSV")
    _add_common(p)
    p.set_defaults(handler=cmd_mixing)

    p = subs.add_parser("estimate-advantage",
                        help="Monte Carlo planted-vs-null advantage")
    p.add_argument("--predicate", required=True)
    p.add_argument("--noisy-beta", type=float, default=None)
    p.add_argument("--distinguisher", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--d", type=int, default=None)
    p.add_argument("--trials", type=int, default=10000)
    p.add_argument("--distinct", action="store_true")
    _add_common(p)
    p.set_defaults(handler=cmd_estimate_advantage)

    p = subs.add_parser("reduce", help="end-to-end secret recovery")
    p.add_argument("--predicate", required=True)
    p.add_argument("--noisy-beta", type=float, default=None)
    p.add_argument("--distinguisher", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--d", type=int, default=None)
    p.add_argument("--eps", type=float, required=True,
                   help="claimed distinguisher advantage")
    p.add_argument("--distinct", action="store_true")
    p.add_argument("--secret", type=str, default=None,
                   help="bit string, 'random', 'balanced', or 'weight:K'")
    p.add_argument("--config", type=str, default=None,
                   help="JSON overrides for the reduction constants")
    _add_common(p)
    p.set_defaults(handler=cmd_reduce)

    p = subs.add_parser("predictor-gap",
                        help="per-bit predictor acceptance gaps")
    p.add_argument("--predicate", required=True)
    p.add_argument("--noisy-beta", type=float, default=None)
    p.add_argument("--distinguisher", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--d", type=int, default=None)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--secret", type=str, default="balanced")
    p.add_argument("--trials", type=int, default=20000)
    p.add_argument("--distinct", action="store_true")
    p.add_argument("--config", type=str, default=None)
    _add_common(p)
    p.set_defaults(handler=cmd_predictor_gap)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except InfeasibleParameterError as exc:
        print(f"infeasible parameters: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (ValueError, TypeError, OracleExhaustedError, OSError,
            json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_ARGS


if __name__ == "__main__":
    sys.exit(main())
