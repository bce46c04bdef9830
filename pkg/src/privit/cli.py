"""Command-line interface.

Subcommands:
  test      run one tester on a distribution file and a histogram file
  simulate  sweep sample sizes over an n-grid and emit a CSV of curve points
  theory    print the closed-form sample-size bounds for one parameter set
  convert   print zCDP / approximate-DP equivalents of a pure-DP budget

Exit codes: 0 success, 2 configuration error, 3 sample-size search exhausted.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from privit import harness, privacy, theory
from privit.distributions import load_distribution, load_histogram
from privit.errors import PrivitError, SearchExhaustedError
from privit.testers import TestParams, adk_chisq, laplaced_chisq, privit, privit_noised

_FILE_TESTERS = ("privit", "privit_noised", "adk_chisq", "laplaced_chisq")


def _cmd_test(args) -> int:
    q = load_distribution(args.q)
    hist = load_histogram(args.data)
    params = TestParams(n=q.n, alpha=args.alpha, epsilon=args.eps, m=args.m)
    rng = np.random.default_rng(args.seed)
    if args.tester == "privit":
        verdict = privit(q, hist, params, rng)
    elif args.tester == "privit_noised":
        verdict = privit_noised(q, hist, params, rng)
    elif args.tester == "adk_chisq":
        verdict = adk_chisq(q, hist, params)
    else:
        verdict = laplaced_chisq(q, hist, params, rng)
    print(f"verdict: {verdict.outcome.value}")
    print(f"branch: {verdict.branch.value}")
    if verdict.statistic is not None:
        print(f"statistic: {verdict.statistic}")
    return 0


def _config_from_args(args) -> harness.ExperimentConfig:
    if args.config is not None:
        return harness.load_config(args.config)
    if args.n_grid is None:
        raise PrivitError("simulate needs --config or --n-grid")
    n_grid = tuple(int(tok) for tok in args.n_grid.replace(",", " ").split())
    return harness.ExperimentConfig(
        tester_id=args.tester,
        n_grid=n_grid,
        alpha=args.alpha,
        epsilon=args.eps,
        delta=args.delta,
        trials=args.trials,
        error_target=args.error_target,
        root_seed=args.seed,
        construction=args.construction,
        m_cap=args.m_cap,
    )


def _cmd_simulate(args) -> int:
    config = _config_from_args(args)
    points = harness.run_experiment(config)
    csv_text = harness.points_to_csv(points, config)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(csv_text)
    else:
        sys.stdout.write(csv_text)
    return 0


def _cmd_theory(args) -> int:
    bound = theory.privit_sample_size(args.n, args.alpha, args.eps, beta=args.beta, c0=args.c0)
    rows = [
        ("privit m (statistic term)", bound.terms["statistic"]),
        ("privit m (laplace-tail term)", bound.terms["laplace_tail"]),
        ("privit m (poisson-tail term)", bound.terms["poisson_tail"]),
        ("privit m total", bound.total),
        ("privit strict privacy floor", theory.privit_strict_minimum(args.n, args.alpha, args.eps)),
        ("repetition m total", theory.repetition_sample_size(args.n, args.alpha, args.eps, beta=args.beta, c0=args.c0)),
        ("noisy-counts crossover m", theory.noisy_counts_lower_bound(args.n, args.alpha, args.eps)),
    ]
    width = max(len(name) for name, _ in rows)
    for name, value in rows:
        print(f"{name:<{width}}  {value:.6g}")
    print(f"{'binding term':<{width}}  {bound.binding_term}")
    print(f"{'amplification factor':<{width}}  {bound.amplification_factor}")
    return 0


def _cmd_convert(args) -> int:
    rho = privacy.pure_to_zcdp(args.eps)
    print(f"pure dp epsilon: {args.eps}")
    print(f"zcdp rho: {rho}")
    for guarantee in privacy.parity_for_experiment(args.eps, args.delta or []):
        print(f"approx dp at delta={guarantee.delta}: epsilon={guarantee.epsilon}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="privit", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_test = sub.add_parser("test", help="run one tester on files")
    p_test.add_argument("--q", required=True, help="distribution file (array of probabilities)")
    p_test.add_argument("--data", required=True, help="histogram file (array of counts)")
    p_test.add_argument("--alpha", type=float, required=True)
    p_test.add_argument("--eps", type=float, required=True)
    p_test.add_argument("--m", type=float, required=True, help="declared expected sample count")
    p_test.add_argument("--tester", choices=_FILE_TESTERS, default="privit")
    p_test.add_argument("--seed", type=int, default=0)
    p_test.set_defaults(func=_cmd_test)

    p_sim = sub.add_parser("simulate", help="sample-complexity sweep, CSV output")
    p_sim.add_argument("--config", help="flat key=value config file")
    p_sim.add_argument("--tester", choices=harness.TESTER_IDS, default="privit")
    p_sim.add_argument("--n-grid", help="support sizes, e.g. '50,100,200'")
    p_sim.add_argument("--alpha", type=float, default=0.1)
    p_sim.add_argument("--eps", type=float, default=0.1)
    p_sim.add_argument("--delta", type=float, default=None, help="approx-DP parity mode")
    p_sim.add_argument("--trials", type=int, default=1000)
    p_sim.add_argument("--error-target", type=float, default=1.0 / 3.0)
    p_sim.add_argument("--seed", type=int, default=0)
    p_sim.add_argument("--construction", choices=harness.CONSTRUCTIONS, default="uniform_vs_paninski")
    p_sim.add_argument("--m-cap", type=int, default=100_000_000)
    p_sim.add_argument("--out", help="write CSV here instead of stdout")
    p_sim.set_defaults(func=_cmd_simulate)

    p_theory = sub.add_parser("theory", help="closed-form sample bounds")
    p_theory.add_argument("--n", type=int, required=True)
    p_theory.add_argument("--alpha", type=float, required=True)
    p_theory.add_argument("--eps", type=float, required=True)
    p_theory.add_argument("--beta", type=float, default=1.0 / 3.0)
    p_theory.add_argument("--c0", type=float, default=theory.DEFAULT_C0)
    p_theory.set_defaults(func=_cmd_theory)

    p_conv = sub.add_parser("convert", help="privacy guarantee conversions")
    p_conv.add_argument("--eps", type=float, required=True)
    p_conv.add_argument("--delta", type=float, nargs="*", default=[])
    p_conv.set_defaults(func=_cmd_convert)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SearchExhaustedError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (PrivitError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
