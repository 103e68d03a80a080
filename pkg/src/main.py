"""
Command-line entry point for the LDP hypothesis-testing channel toolkit.

Subcommands:
- optimize   best channel of a family for a pair (JSON)
- curve      sample-complexity curve over eps (CSV)
- construct  closed-form pairs and channels (JSON)
- simulate   Monte Carlo run of the testing protocol (JSON)
- enumerate  threshold channels or extreme points of a family (JSON)
- verify     verification suites (report + exit code)

Exit codes: 0 success, 1 verification failure, 2 usage or input error.
"""

import argparse
import sys
from typing import Dict, List, Optional

from src.channels.ldp import LpFamily, approx_binary_family, randomized_response, sldp_family
from src.channels.polytope import extreme_points
from src.channels.threshold import enumerate_threshold
from src.constructions.closed_forms import (
    approx_ldp_channel,
    binary_pair,
    minimax_channel,
    sdpi_binary,
    worst_case_pair,
)
from src.constructions.complexity import complexity_curve, parse_eps_grid
from src.constructions.reduction import free_privacy_channel, reduce_channel
from src.errors import LdpOptError
from src.log import get_logger, set_level
from src.models.distributions import Channel, LikelihoodOrder, likelihood_order
from src.models.divergences import hellinger_sq, tv
from src.optimization.objectives import Objective
from src.optimization.optimizer import OptResult, maximize_comm, maximize_private, rdp_binary_optimize
from src.serialization import (
    channel_to_dict,
    error_report_to_dict,
    family_from_dict,
    load_channel,
    load_pair,
    pair_to_dict,
    read_json,
    result_to_dict,
    write_curve_csv,
    write_json,
)
from src.settings import (
    DEFAULT_EPS_GRID,
    DEFAULT_SEED,
    DEFAULT_TRIALS,
    LOG_LEVEL,
    REFERENCE_PAIRS,
    TARGET_ERROR,
    VERIFY_SUITES,
    get_reference_pair,
)
from src.simulation.protocol_simulator import ProtocolConfig, ProtocolSimulator
from src.verification import VerificationRunner, generate_verification_report

logger = get_logger("cli")

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2


class UsageError(LdpOptError, ValueError):
    """Flags that cannot be combined or are missing for the chosen mode."""


def _require(args: argparse.Namespace, *names: str) -> None:
    missing = [f"--{name.replace('_', '-')}" for name in names if getattr(args, name) is None]
    if missing:
        raise UsageError(f"{args.command} needs {', '.join(missing)}")


def _pair_from_args(args: argparse.Namespace):
    """Pair from --pair FILE, or from (--rho, --nu) / --preset via the worst-case construction."""
    if getattr(args, "pair", None):
        return load_pair(args.pair)
    rho, nu = _rho_nu(args)
    return worst_case_pair(rho, nu)


def _rho_nu(args: argparse.Namespace):
    if args.rho is not None and args.nu is not None:
        return args.rho, args.nu
    if args.rho is not None or args.nu is not None:
        raise UsageError("--rho and --nu go together")
    return get_reference_pair(args.preset)


def _emit(args: argparse.Namespace, data: Dict) -> None:
    write_json(args.out, data, sys.stdout)
    if args.out:
        print(f"✅ Wrote {args.out}", file=sys.stderr)


# ============================================================================
# SUBCOMMANDS
# ============================================================================

def cmd_optimize(args: argparse.Namespace) -> int:
    p, q = load_pair(args.pair)
    k = p.k
    objective = Objective.from_name(args.objective)

    if args.family == "comm":
        result = maximize_comm(p, q, args.l, objective, args.threads)
    elif args.family == "rdp":
        _require(args, "eps", "alpha")
        if args.l != 2:
            raise UsageError("rdp family only has binary outputs; use --l 2")
        result = rdp_binary_optimize(p, q, args.eps, args.alpha, objective, args.threads)
    else:
        family = _family_from_args(args, k)
        result = maximize_private(p, q, family, objective, args.threads)

    _print_result(result)
    _emit(args, result_to_dict(result))
    return EXIT_OK


def _family_from_args(args: argparse.Namespace, k: int) -> LpFamily:
    if args.family_file:
        family = family_from_dict(read_json(args.family_file))
        if family.k != k:
            raise UsageError(f"family has k = {family.k}, pair has {k} elements")
        return family
    _require(args, "eps")
    if args.family == "ldp":
        if args.delta is not None:
            raise UsageError("pure ldp takes no --delta; use sldp or approx2")
        return LpFamily.pure(k, args.l, args.eps)
    _require(args, "delta")
    if args.family == "sldp":
        return sldp_family(k, args.l, args.eps, args.delta)
    if args.l != 2:
        raise UsageError("approx2 family only has binary outputs; use --l 2")
    return approx_binary_family(k, args.eps, args.delta)


def _print_result(result: OptResult) -> None:
    print(f"🎯 {result.objective} = {result.value:.6g}", file=sys.stderr)
    print(f"   {result.certificate}", file=sys.stderr)


def cmd_curve(args: argparse.Namespace) -> int:
    rho, nu = _rho_nu(args)
    p, q = binary_pair(rho, nu) if args.binary else worst_case_pair(rho, nu)
    grid = parse_eps_grid(args.eps_grid)
    print(f"📈 Curve for {'binary' if args.binary else 'worst-case'} pair (rho={rho:g}, nu={nu:g}), "
          f"{len(grid)} points", file=sys.stderr)

    curve = complexity_curve(p, q, grid, args.l, args.threads)
    if args.out and args.out != "-":
        with open(args.out, "w", newline="", encoding="utf-8") as stream:
            rows = write_curve_csv(stream, curve)
        print(f"✅ Wrote {rows} rows to {args.out}", file=sys.stderr)
    else:
        write_curve_csv(sys.stdout, curve)
    return EXIT_OK


def cmd_construct(args: argparse.Namespace) -> int:
    if args.kind in ("worst-case", "binary-pair"):
        rho, nu = _rho_nu(args)
        p, q = worst_case_pair(rho, nu) if args.kind == "worst-case" else binary_pair(rho, nu)
        data = pair_to_dict(p, q)
        data.update({"hellinger_sq": hellinger_sq(p, q), "tv": tv(p, q)})
        _emit(args, data)
        return EXIT_OK

    p, q = _pair_from_args(args)
    if args.kind == "reduction":
        _require(args, "l")
        reduction = reduce_channel(p, q, args.l)
        channel = reduction.channel
        extra = {"branch": reduction.branch, "tau": reduction.tau}
    else:
        _require(args, "eps")
        extra = {}
        if args.kind == "sdpi":
            channel, _ = sdpi_binary(p, q, args.eps)
        elif args.kind == "minimax":
            channel = minimax_channel(p, q, args.eps)
        elif args.kind == "free-privacy":
            channel = free_privacy_channel(p, q, args.eps)
        else:
            _require(args, "delta")
            channel = approx_ldp_channel(p, q, args.eps, args.delta)

    value = hellinger_sq(channel.matrix @ p.probs, channel.matrix @ q.probs)
    print(f"🔧 {args.kind}: d_h^2(Tp, Tq) = {value:.6g} (d_h^2(p, q) = {hellinger_sq(p, q):.6g})", file=sys.stderr)
    data = channel_to_dict(channel)
    data.update(extra)
    data["hellinger_sq"] = value
    _emit(args, data)
    return EXIT_OK


def cmd_simulate(args: argparse.Namespace) -> int:
    p, q = load_pair(args.pair)
    channel = _simulation_channel(args, p.k)
    simulator = ProtocolSimulator(args.threads)

    if args.find_n:
        n = simulator.find_sample_size(p, q, channel, args.target, args.trials, args.seed)
        h2 = hellinger_sq(channel.matrix @ p.probs, channel.matrix @ q.probs)
        print(f"🔎 Smallest n reaching error {args.target}: {n} (1/d_h^2 = {1.0 / h2:.6g})", file=sys.stderr)
        _emit(args, {"n": n, "target": args.target, "trials": args.trials, "seed": args.seed, "hellinger_sq": h2})
        return EXIT_OK

    _require(args, "n")
    report = simulator.run(ProtocolConfig(p, q, channel, args.n, args.trials, args.seed))
    print(f"🎲 {report}", file=sys.stderr)
    data = error_report_to_dict(report)
    data["seed"] = args.seed
    _emit(args, data)
    return EXIT_OK


def _simulation_channel(args: argparse.Namespace, k: int) -> Channel:
    if args.channel and args.rr is not None:
        raise UsageError("give either --channel or --rr, not both")
    if args.channel:
        return load_channel(args.channel)
    if args.rr is not None:
        return randomized_response(k, args.rr)
    return Channel.identity(k)


def cmd_enumerate(args: argparse.Namespace) -> int:
    if args.what == "threshold":
        if args.pair:
            p, q = load_pair(args.pair)
            order = likelihood_order(p, q)
        else:
            _require(args, "k")
            order = LikelihoodOrder.identity(args.k)
        channels = list(enumerate_threshold(order.k, args.l, order, args.canonical))
    else:
        _require(args, "k")
        if args.eps is None:
            family = LpFamily.unconstrained(args.k, args.l)
        elif args.delta is None:
            family = LpFamily.pure(args.k, args.l, args.eps)
        else:
            family = sldp_family(args.k, args.l, args.eps, args.delta)
        channels = extreme_points(family)

    print(f"📋 {len(channels)} {args.what} channels", file=sys.stderr)
    _emit(args, {"count": len(channels), "channels": [channel.to_rows() for channel in channels]})
    return EXIT_OK


def cmd_verify(args: argparse.Namespace) -> int:
    names: List[str] = list(VERIFY_SUITES) if args.suite == "all" else [args.suite]
    runner = VerificationRunner(args.seed, args.threads, args.quick)
    results = runner.run_all(names)
    print(generate_verification_report(results, args.seed))
    return EXIT_OK if runner.all_passed else EXIT_FAILED


# ============================================================================
# ARGUMENT PARSING
# ============================================================================

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="python -m src.main",
        description="Optimal privatization channels for private hypothesis testing",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  python -m src.main optimize --pair pair.json --family ldp --eps 1.0986 --l 2
  python -m src.main curve --preset stagnation --out stagnation.csv
  python -m src.main curve --rho 1e-8 --nu 1e-5 --binary --out binary.csv
  python -m src.main construct --kind worst-case --rho 1e-4 --nu 0.01
  python -m src.main simulate --pair pair.json --rr 1.0 --find-n
  python -m src.main enumerate --what extreme --k 3 --l 2 --eps 1.0
  python -m src.main verify --suite sdpi --seed 7

Reference pairs:
""" + "\n".join(f"  {name:<12} {preset['description']}" for name, preset in REFERENCE_PAIRS.items())
    )

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--threads", type=int, default=None,
                        help="Worker cap (default: LDPOPT_THREADS or CPU count)")
    common.add_argument("--log-level", default=LOG_LEVEL, choices=["DEBUG", "INFO", "WARNING", "ERROR"],
                        help=f"Logging level (default: {LOG_LEVEL})")
    common.add_argument("--out", default=None, help="Output file (default: stdout)")

    # only the Monte Carlo commands draw random numbers
    seeded = argparse.ArgumentParser(add_help=False)
    seeded.add_argument("--seed", type=int, default=DEFAULT_SEED, help=f"Random seed (default: {DEFAULT_SEED})")

    sub = parser.add_subparsers(dest="command", required=True)

    optimize = sub.add_parser("optimize", parents=[common], help="Best channel of a family for a pair")
    optimize.add_argument("--pair", required=True, help='JSON file {"p": [...], "q": [...]}')
    optimize.add_argument("--family", choices=["comm", "ldp", "sldp", "approx2", "rdp"], default="ldp")
    optimize.add_argument("--family-file", default=None, help="JSON LP family overriding --family")
    optimize.add_argument("--eps", type=float, default=None)
    optimize.add_argument("--delta", type=float, default=None)
    optimize.add_argument("--alpha", type=float, default=None, help="Renyi order for the rdp family")
    optimize.add_argument("--l", type=int, default=2, help="Number of outputs (default: 2)")
    optimize.add_argument("--objective", default="hellinger_sq", help="hellinger_sq, tv, kl, chernoff or renyi:ALPHA")
    optimize.set_defaults(handler=cmd_optimize)

    curve = sub.add_parser("curve", parents=[common], help="Sample-complexity curve over eps (CSV)")
    curve.add_argument("--rho", type=float, default=None)
    curve.add_argument("--nu", type=float, default=None)
    curve.add_argument("--preset", choices=list(REFERENCE_PAIRS), default="stagnation")
    curve.add_argument("--eps-grid", default=DEFAULT_EPS_GRID, help=f"log:start,stop,points over e^eps "
                                                                    f"or eps list (default: {DEFAULT_EPS_GRID})")
    curve.add_argument("--l", type=int, default=None, help="Output size (default: 2, or 3 for ternary pairs)")
    curve.add_argument("--binary", action="store_true", help="Binary pair with the same (rho, nu)")
    curve.set_defaults(handler=cmd_curve)

    construct = sub.add_parser("construct", parents=[common], help="Closed-form pairs and channels")
    construct.add_argument("--kind", required=True, choices=[
        "worst-case", "binary-pair", "sdpi", "minimax", "free-privacy", "approx-ldp", "reduction"])
    construct.add_argument("--pair", default=None, help="Pair file (default: worst-case pair of --rho/--nu)")
    construct.add_argument("--rho", type=float, default=None)
    construct.add_argument("--nu", type=float, default=None)
    construct.add_argument("--preset", choices=list(REFERENCE_PAIRS), default="moderate")
    construct.add_argument("--eps", type=float, default=None)
    construct.add_argument("--delta", type=float, default=None)
    construct.add_argument("--l", type=int, default=None, help="Output size for reduction")
    construct.set_defaults(handler=cmd_construct)

    simulate = sub.add_parser("simulate", parents=[common, seeded], help="Monte Carlo run of the testing protocol")
    simulate.add_argument("--pair", required=True)
    simulate.add_argument("--channel", default=None, help='JSON file {"matrix": [[...]]}')
    simulate.add_argument("--rr", type=float, default=None, help="Use k-ary randomized response with this eps")
    simulate.add_argument("--n", type=int, default=None, help="Number of users")
    simulate.add_argument("--trials", type=int, default=DEFAULT_TRIALS)
    simulate.add_argument("--find-n", action="store_true", help="Search the smallest n reaching --target")
    simulate.add_argument("--target", type=float, default=TARGET_ERROR)
    simulate.set_defaults(handler=cmd_simulate)

    enumerate_cmd = sub.add_parser("enumerate", parents=[common], help="Threshold channels or extreme points")
    enumerate_cmd.add_argument("--what", choices=["threshold", "extreme"], default="threshold")
    enumerate_cmd.add_argument("--pair", default=None, help="Pair fixing the likelihood order (threshold)")
    enumerate_cmd.add_argument("--k", type=int, default=None)
    enumerate_cmd.add_argument("--l", type=int, default=2)
    enumerate_cmd.add_argument("--eps", type=float, default=None, help="Pure (or SLDP with --delta) family")
    enumerate_cmd.add_argument("--delta", type=float, default=None)
    enumerate_cmd.add_argument("--canonical", action="store_true", help="One channel per output relabeling")
    enumerate_cmd.set_defaults(handler=cmd_enumerate)

    verify = sub.add_parser("verify", parents=[common, seeded], help="Run verification suites")
    verify.add_argument("--suite", choices=list(VERIFY_SUITES) + ["all"], default="all")
    verify.add_argument("--quick", action="store_true", help="Reduced instance counts")
    verify.set_defaults(handler=cmd_verify)

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """Main entry point."""
    parser = build_parser()
    args = parser.parse_args(argv)
    set_level(args.log_level)

    try:
        return args.handler(args)
    except KeyboardInterrupt:
        print("\n⚠️  Interrupted by user", file=sys.stderr)
        return EXIT_USAGE
    except (LdpOptError, ValueError) as e:
        logger.error(f"❌ {type(e).__name__}: {e}")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
