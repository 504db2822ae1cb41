"""Command-line entry point.

Subcommands::

    table1       policy-value table (3-decimal CSV)
    solve        exact and approximate stopping solution for M stores
    curve        samples of Y(m; M) = (m/M) ln(M/m)
    equilibrium  reservation surplus and steady-state values
    simulate     Monte-Carlo comparison of consumer policies

Exit status is 0 on success, 2 for argument errors and 3 for numeric or
consistency errors.  Errors go to stderr as one line starting with
``consumer-search: error[<kind>]:``.
"""

import argparse
import csv
import io
import json
import sys

from . import market, secretary, simulation
from .errors import (
    InconsistencyError,
    InvalidArgumentError,
    NonErgodicError,
    ResourceBoundError,
    UnsupportedConfigurationError,
)

PROG = "consumer-search"
EXIT_OK, EXIT_ARGUMENT, EXIT_NUMERIC = 0, 2, 3

TABLE1_STORES = list(range(1, 21)) + [50, 100, 300]
TABLE1_HEADER = ["M", "M_over_e", "m_star", "skip", "Y0"]


class ArgumentError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ArgumentError(message)


def _int_list(text):
    try:
        values = [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")
    if any(v < 1 for v in values):
        raise argparse.ArgumentTypeError("store counts must be >= 1")
    return values


def _positive_int(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected an integer >= 1, got {text}")
    return value


def _nonneg_int(text):
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError(f"expected an integer >= 0, got {text}")
    return value


def _seed(text):
    value = int(text)
    if not 0 <= value <= simulation.MAX_SEED:
        raise argparse.ArgumentTypeError(f"seed must be an unsigned 64-bit integer, got {text}")
    return value


def _probability(text):
    value = float(text)
    if not 0.0 <= value <= 1.0:
        raise argparse.ArgumentTypeError(f"expected a probability in [0, 1], got {text}")
    return value


def read_config(path):
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    config = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ArgumentError(f"{path}:{lineno}: expected 'key = value'")
            key, value = (part.strip() for part in line.split("=", 1))
            config[key.replace("-", "_")] = value
    return config


def _add_output(p):
    p.add_argument("-o", "--output", help="output file (default: stdout)")
    p.add_argument("--format", choices=("csv", "json"), default=None)
    p.add_argument("--config", help="key = value file; flags take precedence")


def _add_market(p):
    p.add_argument("--stores", type=_positive_int, default=10)
    p.add_argument("--beta", type=_probability, help="sets both persistence probabilities")
    p.add_argument("--beta-low", type=_probability)
    p.add_argument("--beta-high", type=_probability)
    p.add_argument("--delta", type=float, default=0.95)
    p.add_argument("--cost", type=float, help="default: 0.05 * (s_low - s_high)")
    p.add_argument("--s-low", type=float)
    p.add_argument("--s-high", type=float)
    p.add_argument("--demand-a", type=float, help="linear demand intercept")
    p.add_argument("--demand-b", type=float, help="linear demand slope")
    p.add_argument("--p-low", type=float, help="price charged by low-cost stores")
    p.add_argument("--p-high", type=float, help="price charged by high-cost stores")


def build_parser():
    parser = _Parser(prog=PROG, description="Repeated consumer search as a bandit with a secretary stopping rule.")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("table1", help="optimal stopping policy values table")
    p.add_argument("--m-list", type=_int_list, default=TABLE1_STORES)
    _add_output(p)

    p = sub.add_parser("solve", help="backward induction for M stores")
    p.add_argument("--stores", type=_positive_int, required=True)
    _add_output(p)

    p = sub.add_parser("curve", help="Y(m; M) curve data")
    p.add_argument("--stores", type=float, required=True)
    p.add_argument("--points", type=_positive_int, default=100)
    _add_output(p)

    p = sub.add_parser("equilibrium", help="reservation surplus and values")
    p.add_argument("--beta", type=_probability, required=True)
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--cost", type=float, required=True)
    p.add_argument("--s-low", type=float, required=True)
    p.add_argument("--s-high", type=float)
    p.add_argument("--s-reservation", type=float, help="check this value instead of deriving it")
    _add_output(p)

    p = sub.add_parser("simulate", help="Monte-Carlo policy comparison")
    _add_market(p)
    p.add_argument("--policy", choices=[k.value for k in simulation.PolicyKind], default="secretary")
    p.add_argument("--skip", type=_nonneg_int)
    p.add_argument("--reservation-reward", type=float)
    p.add_argument("--epsilon", type=_probability, default=0.1)
    p.add_argument("--explore-cap", type=_nonneg_int)
    p.add_argument("--exhaust", action="store_true")
    p.add_argument("--reward-mode", choices=[m.value for m in simulation.RewardMode], default="two_point")
    p.add_argument("--periods", type=_positive_int, default=100)
    p.add_argument("--reps", type=_positive_int, default=100)
    p.add_argument("--seed", type=_seed, default=0)
    p.add_argument("--confidence", type=float, default=0.95)
    p.add_argument("--trace", action="store_true", help="emit the per-period trace of replication 0")
    _add_output(p)
    return parser


def parse_args(argv):
    parser = build_parser()
    pre = _Parser(add_help=False)
    pre.add_argument("command", nargs="?")
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    subparsers = parser._subparsers._group_actions[0].choices
    if known.config and known.command in subparsers:
        try:
            config = read_config(known.config)
        except OSError as exc:
            raise ArgumentError(f"cannot read config: {exc}")
        subparser = subparsers[known.command]
        actions = {a.dest: a for a in subparser._actions}
        unknown = sorted(set(config) - set(actions) - {"config", "help"})
        if unknown:
            raise ArgumentError(f"unknown config keys: {', '.join(unknown)}")
        for dest, value in config.items():
            action = actions[dest]
            action.required = False
            if isinstance(action, argparse._StoreTrueAction):
                value = value.lower() in ("1", "true", "yes", "on")
            elif action.choices is not None and value not in action.choices:
                raise ArgumentError(f"config {dest}: invalid choice {value!r}")
            subparser.set_defaults(**{dest: value})
    args = parser.parse_args(argv)
    if args.command is None:
        raise ArgumentError("a subcommand is required")
    return args


def _market_params(args):
    s_low, s_high = args.s_low, args.s_high
    demand = (args.demand_a, args.demand_b)
    if any(v is not None for v in demand + (args.p_low, args.p_high)):
        if None in demand or args.p_low is None or args.p_high is None:
            raise InvalidArgumentError("--demand-a, --demand-b, --p-low and --p-high go together")
        if s_low is None:
            s_low = market.surplus_linear_demand(args.demand_a, args.demand_b, args.p_low)
        if s_high is None:
            s_high = market.surplus_linear_demand(args.demand_a, args.demand_b, args.p_high)
    s_low = 10.0 if s_low is None else s_low
    s_high = 4.0 if s_high is None else s_high
    beta_low = args.beta_low if args.beta_low is not None else args.beta
    beta_high = args.beta_high if args.beta_high is not None else args.beta
    cost = args.cost if args.cost is not None else 0.05 * (s_low - s_high)
    return market.MarketParams(
        m_total=args.stores,
        beta_low=0.9 if beta_low is None else beta_low,
        beta_high=0.9 if beta_high is None else beta_high,
        delta=args.delta,
        cost=cost,
        s_low=s_low,
        s_high=s_high,
    )


def _fmt(x):
    return repr(float(x))


def _csv_text(header, rows):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def _json_text(obj):
    return json.dumps(obj, indent=2) + "\n"


def format_m_over_e(x):
    """Four significant figures shown with three decimals, as in the table."""
    return f"{float(f'{x:.4g}'):.3f}"


def table1_csv(rows):
    return _csv_text(
        TABLE1_HEADER,
        [
            [r.m_total, format_m_over_e(r.m_over_e), r.m_star_approx, r.skip_count, f"{r.y0:.3f}"]
            for r in rows
        ],
    )


def _cmd_table1(args):
    rows = secretary.table1(args.m_list)
    if args.format == "json":
        return _json_text(
            [
                {
                    "M": r.m_total,
                    "M_over_e": r.m_over_e,
                    "m_star": r.m_star_approx,
                    "skip": r.skip_count,
                    "policy_skip": r.policy_skip,
                    "Y0": r.y0,
                }
                for r in rows
            ]
        )
    return table1_csv(rows)


def _cmd_solve(args):
    sol = secretary.backward_induction(args.stores)
    if args.format == "csv":
        u = [""] + [_fmt(v) for v in sol.u_values]
        return _csv_text(["m", "Y", "U"], [[m, _fmt(y), u[m]] for m, y in enumerate(sol.y_values)])
    out = sol.as_dict()
    approx_skip = max(0, sol.approx_cutoff - 1)
    out["approx_value"] = secretary.policy_value(sol.m_total, approx_skip)
    return _json_text(out)


def _cmd_curve(args):
    pairs = secretary.curve(args.stores, args.points)
    if args.format == "json":
        return _json_text([{"m": m, "Y": y} for m, y in pairs])
    return _csv_text(["m", "Y"], [[_fmt(m), _fmt(y)] for m, y in pairs])


def _cmd_equilibrium(args):
    params = market.MarketParams(
        m_total=1,
        beta_low=args.beta,
        beta_high=args.beta,
        delta=args.delta,
        cost=args.cost,
        s_low=args.s_low,
        s_high=args.s_low if args.s_high is None else args.s_high,
    )
    s_r = market.reservation_surplus(params) if args.s_reservation is None else args.s_reservation
    report = market.solve_fishman_system(params, s_r)
    out = {
        "beta": args.beta,
        "delta": args.delta,
        "cost": args.cost,
        "s_low": args.s_low,
        "s_high": s_r if args.s_high is None else args.s_high,
        **report.as_dict(),
    }
    if args.format == "csv":
        return _csv_text(list(out), [[_fmt(v) for v in out.values()]])
    return _json_text(out)


def _cmd_simulate(args):
    params = _market_params(args)
    policy = simulation.PolicySpec(
        kind=args.policy,
        skip_count=args.skip,
        reservation_reward=args.reservation_reward,
        epsilon=args.epsilon,
        explore_cap=args.explore_cap,
        exhaust=args.exhaust,
    )
    resolved = policy.resolve(params)
    meta = {
        "params": {k: getattr(params, k) for k in params.__dataclass_fields__},
        "policy": resolved.as_dict(),
        "periods": args.periods,
        "replications": args.reps,
        "seed": args.seed,
        "reward_mode": args.reward_mode,
    }
    if args.trace:
        trace = simulation.run_episode(
            params, policy, args.periods, args.seed, reward_mode=args.reward_mode
        )
        rows = list(trace.rows())
        if args.format == "json":
            return _json_text({"metadata": meta, "trace": rows})
        header = list(rows[0])
        return _csv_text(
            header,
            [[_fmt(v) if isinstance(v, float) else v for v in row.values()] for row in rows],
        )
    summary = simulation.monte_carlo(
        params,
        policy,
        args.periods,
        args.reps,
        args.seed,
        confidence=args.confidence,
        reward_mode=args.reward_mode,
    )
    rows = list(summary.rows())
    if args.format == "json":
        meta["confidence"] = args.confidence
        return _json_text({"metadata": meta, "summary": rows})
    return _csv_text(
        ["policy", "metric", "mean", "variance", "std_error", "ci_low", "ci_high"],
        [
            [resolved.kind.value, r["metric"]] + [_fmt(r[k]) for k in ("mean", "variance", "std_error", "ci_low", "ci_high")]
            for r in rows
        ],
    )


COMMANDS = {
    "table1": _cmd_table1,
    "solve": _cmd_solve,
    "curve": _cmd_curve,
    "equilibrium": _cmd_equilibrium,
    "simulate": _cmd_simulate,
}


def _fail(kind, message, code, stderr):
    print(f"{PROG}: error[{kind}]: {message}", file=stderr)
    return code


def run_cli(argv=None, stdout=None, stderr=None):
    stdout = sys.stdout if stdout is None else stdout
    stderr = sys.stderr if stderr is None else stderr
    try:
        args = parse_args(list(sys.argv[1:] if argv is None else argv))
        if args.format is None:
            args.format = "json" if args.command in ("solve", "equilibrium") else "csv"
        text = COMMANDS[args.command](args)
    except (ArgumentError, argparse.ArgumentTypeError) as exc:
        return _fail("argument", exc, EXIT_ARGUMENT, stderr)
    except (InvalidArgumentError, UnsupportedConfigurationError) as exc:
        return _fail("argument", exc, EXIT_ARGUMENT, stderr)
    except (InconsistencyError, NonErgodicError, ResourceBoundError, ArithmeticError) as exc:
        return _fail("numeric", exc, EXIT_NUMERIC, stderr)
    except OSError as exc:
        return _fail("io", exc, EXIT_ARGUMENT, stderr)
    if args.output:
        with open(args.output, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        stdout.write(text)
    return EXIT_OK


def main():
    sys.exit(run_cli())
