"""Command-line front end.

Exit codes: 0 success, 1 runtime failure (including failed checks and
unwritable output), 2 usage or input error.
"""

from __future__ import annotations

import argparse
import io
import json
import math
import sys

import numpy as np

from . import adversary, extensions, multi, single, verify
from .core import Env, InputError, Params, episode, fmt, load_type_set


def _mechanism(env: Env, params: Params):
    if env.kind == "single" or (env.kind == "k" and env.k == 1):
        return single.SingleMechanism(params)
    if env.kind == "partial":
        return extensions.PartialCommitmentMechanism(params)
    return multi.PMPMechanism(params)


def _emit(args, payload: dict, text_lines: list[str]) -> None:
    if args.format == "json":
        print(json.dumps(payload, indent=2))
    else:
        print("\n".join(text_lines))


def _params(args, fallback: Params | None = None) -> Params:
    u0 = args.u_min if args.u_min is not None else (fallback.u_min if fallback else 0.0)
    v0 = args.v_min if args.v_min is not None else (fallback.v_min if fallback else 0.0)
    return Params(u0, v0)


def cmd_compute(args) -> int:
    params = _params(args)
    r_s, r_m = single.r_single(params), multi.r_multi_closed(params)
    payload = {"params": params.to_json(), "r_s": fmt(r_s), "r_m": fmt(r_m),
               "top_tier_single": fmt(1 - r_s), "top_tier_multi": fmt(1 - r_m),
               "r_m_branch": multi.r_multi_branch(params)}
    _emit(args, payload, [
        f"u_min = {params.u_min:.12g}, v_min = {params.v_min:.12g}",
        f"R^s = {r_s:.12g}   (top tier: v >= {1 - r_s:.12g})",
        f"R^m = {r_m:.12g}   (top tier: v >= {1 - r_m:.12g}, {payload['r_m_branch']} branch)",
    ])
    return 0


def cmd_episode(args) -> int:
    file_params, type_set = load_type_set(args.input)
    params = _params(args, file_params)
    for i, p in enumerate(type_set):
        if not params.contains(p):
            raise InputError(f"projects[{i}]: {p} outside D for {params}")
    env = Env.parse(args.env)
    if env.kind == "k" and env.k >= 2:
        report = extensions.k_episode(type_set, extensions.KEnv(env.k), params)
    else:
        report = episode(_mechanism(env, params), type_set, env)
    payload = {"env": str(env), "params": params.to_json(), **report.to_json()}
    lines = [f"environment {env}, {len(type_set)} available projects",
             f"proposal: {[(p.u, p.v) for p in report.proposal]}"]
    for p, w in zip(report.distribution.carrier, report.distribution.weights):
        lines.append(f"  choose ({p.u:.6g}, {p.v:.6g}) with probability {w:.12g}")
    lines += [f"agent payoff {report.agent_payoff:.12g}",
              f"principal payoff {report.principal_payoff:.12g}",
              f"regret {'undefined' if report.regret is None else f'{report.regret:.12g}'}"]
    _emit(args, payload, lines)
    return 0


def curve_rows(axis: str, fixed: float, n: int) -> list[tuple[float, float, float]]:
    rows = []
    for x in np.linspace(0.0, 1.0, n + 1):
        x = float(x)
        params = Params(x, fixed) if axis == "u" else Params(fixed, x)
        rows.append((x, single.r_single(params), multi.r_multi_closed(params)))
    return rows


def cmd_curves(args) -> int:
    if args.n < 2:
        raise InputError("--n must be at least 2")
    Params(args.fixed, 0.0)  # range check on the fixed coordinate
    buf = io.StringIO(newline="")
    buf.write("x,r_s,r_m\n")
    for x, r_s, r_m in curve_rows(args.axis, args.fixed, args.n):
        buf.write(f"{x:.12g},{r_s:.12g},{r_m:.12g}\n")
    if args.out in (None, "-"):
        sys.stdout.write(buf.getvalue())
    else:
        try:
            with open(args.out, "w", newline="\n") as fh:
                fh.write(buf.getvalue())
        except OSError as exc:
            print(f"error: cannot write {args.out}: {exc}", file=sys.stderr)
            return 1
    return 0


def cmd_certify(args) -> int:
    params = _params(args)
    env = Env.parse(args.env)
    mech = _mechanism(env, params)
    if args.strict_eps is not None:
        mech = extensions.StrictPMPMechanism(params, args.strict_eps)
    spec = adversary.SearchSpec(args.grid_n, args.max_type_size, args.refine_rounds)
    cert = adversary.wcr_search(mech, env, spec, params, workers=args.workers)
    bound = single.r_single(params) if isinstance(
        mech, (single.SingleMechanism, extensions.PartialCommitmentMechanism)) \
        else multi.r_multi_closed(params)
    payload = {**cert.to_json(), "closed_form": fmt(bound)}
    _emit(args, payload, [
        f"{cert.mechanism_id}: certified WCR {cert.value:.12g} (closed form {bound:.12g})",
        f"witness: {[(p.u, p.v) for p in cert.witness]}",
        f"{cert.evaluations:,} types evaluated on grid {spec.grid_n}",
    ])
    return 0


def cmd_verify(args) -> int:
    checks = verify.run_suite(args.level, seed=args.seed)
    failed = [c for c in checks if not c.passed]
    if args.format == "json":
        print(json.dumps({"level": args.level, "passed": not failed,
                          "checks": [vars(c) | {"seconds": round(c.seconds, 3)}
                                     for c in checks]}, indent=2))
    else:
        for c in checks:
            print(f"{'PASS' if c.passed else 'FAIL'}  {c.name}  [{c.detail}]  ({c.seconds:.2f}s)")
        print(f"{len(checks) - len(failed)}/{len(checks)} checks passed")
    return 1 if failed else 0


def _unit(text: str) -> float:
    x = float(text)
    if not (math.isfinite(x) and 0.0 <= x <= 1.0):
        raise argparse.ArgumentTypeError(f"{text} is not in [0, 1]")
    return x


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--u-min", type=_unit, default=None,
                        help="lower bound of the agent's payoff (default 0)")
    common.add_argument("--v-min", type=_unit, default=None,
                        help="lower bound of the principal's payoff (default 0)")
    common.add_argument("--format", choices=("json", "text"), default="text")
    common.add_argument("--seed", type=int, default=0,
                        help="seed for the random proposal suites")

    parser = argparse.ArgumentParser(
        prog="projchoice",
        description="Minimax-regret project choice: closed forms, episodes, "
                    "adversarial certification and curve data.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("compute", parents=[common], help="R^s, R^m and tier thresholds")
    p.set_defaults(func=cmd_compute)

    p = sub.add_parser("episode", parents=[common], help="run one type set through a mechanism")
    p.add_argument("input", help="project-set JSON file")
    p.add_argument("--env", default="multi", help="single | k=K | multi | partial")
    p.set_defaults(func=cmd_episode)

    p = sub.add_parser("curves", parents=[common], help="R^s and R^m along one parameter")
    p.add_argument("--axis", choices=("u", "v"), required=True)
    p.add_argument("--fixed", type=_unit, default=0.0, help="value of the other parameter")
    p.add_argument("--n", type=int, default=100, help="number of intervals")
    p.add_argument("--out", default=None, help="CSV path (default stdout)")
    p.set_defaults(func=cmd_curves)

    p = sub.add_parser("certify", parents=[common], help="adversarial worst-case regret")
    p.add_argument("--env", default="multi", help="single | k=K | multi | partial")
    p.add_argument("--grid-n", type=int, default=101)
    p.add_argument("--max-type-size", type=int, default=2)
    p.add_argument("--refine-rounds", type=int, default=2)
    p.add_argument("--strict-eps", type=float, default=None,
                   help="certify the strictly IC perturbation of rho^m instead")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("verify", parents=[common], help="run the verification suite")
    p.add_argument("--level", choices=("quick", "full"), default="quick")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
