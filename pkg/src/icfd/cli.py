"""Command line interface: ``icfd validate|solve|verify|gen|motif|reduce|bench``.

Exit codes: 0 success, 1 malformed input, 2 size guard exceeded,
3 no allocation exists (or motif infeasible), 4 verification failed.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from pathlib import Path

from . import __version__
from .core import Allocation, InstanceError, agent_types, validate_instance, verify
from .epas import EXHAUSTIVE, RANDOMIZED, lift_allocation, reduce_agents, solve_epas
from .exact import VectorSumInstance, solve_exact
from .gen import gen_random, gen_reduction, gen_shape
from .motif import ColoredWeightedGraph, GuardExceeded, max_colorful_connected
from .numerics import NumericsError, parse_rational

EXIT_OK, EXIT_INPUT, EXIT_GUARD, EXIT_NO, EXIT_REJECTED = 0, 1, 2, 3, 4


def _emit(obj) -> None:
    json.dump(obj, sys.stdout, indent=2, sort_keys=True)
    sys.stdout.write("\n")


def _load_json(path: str):
    try:
        text = sys.stdin.read() if path == "-" else Path(path).read_text(encoding="utf-8")
        return json.loads(text)
    except (OSError, json.JSONDecodeError) as exc:
        raise InstanceError(f"cannot read {path}: {exc}") from None


def _load_instance(path: str):
    return validate_instance(_load_json(path))


def cmd_validate(args) -> int:
    inst = _load_instance(args.instance)
    _emit({
        "ok": True, "m": inst.m, "n": inst.n, "p": inst.p,
        "setting": inst.setting, "agent_types": len(agent_types(inst)),
        "max_value": str(inst.max_value),
    })
    return EXIT_OK


def cmd_solve(args) -> int:
    inst = _load_instance(args.instance)
    started = time.perf_counter()
    if args.mode == "exact":
        alloc = solve_exact(inst, guard=args.guard)
        payload = {"mode": "exact", "found": alloc is not None}
        eps = None
        if alloc is None:
            payload["certificate"] = {
                "statement": "no valid and envy-free allocation exists",
                "reason": "exhaustive enumeration",
            }
    else:
        eps = parse_rational(args.epsilon)
        out = solve_epas(
            inst, eps, eps_prime=args.epsilon_prime, mode=args.colorings,
            trials=args.trials, seed=args.seed, threads=args.threads, guard=args.guard,
        )
        alloc = out.allocation
        payload = {"mode": "epas", **out.to_dict(inst)}
        payload.pop("allocation", None)
        payload.pop("report", None)
    payload["seconds"] = round(time.perf_counter() - started, 6)
    if alloc is None:
        _emit(payload)
        return EXIT_NO
    # re-verify here regardless of what the solver already checked
    report = verify(inst, alloc, eps)
    if not (report.valid and (report.eps_envy_free if eps is not None else report.envy_free)):
        raise RuntimeError(f"solver returned an allocation that fails verification: {report.to_dict()}")
    payload["allocation"] = alloc.to_dict(inst)
    payload["report"] = report.to_dict()
    _emit(payload)
    return EXIT_OK


def cmd_verify(args) -> int:
    inst = _load_instance(args.instance)
    alloc = Allocation.from_dict(_load_json(args.allocation))
    eps = None if args.epsilon is None else parse_rational(args.epsilon)
    report = verify(inst, alloc, eps)
    _emit(report.to_dict())
    return EXIT_OK if report.ok else EXIT_REJECTED


def cmd_gen(args) -> int:
    if args.kind == "reduction":
        vs = VectorSumInstance.from_dict(_load_json(args.source))
        _emit(gen_reduction(vs, setting=args.setting).to_dict())
    elif args.kind == "random":
        inst = gen_random(
            args.m, args.n, args.p, args.max_value, args.density,
            num_types=args.types, seed=args.seed, setting=args.setting,
            connected=not args.disconnected,
        )
        _emit(inst.to_dict())
    else:
        vertices, edges = gen_shape(args.shape, *args.dims)
        _emit({"vertices": vertices, "edges": edges})
    return EXIT_OK


def cmd_motif(args) -> int:
    g = ColoredWeightedGraph.from_dict(_load_json(args.graph))
    res = max_colorful_connected(g)
    if res is None:
        _emit({"status": "infeasible"})
        return EXIT_NO
    chosen, weight = res
    order = {v: i for i, v in enumerate(g.vertices)}
    _emit({"status": "optimal", "vertices": sorted(chosen, key=order.__getitem__), "weight": str(weight)})
    return EXIT_OK


def cmd_reduce(args) -> int:
    inst = _load_instance(args.instance)
    reduced, back = reduce_agents(inst)
    payload = {"instance": reduced.to_dict(), "back_map": back.to_dict()}
    if args.allocation:
        lifted = lift_allocation(back, Allocation.from_dict(_load_json(args.allocation)))
        payload["lifted_allocation"] = lifted.to_dict(inst)
    _emit(payload)
    return EXIT_OK


def cmd_bench(args) -> int:
    from .bench import Sweep, load_config, run_sweeps, to_csv

    if args.config:
        sweeps = load_config(args.config)
    elif args.m:
        sweeps = [Sweep.from_dict({
            "name": "cli", "m": args.m, "n": args.n or [2], "p": args.p or [1, 2, 3],
            "eps": args.eps or ["10"], "count": args.count, "seed": args.seed,
            "max_value": args.max_value, "setting": args.setting, "exact": args.exact,
        })]
    else:
        sweeps = []
    timing = not args.no_timing
    rows = run_sweeps(sweeps, timing=timing)
    text = to_csv(rows, timing=timing)
    if args.out:
        Path(args.out).parent.mkdir(parents=True, exist_ok=True)
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    if args.figures:
        from .plotting import render_bench_figures

        for path in render_bench_figures(rows, args.figures):
            print(f"wrote {path}", file=sys.stderr)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="icfd", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"icfd {__version__}")
    ap.add_argument("-v", "--verbose", action="store_true", help="debug logging on stderr")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check an instance file")
    p.add_argument("instance")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("solve", help="find an (eps-)envy-free valid allocation")
    p.add_argument("instance")
    p.add_argument("--mode", choices=["exact", "epas"], default="epas")
    p.add_argument("--epsilon", default="1", help="slack as decimal or a/b (default: 1)")
    p.add_argument("--epsilon-prime", default=None, help="explicit eps' (decimal or a/b)")
    p.add_argument("--colorings", choices=[EXHAUSTIVE, RANDOMIZED], default=EXHAUSTIVE)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--guard", type=int, default=None, help="override the enumeration guard")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("verify", help="check an allocation against an instance")
    p.add_argument("instance")
    p.add_argument("allocation")
    p.add_argument("--epsilon", default=None)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("gen", help="generate instances")
    gsub = p.add_subparsers(dest="kind", required=True)
    g = gsub.add_parser("reduction", help="star instance from a Vector-Sum file")
    g.add_argument("--from", dest="source", required=True)
    g.add_argument("--setting", choices=["optional", "mandatory"], default="optional")
    g = gsub.add_parser("random", help="random instance")
    g.add_argument("--m", type=int, required=True)
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--p", type=int, required=True)
    g.add_argument("--max-value", type=int, default=20)
    g.add_argument("--density", type=float, default=0.3)
    g.add_argument("--types", type=int, default=None)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--setting", choices=["optional", "mandatory"], default="optional")
    g.add_argument("--disconnected", action="store_true", help="skip the spanning tree")
    g = gsub.add_parser("shape", help="named graph skeleton")
    g.add_argument("shape", choices=["star", "path", "grid"])
    g.add_argument("dims", type=int, nargs="+")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("motif", help="max-weight connected colorful subgraph")
    p.add_argument("graph")
    p.set_defaults(func=cmd_motif)

    p = sub.add_parser("reduce", help="cap each agent type at p+1 agents")
    p.add_argument("instance")
    p.add_argument("--allocation", help="reduced-instance allocation to lift back")
    p.set_defaults(func=cmd_reduce)

    p = sub.add_parser("bench", help="generator + solver sweeps as CSV")
    p.add_argument("--config", help="JSON file with a list of sweeps")
    p.add_argument("--m", type=int, nargs="*")
    p.add_argument("--n", type=int, nargs="*")
    p.add_argument("--p", type=int, nargs="*")
    p.add_argument("--eps", nargs="*")
    p.add_argument("--count", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-value", type=int, default=20)
    p.add_argument("--setting", choices=["optional", "mandatory"], default="optional")
    p.add_argument("--exact", action="store_true", help="also run the exact solver")
    p.add_argument("--out", help="CSV path (default: stdout)")
    p.add_argument("--figures", help="directory for PNG figures")
    p.add_argument("--no-timing", action="store_true", help="leave wall_seconds out for reproducible CSV")
    p.set_defaults(func=cmd_bench)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except GuardExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_GUARD
    except (InstanceError, NumericsError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
