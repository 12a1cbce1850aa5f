"""Command-line interface: ``ohmpath {evaluate,verify,optimize,enumerate,generate}``.

Exit codes: 0 success, 2 invalid input, 3 verification failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from concurrent.futures import ProcessPoolExecutor

from . import __version__
from .errors import OhmPathError
from .generators import KINDS, generate
from .graph import augment, dump_graph, load_graph
from .network import solve_network
from .optimizer import (
    InitScheme,
    OptimizerConfig,
    default_jobs,
    enumerate_binary,
    optimize,
    verify_vertices,
)
from .penalty import PenaltyWeights, objective

SCHEMA = 1
EXIT_INPUT = 2
EXIT_VERIFY = 3


class InputError(Exception):
    code = "InvalidInput"


def _emit(obj: dict, out=None):
    text = json.dumps({"schema": SCHEMA, **obj}, indent=2)
    if out:
        with open(out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _load_augmented(args):
    try:
        g0 = load_graph(args.graph)
    except OSError as exc:
        raise InputError(f"cannot read {args.graph}: {exc.strerror}") from None
    h_start = args.h_start if args.h_start is not None else g0.h_start
    h_end = args.h_end if args.h_end is not None else g0.h_end
    return augment(g0, h_start, h_end)


def _weights(args) -> PenaltyWeights:
    try:
        return PenaltyWeights(args.alpha1, args.alpha2, args.exponent)
    except ValueError as exc:
        raise InputError(str(exc)) from None


def _parse_vector(spec: str) -> list[float]:
    if spec.startswith("@"):
        try:
            with open(spec[1:]) as fh:
                spec = fh.read().strip()
        except OSError as exc:
            raise InputError(f"cannot read {spec[1:]}: {exc.strerror}") from None
    try:
        if spec.startswith("["):
            return [float(x) for x in json.loads(spec)]
        return [float(x) for x in spec.replace(",", " ").split()]
    except (TypeError, ValueError):
        raise InputError(f"cannot parse conductance vector {spec!r}") from None


def _endpoint_info(ag) -> dict:
    return {
        "case": ag.case.value,
        "v_in": ag.v_in,
        "v_out": ag.v_out,
        "h_start": ag.h_start,
        "h_end": ag.h_end,
        "n_total": ag.n_total,
        "arcs": [list(a) for a in ag.base.arcs],
    }


def cmd_evaluate(args) -> int:
    ag = _load_augmented(args)
    g = _parse_vector(args.g)
    report = objective(ag, g, _weights(args), with_gradient=args.gradient)
    out = {"graph": _endpoint_info(ag), "config": g, "report": report.to_dict()}
    if args.dump_state:
        out["state"] = solve_network(ag, g).to_dict()
    _emit(out)
    return 0


def _verify_one(task):
    path, h_start, h_end, weights, max_arcs, max_nodes = task
    g0 = load_graph(path)
    ag = augment(g0, h_start if h_start is not None else g0.h_start,
                 h_end if h_end is not None else g0.h_end)
    if ag.n_total > max_nodes:
        raise InputError(f"{path}: {ag.n_total} augmented nodes exceeds --max-nodes {max_nodes}")
    res = verify_vertices(ag, weights, max_arcs=max_arcs)
    return {"graph": path, **_endpoint_info(ag), **res.to_dict()}


def cmd_verify(args) -> int:
    weights = _weights(args)
    for path in args.graph:
        try:
            open(path).close()
        except OSError as exc:
            raise InputError(f"cannot read {path}: {exc.strerror}") from None
    tasks = [(p, args.h_start, args.h_end, weights, args.max_arcs, args.max_nodes) for p in args.graph]
    jobs = args.jobs or default_jobs()
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            results = list(ex.map(_verify_one, tasks))
    else:
        results = [_verify_one(t) for t in tasks]
    ok = all(r["verified"] for r in results)
    _emit({"verified": ok, "results": results})
    for r in results:
        status = "verified" if r["verified"] else "FAILED"
        print(f"{r['graph']}: {status}, {r['n_paths']} Hamiltonian path(s), margin {r['margin']}",
              file=sys.stderr)
        for c in r["counterexamples"]:
            print(f"  counterexample config: {c}", file=sys.stderr)
    return 0 if ok else EXIT_VERIFY


def cmd_optimize(args) -> int:
    ag = _load_augmented(args)
    weights = _weights(args)
    try:
        cfg = OptimizerConfig(
            starts=args.starts, max_iters=args.max_iters, step_size=args.step_size,
            tol_obj=args.tol_obj, tol_step=args.tol_step, rng_seed=args.seed,
            init_scheme=InitScheme(args.init), weights=weights,
        )
    except ValueError as exc:
        raise InputError(str(exc)) from None
    run = optimize(ag, cfg, jobs=args.jobs or default_jobs())
    d = run.to_dict()
    if not args.keep_start_trajectories:
        for s in d["starts"]:
            s.pop("trajectory")
    _emit({"graph": _endpoint_info(ag), "run": d}, args.out)
    if args.trajectory_csv:
        with open(args.trajectory_csv, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["iter", "objective"])
            w.writerows(run.trajectory)
    return 0


def cmd_enumerate(args) -> int:
    ag = _load_augmented(args)
    table = enumerate_binary(ag, _weights(args), max_arcs=args.max_arcs)
    _emit({
        "graph": _endpoint_info(ag),
        "table": [{"config": list(e.config), "objective": e.objective, "in_target": e.in_target}
                  for e in table],
    })
    return 0


def cmd_generate(args) -> int:
    try:
        g = generate(args.kind, args.n, p=args.p, extra=args.extra, seed=args.seed)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    text = dump_graph(g)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return 0


def _add_graph_opts(p: argparse.ArgumentParser, multiple: bool = False):
    if multiple:
        p.add_argument("graph", nargs="+", help="graph JSON file(s)")
    else:
        p.add_argument("graph", help="graph JSON file")
    p.add_argument("--h-start", type=int, default=None)
    p.add_argument("--h-end", type=int, default=None)
    p.add_argument("--alpha1", type=float, default=1.0)
    p.add_argument("--alpha2", type=float, default=1.0)
    p.add_argument("--exponent", type=int, default=2, choices=(1, 2))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ohmpath",
        description="Hamiltonian paths via penalty minimization over network conductances.",
        epilog="exit codes: 0 ok, 2 invalid input, 3 verification failure",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("evaluate", help="objective at one conductance configuration")
    _add_graph_opts(p)
    p.add_argument("--g", required=True, help="comma-separated conductances or @file")
    p.add_argument("--gradient", action="store_true", help="include the gradient (exponent 2)")
    p.add_argument("--dump-state", action="store_true", help="include potentials and currents")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("verify", help="check the zero set over all binary configurations")
    _add_graph_opts(p, multiple=True)
    p.add_argument("--max-arcs", type=int, default=16)
    p.add_argument("--max-nodes", type=int, default=12)
    p.add_argument("--jobs", type=int, default=None)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("optimize", help="multi-start projected gradient descent")
    _add_graph_opts(p)
    d = OptimizerConfig()
    p.add_argument("--starts", type=int, default=d.starts)
    p.add_argument("--max-iters", type=int, default=d.max_iters)
    p.add_argument("--step-size", type=float, default=d.step_size)
    p.add_argument("--tol-obj", type=float, default=d.tol_obj)
    p.add_argument("--tol-step", type=float, default=d.tol_step)
    p.add_argument("--seed", type=int, default=d.rng_seed)
    p.add_argument("--init", choices=[s.value for s in InitScheme], default=d.init_scheme.value)
    p.add_argument("--jobs", type=int, default=None)
    p.add_argument("--out", help="write run JSON here instead of stdout")
    p.add_argument("--trajectory-csv", help="write the best start's (iter, objective) trajectory")
    p.add_argument("--keep-start-trajectories", action="store_true")
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("enumerate", help="objective at every binary configuration")
    _add_graph_opts(p)
    p.add_argument("--max-arcs", type=int, default=16)
    p.set_defaults(func=cmd_enumerate)

    p = sub.add_parser("generate", help="write a generated graph")
    p.add_argument("kind", choices=KINDS)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--p", type=float, default=0.5, help="edge probability (erdos-renyi)")
    p.add_argument("--extra", type=int, default=0, help="extra chords (planted-hp)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_generate)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (OhmPathError, InputError) as exc:
        print(f"error: {exc.code}: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
