"""Command-line front end: ``kpartite <command> ...``.

Exit status is 0 on success, 1 when a solver fails or times out and 2 on
invalid input.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .absorbing import AbsorbConfig, perfect_matching_via_absorption
from .exact import MatchingSearch, SearchTimeout
from .extremal import ClosenessConfig, closeness
from .harness import GenSpec, SweepOptions, check_theorem, engineered_instance, generate, grid_from_json, sweep
from .hypergraph import PartiteHypergraph
from .instance_io import InstanceFormatError, format_instance, parse_instance
from .parity import NullspaceTooLarge, check_theorem_case, find_parity_certificate
from .pipeline import ObstructionFound, PipelineConfig, PreconditionError, run_pipeline

OK, SOLVER_FAILED, BAD_INPUT = 0, 1, 2


class UsageError(Exception):
    pass


def _load(path: str) -> PartiteHypergraph:
    try:
        text = sys.stdin.read() if path == "-" else Path(path).read_text()
    except OSError as err:
        raise UsageError(f"cannot read {path}: {err.strerror or err}") from err
    try:
        return parse_instance(text)
    except InstanceFormatError as err:
        raise UsageError(f"{path}: {err}") from err


def _emit(args, payload: dict) -> None:
    if args.json:
        print(json.dumps(payload, separators=(",", ":"), default=str))
    else:
        print(json.dumps(payload, indent=2, default=str))


def _ints(text: str | None) -> tuple[int, ...] | None:
    if text is None:
        return None
    try:
        return tuple(int(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise UsageError(f"expected comma-separated integers, got {text!r}") from None


def cmd_gen(args) -> int:
    if args.kind == "engineered":
        H = engineered_instance(args.k, args.n, args.seed)
        desc = f"engineered k={args.k} n={args.n} seed={args.seed}"
    else:
        try:
            spec = GenSpec(args.kind, args.k, args.n, _ints(args.d), args.p, args.flips, args.seed)
        except ValueError as err:
            raise UsageError(str(err)) from err
        H = generate(spec)
        desc = spec.describe()
    text = format_instance(H, desc)
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)
    return OK


def cmd_codegree(args) -> int:
    H = _load(args.instance)
    _emit(args, {"k": H.k, "n": H.n, "edges": H.num_edges, "min_codegree": H.min_codegree()})
    return OK


def cmd_obstruct(args) -> int:
    H = _load(args.instance)
    cert = find_parity_certificate(H)
    try:
        case = check_theorem_case(H)
    except NullspaceTooLarge as err:
        case = f"unknown ({err})"
    except ValueError as err:
        case = f"unknown ({err})"
    out = {"found": cert is not None, "d": None, "D": None, "theorem_case": case}
    if cert is not None:
        out.update(cert.to_dict())
    _emit(args, out)
    return OK


def cmd_solve(args) -> int:
    H = _load(args.instance)
    try:
        search = MatchingSearch(H, args.timeout)
    except ValueError as err:
        raise UsageError(str(err)) from err
    try:
        if args.max:
            M = search.maximum()
            status = "maximum"
        else:
            M = search.perfect()
            status = "perfect_matching" if M is not None else "no_perfect_matching"
    except SearchTimeout as err:
        _emit(args, {"status": "timeout", "size": len(err.best), "matching": [list(e) for e in err.best],
                     "stats": err.stats.to_dict()})
        return SOLVER_FAILED
    _emit(args, {"status": status, "size": 0 if M is None else len(M),
                 "matching": None if M is None else [list(e) for e in M], "stats": search.stats.to_dict()})
    return OK


def cmd_pipeline(args) -> int:
    H = _load(args.instance)
    try:
        cfg = PipelineConfig(alpha=args.alpha, epsilon=args.eps, strict_constants=args.strict, seed=args.seed)
    except ValueError as err:
        raise UsageError(str(err)) from err
    try:
        rep = run_pipeline(H, cfg)
    except ObstructionFound as err:
        _emit(args, {"status": "obstruction", "failed_stage": err.stage, "error": str(err),
                     "witnesses": err.witnesses})
        return SOLVER_FAILED
    except PreconditionError as err:
        raise UsageError(str(err)) from err
    _emit(args, rep.to_dict())
    return OK if rep.ok else SOLVER_FAILED


def cmd_absorb(args) -> int:
    H = _load(args.instance)
    try:
        cfg = AbsorbConfig(log_base=args.log_base, sample_probability_override=args.p_override,
                           seed=args.seed, timeout=args.timeout)
    except ValueError as err:
        raise UsageError(str(err)) from err
    rep = perfect_matching_via_absorption(H, cfg)
    out = rep.to_dict()
    if not args.verbose:
        out.pop("witnesses")
    _emit(args, out)
    return OK if rep.ok else SOLVER_FAILED


def cmd_check_theorem(args) -> int:
    H = _load(args.instance)
    try:
        v = check_theorem(H, args.timeout)
    except ValueError as err:
        raise UsageError(str(err)) from err
    _emit(args, v.to_dict())
    violated = v.theorem_case in ("case_i", "case_ii") and v.pm_exists
    return SOLVER_FAILED if violated else OK


def cmd_sweep(args) -> int:
    try:
        grid = grid_from_json(Path(args.grid).read_text())
    except OSError as err:
        raise UsageError(f"cannot read {args.grid}: {err.strerror or err}") from err
    except (ValueError, TypeError) as err:
        raise UsageError(f"{args.grid}: {err}") from err
    opts = SweepOptions(timeout=args.timeout, pipeline=args.pipeline, absorb=args.absorb)
    rows = sweep(grid, args.output, opts, args.workers)
    _emit(args, {"rows": len(rows), "output": args.output,
                 "consistent": sum(1 for r in rows if r.consistent),
                 "anomalies": [r.index for r in rows if r.consistent is False]})
    return OK


def cmd_closeness(args) -> int:
    H = _load(args.instance)
    mode = {"exact": "exact", "local": "local_search", "auto": "auto"}[args.mode]
    try:
        cfg = ClosenessConfig(epsilon=args.eps, search_mode=mode, seed=args.seed)
        cost, params = closeness(H, cfg)
    except ValueError as err:
        raise UsageError(str(err)) from err
    _emit(args, {"cost": cost, "B": [list(b) for b in params.D], "eps_close": cost < args.eps * H.n ** H.k,
                 "mode": mode})
    return OK


def build_parser() -> argparse.ArgumentParser:
    def globals_parser(top: bool) -> argparse.ArgumentParser:
        # subcommands accept the global flags too, without clobbering values given before them
        g = argparse.ArgumentParser(add_help=False)
        dflt = (lambda v: v) if top else (lambda v: argparse.SUPPRESS)
        g.add_argument("--seed", type=int, default=dflt(0))
        g.add_argument("--timeout", type=float, default=dflt(60.0), help="seconds per exact search")
        g.add_argument("--json", action="store_true", default=dflt(False), help="compact one-line JSON output")
        g.add_argument("-v", "--verbose", action="store_true", default=dflt(False))
        return g

    common = globals_parser(False)
    ap = argparse.ArgumentParser(prog="kpartite", parents=[globals_parser(True)],
                                 description="k-partite k-graph matchings and their obstructions")
    sub = ap.add_subparsers(dest="command", required=True)

    def add(name, func, help_text):
        p = sub.add_parser(name, parents=[common], help=help_text)
        p.set_defaults(func=func)
        return p

    p = add("gen", cmd_gen, "generate an instance")
    p.add_argument("kind", choices=["complete", "empty", "h0", "h0_subgraph", "random_p", "h0_perturbed",
                                    "engineered"])
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--d", help="class sizes of the distinguished set, e.g. 1,1,1")
    p.add_argument("--p", type=float)
    p.add_argument("--flips", type=int)
    p.add_argument("-o", "--output")

    p = add("codegree", cmd_codegree, "minimum co-degree")
    p.add_argument("instance")
    p = add("obstruct", cmd_obstruct, "search for a parity certificate")
    p.add_argument("instance")

    p = add("solve", cmd_solve, "exact perfect or maximum matching")
    p.add_argument("instance")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--perfect", action="store_true", default=True)
    g.add_argument("--max", action="store_true")

    p = add("pipeline", cmd_pipeline, "staged construction near the extremal graph")
    p.add_argument("instance")
    p.add_argument("--alpha", type=float, default=0.125)
    p.add_argument("--eps", type=float, default=0.01)
    p.add_argument("--strict", action="store_true", help="reject n <= 100 k^2")

    p = add("absorb", cmd_absorb, "perfect matching by absorption")
    p.add_argument("instance")
    p.add_argument("--p-override", type=float)
    p.add_argument("--log-base", choices=["e", "2"], default="e")

    p = add("check-theorem", cmd_check_theorem, "compare the obstruction verdict with the exact matcher")
    p.add_argument("instance")

    p = add("sweep", cmd_sweep, "run a JSON grid of generator specs into a CSV")
    p.add_argument("grid", help="JSON list of {kind, k, n, d, p, flips, seed}")
    p.add_argument("-o", "--output", default="sweep.csv")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--pipeline", action="store_true", help="also run the staged construction")
    p.add_argument("--absorb", action="store_true", help="also run the absorption algorithm")

    p = add("closeness", cmd_closeness, "distance to the nearest canonical extremal copy")
    p.add_argument("instance")
    p.add_argument("--eps", type=float, default=0.01)
    p.add_argument("--mode", choices=["exact", "local", "auto"], default="auto")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as err:
        print(f"kpartite {args.command}: {err}", file=sys.stderr)
        return BAD_INPUT


if __name__ == "__main__":
    sys.exit(main())
