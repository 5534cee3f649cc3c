"""``dynmis`` command line: generate, replay, compare and validate update streams.

Exit codes: 0 success, 1 bad input or usage, 2 oracle verification failure,
3 internal invariant violation.
"""

from __future__ import annotations

import argparse
import sys
from typing import Optional, Sequence

from . import __version__
from .bench import (
    ALGORITHMS,
    ScenarioError,
    ScenarioSpec,
    compare,
    render_compare_csv,
    render_compare_table,
    render_metrics_csv,
    render_summary_json,
    run_scenario,
)
from .core import InternalInvariantError
from .stream import (
    StreamError,
    gen_bipartite_adversary,
    gen_bounded_arboricity_stream,
    gen_random_stream,
    read_stream,
    serialize_stream,
)

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_VERIFY = 2
EXIT_INTERNAL = 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        raise UsageError(f"{self.prog}: {message}")


def _add_constants(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, help="PRNG seed (required by rand)")
    p.add_argument("--lambda", dest="lam", type=int, help="arboricity bound (required by arb)")
    p.add_argument("--c-high", type=float, help="high-degree threshold scale")
    p.add_argument("--c-T", dest="c_T", type=float, help="arb epoch length scale")
    p.add_argument("--c-replace", type=float, help="arb replace-cost bound scale")
    p.add_argument("--c-feasible", type=float, help="arb feasible-list floor scale")
    p.add_argument("--verify", action="store_true", help="run the MIS oracle after every event")
    p.add_argument("--check", action="store_true", help="enable internal invariant assertions")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="dynmis", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    gen = sub.add_parser("gen", help="write a generated stream file")
    kinds = gen.add_subparsers(dest="kind", required=True, parser_class=_Parser)

    rnd = kinds.add_parser("random", help="uniform random insert/delete stream")
    rnd.add_argument("--n", type=int, required=True)
    rnd.add_argument("--steps", type=int, required=True)
    rnd.add_argument("--p-insert", type=float, default=0.5)
    rnd.add_argument("--seed", type=int, default=0)
    rnd.add_argument("--hubs", type=int, default=0)
    rnd.add_argument("--hub-prob", type=float, default=0.0)

    adv = kinds.add_parser("bipartite-adv", help="complete bipartite graph plus poke rounds")
    adv.add_argument("--s", type=int, required=True, help="vertices per side")
    adv.add_argument("--rounds", type=int, required=True)

    arb = kinds.add_parser("arboricity", help="stream staying within lambda forests")
    arb.add_argument("--n", type=int, required=True)
    arb.add_argument("--lambda", dest="lam", type=int, required=True)
    arb.add_argument("--steps", type=int, required=True)
    arb.add_argument("--seed", type=int, default=0)
    arb.add_argument("--p-insert", type=float, default=0.7)
    arb.add_argument("--hubs", type=int, default=0)
    arb.add_argument("--hub-prob", type=float, default=0.0)

    for p in (rnd, adv, arb):
        p.add_argument("--out", "-o", default="-", help="output path ('-' for stdout)")

    run = sub.add_parser("run", help="replay a stream through one algorithm")
    run.add_argument("--alg", required=True, choices=ALGORITHMS)
    run.add_argument("--stream", required=True)
    _add_constants(run)
    run.add_argument("--metrics", help="per-update metrics CSV path")
    run.add_argument("--summary", help="JSON summary path")

    cmp_ = sub.add_parser("compare", help="replay one stream through several algorithms")
    cmp_.add_argument("--stream", required=True)
    cmp_.add_argument("--alg", default=",".join(ALGORITHMS),
                      help="comma-separated algorithms (default: all four)")
    _add_constants(cmp_)
    cmp_.add_argument("--jobs", type=int, default=1, help="parallel worker processes")
    cmp_.add_argument("--csv", help="also write the table as CSV here")

    ver = sub.add_parser("verify", help="check that a stream file parses and replays")
    ver.add_argument("stream")
    return parser


def _spec(args: argparse.Namespace, alg: str) -> ScenarioSpec:
    return ScenarioSpec(
        algorithm=alg,
        seed=args.seed,
        lam=args.lam,
        c_high=args.c_high,
        c_T=args.c_T,
        c_replace=args.c_replace,
        c_feasible=args.c_feasible,
        verify=args.verify,
        check=args.check,
    )


def _write(path: str, text: str) -> None:
    if path == "-":
        sys.stdout.write(text)
        return
    with open(path, "w", newline="\n") as fh:
        fh.write(text)


def cmd_gen(args: argparse.Namespace) -> int:
    try:
        if args.kind == "random":
            stream = gen_random_stream(args.n, args.steps, args.p_insert, args.seed,
                                       hubs=args.hubs, hub_prob=args.hub_prob)
        elif args.kind == "bipartite-adv":
            stream = gen_bipartite_adversary(args.s, args.rounds)
        else:
            if args.n < 0 or args.steps < 0:
                raise ValueError("n and steps must be non-negative")
            stream = gen_bounded_arboricity_stream(
                args.n, args.lam, args.steps, args.seed, p_insert=args.p_insert,
                hubs=args.hubs, hub_prob=args.hub_prob)
    except ValueError as exc:
        raise UsageError(f"gen {args.kind}: {exc}") from None
    _write(args.out, serialize_stream(stream))
    where = "stdout" if args.out == "-" else args.out
    print(f"wrote {len(stream)} events (n={stream.n}) to {where}", file=sys.stderr)
    return EXIT_OK


def cmd_run(args: argparse.Namespace) -> int:
    spec = _spec(args, args.alg)
    spec.validate()
    stream = read_stream(args.stream)
    result = run_scenario(spec, stream)
    if args.metrics:
        _write(args.metrics, render_metrics_csv(result, stream))
    if args.summary:
        _write(args.summary, render_summary_json(result, stream))
    s = result.summary()
    print(
        f"{s['algorithm']}: {s['updates']} updates, {s['epochs']} epochs, "
        f"total work {s['total_work']}, amortized {s['amortized_work']:.3f}, "
        f"max update {s['max_update_work']}, MIS size {s['final_mis_size']}"
    )
    if not result.ok:
        f = result.verify_failure
        print(f"verification failed at event {f.index} ({f.event}): {f.verdict!r}",
              file=sys.stderr)
        return EXIT_VERIFY
    return EXIT_OK


def cmd_compare(args: argparse.Namespace) -> int:
    algs = [a.strip() for a in args.alg.split(",") if a.strip()]
    if not algs:
        raise UsageError("compare: no algorithms given")
    if args.jobs < 1:
        raise UsageError("compare: --jobs must be at least 1")
    specs = [_spec(args, a) for a in algs]
    for spec in specs:
        spec.validate()
    stream = read_stream(args.stream)
    rows = compare(specs, stream, jobs=args.jobs)
    sys.stdout.write(render_compare_table(rows))
    if args.csv:
        _write(args.csv, render_compare_csv(rows))
    statuses = {r.status for r in rows}
    if "internal-error" in statuses:
        return EXIT_INTERNAL
    if "verify-failed" in statuses:
        return EXIT_VERIFY
    return EXIT_OK


def cmd_verify(args: argparse.Namespace) -> int:
    stream = read_stream(args.stream)
    print(f"ok: n={stream.n}, {len(stream)} events")
    return EXIT_OK


COMMANDS = {"gen": cmd_gen, "run": cmd_run, "compare": cmd_compare, "verify": cmd_verify}


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return COMMANDS[args.command](args)
    except (UsageError, ScenarioError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except StreamError as exc:
        print(f"stream error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except InternalInvariantError as exc:
        print(f"internal invariant violated: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
