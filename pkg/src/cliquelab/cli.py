"""Command-line entry point: ``cliquelab <subcommand> ...``.

Machine output goes to stdout or the named files, logs to stderr.
Exit codes: 0 ok (solve: clique found), 10 no k-clique, 11 search budget
exhausted, 2 bad flags, 3 violated preconditions.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from .clique import find_k_clique
from .forge import estimate_survival, forge_pair, pair_metadata, verify_pair, write_pair
from .graph import emit_dimacs, parse_dimacs, sample_gnm
from .moments import MomentInputs, calibrate_m, derived_params, moment_report, threshold_m0
from .rng import MASK64
from .transition import SweepConfig, default_grid, estimate_crossover, export_report, run_sweep

EXIT_OK, EXIT_ABSENT, EXIT_INDETERMINATE = 0, 10, 11
EXIT_USAGE, EXIT_PRECONDITION = 2, 3

log = logging.getLogger("cliquelab")


def _seed(text: str) -> int:
    value = int(text, 0)
    if not 0 <= value <= MASK64:
        raise argparse.ArgumentTypeError("seed must be a 64-bit unsigned integer")
    return value


def _write(data: bytes, out: str | None) -> None:
    if out:
        Path(out).write_bytes(data)
    else:
        sys.stdout.buffer.write(data)
        sys.stdout.flush()


def _dump(obj) -> bytes:
    return (json.dumps(obj, indent=2) + "\n").encode("ascii")


def cmd_gen(args) -> int:
    g = sample_gnm(args.n, args.m, args.seed)
    _write(emit_dimacs(g, [f"G(n={args.n}, m={args.m}) seed={args.seed}"]), args.out)
    return EXIT_OK


def cmd_solve(args) -> int:
    g = parse_dimacs(Path(args.input).read_bytes())
    res = find_k_clique(g, args.k, args.budget)
    stats = {"nodes_explored": res.stats.nodes_explored, "budget_hit": res.stats.budget_hit}
    if res.found:
        out = {"status": "found", "clique": [v + 1 for v in res.certificate], **stats}
        code = EXIT_OK
    elif res.indeterminate:
        out = {"status": "indeterminate", "clique": None, **stats}
        code = EXIT_INDETERMINATE
    else:
        out = {"status": "no k-clique", "clique": None, **stats}
        code = EXIT_ABSENT
    _write(_dump(out), None)
    return code


def cmd_moments(args) -> int:
    exact = {"auto": None, "exact": True, "log": False}[args.path]
    _write(_dump(moment_report(MomentInputs(args.n, args.k, args.m), exact)), None)
    return EXIT_OK


def cmd_threshold(args) -> int:
    out = {"n": args.n, "k": args.k, "m0": threshold_m0(args.n, args.k)}
    if args.m is not None:
        out["m"] = args.m
        out["c"] = derived_params(MomentInputs(args.n, args.k, args.m)).c
    _write(_dump(out), None)
    return EXIT_OK


def cmd_calibrate(args) -> int:
    cal = calibrate_m(args.n, args.k, args.target)
    out = {"n": args.n, "k": args.k, "target": args.target, "m_star": cal.m_star,
           "ex_at_m": float(cal.ex_at_m), "ex_below": float(cal.ex_below),
           "m0": cal.m0, "epsilon": cal.epsilon}
    _write(_dump(out), None)
    return EXIT_OK


def cmd_sweep(args) -> int:
    if args.m_min is None and args.m_max is None:
        grid = default_grid(args.n, args.k, args.points)
    else:
        import numpy as np

        if args.m_min is None or args.m_max is None:
            raise ValueError("--m-min and --m-max go together")
        grid = sorted({int(x) for x in np.rint(np.linspace(args.m_min, args.m_max, args.points))})
    config = SweepConfig(args.n, args.k, tuple(grid), args.trials, args.seed, args.budget)
    log.info("sweep n=%d k=%d over %d grid points", args.n, args.k, len(grid))
    result = run_sweep(config, workers=args.workers)
    try:
        log.info("crossover m_half=%.2f", estimate_crossover(result).m_half)
    except ValueError:
        log.info("no crossover inside the grid")
    _write(export_report(result, args.format), args.out)
    return EXIT_OK


def _forge_one(task):
    n, k, seed, stem, sample_retries, swap_retries = task
    pair, report = forge_pair(n, k, seed, sample_retries, swap_retries)
    write_pair(pair, report, stem)
    return pair_metadata(pair, report, verify_pair(pair))


def cmd_pair(args) -> int:
    stems = [args.out] if args.count == 1 else [f"{args.out}_{i:03d}" for i in range(args.count)]
    tasks = [(args.n, args.k, args.seed + i, stem, args.sample_retries, args.swap_retries)
             for i, stem in enumerate(stems)]
    if args.workers > 1:
        with ProcessPoolExecutor(max_workers=args.workers) as pool:
            metas = list(pool.map(_forge_one, tasks))
    else:
        metas = [_forge_one(t) for t in tasks]
    summary = [{"stem": s, "seed": m["seed"], "retries": m["retries"],
                "verified": all(m["verification"].values())} for s, m in zip(stems, metas)]
    _write(_dump(summary), None)
    return EXIT_OK


def _survival_row(task):
    n, k, m, trials, seed, condition = task
    if m is None:
        m = calibrate_m(n, k, 0.5).m_star
    est = estimate_survival(n, k, m, trials, seed, condition)
    return f"{n},{m},{est.trials},{est.survived},{est.rate!r},{est.formula!r}"


def cmd_survival(args) -> int:
    tasks = [(n, args.k, args.m, args.trials, args.seed, args.condition) for n in args.n]
    if args.workers > 1:
        with ProcessPoolExecutor(max_workers=args.workers) as pool:
            rows = list(pool.map(_survival_row, tasks))
    else:
        rows = [_survival_row(t) for t in tasks]
    _write(("n,m,trials,survived,rate,formula\n" + "".join(r + "\n" for r in rows)).encode(), None)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="cliquelab", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("gen", help="sample G(n, m) as DIMACS")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--m", type=int, required=True)
    s.add_argument("--seed", type=_seed, required=True)
    s.add_argument("--out")
    s.set_defaults(func=cmd_gen)

    s = sub.add_parser("solve", help="decide k-clique on a DIMACS graph")
    s.add_argument("--in", dest="input", required=True)
    s.add_argument("--k", type=int, required=True)
    s.add_argument("--budget", type=int, help="search-tree node cap")
    s.set_defaults(func=cmd_solve)

    s = sub.add_parser("moments", help="moment report as JSON")
    for name in ("n", "k", "m"):
        s.add_argument(f"--{name}", type=int, required=True)
    s.add_argument("--path", choices=("auto", "exact", "log"), default="auto")
    s.set_defaults(func=cmd_moments)

    s = sub.add_parser("threshold", help="threshold edge count m0 (and c for --m)")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--k", type=int, required=True)
    s.add_argument("--m", type=int)
    s.set_defaults(func=cmd_threshold)

    s = sub.add_parser("calibrate", help="smallest m with E[X] >= target")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--k", type=int, required=True)
    s.add_argument("--target", type=float, default=0.5)
    s.set_defaults(func=cmd_calibrate)

    s = sub.add_parser("sweep", help="Monte Carlo solvability curve")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--k", type=int, required=True)
    s.add_argument("--seed", type=_seed, required=True)
    s.add_argument("--trials", type=int, default=200)
    s.add_argument("--m-min", type=int)
    s.add_argument("--m-max", type=int)
    s.add_argument("--points", type=int, default=21)
    s.add_argument("--budget", type=int)
    s.add_argument("--format", choices=("csv", "json"), default="csv")
    s.add_argument("--workers", type=int, default=1)
    s.add_argument("--out")
    s.set_defaults(func=cmd_sweep)

    s = sub.add_parser("pair", help="forge yes/no instance pairs")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--k", type=int, required=True)
    s.add_argument("--seed", type=_seed, required=True)
    s.add_argument("--count", type=int, default=1)
    s.add_argument("--out", required=True, help="file stem")
    s.add_argument("--sample-retries", type=int, default=200)
    s.add_argument("--swap-retries", type=int, default=10_000)
    s.add_argument("--workers", type=int, default=1)
    s.set_defaults(func=cmd_pair)

    s = sub.add_parser("survival", help="empirical vs formula survival table")
    s.add_argument("--n", type=int, nargs="+", required=True)
    s.add_argument("--k", type=int, required=True)
    s.add_argument("--m", type=int, help="edge count (default: calibrated per n)")
    s.add_argument("--seed", type=_seed, required=True)
    s.add_argument("--trials", type=int, default=500)
    s.add_argument("--condition", choices=("unique", "any"), default="unique")
    s.add_argument("--workers", type=int, default=1)
    s.set_defaults(func=cmd_survival)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        stream=sys.stderr, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (ValueError, RuntimeError, OSError) as exc:
        print(f"cliquelab {args.command}: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION


if __name__ == "__main__":
    sys.exit(main())
