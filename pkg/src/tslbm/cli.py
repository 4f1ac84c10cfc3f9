"""Command line: ``tslbm run|validate|bench``.

Worker count defaults to the ``TSLBM_WORKERS`` environment variable, else
the CPU count. Exit codes: 0 success, 1 failed validation, 2 numerical
blow-up, 3 bad configuration or arguments.
"""

from __future__ import annotations

import argparse
import sys
import time

from .config import ConfigError, load_config, with_overrides

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_BLOWUP = 2
EXIT_CONFIG = 3


def _load(path, workers):
    cfg = load_config(path)
    if workers is not None:
        cfg = with_overrides(cfg, workers=workers)
    return cfg


def cmd_run(args) -> int:
    from .cases import run_case

    cfg = _load(args.config, args.workers)
    every = max(cfg.steps // 20, 1)

    def progress(step, sim):
        if not args.quiet and step % every == 0:
            print(f"step {step}/{cfg.steps}", file=sys.stderr)

    res = run_case(cfg, output_dir=args.output, progress=progress)
    for path in res.artifacts:
        print(path)
    if res.status:
        print(res.summary.get("error", "run failed"), file=sys.stderr)
    return res.status


def cmd_validate(args) -> int:
    from .validation import CHECKS, run_check

    names = list(CHECKS) if args.case == "all" else [args.case]
    ok = True
    for name in names:
        for r in run_check(name):
            print(r.line(), flush=True)
            ok &= r.passed
    return EXIT_OK if ok else EXIT_FAILED


def cmd_bench(args) -> int:
    from .bench import V100, bench_report, dump_report, scaling_run
    from .cases import build_simulation

    cfg = _load(args.config, args.workers)
    steps = args.steps or cfg.steps
    if args.scaling:
        counts = [int(w) for w in args.scaling.split(",")]
        res = scaling_run(cfg, counts, steps=steps)
        print(res.table())
        if not res.identical:
            print("results differ between worker counts", file=sys.stderr)
            return EXIT_FAILED
        return EXIT_OK
    sim = build_simulation(cfg)
    sim.step(2)
    t0 = time.perf_counter()
    sim.step(steps)
    seconds = time.perf_counter() - t0
    sim.close()
    print(dump_report(bench_report(cfg, seconds, steps, V100)))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="tslbm", description="Thread-safe lattice Boltzmann solver.")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run a configured simulation")
    r.add_argument("config")
    r.add_argument("-o", "--output", help="output directory (overrides output_dir)")
    r.add_argument("-w", "--workers", type=int)
    r.add_argument("-q", "--quiet", action="store_true")
    r.set_defaults(func=cmd_run)

    from .validation import CHECKS

    v = sub.add_parser("validate", help="run a named validation case")
    v.add_argument("case", choices=[*CHECKS, "all"])
    v.set_defaults(func=cmd_validate)

    b = sub.add_parser("bench", help="measure throughput and print a JSON report")
    b.add_argument("config")
    b.add_argument("-w", "--workers", type=int)
    b.add_argument("-n", "--steps", type=int, help="timed steps (default: config steps)")
    b.add_argument("--scaling", help="comma-separated worker counts for a scaling table")
    b.set_defaults(func=cmd_bench)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        for e in exc.errors:
            print(f"{args.config}: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
