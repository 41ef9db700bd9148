"""Command line entry point: ``gradfiber run|verify|bench``."""
import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from ._jit import set_threads
from .errors import ConfigError, GradFiberError

log = logging.getLogger("gradfiber")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SOLVER = 3
EXIT_ACCEPTANCE = 4

VERIFY_CHECKS = ("gtn", "return_map", "in_plane_bending", "properties")


def _common(parser):
    parser.add_argument("--dt", type=float, help="time step in s (overrides the config)")
    parser.add_argument("--steps", type=int, help="number of load steps (overrides --dt)")
    parser.add_argument("--threads", type=int, default=0, help="numba worker threads (0: default)")
    parser.add_argument("--output-dir", type=Path, help="directory for run.csv, events.log and .vtu files")
    parser.add_argument("--seed", type=int, default=0, help="seed of the randomized checks")
    parser.add_argument("-v", "--verbose", action="store_true", help="log every step")


def build_parser():
    parser = argparse.ArgumentParser(prog="gradfiber",
                                     description="Thermomechanical fracture of fiber reinforced composites.")
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run a simulation described by a config file")
    run.add_argument("config", type=Path)
    run.add_argument("--fine", action="store_true", help="use the 76x16x2 tension mesh instead of the configured one")
    _common(run)
    verify = sub.add_parser("verify", help="run the property and oracle checks")
    _common(verify)
    bench = sub.add_parser("bench", help="run a named benchmark against its acceptance threshold")
    bench.add_argument("name", choices=sorted(_bench_names()))
    _common(bench)
    return parser


def _bench_names():
    from .checks import CHECKS

    return list(CHECKS) + ["perf"]


def _setup_logging(verbose):
    logging.basicConfig(level=logging.INFO if verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")


def cmd_run(args):
    from .config import load_config
    from .runner import run_scenario
    from .scenarios import build_scenario

    cfg = load_config(args.config)
    sol, out = cfg["solver"], cfg["output"]
    set_threads(args.threads or sol["threads"])
    steps = args.steps or sol["steps"] or None
    try:
        sc = build_scenario(cfg, steps=steps, dt=args.dt, fine=args.fine)
    except ValueError as exc:
        raise ConfigError(f"{cfg.source}: {exc}") from None
    out_dir = args.output_dir or Path(out["dir"])
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "config_used.cfg").write_text(cfg.dumps())

    def progress(row):
        log.info("t=%.4g u=%.4g F=%.6g max_s=%.3g max_sL=%.3g max_sM=%.3g", *row[:6])

    res = run_scenario(sc, out_dir, cadence=out["every"], fields=out["vtk"], on_row=progress)
    print(f"{sc.name}: {len(res.rows) - 1} steps in {res.wall_time:.1f} s, "
          f"peak force {res.peak_force:.6g} N, output in {out_dir}")
    for t, u, material, kind, _ in res.events:
        print(f"  {kind} of {material} at t={t:.4g} s, u={u:.4g} mm")
    return EXIT_OK


def _report(results):
    for res in results:
        print(res.line())
    return EXIT_OK if all(r.passed for r in results) else EXIT_ACCEPTANCE


def cmd_verify(args):
    from . import checks

    set_threads(args.threads)
    results = []
    for name in VERIFY_CHECKS:
        func = checks.CHECKS[name]
        results.append(func(seed=args.seed) if name in ("gtn", "return_map", "properties") else func())
    return _report(results)


def cmd_bench(args):
    from . import checks

    set_threads(args.threads)
    name = args.name
    if name == "perf":
        from .perf import compare

        print(compare(threads=args.threads, seed=args.seed).report())
        return EXIT_OK
    if name == "four_point_bending":
        res = checks.check_four_point_bending(steps=args.steps or 10)
    elif name in ("gtn", "return_map", "properties"):
        res = checks.CHECKS[name](seed=args.seed)
    elif name in ("tension_0", "tension_90"):
        res = checks.check_failure_sequence(float(name.split("_")[1]), output_dir=args.output_dir)
    else:
        res = checks.CHECKS[name]()
    return _report([res])


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    _setup_logging(args.verbose)
    np.random.seed(args.seed)
    handlers = {"run": cmd_run, "verify": cmd_verify, "bench": cmd_bench}
    try:
        return handlers[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except GradFiberError as exc:
        print(f"solver failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
