"""adiaphase command line.

    adiaphase simulate <config.json> [--out-dir DIR] [--seed S] [--tolerance TOL]
    adiaphase verify   <config.json> [--random-gauges K] [--seed S] [--tolerance TOL]
    adiaphase sweep    <config.json> [--out-dir DIR] [--workers W]

Exit codes: 0 success, 1 tolerance failure, 2 config error, 3 physics
precondition violated (degenerate spectrum or unresolvable eigenvector
continuation).
"""

import argparse
import logging
import sys

from . import config, runner
from .spectral import SpectralError

EXIT_OK = 0
EXIT_TOLERANCE = 1
EXIT_CONFIG = 2
EXIT_PHYSICS = 3


def _parser():
    parser = argparse.ArgumentParser(prog="adiaphase", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("config", help="JSON run configuration")
        p.add_argument("--out-dir", help="output directory (overrides ADIAPHASE_OUT and config)")
        p.add_argument("--seed", type=int, help="seed for random gauges")
        p.add_argument("--tolerance", type=float, help="override the gauge-invariance tolerance")
        return p

    common(sub.add_parser("simulate", help="run the adiabatic and exact pipelines"))
    v = common(sub.add_parser("verify", help="check observable invariance under basis rephasing"))
    v.add_argument("--random-gauges", type=int, metavar="K", help="number of seeded random gauges")
    s = common(sub.add_parser("sweep", help="repeat the pipeline over one parameter"))
    s.add_argument("--workers", type=int, help="concurrent sweep points")
    return parser


def main(argv=None):
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        raw = config.load(args.config)
        if args.command == "simulate":
            report = runner.simulate(raw, out_dir=args.out_dir, seed=args.seed, tolerance=args.tolerance)
            for name, c in report["checks"].items():
                print(f"{name}: {c['value']:.3e} (threshold {c['threshold']:.1e}) {'ok' if c['pass'] else 'FAIL'}")
        elif args.command == "verify":
            if args.random_gauges is not None and args.random_gauges < 1:
                raise config.ConfigError("--random-gauges must be >= 1")
            report = runner.verify(raw, random_gauges=args.random_gauges, seed=args.seed,
                                   tolerance=args.tolerance, out_dir=args.out_dir)
            print(f"max discrepancy {report['max_discrepancy']:.3e} over {len(report['gauges'])} gauge(s): "
                  f"{'PASS' if report['pass'] else 'FAIL'}")
        else:
            if args.workers is not None and args.workers < 1:
                raise config.ConfigError("--workers must be >= 1")
            report = runner.sweep(raw, out_dir=args.out_dir, workers=args.workers)
            report["pass"] = True
            for value, row in zip(report["values"], report["rows"]):
                print(f"{report['parameter']}={value:g}: max deviation {row['max_deviation']:.4e}")
    except SpectralError as exc:
        print(f"adiaphase: physics precondition violated: {exc}", file=sys.stderr)
        return EXIT_PHYSICS
    except (config.ConfigError, ValueError) as exc:
        print(f"adiaphase: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK if report["pass"] else EXIT_TOLERANCE


if __name__ == "__main__":
    sys.exit(main())
