"""``elastoscatter`` command line.

Exit status: 0 on success, 1 on a numerical failure (failed check, unusable
solve), 2 on a configuration or usage error.
"""

import argparse
import logging
import sys

import numpy as np

EXIT_OK, EXIT_NUMERICAL, EXIT_CONFIG = 0, 1, 2

logger = logging.getLogger("elastoscatter")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_CONFIG)


def build_parser():
    from .experiments import SUITES

    p = _Parser(prog="elastoscatter", description="Elastic obstacle scattering experiments.")
    p.add_argument("-v", "--verbose", action="count", default=0)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    v = sub.add_parser("verify", help="run a property suite and write a JSON report")
    v.add_argument("suite", choices=SUITES)
    v.add_argument("--config", required=True)

    f = sub.add_parser("farfield", help="far-field pattern CSV, matrix JSON and metadata")
    f.add_argument("--config", required=True)

    u = sub.add_parser("uniqueness", help="compare far fields of two obstacles on a polar cap")
    u.add_argument("--config", required=True)

    d = sub.add_parser("diff-identity", help="check the two-obstacle Green difference identity")
    d.add_argument("--config", required=True)
    d.add_argument("--x", type=float, nargs=3, required=True, metavar=("X1", "X2", "X3"))
    d.add_argument("--y", type=float, nargs=3, required=True, metavar=("Y1", "Y2", "Y3"))
    return p


def _cmd_verify(cfg, args):
    from .experiments import run_verify

    checks, path = run_verify(cfg, args.suite)
    width = max(len(c.name) for c in checks)
    for c in checks:
        print(f"{'PASS' if c.passed else 'FAIL'}  {c.name:<{width}}  value={c.value:.3e}  tol={c.tolerance:.1e}")
    print(f"report: {path}")
    return EXIT_OK if all(c.passed for c in checks) else EXIT_NUMERICAL


def _cmd_farfield(cfg, args):
    from .experiments import run_farfield

    meta = run_farfield(cfg)
    print(f"residual {meta['residual_report']:.3e}, {meta['direction_grid']['count']} directions")
    for kind, name in meta["files"].items():
        print(f"{kind}: {cfg.outputs.directory / name}")
    print(f"metadata: {cfg.outputs.directory / 'metadata.json'}")
    return EXIT_OK


def _cmd_uniqueness(cfg, args):
    from .experiments import run_uniqueness

    r = run_uniqueness(cfg)
    print(f"cap {r['cap_half_angle_deg']:g} deg, {r['cap_directions']} directions")
    print(f"sup distance {r['sup_distance']:.3e}, L2 distance {r['l2_distance']:.3e}, "
          f"error bound {r['error_bound']:.3e}")
    print(f"verdict: {r['verdict']}")
    return EXIT_OK


def _cmd_diff_identity(cfg, args):
    from .experiments import run_difference_identity

    r = run_difference_identity(cfg, np.array(args.x), np.array(args.y))
    print(f"relative mismatch {r['relative_mismatch']:.3e}")
    return EXIT_OK


COMMANDS = {
    "verify": _cmd_verify,
    "farfield": _cmd_farfield,
    "uniqueness": _cmd_uniqueness,
    "diff-identity": _cmd_diff_identity,
}


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * args.verbose, format="%(levelname)s %(name)s: %(message)s")

    from .config import ConfigError, load_config
    from .experiments import NumericalFailure
    from .geometry import InvalidShape
    from .solver import GeometryError, IllConditioned

    try:
        cfg = load_config(args.config)
        return COMMANDS[args.command](cfg, args)
    except (ConfigError, GeometryError, InvalidShape) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalFailure, IllConditioned, np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
