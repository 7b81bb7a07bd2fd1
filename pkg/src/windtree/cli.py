"""Command line front end for the experiment drivers.

Exit codes: 0 on success, 1 when a check or run fails, 2 on bad
configuration or arguments.
"""

from __future__ import annotations

import argparse
import math
import sys

from .errors import ConfigError, DomainError, RetryExhausted, WindtreeError
from .experiments import (ExperimentConfig, run_consistency, run_deviation_spectrum,
                          run_diffusion, run_lyapunov, sample_angle, angle_rng)
from .iet import first_return_iet, main_transversal
from .surface import build_lshape, build_surface_X
from .tables import TableParams, veech_params
from .version import __version__


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--a", type=float, default=0.5, metavar="A",
                   help="scatterer width in (0, 1)")
    p.add_argument("--b", type=float, default=0.5, metavar="B",
                   help="scatterer height in (0, 1)")
    p.add_argument("--veech", type=float, nargs=3, metavar=("X", "Y", "D"),
                   help="table from the algebraic family; overrides --a/--b")
    p.add_argument("--angles", type=int, default=64, metavar="N",
                   help="number of sampled directions")
    p.add_argument("--tmax", type=float, default=1.0e7, metavar="T",
                   help="flow time horizon")
    p.add_argument("--seed", type=int, default=0, metavar="S",
                   help="seed determining every sampled direction")
    p.add_argument("--out", default=None, metavar="PATH",
                   help="directory for report.csv, manifest.json, series")
    p.add_argument("--threads", type=int, default=1, metavar="N",
                   help="worker processes")


def _table(args) -> TableParams:
    if args.veech is not None:
        x, y, d = args.veech
        return veech_params(x, y, int(d))
    return TableParams(args.a, args.b)


def _config(args, **overrides) -> ExperimentConfig:
    kw = dict(table=_table(args), angle_count=args.angles, t_max=args.tmax,
              seed=args.seed, out_dir=args.out, threads=args.threads)
    kw.update(overrides)
    return ExperimentConfig(**kw)


def _cmd_diffuse(args) -> int:
    theta = math.pi / 2.0 if args.corridor else None
    report = run_diffusion(_config(args), forced_angle=theta)
    print(report.describe())
    return 0


def _cmd_deviations(args) -> int:
    reports = run_deviation_spectrum(_config(args))
    for name, rep in reports.items():
        print(f"{name}: {rep.describe()}")
    return 0


def _cmd_lyapunov(args) -> int:
    config = _config(args, n_accel=args.steps)
    report = run_lyapunov(config)
    print(report.describe(), end="")
    return 0


def _cmd_check(args) -> int:
    config = _config(args, angle_count=max(args.angles, 1),
                     n_samples=args.samples,
                     n_events=args.events, t_max=max(args.tmax, 2.0e4))
    suite = run_consistency(config)
    print(suite.describe(), end="")
    return 0 if suite.passed else 1


def _cmd_iet(args) -> int:
    table = _table(args)
    theta = sample_angle(angle_rng(args.seed, 0))
    x = build_surface_X(table)
    cones = sorted(u for u, _m in x.cone_points())
    print(f"table a={table.a!r} b={table.b!r}")
    print(f"four-sheet surface: genus {x.genus}, stratum "
          f"{x.stratum_signature()}, cone angle units {cones}")
    surface = build_lshape(table)
    print(f"quotient: genus {surface.genus}, stratum "
          f"{surface.stratum_signature()}")
    fr = first_return_iet(surface, theta, main_transversal(surface, table))
    iet = fr.iet
    print(f"direction theta={theta!r}")
    print(f"first-return exchange on {iet.d} intervals "
          f"(area error {fr.area_error:.2e})")
    print("lengths:", " ".join(repr(float(v)) for v in iet.lam))
    print("bottom order:", " ".join(str(v) for v in iet.bot))
    print("deck labels:", " ".join(str(v) for v in iet.lab))
    print("return times:", " ".join(f"{v:.6f}" for v in fr.return_times))
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="windtree",
        description="Experiments on the periodic rectangular-scatterer "
                    "billiard")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("diffuse", help="fit the displacement growth exponent")
    _add_common(p)
    p.add_argument("--corridor", action="store_true",
                   help="force the vertical corridor direction")
    p.set_defaults(fn=_cmd_diffuse)

    p = sub.add_parser("deviations",
                       help="fit growth of the lattice crossing counters")
    _add_common(p)
    p.set_defaults(fn=_cmd_deviations)

    p = sub.add_parser("lyapunov",
                       help="character-twisted Lyapunov spectra")
    _add_common(p)
    p.add_argument("--steps", type=int, default=1_000_000, metavar="N",
                   help="accelerated induction steps per direction")
    p.set_defaults(fn=_cmd_lyapunov)

    p = sub.add_parser("check", help="run the consistency suite")
    _add_common(p)
    p.add_argument("--samples", type=int, default=20, metavar="N",
                   help="random tables per property check")
    p.add_argument("--events", type=int, default=20000, metavar="N",
                   help="reflections per certification trajectory")
    p.set_defaults(fn=_cmd_check)

    p = sub.add_parser("iet", help="print surface invariants and the "
                                   "first-return exchange for one direction")
    _add_common(p)
    p.set_defaults(fn=_cmd_iet)

    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except (ConfigError, DomainError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except RetryExhausted as exc:
        print(f"run failed: {exc}", file=sys.stderr)
        return 1
    except WindtreeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
