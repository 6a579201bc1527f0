"""Command-line entry point.

    mimetic wave1d        --config data/standing_wave.cfg [--set key=value ...]
    mimetic swe-linear    --config data/geostrophic.cfg
    mimetic swe-nonlinear --config data/vortex_pair.cfg
    mimetic infsup        --pair cg1-dg0 --ne 8,16,32
    mimetic dispersion    --pair colocated-cg1 --ne 16
    mimetic audit         --v1 rt0 --v2 dg0 --mesh 4x4
    mimetic converge      --model wave1d --levels 8,16,32 --degree 2 --field u

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

from src.mimetic import io
from src.mimetic.config import settings
from src.mimetic.diagnostics.conserved import dof_ratio_audit
from src.mimetic.diagnostics.dispersion import dispersion_spectrum_1d
from src.mimetic.diagnostics.infsup import infsup_constant
from src.mimetic.engine import convergence_study, format_order, run_scenario
from src.mimetic.errors import (
    ConfigError,
    InvalidArgumentError,
    InvalidMatrixError,
    ProblemTooLargeError,
    SolverError,
    StateInvalidError,
    UnsupportedSpaceError,
)
from src.mimetic.fem.space import make_space
from src.mimetic.mesh import build_periodic_quad_mesh
from src.mimetic.models import PRESETS_BY_MODEL

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3

MODEL_COMMANDS = ("wave1d", "swe-linear", "swe-nonlinear")


def _int_list(text: str) -> list[int]:
    try:
        return [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got '{text}'") from None


def _mesh_shape(text: str) -> tuple[int, int]:
    try:
        nx, ny = (int(part) for part in text.lower().split("x"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected NXxNY, got '{text}'") from None
    return nx, ny


def _space_name(text: str) -> tuple[str, int]:
    family, degree = text[:-1].upper(), text[-1]
    if not degree.isdigit() or family not in ("CG", "DG", "RT"):
        raise argparse.ArgumentTypeError(f"expected e.g. rt0 or dg1, got '{text}'")
    return family, int(degree)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mimetic", description=__doc__.splitlines()[0])
    parser.add_argument("--log-level", default=None, help="override MIMETIC_LOG_LEVEL")
    sub = parser.add_subparsers(dest="command", required=True)

    for name in MODEL_COMMANDS:
        p = sub.add_parser(name, help=f"run a {name} scenario")
        p.add_argument("--config", type=Path, help="key = value scenario file")
        p.add_argument("--set", dest="overrides", action="append", default=[],
                       metavar="KEY=VALUE", help="override one config entry")
        p.add_argument("--output-dir", type=Path, default=None)

    p = sub.add_parser("infsup", help="numerical inf-sup constants")
    p.add_argument("--pair", default="cg1-dg0")
    p.add_argument("--ne", type=_int_list, default=[8, 16, 32])
    p.add_argument("--output-dir", type=Path, default=None)

    p = sub.add_parser("dispersion", help="1D discrete frequencies")
    p.add_argument("--pair", default="cg1-dg0")
    p.add_argument("--ne", type=int, default=16)
    p.add_argument("--output-dir", type=Path, default=None)

    p = sub.add_parser("audit", help="dim(V1)/dim(V2) as an exact fraction")
    p.add_argument("--v1", type=_space_name, default=("RT", 0))
    p.add_argument("--v2", type=_space_name, default=("DG", 0))
    p.add_argument("--mesh", type=_mesh_shape, default=(4, 4))

    p = sub.add_parser("converge", help="refinement study against an analytic solution")
    p.add_argument("--model", choices=("wave1d", "swe-linear"), default="wave1d")
    p.add_argument("--levels", type=_int_list, default=[8, 16, 32])
    p.add_argument("--degree", type=int, default=1)
    p.add_argument("--field", choices=("u", "h"), default="h")
    p.add_argument("--cfl", type=float, default=0.25)
    p.add_argument("--final-time", type=float, default=0.5)
    p.add_argument("--output-dir", type=Path, default=None)
    return parser


def _output_dir(args: argparse.Namespace) -> Path:
    return args.output_dir if args.output_dir is not None else Path(settings.output_dir)


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def _run_model(args: argparse.Namespace) -> int:
    overrides = io.parse_overrides(args.overrides)
    if args.config is not None:
        config = io.load_config(args.config, overrides)
    else:
        base = f"model = {args.command}\npreset = {PRESETS_BY_MODEL[args.command][0]}\n"
        config = io.parse_config_text(base, overrides)
    if config.model != args.command:
        raise ConfigError(f"config is for '{config.model}', not '{args.command}'", key="model")
    result = run_scenario(config, args.output_dir)
    last = result.records[-1]
    print(f"{config.model}: {len(result.records)} rows, t = {last.time:.6g}, energy = {last.energy:.12g}")
    for path in result.outputs:
        print(f"  wrote {path}")
    return EXIT_OK


def _infsup(args: argparse.Namespace) -> int:
    values = infsup_constant(args.pair, args.ne)
    rows = [{"n_elements": n, "infsup": v} for n, v in zip(args.ne, values)]
    for row in rows:
        print(f"{args.pair} Ne={row['n_elements']}: {row['infsup']:.12f}")
    io.write_table(rows, _output_dir(args) / f"infsup_{args.pair}.csv")
    return EXIT_OK


def _dispersion(args: argparse.Namespace) -> int:
    result = dispersion_spectrum_1d(args.pair, args.ne)
    print(f"{result.label} Ne={args.ne}: {result.zero_count} zero modes of {len(result.frequencies)}")
    rows = [{"mode": k, "frequency": w} for k, w in enumerate(result.frequencies)]
    io.write_table(rows, _output_dir(args) / f"dispersion_{result.label}_{args.ne}.csv")
    return EXIT_OK


def _audit(args: argparse.Namespace) -> int:
    nx, ny = args.mesh
    mesh = build_periodic_quad_mesh(1.0, 1.0, nx, ny)
    V1, V2 = make_space(mesh, *args.v1), make_space(mesh, *args.v2)
    ratio = dof_ratio_audit(V1, V2)
    print(f"dim({V1.label}) = {V1.dim}, dim({V2.label}) = {V2.dim}")
    print(f"ratio = {ratio.numerator}/{ratio.denominator}")
    return EXIT_OK


def _converge(args: argparse.Namespace) -> int:
    rows = convergence_study(
        args.model, args.levels, degree=args.degree, field_name=args.field,
        cfl=args.cfl, final_time=args.final_time,
    )
    for row in rows:
        print(
            f"N={row.n_elements:4d}  dx={row.mesh_size:.4e}  error={row.error:.6e}  order={format_order(row.order)}"
        )
    io.write_table(rows, _output_dir(args) / f"convergence_{args.model}_p{args.degree}_{args.field}.csv")
    return EXIT_OK


COMMANDS = {
    "infsup": _infsup,
    "dispersion": _dispersion,
    "audit": _audit,
    "converge": _converge,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=(args.log_level or settings.log_level).upper(),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    handler = _run_model if args.command in MODEL_COMMANDS else COMMANDS[args.command]
    try:
        return handler(args)
    except (ConfigError, InvalidArgumentError, UnsupportedSpaceError, ProblemTooLargeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (SolverError, StateInvalidError, InvalidMatrixError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
