"""Command-line front end.

Exit codes: 0 success, 2 malformed spec or arguments, 3 validity guard abort,
4 oracle check failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace

from gravdip.errors import GravdipError, SpecError
from gravdip.model import PhysicalParams
from gravdip.perturbation import Normalization
from gravdip.sweep import (
    Grid,
    Mode,
    SweepSpec,
    run,
    run_dip_scan,
    _json_default,
    write_csv,
    write_json,
)

EXIT_OK, EXIT_SPEC, EXIT_GUARD, EXIT_ORACLE = 0, 2, 3, 4

_COMMANDS = {
    "sweep-ground": (Mode.ground_delocalization, "delta_x_over_x_planck"),
    "sweep-squeezed": (Mode.squeezed_max_entropy, "r"),
    "time-trace": (Mode.time_trace, "omega_t"),
    "find-dip": (Mode.dip_scan, None),
    "oracle-check": (Mode.oracle_check, None),
}
_NORMALIZE = {
    "raw": Normalization.raw,
    "plateau": Normalization.per_plateau_S_p,
    "refmax": Normalization.per_reference_max,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise SpecError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="gravdip", description="PN gravitational entanglement of two trapped masses.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in _COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="JSON spec file; flags override its fields")
        p.add_argument("--mass", type=float)
        p.add_argument("--distance", type=float, nargs="+", help="one or more trap separations (series)")
        omega = p.add_mutually_exclusive_group()
        omega.add_argument("--omega", type=float, help="trap frequency in rad/s")
        omega.add_argument("--omega-factor", type=float, nargs="+", help="multiples of w_0 = c/(sqrt(2) d)")
        p.add_argument("--squeeze", type=float, help="squeezing parameter r")
        p.add_argument("--grid", help="min:max:points:lin|log")
        p.add_argument("--normalize", choices=sorted(_NORMALIZE))
        p.add_argument("--rescale-coupling", type=float)
        p.add_argument("--out", help="output path, '-' for stdout")
        p.add_argument("--format", choices=("csv", "json"), default="csv")
        p.add_argument("--workers", type=int, default=1)
    return parser


def spec_from_args(args: argparse.Namespace) -> SweepSpec:
    mode, axis = _COMMANDS[args.command]
    if args.config:
        try:
            with open(args.config) as fh:
                base = SweepSpec.from_dict({**json.load(fh), "mode": mode.value})
        except (OSError, json.JSONDecodeError, KeyError, TypeError) as exc:
            raise SpecError(f"cannot load config {args.config!r}: {exc}") from exc
    else:
        defaults = {"mode": mode}
        if mode is Mode.time_trace:
            defaults["params"] = PhysicalParams(r=-3.0)
        if mode is Mode.oracle_check:
            defaults["rescale_coupling"] = 1e-3
        base = SweepSpec(**defaults)

    params = base.params
    overrides = {}
    if args.mass is not None:
        overrides["m"] = args.mass
    if args.omega is not None:
        overrides["omega_m"] = args.omega
    if args.squeeze is not None:
        overrides["r"] = args.squeeze
    if args.distance and len(args.distance) == 1:
        overrides["d"] = args.distance[0]
    if overrides:
        params = params.replace(**overrides)

    series = base.series
    if args.distance and len(args.distance) > 1:
        if mode not in (Mode.ground_delocalization, Mode.dip_scan):
            raise SpecError("multiple --distance values are only supported by sweep-ground and find-dip")
        series = tuple(args.distance)
    if args.omega_factor:
        if mode in (Mode.ground_delocalization, Mode.dip_scan):
            raise SpecError(f"--omega-factor does not apply to {args.command}")
        series = tuple(args.omega_factor)

    return replace(
        base,
        params=params,
        grid=Grid.parse(args.grid, axis) if args.grid else base.grid,
        normalization=_NORMALIZE[args.normalize] if args.normalize else base.normalization,
        rescale_coupling=args.rescale_coupling if args.rescale_coupling is not None else base.rescale_coupling,
        output_path=args.out if args.out is not None else base.output_path,
        series=series,
    )


def _open_out(path: str):
    return sys.stdout if path == "-" else open(path, "w", newline="")


def _emit_json(obj: dict, path: str) -> None:
    out = _open_out(path)
    try:
        json.dump(obj, out, indent=2, sort_keys=True, allow_nan=True, default=_json_default)
        out.write("\n")
    finally:
        if out is not sys.stdout:
            out.close()


def main(argv: list[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SpecError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SPEC
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    try:
        spec = spec_from_args(args)
        if spec.mode is Mode.dip_scan:
            _emit_json(run_dip_scan(spec), spec.output_path)
            return EXIT_OK
        if spec.mode is Mode.oracle_check:
            from gravdip.oracle_check import run_oracle_check

            report = run_oracle_check(spec)
            _emit_json(report, spec.output_path)
            return EXIT_OK if report["passed"] else EXIT_ORACLE
        result = run(spec, workers=args.workers)
        out = _open_out(spec.output_path)
        try:
            (write_json if args.format == "json" else write_csv)(result, out)
        finally:
            if out is not sys.stdout:
                out.close()
        return EXIT_OK
    except SpecError as exc:
        print(f"spec error: {exc}", file=sys.stderr)
        return EXIT_SPEC
    except GravdipError as exc:
        print(f"guard violation [{exc.guard}]: {exc}", file=sys.stderr)
        return EXIT_GUARD
    except ValueError as exc:
        print(f"spec error: {exc}", file=sys.stderr)
        return EXIT_SPEC


if __name__ == "__main__":
    sys.exit(main())
