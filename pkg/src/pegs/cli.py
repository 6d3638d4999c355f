"""Command-line interface."""

from __future__ import annotations

import argparse
import json
import logging
import re
import sys
from pathlib import Path
from typing import Any

import argcomplete
import yaml

from pegs import cyclohedron, verify
from pegs.config import KINDS, TEMPLATE, ConfigError, RunConfig, log_level
from pegs.configspace import ConfigurationError
from pegs.curves import SPEC_PREFIXES, CurveError, check_embedding, curve_from_spec, ensure_counterclockwise
from pegs.render import RenderError, render_svg, write_vertices_csv
from pegs.solver import SolveOptions, SolverError, solve
from pegs.testmaps import TestMapError, TestMapKind

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_BAD_INPUT = 2
EXIT_NO_ZEROS = 3


class CurveSpecCompleter:
    """Complete curve spec prefixes."""

    def __call__(self, prefix, **kwargs):
        return [p for p in SPEC_PREFIXES if p.startswith(prefix)]


_curve_completer = CurveSpecCompleter()


_JSON_TOKEN = re.compile(r'"(?:\\.|[^"\\])*"|-?\d+(?:\.\d+)?[eE][-+]?\d+|-?\d+\.\d+')


def _seventeen_digits(match: re.Match[str]) -> str:
    token = match.group(0)
    if token.startswith('"'):
        return token
    text = format(float(token), ".17g")
    return text if "." in text or "e" in text else text + ".0"


def dump_json(payload: Any) -> str:
    """Sorted, indented JSON with every float printed to 17 significant digits."""
    return _JSON_TOKEN.sub(_seventeen_digits, json.dumps(payload, indent=2, sort_keys=True)) + "\n"


def emit(text: str, out: Path | None) -> None:
    """Write text to a file, or to stdout when no path is given."""
    if out is None:
        sys.stdout.write(text)
    else:
        out.write_text(text)
        logger.info("wrote %s", out)


def load_config(args: argparse.Namespace) -> RunConfig:
    return RunConfig.load(args.config).merged(args)


def handle_find(args: argparse.Namespace) -> int:
    config = load_config(args)
    if config.curve is None:
        raise ConfigError("No curve given: pass --curve or set curve in the config file")
    curve = ensure_counterclockwise(curve_from_spec(config.curve))
    embedding = check_embedding(curve)
    if not embedding.ok:
        print(f"Curve check failed for {curve.name}: {'; '.join(embedding.problems)}", file=sys.stderr)
        return EXIT_FAILED

    options = SolveOptions(
        grid=config.grid,
        tol=config.tol,
        fd_step=config.fd_step,
        stratum_threshold=config.stratum_threshold,
        max_candidates=config.max_candidates,
        threads=config.threads,
        pin_first=args.pin_first,
    )
    report = solve(curve, TestMapKind(config.kind), options)
    payload = report.to_dict()
    payload["config"] = config.to_dict()
    payload["options"] = options.to_dict()
    emit(dump_json(payload), args.out)

    if args.svg is not None:
        args.svg.write_text(render_svg(curve, report))
    if args.csv is not None:
        write_vertices_csv(report, args.csv)

    if not report.orbits:
        print(f"No inscribed {config.kind} found on {curve.name}", file=sys.stderr)
        return EXIT_NO_ZEROS
    return EXIT_OK


def handle_cyclohedron(args: argparse.Namespace) -> int:
    lattice = cyclohedron.enumerate_faces(args.n)
    f_vector = lattice.f_vector()
    if args.output == "csv":
        emit(f"{args.n},{','.join(str(f) for f in f_vector)}\n", None)
    else:
        if args.summary:
            payload = {
                "n": args.n,
                "f_vector": f_vector,
                "euler_characteristic": cyclohedron.euler_characteristic(lattice),
                "vertex_count": cyclohedron.vertex_count(args.n),
                "graded": cyclohedron.is_graded(lattice),
                "facet_census": dict(sorted(cyclohedron.facet_census(lattice).items())),
            }
        else:
            payload = lattice.to_dict()
        if args.output == "yaml":
            emit(yaml.dump(payload, default_flow_style=False, sort_keys=False), None)
        else:
            emit(dump_json(payload), None)
    if args.out is not None:
        emit(dump_json(lattice.to_dict()), args.out)
    return EXIT_OK


def handle_verify(args: argparse.Namespace) -> int:
    config = load_config(args)
    if args.case == "all":
        reports = verify.run_all(config.seed, config.samples)
    else:
        reports = [verify.run_case(verify.ReferenceCase(args.case), config.seed, config.samples)]
    passed = all(r.passed for r in reports)
    payload = {
        "passed": passed,
        "cases": [r.to_dict() for r in reports],
        "config": {"seed": config.seed, "samples": config.samples},
    }
    emit(dump_json(payload), args.out)
    for r in reports:
        print(f"{r.case}: {'pass' if r.passed else 'FAIL'}", file=sys.stderr)
    return EXIT_OK if passed else EXIT_FAILED


def handle_check_curve(args: argparse.Namespace) -> int:
    curve = curve_from_spec(args.curve)
    report = check_embedding(curve)
    if args.output == "json":
        emit(dump_json(report.to_dict()), None)
    elif args.output == "yaml":
        emit(yaml.dump(report.to_dict(), default_flow_style=False, sort_keys=False), None)
    else:
        print(f"Curve:            {report.curve}")
        print(f"Injective:        {'yes' if report.injective else 'no'} (margin {report.margin:.3g})")
        print(f"Min tangent norm: {report.min_tangent_norm:.3g}")
        if report.winding is not None:
            print(f"Tangent winding:  {report.winding}")
        for problem in report.problems:
            print(f"Problem:          {problem}")
        print(f"Status:           {'ok' if report.ok else 'FAILED'}")
    return EXIT_OK if report.ok else EXIT_FAILED


def handle_config_template(args: argparse.Namespace) -> int:
    print(TEMPLATE, end="")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pegs",
        description="Find inscribed squares, affine-regular hexagons and rhombi in closed curves",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)

    # pegs find --curve SPEC [--kind K] [--grid M] ...
    find_parser = subparsers.add_parser("find", help="Search a curve for inscribed pegs")
    find_parser.add_argument(
        "--curve",
        metavar="SPEC",
        help="circle, ellipse:a,b, rounded-poly:x1,y1;...@rho, helix-chord[:rho] or file:path.csv",
    ).completer = _curve_completer
    find_parser.add_argument("--kind", choices=KINDS, help="Peg shape (default: square)")
    find_parser.add_argument("--grid", type=int, metavar="M", help="Scan grid resolution (default: 32)")
    find_parser.add_argument("--tol", type=float, help="Newton residual tolerance (default: 1e-10)")
    find_parser.add_argument(
        "--stratum-threshold", type=float, metavar="R", help="Collision gap ratio (default: 0.05)"
    )
    find_parser.add_argument("--fd-step", type=float, metavar="H", help="Finite-difference step (default: 1e-6)")
    find_parser.add_argument("--seed", type=int, help="Recorded for provenance (default: 20080604)")
    find_parser.add_argument("--threads", type=int, metavar="K", help="Refinement threads (default: all cores)")
    find_parser.add_argument("--max-candidates", type=int, metavar="N", help="Candidates to refine (default: 256)")
    find_parser.add_argument(
        "--pin-first",
        action="store_true",
        help="Hold the first parameter fixed (for rotation-symmetric curves)",
    )
    find_parser.add_argument("--out", type=Path, metavar="PATH", help="Write the JSON report here")
    find_parser.add_argument("--svg", type=Path, metavar="PATH", help="Write an SVG overlay (planar curves)")
    find_parser.add_argument("--csv", type=Path, metavar="PATH", help="Write vertex coordinates as CSV")
    find_parser.add_argument("--config", type=Path, metavar="PATH", help="YAML config file")
    find_parser.set_defaults(func=handle_find)

    # pegs cyclohedron --n N [-o csv|json|yaml] [--out PATH]
    cyc_parser = subparsers.add_parser("cyclohedron", help="Enumerate the face lattice of W_n")
    cyc_parser.add_argument("--n", type=int, required=True, help="Number of points (3 to 9)")
    cyc_parser.add_argument(
        "-o",
        "--output",
        choices=["csv", "json", "yaml"],
        default="json",
        help="Output format; csv prints n and the f-vector",
    )
    cyc_parser.add_argument(
        "--summary",
        action="store_true",
        help="Print the f-vector, Euler characteristic and facet shapes instead of the lattice",
    )
    cyc_parser.add_argument("--out", type=Path, metavar="PATH", help="Write the full lattice as JSON")
    cyc_parser.set_defaults(func=handle_cyclohedron)

    # pegs verify [--case C] [--seed S] [--samples K] [--out PATH]
    verify_parser = subparsers.add_parser("verify", help="Run the reference transversality checks")
    verify_parser.add_argument(
        "--case",
        choices=["all", *(c.value for c in verify.ReferenceCase)],
        default="all",
        help="Case to run (default: all)",
    )
    verify_parser.add_argument("--seed", type=int, help="Boundary sampling seed (default: 20080604)")
    verify_parser.add_argument("--samples", type=int, help="Samples per boundary stratum (default: 100)")
    verify_parser.add_argument("--out", type=Path, metavar="PATH", help="Write the JSON report here")
    verify_parser.add_argument("--config", type=Path, metavar="PATH", help="YAML config file")
    verify_parser.set_defaults(func=handle_verify)

    # pegs check-curve --curve SPEC [-o text|json|yaml]
    check_parser = subparsers.add_parser("check-curve", help="Check that a curve is an embedded loop")
    check_parser.add_argument("--curve", metavar="SPEC", required=True, help="Curve spec").completer = (
        _curve_completer
    )
    check_parser.add_argument(
        "-o", "--output", choices=["text", "json", "yaml"], default="text", help="Output format"
    )
    check_parser.set_defaults(func=handle_check_curve)

    # pegs config-template
    template_parser = subparsers.add_parser("config-template", help="Print a commented config file")
    template_parser.set_defaults(func=handle_config_template)
    return parser


def main(argv: list[str] | None = None) -> int:
    """Main entry point."""
    parser = build_parser()
    argcomplete.autocomplete(parser, default_completer=None)
    args = parser.parse_args(argv)

    try:
        logging.basicConfig(level=log_level(), format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    except ConfigError as e:
        print(f"Configuration error: {e}", file=sys.stderr)
        return EXIT_BAD_INPUT

    try:
        return args.func(args)
    except ConfigError as e:
        print(f"Configuration error: {e}", file=sys.stderr)
        return EXIT_BAD_INPUT
    except CurveError as e:
        print(f"Curve error: {e}", file=sys.stderr)
        return EXIT_BAD_INPUT
    except cyclohedron.CyclohedronError as e:
        print(f"Cyclohedron error: {e}", file=sys.stderr)
        return EXIT_BAD_INPUT
    except verify.VerifyError as e:
        print(f"Verify error: {e}", file=sys.stderr)
        return EXIT_BAD_INPUT
    except (SolverError, TestMapError, ConfigurationError) as e:
        print(f"Error: {e}", file=sys.stderr)
        return EXIT_BAD_INPUT
    except RenderError as e:
        print(f"Render error: {e}", file=sys.stderr)
        return EXIT_BAD_INPUT
    except OSError as e:
        print(f"I/O error: {e}", file=sys.stderr)
        return EXIT_BAD_INPUT


if __name__ == "__main__":
    sys.exit(main())
