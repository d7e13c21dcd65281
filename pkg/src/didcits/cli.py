"""Command-line entry point: ``didcits {fit,event-study,compare,simulate}``.

Exit codes: 0 success, 1 validation or configuration error (including bad
usage), 2 I/O error. Diagnostics go to stderr; results to ``--out`` or
stdout.
"""

from __future__ import annotations

import argparse
import sys
import warnings
from typing import Sequence

from . import __version__
from .estimators import compare_designs, estimate
from .io import PanelSchema, _atomic_write, dumps, emit_plot_data, read_panel, write_results
from .panel import ALL_DESIGNS, ConfigurationError, Design, DesignSpec, PanelValidationError
from .simulation import DgpSpec, monte_carlo

EXIT_OK, EXIT_VALIDATION, EXIT_IO = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.format_usage()}{self.prog}: error: {message}")


def _number(text: str):
    value = float(text)
    if value.is_integer() and not any(c in text for c in ".eE"):
        return int(value)
    return value


def _grid(text: str) -> tuple:
    """``a:b`` (integers a..b), ``a:b:step``, or a comma list."""
    if ":" in text:
        parts = [_number(p) for p in text.split(":")]
        if len(parts) == 2:
            a, b = parts
            step = 1
        elif len(parts) == 3:
            a, b, step = parts
        else:
            raise argparse.ArgumentTypeError(f"bad grid {text!r}")
        out, t = [], a
        while t <= b + 1e-12:
            out.append(t)
            t = t + step
        return tuple(out)
    return tuple(_number(p) for p in text.split(","))


def _add_panel_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--input", required=True, help="delimited text file with a header row")
    p.add_argument("--t0", required=True, type=_number, help="first post-period time")
    p.add_argument("--unit", required=True, help="unit id column")
    p.add_argument("--group", required=True, help="group column")
    p.add_argument("--treated-label", required=True, help="group value marking the treated group")
    p.add_argument("--time", required=True, help="time column")
    p.add_argument("--outcome", required=True, help="outcome column")
    p.add_argument("--weight", default=None, help="optional weight column")
    p.add_argument("--covariates", default="", help="comma-separated covariate columns")
    p.add_argument("--delimiter", default=",", help="field delimiter; 'tab' for tabs")
    p.add_argument("--se", default="hc1", choices=["hc1", "classical", "cluster"])
    p.add_argument("--ci-level", type=float, default=0.95)
    p.add_argument("--ci-dist", default="normal", choices=["normal", "t"])
    p.add_argument("--no-center", action="store_true", help="use raw time in trend columns")
    p.add_argument(
        "--identification-minimums",
        action="store_true",
        help="relax period-count minimums to what identification needs",
    )
    p.add_argument("--pooled", action="store_true", help="single post-period effect")
    p.add_argument("--out", default=None, help="output path (default stdout)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="didcits", description="Two-group DID / CITS estimation")
    parser.add_argument("--version", action="version", version=f"didcits {__version__}")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    fit = sub.add_parser("fit", help="estimate one design")
    _add_panel_args(fit)
    fit.add_argument("--design", required=True, help="fe-did, fe-did-trends, general-cits, linear-cits")
    fit.add_argument("--format", default="json", choices=["json", "csv"])

    es = sub.add_parser("event-study", help="group x time contrasts against a reference period")
    _add_panel_args(es)
    es.add_argument("--reference", type=_number, default=None, help="reference pre-period time")
    es.add_argument("--plot-data", default=None, help="also write plot data here")

    cmp_ = sub.add_parser("compare", help="estimate several designs side by side")
    _add_panel_args(cmp_)
    cmp_.add_argument("--designs", default="all", help="'all' or a comma list of designs")
    cmp_.add_argument("--format", default="json", choices=["json", "csv"])
    cmp_.add_argument("--reference", type=_number, default=None, help="event-study reference for plot data")
    cmp_.add_argument("--plot-data", default=None, help="also write plot data here")

    sim = sub.add_parser("simulate", help="Monte Carlo bias and coverage")
    sim.add_argument("--dgp", required=True, help="quadratic, parallel, diverging, linear-cits")
    sim.add_argument("--reps", type=int, default=100)
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument("--noise-sd", type=float, default=0.0)
    sim.add_argument("--grid", type=_grid, default=tuple(range(1, 11)))
    sim.add_argument("--t0", type=_number, default=6)
    sim.add_argument("--units", type=int, default=1, help="units per group")
    sim.add_argument("--tau", type=float, default=0.0)
    sim.add_argument("--tau0", type=float, default=0.0)
    sim.add_argument("--tau1", type=float, default=0.0)
    sim.add_argument("--designs", default="all")
    sim.add_argument("--se", default="hc1", choices=["hc1", "classical", "cluster"])
    sim.add_argument("--out", default=None)
    return parser


def _designs(text: str) -> list[Design]:
    if text.strip().lower() == "all":
        return list(ALL_DESIGNS)
    return [Design.parse(d) for d in text.split(",") if d.strip()]


def _spec(args, design, reference=None) -> DesignSpec:
    covs = tuple(c.strip() for c in args.covariates.split(",") if c.strip())
    return DesignSpec(
        design=design,
        t0=args.t0,
        center_time_at_t0=not args.no_center,
        covariate_names=covs,
        se_type=args.se,
        ci_level=args.ci_level,
        ci_dist=args.ci_dist,
        reference_period=reference,
        enforce_paper_minimums=not args.identification_minimums,
        pooled_effect=args.pooled,
    )


def _load(args):
    covs = tuple(c.strip() for c in args.covariates.split(",") if c.strip())
    schema = PanelSchema(
        unit=args.unit,
        group=args.group,
        time=args.time,
        outcome=args.outcome,
        treated_label=args.treated_label,
        weight=args.weight,
        covariates=covs,
    )
    delim = "\t" if args.delimiter in ("tab", "\\t") else args.delimiter
    return read_panel(args.input, schema, delimiter=delim)


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        _atomic_write(out, text)


def _run(args) -> int:
    if args.command == "simulate":
        dgp = DgpSpec(
            kind=args.dgp,
            times=args.grid,
            t0=args.t0,
            units_per_group=args.units,
            noise_sd=args.noise_sd,
            tau=args.tau,
            tau0=args.tau0,
            tau1=args.tau1,
        )
        specs = [DesignSpec(d, t0=args.t0, se_type=args.se) for d in _designs(args.designs)]
        summary = monte_carlo(dgp, specs, args.reps, args.seed)
        doc = {"schema": "didcits.simulation/1", "tool_version": __version__, **summary.to_dict()}
        _emit(dumps(doc), args.out)
        return EXIT_OK

    panel = _load(args)
    if args.command == "fit":
        result = estimate(panel, _spec(args, args.design))
        _emit(write_results(result, args.format), args.out)
    elif args.command == "event-study":
        result = estimate(panel, _spec(args, Design.EVENT_STUDY, args.reference))
        _emit(write_results(result, "json"), args.out)
        if args.plot_data:
            _emit(dumps(emit_plot_data(result)), args.plot_data)
    elif args.command == "compare":
        base = _spec(args, Design.FE_DID)
        table = compare_designs(panel, _designs(args.designs), base=base)
        for key, msg in table.errors.items():
            print(f"didcits: {key} failed: {msg}", file=sys.stderr)
        if not table.results:
            print("didcits: no design could be estimated", file=sys.stderr)
            return EXIT_VALIDATION
        _emit(write_results(table, args.format), args.out)
        if args.plot_data:
            es = None
            try:
                es = estimate(panel, _spec(args, Design.EVENT_STUDY, args.reference))
            except ConfigurationError as exc:
                print(f"didcits: event study skipped: {exc}", file=sys.stderr)
            _emit(dumps(emit_plot_data(table, es)), args.plot_data)
    return EXIT_OK


def cli_main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_VALIDATION
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    with warnings.catch_warnings():
        warnings.simplefilter("default")
        warnings.showwarning = _warn_to_stderr
        try:
            return _run(args)
        except OSError as exc:
            print(f"didcits: I/O error: {exc}", file=sys.stderr)
            return EXIT_IO
        except (ConfigurationError, PanelValidationError, ValueError) as exc:
            print(f"didcits: error: {exc}", file=sys.stderr)
            return EXIT_VALIDATION


def _warn_to_stderr(message, category, filename, lineno, file=None, line=None):
    print(f"didcits: warning: {message}", file=sys.stderr)


def main() -> None:
    sys.exit(cli_main())


if __name__ == "__main__":
    main()
