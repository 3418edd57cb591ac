"""Command-line interface.

Exit status: 0 success, 1 usage error, 2 bad input data, 3 numerical failure
(rank-deficient fit).  Results go to stdout, diagnostics to stderr.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from typing import Optional, Sequence

from . import dataio
from .battery_models import peukert_lifetime
from .errors import (
    DataFormatError,
    DomainError,
    InsufficientSamplesError,
    RankDeficientError,
)
from .load_power import OHMS_PER_KOHM, load_sweep, power_curve
from .node_sim import lifetime, simulate
from .polyfit import PRESET_NAMES, evaluate_flagged, fit, preset, time_to_voltage

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NUMERICAL = 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _num(x: float) -> str:
    return format(x, ".10g")


def _grid(text: str) -> list[float]:
    try:
        t0, t1, step = (float(p) for p in text.split(":"))
    except ValueError:
        raise UsageError(f"grid must be T0:T1:STEP, got {text!r}") from None
    if not (step > 0 and t1 >= t0) or not all(map(math.isfinite, (t0, t1, step))):
        raise UsageError(f"grid needs STEP > 0 and T1 >= T0, got {text!r}")
    n = int(math.floor((t1 - t0) / step + 1e-9))
    return [t0 + i * step for i in range(n + 1)]


def _range(text: str) -> tuple[float, float]:
    try:
        lo, hi = (float(p) for p in text.split(":"))
    except ValueError:
        raise UsageError(f"range must be T0:T1, got {text!r}") from None
    if not lo < hi:
        raise UsageError(f"range needs T0 < T1, got {text!r}")
    return lo, hi


def _loads(text: str) -> list[float]:
    if ":" in text:
        return _grid(text)
    try:
        return [float(p) for p in text.split(",") if p.strip()]
    except ValueError:
        raise UsageError(f"loads must be a comma list or R0:R1:STEP, got {text!r}") from None


def _curve(args):
    if args.preset is not None:
        try:
            return preset(args.preset)
        except KeyError as exc:
            raise UsageError(exc.args[0]) from None
    return dataio.load_curve(args.curve)


def _fmt_for(args) -> str:
    if args.format:
        return args.format
    if args.out and str(args.out).endswith(".json"):
        return "json"
    return "csv"


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        with open(out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_fit(args) -> None:
    samples = dataio.parse_discharge_csv(args.input)
    curve = fit(samples, args.degree)
    text = dataio.curve_to_json(curve)
    if args.out:
        _emit(text, args.out)
        print(f"rmse {curve.rmse!r}")
    else:
        sys.stdout.write(text)
        print(f"rmse {curve.rmse!r}", file=sys.stderr)


def cmd_eval(args) -> None:
    curve = _curve(args)
    if args.at is not None:
        v, extrap = evaluate_flagged(curve, args.at)
        if extrap:
            print(f"warning: t={_num(args.at)} h is outside the fit domain "
                  f"[{_num(curve.t_min)}, {_num(curve.t_max)}]", file=sys.stderr)
        print(_num(v))
        return
    ts = _grid(args.grid)
    if any(not curve.in_domain(t) for t in ts):
        print("warning: grid extends outside the fit domain", file=sys.stderr)
    points = [(t, evaluate_flagged(curve, t).volts) for t in ts]
    text = dataio.emit_series(points, _fmt_for(args), header=("t_hours", "v_volts"))
    _emit(text, args.out)


def cmd_threshold(args) -> None:
    curve = _curve(args)
    lo, hi = _range(args.range)
    t = time_to_voltage(curve, args.voltage, (lo, hi))
    if args.json:
        print(json.dumps({"voltage": args.voltage, "range": [lo, hi], "crossing": t}))
    else:
        print("no crossing" if t is None else _num(t))


def cmd_lifetime(args) -> None:
    print(_num(peukert_lifetime(args.capacity, args.current, args.exponent)))


def cmd_power(args) -> None:
    fmt = _fmt_for(args)
    if args.volts is not None:
        if args.loads_kohm is None:
            raise UsageError("--volts needs --loads-kohm")
        rs = [r * OHMS_PER_KOHM for r in _loads(args.loads_kohm)]
        pairs = load_sweep(args.volts, rs)
        _emit(dataio.emit_series(pairs, fmt, header=("r_ohms", "p_mw")), args.out)
        return
    if args.load_kohm is None or args.grid is None:
        raise UsageError("power needs --load-kohm and --grid with a curve, "
                         "or --volts with --loads-kohm")
    curve = _curve(args)
    series = power_curve(curve, args.load_kohm * OHMS_PER_KOHM, _grid(args.grid))
    _emit(dataio.emit_series(series, fmt), args.out)


def cmd_simulate(args) -> None:
    config = dataio.load_config(args.config)
    trace = simulate(config)
    life = lifetime(trace)
    if args.out:
        fmt = _fmt_for(args)
        text = dataio.trace_json(trace) if fmt == "json" else dataio.trace_csv(trace)
        _emit(text, args.out)
    qualifier = " (censored)" if life.censored else ""
    print(f"lifetime {_num(life.hours)} h{qualifier}")
    print(f"termination {trace.termination_reason}")


def _add_curve_source(p: argparse.ArgumentParser, required: bool = True) -> None:
    g = p.add_mutually_exclusive_group(required=required)
    g.add_argument("--curve", help="curve JSON written by 'fit'")
    g.add_argument("--preset", help=f"published curve: {', '.join(PRESET_NAMES)}")


def _add_output(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out", help="output file (default: stdout)")
    p.add_argument("--format", choices=("csv", "json"),
                   help="output format (default: from --out suffix, else csv)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="nodebatt", description="Coin-cell discharge and node lifetime tools")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("fit", help="fit a polynomial discharge curve to CSV samples")
    p.add_argument("--input", required=True)
    p.add_argument("--degree", type=int, default=4)
    p.add_argument("--out")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("eval", help="evaluate a discharge curve")
    _add_curve_source(p)
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--at", type=float, help="time in hours")
    g.add_argument("--grid", help="T0:T1:STEP in hours")
    _add_output(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("threshold", help="earliest time the curve reaches a voltage")
    _add_curve_source(p)
    p.add_argument("--voltage", type=float, required=True)
    p.add_argument("--range", required=True, help="T0:T1 in hours")
    p.add_argument("--json", action="store_true", help="machine-readable output")
    p.set_defaults(func=cmd_threshold)

    p = sub.add_parser("lifetime", help="Peukert lifetime in hours")
    p.add_argument("--capacity", type=float, required=True, help="mAh")
    p.add_argument("--current", type=float, required=True, help="mA")
    p.add_argument("--exponent", type=float, default=1.0)
    p.set_defaults(func=cmd_lifetime)

    p = sub.add_parser("power", help="load power over time, or across loads")
    _add_curve_source(p, required=False)
    p.add_argument("--load-kohm", type=float)
    p.add_argument("--grid", help="T0:T1:STEP in hours")
    p.add_argument("--volts", type=float)
    p.add_argument("--loads-kohm", help="R1,R2,... or R0:R1:STEP in kOhm")
    _add_output(p)
    p.set_defaults(func=cmd_power)

    p = sub.add_parser("simulate", help="run a node discharge simulation")
    p.add_argument("--config", required=True)
    _add_output(p)
    p.set_defaults(func=cmd_simulate)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except UsageError as exc:
        print(f"nodebatt: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except RankDeficientError as exc:
        print(f"nodebatt: numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (DataFormatError, InsufficientSamplesError, DomainError, OSError) as exc:
        print(f"nodebatt: input error: {exc}", file=sys.stderr)
        return EXIT_DATA
    return EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())
