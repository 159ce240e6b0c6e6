"""Command-line front end: ``snn-energy {estimate,compare,validate,sweep}``."""

from __future__ import annotations

import argparse
import csv
import io
import sys
from dataclasses import replace
from pathlib import Path
from typing import Optional, Sequence

from . import oracle
from .activity import load_trace_file
from .energy import EstimateOptions, Policy, compare, load_profile, network_energy
from .errors import EstimatorError
from .network import Mode, NetworkSpec, load_network
from .report import csv_text, fmt, format_table, sweep_csv_text
from .study import CASES, SWEEP_PARAMETERS, estimate_pair, load_case, snn_activity, sweep, sweep_values

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_USAGE = 2
EXIT_NETWORK = 3
EXIT_TRACE = 4
EXIT_PROFILE = 5
EXIT_MISMATCH = 6
EXIT_OUTPUT = 7

EPILOG = f"""\
exit codes:
  {EXIT_OK}  success
  {EXIT_ERROR}  estimation error (e.g. zero SNN total in compare)
  {EXIT_USAGE}  usage error (bad flags, missing trace/spike rate, empty range, cases < 1)
  {EXIT_NETWORK}  invalid network description
  {EXIT_TRACE}  invalid activity trace or spike rate
  {EXIT_PROFILE}  invalid technology profile
  {EXIT_MISMATCH}  validate found analytical/executor mismatches
  {EXIT_OUTPUT}  cannot write the output file

--arch takes a JSON file or a bundled case: {', '.join(CASES)}.
--tech defaults to $SNN_ENERGY_TECH, then the bundled 45nm profile.
"""


class UsageError(Exception):
    pass


def _load_arch(arch: str) -> NetworkSpec:
    if arch in CASES and not Path(arch).exists():
        return load_case(arch)
    return load_network(arch)


def _profile(args):
    profile = load_profile(args.tech)
    if args.policy is not None:
        profile = replace(profile, policy=Policy(args.policy))
    if args.fifo_depth is not None:
        if args.fifo_depth < 1:
            raise UsageError("--fifo-depth must be >= 1")
        profile = replace(profile, fifo_depth=args.fifo_depth)
    return profile


def _options(args) -> EstimateOptions:
    return EstimateOptions(strict_paper=args.strict_paper, first_layer=args.first_layer)


def _snn_spec(spec: NetworkSpec, args) -> NetworkSpec:
    spec = spec.as_mode(Mode.SNN, args.neuron)
    if args.input_events is not None:
        spec = replace(spec, input_events=args.input_events)
    return spec


def _snn_trace(spec: NetworkSpec, args):
    if args.trace is not None and args.spike_rate is not None:
        raise UsageError("give either --trace or --spike-rate, not both")
    if args.trace is not None:
        return load_trace_file(args.trace, spec)
    if args.spike_rate is None:
        raise UsageError("snn mode needs --trace or --spike-rate")
    return snn_activity(spec, rate=args.spike_rate)


def _write(path: Optional[str], text: str) -> None:
    if path is None:
        return
    try:
        Path(path).write_text(text)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror}") from None


def cmd_estimate(args) -> int:
    spec = _load_arch(args.arch)
    mode = Mode(args.mode) if args.mode else spec.mode
    profile = _profile(args)
    if mode is Mode.FNN:
        report = network_energy(spec.as_mode(Mode.FNN), None, profile, _options(args))
    else:
        spec = _snn_spec(spec, args)
        report = network_energy(spec, _snn_trace(spec, args), profile, _options(args))
    print(format_table([report]))
    _write(args.out, csv_text([report]))
    return EXIT_OK


def cmd_compare(args) -> int:
    spec = _load_arch(args.arch)
    profile = _profile(args)
    snn_spec = _snn_spec(spec, args)
    trace = _snn_trace(snn_spec, args)
    fnn, snn = estimate_pair(snn_spec, profile, trace=trace, options=_options(args))
    ratio = compare(fnn, snn)
    print(format_table([snn, fnn], ratio))
    _write(args.out, csv_text([fnn, snn]))
    return EXIT_OK


def cmd_validate(args) -> int:
    if args.cases < 1:
        raise UsageError("--cases must be >= 1")
    summary = oracle.validate(seed=args.seed, cases=args.cases, strict_paper=args.strict_paper)
    print(f"validated {summary.cases} instances, {summary.checks} counter comparisons, "
          f"{len(summary.mismatches)} mismatches")
    if summary.mismatches:
        print(f"{'case':>5}  {'category':<10} {'analytical':>14} {'measured':>10}  instance")
        for m in summary.mismatches:
            print(f"{m.case:>5}  {m.verdict.category:<10} {m.verdict.analytical:>14g} "
                  f"{m.verdict.measured:>10}  {m.instance.describe()}")
        if args.strict_paper:
            print("note: strict mode charges a dense SNN layer theta * N_in * N_out accumulations and "
                  "no reset; an event-driven layer performs theta * N_out plus one reset per output spike.")
    if args.out:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(("case", "category", "analytical", "measured", "instance"))
        for m in summary.mismatches:
            writer.writerow((m.case, m.verdict.category, fmt(m.verdict.analytical), m.verdict.measured,
                             m.instance.describe()))
        _write(args.out, buf.getvalue())
    return EXIT_OK if summary.ok else EXIT_MISMATCH


def _parse_range(text: str) -> list[float]:
    parts = text.split(":")
    if not 2 <= len(parts) <= 3:
        raise UsageError(f"--range must be START:STOP[:NUM], got {text!r}")
    try:
        start, stop = float(parts[0]), float(parts[1])
        num = int(parts[2]) if len(parts) == 3 else 11
    except ValueError:
        raise UsageError(f"--range must be numeric, got {text!r}") from None
    try:
        return sweep_values(start, stop, num)
    except EstimatorError as exc:
        raise UsageError(str(exc)) from None


def cmd_sweep(args) -> int:
    values = _parse_range(args.range)
    spec = _snn_spec(_load_arch(args.arch), args)
    profile = _profile(args)
    rate = trace = None
    if args.parameter != "spike_rate":
        if args.trace is None and args.spike_rate is None:
            raise UsageError(f"sweeping {args.parameter} needs --trace or --spike-rate")
        if args.trace is not None:
            trace = _snn_trace(spec, args)
        else:
            rate = args.spike_rate
    result = sweep(spec, profile, args.parameter, values, rate=rate, trace=trace, options=_options(args))
    print(f"{args.parameter:>14} {'E_SNN (nJ)':>14} {'E_FNN (nJ)':>14} {'FNN/SNN':>10}")
    for p in result.points:
        print(f"{p.value:>14.6g} {p.e_snn:>14.4E} {p.e_fnn:>14.4E} {p.ratio:>10.3f}")
    if result.crossover is None:
        print("no crossover (E_SNN = E_FNN) in range")
    else:
        print(f"crossover at {args.parameter} = {result.crossover:.6g}")
    _write(args.out, sweep_csv_text(result))
    return EXIT_OK


def _add_model_flags(p: argparse.ArgumentParser, snn: bool = True) -> None:
    p.add_argument("--arch", required=True, help="network JSON file or bundled case name")
    p.add_argument("--tech", help="technology profile JSON")
    p.add_argument("--policy", choices=[x.value for x in Policy], help="SRAM size out-of-range policy")
    p.add_argument("--fifo-depth", type=int, help="SNN I/O FIFO depth in words (profile default 1000)")
    p.add_argument("--out", help="CSV output path")
    if snn:
        p.add_argument("--trace", help="activity trace JSON")
        p.add_argument("--spike-rate", type=float, help="uniform spikes per neuron per inference")
        p.add_argument("--neuron", choices=["if", "lif"], help="override the spiking neuron model")
        p.add_argument("--input-events", type=float, help="measured input events per sample (event encoding)")
        p.add_argument("--strict-paper", action="store_true",
                       help="charge dense SNN layers theta * N_in * N_out ACCs with no reset term")
        p.add_argument("--first-layer", choices=["event", "dense"], default="event",
                       help="cost model of the first SNN layer for frame inputs")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="snn-energy",
        description="Analytical energy estimation for formal and spiking neural networks.",
        epilog=EPILOG,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("estimate", help="estimate one network in one mode", epilog=EPILOG,
                       formatter_class=argparse.RawDescriptionHelpFormatter)
    _add_model_flags(p)
    p.add_argument("--mode", choices=[m.value for m in Mode], help="defaults to the network's mode")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("compare", help="FNN vs SNN breakdown and energy ratio", epilog=EPILOG,
                       formatter_class=argparse.RawDescriptionHelpFormatter)
    _add_model_flags(p)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("validate", help="check closed-form counts against instrumented executors",
                       epilog=EPILOG, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--cases", type=int, default=200)
    p.add_argument("--strict-paper", action="store_true")
    p.add_argument("--out", help="CSV of mismatches")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("sweep", help="sweep one parameter and locate the FNN/SNN crossover", epilog=EPILOG,
                       formatter_class=argparse.RawDescriptionHelpFormatter)
    _add_model_flags(p)
    p.add_argument("--parameter", required=True, choices=SWEEP_PARAMETERS)
    p.add_argument("--range", required=True, help="START:STOP[:NUM] (NUM defaults to 11)")
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"snn-energy: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except EstimatorError as exc:
        print(f"snn-energy: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"snn-energy: output error: {exc}", file=sys.stderr)
        return EXIT_OUTPUT


if __name__ == "__main__":
    sys.exit(main())
