"""``sleephmm`` command-line entry point: fit, decode and simulate."""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path
from typing import Optional, Sequence

from . import io
from .estimation import fit, starting_values
from .inference import decode
from .simulation import MissingSpec, make_scenario, run_study
from .svg import study_figure, subject_figure

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_NOT_CONVERGED = 2

logger = logging.getLogger("sleephmm")


def _out_dir(path: str) -> Path:
    out = Path(path)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise io.InputError(f"{out}: cannot create output directory ({exc.strerror})") from None
    return out


def _load_subject(path: str, run: io.RunConfig) -> io.SubjectRecord:
    record = io.read_subject_csv(path, start_phase=run.start_phase)
    series = record.series
    print(f"{record.subject_id}: {series.length} minutes, "
          f"self-report missing fraction {series.missing_report_fraction:.3f}")
    return record


def _write_decoding(record: io.SubjectRecord, params, out: Path, banner: Optional[str]) -> None:
    trace = decode(record.series, params)
    io.write_posterior_csv(trace.posterior_sleep, trace.viterbi_path, out / "posterior.csv")
    svg = subject_figure(record.series.activity, record.series.self_report, trace.posterior_sleep,
                         title=f"subject {record.subject_id}", banner=banner)
    (out / "fit.svg").write_text(svg)


def cmd_fit(args) -> int:
    run = io.read_config(args.config) if args.config else io.parse_config("")
    record = _load_subject(args.input, run)
    out = _out_dir(args.out)
    config = replace(run.fit, start=run.start_for(starting_values(record.series)))
    result = fit(record.series, config)
    io.write_fit_csv(result, out / "fit.csv")
    banner = None if result.converged else "WARNING: fit did not converge"
    _write_decoding(record, result.params_hat, out, banner)
    print(f"log-likelihood {result.log_likelihood:.4f}, iterations {result.iterations}, "
          f"converged {result.converged}")
    for note in result.notes:
        print(f"note: {note}")
    return EXIT_OK if result.converged else EXIT_NOT_CONVERGED


def cmd_decode(args) -> int:
    run = io.read_config(args.config) if args.config else io.parse_config("")
    record = _load_subject(args.input, run)
    params = io.read_params_csv(args.params)
    out = _out_dir(args.out)
    _write_decoding(record, params, out, None)
    return EXIT_OK


def cmd_simulate(args) -> int:
    scenario = make_scenario(args.scenario)
    missing = MissingSpec.last_days(args.missing_days)
    out = _out_dir(args.out)
    summary = run_study(scenario, missing=missing, replicates=args.reps, seed=args.seed,
                        refit=not args.no_refit, jobs=args.jobs)
    io.write_study_csv(summary, out / "study.csv")
    title = f"scenario {scenario.id}: {scenario.description}"
    if args.missing_days:
        title += f", self-reports missing on the last {args.missing_days} days"
    (out / "study.svg").write_text(
        study_figure(summary.truth, summary.mean_posterior, summary.band_width, title)
    )
    print(f"replicates {summary.replicates} (failed {summary.failed}), "
          f"max band width {summary.max_band_width:.4f}")
    return EXIT_OK


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sleephmm", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fit", help="fit the HMM to one subject and decode it")
    p.add_argument("--input", required=True, help="minute,activity,self_report CSV")
    p.add_argument("--config", help="key = value fit settings")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(handler=cmd_fit)

    p = sub.add_parser("decode", help="decode one subject with given parameters")
    p.add_argument("--input", required=True)
    p.add_argument("--params", required=True, help="parameter table as written by 'fit'")
    p.add_argument("--config", help="only start_phase is used")
    p.add_argument("--out", required=True)
    p.set_defaults(handler=cmd_decode)

    p = sub.add_parser("simulate", help="replicate study for one fixed scenario")
    p.add_argument("--scenario", type=int, required=True, choices=range(1, 6))
    p.add_argument("--reps", type=_positive_int, default=500)
    p.add_argument("--missing-days", type=int, default=0, choices=range(0, 8))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--jobs", type=_positive_int, default=1)
    p.add_argument("--no-refit", action="store_true",
                   help="decode at the generating parameters instead of refitting")
    p.add_argument("--out", required=True)
    p.set_defaults(handler=cmd_simulate)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.handler(args)
    except ValueError as exc:
        # InputError and FitError (a fit that cannot start) are both ValueErrors
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
