"""CSV ingestion/export and the ``key = value`` fit configuration format."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, fields, replace
from pathlib import Path
from typing import Optional

import numpy as np

from .estimation import NATURAL_NAMES, FitConfig, FitResult, natural_vector, params_from_natural
from .model import ModelParams, ObservationSeries

SUBJECT_HEADER = ["minute", "activity", "self_report"]
PARAMS_HEADER = ["parameter", "estimate", "se"]
POSTERIOR_HEADER = ["minute", "posterior", "viterbi"]
STUDY_HEADER = ["minute", "truth", "mean_posterior", "band_width"]

_MISSING = {"", "NA", "na", "NaN", "nan"}


class InputError(ValueError):
    """Malformed or unreadable input file."""


@dataclass(frozen=True)
class SubjectRecord:
    subject_id: str
    series: ObservationSeries
    source_path: str

    def __post_init__(self):
        if not self.subject_id:
            raise ValueError("subject_id must be non-empty")


def _data_rows(path: Path):
    """Yield (line number, fields) for non-comment lines, header included."""
    try:
        handle = open(path, newline="")
    except FileNotFoundError:
        raise InputError(f"{path}: file not found") from None
    except OSError as exc:
        raise InputError(f"{path}: cannot read ({exc.strerror})") from None
    with handle:
        for lineno, line in enumerate(handle, start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            yield lineno, next(csv.reader([stripped]))


def _expect_header(path: Path, rows, header: list[str]):
    try:
        lineno, first = next(rows)
    except StopIteration:
        raise InputError(f"{path}: empty file, expected header {','.join(header)}") from None
    if [c.strip() for c in first] != header:
        raise InputError(
            f"{path}: line {lineno}: malformed header {','.join(first)!r}, expected {','.join(header)!r}"
        )


def read_subject_csv(path, subject_id: Optional[str] = None, start_phase: int = 0) -> SubjectRecord:
    """Read a ``minute,activity,self_report`` file.

    Minutes must run 0, 1, 2, ... without gaps. ``NA`` or an empty field marks
    a missing value.
    """
    path = Path(path)
    rows = _data_rows(path)
    _expect_header(path, rows, SUBJECT_HEADER)
    activity, reports = [], []
    for lineno, row in rows:
        if len(row) != 3:
            raise InputError(f"{path}: line {lineno}: expected 3 fields, got {len(row)}")
        minute, act, rep = (c.strip() for c in row)
        try:
            m = int(minute)
        except ValueError:
            raise InputError(f"{path}: line {lineno}: minute {minute!r} is not an integer") from None
        if m != len(activity):
            raise InputError(
                f"{path}: line {lineno}: minutes are not contiguous (expected {len(activity)}, got {m})"
            )
        if act in _MISSING:
            activity.append(math.nan)
        else:
            try:
                a = int(act)
            except ValueError:
                raise InputError(f"{path}: line {lineno}: activity {act!r} is not an integer") from None
            if a < 0:
                raise InputError(f"{path}: line {lineno}: negative activity count {a}")
            activity.append(float(a))
        if rep in _MISSING:
            reports.append(math.nan)
        elif rep in ("0", "1"):
            reports.append(float(rep))
        else:
            raise InputError(f"{path}: line {lineno}: self_report {rep!r} must be 0, 1 or NA")
    if not activity:
        raise InputError(f"{path}: no data rows")
    series = ObservationSeries(np.array(activity), np.array(reports), start_phase=start_phase)
    return SubjectRecord(subject_id or path.stem, series, str(path))


def _fmt_optional_int(value: float) -> str:
    return "NA" if math.isnan(value) else str(int(value))


def write_subject_csv(series: ObservationSeries, path) -> None:
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(SUBJECT_HEADER)
        for minute, (act, rep) in enumerate(zip(series.activity, series.self_report)):
            writer.writerow([minute, _fmt_optional_int(act), _fmt_optional_int(rep)])


def write_fit_csv(result: FitResult, path) -> None:
    """Parameter table: natural-scale estimate and SE (``NA`` if unavailable)."""
    estimates = natural_vector(result.params_hat)
    se = result.se.as_dict() if result.se is not None else {}
    with open(path, "w", newline="") as handle:
        handle.write(f"# log_likelihood={result.log_likelihood!r}\n")
        handle.write(f"# converged={str(result.converged).lower()} iterations={result.iterations}"
                     f" gradient_norm={result.gradient_norm:.3e}\n")
        for note in result.notes:
            handle.write(f"# note: {note}\n")
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(PARAMS_HEADER)
        for name, value in zip(NATURAL_NAMES, estimates):
            s = se.get(name, math.nan)
            writer.writerow([name, repr(float(value)), "NA" if math.isnan(s) else repr(float(s))])


def read_params_csv(path) -> ModelParams:
    """Read a parameter table written by :func:`write_fit_csv`."""
    path = Path(path)
    rows = _data_rows(path)
    _expect_header(path, rows, PARAMS_HEADER)
    values: dict[str, float] = {}
    for lineno, row in rows:
        if len(row) != 3:
            raise InputError(f"{path}: line {lineno}: expected 3 fields, got {len(row)}")
        name = row[0].strip()
        if name not in NATURAL_NAMES:
            raise InputError(f"{path}: line {lineno}: unknown parameter {name!r}")
        try:
            values[name] = float(row[1])
        except ValueError:
            raise InputError(f"{path}: line {lineno}: estimate {row[1]!r} is not a number") from None
    missing = [n for n in NATURAL_NAMES if n not in values]
    if missing:
        raise InputError(f"{path}: missing parameters {missing}")
    try:
        return params_from_natural([values[n] for n in NATURAL_NAMES])
    except ValueError as exc:
        raise InputError(f"{path}: {exc}") from None


def write_posterior_csv(posterior, viterbi, path) -> None:
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(POSTERIOR_HEADER)
        for minute, (p, v) in enumerate(zip(posterior, viterbi)):
            writer.writerow([minute, repr(float(p)), int(v)])


def read_posterior_csv(path) -> tuple[np.ndarray, np.ndarray]:
    path = Path(path)
    rows = _data_rows(path)
    _expect_header(path, rows, POSTERIOR_HEADER)
    post, path_states = [], []
    for lineno, row in rows:
        try:
            post.append(float(row[1]))
            path_states.append(int(row[2]))
        except (ValueError, IndexError):
            raise InputError(f"{path}: line {lineno}: malformed row {row!r}") from None
    return np.array(post), np.array(path_states)


def write_study_csv(summary, path) -> None:
    with open(path, "w", newline="") as handle:
        handle.write(f"# replicates={summary.replicates} failed={summary.failed} seed={summary.seed}"
                     f" max_band_width={summary.max_band_width!r}\n")
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(STUDY_HEADER)
        for minute, (t, m, b) in enumerate(zip(summary.truth, summary.mean_posterior, summary.band_width)):
            writer.writerow([minute, int(t), repr(float(m)), repr(float(b))])


def read_study_csv(path) -> dict[str, np.ndarray]:
    path = Path(path)
    rows = _data_rows(path)
    _expect_header(path, rows, STUDY_HEADER)
    cols: list[list[float]] = [[], [], []]
    for lineno, row in rows:
        try:
            for c, v in zip(cols, row[1:4]):
                c.append(float(v))
        except ValueError:
            raise InputError(f"{path}: line {lineno}: malformed row {row!r}") from None
    truth, mean, band = (np.array(c) for c in cols)
    return {"truth": truth.astype(int), "mean_posterior": mean, "band_width": band}


# ---------------------------------------------------------------------------
# configuration

_CONFIG_FIELDS = {
    "max_iterations": int,
    "gradient_tolerance": float,
    "step_tolerance": float,
    "fd_relative_step": float,
    "fix_delta1": float,
    "multistart": int,
    "seed": int,
}


@dataclass(frozen=True)
class RunConfig:
    fit: FitConfig
    start_overrides: dict
    start_phase: int = 0

    def start_for(self, base: ModelParams) -> ModelParams:
        """Apply ``start.<name>`` overrides to heuristic starting values."""
        if not self.start_overrides:
            return base
        values = dict(zip(NATURAL_NAMES, natural_vector(base)))
        values.update(self.start_overrides)
        return params_from_natural([values[n] for n in NATURAL_NAMES])


def parse_config(text: str, source: str = "<config>") -> RunConfig:
    """Parse line-oriented ``key = value`` settings; unknown keys are errors.

    Recognised keys are the :class:`FitConfig` tolerances, ``fix_delta1``,
    ``multistart``, ``seed``, ``start_phase`` and ``start.<parameter>``
    overrides of the starting values.
    """
    settings: dict = {}
    overrides: dict = {}
    start_phase = 0
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InputError(f"{source}: line {lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        try:
            if key in _CONFIG_FIELDS:
                settings[key] = _CONFIG_FIELDS[key](value)
            elif key == "start_phase":
                start_phase = int(value)
            elif key.startswith("start.") and key[6:] in NATURAL_NAMES:
                overrides[key[6:]] = float(value)
            else:
                raise InputError(f"{source}: line {lineno}: unknown key {key!r}")
        except ValueError as exc:
            if isinstance(exc, InputError):
                raise
            raise InputError(f"{source}: line {lineno}: bad value {value!r} for {key}") from None
    try:
        fit_config = FitConfig(**settings)
    except ValueError as exc:
        raise InputError(f"{source}: {exc}") from None
    if not 0 <= start_phase < 1440:
        raise InputError(f"{source}: start_phase must be in [0, 1440), got {start_phase}")
    return RunConfig(fit_config, overrides, start_phase)


def read_config(path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except FileNotFoundError:
        raise InputError(f"{path}: file not found") from None
    return parse_config(text, str(path))


def config_keys() -> list[str]:
    return [f.name for f in fields(FitConfig) if f.name in _CONFIG_FIELDS]
