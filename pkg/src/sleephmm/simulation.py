"""Fixed sleep/wake scenarios, synthetic observations and replicate studies."""

from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np

from .estimation import FitConfig, FitError, fit
from .inference import local_decode, posterior_sleep
from .model import MINUTES_PER_DAY, EmissionParams, ModelParams, ObservationSeries
from .transition import transition_array

logger = logging.getLogger(__name__)

DAYS = 7
WEEK_MINUTES = DAYS * MINUTES_PER_DAY

# Point estimates reported for the first (complete self-report) subject.
REFERENCE_SUBJECT_1 = ModelParams(
    EmissionParams(mu0=5.19, mu1=1.31, s0=799.0, s1=0.18, pi0=0.099, pi1=0.99),
    alpha0=8.54, alpha1=-6.21, alpha2=-5.49,
    beta0=7.31, beta1=3.36, beta2=1.06,
    delta1=0.9,
)

# Count laws of the reference subject with 0.95 sensitivity and specificity.
SIMULATION_EMISSION = replace(REFERENCE_SUBJECT_1.emission, pi0=0.05, pi1=0.95)
SIMULATION_PARAMS = replace(REFERENCE_SUBJECT_1, emission=SIMULATION_EMISSION)

NIGHT_END_LONG = 8 * 60   # scenario 1 wakes at 8am
NIGHT_END_SHORT = 6 * 60  # scenarios 2-5 wake at 6am
NAP_START = 16 * 60
NAP_END = {2: 18 * 60, 3: 17 * 60, 4: 16 * 60 + 30, 5: 18 * 60}
SCENARIO5_NAP_DAYS = (1, 5)  # 0-based: second and sixth day

_DESCRIPTIONS = {
    1: "sleep 12:00am-8:00am every day",
    2: "sleep 12:00am-6:00am, nap 4:00pm-6:00pm every day",
    3: "sleep 12:00am-6:00am, nap 4:00pm-5:00pm every day",
    4: "sleep 12:00am-6:00am, nap 4:00pm-4:30pm every day",
    5: "sleep 12:00am-6:00am every day, nap 4:00pm-6:00pm on days 2 and 6",
}


@dataclass(frozen=True)
class ScenarioSpec:
    id: int
    pattern: np.ndarray
    description: str


@dataclass(frozen=True)
class MissingSpec:
    """Self-report missingness: ``none`` or the last ``k`` days unreported."""

    mode: str = "none"
    k: int = 0

    def __post_init__(self):
        if self.mode not in ("none", "last_k_days"):
            raise ValueError(f"unknown missingness mode {self.mode!r}")
        if not 0 <= self.k <= DAYS:
            raise ValueError(f"k must be in [0, {DAYS}], got {self.k}")

    @classmethod
    def last_days(cls, k: int) -> "MissingSpec":
        return cls("last_k_days", k) if k > 0 else cls()

    def mask(self, length: int) -> np.ndarray:
        """Boolean array, True where the self-report is withheld."""
        out = np.zeros(length, dtype=bool)
        if self.mode == "last_k_days" and self.k > 0:
            out[max(length - self.k * MINUTES_PER_DAY, 0):] = True
        return out


def make_scenario(scenario_id: int) -> ScenarioSpec:
    """One of the five fixed week-long truth patterns (1 = asleep).

    All intervals are half-open in clock minutes, e.g. sleep on [00:00, 08:00).
    """
    if scenario_id not in _DESCRIPTIONS:
        raise ValueError(f"scenario id must be one of 1..5, got {scenario_id!r}")
    day = np.zeros(MINUTES_PER_DAY, dtype=np.int8)
    if scenario_id == 1:
        day[:NIGHT_END_LONG] = 1
        pattern = np.tile(day, DAYS)
    else:
        day[:NIGHT_END_SHORT] = 1
        nap_day = day.copy()
        nap_day[NAP_START:NAP_END[scenario_id]] = 1
        nap_days = SCENARIO5_NAP_DAYS if scenario_id == 5 else range(DAYS)
        pattern = np.concatenate([nap_day if d in nap_days else day for d in range(DAYS)])
    pattern.flags.writeable = False
    return ScenarioSpec(scenario_id, pattern, _DESCRIPTIONS[scenario_id])


def simulate_observations(
    pattern: Sequence[int],
    emission: EmissionParams = SIMULATION_EMISSION,
    missing: MissingSpec = MissingSpec(),
    seed=0,
) -> ObservationSeries:
    """Draw activity counts and self-reports given a fixed state pattern.

    Counts use the gamma-Poisson mixture representation of the negative
    binomial. ``seed`` is anything accepted by ``numpy.random.default_rng``.
    """
    states = np.asarray(pattern)
    if states.ndim != 1 or not np.all((states == 0) | (states == 1)):
        raise ValueError("pattern must be a 1-D sequence of 0/1 states")
    rng = np.random.default_rng(seed)
    mu = np.where(states == 1, emission.mu1, emission.mu0)
    size = np.where(states == 1, emission.s1, emission.s0)
    rate = rng.gamma(shape=size, scale=mu / size)
    counts = rng.poisson(rate).astype(float)
    pi = np.where(states == 1, emission.pi1, emission.pi0)
    reports = (rng.random(states.size) < pi).astype(float)
    reports[missing.mask(states.size)] = np.nan
    return ObservationSeries(counts, reports)


def sample_hidden_path(params: ModelParams, length: int = WEEK_MINUTES, seed=0, start_phase: int = 0) -> np.ndarray:
    """Draw a state path from the circadian Markov chain itself.

    Used for parameter-recovery checks; the fixed scenarios above are what
    the precision studies use.
    """
    if length < 1:
        raise ValueError("length must be >= 1")
    rng = np.random.default_rng(seed)
    trans = transition_array(length, params.coeffs, start_phase)
    u = rng.random(length)
    path = np.empty(length, dtype=np.int8)
    path[0] = int(u[0] < params.delta1)
    for k in range(1, length):
        path[k] = int(u[k] < trans[k - 1, path[k - 1], 1])
    return path


# ---------------------------------------------------------------------------
# reconstruction accuracy


def _runs(states: np.ndarray) -> list[tuple[int, int]]:
    """Half-open [start, end) index ranges of consecutive 1s."""
    padded = np.concatenate([[0], states.astype(np.int8), [0]])
    edges = np.flatnonzero(np.diff(padded))
    return list(zip(edges[0::2].tolist(), edges[1::2].tolist()))


@dataclass(frozen=True)
class Episode:
    """A true sleep episode and the signed timing errors of its decoded match.

    Errors are decoded minus true, in minutes; ``None`` when no decoded sleep
    overlaps the episode.
    """

    start: int
    end: int
    onset_error: Optional[int]
    offset_error: Optional[int]

    @property
    def clock_start(self) -> int:
        return self.start % MINUTES_PER_DAY

    def recovered(self, tolerance: int) -> bool:
        return (
            self.onset_error is not None
            and abs(self.onset_error) <= tolerance
            and abs(self.offset_error) <= tolerance
        )


@dataclass(frozen=True)
class ReconstructionError:
    mismatch: np.ndarray
    error_rate: float
    onset_errors: np.ndarray  # per day, NaN where undefined
    episodes: tuple[Episode, ...]

    def nap_episodes(self, nap_start: int = NAP_START) -> tuple[Episode, ...]:
        return tuple(e for e in self.episodes if e.clock_start == nap_start)


def reconstruction_error(estimate, truth, threshold: float = 0.5) -> ReconstructionError:
    """Compare a posterior trace (or a 0/1 path) with the true pattern.

    The estimate is binarised with :func:`local_decode`. ``onset_errors`` holds
    the signed difference between decoded and true first sleep minute of each
    calendar day.
    """
    estimate = np.asarray(estimate, dtype=float)
    truth = np.asarray(truth)
    if estimate.shape != truth.shape:
        raise ValueError(f"length mismatch: estimate {estimate.shape} vs truth {truth.shape}")
    decoded = local_decode(estimate, threshold)
    mismatch = decoded != truth
    n_days = -(-truth.size // MINUTES_PER_DAY)
    onset = np.full(n_days, np.nan)
    for d in range(n_days):
        window = slice(d * MINUTES_PER_DAY, (d + 1) * MINUTES_PER_DAY)
        t_idx = np.flatnonzero(truth[window])
        e_idx = np.flatnonzero(decoded[window])
        if t_idx.size and e_idx.size:
            onset[d] = e_idx[0] - t_idx[0]

    decoded_runs = _runs(decoded)
    episodes = []
    for start, end in _runs(truth):
        best, best_overlap = None, 0
        for ds, de in decoded_runs:
            overlap = min(end, de) - max(start, ds)
            if overlap > best_overlap:
                best, best_overlap = (ds, de), overlap
        if best is None:
            episodes.append(Episode(start, end, None, None))
        else:
            episodes.append(Episode(start, end, best[0] - start, best[1] - end))
    return ReconstructionError(mismatch, float(mismatch.mean()), onset, tuple(episodes))


# ---------------------------------------------------------------------------
# replicate studies


@dataclass(frozen=True)
class StudySummary:
    mean_posterior: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    band_width: np.ndarray
    max_band_width: float
    replicates: int
    failed: int
    seed: int
    posteriors: np.ndarray  # (replicates, T), successful replicates in index order
    truth: np.ndarray

    def reconstruction(self, threshold: float = 0.5) -> list[ReconstructionError]:
        return [reconstruction_error(p, self.truth, threshold) for p in self.posteriors]


def replicate_seed(seed: int, index: int) -> list[int]:
    """Independent RNG stream for one replicate of a study."""
    return [int(seed), int(index)]


def _run_replicate(args):
    index, pattern, emission, missing, seed, fit_config, fixed_params = args
    series = simulate_observations(pattern, emission, missing, replicate_seed(seed, index))
    if fixed_params is not None:
        return index, posterior_sleep(series, fixed_params), True
    try:
        result = fit(series, fit_config)
    except FitError as exc:
        logger.warning("replicate %d: %s", index, exc)
        return index, None, False
    if not result.converged:
        return index, None, False
    return index, posterior_sleep(series, result.params_hat), True


def percentile_band(posteriors: np.ndarray, lower: float = 2.5, upper: float = 97.5):
    """Per-minute percentiles across replicates (linear interpolation)."""
    lo = np.percentile(posteriors, lower, axis=0)
    hi = np.percentile(posteriors, upper, axis=0)
    return lo, hi


def run_study(
    scenario: ScenarioSpec,
    emission: EmissionParams = SIMULATION_EMISSION,
    missing: MissingSpec = MissingSpec(),
    replicates: int = 500,
    seed: int = 0,
    fit_config: Optional[FitConfig] = None,
    refit: bool = True,
    jobs: int = 1,
    max_failure_fraction: float = 0.10,
) -> StudySummary:
    """Simulate, fit and decode ``replicates`` realisations of one scenario.

    With ``refit=False`` posteriors are computed at the generating emission
    parameters (transition coefficients of the reference subject) instead of
    re-estimated ones. Results do not depend on ``jobs``.
    """
    if replicates < 1:
        raise ValueError("replicates must be >= 1")
    if fit_config is None:
        fit_config = FitConfig(compute_se=False)
    fixed = None if refit else replace(SIMULATION_PARAMS, emission=emission)
    tasks = [
        (i, scenario.pattern, emission, missing, seed, fit_config, fixed)
        for i in range(replicates)
    ]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(_run_replicate, tasks, chunksize=1))
    else:
        outcomes = [_run_replicate(t) for t in tasks]
    outcomes.sort(key=lambda o: o[0])
    kept = [post for _, post, ok in outcomes if ok]
    failed = replicates - len(kept)
    if failed:
        logger.warning("%d of %d replicate fits did not converge and were excluded", failed, replicates)
    if not kept or failed > max_failure_fraction * replicates:
        raise FitError(f"{failed} of {replicates} replicate fits failed")
    posteriors = np.vstack(kept)
    lo, hi = percentile_band(posteriors)
    band = hi - lo
    return StudySummary(
        mean_posterior=posteriors.mean(axis=0),
        lower=lo,
        upper=hi,
        band_width=band,
        max_band_width=float(band.max()),
        replicates=len(kept),
        failed=failed,
        seed=seed,
        posteriors=posteriors,
        truth=np.asarray(scenario.pattern),
    )
