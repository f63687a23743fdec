"""Domain types and emission densities for the sleep/wake HMM.

Hidden state coding: 0 = awake, 1 = asleep. Missing observations are stored
as ``NaN`` in float arrays and contribute a unit emission factor.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln

MINUTES_PER_DAY = 1440

# Above this size the NB pmf is numerically Poisson.
POISSON_LIMIT = 1e7

AWAKE, ASLEEP = 0, 1

# Largest count handled by the running-sum evaluation in EmissionTable.
_TABLE_MAX_COUNT = 100_000


def _as_float_array(values) -> np.ndarray:
    arr = np.array(values, dtype=float, copy=True)
    if arr.ndim != 1:
        raise ValueError(f"expected a 1-D sequence, got shape {arr.shape}")
    return arr


@dataclass(frozen=True, eq=False)
class ObservationSeries:
    """Minute-by-minute activity counts and self-reported sleep flags.

    ``activity`` and ``self_report`` are float arrays; ``NaN`` marks a
    missing entry. ``start_phase`` is the minute-of-day of the first entry.
    """

    activity: np.ndarray
    self_report: np.ndarray
    start_phase: int = 0

    def __post_init__(self):
        activity = _as_float_array(self.activity)
        report = _as_float_array(self.self_report)
        if activity.size < 1:
            raise ValueError("series must contain at least one minute")
        if report.size != activity.size:
            raise ValueError(
                f"activity has {activity.size} entries but self_report has {report.size}"
            )
        present = activity[~np.isnan(activity)]
        if np.any(~np.isfinite(present)) or np.any(present < 0):
            raise ValueError("activity counts must be finite and non-negative")
        if np.any(present != np.floor(present)):
            raise ValueError("activity counts must be integers")
        flags = report[~np.isnan(report)]
        if np.any((flags != 0) & (flags != 1)):
            raise ValueError("self_report entries must be 0, 1 or missing")
        phase = int(self.start_phase)
        if phase != self.start_phase or not 0 <= phase < MINUTES_PER_DAY:
            raise ValueError(f"start_phase must be an integer in [0, 1440), got {self.start_phase!r}")
        activity.flags.writeable = False
        report.flags.writeable = False
        object.__setattr__(self, "activity", activity)
        object.__setattr__(self, "self_report", report)
        object.__setattr__(self, "start_phase", phase)

    @property
    def length(self) -> int:
        return self.activity.size

    def __len__(self) -> int:
        return self.length

    @property
    def clock_minute(self) -> np.ndarray:
        """Minute-of-day (0..1439) of every entry."""
        return (self.start_phase + np.arange(self.length)) % MINUTES_PER_DAY

    @property
    def missing_report_fraction(self) -> float:
        return float(np.mean(np.isnan(self.self_report)))

    def same_data(self, other: "ObservationSeries") -> bool:
        return (
            self.start_phase == other.start_phase
            and np.array_equal(self.activity, other.activity, equal_nan=True)
            and np.array_equal(self.self_report, other.self_report, equal_nan=True)
        )


@dataclass(frozen=True)
class EmissionParams:
    """State-conditional emission laws.

    Activity ~ NB(mean ``mu_i``, size ``s_i``); self-report ~ Bernoulli(``pi_i``).
    ``pi0`` is one minus the specificity, ``pi1`` the sensitivity.
    """

    mu0: float
    mu1: float
    s0: float
    s1: float
    pi0: float
    pi1: float

    def __post_init__(self):
        for name in ("mu0", "mu1", "s0", "s1"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be finite and positive, got {value!r}")
        for name in ("pi0", "pi1"):
            value = getattr(self, name)
            if not 0 < value < 1:
                raise ValueError(f"{name} must lie strictly inside (0, 1), got {value!r}")

    def mu(self, state: int) -> float:
        return (self.mu0, self.mu1)[state]

    def size(self, state: int) -> float:
        return (self.s0, self.s1)[state]

    def pi(self, state: int) -> float:
        return (self.pi0, self.pi1)[state]

    def count_variance(self, state: int) -> float:
        mu = self.mu(state)
        return mu * (1.0 + mu / self.size(state))


@dataclass(frozen=True)
class ModelParams:
    emission: EmissionParams
    alpha0: float
    alpha1: float
    alpha2: float
    beta0: float
    beta1: float
    beta2: float
    delta1: float = 0.5

    def __post_init__(self):
        for name in ("alpha0", "alpha1", "alpha2", "beta0", "beta1", "beta2"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise ValueError(f"{name} must be finite, got {value!r}")
        if not 0 < self.delta1 < 1:
            raise ValueError(f"delta1 must lie strictly inside (0, 1), got {self.delta1!r}")

    @property
    def alpha(self) -> tuple[float, float, float]:
        return (self.alpha0, self.alpha1, self.alpha2)

    @property
    def beta(self) -> tuple[float, float, float]:
        return (self.beta0, self.beta1, self.beta2)

    @property
    def delta0(self) -> float:
        return 1.0 - self.delta1

    @property
    def coeffs(self):
        from .transition import TransitionCoeffs

        return TransitionCoeffs(self.alpha, self.beta)

    def log_initial(self) -> np.ndarray:
        return np.array([math.log1p(-self.delta1), math.log(self.delta1)])


def _check_nb_params(mu, s):
    mu = np.asarray(mu, dtype=float)
    s = np.asarray(s, dtype=float)
    if np.any(~np.isfinite(mu)) or np.any(mu <= 0):
        raise ValueError(f"NB mean must be finite and positive, got {mu}")
    if np.any(~np.isfinite(s)) or np.any(s <= 0):
        raise ValueError(f"NB size must be finite and positive, got {s}")
    return mu, s


def nb_log_pmf(y, mu, s):
    """Log-pmf of the negative binomial with mean ``mu`` and size ``s``.

    Evaluated through log-gamma terms so that very large sizes do not
    overflow; sizes above ``POISSON_LIMIT`` use the Poisson(mu) log-pmf.
    Broadcasts over array arguments.
    """
    mu, s = _check_nb_params(mu, s)
    y = np.asarray(y, dtype=float)
    if np.any(y < 0) or np.any(y != np.floor(y)):
        raise ValueError("counts must be non-negative integers")
    y, mu, s = np.broadcast_arrays(y, mu, s)
    log_fact = gammaln(y + 1.0)
    poisson = s > POISSON_LIMIT
    out = np.empty(y.shape)
    if np.any(poisson):
        yp, mp = y[poisson], mu[poisson]
        out[poisson] = yp * np.log(mp) - mp - log_fact[poisson]
    nb = ~poisson
    if np.any(nb):
        yn, mn, sn = y[nb], mu[nb], s[nb]
        out[nb] = (
            gammaln(yn + sn)
            - gammaln(sn)
            - log_fact[nb]
            - sn * np.log1p(mn / sn)
            + yn * (np.log(mn) - np.log(sn + mn))
        )
    return out[()] if out.ndim == 0 else out


def report_log_pmf(x, pi):
    """Bernoulli log-pmf of a self-report; a missing report (None/NaN) gives 0."""
    if not 0 < pi < 1:
        raise ValueError(f"report probability must lie strictly inside (0, 1), got {pi!r}")
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return 0.0
    if x == 1:
        return math.log(pi)
    if x == 0:
        return math.log1p(-pi)
    raise ValueError(f"self-report must be 0, 1 or missing, got {x!r}")


def joint_emission_log(x, y, state: int, emission: EmissionParams) -> float:
    """Log joint density of (report, count) given the hidden state.

    The two observations are conditionally independent, so the log density
    is the sum of the two marginal terms. A missing count contributes 0.
    """
    if state not in (AWAKE, ASLEEP):
        raise ValueError(f"state must be 0 or 1, got {state!r}")
    if y is None or (isinstance(y, float) and math.isnan(y)):
        count_term = 0.0
    else:
        count_term = float(nb_log_pmf(y, emission.mu(state), emission.size(state)))
    return count_term + report_log_pmf(x, emission.pi(state))


@dataclass
class EmissionTable:
    """Per-series cache for fast evaluation of the (T, 2) emission log-matrix.

    Counts are evaluated once per distinct value and scattered back, which is
    what makes repeated likelihood evaluation during fitting cheap.
    """

    series: ObservationSeries
    _values: np.ndarray = field(init=False, repr=False)
    _index: np.ndarray = field(init=False, repr=False)
    _log_fact: np.ndarray = field(init=False, repr=False)
    _count_present: np.ndarray = field(init=False, repr=False)
    _n_ones: np.ndarray = field(init=False, repr=False)
    _n_zeros: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        act = self.series.activity
        present = ~np.isnan(act)
        self._count_present = present
        values, index = np.unique(np.where(present, act, 0.0), return_inverse=True)
        self._values = values
        self._index = index.ravel()
        self._log_fact = gammaln(values + 1.0)
        rep = self.series.self_report
        self._n_ones = (rep == 1).astype(float)
        self._n_zeros = (rep == 0).astype(float)

    def _count_log_pmf(self, mu: float, size: float) -> np.ndarray:
        values = self._values
        y_max = int(values[-1])
        if size > POISSON_LIMIT or y_max > _TABLE_MAX_COUNT:
            return nb_log_pmf(values, mu, size)
        # log Gamma(y + s) - log Gamma(s) - y log s as a running sum of
        # log1p(k / s); stays accurate when s is huge and the two gammas cancel.
        ratio = np.concatenate(([0.0], np.cumsum(np.log1p(np.arange(y_max) / size))))
        shrink = math.log1p(mu / size)
        return (
            ratio[values.astype(np.int64)]
            + values * (math.log(mu) - shrink)
            - size * shrink
            - self._log_fact
        )

    def log_matrix(self, emission: EmissionParams) -> np.ndarray:
        out = np.empty((self.series.length, 2))
        for state in (AWAKE, ASLEEP):
            per_value = self._count_log_pmf(emission.mu(state), emission.size(state))
            counts = np.where(self._count_present, per_value[self._index], 0.0)
            pi = emission.pi(state)
            out[:, state] = counts + self._n_ones * math.log(pi) + self._n_zeros * math.log1p(-pi)
        return out


def emission_log_matrix(series: ObservationSeries, emission: EmissionParams) -> np.ndarray:
    """(T, 2) array of joint emission log-densities, column = hidden state."""
    return EmissionTable(series).log_matrix(emission)
