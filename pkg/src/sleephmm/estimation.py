"""Direct numerical maximisation of the HMM likelihood.

Parameters are optimised on an unconstrained scale::

    [log mu0, log mu1, log s0, log s1, logit pi0, logit pi1, logit delta1,
     alpha0, alpha1, alpha2, beta0, beta1, beta2]

Gradients come from central finite differences of the log-likelihood and
standard errors from a finite-difference observed information matrix.
"""

from __future__ import annotations

import logging
import math
from collections import OrderedDict
from dataclasses import dataclass, replace
from typing import Callable, Optional

import numpy as np
from scipy.optimize import minimize

from .inference import forward_loglik_circadian
from .model import (
    MINUTES_PER_DAY,
    EmissionParams,
    EmissionTable,
    ModelParams,
    ObservationSeries,
)
from .transition import step_harmonics

logger = logging.getLogger(__name__)

NATURAL_NAMES = (
    "mu0", "mu1", "s0", "s1", "pi0", "pi1", "delta1",
    "alpha0", "alpha1", "alpha2", "beta0", "beta1", "beta2",
)
TRANSFORMED_NAMES = (
    "log_mu0", "log_mu1", "log_s0", "log_s1", "logit_pi0", "logit_pi1", "logit_delta1",
    "alpha0", "alpha1", "alpha2", "beta0", "beta1", "beta2",
)
DELTA_INDEX = 6
_EMISSION = slice(0, 6)
_TRANSITION = slice(7, 13)

SIZE_CAP = 1e7
LOG_SIZE_CAP = math.log(SIZE_CAP)

# Optimiser box on the transformed scale. Wide enough to be inactive for any
# sensible subject, narrow enough to keep every natural value representable.
_LOGIT_BOUND = 30.0
# A fixed (non-Markov) truth pattern lets the likelihood keep growing as the
# transition logits run off to infinity; |coef| <= 50 already means switching
# probabilities below 1e-21 per minute.
TRANSITION_COEF_BOUND = 50.0
_BOUNDS = (
    [(-20.0, 20.0)] * 2
    + [(-20.0, LOG_SIZE_CAP)] * 2
    + [(-_LOGIT_BOUND, _LOGIT_BOUND)] * 3
    + [(-TRANSITION_COEF_BOUND, TRANSITION_COEF_BOUND)] * 6
)

# Initial-value column used for the first subject in the original analysis.
DEFAULT_ALPHA = (8.0, -5.0, -3.0)
DEFAULT_BETA = (7.5, 4.0, 2.0)

_MAX_RESTARTS = 4
# relative objective reduction at which L-BFGS-B gives up; progress along the
# flat ridges of a degenerate fit is slower than the default stops for
_FTOL = 1e-14
# coordinates this close (relative) to a bound may be snapped onto it
_SNAP_RTOL = 1e-4
_NEWTON_STEPS = 3

NIGHT_WINDOW = (60, 360)       # 1:00am - 5:59am
AFTERNOON_WINDOW = (780, 1080)  # 1:00pm - 5:59pm


class FitError(ValueError):
    """Raised when a fit cannot start or a study has too many failed fits."""


def _logit(p: float) -> float:
    return math.log(p) - math.log1p(-p)


def _expit(z: float) -> float:
    if z >= 0:
        return 1.0 / (1.0 + math.exp(-z))
    e = math.exp(z)
    return e / (1.0 + e)


def transform(params: ModelParams) -> np.ndarray:
    """Map natural parameters to the unconstrained 13-vector."""
    e = params.emission
    for name in ("pi0", "pi1"):
        p = getattr(e, name)
        if not 0 < p < 1:
            raise ValueError(f"{name}={p} is on the boundary; logit undefined")
    return np.array([
        math.log(e.mu0), math.log(e.mu1), math.log(e.s0), math.log(e.s1),
        _logit(e.pi0), _logit(e.pi1), _logit(params.delta1),
        *params.alpha, *params.beta,
    ])


def inverse_transform(theta) -> ModelParams:
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (13,):
        raise ValueError(f"expected 13 transformed parameters, got shape {theta.shape}")
    if not np.all(np.isfinite(theta)):
        bad = [TRANSFORMED_NAMES[i] for i in np.flatnonzero(~np.isfinite(theta))]
        raise ValueError(f"non-finite transformed parameters: {bad}")
    t = [float(v) for v in theta]
    emission = EmissionParams(
        mu0=math.exp(t[0]), mu1=math.exp(t[1]), s0=math.exp(t[2]), s1=math.exp(t[3]),
        pi0=_expit(t[4]), pi1=_expit(t[5]),
    )
    return ModelParams(emission, *t[7:10], *t[10:13], delta1=_expit(t[6]))


def link_derivatives(theta) -> np.ndarray:
    """d(natural)/d(transformed) for each coordinate of the 13-vector."""
    theta = np.asarray(theta, dtype=float)
    d = np.ones(13)
    d[0:4] = np.exp(theta[0:4])
    p = 1.0 / (1.0 + np.exp(-theta[4:7]))
    d[4:7] = p * (1.0 - p)
    return d


def natural_vector(params: ModelParams) -> np.ndarray:
    e = params.emission
    return np.array([
        e.mu0, e.mu1, e.s0, e.s1, e.pi0, e.pi1, params.delta1, *params.alpha, *params.beta,
    ])


def params_from_natural(values) -> ModelParams:
    v = [float(x) for x in values]
    if len(v) != 13:
        raise ValueError(f"expected 13 natural parameters, got {len(v)}")
    return ModelParams(EmissionParams(*v[0:6]), *v[7:13], delta1=v[6])


# ---------------------------------------------------------------------------
# starting values


def _window_mask(series: ObservationSeries, window: tuple[int, int]) -> np.ndarray:
    clock = series.clock_minute
    return (clock >= window[0]) & (clock < window[1])


def _moment_estimates(counts: np.ndarray, label: str) -> tuple[float, float]:
    counts = counts[~np.isnan(counts)]
    if counts.size == 0:
        raise FitError(f"no activity observations in the {label} window; cannot form starting values")
    mean = float(np.mean(counts))
    var = float(np.var(counts, ddof=1)) if counts.size > 1 else mean
    # a zero mean is off the parameter space; nudge it inside
    mean = max(mean, 1e-3)
    size = mean * mean / (var - mean) if var > mean else SIZE_CAP
    return mean, min(size, SIZE_CAP)


def _report_rate(reports: np.ndarray, default: float) -> float:
    reports = reports[~np.isnan(reports)]
    if reports.size == 0:
        return default
    return float(np.clip(np.mean(reports), 0.01, 0.99))


def starting_values(series: ObservationSeries) -> ModelParams:
    """Heuristic start from night (sleep) and afternoon (wake) windows.

    Emission moments come from every 1:00-5:59am minute (asleep) and every
    1:00-5:59pm minute (awake). Transition coefficients start from fixed
    defaults. Windows with no self-reports fall back to 0.1 / 0.9.
    """
    if series.length < MINUTES_PER_DAY:
        raise FitError(f"starting values need at least one full day, got {series.length} minutes")
    night = _window_mask(series, NIGHT_WINDOW)
    afternoon = _window_mask(series, AFTERNOON_WINDOW)
    mu1, s1 = _moment_estimates(series.activity[night], "night (1:00-5:59am)")
    mu0, s0 = _moment_estimates(series.activity[afternoon], "afternoon (1:00-5:59pm)")
    pi1 = _report_rate(series.self_report[night], 0.9)
    pi0 = _report_rate(series.self_report[afternoon], 0.1)
    delta1 = 0.9 if series.start_phase == 0 else 0.5
    emission = EmissionParams(mu0=mu0, mu1=mu1, s0=s0, s1=s1, pi0=pi0, pi1=pi1)
    return ModelParams(emission, *DEFAULT_ALPHA, *DEFAULT_BETA, delta1=delta1)


# ---------------------------------------------------------------------------
# objective


class LogLikelihood:
    """Log-likelihood of one series as a function of the transformed vector.

    The emission log-matrix is cached on its parameter block, so probes along
    the transition or initial-state coordinates skip rebuilding it.
    """

    def __init__(self, series: ObservationSeries, fix_delta1: Optional[float] = None):
        self.series = series
        self.fix_delta1 = fix_delta1
        self._table = EmissionTable(series)
        self._emit_cache: OrderedDict = OrderedDict()
        self._cos, self._sin = step_harmonics(series.length, series.start_phase)
        self.n_evaluations = 0

    @property
    def free_index(self) -> np.ndarray:
        idx = np.arange(13)
        return idx if self.fix_delta1 is None else np.delete(idx, DELTA_INDEX)

    def full_vector(self, free) -> np.ndarray:
        free = np.asarray(free, dtype=float)
        if self.fix_delta1 is None:
            return free.copy()
        return np.insert(free, DELTA_INDEX, _logit(self.fix_delta1))

    @staticmethod
    def _cached(cache: OrderedDict, key, build):
        value = cache.get(key)
        if value is None:
            value = build()
            cache[key] = value
            # base point plus one probe is all a finite-difference sweep needs
            while len(cache) > 3:
                cache.popitem(last=False)
        else:
            cache.move_to_end(key)
        return value

    def _emission_block(self, theta: np.ndarray) -> np.ndarray:
        t = tuple(theta[_EMISSION])

        def build():
            # probes past the size cap see the capped (flat) likelihood
            emission = EmissionParams(
                mu0=math.exp(t[0]), mu1=math.exp(t[1]),
                s0=math.exp(min(t[2], LOG_SIZE_CAP)), s1=math.exp(min(t[3], LOG_SIZE_CAP)),
                pi0=_expit(t[4]), pi1=_expit(t[5]),
            )
            return self._table.log_matrix(emission)

        return self._cached(self._emit_cache, t, build)

    def _transition_block(self, theta: np.ndarray) -> np.ndarray:
        """Transition logit coefficients; probabilities are formed in the kernel."""
        return np.ascontiguousarray(theta[_TRANSITION], dtype=float)

    def full(self, theta: np.ndarray) -> float:
        """Log-likelihood at a full 13-vector."""
        self.n_evaluations += 1
        d = _expit(theta[DELTA_INDEX])
        log_init = np.array([math.log1p(-d) if d < 1 else -np.inf, math.log(d) if d > 0 else -np.inf])
        return float(forward_loglik_circadian(
            log_init, self._emission_block(theta), self._cos, self._sin,
            self._transition_block(theta),
        ))

    def __call__(self, free) -> float:
        return self.full(self.full_vector(free))


def fd_step(x: np.ndarray, rel: float) -> np.ndarray:
    return rel * np.maximum(1.0, np.abs(x))


def central_gradient(f: Callable[[np.ndarray], float], x, step=None) -> np.ndarray:
    """Central finite-difference gradient; default step is eps**(1/3) scaled by |x|."""
    x = np.asarray(x, dtype=float)
    h = fd_step(x, np.finfo(float).eps ** (1 / 3)) if step is None else np.broadcast_to(step, x.shape)
    g = np.empty_like(x)
    for i in range(x.size):
        xp = x.copy()
        xm = x.copy()
        xp[i] += h[i]
        xm[i] -= h[i]
        g[i] = (f(xp) - f(xm)) / (xp[i] - xm[i])
    return g


def central_hessian(f: Callable[[np.ndarray], float], x, step=None) -> np.ndarray:
    """Central finite-difference Hessian (symmetric by construction)."""
    x = np.asarray(x, dtype=float)
    n = x.size
    h = fd_step(x, np.finfo(float).eps ** 0.25) if step is None else np.broadcast_to(step, x.shape)
    f0 = f(x)
    H = np.empty((n, n))

    def at(*moves):
        y = x.copy()
        for i, m in moves:
            y[i] += m
        return f(y)

    for i in range(n):
        hi = h[i]
        H[i, i] = (at((i, hi)) - 2.0 * f0 + at((i, -hi))) / (hi * hi)
        for j in range(i + 1, n):
            hj = h[j]
            H[i, j] = (
                at((i, hi), (j, hj)) - at((i, hi), (j, -hj))
                - at((i, -hi), (j, hj)) + at((i, -hi), (j, -hj))
            ) / (4.0 * hi * hj)
            H[j, i] = H[i, j]
    return H


# ---------------------------------------------------------------------------
# standard errors


@dataclass(frozen=True)
class CovarianceResult:
    """Inverse observed information on the transformed scale."""

    hessian: np.ndarray
    covariance: np.ndarray
    se: np.ndarray
    available: np.ndarray
    positive_definite: bool


def inverse_information(hessian: np.ndarray, rtol: float = 1e-10) -> CovarianceResult:
    """Invert an observed information matrix, flagging non-identified directions.

    Coordinates that load on a non-positive eigen-direction get ``NaN`` SEs and
    ``available = False``; the remaining ones use the pseudo-inverse on the
    positive eigenspace.
    """
    H = 0.5 * (hessian + hessian.T)
    n = H.shape[0]
    if not np.all(np.isfinite(H)):
        nan = np.full(n, np.nan)
        return CovarianceResult(H, np.full((n, n), np.nan), nan, np.zeros(n, dtype=bool), False)
    vals, vecs = np.linalg.eigh(H)
    scale = max(np.max(np.abs(vals)), np.finfo(float).tiny)
    good = vals > rtol * scale
    inv_vals = np.where(good, 1.0 / np.where(good, vals, 1.0), 0.0)
    cov = (vecs * inv_vals) @ vecs.T
    bad_load = np.sum(vecs[:, ~good] ** 2, axis=1)
    available = bad_load < 1e-8
    se = np.where(available, np.sqrt(np.clip(np.diag(cov), 0.0, None)), np.nan)
    return CovarianceResult(H, cov, se, available, bool(np.all(good)))


def hessian_standard_errors(neg_loglik: Callable[[np.ndarray], float], x, step=None) -> CovarianceResult:
    """Standard errors from the finite-difference Hessian of a negative log-likelihood."""
    return inverse_information(central_hessian(neg_loglik, x, step))


@dataclass(frozen=True)
class StandardErrors:
    names: tuple[str, ...]
    se: np.ndarray            # natural scale; NaN where unavailable
    available: np.ndarray
    positive_definite: bool
    transformed: CovarianceResult

    def as_dict(self) -> dict[str, float]:
        return dict(zip(self.names, self.se))


def standard_errors(
    series: ObservationSeries,
    params_hat: ModelParams,
    fix_delta1: Optional[float] = None,
    step=None,
) -> StandardErrors:
    """Observed-information standard errors, delta-mapped to the natural scale.

    With ``fix_delta1`` the initial-state probability is held fixed and the
    result has 12 entries.
    """
    objective = LogLikelihood(series, fix_delta1)
    theta = transform(params_hat)
    free_idx = objective.free_index
    cov = hessian_standard_errors(lambda z: -objective(z), theta[free_idx], step)
    deriv = link_derivatives(theta)[free_idx]
    se = np.where(cov.available, np.abs(deriv) * cov.se, np.nan)
    names = tuple(NATURAL_NAMES[i] for i in free_idx)
    return StandardErrors(names, se, cov.available, cov.positive_definite, cov)


# ---------------------------------------------------------------------------
# fitting


@dataclass(frozen=True)
class FitConfig:
    max_iterations: int = 500
    gradient_tolerance: float = 1e-6
    step_tolerance: float = 1e-9
    fd_relative_step: float = np.finfo(float).eps ** (1 / 3)
    fix_delta1: Optional[float] = None
    multistart: int = 1
    seed: int = 0
    start: Optional[ModelParams] = None
    compute_se: bool = True

    def __post_init__(self):
        for name in ("gradient_tolerance", "step_tolerance", "fd_relative_step"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.max_iterations < 1 or self.multistart < 1:
            raise ValueError("max_iterations and multistart must be >= 1")
        if self.fix_delta1 is not None and not 0 < self.fix_delta1 < 1:
            raise ValueError("fix_delta1 must lie strictly inside (0, 1)")


@dataclass(frozen=True)
class FitResult:
    params_hat: ModelParams
    log_likelihood: float
    iterations: int
    converged: bool
    gradient_norm: float
    start: ModelParams
    start_log_likelihood: float
    message: str
    se: Optional[StandardErrors] = None
    notes: tuple[str, ...] = ()
    n_evaluations: int = 0

    @property
    def se_natural(self) -> Optional[np.ndarray]:
        return None if self.se is None else self.se.se


def _diagnose_start(objective: LogLikelihood, theta: np.ndarray) -> str:
    d = _expit(theta[DELTA_INDEX])
    if not 0 < d < 1:
        return "delta1"
    trans = objective._transition_block(theta)
    if not np.all(np.isfinite(trans)):
        return "transition coefficients (alpha/beta)"
    emit = objective._emission_block(theta)
    for state in (0, 1):
        if not np.all(np.isfinite(emit[:, state])):
            return f"emission parameters of state {state} (mu{state}, s{state}, pi{state})"
    return "unknown"


def _jitter(start: ModelParams, rng: np.random.Generator) -> ModelParams:
    alpha = np.array(start.alpha) + rng.normal(0.0, [1.0, 1.0, 1.0])
    beta = np.array(start.beta) + rng.normal(0.0, [1.0, 1.0, 1.0])
    return replace(
        start,
        alpha0=alpha[0], alpha1=alpha[1], alpha2=alpha[2],
        beta0=beta[0], beta1=beta[1], beta2=beta[2],
    )


def _clip_to_bounds(theta: np.ndarray) -> np.ndarray:
    out = theta.copy()
    for i, (lo, hi) in enumerate(_BOUNDS):
        if lo is not None:
            out[i] = max(out[i], lo)
        if hi is not None:
            out[i] = min(out[i], hi)
    return out


def _single_fit(objective: LogLikelihood, start: ModelParams, config: FitConfig):
    free_idx = objective.free_index
    theta0 = transform(start)
    if config.fix_delta1 is not None:
        theta0[DELTA_INDEX] = _logit(config.fix_delta1)
    theta0 = _clip_to_bounds(theta0)
    ll0 = objective.full(theta0)
    if not math.isfinite(ll0):
        raise FitError(
            f"log-likelihood is not finite at the starting values; offending parameter: "
            f"{_diagnose_start(objective, theta0)}"
        )
    scale = max(1.0, abs(ll0))

    def f(z):
        value = -objective(z) / scale
        return value if math.isfinite(value) else 1e300

    def g(z):
        return central_gradient(f, z, fd_step(z, config.fd_relative_step))

    bounds = [_BOUNDS[i] for i in free_idx]
    lo = np.array([b[0] if b[0] is not None else -np.inf for b in bounds])
    hi = np.array([b[1] if b[1] is not None else np.inf for b in bounds])
    z = theta0[free_idx]
    nit = 0
    # L-BFGS-B can stop on a stalled line search or a small relative
    # reduction well short of stationarity; restarting drops its stale
    # curvature pairs.
    for _ in range(1 + _MAX_RESTARTS):
        res = minimize(
            f, z, jac=g, method="L-BFGS-B", bounds=bounds,
            options={
                "maxiter": max(config.max_iterations - nit, 1),
                # implies the relative-gradient test below
                "gtol": config.gradient_tolerance / max(1.0, float(np.max(np.abs(z)))),
                "ftol": _FTOL,
                "maxcor": 20,
            },
        )
        nit += int(res.nit)
        moved = np.max(np.abs(res.x - z)) if res.fun <= f(z) else 0.0
        if res.fun <= f(z):
            z = res.x
        grad = g(z)
        snapped = _snap_to_bounds(z, grad, lo, hi)
        if snapped is not z and f(snapped) <= f(z):
            z = snapped
            grad = g(z)
        gnorm = relative_gradient(-scale * grad, z, -scale * f(z), lo, hi)
        if gnorm > config.gradient_tolerance:
            # quasi-Newton stalls on narrow curved ridges; a few exact-curvature
            # steps usually finish the job
            z, grad, polished = _newton_polish(f, g, z, grad, lo, hi)
            nit += polished
            gnorm = relative_gradient(-scale * grad, z, -scale * f(z), lo, hi)
        if gnorm <= config.gradient_tolerance or nit >= config.max_iterations:
            break
        if moved <= config.step_tolerance * max(1.0, float(np.max(np.abs(z)))):
            break
    theta_hat = objective.full_vector(z)
    ll_hat = objective.full(theta_hat)
    converged = bool(gnorm <= config.gradient_tolerance)
    message = res.message if isinstance(res.message, str) else str(res.message)
    return theta_hat, ll_hat, ll0, nit, converged, gnorm, message


def _newton_polish(f, g, z, grad, lo, hi, max_steps=_NEWTON_STEPS):
    """Projected Newton steps with a finite-difference Hessian.

    Coordinates held at a bound by an outward-pointing gradient stay fixed.
    Each step is halved until the objective decreases; returns the new point,
    its gradient and the number of accepted steps.
    """
    accepted = 0
    fz = f(z)
    for _ in range(max_steps):
        held = ((z >= hi) & (grad < 0)) | ((z <= lo) & (grad > 0))
        free = np.flatnonzero(~held)
        if free.size == 0:
            break
        H = central_hessian(lambda v: f(_embed(z, free, v)), z[free])
        w, V = np.linalg.eigh(H)
        floor = max(1e-8 * float(np.max(np.abs(w))), 1e-12)
        step = -(V @ ((V.T @ grad[free]) / np.maximum(np.abs(w), floor)))
        for _ in range(20):
            trial = np.clip(_embed(z, free, z[free] + step), lo, hi)
            ft = f(trial)
            if ft < fz:
                break
            step *= 0.5
        else:
            break
        z, fz = trial, ft
        grad = g(z)
        accepted += 1
    return z, grad, accepted


def _embed(z, index, values):
    out = z.copy()
    out[index] = values
    return out


def _snap_to_bounds(z, grad, lo, hi, rtol=_SNAP_RTOL):
    """Move coordinates that stall just inside a bound onto it.

    Only coordinates whose descent direction (``-grad``) points outward are
    moved. Returns ``z`` itself when nothing changes.
    """
    near_hi = (hi - z <= rtol * np.maximum(1.0, np.abs(hi))) & (grad < 0)
    near_lo = (z - lo <= rtol * np.maximum(1.0, np.abs(lo))) & (grad > 0)
    if not (near_hi.any() or near_lo.any()):
        return z
    out = z.copy()
    out[near_hi] = hi[near_hi]
    out[near_lo] = lo[near_lo]
    return out


def relative_gradient(grad, x, value, lower=None, upper=None) -> float:
    """Largest relative gradient ``|g_i| max(|x_i|, 1) / max(|f|, 1)``.

    Components that push against an active bound are ignored.
    """
    grad = np.asarray(grad, dtype=float).copy()
    x = np.asarray(x, dtype=float)
    if upper is not None:
        grad[(x >= upper) & (grad > 0)] = 0.0
    if lower is not None:
        grad[(x <= lower) & (grad < 0)] = 0.0
    if grad.size == 0:
        return 0.0
    rel = np.abs(grad) * np.maximum(np.abs(x), 1.0) / max(abs(value), 1.0)
    return float(np.max(rel))


def fit(series: ObservationSeries, config: FitConfig = FitConfig()) -> FitResult:
    """Maximum-likelihood fit of one subject's series.

    The best local optimum over ``config.multistart`` starts is returned. The
    first start is ``config.start`` (or the heuristic starting values); the
    remaining ones jitter its transition coefficients with a seeded RNG.
    ``gradient_norm`` is the largest relative gradient (see
    :func:`relative_gradient`); the fit counts as converged when it is at most
    ``config.gradient_tolerance``.
    """
    base = config.start if config.start is not None else starting_values(series)
    if config.fix_delta1 is not None:
        base = replace(base, delta1=config.fix_delta1)
    objective = LogLikelihood(series, config.fix_delta1)
    rng = np.random.default_rng(config.seed)
    starts = [base] + [_jitter(base, rng) for _ in range(config.multistart - 1)]

    best = None
    for k, start in enumerate(starts):
        out = _single_fit(objective, start, config)
        logger.debug("start %d: loglik %.6f converged=%s (%s)", k, out[1], out[4], out[6])
        if best is None or out[1] > best[1][1]:
            best = (start, out)
    start, (theta_hat, ll_hat, ll0, nit, converged, gnorm, message) = best

    notes = []
    for i, name in ((2, "s0"), (3, "s1")):
        if theta_hat[i] >= LOG_SIZE_CAP - 1e-9:
            notes.append(f"{name} reached the size cap {SIZE_CAP:g} (count law is effectively Poisson)")
    params_hat = inverse_transform(theta_hat)
    se = standard_errors(series, params_hat, config.fix_delta1) if config.compute_se else None
    if se is not None and not se.positive_definite:
        missing = [n for n, ok in zip(se.names, se.available) if not ok]
        notes.append(f"observed information not positive definite; SE unavailable for {missing}")
    if not converged:
        logger.warning("fit did not converge: %s (gradient norm %.3g)", message, gnorm)
    return FitResult(
        params_hat=params_hat,
        log_likelihood=ll_hat,
        iterations=nit,
        converged=converged,
        gradient_norm=gnorm,
        start=start,
        start_log_likelihood=ll0,
        message=message,
        se=se,
        notes=tuple(notes),
        n_evaluations=objective.n_evaluations,
    )
