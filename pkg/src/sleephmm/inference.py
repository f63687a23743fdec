"""Log-space forward-backward smoothing and Viterbi decoding."""

from __future__ import annotations

from dataclasses import dataclass

import numba
import numpy as np
from scipy.special import expit

from .model import ModelParams, ObservationSeries, emission_log_matrix
from .transition import log_transition_array, transition_array


@numba.njit(cache=True, inline="always")
def _logaddexp(a, b):
    if a == -np.inf:
        return b
    if b == -np.inf:
        return a
    if a > b:
        return a + np.log1p(np.exp(b - a))
    return b + np.log1p(np.exp(a - b))


@numba.njit(cache=True)
def forward_log(log_init, log_emit, log_trans):
    """Forward log-probabilities log P(obs_1..t, C_t = j); shape (T, 2)."""
    T = log_emit.shape[0]
    la = np.empty((T, 2))
    la[0, 0] = log_init[0] + log_emit[0, 0]
    la[0, 1] = log_init[1] + log_emit[0, 1]
    for t in range(1, T):
        g = log_trans[t - 1]
        for j in range(2):
            la[t, j] = _logaddexp(la[t - 1, 0] + g[0, j], la[t - 1, 1] + g[1, j]) + log_emit[t, j]
    return la


@numba.njit(cache=True)
def forward_loglik(log_init, log_emit, trans):
    """Forward recursion keeping only the running pair; returns log L.

    ``trans`` holds transition probabilities (not logs), shape (T - 1, 2, 2).
    Each step is a two-term log-sum-exp shifted by the larger forward value,
    so only one ``exp`` and two ``log`` calls are needed per step.
    """
    T = log_emit.shape[0]
    a0 = log_init[0] + log_emit[0, 0]
    a1 = log_init[1] + log_emit[0, 1]
    for t in range(1, T):
        if a0 == -np.inf and a1 == -np.inf:
            return -np.inf
        if a0 >= a1:
            m = a0
            w0 = 1.0
            w1 = np.exp(a1 - a0)
        else:
            m = a1
            w0 = np.exp(a0 - a1)
            w1 = 1.0
        g = trans[t - 1]
        a0 = m + np.log(w0 * g[0, 0] + w1 * g[1, 0]) + log_emit[t, 0]
        a1 = m + np.log(w0 * g[0, 1] + w1 * g[1, 1]) + log_emit[t, 1]
    return _logaddexp(a0, a1)


@numba.njit(cache=True, inline="always")
def _expit_pair(z):
    """(expit(z), expit(-z)) from a single exp."""
    e = np.exp(-abs(z))
    big = 1.0 / (1.0 + e)
    small = e * big
    if z >= 0:
        return big, small
    return small, big


@numba.njit(cache=True)
def forward_loglik_circadian(log_init, log_emit, cos_t, sin_t, coef):
    """:func:`forward_loglik` with the transition probabilities built in place.

    ``cos_t``/``sin_t`` are the harmonics of each step's minute index and
    ``coef`` is (alpha0, alpha1, alpha2, beta0, beta1, beta2).
    """
    T = log_emit.shape[0]
    a0 = log_init[0] + log_emit[0, 0]
    a1 = log_init[1] + log_emit[0, 1]
    for t in range(1, T):
        if a0 == -np.inf and a1 == -np.inf:
            return -np.inf
        c = cos_t[t - 1]
        s = sin_t[t - 1]
        g00, g01 = _expit_pair(coef[0] + coef[1] * c + coef[2] * s)
        g11, g10 = _expit_pair(coef[3] + coef[4] * c + coef[5] * s)
        if a0 >= a1:
            m = a0
            w0 = 1.0
            w1 = np.exp(a1 - a0)
        else:
            m = a1
            w0 = np.exp(a0 - a1)
            w1 = 1.0
        a0 = m + np.log(w0 * g00 + w1 * g10) + log_emit[t, 0]
        a1 = m + np.log(w0 * g01 + w1 * g11) + log_emit[t, 1]
    return _logaddexp(a0, a1)


@numba.njit(cache=True)
def backward_log(log_emit, log_trans):
    """Backward log-probabilities log P(obs_{t+1}..T | C_t = i); shape (T, 2)."""
    T = log_emit.shape[0]
    lb = np.empty((T, 2))
    lb[T - 1, 0] = 0.0
    lb[T - 1, 1] = 0.0
    for t in range(T - 2, -1, -1):
        g = log_trans[t]
        n0 = log_emit[t + 1, 0] + lb[t + 1, 0]
        n1 = log_emit[t + 1, 1] + lb[t + 1, 1]
        for i in range(2):
            lb[t, i] = _logaddexp(g[i, 0] + n0, g[i, 1] + n1)
    return lb


@numba.njit(cache=True)
def viterbi_log(log_init, log_emit, log_trans):
    T = log_emit.shape[0]
    delta = np.empty((T, 2))
    back = np.zeros((T, 2), dtype=np.int8)
    delta[0, 0] = log_init[0] + log_emit[0, 0]
    delta[0, 1] = log_init[1] + log_emit[0, 1]
    for t in range(1, T):
        g = log_trans[t - 1]
        for j in range(2):
            from0 = delta[t - 1, 0] + g[0, j]
            from1 = delta[t - 1, 1] + g[1, j]
            # ties go to the awake predecessor
            if from1 > from0:
                delta[t, j] = from1 + log_emit[t, j]
                back[t, j] = 1
            else:
                delta[t, j] = from0 + log_emit[t, j]
    path = np.empty(T, dtype=np.int8)
    path[T - 1] = 1 if delta[T - 1, 1] > delta[T - 1, 0] else 0
    best = delta[T - 1, path[T - 1]]
    for t in range(T - 1, 0, -1):
        path[t - 1] = back[t, path[t]]
    return path, best


@dataclass(frozen=True)
class PosteriorTrace:
    posterior_sleep: np.ndarray
    viterbi_path: np.ndarray
    viterbi_log_prob: float
    log_likelihood: float


def model_arrays(series: ObservationSeries, params: ModelParams):
    """(log initial, log emissions, log transitions) for one series."""
    log_emit = emission_log_matrix(series, params.emission)
    log_trans = log_transition_array(series.length, params.coeffs, series.start_phase)
    return params.log_initial(), log_emit, log_trans


def log_likelihood(series: ObservationSeries, params: ModelParams) -> float:
    """Log-likelihood summed over all hidden paths (forward recursion)."""
    log_emit = emission_log_matrix(series, params.emission)
    trans = transition_array(series.length, params.coeffs, series.start_phase)
    return float(forward_loglik(params.log_initial(), log_emit, trans))


def backward_log_likelihood(series: ObservationSeries, params: ModelParams) -> float:
    """Same quantity as :func:`log_likelihood`, read off the backward pass."""
    log_init, log_emit, log_trans = model_arrays(series, params)
    lb = backward_log(log_emit, log_trans)
    return float(np.logaddexp.reduce(log_init + log_emit[0] + lb[0]))


def _log_odds_from_arrays(log_init, log_emit, log_trans):
    la = forward_log(log_init, log_emit, log_trans)
    lb = backward_log(log_emit, log_trans)
    # log-odds of sleep vs awake; the normaliser cancels
    log_odds = (la[:, 1] + lb[:, 1]) - (la[:, 0] + lb[:, 0])
    return log_odds, float(np.logaddexp(la[-1, 0], la[-1, 1]))


def _posterior_from_arrays(log_init, log_emit, log_trans):
    log_odds, loglik = _log_odds_from_arrays(log_init, log_emit, log_trans)
    return expit(log_odds), loglik


def posterior_sleep(series: ObservationSeries, params: ModelParams) -> np.ndarray:
    """Smoothed P(C_t = sleep | all observations) for every minute."""
    post, _ = _posterior_from_arrays(*model_arrays(series, params))
    return post


def posterior_states(series: ObservationSeries, params: ModelParams) -> np.ndarray:
    """(T, 2) smoothed probabilities of (awake, asleep) for every minute."""
    log_odds, _ = _log_odds_from_arrays(*model_arrays(series, params))
    return np.column_stack([expit(-log_odds), expit(log_odds)])


def viterbi_decode(series: ObservationSeries, params: ModelParams) -> tuple[np.ndarray, float]:
    """Most probable state path and its joint log-probability with the data.

    Exact ties resolve toward the awake state.
    """
    path, best = viterbi_log(*model_arrays(series, params))
    return path.astype(np.int64), float(best)


def local_decode(posterior, threshold: float = 0.5) -> np.ndarray:
    if not 0 < threshold < 1:
        raise ValueError(f"threshold must lie in (0, 1), got {threshold}")
    return (np.asarray(posterior, dtype=float) > threshold).astype(np.int64)


def decode(series: ObservationSeries, params: ModelParams) -> PosteriorTrace:
    """Posterior, Viterbi path and log-likelihood in one pass over the arrays."""
    arrays = model_arrays(series, params)
    post, loglik = _posterior_from_arrays(*arrays)
    path, best = viterbi_log(*arrays)
    return PosteriorTrace(post, path.astype(np.int64), float(best), loglik)
