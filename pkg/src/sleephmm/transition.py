"""Circadian two-state transition kernel.

logit P(stay awake at t)  = a0 + a1 cos(2 pi t / 1440) + a2 sin(2 pi t / 1440)
logit P(stay asleep at t) = b0 + b1 cos(2 pi t / 1440) + b2 sin(2 pi t / 1440)

The matrix at minute index ``t`` governs the jump from the state at ``t`` to
the state at ``t + 1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import expit, log_expit

from .model import MINUTES_PER_DAY


@dataclass(frozen=True)
class TransitionCoeffs:
    alpha: tuple[float, float, float]
    beta: tuple[float, float, float]

    def __post_init__(self):
        alpha = tuple(float(a) for a in self.alpha)
        beta = tuple(float(b) for b in self.beta)
        if len(alpha) != 3 or len(beta) != 3:
            raise ValueError("alpha and beta must each hold three coefficients")
        if not all(math.isfinite(c) for c in alpha + beta):
            raise ValueError(f"transition coefficients must be finite, got {alpha + beta}")
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "beta", beta)


def expit_stable(z):
    """Logistic function that never overflows; saturates to 0/1 at the extremes."""
    z = np.asarray(z, dtype=float)
    # exp of a non-positive argument only
    e = np.exp(-np.abs(z))
    out = np.where(z >= 0, 1.0 / (1.0 + e), e / (1.0 + e))
    return out[()] if out.ndim == 0 else out


def _harmonics(t):
    angle = 2.0 * np.pi * np.asarray(t, dtype=float) / MINUTES_PER_DAY
    return np.cos(angle), np.sin(angle)


def _stay_logits(t, coeffs: TransitionCoeffs):
    c, s = _harmonics(t)
    a0, a1, a2 = coeffs.alpha
    b0, b1, b2 = coeffs.beta
    return a0 + a1 * c + a2 * s, b0 + b1 * c + b2 * s


def transition_matrix(t: int, coeffs: TransitionCoeffs) -> np.ndarray:
    """2x2 row-stochastic matrix [[g00, g01], [g10, g11]] at minute index ``t``.

    Off-diagonals are complements of the diagonal, so rows sum to exactly 1.
    """
    if t < 1:
        raise ValueError(f"minute index must be >= 1, got {t}")
    # reduce first so t and t + 1440 give bit-identical matrices
    t = int(t) % MINUTES_PER_DAY
    z00, z11 = _stay_logits(t, coeffs)
    g00 = float(expit_stable(z00))
    g11 = float(expit_stable(z11))
    return np.array([[g00, 1.0 - g00], [1.0 - g11, g11]])


@lru_cache(maxsize=32)
def step_harmonics(length: int, start_phase: int):
    """Read-only cos/sin of the source minute index of every transition step."""
    t = (np.arange(1, length) + start_phase) % MINUTES_PER_DAY
    c, s = _harmonics(t)
    c.flags.writeable = False
    s.flags.writeable = False
    return c, s


def _step_logits(length: int, coeffs: TransitionCoeffs, start_phase: int):
    c, s = step_harmonics(int(length), int(start_phase))
    a0, a1, a2 = coeffs.alpha
    b0, b1, b2 = coeffs.beta
    return a0 + a1 * c + a2 * s, b0 + b1 * c + b2 * s


def transition_array(length: int, coeffs: TransitionCoeffs, start_phase: int = 0) -> np.ndarray:
    """Transition probabilities for every step; see :func:`log_transition_array`.

    Each entry is computed from its own logit, so tiny switching
    probabilities keep full relative precision.
    """
    z00, z11 = _step_logits(length, coeffs, start_phase)
    out = np.empty((max(length - 1, 0), 2, 2))
    out[:, 0, 0] = expit(z00)
    out[:, 0, 1] = expit(-z00)
    out[:, 1, 1] = expit(z11)
    out[:, 1, 0] = expit(-z11)
    return out


def log_transition_array(length: int, coeffs: TransitionCoeffs, start_phase: int = 0) -> np.ndarray:
    """Log transition matrices for every step of a series of ``length`` minutes.

    Element ``k`` (0-based, ``k < length - 1``) is the log-matrix taking the
    state at position ``k`` to position ``k + 1``; it is evaluated at the
    source minute index ``k + 1`` shifted by ``start_phase``.
    """
    z00, z11 = _step_logits(length, coeffs, start_phase)
    out = np.empty((max(length - 1, 0), 2, 2))
    out[:, 0, 0] = log_expit(z00)
    out[:, 0, 1] = out[:, 0, 0] - z00
    out[:, 1, 1] = log_expit(z11)
    out[:, 1, 0] = out[:, 1, 1] - z11
    return out
