"""Two-state hidden Markov model for minute-level sleep/wake reconstruction
from actigraphy counts and self-reported sleep."""

from .estimation import FitConfig, FitError, FitResult, fit, standard_errors, starting_values
from .inference import decode, local_decode, log_likelihood, posterior_sleep, viterbi_decode
from .model import EmissionParams, ModelParams, ObservationSeries, nb_log_pmf
from .simulation import MissingSpec, make_scenario, run_study, simulate_observations
from .transition import TransitionCoeffs, transition_array, transition_matrix

__version__ = "0.1.0"

__all__ = [
    "EmissionParams", "FitConfig", "FitError", "FitResult", "MissingSpec", "ModelParams",
    "ObservationSeries", "TransitionCoeffs", "decode", "fit", "local_decode", "log_likelihood",
    "make_scenario", "nb_log_pmf", "posterior_sleep", "run_study", "simulate_observations",
    "standard_errors", "starting_values", "transition_array", "transition_matrix",
    "viterbi_decode",
]
