"""Sequential level-set estimation for stochastic simulators.

Gaussian-process emulators (a latent-logit classifier and a heteroscedastic
mean-response GP) drive a history-matching style search: candidates whose
implausibility exceeds +3 are ruled out, those below -3 are ruled in, and
each wave of new simulations sharpens the remainder.
"""

__version__ = "0.1.0"

from .space import CandidateSet, DesignSpace, InputPoint, SpaceError, VariableSpec, to_unit
from .design import (candidate_set, latin_hypercube, replicate_design,
                     sliced_latin_hypercube)
from .kernels import HyperPriors, KernelParams, kernel_eval
from .gp import FitError, FitSettings, Prediction, joint_prob_below, prob_below
from .classifier import ClassifierEmulator, fit_classifier, predict_logit
from .hetgp import HetGPEmulator, fit_hetgp, predict_mean_response

__all__ = [
    "CandidateSet", "DesignSpace", "InputPoint", "SpaceError", "VariableSpec",
    "to_unit", "candidate_set", "latin_hypercube", "replicate_design",
    "sliced_latin_hypercube", "HyperPriors", "KernelParams", "kernel_eval",
    "FitError", "FitSettings", "Prediction", "joint_prob_below", "prob_below",
    "ClassifierEmulator", "fit_classifier", "predict_logit",
    "HetGPEmulator", "fit_hetgp", "predict_mean_response",
]
