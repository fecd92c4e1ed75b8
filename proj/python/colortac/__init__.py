"""Color-coded optical tactile sensor: simulation, descriptor and classifiers."""

import json as _json

from ._core import *  # noqa: F401,F403
from ._core import _train_eval_json

__version__ = "0.1.0"


def train_eval(dataset, methods=(), mode="flat", seed=0, train_trials=20, folds=5):
    """Split by trial, cross-validate, and evaluate on held-out trials.

    Returns the same report dictionary that ``colortac train-eval`` writes as JSON.
    """
    return _json.loads(_train_eval_json(dataset, list(methods), mode, seed, train_trials, folds))
