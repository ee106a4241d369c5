"""Estimator-style facade over the rounding pipeline.

Wraps solve-then-round in the familiar fit/predict shape so the solver
composes with parameter-sweep tooling (get_params/set_params, clone).
Fitting stores the fractional relaxation and the best rounded labeling.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .instance import Instance
from .rounding import DEFAULT_R, run_pipeline

__all__ = ["HubAssignmentEstimator"]


class HubAssignmentEstimator(BaseEstimator):
    """Randomized LP-rounding solver with an estimator interface.

    Parameters mirror the pipeline: class base ``r``, number of rounding
    trials, master seed, and whether phase thresholds are truncated to
    the live maximum (a pure speedup).

    After ``fit(instance)``:
        labels_        hub index per non-hub (best trial),
        cost_          objective of that assignment,
        lp_value_      optimum of the relaxation,
        trial_costs_   cost sample across all trials.
    """

    def __init__(
        self,
        r: float = DEFAULT_R,
        trials: int = 100,
        seed: int = 0,
        truncate_u: bool = True,
    ):
        self.r = r
        self.trials = trials
        self.seed = seed
        self.truncate_u = truncate_u

    def fit(self, X: Instance, y=None):
        if not isinstance(X, Instance):
            raise TypeError(f"expected an Instance, got {type(X).__name__}")
        result = run_pipeline(
            X,
            r=self.r,
            trials=self.trials,
            seed=self.seed,
            truncate_u=self.truncate_u,
        )
        self.labels_ = np.asarray(result.assignment.hubs, dtype=int)
        self.cost_ = result.cost
        self.lp_value_ = result.fractional.objective_value
        self.trial_costs_ = result.costs
        return self

    def predict(self, X: Instance | None = None) -> np.ndarray:
        check_is_fitted(self, "labels_")
        return self.labels_.copy()

    def fit_predict(self, X: Instance, y=None) -> np.ndarray:
        return self.fit(X).predict()
