"""scikit-learn style front ends.

:class:`EFSynthesizer` is fitted on a model and then predicts, for rows of
parameter values, whether the goal is reachable. :class:`GuardsToInvariants`
is a transformer from invariant-free PTAs to guard-free ones.
"""

from __future__ import annotations

from collections.abc import Mapping

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from invpta.decision import DEFAULT_MAX_PARAMS, ef_emptiness, ef_synthesis, membership, render
from invpta.model import Goal, PtaModel, validate_model
from invpta.transform import guards_to_invariants


def check_model(model, require_pta_iu: bool = False) -> PtaModel:
    """Validate a model; accepts a :class:`PtaModel` or model source text."""
    if isinstance(model, (str, bytes)):
        from invpta.dsl import parse

        model = parse(model)
    if not isinstance(model, PtaModel):
        raise TypeError(f"expected a PtaModel or model text, got {type(model).__name__}")
    report = validate_model(model)
    if require_pta_iu and not report.is_pta_iu:
        from invpta.model import ModelClassError

        raise ModelClassError("model is not an upper-bound-invariant PTA", report.violations)
    return model


def check_valuations(model: PtaModel, X) -> list:
    """Rows of parameter values -> list of exact valuations.

    ``X`` is a mapping (one valuation), a sequence of mappings, or a 2-D
    array-like with one column per parameter in declaration order.
    """
    if isinstance(X, Mapping):
        return [model.valuation(X)]
    rows = list(X) if not isinstance(X, np.ndarray) else list(X.tolist() if X.ndim == 2 else [X.tolist()])
    out = []
    for row in rows:
        if isinstance(row, Mapping):
            out.append(model.valuation(row))
        else:
            row = list(row)
            if len(row) != model.n_params:
                raise ValueError(f"each row needs {model.n_params} values, got {len(row)}")
            out.append(model.valuation(row))
    return out


def _goal(goal, label) -> Goal:
    if goal is not None and label is not None:
        raise ValueError("give either goal or label, not both")
    if label is not None:
        return Goal(label=label)
    if goal is None:
        raise ValueError("a goal location or label is required")
    return Goal(location=goal)


class EFSynthesizer(BaseEstimator):
    """Exact reachability synthesis for upper-bound-invariant PTAs.

    Parameters
    ----------
    goal : str, optional
        Goal location name.
    label : str, optional
        Goal atomic proposition (instead of ``goal``).
    max_params : int, default=20
        Refuse models with more parameters (the search is exponential).
    n_jobs : int, optional
        Threads used to check sign regions.

    Attributes
    ----------
    result_ : SynthesisResult
    constraint_ : RenderedConstraint
    empty_ : bool
    witness_ : Run or None
        0-delay run under the all-ones valuation, if the goal is reachable.
    n_regions_checked_ : int
    """

    def __init__(self, goal=None, label=None, max_params=DEFAULT_MAX_PARAMS, n_jobs=None):
        self.goal = goal
        self.label = label
        self.max_params = max_params
        self.n_jobs = n_jobs

    def fit(self, model, y=None):
        model = check_model(model, require_pta_iu=True)
        goal = _goal(self.goal, self.label)
        self.model_ = model
        self.empty_, self.witness_ = ef_emptiness(model, goal)
        self.result_ = ef_synthesis(model, goal, max_params=self.max_params, n_jobs=self.n_jobs)
        self.constraint_ = render(self.result_)
        self.n_regions_checked_ = self.result_.regions_checked
        return self

    def predict(self, X):
        check_is_fitted(self, "result_")
        return np.array([membership(self.result_, v) for v in check_valuations(self.model_, X)], dtype=bool)


class GuardsToInvariants(TransformerMixin, BaseEstimator):
    """Replace every guarded edge by a fresh location holding the guard."""

    def fit(self, model, y=None):
        self.map_ = guards_to_invariants(check_model(model))
        return self

    def transform(self, model):
        check_is_fitted(self, "map_")
        model = check_model(model)
        if model is self.map_.source or model == self.map_.source:
            return self.map_.result
        return guards_to_invariants(model).result
