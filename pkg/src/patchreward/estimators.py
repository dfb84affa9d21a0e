"""scikit-learn shaped wrappers for pipeline use.

``PatchScorer`` turns (candidate, oracle) pairs into the six score columns;
``GroupAdvantageTransformer`` turns a (groups, rollouts) reward matrix into
group-normalized advantages. Both are stateless: ``fit`` only validates
hyperparameters.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .grpo import DEFAULT_EPSILON, normalize_advantages
from .metrics import MetricConfig, score_pair

SCORE_COLUMNS = ("bleu", "weighted_bleu", "sim_ast", "sim_dfg", "reward", "codebleu")


def _check_pairs(X) -> list[tuple[str, str]]:
    pairs = list(X)
    for i, pair in enumerate(pairs):
        if len(pair) != 2 or not all(isinstance(s, str) for s in pair):
            raise ValueError(f"row {i}: expected a (candidate, oracle) pair of strings")
    return [(c, o) for c, o in pairs]


class PatchScorer(TransformerMixin, BaseEstimator):
    def __init__(
        self,
        max_ngram: int = 4,
        keyword_weight: float = 1.0,
        other_weight: float = 0.2,
        codebleu_weights: tuple[float, float, float, float] = (0.25, 0.25, 0.25, 0.25),
        min_subtree_height: int = 1,
        smoothing_epsilon: float = 1e-9,
    ):
        self.max_ngram = max_ngram
        self.keyword_weight = keyword_weight
        self.other_weight = other_weight
        self.codebleu_weights = codebleu_weights
        self.min_subtree_height = min_subtree_height
        self.smoothing_epsilon = smoothing_epsilon

    def fit(self, X=None, y=None):
        self.config_ = MetricConfig(**self.get_params())
        return self

    def transform(self, X) -> np.ndarray:
        check_is_fitted(self, "config_")
        pairs = _check_pairs(X)
        out = np.empty((len(pairs), len(SCORE_COLUMNS)))
        for i, (cand, oracle) in enumerate(pairs):
            report = score_pair(cand, oracle, self.config_)
            out[i] = [getattr(report, c) for c in SCORE_COLUMNS]
        return out

    def get_feature_names_out(self, input_features=None) -> np.ndarray:
        return np.asarray(SCORE_COLUMNS, dtype=object)


class GroupAdvantageTransformer(TransformerMixin, BaseEstimator):
    def __init__(self, epsilon: float = DEFAULT_EPSILON):
        self.epsilon = epsilon

    def fit(self, X=None, y=None):
        if not self.epsilon >= 0:
            raise ValueError("epsilon must be non-negative")
        self.epsilon_ = float(self.epsilon)
        return self

    def transform(self, X) -> np.ndarray:
        check_is_fitted(self, "epsilon_")
        rewards = check_array(X, dtype=np.float64, ensure_min_features=2)
        return np.vstack([normalize_advantages(row, self.epsilon_).advantages for row in rewards])
