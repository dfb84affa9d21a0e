"""Group-relative advantages and the clipped policy surrogate.

The policy itself lives elsewhere: callers hand in rewards and sequence
log-probabilities and get back advantages, importance ratios, the clipped
objective and the loss to minimize. No gradients are taken here.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Hashable, Sequence

import numpy as np

DEFAULT_EPSILON = 1e-4
DEFAULT_CLIP_EPS = 0.2
DEFAULT_BETA = 1e-3


@dataclass(frozen=True)
class RewardGroup:
    prompt_id: Hashable
    rewards: tuple[float, ...]
    mu: float
    sigma: float
    advantages: tuple[float, ...]
    epsilon: float = DEFAULT_EPSILON

    def to_dict(self) -> dict:
        return {
            "prompt_id": self.prompt_id,
            "mu": self.mu,
            "sigma": self.sigma,
            "advantages": list(self.advantages),
        }


@dataclass(frozen=True)
class PolicyEval:
    logp_new: tuple[float, ...]
    logp_old: tuple[float, ...]

    def __post_init__(self):
        new = np.asarray(self.logp_new, dtype=float)
        old = np.asarray(self.logp_old, dtype=float)
        if new.shape != old.shape or new.ndim != 1:
            raise ValueError("logp_new and logp_old must be 1-D and the same length")
        if not (np.all(np.isfinite(new)) and np.all(np.isfinite(old))):
            raise ValueError("log-probabilities must be finite")
        object.__setattr__(self, "logp_new", tuple(new.tolist()))
        object.__setattr__(self, "logp_old", tuple(old.tolist()))


@dataclass(frozen=True)
class SurrogateReport:
    ratios: tuple[float, ...]
    per_sample_objective: tuple[float, ...]
    mean_objective: float
    kl_estimate: float
    loss: float

    def to_dict(self) -> dict:
        return {
            "ratios": list(self.ratios),
            "per_sample_objective": list(self.per_sample_objective),
            "mean_objective": self.mean_objective,
            "kl_estimate": self.kl_estimate,
            "loss": self.loss,
        }


def normalize_advantages(
    rewards: Sequence[float], epsilon: float = DEFAULT_EPSILON, prompt_id: Hashable = None
) -> RewardGroup:
    """``(R - mean) / (std + epsilon)`` with the population standard deviation.

    A group whose rewards are all equal gets exactly zero advantages, even
    with ``epsilon == 0``; so does one whose spread underflows to zero.
    """
    r = np.asarray(rewards, dtype=float)
    if r.ndim != 1 or r.size < 2:
        raise ValueError("a reward group needs at least two rewards")
    if not np.all(np.isfinite(r)):
        raise ValueError("rewards must be finite")
    if epsilon < 0:
        raise ValueError("epsilon must be non-negative")
    if np.all(r == r[0]):
        mu, sigma = float(r[0]), 0.0
        adv = np.zeros_like(r)
    else:
        mu = float(r.mean())
        sigma = float(r.std())
        # With epsilon = 0 a spread below float resolution leaves nothing to divide by.
        adv = (r - mu) / (sigma + epsilon) if sigma + epsilon > 0 else np.zeros_like(r)
    return RewardGroup(prompt_id, tuple(r.tolist()), mu, sigma, tuple(adv.tolist()), epsilon)


def importance_ratios(ev: PolicyEval) -> np.ndarray:
    return np.exp(np.asarray(ev.logp_new) - np.asarray(ev.logp_old))


def kl_estimate(ev: PolicyEval) -> float:
    """Naive sample estimate of KL[old || new] from candidates drawn under old."""
    return float(np.mean(np.asarray(ev.logp_old) - np.asarray(ev.logp_new)))


def clipped_surrogate(
    ratios: Sequence[float],
    advantages: Sequence[float],
    clip_eps: float = DEFAULT_CLIP_EPS,
    kl: float = 0.0,
    beta: float = DEFAULT_BETA,
) -> SurrogateReport:
    r = np.asarray(ratios, dtype=float)
    a = np.asarray(advantages, dtype=float)
    if r.shape != a.shape or r.ndim != 1:
        raise ValueError("ratios and advantages must be 1-D and the same length")
    if r.size == 0:
        raise ValueError("empty group")
    if not clip_eps > 0:
        raise ValueError("clip_eps must be positive")
    if beta < 0:
        raise ValueError("beta must be non-negative")
    per_sample = np.minimum(r * a, np.clip(r, 1.0 - clip_eps, 1.0 + clip_eps) * a)
    mean_obj = float(per_sample.mean())
    return SurrogateReport(
        tuple(r.tolist()),
        tuple(per_sample.tolist()),
        mean_obj,
        float(kl),
        -mean_obj + beta * float(kl),
    )


def grpo_step(
    rewards: Sequence[float],
    ev: PolicyEval,
    epsilon: float = DEFAULT_EPSILON,
    clip_eps: float = DEFAULT_CLIP_EPS,
    beta: float = DEFAULT_BETA,
    prompt_id: Hashable = None,
) -> tuple[RewardGroup, SurrogateReport]:
    """Advantages plus surrogate for one prompt's group of rollouts."""
    group = normalize_advantages(rewards, epsilon, prompt_id)
    if len(ev.logp_new) != len(group.rewards):
        raise ValueError("log-probabilities and rewards differ in length")
    report = clipped_surrogate(importance_ratios(ev), group.advantages, clip_eps, kl_estimate(ev), beta)
    return group, report
