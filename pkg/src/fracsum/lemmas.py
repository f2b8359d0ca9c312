"""Random instances satisfying each lemma's hypotheses, and trial runners."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Dict

import numpy as np

from .geom import (chebyshev_center, check_ball_sum_cover, check_distance_bound,
                   check_lemma_sum_absorption, check_perturbation_lemma, convex_hull, diameter)


def _cloud(rng: np.random.Generator, d: int, lo: int = 1, hi: int = 8) -> np.ndarray:
    return rng.uniform(-1, 1, size=(int(rng.integers(lo, hi + 1)), d))


def _solid(rng: np.random.Generator, d: int):
    """A point cloud with a non-degenerate hull and its inscribed ball."""
    while True:
        A = _cloud(rng, d, d + 1, d + 6)
        ball = chebyshev_center(convex_hull(A))
        if ball.radius > 1e-3:
            return A, ball


def trial_sum_absorption(rng, d, samples):
    A = _cloud(rng, d)
    eps = rng.random() / len(A)
    return check_lemma_sum_absorption(A, eps, samples, int(rng.integers(2 ** 31)))


def trial_distance_bound(rng, d, samples):
    R = rng.uniform(0.5, 5)
    A = _cloud(rng, d)
    A = A / np.maximum(np.linalg.norm(A, axis=1, keepdims=True), 1e-12)
    A *= R * (1 + 0.5 * rng.random((len(A), 1)))
    return check_distance_bound(A, R, samples, int(rng.integers(2 ** 31)))


def trial_perturbation(rng, d, samples):
    A, ball = _solid(rng, d)
    r = ball.radius * rng.uniform(0.3, 1.0)
    delta = r * rng.uniform(0.05, 0.95)
    g = rng.standard_normal(A.shape)
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    F = A + g * (0.99 * delta * rng.random((len(A), 1)))
    return check_perturbation_lemma(A, F, ball.center, r, delta, samples, int(rng.integers(2 ** 31)))


def trial_ball_sum_cover(rng, d, samples):
    A, ball = _solid(rng, d)
    r = ball.radius * rng.uniform(0.3, 1.0)
    R = diameter(A) ** 2 / r * rng.uniform(1.01, 3.0)
    z = rng.uniform(-2, 2, size=d)
    return check_ball_sum_cover(A, ball.center, r, R, z, samples, int(rng.integers(2 ** 31)))


TRIALS: Dict[str, Callable] = {
    "sum_absorption": trial_sum_absorption,
    "distance_bound": trial_distance_bound,
    "perturbation": trial_perturbation,
    "ball_sum_cover": trial_ball_sum_cover,
}


@dataclass(frozen=True)
class TrialSummary:
    lemma: str
    dim: int
    trials: int
    failures: int


def run_trials(lemma: str, d: int, trials: int, seed: int = 0, samples: int = 64) -> TrialSummary:
    rng = np.random.default_rng([seed, d, sorted(TRIALS).index(lemma)])
    fn = TRIALS[lemma]
    failures = sum(not fn(rng, d, samples) for _ in range(trials))
    return TrialSummary(lemma, d, trials, failures)
