"""Predictive marginals and classification metrics (accuracy, NLL, ECE).

The predictive distribution averages softmax outputs over draws from the
base density pushed through the trained group element:
p(y | x) ~= (1/S) sum_s p(y | g . theta_s, x) with theta_s ~ q0.
"""

from __future__ import annotations

import numpy as np

from .distributions import BaseDistribution
from .groups import GroupElement, act_on_params
from .network import MLP, SignMask

ECE_BINS = 15


def predictive_marginal(net: MLP, mask: SignMask, elem: GroupElement,
                        dist: BaseDistribution, x: np.ndarray,
                        n_draws: int = 32, seed: int = 0) -> np.ndarray:
    """Averaged class probabilities over n_draws base-density samples.

    Draws come from one counter-based stream, and the average runs in
    sample order, so results are reproducible for a fixed seed.  A point
    mass with a single draw reduces to deterministic evaluation at the
    group element.
    """
    if n_draws < 1:
        raise ValueError("need at least one predictive sample")
    x = np.asarray(x, dtype=float)
    eps = dist.sample((n_draws, net.num_params), seed)
    total = None
    for s in range(n_draws):
        theta = act_on_params(elem, eps[s])
        probs = net.predict_proba(theta, mask, x)
        total = probs if total is None else total + probs
    return total / n_draws


def accuracy(probs: np.ndarray, y: np.ndarray) -> float:
    """Top-1 accuracy in percent."""
    _check_labeled(probs, y)
    return 100.0 * float(np.mean(probs.argmax(axis=1) == y))


def negative_log_likelihood(probs: np.ndarray, y: np.ndarray) -> float:
    """Mean negative log of the true-class averaged probability."""
    _check_labeled(probs, y)
    picked = probs[np.arange(len(y)), y]
    return float(-np.log(np.maximum(picked, 1e-300)).mean())


def expected_calibration_error(probs: np.ndarray, y: np.ndarray,
                               n_bins: int = ECE_BINS) -> float:
    """Equal-width-binned gap between max-softmax confidence and accuracy."""
    _check_labeled(probs, y)
    conf = probs.max(axis=1)
    correct = probs.argmax(axis=1) == y
    bins = np.clip((conf * n_bins).astype(int), 0, n_bins - 1)
    total = len(y)
    ece = 0.0
    for b in range(n_bins):
        in_bin = bins == b
        count = int(in_bin.sum())
        if count == 0:
            continue
        gap = abs(correct[in_bin].mean() - conf[in_bin].mean())
        ece += (count / total) * gap
    return float(ece)


def evaluate(net: MLP, mask: SignMask, elem: GroupElement,
             dist: BaseDistribution, x: np.ndarray, y: np.ndarray,
             n_draws: int = 32, seed: int = 0) -> tuple[float, float, float]:
    """(accuracy %, NLL, ECE) of the predictive marginal on a labeled set."""
    if len(x) == 0:
        raise ValueError("empty evaluation set")
    probs = predictive_marginal(net, mask, elem, dist, x, n_draws, seed)
    y = np.asarray(y)
    return (accuracy(probs, y), negative_log_likelihood(probs, y),
            expected_calibration_error(probs, y))


def _check_labeled(probs: np.ndarray, y: np.ndarray):
    if len(probs) == 0:
        raise ValueError("empty evaluation set")
    if len(probs) != len(y):
        raise ValueError("probability rows and labels differ in length")
