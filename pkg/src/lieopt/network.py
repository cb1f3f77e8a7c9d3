"""A small tanh MLP with manual reverse-mode gradients and frozen sign masks.

Parameters live in one flat vector theta.  The flattening order is fixed:
layer by layer, the weight matrix first in row-major order (shape
(fan_in, fan_out)), then the bias vector.  The forward pass uses the
effective weights sign * theta, so networks trained on positive magnitudes
keep every effective-weight sign for the whole run.

Sign-mask modes: ``none`` (all ones), ``per_weight`` (independent signs),
and ``per_node`` (one sign per source neuron, shared by all its outgoing
weights; bias entries keep independent signs since they emanate from no
neuron).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .groups import GroupElement, GroupKind

MASK_MODES = ("none", "per_weight", "per_node")


@dataclass(frozen=True)
class SignMask:
    """Immutable +-1 vector over the flat parameter layout."""

    signs: np.ndarray
    mode: str

    def __post_init__(self):
        signs = np.asarray(self.signs, dtype=float)
        signs.setflags(write=False)
        object.__setattr__(self, "signs", signs)
        if self.mode not in MASK_MODES:
            raise ValueError(f"unknown mask mode {self.mode!r}")
        if not np.all(np.abs(signs) == 1.0):
            raise ValueError("mask entries must be +-1")


@dataclass(frozen=True)
class LossSpec:
    """Squared-norm regularizer coefficient and full dataset size.

    The total objective decomposes as sum_i l_i(theta) + c ||theta||^2;
    minibatch gradients carry (1/n) of the data term and (1/N) of the
    regularizer.
    """

    reg_coeff: float = 0.0
    dataset_size: int = 1


class MLP:
    """Fully connected tanh network with a softmax cross-entropy head."""

    def __init__(self, layer_sizes: Sequence[int]):
        if len(layer_sizes) < 2 or any(s < 1 for s in layer_sizes):
            raise ValueError("need at least input and output layers of size >= 1")
        self.layer_sizes = tuple(int(s) for s in layer_sizes)
        self._spans = []
        offset = 0
        for n_in, n_out in zip(self.layer_sizes, self.layer_sizes[1:]):
            w = slice(offset, offset + n_in * n_out)
            offset += n_in * n_out
            b = slice(offset, offset + n_out)
            offset += n_out
            self._spans.append((w, b, n_in, n_out))
        self.num_params = offset

    @property
    def num_layers(self) -> int:
        return len(self._spans)

    def weight_slice(self, layer: int) -> tuple[slice, int, int]:
        """Flat span and shape of one layer's weight matrix."""
        if not 0 <= layer < self.num_layers:
            raise ValueError(f"layer index {layer} out of range")
        w, _, n_in, n_out = self._spans[layer]
        return w, n_in, n_out

    def _check_theta(self, theta: np.ndarray, mask: SignMask) -> np.ndarray:
        theta = np.asarray(theta, dtype=float)
        if theta.shape[-1] != self.num_params:
            raise ValueError(
                f"parameter vector has {theta.shape[-1]} entries, "
                f"expected {self.num_params}")
        if mask.mode != "none" and np.any(theta <= 0.0):
            raise ValueError("magnitudes must stay positive under an active mask")
        return theta

    def _effective(self, theta: np.ndarray, mask: SignMask) -> np.ndarray:
        if mask.mode == "none":
            return theta
        return mask.signs * theta

    def _forward_pass(self, theta: np.ndarray, mask: SignMask, x: np.ndarray):
        """Returns hidden activations (post-tanh) and output logits."""
        theta = self._check_theta(theta, mask)
        eff = self._effective(theta, mask)
        x = np.asarray(x, dtype=float)
        if x.ndim != 2 or x.shape[1] != self.layer_sizes[0]:
            raise ValueError("input batch must have shape (B, input_dim)")
        activations = [x]
        a = x
        for i, (w, b, n_in, n_out) in enumerate(self._spans):
            weight = eff[..., w].reshape(*eff.shape[:-1], n_in, n_out)
            bias = eff[..., b]
            z = a @ weight + bias[..., None, :]
            if i < self.num_layers - 1:
                a = np.tanh(z)
                activations.append(a)
            else:
                a = z
        return activations, a

    def forward(self, theta: np.ndarray, mask: SignMask,
                x: np.ndarray) -> np.ndarray:
        """Logits for an input batch; theta may be (P,) or a stack (K, P)."""
        _, logits = self._forward_pass(theta, mask, x)
        return logits

    def predict_proba(self, theta: np.ndarray, mask: SignMask,
                      x: np.ndarray) -> np.ndarray:
        return _softmax(self.forward(theta, mask, x))

    def loss(self, theta: np.ndarray, mask: SignMask, x: np.ndarray,
             y: np.ndarray) -> np.ndarray:
        """Mean softmax cross-entropy over the batch (per theta row)."""
        logits = self.forward(theta, mask, x)
        return _cross_entropy(logits, y)

    def loss_and_grad(self, theta: np.ndarray, mask: SignMask, x: np.ndarray,
                      y: np.ndarray):
        """Mean cross-entropy and its gradient with respect to theta.

        The chain rule through the mask multiplies each coordinate's
        gradient by its sign.
        """
        activations, logits = self._forward_pass(theta, mask, x)
        theta = np.asarray(theta, dtype=float)
        eff = self._effective(theta, mask)
        y = np.asarray(y)
        batch = x.shape[0]
        probs = _softmax(logits)
        loss = _nll_from_probs(probs, y)
        delta = probs.copy()
        one_hot_rows = np.arange(batch)
        delta[..., one_hot_rows, y] -= 1.0
        delta /= batch

        grad = np.empty(delta.shape[:-2] + (self.num_params,))
        for i in reversed(range(self.num_layers)):
            w, b, n_in, n_out = self._spans[i]
            a_prev = activations[i]
            grad_w = np.swapaxes(a_prev, -1, -2) @ delta
            grad[..., w] = grad_w.reshape(*grad_w.shape[:-2], n_in * n_out)
            grad[..., b] = delta.sum(axis=-2)
            if i > 0:
                weight = eff[..., w].reshape(*eff.shape[:-1], n_in, n_out)
                upstream = delta @ np.swapaxes(weight, -1, -2)
                delta = upstream * (1.0 - a_prev * a_prev)
        if mask.mode != "none":
            grad = grad * mask.signs
        return loss, grad


def _softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=-1, keepdims=True)


def _nll_from_probs(probs: np.ndarray, y: np.ndarray) -> np.ndarray:
    rows = np.arange(probs.shape[-2])
    picked = probs[..., rows, y]
    return -np.log(np.maximum(picked, 1e-300)).mean(axis=-1)


def _cross_entropy(logits: np.ndarray, y: np.ndarray) -> np.ndarray:
    return _nll_from_probs(_softmax(logits), np.asarray(y))


def init_params(net: MLP, mask_mode: str, group_kind: GroupKind, seed: int,
                scale_init: float = 1.0, magnitude_floor: float = 1e-4
                ) -> tuple[GroupElement, SignMask]:
    """Draw the starting group element and the frozen sign mask.

    Weights come from fan-in-scaled Gaussians (std 1/sqrt(fan_in)) and
    biases start at zero for the translation and affine groups.  The
    multiplicative group takes the absolute draws floored at
    ``magnitude_floor`` (biases included).  The affine scale starts at
    ``scale_init`` times ones.
    """
    if mask_mode not in MASK_MODES:
        raise ValueError(f"unknown mask mode {mask_mode!r}")
    rng = np.random.Generator(np.random.Philox(seed))
    theta = np.empty(net.num_params)
    for w, b, n_in, n_out in net._spans:
        std = 1.0 / np.sqrt(n_in)
        draws = rng.normal(0.0, std, n_in * n_out)
        if group_kind is GroupKind.MULTIPLICATIVE:
            theta[w] = np.maximum(np.abs(draws), magnitude_floor)
            theta[b] = np.maximum(np.abs(rng.normal(0.0, std, n_out)),
                                  magnitude_floor)
        else:
            theta[w] = draws
            theta[b] = 0.0

    signs = np.ones(net.num_params)
    if mask_mode == "per_weight":
        signs = rng.integers(0, 2, net.num_params) * 2.0 - 1.0
    elif mask_mode == "per_node":
        for w, b, n_in, n_out in net._spans:
            per_source = rng.integers(0, 2, n_in) * 2.0 - 1.0
            signs[w] = np.repeat(per_source, n_out)
            signs[b] = rng.integers(0, 2, n_out) * 2.0 - 1.0
    mask = SignMask(signs, mask_mode)

    if group_kind is GroupKind.ADDITIVE:
        return GroupElement(group_kind, theta), mask
    if group_kind is GroupKind.MULTIPLICATIVE:
        return GroupElement(group_kind, theta), mask
    return GroupElement(group_kind, np.full(net.num_params, scale_init),
                        theta), mask


def sparsity_metric(theta: np.ndarray, mask: SignMask, net: MLP,
                    layer: int) -> float:
    """Fraction of a layer's effective weights below 1% of the layer max."""
    w, n_in, n_out = net.weight_slice(layer)
    weights = np.abs((mask.signs * np.asarray(theta, dtype=float))[w])
    if weights.size == 0:
        raise ValueError("layer has no weights")
    threshold = 0.01 * weights.max()
    return float(np.mean(weights < threshold))
