"""Monte-Carlo estimators of the natural-gradient update directions.

Each estimator draws K noise vectors from the base density, pushes them
through the group action to get parameter samples, and averages the
reparameterized per-sample terms.  The entropy contribution enters in
closed form (0 for translations, a constant -1 per coordinate for
scalings), so only the loss gradient is ever sampled.

A point-mass base short-circuits to a single deterministic evaluation,
which makes the degenerate cases exact rather than averaged.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .distributions import BaseDistribution, Support, pushforward_pdf
from .groups import (GroupElement, GroupKind, TangentVector, act_on_params,
                     adjoint_act)
from .quadrature import integrate


@dataclass(frozen=True)
class MCConfig:
    """Sample count K, stream seed, and temperature for one estimate."""

    n_samples: int
    seed: int
    temperature: float = 0.0

    def __post_init__(self):
        if self.n_samples < 1:
            raise ValueError("need at least one MC sample")
        if self.temperature < 0.0:
            raise ValueError("temperature must be nonnegative")


@dataclass(frozen=True)
class GradientProvider:
    """Minibatch gradient source.

    ``gradient(theta, batch)`` returns the combined gradient
    (1/n) sum_{j in batch} grad l_j(theta) + (1/N) grad R(theta), for theta
    of shape (P,) or a stack (K, P) evaluated row-wise.  ``dataset_size``
    is N, the full dataset size.
    """

    gradient: Callable[[np.ndarray, np.ndarray], np.ndarray]
    dataset_size: int


def _check_group(elem: GroupElement, kind: GroupKind):
    if elem.kind is not kind:
        raise ValueError(f"expected a {kind.value} element, got {elem.kind.value}")


def additive_direction(provider: GradientProvider, dist: BaseDistribution,
                       elem: GroupElement, cfg: MCConfig,
                       batch: np.ndarray) -> TangentVector:
    """Average gradient at K translated samples g + eps_k."""
    _check_group(elem, GroupKind.ADDITIVE)
    if dist.support is Support.POINT:
        theta = elem.g if dist.point == 0.0 else elem.g + dist.point
        return TangentVector(elem.kind, provider.gradient(theta, batch))
    if dist.support is not Support.REAL_LINE:
        raise ValueError("translation noise needs a full-line base density")
    eps = dist.sample((cfg.n_samples, elem.dim), cfg.seed)
    grads = provider.gradient(elem.g + eps, batch)
    return TangentVector(elem.kind, grads.mean(axis=0))


def multiplicative_direction(provider: GradientProvider, dist: BaseDistribution,
                             elem: GroupElement, cfg: MCConfig,
                             batch: np.ndarray) -> TangentVector:
    """Average of theta_k * grad(theta_k) - tau/N at K scaled samples g*eps_k."""
    _check_group(elem, GroupKind.MULTIPLICATIVE)
    tau_term = cfg.temperature / provider.dataset_size
    if dist.support is Support.POINT:
        if dist.point <= 0.0:
            raise ValueError("scaling noise needs a strictly positive point mass")
        theta = elem.g * dist.point
        return TangentVector(elem.kind,
                             theta * provider.gradient(theta, batch) - tau_term)
    if dist.support is not Support.POSITIVE:
        raise ValueError("scaling noise needs a positive-support base density")
    eps = dist.sample((cfg.n_samples, elem.dim), cfg.seed)
    thetas = elem.g * eps
    grads = provider.gradient(thetas, batch)
    return TangentVector(elem.kind, (thetas * grads).mean(axis=0) - tau_term)


def affine_directions(provider: GradientProvider, dist: BaseDistribution,
                      elem: GroupElement, cfg: MCConfig, batch: np.ndarray,
                      constants: tuple[float, float]) -> TangentVector:
    """Scale and shift directions at K samples theta_k = A eps_k + b.

    ``constants`` are the Fisher block entries (c_X, c_y); the division by
    them happens here, so the optimizer applies the returned components
    verbatim.  The result packs the scale part as X and the shift part as y.
    """
    _check_group(elem, GroupKind.DIAG_AFFINE)
    c_x, c_y = constants
    if c_x <= 0.0 or c_y <= 0.0:
        raise ValueError("Fisher constants must be positive")
    tau_term = cfg.temperature / provider.dataset_size
    scale, shift = elem.g, elem.b
    if dist.support is Support.POINT:
        if dist.point != 0.0:
            raise ValueError("affine noise uses the point mass at zero")
        grad = provider.gradient(shift, batch)
        u = np.full(elem.dim, -tau_term) / c_x
        v = scale * grad / c_y
        return TangentVector(elem.kind, u, v)
    if dist.support is not Support.REAL_LINE:
        raise ValueError("affine noise needs a full-line base density")
    eps = dist.sample((cfg.n_samples, elem.dim), cfg.seed)
    scaled_eps = scale * eps
    grads = provider.gradient(scaled_eps + shift, batch)
    u = ((scaled_eps * grads).mean(axis=0) - tau_term) / c_x
    v = (scale * grads).mean(axis=0) / c_y
    return TangentVector(elem.kind, u, v)


def estimate_direction(provider: GradientProvider, dist: BaseDistribution,
                       elem: GroupElement, cfg: MCConfig, batch: np.ndarray,
                       constants: tuple[float, float] | None = None
                       ) -> TangentVector:
    """Dispatch to the estimator matching the element's group."""
    if elem.kind is GroupKind.ADDITIVE:
        return additive_direction(provider, dist, elem, cfg, batch)
    if elem.kind is GroupKind.MULTIPLICATIVE:
        return multiplicative_direction(provider, dist, elem, cfg, batch)
    if constants is None:
        raise ValueError("affine estimation needs the (c_X, c_y) constants")
    return affine_directions(provider, dist, elem, cfg, batch, constants)


# --- quadrature evaluation of the objective differential -------------------

def _transformed_domain(dist: BaseDistribution, elem: GroupElement):
    lo, hi = dist.domain
    if elem.kind is GroupKind.ADDITIVE:
        return [(lo + gi, hi + gi) for gi in elem.g]
    if elem.kind is GroupKind.MULTIPLICATIVE:
        return [(lo * gi, hi * gi) for gi in elem.g]
    return [(ai * lo + bi if np.isfinite(lo) else lo,
             ai * hi + bi if np.isfinite(hi) else hi)
            for ai, bi in zip(elem.g, elem.b)]


def _nested_integral(f, domains, tol):
    """Recursive tensor quadrature; innermost axis is vectorized."""
    if len(domains) == 1:
        return integrate(lambda xs: f(xs[:, None]), *domains[0], tol=tol)

    def outer(xs):
        out = np.empty_like(xs)
        for i, x in enumerate(xs):
            out[i] = _nested_integral(
                lambda rest: f(np.concatenate(
                    [np.full((rest.shape[0], 1), x), rest], axis=1)),
                domains[1:], tol * 0.1)
        return out

    return integrate(outer, *domains[0], tol=tol)


def energy_differential(dist: BaseDistribution, elem: GroupElement,
                        loss_grad: Callable[[np.ndarray], np.ndarray],
                        temperature: float, v: TangentVector,
                        tol: float = 1e-10) -> float:
    """Differential of the objective E_q[loss] - tau H(q) along a tangent.

    The loss part is the integral of q_g * grad(loss) . (Ad_g v . theta),
    computed by quadrature over the transformed support; the entropy part
    reduces per coordinate to integrals of the base-density derivative.
    Dimensions above 3 are rejected (tensor quadrature only).
    """
    if elem.dim > 3:
        raise ValueError("quadrature differential supports dimension <= 3")
    if dist.support is Support.POINT:
        raise ValueError("a point mass admits no density differential")
    if elem.kind is not v.kind:
        raise ValueError("element and tangent kinds differ")

    domains = _transformed_domain(dist, elem)

    def loss_integrand(theta):
        grads = np.asarray(loss_grad(theta), dtype=float)
        movement = adjoint_act(elem, v, theta)
        return pushforward_pdf(dist, elem, theta) * np.sum(grads * movement,
                                                           axis=-1)

    circled1 = _nested_integral(loss_integrand, domains, tol)

    lo, hi = dist.domain
    if elem.kind is GroupKind.ADDITIVE:
        base = integrate(lambda t: dist.dpdf(t), lo, hi, tol=tol)
        circled2 = float(np.sum(v.X)) * base
    elif elem.kind is GroupKind.MULTIPLICATIVE:
        base = integrate(lambda t: t * dist.dpdf(t), lo, hi, tol=tol)
        circled2 = float(np.sum(v.X)) * base
    else:
        scale_part = integrate(lambda t: t * dist.dpdf(t), lo, hi, tol=tol)
        shift_part = integrate(lambda t: dist.dpdf(t), lo, hi, tol=tol)
        circled2 = float(np.sum(v.X)) * scale_part + float(np.sum(v.y)) * shift_part

    return circled1 + temperature * circled2


def entropy_differential_constant(dist: BaseDistribution,
                                  kind: GroupKind) -> float:
    """Per-coordinate entropy term of the differential, by quadrature.

    Zero for translations (the integral of the density derivative) and -1
    for scalings (integration by parts of t q0'(t)).
    """
    lo, hi = dist.domain
    if kind is GroupKind.ADDITIVE:
        return integrate(lambda t: dist.dpdf(t), lo, hi, tol=1e-10)
    if kind is GroupKind.MULTIPLICATIVE:
        return integrate(lambda t: t * dist.dpdf(t), lo, hi, tol=1e-10)
    raise ValueError("per-coordinate constant applies to the scalar groups")
