"""Exponential-map optimizers with momentum and learning-rate schedules.

Each optimizer owns a group element, one momentum slot per tangent
component (two for the affine group), and a schedule.  Steps follow the
update g <- g exp(-alpha M) after blending M <- (1 - beta) Y + beta M in
the Lie algebra.  Scale coordinates can never leave (0, inf): exponents
are clamped before exponentiation and the resulting scales are clipped to
the positive float64 range.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .groups import (EXP_CLAMP, GroupElement, GroupKind, TangentVector,
                     group_step, phi, zero_tangent)

_SCALE_FLOOR = np.finfo(float).tiny
_SCALE_CEIL = np.finfo(float).max


@dataclass(frozen=True)
class ConstantSchedule:
    base_lr: float
    total_steps: int | None = None

    def at(self, step: int) -> float:
        if step < 0 or (self.total_steps is not None and step > self.total_steps):
            raise ValueError("step index outside the schedule range")
        return self.base_lr


@dataclass(frozen=True)
class CosineSchedule:
    """Linear warmup from zero, then cosine decay to zero at total_steps."""

    base_lr: float
    total_steps: int
    warmup_steps: int = 0

    def at(self, step: int) -> float:
        if step < 0 or step > self.total_steps:
            raise ValueError("step index outside the schedule range")
        if step < self.warmup_steps:
            return self.base_lr * step / self.warmup_steps
        span = self.total_steps - self.warmup_steps
        if span == 0:
            return self.base_lr
        progress = (step - self.warmup_steps) / span
        return self.base_lr * 0.5 * (1.0 + np.cos(np.pi * progress))


def blend_momentum(momentum: TangentVector, direction: TangentVector,
                   beta: float) -> TangentVector:
    """M <- (1 - beta) Y + beta M in the Lie algebra.

    beta = 0 returns the direction itself so memoryless updates are
    bitwise identical to never having used momentum.
    """
    if not 0.0 <= beta < 1.0:
        raise ValueError("momentum coefficient must lie in [0, 1)")
    if momentum.kind is not direction.kind:
        raise ValueError("momentum and direction kinds differ")
    if beta == 0.0:
        return direction
    x = (1.0 - beta) * direction.X + beta * momentum.X
    if momentum.kind is GroupKind.DIAG_AFFINE:
        return TangentVector(momentum.kind, x,
                             (1.0 - beta) * direction.y + beta * momentum.y)
    return TangentVector(momentum.kind, x)


def _clip_scales(elem: GroupElement) -> GroupElement:
    if elem.kind is GroupKind.ADDITIVE:
        return elem
    g = np.clip(elem.g, _SCALE_FLOOR, _SCALE_CEIL)
    if elem.kind is GroupKind.MULTIPLICATIVE:
        return GroupElement(elem.kind, g)
    return GroupElement(elem.kind, g, elem.b)


class _OptimizerBase:
    def __init__(self, element: GroupElement, schedule):
        self.element = element
        self.schedule = schedule
        self.step_count = 0

    @property
    def learning_rate(self) -> float:
        return self.schedule.at(self.step_count)


class AdditiveOptimizer(_OptimizerBase):
    """Translation updates g <- g - alpha M; the exponential map is linear."""

    def __init__(self, element: GroupElement, schedule, beta: float = 0.8):
        if element.kind is not GroupKind.ADDITIVE:
            raise ValueError("additive optimizer needs a translation element")
        super().__init__(element, schedule)
        self.beta = beta
        self.momentum = zero_tangent(element.kind, element.dim)

    def step(self, direction: TangentVector) -> GroupElement:
        alpha = self.learning_rate
        self.momentum = blend_momentum(self.momentum, direction, self.beta)
        self.element = GroupElement(GroupKind.ADDITIVE,
                                    self.element.g - alpha * self.momentum.X)
        self.step_count += 1
        return self.element


class MultiplicativeOptimizer(_OptimizerBase):
    """Scaling updates g <- g exp(-alpha M); positivity holds for any step."""

    def __init__(self, element: GroupElement, schedule, beta: float = 0.9):
        if element.kind is not GroupKind.MULTIPLICATIVE:
            raise ValueError("multiplicative optimizer needs a scaling element")
        super().__init__(element, schedule)
        self.beta = beta
        self.momentum = zero_tangent(element.kind, element.dim)

    def step(self, direction: TangentVector) -> GroupElement:
        alpha = self.learning_rate
        self.momentum = blend_momentum(self.momentum, direction, self.beta)
        if alpha > 0.0:
            self.element = _clip_scales(
                group_step(self.element, self.momentum, alpha))
        self.step_count += 1
        return self.element


class AffineOptimizer(_OptimizerBase):
    """Scale-plus-shift updates with separate momenta for the two parts.

    The shift momentum blends with beta1 and the scale momentum with
    beta2; the shift updates before the scale, so the pre-update scale
    enters the shift rule.
    """

    def __init__(self, element: GroupElement, schedule,
                 beta1: float = 0.8, beta2: float = 0.999):
        if element.kind is not GroupKind.DIAG_AFFINE:
            raise ValueError("affine optimizer needs a scale-plus-shift element")
        super().__init__(element, schedule)
        self.beta1 = beta1
        self.beta2 = beta2
        zero = zero_tangent(GroupKind.MULTIPLICATIVE, element.dim)
        self.momentum_scale = zero
        self.momentum_shift = zero

    def step(self, direction: TangentVector) -> GroupElement:
        if direction.kind is not GroupKind.DIAG_AFFINE:
            raise ValueError("affine optimizer expects an affine tangent")
        alpha = self.learning_rate
        shift_dir = TangentVector(GroupKind.MULTIPLICATIVE, direction.y)
        scale_dir = TangentVector(GroupKind.MULTIPLICATIVE, direction.X)
        self.momentum_shift = blend_momentum(self.momentum_shift, shift_dir,
                                             self.beta1)
        self.momentum_scale = blend_momentum(self.momentum_scale, scale_dir,
                                             self.beta2)
        if alpha > 0.0:
            m_u = self.momentum_scale.X
            m_v = self.momentum_shift.X
            scale, shift = self.element.g, self.element.b
            exponent = np.clip(-alpha * m_u, -EXP_CLAMP, EXP_CLAMP)
            # (exp(-alpha m_u) - 1)/m_u == -alpha phi(-alpha m_u) away from the
            # clamp; under the clamp divide directly (m_u is large there)
            clamped = np.abs(alpha * m_u) > EXP_CLAMP
            safe_mu = np.where(clamped, m_u, 1.0)
            ratio = np.where(clamped, np.expm1(exponent) / safe_mu,
                             -alpha * phi(exponent))
            new_shift = shift + scale * ratio * m_v
            new_scale = np.clip(scale * np.exp(exponent),
                                _SCALE_FLOOR, _SCALE_CEIL)
            self.element = GroupElement(GroupKind.DIAG_AFFINE, new_scale,
                                        new_shift)
        self.step_count += 1
        return self.element
