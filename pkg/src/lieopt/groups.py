"""The three parameter-transformation groups and their exponential-map updates.

Supported groups, each acting coordinatewise on a parameter vector of
dimension P:

* additive        -- translations of R^P, action  g . theta = theta + g
* multiplicative  -- positive scalings of R_{>0}^P, action  g . theta = g * theta
* diag_affine     -- scale-plus-shift pairs (A, b) with A > 0, action
                     (A, b) . theta = A * theta + b

All operations are pure functions of their inputs and safe to call from
multiple threads.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

# Exponents are clamped to this range before exponentiation so that scale
# coordinates remain strictly inside (0, inf) in float64.
EXP_CLAMP = 700.0

# Below this magnitude (e^x - 1)/x is evaluated by its Taylor polynomial.
PHI_TAYLOR_CUTOFF = 1e-4


class GroupKind(Enum):
    ADDITIVE = "additive"
    MULTIPLICATIVE = "multiplicative"
    DIAG_AFFINE = "diag_affine"


def _vector(x) -> np.ndarray:
    v = np.asarray(x, dtype=float)
    if v.ndim == 0:
        v = v.reshape(1)
    if v.ndim != 1:
        raise ValueError(f"expected a vector, got shape {v.shape}")
    return v


@dataclass(frozen=True)
class GroupElement:
    """A point on one of the groups.

    ``g`` is the translation vector (additive) or the strictly positive
    scale vector (multiplicative and diag_affine).  ``b`` is the shift
    vector and is present exactly for diag_affine elements.
    """

    kind: GroupKind
    g: np.ndarray
    b: np.ndarray | None = None

    def __post_init__(self):
        object.__setattr__(self, "g", _vector(self.g))
        if self.kind is GroupKind.DIAG_AFFINE:
            if self.b is None:
                raise ValueError("diag_affine element requires a shift vector b")
            object.__setattr__(self, "b", _vector(self.b))
            if self.b.shape != self.g.shape:
                raise ValueError("scale and shift dimensions differ")
        elif self.b is not None:
            raise ValueError(f"{self.kind.value} element takes no shift vector")
        if self.kind is not GroupKind.ADDITIVE and np.any(self.g <= 0.0):
            raise ValueError("scale entries must be strictly positive")

    @property
    def dim(self) -> int:
        return self.g.shape[0]


@dataclass(frozen=True)
class TangentVector:
    """An element of the Lie algebra (tangent space at the identity).

    Entries are unconstrained reals.  ``y`` is the shift component and is
    present exactly for diag_affine tangents.
    """

    kind: GroupKind
    X: np.ndarray
    y: np.ndarray | None = None

    def __post_init__(self):
        object.__setattr__(self, "X", _vector(self.X))
        if self.kind is GroupKind.DIAG_AFFINE:
            if self.y is None:
                raise ValueError("diag_affine tangent requires a shift component y")
            object.__setattr__(self, "y", _vector(self.y))
            if self.y.shape != self.X.shape:
                raise ValueError("tangent component dimensions differ")
        elif self.y is not None:
            raise ValueError(f"{self.kind.value} tangent takes no shift component")

    @property
    def dim(self) -> int:
        return self.X.shape[0]

    def scaled(self, c: float) -> "TangentVector":
        if self.kind is GroupKind.DIAG_AFFINE:
            return TangentVector(self.kind, c * self.X, c * self.y)
        return TangentVector(self.kind, c * self.X)


def zero_tangent(kind: GroupKind, dim: int) -> TangentVector:
    z = np.zeros(dim)
    if kind is GroupKind.DIAG_AFFINE:
        return TangentVector(kind, z, z.copy())
    return TangentVector(kind, z)


def _check_kinds(a, b):
    if a.kind is not b.kind:
        raise ValueError(f"kind mismatch: {a.kind.value} vs {b.kind.value}")
    if a.dim != b.dim:
        raise ValueError(f"dimension mismatch: {a.dim} vs {b.dim}")


def identity(kind: GroupKind, dim: int) -> GroupElement:
    """The identity element: zeros, ones, or (ones, zeros)."""
    if dim < 1:
        raise ValueError("dimension must be at least 1")
    if kind is GroupKind.ADDITIVE:
        return GroupElement(kind, np.zeros(dim))
    if kind is GroupKind.MULTIPLICATIVE:
        return GroupElement(kind, np.ones(dim))
    return GroupElement(kind, np.ones(dim), np.zeros(dim))


def compose(g1: GroupElement, g2: GroupElement) -> GroupElement:
    """Group law applied coordinatewise; (A1,b1)(A2,b2) = (A1 A2, A1 b2 + b1)."""
    _check_kinds(g1, g2)
    if g1.kind is GroupKind.ADDITIVE:
        return GroupElement(g1.kind, g1.g + g2.g)
    if g1.kind is GroupKind.MULTIPLICATIVE:
        return GroupElement(g1.kind, g1.g * g2.g)
    return GroupElement(g1.kind, g1.g * g2.g, g1.g * g2.b + g1.b)


def inverse(g: GroupElement) -> GroupElement:
    """The group inverse; for diag_affine this is (A^-1, -A^-1 b)."""
    if g.kind is GroupKind.ADDITIVE:
        return GroupElement(g.kind, -g.g)
    if g.kind is GroupKind.MULTIPLICATIVE:
        return GroupElement(g.kind, 1.0 / g.g)
    inv = 1.0 / g.g
    return GroupElement(g.kind, inv, -inv * g.b)


def act_on_params(g: GroupElement, theta: np.ndarray) -> np.ndarray:
    """Apply the group action to a parameter vector (or a stack of them).

    ``theta`` may carry leading batch axes; the action applies to the last
    axis.  Multiplicative elements only act on strictly positive parameters.
    """
    theta = np.asarray(theta, dtype=float)
    if theta.shape[-1] != g.dim:
        raise ValueError(f"parameter dimension {theta.shape[-1]} != {g.dim}")
    if g.kind is GroupKind.ADDITIVE:
        return theta + g.g
    if g.kind is GroupKind.MULTIPLICATIVE:
        if np.any(theta <= 0.0):
            raise ValueError("multiplicative action requires strictly positive parameters")
        return g.g * theta
    return g.g * theta + g.b


def phi(x: np.ndarray) -> np.ndarray:
    """(e^x - 1)/x, with a fourth-order Taylor branch near zero.

    The switch point 1e-4 keeps the relative error of the polynomial below
    float64 resolution while avoiding the 0/0 form at x = 0.
    """
    x = np.asarray(x, dtype=float)
    small = np.abs(x) < PHI_TAYLOR_CUTOFF
    safe = np.where(small, 1.0, x)
    exact = np.expm1(safe) / safe
    taylor = 1.0 + x * (0.5 + x * (1.0 / 6.0 + x * (1.0 / 24.0 + x / 120.0)))
    return np.where(small, taylor, exact)


def exp_map(v: TangentVector) -> GroupElement:
    """Exponential map from the Lie algebra onto the group.

    Additive: the identity map on vectors (bitwise).  Multiplicative:
    coordinatewise e^X.  Diag-affine: (e^X, phi(X) * y).  Scale exponents
    are clamped to +-EXP_CLAMP so the result stays strictly positive and
    finite in float64.
    """
    if v.kind is GroupKind.ADDITIVE:
        return GroupElement(v.kind, v.X.copy())
    x = np.clip(v.X, -EXP_CLAMP, EXP_CLAMP)
    if v.kind is GroupKind.MULTIPLICATIVE:
        return GroupElement(v.kind, np.exp(x))
    return GroupElement(v.kind, np.exp(x), phi(x) * v.y)


def adjoint_act(g: GroupElement, v: TangentVector, theta: np.ndarray) -> np.ndarray:
    """Evaluate (Ad_g v) . theta, the conjugated infinitesimal action.

    The additive and multiplicative groups are commutative, so Ad_g is the
    identity there; for diag_affine, Ad_(A,b)(X, y) . theta = X (theta - b) + A y.
    """
    _check_kinds(g, v)
    theta = np.asarray(theta, dtype=float)
    if theta.shape[-1] != g.dim:
        raise ValueError(f"parameter dimension {theta.shape[-1]} != {g.dim}")
    if g.kind is GroupKind.ADDITIVE:
        return np.broadcast_to(v.X, theta.shape).copy()
    if g.kind is GroupKind.MULTIPLICATIVE:
        return v.X * theta
    return v.X * (theta - g.b) + g.g * v.y


def infinitesimal_act(v: TangentVector, theta: np.ndarray) -> np.ndarray:
    """Evaluate X . theta = d/dt exp(tX) . theta at t = 0."""
    theta = np.asarray(theta, dtype=float)
    if v.kind is GroupKind.ADDITIVE:
        return np.broadcast_to(v.X, theta.shape).copy()
    if v.kind is GroupKind.MULTIPLICATIVE:
        return v.X * theta
    return v.X * theta + v.y


def group_step(g: GroupElement, direction: TangentVector, step_size: float) -> GroupElement:
    """One exponential-map descent step: g <- g * exp(-step_size * direction).

    Scale positivity is preserved for any step size by the closure of the
    group (plus the EXP_CLAMP overflow guard).
    """
    _check_kinds(g, direction)
    if step_size <= 0.0:
        raise ValueError("step size must be positive")
    return compose(g, exp_map(direction.scaled(-step_size)))
