"""Mean-field base densities with samplers, scores, and Fisher constants.

Each family is a fixed per-coordinate reference density; posterior
candidates arise by pushing it forward under a group element (see
:func:`pushforward_pdf`).  Fisher-constant queries return the analytic
value where one is known, fall back to adaptive quadrature otherwise, and
return ``None`` for non-smooth families (uniform, point mass) to signal
that the constant is absorbed into the step size.

Samplers are counter-based (Philox) and take an explicit seed, so
concurrent sampling with distinct seeds is deterministic.
"""

from __future__ import annotations

import math
from abc import ABC, abstractmethod
from enum import Enum

import numpy as np

from .groups import GroupElement, GroupKind
from .quadrature import integrate


class Support(Enum):
    REAL_LINE = "real_line"
    POSITIVE = "positive"
    POINT = "point"


class BaseDistribution(ABC):
    """A per-coordinate reference density q0 with score and Fisher constants."""

    support: Support
    is_even: bool
    #: open interval carrying the density's mass; used by score validation
    #: and quadrature.
    domain: tuple[float, float]

    @abstractmethod
    def pdf(self, x: np.ndarray) -> np.ndarray:
        ...

    @abstractmethod
    def score(self, x: np.ndarray) -> np.ndarray:
        """The logarithmic derivative q0'(x)/q0(x) on the support interior."""

    @abstractmethod
    def _draw(self, rng: np.random.Generator, size) -> np.ndarray:
        ...

    def dpdf(self, x: np.ndarray) -> np.ndarray:
        """Density derivative q0'(x), via the score."""
        return self.score(x) * self.pdf(x)

    def sample(self, size, seed: int) -> np.ndarray:
        """i.i.d. draws of the given shape from a Philox stream keyed by seed."""
        rng = np.random.Generator(np.random.Philox(seed))
        return self._draw(rng, size)

    def _check_in_support(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        lo, hi = self.domain
        if np.any(x <= lo) or np.any(x >= hi):
            raise ValueError(f"point outside the open support ({lo:g}, {hi:g})")
        return x

    # Fisher constants ----------------------------------------------------

    def fisher_additive(self) -> float | None:
        """The translation-family Fisher constant: integral of score^2 * q0."""
        if self.support is not Support.REAL_LINE:
            raise ValueError("translation Fisher constant needs a full-line density")
        return integrate(lambda x: self.score(x) ** 2 * self.pdf(x),
                         *self.domain, tol=1e-9)

    def fisher_multiplicative(self) -> float | None:
        """The scaling-family Fisher constant: integral of (1 + x score)^2 q0."""
        if self.support is not Support.POSITIVE:
            raise ValueError("scaling Fisher constant needs a positive-support density")
        return integrate(lambda x: (1.0 + x * self.score(x)) ** 2 * self.pdf(x),
                         *self.domain, tol=1e-9)

    def fisher_affine(self) -> tuple[float, float, float] | None:
        """The (c_X, B, c_y) block of the scale-plus-shift family.

        B vanishes for even densities; c_y coincides with the translation
        constant.
        """
        if self.support is not Support.REAL_LINE:
            raise ValueError("affine Fisher block needs a full-line density")
        c_x = integrate(lambda x: (1.0 + x * self.score(x)) ** 2 * self.pdf(x),
                        *self.domain, tol=1e-9)
        if self.is_even:
            b = 0.0
        else:
            b = integrate(lambda x: (1.0 + x * self.score(x)) * self.dpdf(x),
                          *self.domain, tol=1e-9)
        return c_x, b, self.fisher_additive()


class Gaussian(BaseDistribution):
    """Normal density with standard deviation ``sigma``."""

    support = Support.REAL_LINE
    is_even = True
    domain = (-np.inf, np.inf)

    def __init__(self, sigma: float = 1.0):
        if sigma <= 0:
            raise ValueError("sigma must be positive")
        self.sigma = float(sigma)

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        z = x / self.sigma
        return np.exp(-0.5 * z * z) / (self.sigma * math.sqrt(2.0 * math.pi))

    def score(self, x):
        x = self._check_in_support(x)
        return -x / self.sigma**2

    def _draw(self, rng, size):
        return rng.normal(0.0, self.sigma, size)

    def fisher_additive(self):
        return 1.0 / self.sigma**2

    def fisher_affine(self):
        return 2.0, 0.0, 1.0 / self.sigma**2


class Uniform(BaseDistribution):
    """Uniform density on [-halfwidth, halfwidth].

    The density is not differentiable at its edges, so Fisher-constant
    queries return ``None``: the constant is absorbed into the step size.
    """

    support = Support.REAL_LINE
    is_even = True

    def __init__(self, halfwidth: float = 1.0):
        if halfwidth <= 0:
            raise ValueError("halfwidth must be positive")
        self.halfwidth = float(halfwidth)
        self.domain = (-self.halfwidth, self.halfwidth)

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        inside = np.abs(x) <= self.halfwidth
        return np.where(inside, 0.5 / self.halfwidth, 0.0)

    def score(self, x):
        x = self._check_in_support(x)
        return np.zeros_like(x)

    def _draw(self, rng, size):
        return rng.uniform(-self.halfwidth, self.halfwidth, size)

    def fisher_additive(self):
        return None

    def fisher_affine(self):
        return None


class Laplace(BaseDistribution):
    """Double-exponential density (1/2s) exp(-|x|/s)."""

    support = Support.REAL_LINE
    is_even = True
    domain = (-np.inf, np.inf)

    def __init__(self, scale: float = 1.0):
        if scale <= 0:
            raise ValueError("scale must be positive")
        self.scale = float(scale)

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        return np.exp(-np.abs(x) / self.scale) / (2.0 * self.scale)

    def score(self, x):
        x = self._check_in_support(x)
        return -np.sign(x) / self.scale

    def _draw(self, rng, size):
        return rng.laplace(0.0, self.scale, size)

    def fisher_additive(self):
        return 1.0 / self.scale**2

    def fisher_affine(self):
        # E[(1 - |x|/s)^2] = 1 - 2 E|x|/s + E[x^2]/s^2 = 1 for every s
        return 1.0, 0.0, 1.0 / self.scale**2


class Cauchy(BaseDistribution):
    """Unit Cauchy density; used for Fisher-block verification, not training."""

    support = Support.REAL_LINE
    is_even = True
    domain = (-np.inf, np.inf)

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        return 1.0 / (math.pi * (1.0 + x * x))

    def score(self, x):
        x = self._check_in_support(x)
        return -2.0 * x / (1.0 + x * x)

    def _draw(self, rng, size):
        return rng.standard_cauchy(size)

    def fisher_additive(self):
        return 0.5

    def fisher_affine(self):
        return 0.5, 0.0, 0.5


class Rayleigh(BaseDistribution):
    """Unit Rayleigh density x exp(-x^2/2); the group supplies the scale."""

    support = Support.POSITIVE
    is_even = False
    domain = (0.0, np.inf)

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        return np.where(x > 0.0, x * np.exp(-0.5 * x * x), 0.0)

    def score(self, x):
        x = self._check_in_support(x)
        return 1.0 / x - x

    def _draw(self, rng, size):
        return rng.rayleigh(1.0, size)

    def fisher_multiplicative(self):
        return 4.0


class Exponential(BaseDistribution):
    """Unit exponential density exp(-x); the group supplies the scale."""

    support = Support.POSITIVE
    is_even = False
    domain = (0.0, np.inf)

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        return np.where(x > 0.0, np.exp(-x), 0.0)

    def score(self, x):
        x = self._check_in_support(x)
        return -np.ones_like(x)

    def _draw(self, rng, size):
        return rng.exponential(1.0, size)

    def fisher_multiplicative(self):
        return 1.0


class LogNormal(BaseDistribution):
    """Log-normal density with log-mean ``m`` and log-deviation ``sigma``."""

    support = Support.POSITIVE
    is_even = False
    domain = (0.0, np.inf)

    def __init__(self, m: float = 0.0, sigma: float = 1.0):
        if sigma <= 0:
            raise ValueError("sigma must be positive")
        self.m = float(m)
        self.sigma = float(sigma)

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        pos = x > 0.0
        xp = np.where(pos, x, 1.0)
        z = (np.log(xp) - self.m) / self.sigma
        out = np.where(
            pos,
            np.exp(-0.5 * z * z) / (xp * self.sigma * math.sqrt(2.0 * math.pi)),
            0.0)
        return out

    def score(self, x):
        x = self._check_in_support(x)
        return -(1.0 + (np.log(x) - self.m) / self.sigma**2) / x

    def _draw(self, rng, size):
        return rng.lognormal(self.m, self.sigma, size)


class DiracDelta(BaseDistribution):
    """Point mass at ``point``; the degenerate no-noise family.

    Sampling returns the point itself (0 for translation and affine noise,
    1 for scaling noise).  There is no density, so score queries are
    rejected and Fisher constants report as absorbed into the step size.
    """

    support = Support.POINT
    is_even = False

    def __init__(self, point: float = 0.0):
        self.point = float(point)
        self.domain = (self.point, self.point)
        self.is_even = point == 0.0

    def pdf(self, x):
        raise ValueError("a point mass has no density")

    def score(self, x):
        raise ValueError("a point mass has no score function")

    def _draw(self, rng, size):
        return np.full(size, self.point)

    def fisher_additive(self):
        return None

    def fisher_multiplicative(self):
        return None

    def fisher_affine(self):
        return None


_FAMILIES = {
    "gaussian": Gaussian,
    "uniform": Uniform,
    "laplace": Laplace,
    "cauchy": Cauchy,
    "rayleigh": Rayleigh,
    "exponential": Exponential,
    "lognormal": LogNormal,
    "dirac": DiracDelta,
}


def make_distribution(family: str, scale: float | None = None,
                      point: float | None = None) -> BaseDistribution:
    """Build a base density by name.

    ``scale`` maps to the family's natural scale parameter (standard
    deviation, halfwidth, Laplace scale, or log-deviation).  Rayleigh and
    exponential are unit-shape families -- the group carries their scale --
    so a non-unit scale is rejected.  ``point`` applies to ``dirac`` only.
    """
    name = family.strip().lower()
    if name not in _FAMILIES:
        raise ValueError(f"unknown base distribution {family!r}; "
                         f"choose from {sorted(_FAMILIES)}")
    if name == "dirac":
        return DiracDelta(0.0 if point is None else point)
    if point is not None:
        raise ValueError("point applies to the dirac family only")
    if name in ("rayleigh", "exponential"):
        if scale is not None and scale != 1.0:
            raise ValueError(f"{name} is a unit-shape family; the group "
                             "element carries the scale")
        return _FAMILIES[name]()
    if name == "cauchy":
        if scale is not None and scale != 1.0:
            raise ValueError("cauchy is supported with unit scale only")
        return Cauchy()
    if name == "lognormal":
        return LogNormal(0.0, 1.0 if scale is None else scale)
    return _FAMILIES[name](1.0 if scale is None else scale)


def pushforward_pdf(dist: BaseDistribution, elem: GroupElement,
                    theta: np.ndarray) -> np.ndarray:
    """Joint density of the transformed family at parameter vectors.

    ``theta`` has shape (..., P); the result drops the last axis.  The
    density is the mean-field product of per-coordinate pushforwards of the
    base density under the group action.
    """
    theta = np.asarray(theta, dtype=float)
    if theta.shape[-1] != elem.dim:
        raise ValueError("parameter dimension mismatch")
    if elem.kind is GroupKind.ADDITIVE:
        vals = dist.pdf(theta - elem.g)
        return np.prod(vals, axis=-1)
    if elem.kind is GroupKind.MULTIPLICATIVE:
        vals = dist.pdf(theta / elem.g) / elem.g
        return np.prod(vals, axis=-1)
    vals = dist.pdf((theta - elem.b) / elem.g) / elem.g
    return np.prod(vals, axis=-1)
