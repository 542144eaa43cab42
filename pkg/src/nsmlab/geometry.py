"""Vectors, feasible sets with exact Euclidean projection, and safe normalization.

Every other module works on plain 1-D float64 numpy arrays; the feasible-set
classes here own the projection geometry.  All operations are pure functions
of their inputs and never mutate their arguments.
"""

import math
from dataclasses import dataclass

import numpy as np

# Norms below this count as zero when normalizing a feedback direction.
ZERO_TOL = 1e-12
# Slack used by membership predicates (projection itself is exact).
MEMBERSHIP_TOL = 1e-9

__all__ = [
    "ZERO_TOL",
    "MEMBERSHIP_TOL",
    "as_vector",
    "distance_sq",
    "normalize",
    "Ball",
    "DiagBox",
    "Unconstrained",
    "FeasibleSet",
    "project",
]


def as_vector(x, dim: int | None = None, name: str = "x") -> np.ndarray:
    """Coerce ``x`` to a finite 1-D float64 array, checking dimension if given."""
    v = np.asarray(x, dtype=np.float64)
    if v.ndim == 0:
        v = v.reshape(1)
    if v.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional, got shape {v.shape}")
    if v.size < 1:
        raise ValueError(f"{name} must have at least one entry")
    if not np.all(np.isfinite(v)):
        raise ValueError(f"{name} contains non-finite entries")
    if dim is not None and v.size != dim:
        raise ValueError(f"{name} has dimension {v.size}, expected {dim}")
    return v


def distance_sq(a, b) -> float:
    """Squared Euclidean distance between two vectors of equal dimension."""
    av = as_vector(a, name="a")
    bv = as_vector(b, dim=av.size, name="b")
    d = av - bv
    return float(np.dot(d, d))


def normalize(v, zero_tol: float = ZERO_TOL) -> tuple[np.ndarray, bool]:
    """Return ``(v / ||v||, False)``, or ``(0, True)`` when ``||v|| <= zero_tol``.

    The flag distinguishes a genuine zero direction from a unit one; callers
    must not step along the returned direction when it is set.
    """
    vv = as_vector(v, name="v")
    n = float(np.linalg.norm(vv))
    if n <= zero_tol:
        return np.zeros_like(vv), True
    return vv / n, False


@dataclass(frozen=True, eq=False)
class Ball:
    """Euclidean ball ``{x : ||x - center|| <= radius}``."""

    center: np.ndarray
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", as_vector(self.center, name="center"))
        if not (self.radius > 0 and math.isfinite(self.radius)):
            raise ValueError("radius must be positive and finite")

    @property
    def dim(self) -> int:
        return self.center.size

    @property
    def diameter(self) -> float:
        return 2.0 * self.radius

    def project(self, x) -> np.ndarray:
        """Nearest point of the ball: radial scaling toward the center."""
        xv = as_vector(x, dim=self.dim)
        dx = xv - self.center
        n = float(np.linalg.norm(dx))
        if n <= self.radius:
            return xv
        return self.center + dx * (self.radius / n)

    def contains(self, x, tol: float = MEMBERSHIP_TOL) -> bool:
        xv = as_vector(x, dim=self.dim)
        return float(np.linalg.norm(xv - self.center)) <= self.radius + tol

    def sample(self, rng: np.random.Generator) -> np.ndarray:
        """Uniform point of the ball (direction + radius-CDF method)."""
        d = self.dim
        direction = rng.standard_normal(d)
        n = float(np.linalg.norm(direction))
        while n == 0.0:
            direction = rng.standard_normal(d)
            n = float(np.linalg.norm(direction))
        r = self.radius * rng.random() ** (1.0 / d)
        return self.center + direction * (r / n)


@dataclass(frozen=True, eq=False)
class DiagBox:
    """Diagonal segment ``{x : x_0 = ... = x_{d-1}, |x_i| <= bound}``.

    Projection is the coordinate mean clamped to ``[-bound, bound]`` and
    replicated: the set is a line segment, orthogonal projection onto the
    line through ``(1, ..., 1)`` is the mean, and clamping the scalar
    projects onto the segment.
    """

    bound: float
    dim: int

    def __post_init__(self):
        if not (self.bound > 0 and math.isfinite(self.bound)):
            raise ValueError("bound must be positive and finite")
        if self.dim < 1:
            raise ValueError("dim must be >= 1")

    @property
    def diameter(self) -> float:
        return 2.0 * self.bound * math.sqrt(self.dim)

    def project(self, x) -> np.ndarray:
        xv = as_vector(x, dim=self.dim)
        if np.all(xv == xv[0]) and abs(float(xv[0])) <= self.bound:
            return xv
        m = float(np.mean(xv))
        m = min(max(m, -self.bound), self.bound)
        return np.full(self.dim, m)

    def contains(self, x, tol: float = MEMBERSHIP_TOL) -> bool:
        xv = as_vector(x, dim=self.dim)
        m = float(np.mean(xv))
        return bool(np.max(np.abs(xv - m)) <= tol and abs(m) <= self.bound + tol)

    def sample(self, rng: np.random.Generator) -> np.ndarray:
        t = rng.uniform(-self.bound, self.bound)
        return np.full(self.dim, t)


@dataclass(frozen=True, eq=False)
class Unconstrained:
    """All of R^d.  ``diameter`` exists only so theorem step sizes can be
    requested; callers that never use them may leave it unset."""

    dim: int
    diameter: float | None = None

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("dim must be >= 1")
        if self.diameter is not None and not self.diameter > 0:
            raise ValueError("declared diameter must be positive")

    def project(self, x) -> np.ndarray:
        return as_vector(x, dim=self.dim)

    def contains(self, x, tol: float = MEMBERSHIP_TOL) -> bool:
        as_vector(x, dim=self.dim)
        return True

    def sample(self, rng: np.random.Generator) -> np.ndarray:
        return rng.standard_normal(self.dim)


FeasibleSet = Ball | DiagBox | Unconstrained


def project(feasible_set: FeasibleSet, x) -> np.ndarray:
    """Euclidean projection of ``x`` onto the set (idempotent, nonexpansive)."""
    return feasible_set.project(x)
