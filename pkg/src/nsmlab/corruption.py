"""Probabilistic corruption of subgradient feedback and the adversary
strategies that choose the corrupt vector."""

import math
from dataclasses import dataclass

import numpy as np

from .geometry import as_vector

__all__ = [
    "WorstCaseDirectional",
    "ScaledOpposite",
    "NegateIterate",
    "FixedVector",
    "Adversary",
    "corrupt_vector",
    "CorruptionChannel",
]


@dataclass(frozen=True)
class WorstCaseDirectional:
    """Push toward the optimum with magnitude ``r / gamma_t``.

    Maximally hostile to un-normalized methods (the induced step overshoots
    by the full diameter) while a normalized method sees only a unit
    direction.  Requires the optimum and ``r`` as call context.
    """


@dataclass(frozen=True)
class ScaledOpposite:
    """``factor`` times the opposite of the trustworthy subgradient."""

    factor: float

    def __post_init__(self):
        if self.factor == 0:
            raise ValueError("factor must be nonzero")


@dataclass(frozen=True, eq=False)
class NegateIterate:
    """``-x_t`` while the leading coordinate is nonzero, else ``fallback``.

    The zero test is exact, not a tolerance: at the origin the prescribed
    fallback vector is the corruption.
    """

    fallback: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "fallback", as_vector(self.fallback, name="fallback"))


@dataclass(frozen=True, eq=False)
class FixedVector:
    """Always the same stored vector."""

    vector: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "vector", as_vector(self.vector, name="vector"))


Adversary = WorstCaseDirectional | ScaledOpposite | NegateIterate | FixedVector


def corrupt_vector(
    adversary: Adversary,
    x_t: np.ndarray,
    g_t: np.ndarray,
    gamma_t: float,
    x_star: np.ndarray | None = None,
    r: float | None = None,
) -> np.ndarray:
    """Corrupt feedback chosen by ``adversary`` at the current iterate.

    ``x_star`` and ``r`` are required only by :class:`WorstCaseDirectional`.
    """
    if isinstance(adversary, WorstCaseDirectional):
        if x_star is None or r is None:
            raise ValueError("worst-case directional adversary needs x_star and r")
        if not gamma_t > 0:
            raise ValueError("gamma_t must be positive")
        scale = r / gamma_t
        dx = x_star - x_t
        dist = float(np.linalg.norm(dx))
        if dist <= 1e-12:
            # At the optimum the formula divides by zero; push along a fixed
            # axis instead (any direction is equally adversarial there).
            b = np.zeros_like(x_t)
            b[0] = scale
            return b
        return scale * (dx / dist)
    if isinstance(adversary, ScaledOpposite):
        return adversary.factor * (-g_t)
    if isinstance(adversary, NegateIterate):
        if x_t.size != adversary.fallback.size:
            raise ValueError("fallback dimension does not match the iterate")
        if abs(float(x_t[0])) > 0.0:
            return -x_t
        return adversary.fallback.copy()
    if isinstance(adversary, FixedVector):
        if x_t.size != adversary.vector.size:
            raise ValueError("fixed vector dimension does not match the iterate")
        return adversary.vector.copy()
    raise TypeError(f"unknown adversary {adversary!r}")


class CorruptionChannel:
    """Bernoulli(p) gate between the true subgradient and the adversary.

    One uniform draw is consumed per call, independent of the iterate, so a
    seed pins the whole corruption pattern.  A channel owns its generator and
    counters and must not be shared across concurrent runs.
    """

    def __init__(self, p: float, adversary: Adversary, rng):
        if not (0.0 <= p <= 1.0) or not math.isfinite(p):
            raise ValueError(f"p must lie in [0, 1], got {p}")
        self.p = float(p)
        self.adversary = adversary
        self.rng = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
        self.draws_made = 0
        self.corruptions_made = 0

    def next_feedback(
        self,
        x_t: np.ndarray,
        g_t: np.ndarray,
        gamma_t: float,
        x_star: np.ndarray | None = None,
        r: float | None = None,
    ) -> tuple[np.ndarray, bool]:
        """Return ``(h_t, was_corrupt)``, consuming exactly one uniform."""
        u = self.rng.random()
        self.draws_made += 1
        if u < self.p:
            self.corruptions_made += 1
            return corrupt_vector(self.adversary, x_t, g_t, gamma_t, x_star=x_star, r=r), True
        return g_t, False

    def reserve_uniforms(self, n: int) -> np.ndarray:
        """Bulk-draw ``n`` uniforms for a compiled loop.

        Produces the same stream as ``n`` single calls, and counts as ``n``
        draws.  The caller reports corruption counts afterwards via
        :meth:`note_corruptions`.
        """
        if n < 0:
            raise ValueError("n must be nonnegative")
        u = self.rng.random(n)
        self.draws_made += n
        return u

    def note_corruptions(self, k: int) -> None:
        self.corruptions_made += int(k)
        if self.corruptions_made > self.draws_made:
            raise RuntimeError("corruption count exceeds draw count")
