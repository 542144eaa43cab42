"""Convergence-threshold constants, theorem-driven step sizes, and numerical
verification probes (acute-angle estimation, finite-difference checks).

Conventions: the ``r`` argument of the step-size formulas is the Euclidean
diameter of the feasible set; natural logarithm throughout.
"""

import math
from dataclasses import dataclass

import numpy as np

from .geometry import FeasibleSet, as_vector

__all__ = [
    "TheoryConstants",
    "threshold_probability",
    "theorem_gamma",
    "strongly_convex_gamma",
    "bound_curve",
    "estimate_cos_phi",
    "finite_diff_check",
]


def threshold_probability(cos_phi: float) -> float:
    """Corruption probability below which the normalized method converges.

    Equals ``cos_phi / (1 + cos_phi)`` for an acute-angle constant
    ``cos_phi`` in ``(0, 1]``.
    """
    if not (0.0 < cos_phi <= 1.0):
        raise ValueError(f"cos_phi must lie in (0, 1], got {cos_phi}")
    return cos_phi / (1.0 + cos_phi)


def theorem_gamma(r: float, cos_phi: float, q: float) -> float:
    """Step-size scale ``r / (2((1-q) cos_phi - q))`` for the 1/t schedule.

    ``q`` must stay strictly below :func:`threshold_probability`, where the
    denominator has its pole.
    """
    if not r > 0:
        raise ValueError("r must be positive")
    if not (0.0 < cos_phi <= 1.0):
        raise ValueError(f"cos_phi must lie in (0, 1], got {cos_phi}")
    if not 0.0 <= q <= 1.0:
        raise ValueError(f"q must be a probability, got {q}")
    denom = (1.0 - q) * cos_phi - q
    if q >= threshold_probability(cos_phi) or denom <= 0.0:
        raise ValueError(
            f"q={q} is at or above the threshold {threshold_probability(cos_phi):.6g} "
            "for this cos_phi; the step-size formula has no positive solution"
        )
    return r / (2.0 * denom)


def strongly_convex_gamma(r: float, kappa: float, q: float) -> float:
    """Step-size scale ``kappa * r / (2((1-q) - q kappa))`` for condition
    number ``kappa``; identical to ``theorem_gamma(r, 1/kappa, q)``.

    The underlying guarantee additionally assumes the feasible set contains a
    ball around the minimizer; that geometric condition is the caller's
    responsibility and is not verified here.
    """
    if not kappa > 0:
        raise ValueError("kappa must be positive")
    if not r > 0:
        raise ValueError("r must be positive")
    if not 0.0 <= q <= 1.0:
        raise ValueError(f"q must be a probability, got {q}")
    denom = (1.0 - q) - q * kappa
    if q >= 1.0 / (1.0 + kappa) or denom <= 0.0:
        raise ValueError(
            f"q={q} is at or above the threshold {1.0 / (1.0 + kappa):.6g} "
            f"for kappa={kappa}"
        )
    return kappa * r / (2.0 * denom)


def bound_curve(gamma: float, n_steps: int) -> float:
    """Expected squared-distance envelope ``gamma^2 (1 + ln T) / T``."""
    if n_steps < 1:
        raise ValueError("n_steps must be >= 1")
    return gamma * gamma * (1.0 + math.log(n_steps)) / n_steps


@dataclass(frozen=True)
class TheoryConstants:
    """Resolved constants of one theorem-driven configuration.

    ``q`` must lie in ``[p, threshold)``; when ``kappa`` is present,
    ``cos_phi`` must equal ``1/kappa``.
    """

    cos_phi: float
    r: float
    p: float
    q: float
    gamma: float
    kappa: float | None = None

    def __post_init__(self):
        if not (0.0 < self.cos_phi <= 1.0):
            raise ValueError("cos_phi must lie in (0, 1]")
        thr = threshold_probability(self.cos_phi)
        if not (self.p <= self.q < thr):
            raise ValueError(f"q must lie in [p, {thr:.6g}), got p={self.p}, q={self.q}")
        if not self.gamma > 0:
            raise ValueError("gamma must be positive")
        if self.kappa is not None and abs(self.cos_phi * self.kappa - 1.0) > 1e-9:
            raise ValueError("with kappa present, cos_phi must equal 1/kappa")

    @property
    def threshold(self) -> float:
        return threshold_probability(self.cos_phi)


def estimate_cos_phi(objective, feasible_set: FeasibleSet, n_samples: int, rng) -> float:
    """Sampled lower estimate of the acute-angle constant.

    Draws ``n_samples`` feasible points, skips those within ``1e-9`` of the
    optimum (or with a vanishing subgradient), and returns the minimum of
    ``<g(x), x - x*> / (||g(x)|| ||x - x*||)``.  This estimates the constant
    from below; it certifies nothing.
    """
    if objective.optimum is None:
        raise ValueError("objective must expose a known optimum")
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    rng = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
    x_star = objective.optimum
    best = np.inf
    valid = 0
    for _ in range(n_samples):
        x = feasible_set.sample(rng)
        dx = x - x_star
        dist = float(np.linalg.norm(dx))
        if dist <= 1e-9:
            continue
        g = objective.subgradient(x)
        gn = float(np.linalg.norm(g))
        if gn <= 1e-15:
            continue
        best = min(best, float(np.dot(g, dx)) / (gn * dist))
        valid += 1
    if valid == 0:
        raise ValueError("no valid samples: every draw was at the optimum or had zero subgradient")
    return best


def finite_diff_check(objective, x, step: float = 1e-6) -> float:
    """Max relative error of the subgradient against central differences.

    Per-coordinate step ``step * (1 + |x_i|)``; the error denominator is
    ``max(1, ||g||)`` so flat regions do not inflate the ratio.
    """
    xv = as_vector(x, dim=objective.dim)
    g = objective.subgradient(xv)
    approx = np.zeros_like(xv)
    for i in range(xv.size):
        h = step * (1.0 + abs(float(xv[i])))
        lo = xv.copy()
        hi = xv.copy()
        lo[i] -= h
        hi[i] += h
        approx[i] = (objective.value(hi) - objective.value(lo)) / (2.0 * h)
    scale = max(1.0, float(np.linalg.norm(g)))
    return float(np.max(np.abs(approx - g))) / scale
