"""Objective functions with exact subgradients, synthetic data generators,
and the spectral constants their theorem-driven step sizes need."""

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .geometry import as_vector
from .linalg import (
    SingularMatrixError,
    cholesky_factor,
    cholesky_solve,
    condition_number,
    extreme_singular_values,
)

__all__ = [
    "Objective",
    "KernelPayload",
    "LinRegData",
    "ClassData",
    "toy_objective",
    "least_squares_objective",
    "least_squares_optimum",
    "logistic_objective",
    "condition_number",
    "hessian_bounds",
    "synth_linreg",
    "synth_classes",
]


def _as_rng(rng) -> np.random.Generator:
    return rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)


@dataclass(frozen=True)
class KernelPayload:
    """Arrays the compiled loop needs to evaluate a built-in objective."""

    kind: str  # "toy" | "lsq" | "logistic"
    arrays: dict = field(default_factory=dict)


@dataclass(frozen=True, eq=False)
class Objective:
    """Value/subgradient pair for one problem instance.

    ``optimum`` is the known nearest-minimizer oracle when available;
    ``kernel_payload`` lets the compiled loop evaluate built-in instances
    without calling back into Python.
    """

    value: Callable[[np.ndarray], float]
    subgradient: Callable[[np.ndarray], np.ndarray]
    dim: int
    optimum: np.ndarray | None = None
    kernel_payload: KernelPayload | None = None


def toy_objective(d: int) -> Objective:
    """Quartic in the last coordinate: value ``x_{d-1}^4``, minimized at 0.

    On the diagonal-segment feasible set this satisfies the acute-angle
    condition with constant exactly ``1/sqrt(d)``.
    """
    if d < 1:
        raise ValueError("d must be >= 1")

    def value(x) -> float:
        xv = np.asarray(x, dtype=np.float64)
        c = float(xv[d - 1])
        q = c * c
        return q * q

    def subgradient(x) -> np.ndarray:
        xv = np.asarray(x, dtype=np.float64)
        g = np.zeros(d)
        c = float(xv[d - 1])
        g[d - 1] = 4.0 * (c * c * c)
        return g

    return Objective(
        value=value,
        subgradient=subgradient,
        dim=d,
        optimum=np.zeros(d),
        kernel_payload=KernelPayload("toy"),
    )


@dataclass(frozen=True, eq=False)
class LinRegData:
    """Design matrix, targets, and the ground-truth weights that built them."""

    a: np.ndarray
    y: np.ndarray
    w_true: np.ndarray
    noise_sd: float

    def __post_init__(self):
        a = np.asarray(self.a, dtype=np.float64)
        if a.ndim != 2:
            raise ValueError("a must be a matrix")
        n, d = a.shape
        if n < d:
            raise ValueError(f"need at least as many rows as columns, got {n}x{d}")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "y", as_vector(self.y, dim=n, name="y"))
        object.__setattr__(self, "w_true", as_vector(self.w_true, dim=d, name="w_true"))
        if self.noise_sd < 0:
            raise ValueError("noise_sd must be nonnegative")
        try:
            _, smin = extreme_singular_values(a)
        except SingularMatrixError as exc:
            raise ValueError(f"design matrix is rank deficient: {exc}") from exc
        if smin <= 1e-10:
            raise ValueError(f"design matrix is rank deficient: sigma_min={smin:.3e}")

    @property
    def n(self) -> int:
        return self.a.shape[0]

    @property
    def d(self) -> int:
        return self.a.shape[1]


def least_squares_optimum(data: LinRegData) -> np.ndarray:
    """Normal-equations solution of ``min ||y - A x||^2`` via Cholesky.

    The residual of the solved system is checked against
    ``1e-8 * ||A^T y||``.
    """
    gram = data.a.T @ data.a
    rhs = data.a.T @ data.y
    x = cholesky_solve(cholesky_factor(gram), rhs)
    residual = float(np.linalg.norm(gram @ x - rhs))
    if residual > 1e-8 * max(float(np.linalg.norm(rhs)), 1e-300):
        raise ArithmeticError(
            f"normal-equations solve failed its residual check: {residual:.3e}"
        )
    return x


def least_squares_objective(data: LinRegData) -> Objective:
    """Squared residual objective ``||y - A x||^2`` with exact gradient."""
    a, y = data.a, data.y

    def value(x) -> float:
        r = y - a @ np.asarray(x, dtype=np.float64)
        return float(np.dot(r, r))

    def subgradient(x) -> np.ndarray:
        xv = np.asarray(x, dtype=np.float64)
        return 2.0 * (a.T @ (a @ xv - y))

    payload = KernelPayload(
        "lsq",
        {
            "mat_g": np.ascontiguousarray(2.0 * (a.T @ a)),
            "vec_c": np.ascontiguousarray(2.0 * (a.T @ y)),
            "scalar_yy": float(np.dot(y, y)),
        },
    )
    return Objective(
        value=value,
        subgradient=subgradient,
        dim=data.d,
        optimum=least_squares_optimum(data),
        kernel_payload=payload,
    )


def hessian_bounds(data: LinRegData) -> tuple[float, float]:
    """Strong-convexity and smoothness constants ``(mu, beta)`` of the
    squared-residual objective: ``2 sigma_min(A)^2`` and ``2 sigma_max(A)^2``."""
    smax, smin = extreme_singular_values(data.a)
    return 2.0 * smin * smin, 2.0 * smax * smax


@dataclass(frozen=True, eq=False)
class ClassData:
    """Feature matrix with integer labels in ``{0..m-1}`` and an L2 weight."""

    a: np.ndarray
    labels: np.ndarray
    m: int
    lam: float = 0.0

    def __post_init__(self):
        a = np.asarray(self.a, dtype=np.float64)
        if a.ndim != 2:
            raise ValueError("a must be a matrix")
        labels = np.asarray(self.labels, dtype=np.int64)
        if labels.ndim != 1 or labels.size != a.shape[0]:
            raise ValueError("labels must be one per row of a")
        if self.m < 2:
            raise ValueError("need at least two classes")
        if labels.min() < 0 or labels.max() >= self.m:
            raise ValueError("labels out of range")
        present = np.unique(labels)
        if present.size != self.m:
            missing = sorted(set(range(self.m)) - set(present.tolist()))
            raise ValueError(f"classes {missing} never appear in the labels")
        if self.lam < 0:
            raise ValueError("lam must be nonnegative")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "labels", labels)

    @property
    def n(self) -> int:
        return self.a.shape[0]

    @property
    def d(self) -> int:
        return self.a.shape[1]


def logistic_objective(data: ClassData) -> Objective:
    """Mean softmax cross-entropy over the rows plus ``lam * ||x||^2``.

    The decision variable is the ``m x d`` classifier matrix flattened to a
    length ``m*d`` vector so every optimizer sees a plain vector.  Log-sum-exp
    uses max subtraction for stability.
    """
    a, labels, m, lam = data.a, data.labels, data.m, data.lam
    n, d = a.shape
    rows = np.arange(n)

    def value(x) -> float:
        xv = np.asarray(x, dtype=np.float64)
        w = xv.reshape(m, d)
        z = a @ w.T
        zmax = z.max(axis=1)
        lse = zmax + np.log(np.exp(z - zmax[:, None]).sum(axis=1))
        loss = float(np.mean(lse - z[rows, labels]))
        return loss + lam * float(np.dot(xv, xv))

    def subgradient(x) -> np.ndarray:
        xv = np.asarray(x, dtype=np.float64)
        w = xv.reshape(m, d)
        z = a @ w.T
        z -= z.max(axis=1)[:, None]
        p = np.exp(z)
        p /= p.sum(axis=1)[:, None]
        p[rows, labels] -= 1.0
        g = (p.T @ a) / n + 2.0 * lam * w
        return g.ravel()

    payload = KernelPayload(
        "logistic",
        {
            "features": np.ascontiguousarray(a),
            "labels": np.ascontiguousarray(labels),
            "n_classes": m,
            "lam": float(lam),
        },
    )
    return Objective(
        value=value,
        subgradient=subgradient,
        dim=m * d,
        optimum=None,
        kernel_payload=payload,
    )


def synth_linreg(d: int, n: int, r: float, rng, noise_sd: float | None = None) -> LinRegData:
    """Random regression instance: standard-normal design, true weights
    uniform in the interior of the radius-``r`` ball, Gaussian targets.

    ``noise_sd`` defaults to ``r / 4``.
    """
    if n < d:
        raise ValueError("need n >= d")
    rng = _as_rng(rng)
    if noise_sd is None:
        noise_sd = r / 4.0
    a = rng.standard_normal((n, d))
    direction = rng.standard_normal(d)
    norm = float(np.linalg.norm(direction))
    while norm == 0.0:
        direction = rng.standard_normal(d)
        norm = float(np.linalg.norm(direction))
    # Exact radius CDF: |w| = r * u^(1/d) is uniform over the ball interior.
    radius = r * rng.random() ** (1.0 / d)
    w_true = direction * (radius / norm)
    y = a @ w_true + rng.standard_normal(n) * noise_sd
    return LinRegData(a=a, y=y, w_true=w_true, noise_sd=float(noise_sd))


def synth_classes(
    d: int, n: int, m: int, separation: float, rng, lam: float = 0.0
) -> ClassData:
    """Gaussian blobs around ``m`` mutually distant class means.

    Means sit at ``separation`` times orthonormal random directions when
    ``m <= d``; with more classes than dimensions they fall back to random
    unit directions.  Labels are balanced round-robin.
    """
    if n < m:
        raise ValueError("need n >= m")
    if separation < 0:
        raise ValueError("separation must be nonnegative")
    rng = _as_rng(rng)
    if m <= d:
        q, _ = np.linalg.qr(rng.standard_normal((d, m)))
        means = separation * q.T
    else:
        directions = rng.standard_normal((m, d))
        directions /= np.linalg.norm(directions, axis=1)[:, None]
        means = separation * directions
    labels = np.arange(n, dtype=np.int64) % m
    a = means[labels] + rng.standard_normal((n, d))
    return ClassData(a=a, labels=labels, m=m, lam=lam)
