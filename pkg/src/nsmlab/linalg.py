"""Symmetric positive-definite solves and extreme singular values.

Small dense problems only (d up to a few hundred): an unpivoted Cholesky
factorization for normal equations, power iteration for the largest
eigenvalue of a Gram matrix, and inverse iteration for the smallest.
"""

import numpy as np

__all__ = [
    "SingularMatrixError",
    "IterationError",
    "cholesky_factor",
    "cholesky_solve",
    "solve_spd",
    "largest_eigenvalue",
    "smallest_eigenvalue",
    "extreme_singular_values",
    "condition_number",
]


class SingularMatrixError(ValueError):
    """SPD factorization hit a non-positive or negligible pivot."""


class IterationError(RuntimeError):
    """An eigenvalue iteration did not reach its tolerance within its cap."""


def cholesky_factor(s) -> np.ndarray:
    """Lower-triangular ``L`` with ``L @ L.T == s`` for SPD ``s``.

    Pivots below ``1e-12 * max(diag)`` raise :class:`SingularMatrixError`
    naming the offending pivot (no pivoting is performed; SPD input needs
    none).
    """
    a = np.array(s, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("matrix must be square")
    n = a.shape[0]
    tol = 1e-12 * float(np.max(np.abs(np.diag(a))))
    low = np.zeros_like(a)
    for j in range(n):
        pivot = a[j, j] - float(np.dot(low[j, :j], low[j, :j]))
        if pivot <= tol:
            raise SingularMatrixError(
                f"matrix is not positive definite: pivot {pivot:.6e} at column {j} "
                f"is below threshold {tol:.6e}"
            )
        low[j, j] = np.sqrt(pivot)
        if j + 1 < n:
            low[j + 1 :, j] = (a[j + 1 :, j] - low[j + 1 :, :j] @ low[j, :j]) / low[j, j]
    return low


def cholesky_solve(low: np.ndarray, b) -> np.ndarray:
    """Solve ``(L @ L.T) x = b`` given the lower factor ``L``."""
    n = low.shape[0]
    b = np.asarray(b, dtype=np.float64)
    y = np.zeros(n)
    for i in range(n):
        y[i] = (b[i] - float(np.dot(low[i, :i], y[:i]))) / low[i, i]
    x = np.zeros(n)
    for i in range(n - 1, -1, -1):
        x[i] = (y[i] - float(np.dot(low[i + 1 :, i], x[i + 1 :]))) / low[i, i]
    return x


def solve_spd(s, b) -> np.ndarray:
    """Factor-and-solve for a symmetric positive-definite system."""
    return cholesky_solve(cholesky_factor(s), b)


def _start_vector(n: int) -> np.ndarray:
    # Deterministic start with a component along every coordinate axis.
    v = 1.0 + np.arange(n) / n
    return v / np.linalg.norm(v)


def largest_eigenvalue(s, rel_tol: float = 1e-10, max_iter: int = 10_000) -> float:
    """Largest eigenvalue of symmetric PSD ``s`` by power iteration."""
    a = np.asarray(s, dtype=np.float64)
    v = _start_vector(a.shape[0])
    lam = 0.0
    residual = np.inf
    for _ in range(max_iter):
        w = a @ v
        lam_new = float(v @ w)
        wn = float(np.linalg.norm(w))
        if wn == 0.0:
            return 0.0
        v = w / wn
        residual = float(np.linalg.norm(a @ v - lam_new * v))
        if abs(lam_new - lam) <= rel_tol * max(abs(lam_new), 1e-300):
            return lam_new
        lam = lam_new
    raise IterationError(
        f"power iteration did not converge within {max_iter} iterations "
        f"(last residual {residual:.6e})"
    )


def smallest_eigenvalue(s, rel_tol: float = 1e-10, max_iter: int = 10_000) -> float:
    """Smallest eigenvalue of SPD ``s`` by inverse iteration on a Cholesky factor."""
    a = np.asarray(s, dtype=np.float64)
    low = cholesky_factor(a)
    v = _start_vector(a.shape[0])
    lam = np.inf
    residual = np.inf
    for _ in range(max_iter):
        w = cholesky_solve(low, v)
        w = w / float(np.linalg.norm(w))
        lam_new = float(w @ (a @ w))
        residual = float(np.linalg.norm(a @ w - lam_new * w))
        v = w
        if abs(lam_new - lam) <= rel_tol * max(abs(lam_new), 1e-300):
            return lam_new
        lam = lam_new
    raise IterationError(
        f"inverse iteration did not converge within {max_iter} iterations "
        f"(last residual {residual:.6e})"
    )


def extreme_singular_values(a, rel_tol: float = 1e-10, max_iter: int = 10_000) -> tuple[float, float]:
    """``(sigma_max, sigma_min)`` of a full-column-rank matrix ``a``.

    Both come from the Gram matrix ``a.T @ a``: its largest eigenvalue via
    power iteration and its smallest via inverse iteration.
    """
    m = np.asarray(a, dtype=np.float64)
    gram = m.T @ m
    lo = smallest_eigenvalue(gram, rel_tol=rel_tol, max_iter=max_iter)
    hi = largest_eigenvalue(gram, rel_tol=rel_tol, max_iter=max_iter)
    return float(np.sqrt(hi)), float(np.sqrt(lo))


def condition_number(a, rel_tol: float = 1e-10, max_iter: int = 10_000) -> float:
    """``sigma_max(a) / sigma_min(a)`` for a full-column-rank matrix."""
    smax, smin = extreme_singular_values(a, rel_tol=rel_tol, max_iter=max_iter)
    return smax / smin
