"""Independent oracles used only by the tests: a cyclic Jacobi eigensolver
for cross-checking the power/inverse iterations, and brute-force minimizers
for hand-checkable instances."""

import numpy as np


def jacobi_eigenvalues(sym, tol: float = 1e-14, max_sweeps: int = 100) -> np.ndarray:
    """All eigenvalues of a symmetric matrix by cyclic Jacobi rotations."""
    a = np.array(sym, dtype=np.float64)
    n = a.shape[0]
    for _ in range(max_sweeps):
        off = np.sqrt(np.sum(np.tril(a, -1) ** 2))
        if off <= tol * max(1.0, np.max(np.abs(np.diag(a)))):
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                if a[p, q] == 0.0:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * a[p, q])
                t = np.sign(theta) / (abs(theta) + np.sqrt(theta * theta + 1.0))
                if theta == 0.0:
                    t = 1.0
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                rot = np.eye(n)
                rot[p, p] = rot[q, q] = c
                rot[p, q] = s
                rot[q, p] = -s
                a = rot.T @ a @ rot
    return np.sort(np.diag(a))


def grid_minimum(fn, lo: float, hi: float, steps: int = 4001) -> float:
    """Argmin of a scalar function over a uniform grid."""
    grid = np.linspace(lo, hi, steps)
    values = np.array([fn(g) for g in grid])
    return float(grid[int(np.argmin(values))])
