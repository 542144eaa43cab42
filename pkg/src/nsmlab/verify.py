"""Self-contained invariant suites behind the ``verify`` CLI subcommand.

Each suite draws its own seeded randomness, checks one contract, and reports
pass/fail with a short detail string.  These are the same properties the test
suite pins, packaged so a user can re-check an installed build.
"""

import math
import os
import tempfile
from dataclasses import dataclass

import numpy as np

from .corruption import CorruptionChannel, FixedVector
from .experiments import run_experiment, toy_config
from .geometry import Ball, DiagBox, Unconstrained, normalize
from .problems import (
    hessian_bounds,
    least_squares_objective,
    logistic_objective,
    synth_classes,
    synth_linreg,
    toy_objective,
)
from .records import write_csv
from .theory import estimate_cos_phi, finite_diff_check, strongly_convex_gamma, theorem_gamma

__all__ = ["SuiteResult", "run_all", "SUITES"]


@dataclass(frozen=True)
class SuiteResult:
    name: str
    passed: bool
    detail: str


def _sets(rng):
    d = 6
    return [
        ("ball", Ball(rng.standard_normal(d), 2.5), d),
        ("diagbox", DiagBox(3.0, d), d),
        ("unconstrained", Unconstrained(d), d),
    ]


def projection_idempotent(seed: int = 0) -> SuiteResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _, s, d in _sets(rng):
        for _ in range(1000):
            x = rng.standard_normal(d) * 10.0
            once = s.project(x)
            twice = s.project(once)
            worst = max(worst, float(np.max(np.abs(twice - once))))
    return SuiteResult("projection_idempotent", worst <= 1e-12, f"max drift {worst:.3e}")


def projection_nonexpansive(seed: int = 1) -> SuiteResult:
    rng = np.random.default_rng(seed)
    worst = -np.inf
    for _, s, d in _sets(rng):
        for _ in range(1000):
            a = rng.standard_normal(d) * 10.0
            b = rng.standard_normal(d) * 10.0
            lhs = float(np.linalg.norm(s.project(a) - s.project(b)))
            rhs = float(np.linalg.norm(a - b))
            worst = max(worst, lhs - rhs)
    return SuiteResult("projection_nonexpansive", worst <= 1e-12, f"max excess {worst:.3e}")


def projection_feasible(seed: int = 2) -> SuiteResult:
    rng = np.random.default_rng(seed)
    bad = 0
    for _, s, d in _sets(rng):
        for _ in range(1000):
            x = rng.standard_normal(d) * 10.0
            if not s.contains(s.project(x), tol=1e-12):
                bad += 1
    return SuiteResult("projection_feasible", bad == 0, f"{bad} infeasible projections")


def normalize_unit_norm(seed: int = 3) -> SuiteResult:
    rng = np.random.default_rng(seed)
    ok = True
    for _ in range(1000):
        scale = 10.0 ** rng.uniform(-14, 6)
        v = rng.standard_normal(4) * scale
        direction, is_zero = normalize(v)
        n = float(np.linalg.norm(direction))
        ok = ok and (n == 0.0 if is_zero else abs(n - 1.0) <= 1e-12)
    return SuiteResult("normalize_unit_norm", ok, "norms in {0} or [1-1e-12, 1+1e-12]")


def _grad_suite(name, objective, sampler, rng) -> SuiteResult:
    worst = 0.0
    for _ in range(20):
        worst = max(worst, finite_diff_check(objective, sampler(rng)))
    return SuiteResult(name, worst < 1e-5, f"max rel err {worst:.3e}")


def gradient_check_toy(seed: int = 4) -> SuiteResult:
    rng = np.random.default_rng(seed)
    box = DiagBox(10.0, 10)
    return _grad_suite("gradient_check_toy", toy_objective(10), lambda r: box.sample(r), rng)


def gradient_check_linreg(seed: int = 5) -> SuiteResult:
    rng = np.random.default_rng(seed)
    data = synth_linreg(8, 40, 10.0, rng)
    ball = Ball(np.zeros(8), 10.0)
    return _grad_suite(
        "gradient_check_linreg", least_squares_objective(data), lambda r: ball.sample(r), rng
    )


def gradient_check_logistic(seed: int = 6) -> SuiteResult:
    rng = np.random.default_rng(seed)
    data = synth_classes(4, 30, 3, 5.0, rng, lam=0.1)
    obj = logistic_objective(data)
    return _grad_suite(
        "gradient_check_logistic", obj, lambda r: r.standard_normal(obj.dim), rng
    )


def toy_acute_angle(seed: int = 7) -> SuiteResult:
    d = 10
    obj = toy_objective(d)
    est = estimate_cos_phi(obj, DiagBox(10.0, d), 1000, np.random.default_rng(seed))
    err = abs(est - 1.0 / math.sqrt(d))
    return SuiteResult("toy_acute_angle", err <= 1e-9, f"|estimate - 1/sqrt(d)| = {err:.3e}")


def strongly_convex_bracket(seed: int = 8) -> SuiteResult:
    rng = np.random.default_rng(seed)
    data = synth_linreg(8, 60, 10.0, rng)
    obj = least_squares_objective(data)
    mu, beta = hessian_bounds(data)
    ball = Ball(np.zeros(8), 10.0)
    slack = 1e-9
    ok = True
    for _ in range(100):
        x1 = ball.sample(rng)
        x2 = ball.sample(rng)
        dx = x1 - x2
        inner = float(np.dot(obj.subgradient(x1) - obj.subgradient(x2), dx))
        nsq = float(np.dot(dx, dx))
        ok = ok and (mu * nsq * (1 - slack) <= inner <= beta * nsq * (1 + slack))
    return SuiteResult(
        "strongly_convex_bracket", ok, f"mu={mu:.4g} beta={beta:.4g} over 100 pairs"
    )


def corruption_frequency(seed: int = 9) -> SuiteResult:
    p, n = 0.25, 100_000
    channel = CorruptionChannel(p, FixedVector(np.ones(2)), seed)
    x = np.zeros(2)
    g = np.ones(2)
    hits = sum(channel.next_feedback(x, g, 1.0)[1] for _ in range(n))
    dev = abs(hits / n - p)
    band = 3.0 * math.sqrt(p * (1 - p) / n)
    return SuiteResult(
        "corruption_frequency", dev <= band, f"|freq - p| = {dev:.5f} (3-sigma band {band:.5f})"
    )


def gamma_identity(seed: int = 10) -> SuiteResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(200):
        kappa = 10.0 ** rng.uniform(0, 2)
        r = 10.0 ** rng.uniform(-1, 2)
        q = rng.uniform(0, 1.0 / (1.0 + kappa) * 0.999)
        a = strongly_convex_gamma(r, kappa, q)
        b = theorem_gamma(r, 1.0 / kappa, q)
        worst = max(worst, abs(a - b) / abs(b))
    return SuiteResult("gamma_identity", worst <= 1e-12, f"max rel gap {worst:.3e}")


def csv_determinism(seed: int = 11) -> SuiteResult:
    cfg = toy_config(p_values=(0.3,), n_steps=200, seeds=(seed, seed + 1), echo=False)
    blobs = []
    for _ in range(2):
        records = run_experiment(cfg)
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "out.csv")
            write_csv(records, path)
            with open(path, "rb") as fh:
                blobs.append(fh.read())
    same = blobs[0] == blobs[1]
    return SuiteResult("csv_determinism", same, f"{len(blobs[0])} bytes, re-run identical: {same}")


SUITES = (
    projection_idempotent,
    projection_nonexpansive,
    projection_feasible,
    normalize_unit_norm,
    gradient_check_toy,
    gradient_check_linreg,
    gradient_check_logistic,
    toy_acute_angle,
    strongly_convex_bracket,
    corruption_frequency,
    gamma_identity,
    csv_determinism,
)


def run_all() -> list[SuiteResult]:
    return [suite() for suite in SUITES]
