#!/usr/bin/env python3
"""Benchmark the compiled iteration kernel against the pure-Python loop.

Runs the three built-in problem families under corruption with both backends,
reports iterations/second and the numerical gap between the paths.
"""

import time

import numpy as np

from nsmlab import backend
from nsmlab.corruption import (
    CorruptionChannel,
    NegateIterate,
    ScaledOpposite,
    WorstCaseDirectional,
)
from nsmlab.geometry import Ball, DiagBox, Unconstrained
from nsmlab.optimizers import InverseT, run
from nsmlab.problems import (
    least_squares_objective,
    logistic_objective,
    synth_classes,
    synth_linreg,
    toy_objective,
)


def cases():
    toy = toy_objective(10)
    yield ("toy d=10, nsm", toy, DiagBox(10.0, 10), "nsm", InverseT(200.0),
           NegateIterate(np.ones(10)), 0.2, np.full(10, 5.0), {}, 20_000)

    data = synth_linreg(20, 200, 10.0, 0)
    lsq = least_squares_objective(data)
    yield ("linreg d=20, nsm", lsq, Ball(np.zeros(20), 10.0), "nsm", InverseT(77.0),
           WorstCaseDirectional(), 0.17, np.zeros(20), {"adversary_r": 10.0}, 5_000)
    yield ("linreg d=20, adam", lsq, Ball(np.zeros(20), 10.0), "adam", InverseT(77.0),
           WorstCaseDirectional(), 0.17, np.zeros(20), {"adversary_r": 10.0}, 5_000)

    cdata = synth_classes(10, 300, 3, 10.0, 0, lam=0.1)
    logi = logistic_objective(cdata)
    yield ("logistic d=10 m=3 N=300, nsm", logi, Unconstrained(logi.dim), "nsm",
           InverseT(0.1), ScaledOpposite(15.0), 0.25, np.zeros(logi.dim), {}, 2_000)


def time_run(objective, feasible_set, method, schedule, adversary, p, x1, kw,
             n_steps, which):
    channel = CorruptionChannel(p, adversary, 123)
    start = time.perf_counter()
    traj = run(objective, feasible_set, method, schedule, channel, x1, n_steps,
               backend=which, record_every=n_steps, **kw)
    return time.perf_counter() - start, traj


def main():
    if not backend.ext_available():
        print("compiled kernel not built; nothing to compare against")
        return
    print(f"{'case':34s} {'python':>10s} {'ext':>10s} {'speedup':>8s} {'final gap':>10s}")
    for name, obj, fset, method, sched, adv, p, x1, kw, n_steps in cases():
        t_py, traj_py = time_run(obj, fset, method, sched, adv, p, x1, kw, n_steps, "python")
        t_ext, traj_ext = time_run(obj, fset, method, sched, adv, p, x1, kw, n_steps, "ext")
        gap = abs(traj_py.objective[-1] - traj_ext.objective[-1])
        gap /= max(abs(traj_py.objective[-1]), 1e-12)
        print(f"{name:34s} {n_steps / t_py:>8.0f}/s {n_steps / t_ext:>8.0f}/s "
              f"{t_py / t_ext:>7.1f}x {gap:>10.2e}")


if __name__ == "__main__":
    main()
