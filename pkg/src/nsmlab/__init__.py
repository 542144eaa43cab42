"""Robust first-order optimization under randomly corrupted subgradients.

The normalized subgradient method keeps only the direction of the (possibly
adversarial) feedback, which caps what a corruption can do per step; this
package implements that method, the baseline optimizers it is compared
against, the adversary strategies, the convergence-threshold constants, and a
seeded experiment harness with CSV output.

A compiled extension accelerates the iteration loop for the built-in
problems when present; ``nsmlab.backend.default_backend()`` reports which
path is active and ``NSMLAB_BACKEND`` overrides it.
"""

from . import _backend as backend
from .corruption import (
    Adversary,
    CorruptionChannel,
    FixedVector,
    NegateIterate,
    ScaledOpposite,
    WorstCaseDirectional,
    corrupt_vector,
)
from .experiments import (
    ExperimentConfig,
    derive_seed,
    linreg_config,
    logistic_config,
    metric_cadence,
    run_experiment,
    toy_config,
)
from .geometry import (
    Ball,
    DiagBox,
    FeasibleSet,
    Unconstrained,
    distance_sq,
    normalize,
    project,
)
from .linalg import condition_number, extreme_singular_values, solve_spd
from .optimizers import (
    METHODS,
    BaselineHyper,
    Constant,
    InverseT,
    NonFiniteUpdateError,
    OptimizerState,
    StepSchedule,
    Trajectory,
    baseline_step,
    nsm_step,
    run,
)
from .problems import (
    ClassData,
    LinRegData,
    Objective,
    hessian_bounds,
    least_squares_objective,
    least_squares_optimum,
    logistic_objective,
    synth_classes,
    synth_linreg,
    toy_objective,
)
from .records import RunRecord, aggregate, records_from_trajectory, write_csv
from .theory import (
    TheoryConstants,
    bound_curve,
    estimate_cos_phi,
    finite_diff_check,
    strongly_convex_gamma,
    theorem_gamma,
    threshold_probability,
)

__version__ = "0.1.0"
