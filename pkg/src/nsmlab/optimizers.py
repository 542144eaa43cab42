"""The normalized subgradient step, the baseline first-order methods, and the
run loop that drives them through the corruption channel.

``run`` has two interchangeable execution paths: a pure-Python loop built on
the public step functions (the reference), and a compiled kernel for the
built-in problems that replays the same uniform stream.  They agree up to
floating-point rounding; each is bitwise deterministic for a fixed seed.
"""

from dataclasses import dataclass

import numpy as np

from . import _backend
from .corruption import (
    CorruptionChannel,
    FixedVector,
    NegateIterate,
    ScaledOpposite,
    WorstCaseDirectional,
)
from .geometry import Ball, DiagBox, FeasibleSet, Unconstrained, ZERO_TOL, as_vector, normalize
from .problems import Objective

__all__ = [
    "METHODS",
    "InverseT",
    "Constant",
    "StepSchedule",
    "BaselineHyper",
    "OptimizerState",
    "NonFiniteUpdateError",
    "nsm_step",
    "baseline_step",
    "Trajectory",
    "recorded_iterates",
    "run",
]

METHODS = ("nsm", "gd", "nag", "adam", "rmsprop", "amsgrad")


@dataclass(frozen=True)
class InverseT:
    """Diminishing schedule ``gamma_t = gamma0 / t`` (t counted from 1)."""

    gamma0: float

    def __post_init__(self):
        if not self.gamma0 > 0:
            raise ValueError("gamma0 must be positive")

    def step_size(self, t: int) -> float:
        return self.gamma0 / t


@dataclass(frozen=True)
class Constant:
    """Fixed step size."""

    gamma: float

    def __post_init__(self):
        if not self.gamma > 0:
            raise ValueError("gamma must be positive")

    def step_size(self, t: int) -> float:
        return self.gamma


StepSchedule = InverseT | Constant


@dataclass(frozen=True)
class BaselineHyper:
    """Standard defaults for the baseline methods; surfaced as CLI flags."""

    momentum: float = 0.9  # NAG
    beta1: float = 0.9  # Adam / AMSGrad
    beta2: float = 0.999
    eps: float = 1e-8
    rho: float = 0.9  # RMSprop decay


class NonFiniteUpdateError(RuntimeError):
    """A baseline update produced a non-finite iterate."""

    def __init__(self, method: str, t: int):
        super().__init__(f"{method} produced a non-finite iterate at step {t}")
        self.method = method
        self.t = t


@dataclass
class OptimizerState:
    """Mutable per-run state: the iterate plus method-specific accumulators."""

    method: str
    x: np.ndarray
    t: int = 1
    velocity: np.ndarray | None = None  # NAG
    m: np.ndarray | None = None  # first moment
    v: np.ndarray | None = None  # second moment
    v_max: np.ndarray | None = None  # AMSGrad running max, entrywise nondecreasing

    @classmethod
    def initial(cls, method: str, x0: np.ndarray) -> "OptimizerState":
        if method not in METHODS:
            raise ValueError(f"unknown method {method!r}; choose from {METHODS}")
        x = as_vector(x0).copy()
        state = cls(method=method, x=x)
        if method == "nag":
            state.velocity = np.zeros_like(x)
        elif method in ("adam", "amsgrad"):
            state.m = np.zeros_like(x)
            state.v = np.zeros_like(x)
            if method == "amsgrad":
                state.v_max = np.zeros_like(x)
        elif method == "rmsprop":
            state.v = np.zeros_like(x)
        return state


def nsm_step(
    x_t: np.ndarray,
    h_t: np.ndarray,
    gamma_t: float,
    feasible_set: FeasibleSet,
    zero_tol: float = ZERO_TOL,
) -> np.ndarray:
    """One normalized step: project ``x_t - gamma_t * h_t / ||h_t||``.

    A zero feedback direction leaves the iterate unchanged.  The
    pre-projection displacement has norm exactly ``gamma_t`` otherwise.
    """
    if not gamma_t > 0:
        raise ValueError("gamma_t must be positive")
    x = as_vector(x_t)
    direction, is_zero = normalize(as_vector(h_t, dim=x.size, name="h_t"), zero_tol)
    if is_zero:
        return x
    return feasible_set.project(x - gamma_t * direction)


def baseline_step(
    state: OptimizerState,
    h_t: np.ndarray,
    gamma_t: float,
    feasible_set: FeasibleSet | None,
    hyper: BaselineHyper = BaselineHyper(),
) -> OptimizerState:
    """One un-normalized update for ``state.method``, then projection.

    ``feasible_set=None`` skips the projection (the unprojected mode).
    Accumulators are updated in place in the returned state; a non-finite
    result raises :class:`NonFiniteUpdateError` rather than being clamped.
    """
    method = state.method
    if method == "nsm":
        raise ValueError("use nsm_step for the normalized method")
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}")
    x = state.x
    h = as_vector(h_t, dim=x.size, name="h_t")
    t = state.t
    # Overflow here is an expected, detected outcome (huge corrupt feedback),
    # reported through NonFiniteUpdateError below rather than a warning.
    with np.errstate(over="ignore", invalid="ignore"):
        if method == "gd":
            x_new = x - gamma_t * h
        elif method == "nag":
            # Momentum with gradient-at-iterate lookahead correction.
            state.velocity = hyper.momentum * state.velocity + h
            x_new = x - gamma_t * (h + hyper.momentum * state.velocity)
        elif method == "adam":
            state.m = hyper.beta1 * state.m + (1.0 - hyper.beta1) * h
            state.v = hyper.beta2 * state.v + (1.0 - hyper.beta2) * (h * h)
            m_hat = state.m / (1.0 - hyper.beta1**t)
            v_hat = state.v / (1.0 - hyper.beta2**t)
            x_new = x - gamma_t * (m_hat / (np.sqrt(v_hat) + hyper.eps))
        elif method == "amsgrad":
            state.m = hyper.beta1 * state.m + (1.0 - hyper.beta1) * h
            state.v = hyper.beta2 * state.v + (1.0 - hyper.beta2) * (h * h)
            state.v_max = np.maximum(state.v_max, state.v)
            m_hat = state.m / (1.0 - hyper.beta1**t)
            v_hat = state.v_max / (1.0 - hyper.beta2**t)
            x_new = x - gamma_t * (m_hat / (np.sqrt(v_hat) + hyper.eps))
        else:  # rmsprop
            state.v = hyper.rho * state.v + (1.0 - hyper.rho) * (h * h)
            x_new = x - gamma_t * (h / (np.sqrt(state.v) + hyper.eps))
    if feasible_set is not None:
        x_new = feasible_set.project(x_new)
    if not np.all(np.isfinite(x_new)):
        raise NonFiniteUpdateError(method, t)
    state.x = x_new
    state.t = t + 1
    return state


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Recorded metrics of one run; entry ``k`` describes iterate
    ``iters[k]`` and the step that produced it (zero gamma/flag for the
    initial iterate)."""

    method: str
    n_steps: int
    iters: np.ndarray  # 1-based iterate indices, first is 1
    objective: np.ndarray
    dist_sq: np.ndarray | None  # squared distance to the optimum, when known
    corrupt: np.ndarray  # uint8 flags
    gamma: np.ndarray
    x_final: np.ndarray
    diverged_at: int | None  # step index whose update went non-finite

    @property
    def n_recorded(self) -> int:
        return int(self.iters.size)


def recorded_iterates(n_steps: int, record_every: int) -> np.ndarray:
    """Iterate indices kept by a run: the initial one, every
    ``record_every``-th, and the final one."""
    if record_every < 1:
        raise ValueError("record_every must be >= 1")
    idx = [i for i in range(1, n_steps + 2) if (i - 1) % record_every == 0]
    if idx[-1] != n_steps + 1:
        idx.append(n_steps + 1)
    return np.asarray(idx, dtype=np.int64)


def run(
    objective: Objective,
    feasible_set: FeasibleSet,
    method: str,
    schedule: StepSchedule,
    channel: CorruptionChannel,
    x1,
    n_steps: int,
    *,
    hyper: BaselineHyper = BaselineHyper(),
    record_every: int = 1,
    project_baselines: bool = True,
    x_star: np.ndarray | None = None,
    adversary_r: float | None = None,
    zero_tol: float = ZERO_TOL,
    backend: str | None = None,
) -> Trajectory:
    """Drive ``method`` for ``n_steps`` corrupted-feedback iterations.

    Each step evaluates the subgradient at the current iterate, passes it
    through the channel, and applies the method's update.  A non-finite
    iterate ends the run with ``diverged_at`` set instead of raising, so
    batch experiments always complete.  ``x_star`` defaults to the
    objective's optimum and is the worst-case adversary's target;
    ``adversary_r`` is that adversary's magnitude scale.

    Fully deterministic given the channel seed and the configuration.
    """
    if n_steps < 1:
        raise ValueError("n_steps must be >= 1")
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}; choose from {METHODS}")
    x0 = feasible_set.project(as_vector(x1, dim=objective.dim, name="x1"))
    if x_star is None:
        x_star = objective.optimum
    rec_idx = recorded_iterates(n_steps, record_every)

    chosen = _backend.resolve_backend(backend)
    use_kernel = chosen == "ext" and _kernel_plan_supported(objective, feasible_set, channel)
    if backend == "ext" and not use_kernel:
        raise ValueError(
            "compiled backend requested for a configuration it does not support "
            "(custom objective, set, or adversary); use backend='python'"
        )
    if use_kernel:
        return _run_kernel(
            objective, feasible_set, method, schedule, channel, x0, n_steps,
            hyper, rec_idx, project_baselines, x_star, adversary_r, zero_tol,
        )
    return _run_python(
        objective, feasible_set, method, schedule, channel, x0, n_steps,
        hyper, rec_idx, project_baselines, x_star, adversary_r, zero_tol,
    )


def _run_python(
    objective, feasible_set, method, schedule, channel, x0, n_steps,
    hyper, rec_idx, project_baselines, x_star, adversary_r, zero_tol,
) -> Trajectory:
    track_dist = objective.optimum is not None
    n_rec = rec_idx.size
    obj_out = np.zeros(n_rec)
    dist_out = np.zeros(n_rec) if track_dist else None
    flag_out = np.zeros(n_rec, dtype=np.uint8)
    gamma_out = np.zeros(n_rec)
    rec_set = {int(i): k for k, i in enumerate(rec_idx)}

    def record(i: int, x: np.ndarray, gamma: float, corrupt: bool):
        k = rec_set[i]
        obj_out[k] = objective.value(x)
        if track_dist:
            dx = x - objective.optimum
            dist_out[k] = float(np.dot(dx, dx))
        flag_out[k] = 1 if corrupt else 0
        gamma_out[k] = gamma

    state = OptimizerState.initial(method, x0)
    record(1, state.x, 0.0, False)
    recorded = 1
    diverged_at = None
    baseline_set = feasible_set if project_baselines else None
    for t in range(1, n_steps + 1):
        gamma_t = schedule.step_size(t)
        g = objective.subgradient(state.x)
        if not np.all(np.isfinite(g)):
            diverged_at = t
            break
        h, corrupt = channel.next_feedback(
            state.x, g, gamma_t, x_star=x_star, r=adversary_r
        )
        if not np.all(np.isfinite(h)):
            diverged_at = t
            break
        if method == "nsm":
            x_new = nsm_step(state.x, h, gamma_t, feasible_set, zero_tol)
            if not np.all(np.isfinite(x_new)):
                diverged_at = t
                break
            state.x = x_new
            state.t = t + 1
        else:
            try:
                state = baseline_step(state, h, gamma_t, baseline_set, hyper)
            except NonFiniteUpdateError:
                diverged_at = t
                break
        if t + 1 in rec_set:
            record(t + 1, state.x, gamma_t, corrupt)
            recorded += 1
    return _assemble(
        method, n_steps, rec_idx, recorded, obj_out, dist_out, flag_out,
        gamma_out, state.x, diverged_at,
    )


def _kernel_plan_supported(objective, feasible_set, channel) -> bool:
    if objective.kernel_payload is None:
        return False
    if not isinstance(feasible_set, (Ball, DiagBox, Unconstrained)):
        return False
    adv = channel.adversary
    return isinstance(adv, (WorstCaseDirectional, ScaledOpposite, NegateIterate, FixedVector))


def _run_kernel(
    objective, feasible_set, method, schedule, channel, x0, n_steps,
    hyper, rec_idx, project_baselines, x_star, adversary_r, zero_tol,
) -> Trajectory:
    payload = objective.kernel_payload
    track_dist = objective.optimum is not None
    n_rec = rec_idx.size
    d = x0.size
    plan = {
        "problem_kind": _backend.PROBLEM_CODES[payload.kind],
        "method": _backend.METHOD_CODES[method],
        "x1": np.ascontiguousarray(x0),
        "n_steps": int(n_steps),
        "rec_idx": np.ascontiguousarray(rec_idx),
        "zero_tol": float(zero_tol),
        "project_baselines": bool(project_baselines),
        "gamma0": float(schedule.gamma0 if isinstance(schedule, InverseT) else schedule.gamma),
        "constant_step": isinstance(schedule, Constant),
        "p": channel.p,
        "uniforms": channel.reserve_uniforms(n_steps),
        "momentum": hyper.momentum,
        "beta1": hyper.beta1,
        "beta2": hyper.beta2,
        "eps": hyper.eps,
        "rho": hyper.rho,
        "track_dist": track_dist,
        "optimum": np.ascontiguousarray(objective.optimum) if track_dist else np.zeros(d),
        "out_obj": np.zeros(n_rec),
        "out_dist": np.zeros(n_rec),
        "out_flag": np.zeros(n_rec, dtype=np.uint8),
        "out_gamma": np.zeros(n_rec),
        "out_x_final": np.zeros(d),
    }

    if payload.kind == "toy":
        plan["mat_a"] = np.zeros((1, 1))
        plan["vec_b"] = np.zeros(1)
        plan["scalar_c"] = 0.0
        plan["labels"] = np.zeros(1, dtype=np.int64)
        plan["n_classes"] = 0
        plan["lam"] = 0.0
    elif payload.kind == "lsq":
        plan["mat_a"] = payload.arrays["mat_g"]
        plan["vec_b"] = payload.arrays["vec_c"]
        plan["scalar_c"] = payload.arrays["scalar_yy"]
        plan["labels"] = np.zeros(1, dtype=np.int64)
        plan["n_classes"] = 0
        plan["lam"] = 0.0
    else:  # logistic
        plan["mat_a"] = payload.arrays["features"]
        plan["vec_b"] = np.zeros(1)
        plan["scalar_c"] = 0.0
        plan["labels"] = payload.arrays["labels"]
        plan["n_classes"] = int(payload.arrays["n_classes"])
        plan["lam"] = float(payload.arrays["lam"])

    if isinstance(feasible_set, Ball):
        plan["set_kind"] = _backend.SET_CODES["ball"]
        plan["set_center"] = np.ascontiguousarray(feasible_set.center)
        plan["set_radius"] = feasible_set.radius
        plan["set_bound"] = 0.0
    elif isinstance(feasible_set, DiagBox):
        plan["set_kind"] = _backend.SET_CODES["diagbox"]
        plan["set_center"] = np.zeros(d)
        plan["set_radius"] = 0.0
        plan["set_bound"] = feasible_set.bound
    else:
        plan["set_kind"] = _backend.SET_CODES["unconstrained"]
        plan["set_center"] = np.zeros(d)
        plan["set_radius"] = 0.0
        plan["set_bound"] = 0.0

    adv = channel.adversary
    plan["adv_factor"] = 0.0
    plan["adv_vec"] = np.zeros(d)
    plan["adv_x_star"] = np.zeros(d)
    plan["adv_r"] = 0.0
    if isinstance(adv, WorstCaseDirectional):
        if x_star is None or adversary_r is None:
            raise ValueError("worst-case directional adversary needs x_star and r")
        plan["adversary"] = _backend.ADVERSARY_CODES["worst-case"]
        plan["adv_x_star"] = np.ascontiguousarray(as_vector(x_star, dim=d, name="x_star"))
        plan["adv_r"] = float(adversary_r)
    elif isinstance(adv, ScaledOpposite):
        plan["adversary"] = _backend.ADVERSARY_CODES["scaled-opposite"]
        plan["adv_factor"] = adv.factor
    elif isinstance(adv, NegateIterate):
        plan["adversary"] = _backend.ADVERSARY_CODES["negate-iterate"]
        plan["adv_vec"] = np.ascontiguousarray(as_vector(adv.fallback, dim=d, name="fallback"))
    else:
        plan["adversary"] = _backend.ADVERSARY_CODES["fixed"]
        plan["adv_vec"] = np.ascontiguousarray(as_vector(adv.vector, dim=d, name="vector"))

    recorded, diverged, n_draws_used = _backend.kernel_run_loop(plan)
    channel.note_corruptions(int(np.count_nonzero(plan["uniforms"][:n_draws_used] < channel.p)))
    return _assemble(
        method, n_steps, rec_idx, recorded, plan["out_obj"],
        plan["out_dist"] if track_dist else None, plan["out_flag"],
        plan["out_gamma"], plan["out_x_final"], diverged if diverged > 0 else None,
    )


def _assemble(
    method, n_steps, rec_idx, recorded, obj_out, dist_out, flag_out,
    gamma_out, x_final, diverged_at,
) -> Trajectory:
    sl = slice(0, recorded)
    return Trajectory(
        method=method,
        n_steps=n_steps,
        iters=rec_idx[sl].copy(),
        objective=obj_out[sl].copy(),
        dist_sq=dist_out[sl].copy() if dist_out is not None else None,
        corrupt=flag_out[sl].copy(),
        gamma=gamma_out[sl].copy(),
        x_final=np.asarray(x_final, dtype=np.float64).copy(),
        diverged_at=diverged_at,
    )
