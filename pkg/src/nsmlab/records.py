"""Flat per-iteration records, cross-seed aggregation, and CSV export.

The CSV contract is bit-exact: fixed header, LF endings, UTF-8, reals at 17
significant digits (round-trip exact), rows sorted by
``(run_id, method, seed, iter, metric)``.
"""

import statistics
from typing import NamedTuple

from .optimizers import Trajectory

__all__ = ["METRICS", "RunRecord", "records_from_trajectory", "sort_records",
           "aggregate", "write_csv", "format_real"]

METRICS = ("dist_sq_opt", "objective", "corrupt_flag", "gamma_t", "diverged")

# Seed column value used for cross-seed summary rows.
AGGREGATE_SEED = -1


class RunRecord(NamedTuple):
    run_id: str
    seed: int
    method: str
    iter: int
    metric: str
    value: float


def records_from_trajectory(traj: Trajectory, run_id: str, seed: int) -> list[RunRecord]:
    """Flatten a trajectory; a diverged run gains one final ``diverged`` row
    at the step whose update went non-finite."""
    iters = traj.iters.tolist()
    method = traj.method
    out = []
    if traj.dist_sq is not None:
        out += [RunRecord(run_id, seed, method, it, "dist_sq_opt", v)
                for it, v in zip(iters, traj.dist_sq.tolist())]
    out += [RunRecord(run_id, seed, method, it, "objective", v)
            for it, v in zip(iters, traj.objective.tolist())]
    out += [RunRecord(run_id, seed, method, it, "corrupt_flag", float(v))
            for it, v in zip(iters, traj.corrupt.tolist())]
    out += [RunRecord(run_id, seed, method, it, "gamma_t", v)
            for it, v in zip(iters, traj.gamma.tolist())]
    if traj.diverged_at is not None:
        out.append(RunRecord(run_id, seed, method, int(traj.diverged_at), "diverged", 1.0))
    return out


def _sort_key(rec: RunRecord):
    return (rec.run_id, rec.method, rec.seed, rec.iter, rec.metric)


def sort_records(records) -> list[RunRecord]:
    return sorted(records, key=_sort_key)


def aggregate(records, statistic: str = "mean") -> list[RunRecord]:
    """Collapse seeds: one row per ``(run_id, method, iter, metric)``.

    ``statistic`` is ``mean``, ``median``, or ``last`` (the highest seed's
    value).  Duplicate ``(run_id, method, seed, iter, metric)`` keys mean the
    records mix configurations and raise.
    """
    if statistic not in ("mean", "median", "last"):
        raise ValueError(f"unknown statistic {statistic!r}")
    groups: dict[tuple, dict[int, float]] = {}
    for rec in records:
        key = (rec.run_id, rec.method, rec.iter, rec.metric)
        per_seed = groups.setdefault(key, {})
        if rec.seed in per_seed:
            raise ValueError(
                f"duplicate record for {key} seed {rec.seed}: records mix configurations"
            )
        per_seed[rec.seed] = rec.value
    out = []
    for (run_id, method, it, metric), per_seed in groups.items():
        values = [per_seed[s] for s in sorted(per_seed)]
        if statistic == "mean":
            value = sum(values) / len(values)
        elif statistic == "median":
            value = statistics.median(values)
        else:
            value = values[-1]
        out.append(RunRecord(run_id, AGGREGATE_SEED, method, it, metric, value))
    return sort_records(out)


def format_real(v: float) -> str:
    """17 significant digits: parses back to the identical float."""
    return f"{v:.17g}"


def write_csv(records, path) -> None:
    """Write sorted records with the fixed ``run_id,seed,method,iter,metric,value``
    header.  Byte-identical for identical record lists."""
    rows = sort_records(records)
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("run_id,seed,method,iter,metric,value\n")
            for rec in rows:
                fh.write(
                    f"{rec.run_id},{rec.seed},{rec.method},{rec.iter},"
                    f"{rec.metric},{format_real(rec.value)}\n"
                )
    except OSError as exc:
        raise OSError(f"cannot write CSV to {path}: {exc}") from exc
