import numpy as np
import pytest

from nsmlab.corruption import CorruptionChannel, NegateIterate
from nsmlab.geometry import DiagBox
from nsmlab.optimizers import InverseT, run
from nsmlab.problems import toy_objective
from nsmlab.records import (
    RunRecord,
    aggregate,
    format_real,
    records_from_trajectory,
    sort_records,
    write_csv,
)


def toy_trajectory(seed=0, n_steps=5, p=0.4):
    obj = toy_objective(3)
    ch = CorruptionChannel(p, NegateIterate(np.ones(3)), seed)
    return run(obj, DiagBox(10.0, 3), "nsm", InverseT(5.0), ch, np.full(3, 5.0), n_steps)


class TestRecordsFromTrajectory:
    def test_metric_rows_per_iterate(self):
        traj = toy_trajectory(n_steps=5)
        recs = records_from_trajectory(traj, "toy_p=0.4", 0)
        # dist_sq_opt, objective, corrupt_flag, gamma_t for 6 iterates.
        assert len(recs) == 4 * 6
        assert {r.metric for r in recs} == {"dist_sq_opt", "objective", "corrupt_flag", "gamma_t"}

    def test_initial_record_has_zero_gamma_and_flag(self):
        traj = toy_trajectory(n_steps=3)
        recs = records_from_trajectory(traj, "toy", 1)
        first = [r for r in recs if r.iter == 1]
        by_metric = {r.metric: r.value for r in first}
        assert by_metric["gamma_t"] == 0.0
        assert by_metric["corrupt_flag"] == 0.0

    def test_no_dist_rows_without_optimum(self):
        traj = toy_trajectory(n_steps=2)
        object.__setattr__(traj, "dist_sq", None)
        recs = records_from_trajectory(traj, "x", 0)
        assert not any(r.metric == "dist_sq_opt" for r in recs)


class TestAggregate:
    def test_single_seed_identity(self):
        recs = [RunRecord("a", 3, "nsm", 1, "objective", 2.5)]
        out = aggregate(recs, "mean")
        assert out == [RunRecord("a", -1, "nsm", 1, "objective", 2.5)]

    def test_mean(self):
        recs = [RunRecord("a", s, "nsm", 1, "objective", v)
                for s, v in ((0, 1.0), (1, 2.0), (2, 3.0))]
        out = aggregate(recs, "mean")
        assert out[0].value == 2.0

    def test_median_and_last(self):
        recs = [RunRecord("a", s, "nsm", 1, "objective", v)
                for s, v in ((0, 5.0), (1, 1.0), (2, 3.0))]
        assert aggregate(recs, "median")[0].value == 3.0
        assert aggregate(recs, "last")[0].value == 3.0  # highest seed is 2

    def test_duplicate_key_rejected(self):
        recs = [RunRecord("a", 0, "nsm", 1, "objective", 1.0)] * 2
        with pytest.raises(ValueError, match="mix"):
            aggregate(recs, "mean")

    def test_unknown_statistic(self):
        with pytest.raises(ValueError):
            aggregate([], "mode")


class TestWriteCsv:
    def test_empty_records_header_only(self, tmp_path):
        path = tmp_path / "empty.csv"
        write_csv([], path)
        assert path.read_bytes() == b"run_id,seed,method,iter,metric,value\n"

    def test_single_record_two_lines(self, tmp_path):
        path = tmp_path / "one.csv"
        write_csv([RunRecord("r", 0, "nsm", 1, "objective", 0.1)], path)
        lines = path.read_text().splitlines()
        assert len(lines) == 2
        assert lines[1] == "r,0,nsm,1,objective,0.10000000000000001"

    def test_round_trip_exact(self):
        rng = np.random.default_rng(0)
        for _ in range(200):
            v = float(rng.standard_normal() * 10.0 ** rng.integers(-12, 12))
            assert float(format_real(v)) == v

    def test_sorted_output(self, tmp_path):
        recs = [
            RunRecord("b", 0, "nsm", 1, "objective", 1.0),
            RunRecord("a", 1, "gd", 2, "objective", 2.0),
            RunRecord("a", 0, "gd", 1, "objective", 3.0),
            RunRecord("a", 0, "adam", 1, "objective", 4.0),
        ]
        path = tmp_path / "sorted.csv"
        write_csv(recs, path)
        lines = path.read_text().splitlines()[1:]
        assert [l.split(",")[0] for l in lines] == ["a", "a", "a", "b"]
        assert lines[0].startswith("a,0,adam")

    def test_byte_identical_rerun(self, tmp_path):
        traj = toy_trajectory(seed=4, n_steps=50)
        recs = records_from_trajectory(traj, "toy", 4)
        p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
        write_csv(recs, p1)
        traj2 = toy_trajectory(seed=4, n_steps=50)
        write_csv(records_from_trajectory(traj2, "toy", 4), p2)
        assert p1.read_bytes() == p2.read_bytes()

    def test_lf_line_endings(self, tmp_path):
        path = tmp_path / "lf.csv"
        write_csv([RunRecord("r", 0, "nsm", 1, "objective", 1.0)], path)
        raw = path.read_bytes()
        assert b"\r" not in raw and raw.endswith(b"\n")

    def test_unwritable_path_raises(self, tmp_path):
        with pytest.raises(OSError, match="cannot write"):
            write_csv([], tmp_path / "missing" / "out.csv")


class TestDivergedRows:
    def test_diverged_marker_row(self):
        from nsmlab.corruption import FixedVector
        from nsmlab.geometry import Unconstrained
        from nsmlab.optimizers import Constant

        obj = toy_objective(2)
        ch = CorruptionChannel(1.0, FixedVector(np.full(2, 1e300)), 0)
        traj = run(obj, Unconstrained(2), "gd", Constant(1.0), ch, np.zeros(2), 20)
        recs = records_from_trajectory(traj, "boom", 0)
        div = [r for r in recs if r.metric == "diverged"]
        assert len(div) == 1
        assert div[0].value == 1.0
        assert 1 <= div[0].iter <= 21
        assert sort_records(recs)  # sortable with the marker included
