import numpy as np
import pytest
from hypothesis import given, strategies as st

from morbench.exceptions import DimensionMismatch, MalformedId
from morbench.model import (
    AlgorithmIsotope,
    EnvInfo,
    LtiSystem,
    ReducedModel,
    RunRecord,
    format_problem_id,
    parse_problem_id,
)


class TestParseProblemId:
    def test_steel_profile(self):
        assert parse_problem_id("steelProfile_n1357m7q6") == ("steelProfile", 1357, 7, 6)

    def test_new_england(self):
        assert parse_problem_id("newEngland_n66m1q1") == ("newEngland", 66, 1, 1)

    @pytest.mark.parametrize("bad", [
        "foo_bar", "", "n1m1q1", "toy_n0m1q1", "toy_n1m1", "toy_n1m1q1x",
        "toy_n01m1q1", "toy-n1m1q1", "_n1m1q1",
    ])
    def test_rejects(self, bad):
        with pytest.raises(MalformedId):
            parse_problem_id(bad)

    @given(
        name=st.from_regex(r"[A-Za-z0-9]{1,12}", fullmatch=True),
        n=st.integers(1, 10**6),
        m=st.integers(1, 10**4),
        q=st.integers(1, 10**4),
    )
    def test_format_parse_roundtrip(self, name, n, m, q):
        assert parse_problem_id(format_problem_id(name, n, m, q)) == (name, n, m, q)


class TestLtiSystem:
    def test_dims(self, rng):
        sys = LtiSystem(a=np.eye(3) * -1, b=rng.standard_normal((3, 2)),
                        c=rng.standard_normal((4, 3)))
        assert (sys.n, sys.m, sys.q) == (3, 2, 4)
        assert sys.d is None and sys.e is None
        assert np.array_equal(sys.d_matrix(), np.zeros((4, 2)))

    def test_matrices_are_readonly(self):
        sys = LtiSystem(a=[[-1.0]], b=[[1.0]], c=[[1.0]])
        with pytest.raises(ValueError):
            sys.a[0, 0] = 2.0

    def test_input_array_not_aliased(self):
        a = np.array([[-1.0]])
        sys = LtiSystem(a=a, b=[[1.0]], c=[[1.0]])
        a[0, 0] = 7.0
        assert sys.a[0, 0] == -1.0

    @given(st.data())
    def test_rejects_mismatched_shapes(self, data):
        n = data.draw(st.integers(1, 5))
        m = data.draw(st.integers(1, 4))
        q = data.draw(st.integers(1, 4))
        shapes = {
            "a": (n, n), "b": (n, m), "c": (q, n), "d": (q, m), "e": (n, n),
        }
        victim = data.draw(st.sampled_from(sorted(shapes)))
        dr = data.draw(st.integers(0, 2))
        dc = data.draw(st.integers(0, 2))
        rows, cols = shapes[victim]
        bad_shape = (rows + dr, cols + dc)
        if bad_shape == shapes[victim]:
            bad_shape = (rows + 1, cols)
        mats = {k: np.zeros(v) for k, v in shapes.items()}
        mats["a"] -= np.eye(n)
        mats[victim] = np.zeros(bad_shape)
        with pytest.raises(DimensionMismatch):
            LtiSystem(**mats)

    def test_rejects_nonfinite(self):
        with pytest.raises(DimensionMismatch):
            LtiSystem(a=[[np.nan]], b=[[1.0]], c=[[1.0]])

    def test_order_zero_allowed_for_reduced_models(self):
        sys = LtiSystem(a=np.zeros((0, 0)), b=np.zeros((0, 1)),
                        c=np.zeros((1, 0)), d=[[2.0]])
        assert sys.n == 0 and sys.q == 1


class TestReducedModel:
    def test_invariants(self):
        sys = LtiSystem(a=[[-1.0]], b=[[1.0]], c=[[1.0]])
        rom = ReducedModel(system=sys, r=1, hsv=[2.0, 1.0], truncation_tail=1.0)
        assert rom.hsv.tolist() == [2.0, 1.0]

    def test_rejects_increasing_hsv(self):
        sys = LtiSystem(a=[[-1.0]], b=[[1.0]], c=[[1.0]])
        with pytest.raises(DimensionMismatch):
            ReducedModel(system=sys, r=1, hsv=[1.0, 2.0], truncation_tail=0.0)

    def test_rejects_r_mismatch(self):
        sys = LtiSystem(a=[[-1.0]], b=[[1.0]], c=[[1.0]])
        with pytest.raises(DimensionMismatch):
            ReducedModel(system=sys, r=2, hsv=[1.0, 0.5], truncation_tail=0.0)


class TestRecords:
    def test_isotope_rejects_unknown_param(self):
        from morbench.exceptions import SchemaError
        with pytest.raises(SchemaError):
            AlgorithmIsotope("bt", "sign", {"banana": 1}, "bt-sign")

    def test_env_info_nonempty(self):
        with pytest.raises(DimensionMismatch):
            EnvInfo(timestamp="", os_name_version="x", tool_version="y", hostname="z")

    def test_run_record_status_consistency(self):
        with pytest.raises(DimensionMismatch):
            RunRecord(isotope="a", problem_id="p_n1m1q1", status="ok",
                      wall_time_s=0.1, reduced_order=None)
        with pytest.raises(DimensionMismatch):
            RunRecord(isotope="a", problem_id="p_n1m1q1", status="failed",
                      wall_time_s=0.1, reduced_order=3)
