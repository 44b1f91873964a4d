import json
import logging

import numpy as np
import pytest

from morbench import bundled, problems
from morbench.exceptions import (
    DimensionMismatch,
    ManifestError,
    ParseError,
    SignDivergence,
    SingularE,
    UnsupportedFormat,
)
from morbench.model import LtiSystem


def write(path, text):
    path.write_text(text, encoding="ascii")
    return str(path)


class TestReadMatrixMarket:
    def test_coordinate(self, tmp_path):
        path = write(tmp_path / "m.mtx", "\n".join([
            "%%MatrixMarket matrix coordinate real general",
            "% a comment",
            "2 2 2",
            "1 1 5.0",
            "2 2 7.0",
        ]) + "\n")
        assert np.array_equal(problems.read_matrix_market(path),
                              [[5.0, 0.0], [0.0, 7.0]])

    def test_array_column_major(self, tmp_path):
        path = write(tmp_path / "m.mtx", "\n".join([
            "%%MatrixMarket matrix array real general",
            "2 1",
            "1",
            "2",
        ]) + "\n")
        assert np.array_equal(problems.read_matrix_market(path), [[1.0], [2.0]])

    def test_array_is_column_major_for_square(self, tmp_path):
        path = write(tmp_path / "m.mtx", "\n".join([
            "%%MatrixMarket matrix array real general",
            "2 2", "1", "2", "3", "4",
        ]) + "\n")
        assert np.array_equal(problems.read_matrix_market(path),
                              [[1.0, 3.0], [2.0, 4.0]])

    def test_symmetric_mirroring(self, tmp_path):
        path = write(tmp_path / "m.mtx", "\n".join([
            "%%MatrixMarket matrix coordinate real symmetric",
            "2 2 3",
            "1 1 1.0",
            "2 1 3.0",
            "2 2 1.0",
        ]) + "\n")
        assert np.array_equal(problems.read_matrix_market(path),
                              [[1.0, 3.0], [3.0, 1.0]])

    def test_symmetric_array(self, tmp_path):
        path = write(tmp_path / "m.mtx", "\n".join([
            "%%MatrixMarket matrix array real symmetric",
            "2 2", "4", "2", "3",
        ]) + "\n")
        assert np.array_equal(problems.read_matrix_market(path),
                              [[4.0, 2.0], [2.0, 3.0]])

    def test_integer_field(self, tmp_path):
        path = write(tmp_path / "m.mtx", "\n".join([
            "%%MatrixMarket matrix coordinate integer general",
            "1 1 1", "1 1 42",
        ]) + "\n")
        assert problems.read_matrix_market(path)[0, 0] == 42.0

    def test_complex_unsupported(self, tmp_path):
        path = write(tmp_path / "m.mtx",
                     "%%MatrixMarket matrix coordinate complex general\n1 1 1\n"
                     "1 1 1.0 2.0\n")
        with pytest.raises(UnsupportedFormat):
            problems.read_matrix_market(path)

    def test_pattern_unsupported(self, tmp_path):
        path = write(tmp_path / "m.mtx",
                     "%%MatrixMarket matrix coordinate pattern general\n1 1 1\n1 1\n")
        with pytest.raises(UnsupportedFormat):
            problems.read_matrix_market(path)

    def test_parse_error_carries_line(self, tmp_path):
        path = write(tmp_path / "m.mtx", "\n".join([
            "%%MatrixMarket matrix coordinate real general",
            "2 2 1",
            "1 x 5.0",
        ]) + "\n")
        with pytest.raises(ParseError) as err:
            problems.read_matrix_market(path)
        assert err.value.line == 3

    def test_bad_header(self, tmp_path):
        path = write(tmp_path / "m.mtx", "MatrixMarket nope\n")
        with pytest.raises(ParseError):
            problems.read_matrix_market(path)

    def test_out_of_bounds_index(self, tmp_path):
        path = write(tmp_path / "m.mtx", "\n".join([
            "%%MatrixMarket matrix coordinate real general",
            "2 2 1", "3 1 1.0",
        ]) + "\n")
        with pytest.raises(ParseError):
            problems.read_matrix_market(path)

    def test_wrong_entry_count(self, tmp_path):
        path = write(tmp_path / "m.mtx", "\n".join([
            "%%MatrixMarket matrix array real general",
            "2 2", "1", "2", "3",
        ]) + "\n")
        with pytest.raises(ParseError):
            problems.read_matrix_market(path)


class TestWriteRoundTrip:
    def test_bit_exact(self, tmp_path, rng):
        m = rng.standard_normal((7, 3)) * 10.0 ** rng.integers(-200, 200, size=(7, 3))
        path = tmp_path / "m.mtx"
        problems.write_matrix_market(path, m)
        back = problems.read_matrix_market(path)
        assert np.array_equal(back, m)

    def test_problem_roundtrip_bit_exact(self, tmp_path, rng):
        sys = LtiSystem(
            a=rng.standard_normal((4, 4)) - 5 * np.eye(4),
            b=rng.standard_normal((4, 2)),
            c=rng.standard_normal((3, 4)),
            d=rng.standard_normal((3, 2)),
            e=np.eye(4) + 0.01 * rng.standard_normal((4, 4)),
        )
        problems.write_problem(tmp_path, "toy_n4m2q3", sys, metadata={"license": "CC0"})
        prob, back = problems.load_problem(tmp_path / "toy_n4m2q3" / "manifest.json")
        assert prob.metadata["license"] == "CC0"
        for role in ("a", "b", "c", "d", "e"):
            assert np.array_equal(getattr(back, role), getattr(sys, role)), role


class TestLoadProblem:
    def make_problem(self, tmp_path, problem_id, mats):
        target = tmp_path / problem_id
        target.mkdir()
        files = {}
        for role, mat in mats.items():
            problems.write_matrix_market(target / f"{role}.mtx", mat)
            files[role] = f"{role}.mtx"
        manifest = {"id": problem_id, "format_version": 1, "files": files,
                    "metadata": {}}
        (target / "manifest.json").write_text(json.dumps(manifest))
        return target / "manifest.json"

    def test_defaults_c_identity_forces_q_equal_n(self, tmp_path):
        path = self.make_problem(tmp_path, "toy_n2m1q2", {
            "A": np.array([[-1.0, 0.0], [0.0, -2.0]]),
            "B": np.array([[1.0], [1.0]]),
        })
        _, sys = problems.load_problem(path)
        assert sys.e is None and sys.d is None
        assert np.array_equal(sys.c, np.eye(2))
        assert sys.q == 2

    def test_c_absent_with_wrong_q(self, tmp_path):
        path = self.make_problem(tmp_path, "toy_n2m1q1", {
            "A": -np.eye(2), "B": np.ones((2, 1)),
        })
        with pytest.raises(DimensionMismatch):
            problems.load_problem(path)

    def test_explicit_c(self, tmp_path):
        path = self.make_problem(tmp_path, "toy_n2m1q1", {
            "A": -np.eye(2), "B": np.ones((2, 1)), "C": np.array([[1.0, 0.0]]),
        })
        _, sys = problems.load_problem(path)
        assert sys.e is None and sys.d is None and sys.q == 1

    def test_id_dimension_cross_check(self, tmp_path):
        path = self.make_problem(tmp_path, "toy_n3m1q1", {
            "A": -np.eye(2), "B": np.ones((2, 1)), "C": np.ones((1, 2)),
        })
        with pytest.raises(DimensionMismatch):
            problems.load_problem(path)

    def test_singular_e_rejected(self, tmp_path):
        path = self.make_problem(tmp_path, "toy_n2m1q2", {
            "A": -np.eye(2), "B": np.ones((2, 1)),
            "E": np.array([[1.0, 1.0], [1.0, 1.0]]),
        })
        with pytest.raises(SingularE):
            problems.load_problem(path)

    def test_missing_role_b(self, tmp_path):
        target = tmp_path / "toy_n2m1q2"
        target.mkdir()
        problems.write_matrix_market(target / "A.mtx", -np.eye(2))
        (target / "manifest.json").write_text(json.dumps({
            "id": "toy_n2m1q2", "files": {"A": "A.mtx"}, "metadata": {}}))
        with pytest.raises(ManifestError):
            problems.load_problem(target / "manifest.json")

    def test_implicit_e_matches_explicit_identity(self, tmp_path, rng):
        from morbench import analyzer, methods
        mats = {"A": rng.standard_normal((3, 3)) - 4 * np.eye(3),
                "B": rng.standard_normal((3, 1)),
                "C": rng.standard_normal((1, 3))}
        p_imp = self.make_problem(tmp_path, "imp_n3m1q1", mats)
        _, sys_implicit = problems.load_problem(p_imp)
        mats["E"] = np.eye(3)
        p_exp = self.make_problem(tmp_path, "exp_n3m1q1", mats)
        _, sys_explicit = problems.load_problem(p_exp)
        for s in (0.0, 1.0, 1j, 10.0j):
            ga = analyzer.eval_tf(sys_implicit, s)
            gb = analyzer.eval_tf(sys_explicit, s)
            assert np.array_equal(ga, gb)
        ga = methods.gramians_sign(sys_implicit)
        gb = methods.gramians_sign(sys_explicit)
        assert np.array_equal(ga.lp, gb.lp)
        assert np.array_equal(ga.lq, gb.lq)


class TestListProblems:
    def test_bundled_sorted(self):
        probs = problems.list_problems(bundled.default_registry())
        ids = [p.id for p in probs]
        assert ids == sorted(ids)
        assert "heatToy_n100m2q2" in ids

    def test_empty_dir(self, tmp_path):
        assert problems.list_problems(tmp_path) == []

    def test_malformed_manifest_warns(self, tmp_path, caplog, rng):
        good = tmp_path / "good_n1m1q1"
        good.mkdir()
        problems.write_matrix_market(good / "A.mtx", [[-1.0]])
        problems.write_matrix_market(good / "B.mtx", [[1.0]])
        problems.write_matrix_market(good / "C.mtx", [[1.0]])
        (good / "manifest.json").write_text(json.dumps({
            "id": "good_n1m1q1", "format_version": 1,
            "files": {"A": "A.mtx", "B": "B.mtx", "C": "C.mtx"}, "metadata": {}}))
        bad = tmp_path / "bad"
        bad.mkdir()
        (bad / "manifest.json").write_text("{ not json")
        with caplog.at_level(logging.WARNING, logger="morbench.problems"):
            found = problems.list_problems(tmp_path)
        assert [p.id for p in found] == ["good_n1m1q1"]
        assert any("skipping" in rec.message for rec in caplog.records)


class TestIsStable:
    def test_stable_scalar(self):
        assert problems.is_stable(LtiSystem(a=[[-1.0]], b=[[1.0]], c=[[1.0]],
                                            e=[[1.0]])) is True

    def test_unstable_scalar(self):
        assert problems.is_stable(LtiSystem(a=[[1.0]], b=[[1.0]], c=[[1.0]])) is False

    def test_oscillator_indeterminate(self):
        sys = LtiSystem(a=[[0.0, 1.0], [-1.0, 0.0]], b=[[1.0], [0.0]],
                        c=[[1.0, 0.0]])
        with pytest.raises(SignDivergence):
            problems.is_stable(sys)

    def test_generalized_pencil(self, rng):
        from conftest import rand_stable
        sys = rand_stable(rng, 8, 2, 2, with_e=True)
        assert problems.is_stable(sys) is True
