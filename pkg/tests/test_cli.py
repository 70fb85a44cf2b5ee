import json

import numpy as np
import pytest

from cgfusion import Operator, random_system, save_system, validate_nodes
from cgfusion.cli import main
from cgfusion.measure import WeightProfile

from conftest import make_e1, make_e2, make_single_node


@pytest.fixture
def e2_path(tmp_path):
    path = tmp_path / "e2.json"
    save_system(make_e2(), path)
    return str(path)


@pytest.fixture
def e1_path(tmp_path):
    path = tmp_path / "e1.json"
    save_system(make_e1(), path)
    return str(path)


def write_matrix(tmp_path, name, matrix):
    path = tmp_path / name
    path.write_text(json.dumps(matrix), encoding="utf-8")
    return str(path)


class TestCheck:
    def test_frame_passes(self, e2_path, capsys):
        assert main(["check", e2_path]) == 0
        out = capsys.readouterr().out
        assert "classification: frame" in out
        assert "lower = 1" in out
        assert "upper = 4" in out

    def test_bessel_only_fails(self, tmp_path, capsys):
        path = tmp_path / "single.json"
        save_system(make_single_node(), path)
        assert main(["check", str(path)]) == 1
        assert "bessel-only" in capsys.readouterr().out

    def test_report_written(self, e2_path, tmp_path):
        out = tmp_path / "report.json"
        assert main(["check", e2_path, "--out", str(out)]) == 0
        doc = json.loads(out.read_text())
        assert doc["kind"] == "report"
        assert doc["passed"] is True
        names = [r["name"] for r in doc["reports"]]
        assert names == sorted(names)

    def test_missing_file_is_usage_error(self, tmp_path):
        assert main(["check", str(tmp_path / "nope.json")]) == 2

    def test_malformed_file_is_usage_error(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{", encoding="utf-8")
        assert main(["check", str(path)]) == 2


class TestKgf:
    def test_small_bound_passes(self, e2_path, tmp_path):
        k = write_matrix(tmp_path, "k.json", [[1.0, 0.0], [0.0, 1.0]])
        assert main(["kgf", e2_path, "--K", k, "--A", "1"]) == 0

    def test_large_bound_fails(self, e2_path, tmp_path, capsys):
        k = write_matrix(tmp_path, "k.json", [[1.0, 0.0], [0.0, 1.0]])
        assert main(["kgf", e2_path, "--K", k, "--A", "2"]) == 1
        assert "gap = -1" in capsys.readouterr().out

    def test_without_bound_reports_a_star(self, e2_path, tmp_path, capsys):
        k = write_matrix(tmp_path, "k.json", [[1.0, 0.0], [0.0, 1.0]])
        assert main(["kgf", e2_path, "--K", k]) == 0
        assert "a_star" in capsys.readouterr().out

    def test_operator_from_system_file(self, tmp_path):
        path = tmp_path / "sys.json"
        save_system(make_e2(), path, operators={"K": Operator.identity(2)})
        assert main(["kgf", str(path), "--A", "1"]) == 0

    def test_missing_operator_is_usage_error(self, e2_path):
        assert main(["kgf", e2_path, "--A", "1"]) == 2


class TestResolve:
    def test_frame_suite_passes(self, e2_path):
        assert main(["resolve", e2_path, "--trials", "30"]) == 0

    def test_parseval_system_certifies(self, e1_path, capsys):
        assert main(["resolve", e1_path, "--trials", "30"]) == 0
        assert "certified_lower = 1" in capsys.readouterr().out

    def test_non_frame_fails(self, tmp_path):
        path = tmp_path / "single.json"
        save_system(make_single_node(), path)
        assert main(["resolve", str(path), "--trials", "10"]) == 1


class TestAtomic:
    def test_default_uses_frame_operator(self, e2_path, capsys):
        assert main(["atomic", e2_path]) == 0
        assert "a_star = 0.25" in capsys.readouterr().out

    def test_explicit_operator(self, e2_path, tmp_path):
        k = write_matrix(tmp_path, "k.json", [[1.0, 0.0], [0.0, 1.0]])
        assert main(["atomic", e2_path, "--K", k]) == 0

    def test_non_frame_fails(self, tmp_path):
        path = tmp_path / "single.json"
        save_system(make_single_node(), path)
        assert main(["atomic", str(path)]) == 1


class TestTransform:
    def test_shift_writes_loadable_system(self, e2_path, tmp_path):
        l = write_matrix(tmp_path, "l.json", [[1.0, 0.0], [0.0, 0.0]])
        out = tmp_path / "shifted.json"
        assert main(["transform", e2_path, "--L", l, "--out", str(out)]) == 0
        assert main(["check", str(out)]) == 0
        doc = json.loads(out.read_text())
        assert doc["version"] == "1"

    def test_shift_requires_positive(self, e2_path, tmp_path):
        l = write_matrix(tmp_path, "l.json", [[-1.0, 0.0], [0.0, 0.0]])
        assert main(["transform", e2_path, "--L", l]) == 1

    def test_missing_l_is_usage_error(self, e2_path):
        assert main(["transform", e2_path]) == 2

    def test_combined_transform(self, tmp_path, capsys):
        from conftest import make_system

        chi = make_system(2, bases=[[[1.0], [0.0]], [[0.0], [1.0]]],
                          local_maps=[[[1.0]], [[0.0]]], weights=[1.0, 1.0])
        xi = make_system(2, bases=[[[1.0], [0.0]], [[0.0], [1.0]]],
                         local_maps=[[[0.0]], [[1.0]]], weights=[1.0, 1.0])
        chi_path, xi_path = tmp_path / "chi.json", tmp_path / "xi.json"
        save_system(chi, chi_path)
        save_system(xi, xi_path)
        half = write_matrix(tmp_path, "half.json", [[0.5, 0.0], [0.0, 0.5]])
        out = tmp_path / "combined.json"
        assert main(["transform", str(chi_path), "--xi", str(xi_path),
                     "--L", half, "--G", half, "--out", str(out)]) == 0
        capsys.readouterr()
        assert main(["check", str(out)]) == 0
        assert "classification: parseval" in capsys.readouterr().out


class TestPair:
    def test_two_files(self, e2_path, e1_path):
        assert main(["pair", e2_path, "--xi", e1_path, "--trials", "20"]) == 0

    def test_secondary_weights(self, tmp_path):
        path = tmp_path / "pair.json"
        save_system(make_e1(), path, secondary_weights=[0.8, 1.0])
        assert main(["pair", str(path), "--trials", "20"]) == 0

    def test_missing_xi_is_usage_error(self, e2_path):
        assert main(["pair", e2_path]) == 2

    def test_explicit_lambda_failure(self, tmp_path):
        path = tmp_path / "pair.json"
        save_system(make_e1(), path, secondary_weights=[0.8, 1.0])
        assert main(["pair", str(path), "--lam", "0.05", "--trials", "10"]) == 1


class TestProducingCommands:
    def test_parseval_pipeline(self, e2_path, tmp_path, capsys):
        out = tmp_path / "flat.json"
        assert main(["parseval", e2_path, "--out", str(out)]) == 0
        capsys.readouterr()
        assert main(["check", str(out)]) == 0
        assert "classification: parseval" in capsys.readouterr().out

    def test_dual_pipeline(self, e2_path, tmp_path, capsys):
        out = tmp_path / "dual.json"
        assert main(["dual", e2_path, "--out", str(out)]) == 0
        capsys.readouterr()
        assert main(["check", str(out)]) == 0
        out_text = capsys.readouterr().out
        assert "lower = 0.25" in out_text
        assert "upper = 1" in out_text

    def test_dsum_pipeline(self, e2_path, e1_path, tmp_path, capsys):
        out = tmp_path / "sum.json"
        assert main(["dsum", e2_path, "--xi", e1_path, "--out", str(out)]) == 0
        capsys.readouterr()
        assert main(["check", str(out)]) == 0
        assert "lower = 1" in capsys.readouterr().out

    def test_parseval_rejects_non_frame(self, tmp_path):
        path = tmp_path / "single.json"
        save_system(make_single_node(), path)
        assert main(["parseval", str(path)]) == 1

    def test_random_generates_valid_system(self, tmp_path):
        out = tmp_path / "rand.json"
        assert main(["random", "--dim", "5", "--nodes", "4", "--seed", "7",
                     "--out", str(out)]) == 0
        assert main(["check", str(out)]) in (0, 1)  # may or may not be a frame

    def test_random_seeds_validate(self):
        # construction would raise if any system invariant failed
        for seed in range(1000):
            system = random_system(np.random.default_rng(seed), 4, 3)
            assert validate_nodes(system.nodes, WeightProfile(system.weights)).passed


class TestSelftest:
    def test_deterministic_and_green(self, tmp_path):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        assert main(["selftest", "--seed", "0", "--trials", "30", "--out", str(a)]) == 0
        assert main(["selftest", "--seed", "0", "--trials", "30", "--out", str(b)]) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_parallel_matches_sequential(self, tmp_path):
        a, b = tmp_path / "seq.json", tmp_path / "par.json"
        assert main(["selftest", "--seed", "3", "--trials", "20", "--out", str(a)]) == 0
        assert main(["selftest", "--seed", "3", "--trials", "20", "--parallel",
                     "--out", str(b)]) == 0
        assert a.read_bytes() == b.read_bytes()


class TestFlags:
    def test_env_tol_override(self, e2_path, tmp_path, monkeypatch):
        monkeypatch.setenv("CGFUSION_TOL", "1e-6")
        out = tmp_path / "report.json"
        assert main(["check", e2_path, "--out", str(out)]) == 0
        assert json.loads(out.read_text())["parameters"]["tol"] == 1e-6

    def test_flag_beats_env(self, e2_path, tmp_path, monkeypatch):
        monkeypatch.setenv("CGFUSION_TOL", "1e-3")
        out = tmp_path / "report.json"
        assert main(["check", e2_path, "--tol", "1e-9", "--out", str(out)]) == 0
        assert json.loads(out.read_text())["parameters"]["tol"] == 1e-9

    def test_unknown_subcommand_exits_two(self):
        with pytest.raises(SystemExit) as excinfo:
            main(["frobnicate"])
        assert excinfo.value.code == 2
