import json

import numpy as np
import pytest

from cgfusion import Operator, SystemFileError, load_operator, load_system, save_system
from cgfusion.report import dumps_canonical, format_float
from cgfusion.sysio import (
    has_secondary_weights,
    load_document,
    operators_from_document,
    system_from_document,
    system_to_document,
)

from conftest import make_e2


E2_DOC = {
    "version": "1",
    "ambient_dim": 2,
    "nodes": [
        {"id": "n0", "mu": 1.0, "v": 2.0, "subspace": [[1.0, 0.0]], "local_operator": [[1.0]]},
        {"id": "n1", "mu": 1.0, "v": 1.0, "subspace": [[0.0, 1.0]], "local_operator": [[1.0]]},
    ],
}


def write_doc(tmp_path, doc, name="system.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc), encoding="utf-8")
    return path


class TestLoadSystem:
    def test_e2_round_trip(self, tmp_path, e2):
        path = write_doc(tmp_path, E2_DOC)
        system = load_system(path)
        np.testing.assert_array_equal(system.weights, e2.weights)
        np.testing.assert_array_equal(system.nodes.mu, e2.nodes.mu)
        for a, b in zip(system.effective_maps, e2.effective_maps):
            np.testing.assert_array_equal(a, b)

    def test_zero_mass_rejected_naming_node(self, tmp_path):
        doc = json.loads(json.dumps(E2_DOC))
        doc["nodes"][1]["mu"] = 0.0
        path = write_doc(tmp_path, doc)
        with pytest.raises(SystemFileError, match="n1"):
            load_system(path)

    def test_coarse_basis_rejected(self, tmp_path):
        # gram defect ~1e-3, far beyond the 1e-6 repair threshold
        doc = json.loads(json.dumps(E2_DOC))
        doc["nodes"][0]["subspace"] = [[1.0005, 0.0]]
        path = write_doc(tmp_path, doc)
        with pytest.raises(SystemFileError, match="orthonormality"):
            load_system(path)

    def test_small_defect_repaired(self, tmp_path):
        # gram defect 1e-8 sits between the strict and repair thresholds
        doc = json.loads(json.dumps(E2_DOC))
        doc["nodes"][0]["subspace"] = [[1.0, 1e-4]]
        path = write_doc(tmp_path, doc)
        system = load_system(path)
        basis = system.subspaces[0].basis
        np.testing.assert_allclose(basis.T @ basis, np.eye(1), atol=1e-14)
        assert abs(np.linalg.norm(basis[:, 0]) - 1.0) <= 1e-14

    def test_missing_version_rejected(self, tmp_path):
        doc = {"ambient_dim": 2, "nodes": E2_DOC["nodes"]}
        path = write_doc(tmp_path, doc)
        with pytest.raises(SystemFileError, match="version"):
            load_system(path)

    def test_invalid_json_rejected(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text("{not json", encoding="utf-8")
        with pytest.raises(SystemFileError, match="line"):
            load_system(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(SystemFileError, match="not found"):
            load_system(tmp_path / "absent.json")

    def test_local_operator_column_mismatch(self, tmp_path):
        doc = json.loads(json.dumps(E2_DOC))
        doc["nodes"][0]["local_operator"] = [[1.0, 0.0]]
        path = write_doc(tmp_path, doc)
        with pytest.raises(SystemFileError, match="local_operator"):
            load_system(path)


class TestSaveLoad:
    def test_save_then_load_is_bit_exact(self, tmp_path, e2):
        path = tmp_path / "e2.json"
        save_system(e2, path)
        loaded = load_system(path)
        np.testing.assert_array_equal(loaded.weights, e2.weights)
        np.testing.assert_array_equal(loaded.nodes.mu, e2.nodes.mu)
        for a, b in zip(loaded.subspaces, e2.subspaces):
            np.testing.assert_array_equal(a.basis, b.basis)
        for a, b in zip(loaded.local_maps, e2.local_maps):
            np.testing.assert_array_equal(a.entries, b.entries)

    def test_awkward_floats_survive(self, tmp_path):
        system = make_e2().with_weights(np.array([0.1, np.pi]))
        path = tmp_path / "pi.json"
        save_system(system, path)
        loaded = load_system(path)
        np.testing.assert_array_equal(loaded.weights, system.weights)

    def test_save_is_canonical(self, tmp_path, e2):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        save_system(e2, a)
        save_system(e2, b)
        assert a.read_bytes() == b.read_bytes()

    def test_load_save_numeric_identity(self, tmp_path):
        path = write_doc(tmp_path, E2_DOC)
        system = load_system(path)
        doc = system_to_document(system)
        reloaded = system_from_document(doc)
        for a, b in zip(reloaded.effective_maps, system.effective_maps):
            np.testing.assert_array_equal(a, b)

    def test_save_load_preserves_raw_numbers(self, tmp_path):
        # every numeric field survives a load/save cycle bit-exactly
        doc = {
            "version": "1",
            "ambient_dim": 2,
            "nodes": [
                {"id": "a", "mu": 0.1, "v": 1.0 / 3.0,
                 "subspace": [[1.0, 0.0]], "local_operator": [[2.0 / 3.0]]},
                {"id": "b", "mu": 2.718281828459045, "v": 3.141592653589793,
                 "subspace": [[0.0, 1.0]], "local_operator": [[1e-5]]},
            ],
        }
        path = write_doc(tmp_path, doc)
        system = load_system(path)
        out = tmp_path / "resaved.json"
        save_system(system, out)
        resaved = json.loads(out.read_text())
        for orig, new in zip(doc["nodes"], resaved["nodes"]):
            assert new["mu"] == orig["mu"]
            assert new["v"] == orig["v"]
            assert new["subspace"] == orig["subspace"]
            assert new["local_operator"] == orig["local_operator"]

    def test_secondary_weights_round_trip(self, tmp_path, e2):
        path = tmp_path / "pair.json"
        save_system(e2, path, secondary_weights=[1.0, 1.0])
        doc = load_document(path)
        assert has_secondary_weights(doc)
        xi = system_from_document(doc, str(path), use_secondary=True)
        np.testing.assert_array_equal(xi.weights, [1.0, 1.0])


class TestOperators:
    def test_named_operator_table(self, tmp_path, e2):
        path = tmp_path / "with_ops.json"
        save_system(e2, path, operators={"K": Operator.identity(2)})
        ops = operators_from_document(load_document(path))
        np.testing.assert_array_equal(ops["K"].entries, np.eye(2))

    def test_bare_matrix_file(self, tmp_path):
        path = tmp_path / "k.json"
        path.write_text("[[1.0, 0.0], [0.0, 2.0]]", encoding="utf-8")
        op = load_operator(path)
        np.testing.assert_array_equal(op.entries, np.diag([1.0, 2.0]))

    def test_wrapped_matrix_file(self, tmp_path):
        path = tmp_path / "k.json"
        path.write_text(json.dumps({"version": "1", "matrix": [[0.0, 1.0], [1.0, 0.0]]}))
        op = load_operator(path)
        assert op.entries[0, 1] == 1.0


class TestCanonicalJson:
    def test_seventeen_digit_floats_round_trip(self):
        for value in (0.1, np.pi, 1.0, 2.0 / 3.0, 1e-300, -0.0, 123456789.123456789):
            assert float(format_float(value)) == value

    def test_sorted_keys(self):
        text = dumps_canonical({"b": 1, "a": 2})
        assert text.index('"a"') < text.index('"b"')

    def test_non_finite_rejected(self):
        with pytest.raises(ValueError):
            dumps_canonical({"x": float("nan")})
