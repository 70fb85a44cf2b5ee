"""Reading and writing system and operator files.

Files are UTF-8 JSON with a required ``"version": "1"`` tag.  A system
file looks like::

    {
      "version": "1",
      "ambient_dim": 2,
      "nodes": [
        {"id": "n0", "mu": 1.0, "v": 2.0,
         "subspace": [[1.0, 0.0]],
         "local_operator": [[1.0]]},
        ...
      ],
      "operators": {"K": [[...], ...]}
    }

``subspace`` lists basis vectors as rows (each of length ambient_dim);
``local_operator`` is an m x k row-list acting on basis coordinates;
``s`` is an optional secondary weight per node, and ``operators`` an
optional table of named square matrices.  Writing serializes every
number as decimal with 17 significant digits, which round-trips doubles
bit-exactly.

A basis whose orthonormality defect exceeds 1e-10 but stays within 1e-6
is silently re-orthonormalized on load (column order preserved); a worse
defect rejects the file.
"""

from __future__ import annotations

import json
import os

import numpy as np

from .errors import SystemFileError
from .measure import MeasureNodes, WeightProfile, validate_nodes
from .operators import Operator, Subspace, orthonormal_columns
from .report import dumps_canonical
from .systems import GFusionSystem

SCHEMA_VERSION = "1"
STRICT_ORTHONORMALITY = 1e-10
REPAIR_ORTHONORMALITY = 1e-6


def _fail(where: str, message: str):
    raise SystemFileError(f"{where}: {message}")


def _matrix_from(value, where: str, rows: int | None = None, cols: int | None = None) -> np.ndarray:
    try:
        arr = np.array(value, dtype=float)
    except (TypeError, ValueError):
        _fail(where, "expected a rectangular array of numbers")
    if arr.ndim == 1 and arr.size == 0:
        arr = arr.reshape(0, 0 if cols is None else cols)
    if arr.ndim != 2:
        _fail(where, f"expected a 2-d array, got ndim={arr.ndim}")
    if not np.all(np.isfinite(arr)):
        _fail(where, "entries must be finite")
    if rows is not None and arr.shape[0] != rows:
        _fail(where, f"expected {rows} rows, got {arr.shape[0]}")
    if cols is not None and arr.shape[1] != cols:
        _fail(where, f"expected {cols} columns, got {arr.shape[1]}")
    return arr


def load_document(path: str | os.PathLike) -> dict:
    """Parse a JSON document and check the schema version."""
    try:
        with open(path, "r", encoding="utf-8") as handle:
            doc = json.load(handle)
    except FileNotFoundError:
        raise SystemFileError(f"{path}: file not found")
    except json.JSONDecodeError as err:
        raise SystemFileError(f"{path}: invalid JSON at line {err.lineno}: {err.msg}")
    if not isinstance(doc, dict):
        _fail(str(path), "top level must be an object")
    version = doc.get("version")
    if version != SCHEMA_VERSION:
        _fail(str(path), f"unsupported schema version {version!r} (expected {SCHEMA_VERSION!r})")
    return doc


def _subspace_from(value, where: str, ambient_dim: int) -> Subspace:
    rows = _matrix_from(value, where, cols=ambient_dim) if value else np.zeros((0, ambient_dim))
    basis = rows.T
    k = basis.shape[1]
    if k == 0:
        return Subspace(ambient_dim, basis)
    defect = float(np.abs(basis.T @ basis - np.eye(k)).max())
    if defect > REPAIR_ORTHONORMALITY:
        _fail(where, f"basis orthonormality defect {defect:.3e} exceeds {REPAIR_ORTHONORMALITY:g}")
    if defect > STRICT_ORTHONORMALITY:
        try:
            basis = orthonormal_columns(basis, 1e-8, pivot=False)
        except ValueError:
            _fail(where, "basis vectors are numerically dependent")
    return Subspace(ambient_dim, basis)


def system_from_document(doc: dict, where: str = "document", use_secondary: bool = False) -> GFusionSystem:
    """Build and validate a system from a parsed document.

    With ``use_secondary`` the per-node ``s`` weights are used in place
    of ``v`` (they must then be present on every node).
    """
    ambient_dim = doc.get("ambient_dim")
    if not isinstance(ambient_dim, int) or ambient_dim < 1:
        _fail(where, f"ambient_dim must be a positive integer, got {ambient_dim!r}")
    raw_nodes = doc.get("nodes")
    if not isinstance(raw_nodes, list) or not raw_nodes:
        _fail(where, "nodes must be a non-empty list")
    ids = []
    masses = []
    weights = []
    subspaces = []
    locals_ = []
    for index, raw in enumerate(raw_nodes):
        spot = f"{where}: nodes[{index}]"
        if not isinstance(raw, dict):
            _fail(spot, "expected an object")
        node_id = raw.get("id")
        if not isinstance(node_id, str) or not node_id:
            _fail(spot, "id must be a non-empty string")
        spot = f"{where}: node {node_id!r}"
        mu = raw.get("mu")
        if not isinstance(mu, (int, float)) or not mu > 0:
            _fail(spot, f"mu must be > 0, got {mu!r}")
        key = "s" if use_secondary else "v"
        weight = raw.get(key)
        if weight is None and use_secondary:
            _fail(spot, "secondary weight 's' requested but absent")
        if not isinstance(weight, (int, float)) or not weight > 0:
            _fail(spot, f"{key} must be > 0, got {weight!r}")
        subspace = _subspace_from(raw.get("subspace", []), f"{spot}: subspace", ambient_dim)
        local = Operator(
            _matrix_from(raw.get("local_operator"), f"{spot}: local_operator", cols=subspace.dim)
        )
        ids.append(node_id)
        masses.append(float(mu))
        weights.append(float(weight))
        subspaces.append(subspace)
        locals_.append(local)
    nodes = MeasureNodes(tuple(ids), np.array(masses))
    node_report = validate_nodes(nodes, WeightProfile(np.array(weights)))
    if not node_report.passed:
        _fail(where, "; ".join(node_report.notes))
    try:
        return GFusionSystem(ambient_dim, nodes, tuple(subspaces), tuple(locals_), np.array(weights))
    except (ValueError, SystemFileError) as err:
        _fail(where, str(err))


def has_secondary_weights(doc: dict) -> bool:
    nodes = doc.get("nodes")
    return isinstance(nodes, list) and all(
        isinstance(n, dict) and isinstance(n.get("s"), (int, float)) for n in nodes
    )


def operators_from_document(doc: dict, where: str = "document") -> dict[str, Operator]:
    """Named square operators from the optional ``operators`` table."""
    table = doc.get("operators", {})
    if not isinstance(table, dict):
        _fail(where, "operators must be an object of named matrices")
    out = {}
    for name, value in table.items():
        out[name] = Operator(_matrix_from(value, f"{where}: operators[{name!r}]"))
    return out


def load_system(path: str | os.PathLike, use_secondary: bool = False) -> GFusionSystem:
    """Load and validate a system file."""
    return system_from_document(load_document(path), str(path), use_secondary)


def load_operator(path: str | os.PathLike, name: str = "matrix") -> Operator:
    """Load an operator file: either {"version","matrix"} or a bare row-list."""
    try:
        with open(path, "r", encoding="utf-8") as handle:
            doc = json.load(handle)
    except FileNotFoundError:
        raise SystemFileError(f"{path}: file not found")
    except json.JSONDecodeError as err:
        raise SystemFileError(f"{path}: invalid JSON at line {err.lineno}: {err.msg}")
    if isinstance(doc, dict):
        value = doc.get(name, doc.get("matrix"))
        if value is None:
            _fail(str(path), f"no {name!r} or 'matrix' entry")
    else:
        value = doc
    return Operator(_matrix_from(value, str(path)))


def system_to_document(
    system: GFusionSystem,
    secondary_weights=None,
    operators: dict[str, Operator] | None = None,
) -> dict:
    """Serializable document for a system (inverse of system_from_document)."""
    nodes = []
    for i in range(system.node_count):
        node = {
            "id": system.nodes.ids[i],
            "mu": float(system.nodes.mu[i]),
            "v": float(system.weights[i]),
            "subspace": [list(map(float, row)) for row in system.subspaces[i].basis.T],
            "local_operator": [list(map(float, row)) for row in system.local_maps[i].entries],
        }
        if secondary_weights is not None:
            node["s"] = float(secondary_weights[i])
        nodes.append(node)
    doc = {
        "version": SCHEMA_VERSION,
        "ambient_dim": system.ambient_dim,
        "nodes": nodes,
    }
    if operators:
        doc["operators"] = {
            name: [list(map(float, row)) for row in op.entries]
            for name, op in operators.items()
        }
    return doc


def save_system(
    system: GFusionSystem,
    path: str | os.PathLike,
    secondary_weights=None,
    operators: dict[str, Operator] | None = None,
) -> None:
    """Write a system file in canonical form."""
    text = dumps_canonical(system_to_document(system, secondary_weights, operators))
    with open(path, "w", encoding="utf-8") as handle:
        handle.write(text)
