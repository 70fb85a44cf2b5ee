import sys
from pathlib import Path

_SRC = Path(__file__).resolve().parents[1] / "src"
if str(_SRC) not in sys.path:
    sys.path.insert(0, str(_SRC))

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from cgfusion import GFusionSystem, MeasureNodes, Operator, Subspace

settings.register_profile(
    "ci",
    max_examples=25,
    deadline=None,
    derandomize=True,
    suppress_health_check=list(HealthCheck),
)
settings.load_profile("ci")


def make_system(ambient_dim, bases, local_maps, weights, masses=None, ids=None):
    """Build a system from raw arrays; bases are (ambient_dim x k) columns."""
    count = len(bases)
    if masses is None:
        masses = [1.0] * count
    if ids is None:
        ids = tuple(f"n{i}" for i in range(count))
    nodes = MeasureNodes(tuple(ids), np.asarray(masses, dtype=float))
    subspaces = tuple(Subspace(ambient_dim, np.asarray(b, dtype=float)) for b in bases)
    locals_ = tuple(Operator(np.asarray(x, dtype=float)) for x in local_maps)
    return GFusionSystem(ambient_dim, nodes, subspaces, locals_, np.asarray(weights, dtype=float))


def make_e1():
    """Two coordinate lines in R^2, scalar local maps, unit weights."""
    return make_system(
        2,
        bases=[[[1.0], [0.0]], [[0.0], [1.0]]],
        local_maps=[[[1.0]], [[1.0]]],
        weights=[1.0, 1.0],
    )


def make_e2():
    """E1 geometry with weights (2, 1); frame operator diag(4, 1)."""
    return make_system(
        2,
        bases=[[[1.0], [0.0]], [[0.0], [1.0]]],
        local_maps=[[[1.0]], [[1.0]]],
        weights=[2.0, 1.0],
    )


def make_single_node():
    """One node measuring span{e1} in R^2; frame operator diag(1, 0)."""
    return make_system(2, bases=[[[1.0], [0.0]]], local_maps=[[[1.0]]], weights=[1.0])


def lift_codomains(system):
    """Re-express local maps with codomain equal to the ambient space.

    Each scalar-coded local map X (m x k) becomes B X (n x k), embedding
    the measurement values along the subspace directions; effective maps
    become n x n without changing the frame operator.
    """
    locals_ = tuple(
        Operator(sub.basis @ loc.entries)
        for sub, loc in zip(system.subspaces, system.local_maps)
    )
    return GFusionSystem(
        system.ambient_dim, system.nodes, system.subspaces, locals_, system.weights
    )


@pytest.fixture
def e1():
    return make_e1()


@pytest.fixture
def e2():
    return make_e2()


@pytest.fixture
def single_node():
    return make_single_node()


@pytest.fixture
def e1_lifted():
    return lift_codomains(make_e1())


@pytest.fixture
def e2_lifted():
    return lift_codomains(make_e2())
