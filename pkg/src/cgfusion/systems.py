"""Weighted-subspace measurement systems and their frame operators.

A system attaches to every measure node a subspace of the ambient space,
a local operator acting in that subspace's coordinates, and a positive
weight.  Node i measures a vector f as

    weight_i * local_i @ (basis_i^T f),

i.e. project, express in basis coordinates, apply the local operator.
Storing the local operator in basis coordinates makes the effective map
factor through the subspace projection by construction; the rank-typed
alternative (arbitrary maps silently ignoring the projection) cannot be
represented at all.

The frame operator accumulates mass * weight^2 * Lam^T Lam over nodes
(Lam being the effective map); its spectral extremes are the optimal
frame bounds because the measurement energy equals the Rayleigh quotient
of the frame operator.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateKError, ShapeError
from .measure import (
    CoefficientField,
    MeasureNodes,
    validate_nodes,
    weighted_inner,
    weighted_norm,
)
from .operators import (
    ORDER_TOL,
    RANK_TOL,
    Operator,
    OrderCertificate,
    Subspace,
    _as_vector,
    operator_leq,
    symmetrize,
)
from .report import SAMPLED, VerificationReport, build_report

#: Legal frame classifications, from worst to best.
CLASSIFICATIONS = (
    "not-bessel-input-error",
    "bessel-only",
    "frame",
    "tight",
    "parseval",
)

_FACTOR_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class GFusionSystem:
    """A family over measure nodes of (subspace, local operator, weight)."""

    ambient_dim: int
    nodes: MeasureNodes
    subspaces: tuple[Subspace, ...]
    local_maps: tuple[Operator, ...]
    weights: np.ndarray

    def __post_init__(self):
        n = int(self.ambient_dim)
        if n < 1:
            raise ShapeError("ambient_dim must be >= 1")
        object.__setattr__(self, "ambient_dim", n)
        node_report = validate_nodes(self.nodes)
        if not node_report.passed:
            raise ValueError("invalid nodes: " + "; ".join(node_report.notes))
        count = len(self.nodes)
        subspaces = tuple(self.subspaces)
        local_maps = tuple(self.local_maps)
        weights = np.array(self.weights, dtype=float)
        if weights.ndim != 1 or weights.shape[0] != count:
            raise ShapeError(f"expected {count} weights, got shape {weights.shape}")
        if weights.size and (not np.all(np.isfinite(weights)) or not np.all(weights > 0)):
            raise ValueError("weights must be finite and positive")
        if len(subspaces) != count or len(local_maps) != count:
            raise ShapeError(
                f"{count} nodes but {len(subspaces)} subspaces / {len(local_maps)} local maps"
            )
        effective = []
        for i in range(count):
            sub = subspaces[i]
            loc = local_maps[i]
            if sub.ambient_dim != n:
                raise ShapeError(f"node {i}: subspace lives in R^{sub.ambient_dim}, not R^{n}")
            if loc.cols != sub.dim:
                raise ShapeError(
                    f"node {i}: local operator has {loc.cols} columns, "
                    f"subspace dimension is {sub.dim}"
                )
            lam = loc.entries @ sub.basis.T
            defect = np.abs(lam - lam @ sub.projector()).max() if lam.size else 0.0
            if defect > _FACTOR_TOL:
                raise ValueError(
                    f"node {i}: effective map does not factor through the projection "
                    f"(defect {defect:.3e})"
                )
            lam.setflags(write=False)
            effective.append(lam)
        weights.setflags(write=False)
        object.__setattr__(self, "subspaces", subspaces)
        object.__setattr__(self, "local_maps", local_maps)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "_effective", tuple(effective))

    @property
    def node_count(self) -> int:
        return len(self.nodes)

    @property
    def codomain_dims(self) -> tuple[int, ...]:
        return tuple(op.rows for op in self.local_maps)

    @property
    def effective_maps(self) -> tuple[np.ndarray, ...]:
        """Per-node maps local_i basis_i^T, shape (m_i, ambient_dim)."""
        return self._effective

    def with_weights(self, weights) -> "GFusionSystem":
        return GFusionSystem(
            self.ambient_dim, self.nodes, self.subspaces, self.local_maps, weights
        )


@dataclass(frozen=True)
class FrameBounds:
    """Optimal frame bounds with a classification label."""

    lower: float
    upper: float
    classification: str

    def __post_init__(self):
        if self.classification not in CLASSIFICATIONS:
            raise ValueError(f"unknown classification {self.classification!r}")
        if self.lower > self.upper + 1e-12:
            raise ValueError("lower bound exceeds upper bound")


def assemble_frame_operator(system: GFusionSystem) -> Operator:
    """Frame operator S = sum_i mu_i v_i^2 Lam_i^T Lam_i (symmetrized).

    Nodes are accumulated in order; the result is symmetric positive
    semidefinite and equals synthesis composed with analysis.
    """
    n = system.ambient_dim
    acc = np.zeros((n, n))
    for mass, weight, lam in zip(system.nodes.mu, system.weights, system.effective_maps):
        acc += float(mass) * float(weight) ** 2 * (lam.T @ lam)
    return Operator(symmetrize(acc))


def analysis(system: GFusionSystem, f) -> CoefficientField:
    """Measure f at every node: block i is v_i Lam_i f."""
    vec = _as_vector(f, system.ambient_dim)
    return CoefficientField(
        tuple(
            float(weight) * (lam @ vec)
            for weight, lam in zip(system.weights, system.effective_maps)
        )
    )


def synthesis(system: GFusionSystem, phi: CoefficientField) -> np.ndarray:
    """Reassemble a vector from a coefficient field: sum_i mu_i v_i Lam_i^T phi_i.

    Adjoint to :func:`analysis` with respect to the mass-weighted inner
    product.
    """
    if len(phi) != system.node_count:
        raise ShapeError(f"{len(phi)} blocks for {system.node_count} nodes")
    if phi.block_dims != system.codomain_dims:
        raise ShapeError(
            f"block dims {phi.block_dims} do not match node codomains {system.codomain_dims}"
        )
    out = np.zeros(system.ambient_dim)
    for mass, weight, lam, block in zip(
        system.nodes.mu, system.weights, system.effective_maps, phi.blocks
    ):
        out += float(mass) * float(weight) * (lam.T @ block)
    return out


def frame_bounds(system: GFusionSystem, tol: float = ORDER_TOL) -> FrameBounds:
    """Optimal bounds: the spectral extremes of the frame operator.

    Classification requires lower > tol for "frame"; "tight" means the
    bounds agree within tol and "parseval" that both equal 1 within tol.
    """
    s = assemble_frame_operator(system).entries
    eigenvalues = np.linalg.eigvalsh(s)
    lower = max(float(eigenvalues[0]), 0.0)
    upper = max(float(eigenvalues[-1]), 0.0)
    if lower <= tol:
        label = "bessel-only"
    elif abs(lower - 1.0) <= tol and abs(upper - 1.0) <= tol:
        label = "parseval"
    elif abs(lower - upper) <= tol:
        label = "tight"
    else:
        label = "frame"
    return FrameBounds(lower, upper, label)


def _require_comparison_operator(system: GFusionSystem, k: Operator) -> None:
    n = system.ambient_dim
    if k.rows != n or k.cols != n:
        raise ShapeError(f"comparison operator must be {n}x{n}, got {k.rows}x{k.cols}")


def kgf_check(
    system: GFusionSystem, k: Operator, lower: float, tol: float = ORDER_TOL
) -> OrderCertificate:
    """Certify that the frame operator dominates lower * K K^T."""
    _require_comparison_operator(system, k)
    s = assemble_frame_operator(system)
    target = Operator(symmetrize(float(lower) * (k.entries @ k.entries.T)))
    return operator_leq(target, s, tol)


def kgf_lower_bound(system: GFusionSystem, k: Operator, tol: float = ORDER_TOL) -> float:
    """Largest constant A with A K K^T <= S, located by bisection.

    Bisection runs to absolute precision ``tol`` on [0, hi], where hi
    caps the constant through the smallest positive singular value of K.
    Returns 0 when no positive constant works within ``tol``.  K = 0
    raises :class:`DegenerateKError`: every constant works, so the
    condition certifies nothing.
    """
    _require_comparison_operator(system, k)
    if k.entries.size == 0 or np.abs(k.entries).max() == 0.0:
        raise DegenerateKError("comparison operator is zero; the bound is vacuous")
    s = assemble_frame_operator(system).entries
    gram = symmetrize(k.entries @ k.entries.T)
    s_max = max(float(np.linalg.eigvalsh(s)[-1]), 0.0)
    singular = np.linalg.svd(k.entries, compute_uv=False)
    positive = singular[singular > RANK_TOL * singular[0]]
    smallest_sq = float(positive[-1]) ** 2 if positive.size else 0.0
    hi = s_max / max(smallest_sq, 1e-30) + 1.0

    def dominated(a: float) -> bool:
        return float(np.linalg.eigvalsh(symmetrize(s - a * gram))[0]) >= -tol

    if not dominated(0.0):
        return 0.0
    for _ in range(64):
        if not dominated(hi):
            break
        hi *= 2.0
    else:
        return hi
    lo = 0.0
    precision = max(tol, 1e-15)
    while hi - lo > precision:
        mid = (lo + hi) / 2
        if dominated(mid):
            lo = mid
        else:
            hi = mid
    return lo if lo > precision else 0.0


def adjoint_consistency(
    system: GFusionSystem, trials: int = 100, seed: int = 0
) -> VerificationReport:
    """Sampled check that synthesis and analysis are mutually adjoint.

    For random f and phi, compares <synthesis(phi), f> in the ambient
    space with the mass-weighted <phi, analysis(f)>; reports the largest
    scale-normalized mismatch.
    """
    rng = np.random.default_rng(seed)
    dims = system.codomain_dims
    worst = 0.0
    for _ in range(max(int(trials), 1)):
        f = rng.standard_normal(system.ambient_dim)
        phi = CoefficientField(tuple(rng.standard_normal(d) for d in dims))
        left = float(synthesis(system, phi) @ f)
        right = weighted_inner(phi, analysis(system, f), system.nodes)
        scale = max(
            1.0,
            weighted_norm(phi, system.nodes) * float(np.linalg.norm(f)),
        )
        worst = max(worst, abs(left - right) / scale)
    return build_report(
        name="adjoint_consistency",
        residuals={"adjoint_mismatch": worst},
        tolerances={"tol": 1e-9},
        constants={"trials": float(trials)},
        provenance=SAMPLED,
    )
