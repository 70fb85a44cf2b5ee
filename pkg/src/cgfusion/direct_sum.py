"""Direct sums of systems, Parseval canonicalization, and canonical duals.

The direct sum stacks two systems block-diagonally on the orthogonal sum
of their ambient spaces; its frame operator is the block diagonal of the
component operators and its bounds are the componentwise min/max.
Parsevalization pushes any frame through the inverse square root of its
frame operator, and the canonical dual through the inverse; both accept
arbitrary frames, not only block-structured ones, since neither
construction uses the block structure.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ShapeError, SingularFrameOperatorError
from .operators import (
    ORDER_TOL,
    Operator,
    Subspace,
    opnorm,
    orthonormalize_image,
    positive_sqrt,
)
from .report import EXACT, VerificationReport, build_report
from .systems import GFusionSystem, assemble_frame_operator, frame_bounds


@dataclass(frozen=True, eq=False)
class DirectSumSystem:
    """A block-structured system on the orthogonal sum of two spaces.

    Wraps the combined system together with the dimension split; the
    block structure is exact (off-diagonal blocks of every effective map
    are identically zero).
    """

    system: GFusionSystem
    left_dim: int
    right_dim: int
    left_codims: tuple[int, ...]
    right_codims: tuple[int, ...]

    def __post_init__(self):
        if self.left_dim + self.right_dim != self.system.ambient_dim:
            raise ShapeError("dimension split does not match the ambient dimension")
        expected = tuple(
            a + b for a, b in zip(self.left_codims, self.right_codims)
        )
        if expected != self.system.codomain_dims:
            raise ShapeError("codomain split does not match the node codomains")
        for i, lam in enumerate(self.system.effective_maps):
            m_left = self.left_codims[i]
            upper_right = lam[:m_left, self.left_dim:]
            lower_left = lam[m_left:, : self.left_dim]
            if (upper_right.size and np.abs(upper_right).max() != 0.0) or (
                lower_left.size and np.abs(lower_left).max() != 0.0
            ):
                raise ShapeError(f"node {i}: effective map is not block diagonal")


def direct_sum_system(chi: GFusionSystem, xi: GFusionSystem) -> DirectSumSystem:
    """Stack two systems sharing nodes into one block system.

    The combined system carries the left system's weights.  When the
    right system's weights differ per node, the ratio is folded into its
    block of the local maps, so both components keep their measurement
    energies exactly; the combined frame operator therefore equals
    blockdiag(S_chi, S_xi) and the combined bounds are the componentwise
    (min of lowers, max of uppers) in every case.
    """
    if chi.nodes.ids != xi.nodes.ids or not np.array_equal(chi.nodes.mu, xi.nodes.mu):
        raise ShapeError("systems must share their measure nodes")
    n, x = chi.ambient_dim, xi.ambient_dim
    subspaces = []
    locals_ = []
    for sub_a, sub_b, loc_a, loc_b, v, s in zip(
        chi.subspaces, xi.subspaces, chi.local_maps, xi.local_maps,
        chi.weights, xi.weights,
    ):
        basis = np.zeros((n + x, sub_a.dim + sub_b.dim))
        basis[:n, : sub_a.dim] = sub_a.basis
        basis[n:, sub_a.dim :] = sub_b.basis
        subspaces.append(Subspace(n + x, basis))
        local = np.zeros((loc_a.rows + loc_b.rows, loc_a.cols + loc_b.cols))
        local[: loc_a.rows, : loc_a.cols] = loc_a.entries
        ratio = 1.0 if s == v else float(s) / float(v)
        local[loc_a.rows :, loc_a.cols :] = ratio * loc_b.entries
        locals_.append(Operator(local))
    combined = GFusionSystem(
        n + x, chi.nodes, tuple(subspaces), tuple(locals_), chi.weights
    )
    return DirectSumSystem(
        system=combined,
        left_dim=n,
        right_dim=x,
        left_codims=chi.codomain_dims,
        right_codims=xi.codomain_dims,
    )


def _require_frame(system: GFusionSystem, tol: float):
    bounds = frame_bounds(system, tol)
    if bounds.lower <= tol:
        raise SingularFrameOperatorError(
            f"not a frame: smallest frame-operator eigenvalue {bounds.lower:.3e}"
        )
    return bounds


def _push_through(system: GFusionSystem, transform: np.ndarray) -> GFusionSystem:
    """Rebuild a system with subspaces T F_i and effective maps Lam_i T^T."""
    op = Operator(transform)
    subspaces = []
    locals_ = []
    for lam, sub in zip(system.effective_maps, system.subspaces):
        image = orthonormalize_image(op, sub)
        subspaces.append(image)
        locals_.append(Operator(lam @ transform.T @ image.basis))
    return GFusionSystem(
        system.ambient_dim, system.nodes, tuple(subspaces), tuple(locals_), system.weights
    )


def parsevalize(system: GFusionSystem, tol: float = ORDER_TOL) -> GFusionSystem:
    """Canonical Parseval version of a frame.

    Pushes the system through S^(-1/2): subspaces become S^(-1/2) F_i
    and effective maps pick up S^(-1/2) on the right, re-expressed in the
    new subspace coordinates.  The result's frame operator is the
    identity within roundoff.
    """
    _require_frame(system, tol)
    root = positive_sqrt(assemble_frame_operator(system), invert=True)
    return _push_through(system, root.entries)


def canonical_dual(
    system: GFusionSystem, tol: float = ORDER_TOL
) -> tuple[GFusionSystem, VerificationReport]:
    """Canonical dual frame, with a verification of its frame operator.

    The dual is the system pushed through S^-1; its frame operator must
    equal S^-1, and its optimal bounds are the reciprocals [1/B, 1/A] of
    the original ones, which the report checks to ``tol``.
    """
    bounds = _require_frame(system, tol)
    s = assemble_frame_operator(system).entries
    s_inv = np.linalg.inv(s)
    dual = _push_through(system, s_inv)
    s_dual = assemble_frame_operator(dual).entries
    dual_bounds = frame_bounds(dual, tol)
    report = build_report(
        name="canonical_dual",
        residuals={
            "dual_operator_residual": opnorm(s_dual - s_inv),
            "lower_bound_defect": max(0.0, 1.0 / bounds.upper - dual_bounds.lower),
            "upper_bound_excess": max(0.0, dual_bounds.upper - 1.0 / bounds.lower),
        },
        tolerances={"tol": tol},
        constants={
            "dual_lower": dual_bounds.lower,
            "dual_upper": dual_bounds.upper,
            "original_lower": bounds.lower,
            "original_upper": bounds.upper,
        },
        provenance=EXACT,
    )
    return dual, report
