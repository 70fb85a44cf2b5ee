"""Dense operator algebra on finite-dimensional real spaces.

Everything downstream builds on the pieces here: matrices with explicit
domain/codomain dimensions, subspaces carried as orthonormal column bases,
orthogonal projections, the semidefinite (Loewner) order, Moore-Penrose
pseudoinverses, positive square roots, and range-inclusion factorization
with a certified majorization constant.

Scalars are real throughout.  All values are immutable after construction
(backing arrays are marked read-only) and every function is pure, so the
module is safe to use from concurrent code.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    NotPositiveError,
    NotSymmetricError,
    RangeInclusionError,
    ShapeError,
    SingularError,
)
from .report import EXACT, VerificationReport, build_report

#: Default tolerance for structural residuals (operator identities).
STRUCT_TOL = 1e-9
#: Default tolerance on the minimum eigenvalue in semidefinite-order checks.
ORDER_TOL = 1e-9
#: Relative cutoff below which singular values count as zero.
RANK_TOL = 1e-12
#: Absolute tolerance when an input is required to be symmetric.
SYM_TOL = 1e-8
#: Orthonormality tolerance for subspace bases.
BASIS_TOL = 1e-10
#: Eigenvalues below this are treated as zero when inverting.
SINGULAR_FLOOR = 1e-12


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


def _as_matrix(entries, what: str = "matrix") -> np.ndarray:
    arr = np.array(entries, dtype=float)
    if arr.ndim != 2:
        raise ShapeError(f"{what} must be 2-d, got ndim={arr.ndim}")
    if arr.size and not np.all(np.isfinite(arr)):
        raise ValueError(f"{what} entries must be finite")
    return _freeze(arr)


def _as_vector(f, dim: int, what: str = "vector") -> np.ndarray:
    vec = np.asarray(f, dtype=float)
    if vec.shape != (dim,):
        raise ShapeError(f"{what} must have shape ({dim},), got {vec.shape}")
    return vec


def opnorm(a: np.ndarray) -> float:
    """Spectral norm; zero for empty matrices."""
    if a.size == 0:
        return 0.0
    return float(np.linalg.norm(a, 2))


def symmetrize(a: np.ndarray) -> np.ndarray:
    return (a + a.T) / 2


@dataclass(frozen=True, eq=False)
class Operator:
    """A dense real matrix acting from R^cols into R^rows."""

    entries: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "entries", _as_matrix(self.entries, "operator"))

    @property
    def rows(self) -> int:
        return self.entries.shape[0]

    @property
    def cols(self) -> int:
        return self.entries.shape[1]

    @property
    def T(self) -> "Operator":
        return Operator(self.entries.T)

    @classmethod
    def identity(cls, n: int) -> "Operator":
        return cls(np.eye(n))

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "Operator":
        return cls(np.zeros((rows, cols)))

    def __matmul__(self, other: "Operator") -> "Operator":
        if self.cols != other.rows:
            raise ShapeError(
                f"cannot compose {self.rows}x{self.cols} with {other.rows}x{other.cols}"
            )
        return Operator(self.entries @ other.entries)

    def apply(self, f) -> np.ndarray:
        vec = _as_vector(f, self.cols, "input vector")
        return self.entries @ vec

    def norm(self) -> float:
        return opnorm(self.entries)

    def is_square(self) -> bool:
        return self.rows == self.cols


@dataclass(frozen=True, eq=False)
class Subspace:
    """A subspace of R^ambient_dim, carried as an orthonormal column basis.

    A zero-dimensional basis (shape ``(n, 0)``) is legal and denotes the
    trivial subspace; its projector is the zero operator.
    """

    ambient_dim: int
    basis: np.ndarray

    def __post_init__(self):
        basis = _as_matrix(self.basis, "basis")
        if basis.shape[0] != self.ambient_dim:
            raise ShapeError(
                f"basis has {basis.shape[0]} rows, expected ambient_dim={self.ambient_dim}"
            )
        k = basis.shape[1]
        if k:
            gram_defect = np.abs(basis.T @ basis - np.eye(k)).max()
            if gram_defect > BASIS_TOL:
                raise ValueError(
                    f"basis columns are not orthonormal (defect {gram_defect:.3e})"
                )
        object.__setattr__(self, "basis", basis)

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    def projector(self) -> np.ndarray:
        if self.dim == 0:
            return np.zeros((self.ambient_dim, self.ambient_dim))
        return self.basis @ self.basis.T

    @classmethod
    def full(cls, n: int) -> "Subspace":
        return cls(n, np.eye(n))

    @classmethod
    def empty(cls, n: int) -> "Subspace":
        return cls(n, np.zeros((n, 0)))

    @classmethod
    def coordinate(cls, n: int, indices) -> "Subspace":
        cols = np.zeros((n, len(indices)))
        for j, i in enumerate(indices):
            cols[i, j] = 1.0
        return cls(n, cols)

    @classmethod
    def span(cls, vectors, rank_tol: float = RANK_TOL) -> "Subspace":
        """Subspace spanned by the given vectors (columns), orthonormalized."""
        mat = np.column_stack([np.asarray(v, dtype=float) for v in vectors])
        return cls(mat.shape[0], orthonormal_columns(mat, rank_tol))


@dataclass(frozen=True)
class OrderCertificate:
    """Outcome of a semidefinite-order comparison T <= S.

    ``gap`` is the minimum eigenvalue of S - T; the order holds when the
    gap is at least -tol.  ``lam`` carries a majorization constant when
    one was computed.
    """

    holds: bool
    gap: float
    lam: float | None = None


def _require_symmetric(op: Operator, label: str) -> np.ndarray:
    if not op.is_square():
        raise ShapeError(f"{label} must be square, got {op.rows}x{op.cols}")
    a = op.entries
    if a.size and np.abs(a - a.T).max() > SYM_TOL:
        raise NotSymmetricError(
            f"{label} is not symmetric within {SYM_TOL:g} "
            f"(defect {np.abs(a - a.T).max():.3e})"
        )
    return symmetrize(a)


def project(subspace: Subspace, f) -> np.ndarray:
    """Orthogonal projection of ``f`` onto the subspace.

    Computed as basis (basis^T f); idempotent and symmetric by construction.
    """
    vec = _as_vector(f, subspace.ambient_dim)
    b = subspace.basis
    if b.shape[1] == 0:
        return np.zeros(subspace.ambient_dim)
    return b @ (b.T @ vec)


def operator_leq(t: Operator, s: Operator, tol: float = ORDER_TOL) -> OrderCertificate:
    """Certify T <= S in the semidefinite order.

    Both operators must be square, the same size, and symmetric within
    ``SYM_TOL``.  The gap is computed with a symmetric eigensolver.
    """
    a = _require_symmetric(t, "T")
    b = _require_symmetric(s, "S")
    if a.shape != b.shape:
        raise ShapeError(f"size mismatch: {a.shape} vs {b.shape}")
    if a.shape[0] == 0:
        return OrderCertificate(holds=True, gap=0.0)
    gap = float(np.linalg.eigvalsh(symmetrize(b - a))[0])
    return OrderCertificate(holds=gap >= -tol, gap=gap)


def pinv(t: Operator, rank_tol: float = RANK_TOL) -> Operator:
    """Moore-Penrose pseudoinverse via singular value decomposition.

    Singular values below ``rank_tol`` times the largest one are treated
    as exact zeros.
    """
    a = t.entries
    if a.size == 0 or not a.any():
        return Operator(np.zeros((t.cols, t.rows)))
    u, s, vt = np.linalg.svd(a, full_matrices=False)
    cutoff = rank_tol * s[0]
    inv = np.divide(1.0, s, out=np.zeros_like(s), where=s > cutoff)
    return Operator((vt.T * inv) @ u.T)


def positive_singular_values(a: np.ndarray, rank_tol: float = RANK_TOL) -> np.ndarray:
    """Singular values above the relative rank cutoff, descending."""
    if a.size == 0:
        return np.zeros(0)
    s = np.linalg.svd(a, compute_uv=False)
    if s.size == 0 or s[0] == 0.0:
        return np.zeros(0)
    return s[s > rank_tol * s[0]]


def douglas_factor(
    l: Operator,
    t: Operator,
    tol: float = STRUCT_TOL,
    rank_tol: float = RANK_TOL,
) -> tuple[Operator, float]:
    """Factor L = T S and certify the majorization L L^T <= lam^2 T T^T.

    S is the minimal-norm solution pinv(T) L.  The factorization is
    accepted when the recomposition residual ||T S - L|| is within
    ``tol``; otherwise the range of L is not contained in the range of T
    and :class:`RangeInclusionError` carries the measured residual.

    ``lam`` is the smallest nonnegative value whose scaled Gram operator
    dominates L L^T to within -tol.  It is found by bisection on
    [0, ||L|| / sigma_min+(T) + 1]; the bisection runs to absolute
    precision min(tol, 1e-9).
    """
    if l.rows != t.rows:
        raise ShapeError(f"codomain mismatch: L has {l.rows} rows, T has {t.rows}")
    s_factor = pinv(t, rank_tol) @ l
    residual = opnorm(t.entries @ s_factor.entries - l.entries)
    if residual > tol:
        raise RangeInclusionError(
            f"range(L) is not contained in range(T): residual {residual:.3e} > {tol:g}",
            residual=residual,
        )

    llt = symmetrize(l.entries @ l.entries.T)
    ttt = symmetrize(t.entries @ t.entries.T)

    def dominated(lam: float) -> bool:
        if ttt.shape[0] == 0:
            return True
        gap = np.linalg.eigvalsh(symmetrize(lam * lam * ttt - llt))[0]
        return gap >= -tol

    if dominated(0.0):
        return s_factor, 0.0
    sigma = positive_singular_values(t.entries, rank_tol)
    hi = opnorm(l.entries) / sigma[-1] + 1.0 if sigma.size else 1.0
    for _ in range(64):
        if dominated(hi):
            break
        hi *= 2.0
    lo = 0.0
    precision = max(min(tol, 1e-9), 1e-15)
    while hi - lo > precision:
        mid = (lo + hi) / 2
        if dominated(mid):
            hi = mid
        else:
            lo = mid
    return s_factor, hi


def positive_sqrt(s: Operator, invert: bool = False) -> Operator:
    """Symmetric positive square root S^(1/2), or S^(-1/2) with ``invert``.

    Eigendecomposes S = Q diag(w) Q^T and maps the eigenvalues.  Raises
    :class:`NotPositiveError` when an eigenvalue sits below -1e-8 and
    :class:`SingularError` when inversion is requested with the smallest
    eigenvalue at or below 1e-12.
    """
    a = _require_symmetric(s, "S")
    w, q = np.linalg.eigh(a)
    if w.size and w[0] < -SYM_TOL:
        raise NotPositiveError(f"operator has negative eigenvalue {w[0]:.3e}")
    if invert and (w.size == 0 or w[0] <= SINGULAR_FLOOR):
        raise SingularError("cannot invert: smallest eigenvalue is not positive")
    w = np.clip(w, 0.0, None)
    mapped = w ** -0.5 if invert else np.sqrt(w)
    root = (q * mapped) @ q.T
    return Operator(symmetrize(root))


def orthonormal_columns(
    m: np.ndarray, rank_tol: float = RANK_TOL, pivot: bool = True
) -> np.ndarray:
    """Orthonormalize the columns of ``m``, dropping dependent ones.

    With ``pivot`` the largest remaining column is selected at every
    step (rank-revealing); columns whose residual falls below
    ``rank_tol`` relative to the largest original column are dropped.
    Without pivoting the column order is preserved and a ValueError is
    raised if any column turns out dependent.
    """
    work = np.array(m, dtype=float)
    n, k = work.shape
    if k == 0:
        return np.zeros((n, 0))
    scale = float(np.linalg.norm(work, axis=0).max())
    if scale == 0.0:
        if pivot:
            return np.zeros((n, 0))
        raise ValueError("columns are numerically dependent; cannot orthonormalize")
    threshold = rank_tol * scale
    qs: list[np.ndarray] = []
    remaining = list(range(k))
    while remaining:
        norms = np.linalg.norm(work[:, remaining], axis=0)
        pick = int(np.argmax(norms)) if pivot else 0
        if norms[pick] <= threshold:
            if pivot:
                break
            raise ValueError("columns are numerically dependent; cannot orthonormalize")
        j = remaining.pop(pick)
        q = work[:, j] / np.linalg.norm(work[:, j])
        if qs:
            basis = np.column_stack(qs)
            q = q - basis @ (basis.T @ q)
            nq = np.linalg.norm(q)
            if nq <= threshold:
                if pivot:
                    continue
                raise ValueError("columns are numerically dependent; cannot orthonormalize")
            q = q / nq
        qs.append(q)
        if remaining:
            rest = work[:, remaining]
            work[:, remaining] = rest - np.outer(q, q @ rest)
    if not qs:
        return np.zeros((n, 0))
    return np.column_stack(qs)


def orthonormalize_image(t: Operator, v: Subspace, rank_tol: float = RANK_TOL) -> Subspace:
    """Orthonormal basis of T applied to the subspace.

    The result's dimension equals the numerical rank of the image; a
    rank-zero image yields the empty subspace.
    """
    if t.cols != v.ambient_dim:
        raise ShapeError(
            f"operator domain {t.cols} does not match ambient dim {v.ambient_dim}"
        )
    image = t.entries @ v.basis
    return Subspace(t.rows, orthonormal_columns(image, rank_tol))


def projection_identity_check(
    t: Operator, v: Subspace, tol: float = STRUCT_TOL
) -> VerificationReport:
    """Check the projection exchange identities for T against subspace V.

    The identity P_V T^T = P_V T^T P_TV holds for every operator and is
    reported as residual ``projection_identity``.  When T^T T = I within
    ``tol`` the commutation P_TV T = T P_V is also checked, as residual
    ``unitary_commutation``; otherwise that branch is skipped and noted.
    """
    if not t.is_square():
        raise ShapeError("T must be square")
    if t.cols != v.ambient_dim:
        raise ShapeError(
            f"operator size {t.cols} does not match ambient dim {v.ambient_dim}"
        )
    p_v = v.projector()
    p_tv = orthonormalize_image(t, v).projector()
    lhs = p_v @ t.entries.T
    residuals = {"projection_identity": opnorm(lhs - lhs @ p_tv)}
    notes: tuple[str, ...] = ()
    gram_defect = opnorm(t.entries.T @ t.entries - np.eye(t.cols))
    if gram_defect <= tol:
        residuals["unitary_commutation"] = opnorm(p_tv @ t.entries - t.entries @ p_v)
    else:
        notes = ("unitary branch skipped: T^T T differs from I by "
                 f"{gram_defect:.3e}",)
    return build_report(
        name="projection_identity_check",
        residuals=residuals,
        tolerances={"tol": tol},
        constants={"unitarity_defect": gram_defect},
        provenance=EXACT,
        notes=notes,
    )
