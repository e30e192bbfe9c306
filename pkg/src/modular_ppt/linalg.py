"""Dense complex-matrix kernel.

Everything downstream (modular operators, cones, the PPT solver) reduces to
the routines here: Kronecker products, partial transpose/trace over a fixed
product basis, a deterministic Hermitian eigendecomposition, PSD square
roots, and a Schur-complement positivity test.

Matrices are plain complex ndarrays; the type contracts of the package are
enforced by the ``require_*`` validators, which raise rather than coerce.
The product basis convention throughout: e_i (x) f_j sits at index
i * dim_b + j.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from .errors import ContractError, DimensionLimitError, ShapeError

TOL_HERM = 1e-10
TOL_PSD = 1e-10
TOL_TRACE = 1e-10
EPS_FAITHFUL = 1e-12
RECON_TOL = 1e-9
DEGENERACY_GAP = 1e-9

DEFAULT_MAX_DIM = 4096


def max_dim() -> int:
    """Dense-dimension cap; override with MODULAR_PPT_MAX_DIM."""
    return int(os.environ.get("MODULAR_PPT_MAX_DIM", DEFAULT_MAX_DIM))


@dataclass(frozen=True)
class BipartiteShape:
    """Dimensions (n, m) of a fixed tensor split H (x) K."""

    dim_a: int
    dim_b: int

    def __post_init__(self):
        if self.dim_a < 1 or self.dim_b < 1:
            raise ShapeError(f"subsystem dimensions must be >= 1, got {self.dim_a}x{self.dim_b}")

    @property
    def dim(self) -> int:
        return self.dim_a * self.dim_b


def as_matrix(m) -> np.ndarray:
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2:
        raise ShapeError(f"expected a 2-d array, got ndim={a.ndim}")
    if not np.all(np.isfinite(a)):
        raise ContractError("matrix contains NaN or Inf entries")
    return a


def require_square(m: np.ndarray) -> np.ndarray:
    m = as_matrix(m)
    if m.shape[0] != m.shape[1]:
        raise ShapeError(f"expected a square matrix, got {m.shape}")
    return m


def herm_defect(m: np.ndarray) -> float:
    return float(np.max(np.abs(m - m.conj().T))) if m.size else 0.0


def hermitize(m: np.ndarray) -> np.ndarray:
    return (m + m.conj().T) / 2


def require_hermitian(m, tol: float = TOL_HERM) -> np.ndarray:
    m = require_square(m)
    defect = herm_defect(m)
    if defect > tol:
        raise ContractError(f"matrix is not Hermitian: max |M - M^dagger| = {defect:.3e} > {tol:.1e}")
    return m


def require_density(m, tol_psd: float = TOL_PSD, tol_tr: float = TOL_TRACE,
                    faithful: bool = False, eps_faithful: float = EPS_FAITHFUL) -> np.ndarray:
    m = require_hermitian(m)
    w = np.linalg.eigvalsh(hermitize(m))
    if w[0] < -tol_psd:
        raise ContractError(f"density matrix has negative eigenvalue {w[0]:.3e}")
    tr = np.trace(m).real
    if abs(tr - 1.0) > tol_tr:
        raise ContractError(f"density matrix trace deviates from 1 by {abs(tr - 1.0):.3e}")
    if faithful and w[0] < eps_faithful:
        from .errors import FaithfulnessError

        raise FaithfulnessError(f"state is not faithful: smallest eigenvalue {w[0]:.3e} < {eps_faithful:.1e}")
    return m


def require_bipartite(m: np.ndarray, shape: BipartiteShape) -> np.ndarray:
    m = require_square(m)
    if m.shape[0] != shape.dim:
        raise ShapeError(f"matrix dim {m.shape[0]} != {shape.dim_a}x{shape.dim_b} product")
    return m


def kron(a, b) -> np.ndarray:
    a = as_matrix(a)
    b = as_matrix(b)
    if a.shape[0] * b.shape[0] > max_dim() or a.shape[1] * b.shape[1] > max_dim():
        raise DimensionLimitError(
            f"kron product dimension {a.shape[0] * b.shape[0]} exceeds cap {max_dim()}"
        )
    return np.kron(a, b)


def partial_transpose(m, shape: BipartiteShape, subsystem: str = "B") -> np.ndarray:
    """Transpose one tensor factor of a bipartite operator, blockwise."""
    m = require_bipartite(m, shape)
    na, nb = shape.dim_a, shape.dim_b
    t = m.reshape(na, nb, na, nb)
    if subsystem == "B":
        out = t.transpose(0, 3, 2, 1)
    elif subsystem == "A":
        out = t.transpose(2, 1, 0, 3)
    else:
        raise ShapeError(f"subsystem must be 'A' or 'B', got {subsystem!r}")
    return out.reshape(na * nb, na * nb)


def partial_trace(m, shape: BipartiteShape, keep: str = "A") -> np.ndarray:
    m = require_bipartite(m, shape)
    na, nb = shape.dim_a, shape.dim_b
    t = m.reshape(na, nb, na, nb)
    if keep == "A":
        return np.einsum("ikjk->ij", t)
    if keep == "B":
        return np.einsum("kikj->ij", t)
    raise ShapeError(f"keep must be 'A' or 'B', got {keep!r}")


def _fix_phase(vecs: np.ndarray) -> np.ndarray:
    """Rotate each column so its largest-magnitude entry is real positive."""
    out = vecs.copy()
    for k in range(out.shape[1]):
        idx = int(np.argmax(np.abs(out[:, k])))
        pivot = out[idx, k]
        if abs(pivot) > 0:
            out[:, k] = out[:, k] * (pivot.conjugate() / abs(pivot))
    return out


def _canonical_cluster_basis(vecs: np.ndarray) -> np.ndarray:
    """Re-span a degenerate eigenspace by Gram-Schmidt seeded from unit vectors.

    Guarantees e.g. that the identity matrix eigendecomposes into the
    canonical basis regardless of what LAPACK returned for the cluster.
    """
    n, k = vecs.shape
    proj = vecs @ vecs.conj().T
    chosen: list[np.ndarray] = []
    for i in range(n):
        if len(chosen) == k:
            break
        w = proj[:, i].copy()
        for u in chosen:
            w -= u * (u.conj() @ w)
        norm = np.linalg.norm(w)
        if norm > 1e-6:
            chosen.append(w / norm)
    # rank-deficient fallback: keep original directions orthogonal to the chosen ones
    col = 0
    while len(chosen) < k and col < k:
        w = vecs[:, col].copy()
        for u in chosen:
            w -= u * (u.conj() @ w)
        norm = np.linalg.norm(w)
        if norm > 1e-8:
            chosen.append(w / norm)
        col += 1
    return np.column_stack(chosen)


def herm_eig(m, tol: float = TOL_HERM) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition with descending values and a deterministic basis.

    Within a degenerate cluster (gap < 1e-9) the eigenvectors are re-spanned
    from canonical unit vectors; every vector's largest-magnitude entry is
    made real positive (ties broken by lowest index).
    """
    m = require_hermitian(m, tol)
    vals, vecs = np.linalg.eigh(hermitize(m))
    vals = vals[::-1].copy()
    vecs = vecs[:, ::-1].copy()
    n = len(vals)
    start = 0
    while start < n:
        stop = start + 1
        while stop < n and vals[stop - 1] - vals[stop] < DEGENERACY_GAP:
            stop += 1
        if stop - start > 1:
            vecs[:, start:stop] = _canonical_cluster_basis(vecs[:, start:stop])
        start = stop
    return vals, _fix_phase(vecs)


def psd_check(m, tol: float = TOL_PSD) -> tuple[bool, float]:
    m = require_hermitian(m)
    min_eig = float(np.linalg.eigvalsh(hermitize(m))[0])
    return min_eig >= -tol, min_eig


def mat_sqrt_psd(m, tol: float = TOL_PSD) -> np.ndarray:
    """PSD square root; eigenvalues in [-tol, 0) are clamped to zero.

    The root is basis-independent, so this uses the raw eigensolver output
    rather than the deterministic-basis convention of ``herm_eig`` (whose
    cluster re-spanning would cost accuracy near degenerate eigenvalues).
    """
    m = require_hermitian(m)
    vals, vecs = np.linalg.eigh(hermitize(m))
    if vals[0] < -tol:
        raise ContractError(f"matrix is not PSD: eigenvalue {vals[0]:.3e} < -{tol:.1e}")
    root = np.sqrt(np.clip(vals, 0.0, None))
    return (vecs * root) @ vecs.conj().T


def project_psd(m) -> np.ndarray:
    """Frobenius-nearest PSD matrix (clamp negative eigenvalues)."""
    m = require_hermitian(m)
    vals, vecs = np.linalg.eigh(hermitize(m))
    clipped = np.clip(vals, 0.0, None)
    return (vecs * clipped) @ vecs.conj().T


def schur_positivity(m, block_dim: int, eps: float = 1e-8) -> bool:
    """Positivity by recursive elimination of the last block row/column.

    The trailing diagonal block is regularized by +eps*I whenever its least
    eigenvalue drops below eps; verdicts agree with a spectral PSD check to
    within 10*eps on the minimum eigenvalue.
    """
    m = require_hermitian(m)
    dim = m.shape[0]
    if block_dim < 1 or dim % block_dim != 0:
        raise ShapeError(f"dim {dim} is not a multiple of block_dim {block_dim}")
    tol = 10 * eps
    n = dim // block_dim
    cur = hermitize(m)
    while n > 1:
        d = (n - 1) * block_dim
        corner = hermitize(cur[d:, d:])
        min_c = float(np.linalg.eigvalsh(corner)[0])
        if min_c < -tol:
            # a principal block this negative already decides the verdict
            return False
        if min_c < eps:
            corner = corner + eps * np.eye(block_dim)
        rows = cur[:d, d:]
        cur = hermitize(cur[:d, :d] - rows @ np.linalg.solve(corner, rows.conj().T))
        n -= 1
    return bool(np.linalg.eigvalsh(cur)[0] >= -tol)
