"""Subspace arithmetic over C^D with explicit rank tolerances.

Every subspace is carried around as an orthonormal column frame. Rank
decisions are made once, inside ``span``, by thresholding singular values;
the cutoff actually used is kept on the object so downstream checks can
report it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Relative singular-value cutoff for rank decisions, and the absolute floor
# used when the data is identically zero.
RANK_REL_TOL = 1e-9
RANK_ABS_FLOOR = 1e-12

# Frames are orthonormal to this accuracy by construction.
FRAME_ORTHO_TOL = 1e-10


@dataclass(frozen=True)
class Subspace:
    """A subspace of C^D, stored as an orthonormal frame (columns)."""

    ambient_dim: int
    frame: np.ndarray  # shape (D, r), orthonormal columns
    tol_used: float

    @property
    def dim(self) -> int:
        return self.frame.shape[1]

    def __post_init__(self):
        if self.frame.ndim != 2 or self.frame.shape[0] != self.ambient_dim:
            raise ValueError(
                f"frame shape {self.frame.shape} does not match ambient dim "
                f"{self.ambient_dim}"
            )
        r = self.frame.shape[1]
        if r:
            gram = self.frame.conj().T @ self.frame
            err = np.linalg.norm(gram - np.eye(r), 2)
            if err > FRAME_ORTHO_TOL:
                raise ValueError(f"frame is not orthonormal (defect {err:.3e})")


def _as_matrix(vectors, ambient_dim=None) -> np.ndarray:
    m = np.asarray(vectors, dtype=complex)
    if m.ndim == 1:
        m = m.reshape(-1, 1)
    if m.size == 0:
        if ambient_dim is None:
            raise ValueError("cannot infer ambient dimension from empty input")
        m = m.reshape(ambient_dim, 0)
    return m


def span(vectors, rel_tol: float = RANK_REL_TOL, ambient_dim: int | None = None) -> Subspace:
    """Orthonormalize the columns of `vectors` into a Subspace.

    Rank = number of singular values above rel_tol * sigma_max, with an
    absolute floor of RANK_ABS_FLOOR when the input is (numerically) zero.
    """
    m = _as_matrix(vectors, ambient_dim)
    d = m.shape[0]
    if m.shape[1] == 0:
        return Subspace(d, np.zeros((d, 0), dtype=complex), RANK_ABS_FLOOR)
    u, s, _ = np.linalg.svd(m, full_matrices=False)
    smax = s[0] if s.size else 0.0
    cutoff = rel_tol * smax if smax > 0 else RANK_ABS_FLOOR
    cutoff = max(cutoff, RANK_ABS_FLOOR)
    r = int(np.sum(s > cutoff))
    return Subspace(d, u[:, :r].copy(), cutoff)


def full_space(dim: int) -> Subspace:
    return Subspace(dim, np.eye(dim, dtype=complex), RANK_ABS_FLOOR)


def zero_space(dim: int) -> Subspace:
    return Subspace(dim, np.zeros((dim, 0), dtype=complex), RANK_ABS_FLOOR)


def projector(s: Subspace) -> np.ndarray:
    """Orthogonal projection onto `s` as a dense D x D matrix."""
    return s.frame @ s.frame.conj().T


def project(s: Subspace, v: np.ndarray) -> np.ndarray:
    """Apply the orthogonal projection onto `s` to a vector or matrix of columns."""
    return s.frame @ (s.frame.conj().T @ v)


def complement(s: Subspace) -> Subspace:
    """Orthogonal complement inside the ambient space."""
    d, r = s.ambient_dim, s.dim
    if r == 0:
        return full_space(d)
    u, _, _ = np.linalg.svd(s.frame, full_matrices=True)
    return Subspace(d, u[:, r:].copy(), s.tol_used)


def intersect(*subspaces: Subspace) -> Subspace:
    """Intersection, folded pairwise left to right.

    Each pairwise step goes through complements: meet(A, B) is the complement
    of span(complement(A) | complement(B)).
    """
    if not subspaces:
        raise ValueError("need at least one subspace")
    acc = subspaces[0]
    for other in subspaces[1:]:
        if other.ambient_dim != acc.ambient_dim:
            raise ValueError("ambient dimensions differ")
        ca, cb = complement(acc), complement(other)
        joined = np.hstack([ca.frame, cb.frame])
        acc = complement(span(joined, ambient_dim=acc.ambient_dim))
    return acc


def tensor(a: Subspace, b: Subspace) -> Subspace:
    """Tensor product subspace; the Kronecker frame stays orthonormal."""
    frame = np.kron(a.frame, b.frame)
    return Subspace(a.ambient_dim * b.ambient_dim, frame, max(a.tol_used, b.tol_used))


def contains(a: Subspace, b: Subspace, tol: float = 1e-9) -> bool:
    """Whether b is contained in a, up to `tol` in operator norm."""
    return inclusion_residual(a, b) <= tol


def inclusion_residual(a: Subspace, b: Subspace) -> float:
    """|| (I - P_a) frame_b ||, zero iff b is contained in a."""
    if b.dim == 0:
        return 0.0
    rem = b.frame - project(a, b.frame)
    return opnorm(rem)


def subspace_distance(a: Subspace, b: Subspace) -> float:
    """Operator-norm distance between the two orthogonal projections."""
    return opnorm(projector(a) - projector(b))


def nullspace(m: np.ndarray, rel_tol: float = RANK_REL_TOL) -> Subspace:
    """Orthonormal basis of the right null space, with span() rank semantics."""
    m = np.atleast_2d(np.asarray(m, dtype=complex))
    rows, cols = m.shape
    if rows == 0 or cols == 0:
        return full_space(cols)
    # full V is needed; the full (rows x rows) U never is, and for tall
    # stacks it would dominate memory, so only ask for it when rows < cols
    _, s, vh = np.linalg.svd(m, full_matrices=rows < cols)
    smax = s[0] if s.size else 0.0
    cutoff = max(rel_tol * smax, RANK_ABS_FLOOR)
    r = int(np.sum(s > cutoff))
    return Subspace(cols, vh[r:, :].conj().T.copy(), cutoff)


def project_pair(frame_a: np.ndarray, frame_b: np.ndarray, columns: np.ndarray,
                 dim_a: int, dim_b: int) -> np.ndarray:
    """(P_a ⊗ P_b) applied to columns living in C^{dim_a} ⊗ C^{dim_b}.

    Works through reshapes so the Kronecker projector is never materialized.
    """
    r = columns.shape[1]
    ra, rb = frame_a.shape[1], frame_b.shape[1]
    if ra == 0 or rb == 0 or r == 0:
        return np.zeros_like(columns)
    a1 = frame_a.conj().T @ columns.reshape(dim_a, dim_b * r)
    a1 = a1.reshape(ra, dim_b, r)
    w = np.einsum("bc,abr->acr", frame_b.conj(), a1)
    tmp = frame_a @ w.reshape(ra, rb * r)
    tmp = tmp.reshape(dim_a, rb, r)
    out = np.einsum("cn,anr->acr", frame_b, tmp)
    return out.reshape(dim_a * dim_b, r)


def opnorm(m: np.ndarray) -> float:
    """Largest singular value."""
    m = np.atleast_2d(np.asarray(m))
    if m.size == 0:
        return 0.0
    return float(np.linalg.norm(m, 2))


def psd_sqrt(m: np.ndarray, clamp: float = 1e-12) -> np.ndarray:
    """Square root of a Hermitian PSD matrix via eigendecomposition.

    Eigenvalues below -clamp raise; small negatives are clamped to zero.
    """
    m = np.asarray(m, dtype=complex)
    herm_defect = opnorm(m - m.conj().T)
    if herm_defect > 1e-9 * max(1.0, opnorm(m)):
        raise ValueError(f"matrix is not Hermitian (defect {herm_defect:.3e})")
    w, v = np.linalg.eigh((m + m.conj().T) / 2)
    if w.size and w[0] < -max(clamp, 1e-9 * max(1.0, abs(w[-1]))):
        raise ValueError(f"matrix is not PSD (min eigenvalue {w[0]:.3e})")
    w = np.clip(w, 0.0, None)
    return (v * np.sqrt(w)) @ v.conj().T
