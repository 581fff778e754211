"""Completely positive maps: Choi ranks, iterate dimensions, and the
combinatorial strong-commutation test for stochastic matrix pairs.

The dimension sequence attached to a CP map is the Choi rank of its powers;
it is submultiplicative because a Kraus family for a composition is the set
of products of the factors' families. For a pair of commuting stochastic
matrices, strong commutation of the associated CP maps reduces to a support
count: for every pair of states (i, k), the number of intermediate states j
with q_kj p_ji != 0 must match the number with p_kj q_ji != 0. The same
numbers arise as ranks of diagonal Gram matrices of lifted basis vectors,
which this module exposes as an independent oracle.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

NONZERO_TOL = 1e-12
ROWSUM_TOL = 1e-12
ENTRY_CLAMP = -1e-15


@dataclass(frozen=True)
class KrausChannel:
    """CP map x -> sum_i K_i x K_i† on B(C^h)."""

    kraus: tuple[np.ndarray, ...]

    def __post_init__(self):
        if not self.kraus:
            raise ValueError("need at least one Kraus operator")
        h = self.kraus[0].shape[0]
        mats = []
        for k in self.kraus:
            k = np.asarray(k, dtype=complex)
            if k.shape != (h, h):
                raise ValueError("Kraus operators must be square, equal size")
            mats.append(k)
        object.__setattr__(self, "kraus", tuple(mats))

    @property
    def h(self) -> int:
        return self.kraus[0].shape[0]

    def apply(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=complex)
        return sum(k @ x @ k.conj().T for k in self.kraus)

    def superop(self) -> np.ndarray:
        """Column-stacking superoperator: vec(Θ(x)) = S vec(x)."""
        return sum(np.kron(k.conj(), k) for k in self.kraus)


def _unvec(v: np.ndarray, h: int) -> np.ndarray:
    return v.reshape(h, h, order="F")


def _vec(x: np.ndarray) -> np.ndarray:
    return np.asarray(x).reshape(-1, order="F")


def choi_matrix(channel: KrausChannel, power: int = 1) -> np.ndarray:
    """sum_ab E_ab ⊗ Θ^power(E_ab), with iterates via superoperator powers."""
    h = channel.h
    s = np.linalg.matrix_power(channel.superop(), power)
    out = np.zeros((h * h, h * h), dtype=complex)
    for a in range(h):
        for b in range(h):
            e_ab = np.zeros((h, h), dtype=complex)
            e_ab[a, b] = 1.0
            img = _unvec(s @ _vec(e_ab), h)
            out[a * h:(a + 1) * h, b * h:(b + 1) * h] = img
    return out


def choi_rank(channel: KrausChannel, power: int = 1,
              rel_tol: float = 1e-9) -> int:
    """Rank of the Choi matrix; equals the minimal Kraus number."""
    c = choi_matrix(channel, power)
    w = np.linalg.eigvalsh((c + c.conj().T) / 2)
    wmax = w[-1] if w.size else 0.0
    cutoff = max(rel_tol * max(wmax, 0.0), 1e-12)
    return int(np.sum(w > cutoff))


def as_fiber_dims(channel: KrausChannel, n_max: int) -> list[int]:
    """Choi ranks of Θ^0, Θ^1, ..., Θ^{n_max}."""
    return [choi_rank(channel, power=n) for n in range(n_max + 1)]


def dims_submultiplicative(dims: list[int]) -> bool:
    """dims[m + n] <= dims[m] * dims[n] wherever defined."""
    top = len(dims) - 1
    for m in range(top + 1):
        for n in range(top + 1 - m):
            if dims[m + n] > dims[m] * dims[n]:
                return False
    return True


@dataclass(frozen=True)
class StochasticMatrix:
    """Row-stochastic matrix; rows sum to one within 1e-12."""

    p: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.p, dtype=float)
        if p.ndim != 2 or p.shape[0] != p.shape[1]:
            raise ValueError("stochastic matrix must be square")
        if np.min(p) < ENTRY_CLAMP:
            raise ValueError(f"negative entry {np.min(p):.3e}")
        p = np.clip(p, 0.0, None)
        sums = p.sum(axis=1)
        if np.max(np.abs(sums - 1.0)) > ROWSUM_TOL:
            raise ValueError(
                f"row sums deviate from 1 by {np.max(np.abs(sums - 1.0)):.3e}"
            )
        object.__setattr__(self, "p", p)

    @property
    def n(self) -> int:
        return self.p.shape[0]


def _as_stochastic(m) -> StochasticMatrix:
    return m if isinstance(m, StochasticMatrix) else StochasticMatrix(np.asarray(m))


def stochastic_exp(generator, t: float) -> StochasticMatrix:
    """The Markov semigroup element e^{-t} e^{tP} at time t >= 0."""
    generator = _as_stochastic(generator)
    if t < 0:
        raise ValueError("need t >= 0")
    return StochasticMatrix(scipy.linalg.expm(t * (generator.p - np.eye(generator.n))))


def commute_check(a, b, tol: float = NONZERO_TOL) -> dict:
    a, b = _as_stochastic(a), _as_stochastic(b)
    diff = a.p @ b.p - b.p @ a.p
    worst = float(np.max(np.abs(diff))) if diff.size else 0.0
    return {"commute": worst <= tol, "max_entry": worst, "tol": tol}


def _support_counts(q: np.ndarray, p: np.ndarray, tol: float) -> np.ndarray:
    """counts[k, i] = #{j : q_kj * p_ji > tol}."""
    prods = q[:, :, None] * p[None, :, :]  # [k, j, i]
    return np.sum(np.abs(prods) > tol, axis=1)


def strong_commute_stochastic(p, q, tol: float = NONZERO_TOL) -> dict:
    """Support-count criterion for strong commutation of the pair.

    Only meaningful when the matrices commute; in that case the pair
    strongly commutes iff for all (i, k) the counts
    #{j: q_kj p_ji != 0} and #{j: p_kj q_ji != 0} agree. Mismatching pairs
    are returned as witnesses (1-based indices).
    """
    p, q = _as_stochastic(p), _as_stochastic(q)
    if p.n != q.n:
        raise ValueError("sizes differ")
    comm = commute_check(p, q, tol)
    qp = _support_counts(q.p, p.p, tol)  # qp[k, i]
    pq = _support_counts(p.p, q.p, tol)
    witnesses = [
        {"i": i + 1, "k": k + 1, "count_qp": int(qp[k, i]), "count_pq": int(pq[k, i])}
        for k in range(p.n)
        for i in range(p.n)
        if qp[k, i] != pq[k, i]
    ]
    strong = (comm["commute"] and not witnesses) if comm["commute"] else None
    return {
        "commute": comm["commute"],
        "commute_residual": comm["max_entry"],
        "strong": strong,
        "witnesses": witnesses,
        "tol": tol,
    }


def gram_dim_oracle(p, q, i: int, k: int,
                    tol: float = NONZERO_TOL) -> tuple[int, int]:
    """Ranks of the two Gram matrices of lifted basis vectors at (i, k).

    The vectors e_i ⊗ e_j ⊗ e_k (one per intermediate state j) have, in the
    order Q-after-P respectively P-after-Q, the diagonal Gram matrices
    diag_j(q_kj p_ji) and diag_j(p_kj q_ji); the ranks are the two counts of
    the support criterion. Indices are 1-based.
    """
    p, q = _as_stochastic(p), _as_stochastic(q)
    i, k = i - 1, k - 1
    g1 = np.diag(q.p[k, :] * p.p[:, i])
    g2 = np.diag(p.p[k, :] * q.p[:, i])
    r1 = int(np.sum(np.linalg.eigvalsh(g1) > tol))
    r2 = int(np.sum(np.linalg.eigvalsh(g2) > tol))
    return r1, r2
