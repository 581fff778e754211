"""Representations of a subproduct system by row contractions, and their models.

A d-tuple T on C^h represents the system X when every polynomial vanishing
on X annihilates T. The dilation-side machinery lives here:

* Poisson kernels K: h -> (truncated Fock) ⊗ h and the compression identity
  K† (S^a S^{b†} ⊗ I) K ≈ r^{|a|+|b|} T^a T^{b†};
* the intertwining of T with the shift tuple after rescaling past the row
  norm (the finite-depth form of the co-model);
* a two-depth von Neumann inequality check with a stabilization gap;
* the largest subspace on which a tuple is an X-representation (maximal
  X-piece), by fixed-point shrinking;
* the discrete CP semigroup a -> T̃_n (I ⊗ a) T̃_n† induced by a
  representation.

Everything is computed level-recursively through fiber frames; no routine
enumerates the d^n words of a level.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Optional

import numpy as np

from spsys import linalg
from spsys.linalg import Subspace
from spsys.ncpoly import NCPoly, q_relation_gens
from spsys.subproduct import SubproductSystem, check_budget
from spsys import fock as fock_mod

REP_TOL = 1e-8
EIG_CLAMP = 1e-12


@dataclass(frozen=True)
class RepTuple:
    """A d-tuple of operators on C^h."""

    matrices: tuple[np.ndarray, ...]

    def __post_init__(self):
        if not self.matrices:
            raise ValueError("empty tuple")
        h = self.matrices[0].shape[0]
        mats = []
        for m in self.matrices:
            m = np.asarray(m, dtype=complex)
            if m.shape != (h, h):
                raise ValueError("matrices must be square and of equal size")
            if not np.all(np.isfinite(m)):
                raise ValueError("matrix entries must be finite")
            mats.append(m)
        object.__setattr__(self, "matrices", tuple(mats))

    @property
    def d(self) -> int:
        return len(self.matrices)

    @property
    def h(self) -> int:
        return self.matrices[0].shape[0]

    @cached_property
    def row_norm(self) -> float:
        return linalg.opnorm(np.hstack(self.matrices))

    def scaled(self, factor: float) -> "RepTuple":
        return RepTuple(tuple(factor * m for m in self.matrices))

    def word(self, letters) -> np.ndarray:
        out = np.eye(self.h, dtype=complex)
        for a in letters:
            out = out @ self.matrices[a - 1]
        return out


def full_word_maps(rep: RepTuple, depth: int) -> list[np.ndarray]:
    """W_n: (C^d)^{⊗n} ⊗ C^h -> C^h, e_w ⊗ v -> T^w v, built recursively."""
    row = np.hstack(rep.matrices)
    maps = [np.eye(rep.h, dtype=complex)]
    for _ in range(depth):
        maps.append(row @ np.kron(np.eye(rep.d), maps[-1]))
    return maps


def _iota(system: SubproductSystem, n: int) -> np.ndarray:
    """Coordinates of X(n) inside X(n-1) ⊗ X(1): (F_{n-1} ⊗ F_1)† F_n."""
    d = system.d
    f_prev = system.fiber(n - 1).frame
    f_one = system.fiber(1).frame
    f_n = system.fiber(n).frame
    r_prev, r_one, r_n = f_prev.shape[1], f_one.shape[1], f_n.shape[1]
    t1 = np.einsum(
        "ap,abj->pbj", f_prev.conj(), f_n.reshape(d ** (n - 1), d, r_n)
    )
    iota = np.einsum("bq,pbj->pqj", f_one.conj(), t1)
    return iota.reshape(r_prev * r_one, r_n)


def rep_tildes(system: SubproductSystem, rep: RepTuple, depth: Optional[int] = None) -> list[np.ndarray]:
    """T̃_n: X(n) ⊗ C^h -> C^h in fiber coordinates, for n = 0..depth.

    T̃_n factors as T̃_{n-1} (I ⊗ T̃_1) through the inclusion of X(n) into
    X(n-1) ⊗ X(1), which keeps the cost proportional to fiber dimensions.
    """
    if rep.d != system.d:
        raise ValueError("tuple size does not match the system")
    depth = system.depth if depth is None else depth
    if depth > system.depth:
        raise ValueError("depth exceeds the system depth")
    h = rep.h
    tildes = [np.eye(h, dtype=complex)]
    row = np.hstack(rep.matrices)
    t1 = row @ np.kron(system.fiber(1).frame, np.eye(h))
    if depth >= 1:
        tildes.append(t1)
    for n in range(2, depth + 1):
        r_prev = system.dim(n - 1)
        mid = np.kron(np.eye(r_prev), t1)
        emb = np.kron(_iota(system, n), np.eye(h))
        tildes.append(tildes[-1] @ mid @ emb)
    return tildes


def _generator_polys(system: SubproductSystem) -> Optional[list[NCPoly]]:
    kind = system.kind
    prov = system.provenance
    if kind == "ideal":
        return list(prov["gens"].gens)
    if kind == "qmatrix":
        return list(q_relation_gens(prov["q"]).gens)
    if kind == "quadratic":
        a = prov["a"]
        if np.all(a == 0):
            return []
        terms = {}
        for i in range(2):
            for j in range(2):
                if a[i, j] != 0:
                    terms[(i + 1, j + 1)] = a[i, j]
        return [NCPoly(2, terms)]
    if kind == "subshift":
        spec = prov["spec"]
        return [NCPoly.monomial(system.d, w) for w in spec.forbidden]
    if kind == "full":
        return []
    return None


def is_representation(system: SubproductSystem, rep: RepTuple,
                      tol: float = REP_TOL,
                      budget: Optional[int] = None) -> dict:
    """Residuals of the annihilation conditions, level by level.

    For systems that carry a generating set (ideal, q-matrix, quadratic,
    subshift, full) the level-n residual is the largest ||g(T)|| over
    generators of degree <= n; annihilating the generators annihilates the
    whole graded ideal, so for a contractive tuple this equals the residual
    over the full orthogonal complement of the fiber. Systems without
    generators are checked against explicit complement frames.
    """
    if rep.d != system.d:
        raise ValueError("tuple size does not match the system")
    gens = _generator_polys(system)
    h = rep.h
    if gens is not None:
        norms = [(g.degree(), linalg.opnorm(g.eval_on_tuple(rep.matrices)))
                 for g in gens]
        residuals = []
        for n in range(1, system.depth + 1):
            residuals.append(max((r for k, r in norms if k <= n), default=0.0))
        route = "generators"
    else:
        maps = full_word_maps(rep, system.depth)
        residuals = []
        for n in range(1, system.depth + 1):
            comp = linalg.complement(system.fiber(n))
            if comp.dim == 0:
                residuals.append(0.0)
                continue
            check_budget(16 * system.d**n * h * comp.dim * h, budget,
                         f"complement residual at level {n}")
            r_block = maps[n] @ np.kron(comp.frame, np.eye(h))
            worst = 0.0
            for j in range(comp.dim):
                worst = max(worst, linalg.opnorm(r_block[:, j * h:(j + 1) * h]))
            residuals.append(worst)
        route = "complement"
    return {
        "residuals": residuals,
        "max_residual": max(residuals, default=0.0),
        "ok": all(r <= tol for r in residuals),
        "route": route,
        "tol": tol,
    }


class PoissonKernel:
    """K_r(T): C^h -> (truncated Fock of X) ⊗ C^h.

    The level-n block is (I ⊗ Δ(rT)^{1/2}) (rT)~_n† with
    Δ(W) = I - sum_i W_i W_i†. For a representation with row norm below 1/r
    this is an isometry up to a geometric tail in the truncation depth.
    """

    def __init__(self, system: SubproductSystem, rep: RepTuple, r: float,
                 depth: Optional[int] = None):
        if rep.d != system.d:
            raise ValueError("tuple size does not match the system")
        if not 0 < r <= 1:
            raise ValueError("need 0 < r <= 1")
        if rep.row_norm > 1 + 1e-10:
            raise ValueError(f"row norm {rep.row_norm:.6f} exceeds 1")
        if r == 1 and rep.row_norm >= 1:
            raise ValueError("r = 1 requires row norm strictly below 1")
        self.system = system
        self.rep = rep
        self.r = float(r)
        self.depth = system.depth if depth is None else depth
        scaled = rep.scaled(self.r)
        self.row_norm_w = min(scaled.row_norm, 1 - 1e-15)
        h = rep.h
        delta = np.eye(h, dtype=complex)
        for w in scaled.matrices:
            delta -= w @ w.conj().T
        self.delta_sqrt = linalg.psd_sqrt(delta, clamp=EIG_CLAMP)
        tildes = rep_tildes(system, scaled, self.depth)
        blocks = []
        for n in range(self.depth + 1):
            m = tildes[n].conj().T
            r_n = system.dim(n)
            m3 = m.reshape(r_n, h, h)
            blocks.append(
                np.einsum("ab,nbh->nah", self.delta_sqrt, m3).reshape(r_n * h, h)
            )
        self.matrix = np.vstack(blocks)
        self._shifts = None

    @property
    def h(self) -> int:
        return self.rep.h

    def shifts(self) -> fock_mod.ShiftSet:
        if self._shifts is None:
            fk = fock_mod.build_fock(self.system, self.depth)
            self._shifts = fock_mod.build_shifts(fk)
        return self._shifts

    def isometry_defect(self) -> float:
        k = self.matrix
        return linalg.opnorm(k.conj().T @ k - np.eye(self.h))

    def tail_bound(self) -> float:
        rho = self.row_norm_w
        return rho ** (2 * (self.depth + 1)) / (1 - rho**2)


def poisson_kernel(system: SubproductSystem, rep: RepTuple, r: float,
                   depth: Optional[int] = None) -> PoissonKernel:
    return PoissonKernel(system, rep, r, depth)


def poisson_transform(kernel: PoissonKernel, alpha, beta) -> dict:
    """Compress S^a S^{b†} ⊗ I through the kernel and compare with the tuple.

    For an X-representation the result is r^{|a|+|b|} T^a T^{b†} up to a
    tail controlled by the depth left above max(|a|, |b|).
    """
    alpha, beta = tuple(alpha), tuple(beta)
    n_depth = kernel.depth
    if max(len(alpha), len(beta)) > n_depth:
        raise ValueError("word longer than the truncation depth")
    shifts = kernel.shifts()
    op = shifts.of_word(alpha) @ shifts.of_word(beta).conj().T
    big = np.kron(op, np.eye(kernel.h))
    value = kernel.matrix.conj().T @ big @ kernel.matrix
    s = len(alpha) + len(beta)
    t = kernel.rep
    target = kernel.r**s * (t.word(alpha) @ t.word(beta).conj().T)
    residual = linalg.opnorm(value - target)
    rho = kernel.row_norm_w
    m = n_depth - max(len(alpha), len(beta))
    bound = kernel.r**s * rho ** (2 * (m + 1)) / (1 - rho**2)
    return {
        "alpha": alpha,
        "beta": beta,
        "value": value,
        "target": target,
        "residual": residual,
        "bound": bound,
        "ok": residual <= bound + 1e-9,
    }


def model_intertwining_check(system: SubproductSystem, rep: RepTuple, r: float,
                             depth: Optional[int] = None,
                             tol: float = 1e-9) -> dict:
    """Check that T is a piece of the shift: (S_i ⊗ I)† K = K W_i† for W = T/r.

    Requires r strictly above the row norm of T, so that W = T/r has row
    norm below one. Exact up to the top truncation level, whose size is
    bounded by row_norm(W)^{depth+1}.
    """
    if r <= rep.row_norm:
        raise ValueError(
            f"need r > row norm ({rep.row_norm:.6f}) for the rescaled model"
        )
    w = rep.scaled(1.0 / r)
    kernel = PoissonKernel(system, w, 1.0, depth)
    n_depth = kernel.depth
    shifts = kernel.shifts()
    k = kernel.matrix
    eye_h = np.eye(rep.h)
    residuals = []
    for i in range(rep.d):
        lhs = np.kron(shifts.matrices[i], eye_h).conj().T @ k
        rhs = k @ w.matrices[i].conj().T
        residuals.append(linalg.opnorm(lhs - rhs))
    rho = kernel.row_norm_w
    bound = rho ** (n_depth + 1)
    return {
        "residuals": residuals,
        "bound": bound,
        "isometry_defect": kernel.isometry_defect(),
        "isometry_bound": kernel.tail_bound(),
        "ok": all(res <= bound + tol for res in residuals),
        "tol": tol,
    }


def vn_inequality_check(system: SubproductSystem, rep: RepTuple,
                        p: NCPoly, q: NCPoly,
                        depth: Optional[int] = None) -> dict:
    """Compare ||p(T) q(T)†|| against the same expression in the shifts.

    The truncated shift norm increases with the depth toward its limit, so
    lhs <= rhs already certifies the inequality. When lhs lands above the
    truncated rhs the verdict depends on the stabilization gap (the change
    from one depth lower): well above it is a failure, within a few gaps of
    it the truncation is still moving and the comparison is inconclusive.
    """
    depth = system.depth if depth is None else depth
    if depth < 2:
        raise ValueError("need depth >= 2 for a stabilization gap")
    lhs = linalg.opnorm(
        p.eval_on_tuple(rep.matrices) @ q.eval_on_tuple(rep.matrices).conj().T
    )
    rhs = []
    for dd in (depth, depth - 1):
        shifts = fock_mod.build_shifts(fock_mod.build_fock(system, dd))
        mats = shifts.matrices
        rhs.append(
            linalg.opnorm(p.eval_on_tuple(mats) @ q.eval_on_tuple(mats).conj().T)
        )
    gap = abs(rhs[0] - rhs[1])
    margin = max(1e-8, 10.0 * gap)
    if lhs <= rhs[0] + 1e-8:
        verdict = "pass"
    elif lhs > rhs[0] + margin:
        verdict = "fail"
    else:
        verdict = "inconclusive"
    return {
        "lhs": lhs,
        "rhs": rhs[0],
        "rhs_prev": rhs[1],
        "gap": gap,
        "margin": margin,
        "verdict": verdict,
    }


def maximal_piece(system: SubproductSystem, rep: RepTuple,
                  tol: float = 1e-9, budget: Optional[int] = None) -> dict:
    """Largest subspace on which the tuple compresses to an X-representation.

    Shrinks from the full space: at each step keep the vectors whose
    backward orbit under every T̃_n† stays inside X(n) ⊗ (current subspace),
    for all n up to the system depth. The loop is monotone, hence finite.
    """
    if rep.d != system.d:
        raise ValueError("tuple size does not match the system")
    k_dim = rep.h
    maps = full_word_maps(rep, system.depth)
    adjoints = [m.conj().T for m in maps]
    for n in range(1, system.depth + 1):
        check_budget(16 * system.d**n * k_dim * k_dim, budget,
                     f"piece constraints at level {n}")
    current = linalg.full_space(k_dim)
    iterations = 0
    while True:
        iterations += 1
        rows = [np.eye(k_dim) - linalg.projector(current)]
        for n in range(1, system.depth + 1):
            m = adjoints[n]
            proj = linalg.project_pair(
                system.fiber(n).frame, current.frame, m,
                system.d**n, k_dim,
            )
            rows.append(m - proj)
        nxt = linalg.nullspace(np.vstack(rows))
        if nxt.dim == current.dim:
            current = nxt
            break
        current = nxt
        if current.dim == 0:
            break
    residual = 0.0
    if current.dim > 0:
        for n in range(1, system.depth + 1):
            img = adjoints[n] @ current.frame
            proj = linalg.project_pair(
                system.fiber(n).frame, current.frame, img,
                system.d**n, k_dim,
            )
            residual = max(residual, linalg.opnorm(img - proj))
    return {
        "subspace": current,
        "dim": current.dim,
        "iterations": iterations,
        "residual": residual,
        "tol": tol,
    }


class CPSemigroup:
    """The discrete semigroup Θ_n(a) = T̃_n (I ⊗ a) T̃_n† on B(C^h)."""

    def __init__(self, system: SubproductSystem, rep: RepTuple,
                 depth: Optional[int] = None):
        if rep.d != system.d:
            raise ValueError("tuple size does not match the system")
        self.system = system
        self.rep = rep
        self.depth = system.depth if depth is None else depth
        self.tildes = rep_tildes(system, rep, self.depth)

    @property
    def h(self) -> int:
        return self.rep.h

    def theta(self, n: int, a: np.ndarray) -> np.ndarray:
        if not 0 <= n <= self.depth:
            raise ValueError("step out of range")
        a = np.asarray(a, dtype=complex)
        t = self.tildes[n]
        r_n = self.system.dim(n)
        return t @ np.kron(np.eye(r_n), a) @ t.conj().T

    def semigroup_residual(self, m: int, n: int, a: np.ndarray) -> float:
        """|| Θ_m(Θ_n(a)) - Θ_{m+n}(a) ||; small iff the tuple represents X."""
        if m + n > self.depth:
            raise ValueError("m + n exceeds the depth")
        composed = self.theta(m, self.theta(n, a))
        direct = self.theta(m + n, a)
        return linalg.opnorm(composed - direct)

    def choi(self, n: int) -> np.ndarray:
        """sum_ab E_ab ⊗ Θ_n(E_ab); positive semidefinite for a CP map."""
        h = self.h
        out = np.zeros((h * h, h * h), dtype=complex)
        for a in range(h):
            for b in range(h):
                e_ab = np.zeros((h, h), dtype=complex)
                e_ab[a, b] = 1.0
                out[a * h:(a + 1) * h, b * h:(b + 1) * h] = self.theta(n, e_ab)
        return out

    def choi_min_eig(self, n: int) -> float:
        c = self.choi(n)
        w = np.linalg.eigvalsh((c + c.conj().T) / 2)
        return float(w[0]) if w.size else 0.0

    def unital_residual(self, n: int) -> float:
        return linalg.opnorm(self.theta(n, np.eye(self.h)) - np.eye(self.h))


def induced_cp_semigroup(system: SubproductSystem, rep: RepTuple,
                         depth: Optional[int] = None) -> CPSemigroup:
    return CPSemigroup(system, rep, depth)
