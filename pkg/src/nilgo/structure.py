"""Centralizers, normalizers and related subalgebras of so(n) attached to V."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import (
    DEFAULT_TOL,
    Tolerances,
    ad_stack,
    from_coords,
    lie,
    nullspace,
    range_basis,
    so_dim,
    to_coords,
)
from .model import SoSubspace


class NumericalFailure(RuntimeError):
    """A closure check that must hold mathematically failed numerically."""


def _empty(n: int) -> np.ndarray:
    return np.zeros((0, n, n))


def _v_coords(v: SoSubspace, tol: Tolerances) -> np.ndarray:
    """Orthonormal columns spanning V inside so(n)-coordinates."""
    return range_basis(to_coords(v.basis).T, tol)


def _closed(basis: np.ndarray, tol: Tolerances, scale: float = 1e-8) -> bool:
    """Whether span(basis) is closed under the bracket (orthonormal input)."""
    if basis.shape[0] == 0:
        return True
    q = range_basis(to_coords(basis).T, tol)
    for a in range(basis.shape[0]):
        for b in range(a + 1, basis.shape[0]):
            c = to_coords(lie(basis[a], basis[b]))
            res = c - q @ (q.T @ c)
            bound = scale * np.linalg.norm(to_coords(basis[a])) * np.linalg.norm(to_coords(basis[b]))
            if np.linalg.norm(res) > bound:
                return False
    return True


def _basis_scale(v: SoSubspace) -> float:
    return float(np.max(np.linalg.norm(to_coords(v.basis), axis=1)))


def centralizer(v: SoSubspace, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Orthonormal basis of C(V) = {A : [A, J] = 0 for all J in V}."""
    ops = ad_stack(v.basis).reshape(-1, so_dim(v.n))
    return from_coords(nullspace(ops, tol, _basis_scale(v)), v.n)


def normalizer(v: SoSubspace, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Orthonormal basis of N(V) = {A : [A, V] in V}."""
    q = _v_coords(v, tol)
    ops = ad_stack(v.basis)
    proj = ops - np.einsum("ik,jk,ajl->ail", q, q, ops)
    return from_coords(nullspace(proj.reshape(-1, so_dim(v.n)), tol, _basis_scale(v)), v.n)


def ad_on_v(v: SoSubspace, elems, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Matrices of ``ad_N`` restricted to V in the V-basis, one per element.

    Column ``k`` of entry ``a`` holds the V-coordinates of ``[N_a, J_k]``.
    """
    elems = np.asarray(elems, dtype=float)
    vc = to_coords(v.basis).T  # (so_dim, m)
    out = np.empty((elems.shape[0], v.dim, v.dim))
    for a, nmat in enumerate(elems):
        images = to_coords(nmat @ v.basis - v.basis @ nmat).T
        out[a] = np.linalg.lstsq(vc, images, rcond=None)[0]
    return out


def skew_normalizer(v: SoSubspace, n_basis=None, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Basis of Ng(V): normalizer elements acting skew-symmetrically on (V, gram)."""
    n_basis = normalizer(v, tol) if n_basis is None else np.asarray(n_basis, dtype=float)
    if n_basis.shape[0] == 0:
        return _empty(v.n)
    ads = ad_on_v(v, n_basis, tol)
    g = v.gram
    # G R + R^T G = 0, written on the upper triangle including the diagonal
    iu = np.triu_indices(v.dim)
    cons = np.array([(g @ r + r.T @ g)[iu] for r in ads]).T
    scale = np.linalg.norm(g, 2) * max(1.0, max(np.linalg.norm(r, 2) for r in ads))
    coeffs = nullspace(cons, tol, scale)
    if coeffs.shape[0] == n_basis.shape[0]:
        return n_basis.copy()
    if coeffs.shape[0] == 0:
        return _empty(v.n)
    elems = np.tensordot(coeffs, n_basis, axes=1)
    q = range_basis(to_coords(elems).T, tol)
    return from_coords(q.T, v.n)


def split_pure(v: SoSubspace, alg_basis, c_basis, tol: Tolerances = DEFAULT_TOL):
    """Split an algebra containing C(V) as ``C(V) + pure part`` (orthogonal).

    Returns ``(c_basis, pure_basis)``; raises :class:`NumericalFailure` when
    the complement is not closed under the bracket.
    """
    alg_basis = np.asarray(alg_basis, dtype=float)
    c_basis = np.asarray(c_basis, dtype=float)
    n = v.n
    if alg_basis.shape[0] == 0:
        return c_basis.reshape(-1, n, n), _empty(n)
    a = to_coords(alg_basis).T
    scale = float(np.linalg.norm(a, axis=0).max())
    if c_basis.shape[0]:
        qc = range_basis(to_coords(c_basis).T, tol)
        a = a - qc @ (qc.T @ a)
    pure = from_coords(range_basis(a, tol, scale).T, n)
    if not _closed(pure, tol):
        raise NumericalFailure("pure normalizer is not a subalgebra at tolerance")
    return c_basis.reshape(-1, n, n), pure


def generated_subalgebra(v: SoSubspace, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Orthonormal basis of m(V), the Lie subalgebra generated by V."""
    n = v.n
    q = range_basis(to_coords(v.basis).T, tol)
    for _ in range(so_dim(n) + 1):
        cur = from_coords(q.T, n)
        k = cur.shape[0]
        a, b = np.triu_indices(k, 1)
        if a.size == 0:
            return cur
        br = cur[a] @ cur[b] - cur[b] @ cur[a]
        new = range_basis(np.hstack([q, to_coords(br).T]), tol)
        if new.shape[1] == q.shape[1]:
            return cur
        q = new
    raise NumericalFailure("generated subalgebra did not stabilise")


@dataclass(frozen=True, eq=False)
class NormalizerSet:
    c_basis: np.ndarray
    n_basis: np.ndarray
    ng_basis: np.ndarray
    p_basis: np.ndarray
    pg_basis: np.ndarray
    m_basis: np.ndarray

    @property
    def dims(self) -> dict:
        return {name: getattr(self, f"{name}_basis").shape[0] for name in ("c", "n", "ng", "p", "pg", "m")}


def normalizers(v: SoSubspace, tol: Tolerances = DEFAULT_TOL, with_m: bool = True) -> NormalizerSet:
    c = centralizer(v, tol)
    nb = normalizer(v, tol)
    ng = skew_normalizer(v, nb, tol)
    _, p = split_pure(v, nb, c, tol)
    _, pg = split_pure(v, ng, c, tol)
    m = generated_subalgebra(v, tol) if with_m else _empty(v.n)
    return NormalizerSet(c, nb, ng, p, pg, m)


@dataclass(frozen=True, eq=False)
class ElementCentralizer:
    j_coords: np.ndarray
    basis: np.ndarray


def element_centralizer(v: SoSubspace, ng_basis, j_coords, tol: Tolerances = DEFAULT_TOL) -> ElementCentralizer:
    """Basis of C(J) = {N in Ng(V) : [N, J] = 0}."""
    j_coords = np.asarray(j_coords, dtype=float)
    jm = v.element(j_coords)
    if not np.any(jm):
        raise ValueError("J must be nonzero")
    ng_basis = np.asarray(ng_basis, dtype=float).reshape(-1, v.n, v.n)
    if ng_basis.shape[0] == 0:
        return ElementCentralizer(j_coords, _empty(v.n))
    comm = to_coords(ng_basis @ jm - jm @ ng_basis).T
    scale = np.linalg.norm(jm) * float(np.linalg.norm(to_coords(ng_basis), axis=1).max())
    coeffs = nullspace(comm, tol, scale)
    if coeffs.shape[0] == 0:
        return ElementCentralizer(j_coords, _empty(v.n))
    q = range_basis(to_coords(np.tensordot(coeffs, ng_basis, axes=1)).T, tol)
    return ElementCentralizer(j_coords, from_coords(q.T, v.n))


def invariance_defect(v: SoSubspace, frame) -> float:
    """``max_J ||(I - P_L) J P_L|| / ||J||`` for the subspace spanned by ``frame``."""
    frame = np.asarray(frame, dtype=float)
    proj = frame @ frame.T
    comp = np.eye(v.n) - proj
    worst = 0.0
    for jm in v.basis:
        worst = max(worst, np.linalg.norm(comp @ jm @ proj) / np.linalg.norm(jm))
    return worst


def project_subspace(v: SoSubspace, frame, tol: Tolerances = DEFAULT_TOL, check: float = None) -> SoSubspace:
    """Compression ``pi_L(V)`` written in the orthonormal frame of L.

    ``frame`` has orthonormal columns spanning a V-invariant subspace L.  When
    the projection has a kernel in V, the pushed-forward inner product is the
    quotient one (restriction to the gram-orthogonal complement of the kernel).
    """
    frame = np.asarray(frame, dtype=float)
    if frame.ndim != 2 or frame.shape[0] != v.n:
        raise ValueError("frame must have shape (n, k)")
    if np.abs(frame.T @ frame - np.eye(frame.shape[1])).max() > 1e-10:
        raise ValueError("frame columns must be orthonormal")
    limit = tol.resid_rel if check is None else check
    defect = invariance_defect(v, frame)
    if defect > limit:
        raise ValueError(f"subspace is not V-invariant (defect {defect:.3e})")
    comp = frame.T @ v.basis @ frame
    k = frame.shape[1]
    meta = {**v.metadata, "projected_from": str(v.n)}
    if k < 2:
        raise ValueError("projection onto a subspace of dimension < 2 is zero")
    flat = to_coords(comp)
    s = np.linalg.svd(flat, compute_uv=False)
    if s.size == v.dim and s[-1] > tol.rank_rel * max(s[0], 1e-300):
        return SoSubspace(comp, v.gram, meta, v.tol)
    # kernel of the projection map, complement taken w.r.t. the gram
    ker = nullspace(flat.T, tol)  # rows: coefficient vectors in the kernel
    if ker.shape[0] == v.dim:
        raise ValueError("V projects to zero on this subspace")
    g = v.gram
    keep = nullspace(ker @ g, tol)  # gram-orthogonal complement
    new_basis = np.tensordot(keep, comp, axes=1)
    return SoSubspace(new_basis, keep @ g @ keep.T, meta, v.tol)
