"""Dense linear algebra on subspaces of so(n).

Skew matrices are plain ``numpy`` arrays.  Whenever a linear system over
so(n) is needed it is written in the orthonormal coordinates
``(E_pq / sqrt(2))_{p<q}``, so that the Euclidean inner product of coordinate
vectors equals :func:`frobenius_pairing`.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

SQRT2 = np.sqrt(2.0)


@dataclass(frozen=True)
class Tolerances:
    """Relative cutoffs used by every rank and residual decision."""

    rank_rel: float = 1e-10
    resid_rel: float = 1e-8

    def __post_init__(self):
        for name in ("rank_rel", "resid_rel"):
            val = getattr(self, name)
            if not 0.0 < val < 1.0:
                raise ValueError(f"{name} must lie in (0, 1), got {val}")


DEFAULT_TOL = Tolerances()


def skew(a) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    return 0.5 * (a - a.T)


def sym(a) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    return 0.5 * (a + a.T)


def lie(a, b) -> np.ndarray:
    """Commutator ``ab - ba``."""
    return a @ b - b @ a


def frobenius_pairing(a, b) -> float:
    """The standard inner product ``-trace(ab)`` on so(n)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape or a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return float(-np.einsum("ij,ji->", a, b))


def pairing_gram(basis) -> np.ndarray:
    """Matrix of ``-trace(J_i J_j)`` for a stack of matrices."""
    basis = np.asarray(basis, dtype=float)
    return -np.einsum("aij,bji->ab", basis, basis)


def skew_norm(a) -> float:
    return float(np.sqrt(max(frobenius_pairing(a, a), 0.0)))


# --- so(n) coordinates -------------------------------------------------------

def so_dim(n: int) -> int:
    return n * (n - 1) // 2


@lru_cache(maxsize=None)
def _triu(n: int):
    return np.triu_indices(n, 1)


@lru_cache(maxsize=None)
def embedding_matrix(n: int) -> np.ndarray:
    """``(n*n, so_dim(n))`` matrix taking coordinates to row-major vec(A)."""
    iu, ju = _triu(n)
    emb = np.zeros((n * n, len(iu)))
    cols = np.arange(len(iu))
    emb[iu * n + ju, cols] = 1.0 / SQRT2
    emb[ju * n + iu, cols] = -1.0 / SQRT2
    emb.setflags(write=False)
    return emb


def to_coords(a) -> np.ndarray:
    """Coordinates of a skew matrix (or a stack of them)."""
    a = np.asarray(a, dtype=float)
    n = a.shape[-1]
    iu, ju = _triu(n)
    return SQRT2 * a[..., iu, ju]


def from_coords(x, n: int) -> np.ndarray:
    """Inverse of :func:`to_coords`; accepts ``(k,)`` or ``(m, k)`` input."""
    x = np.asarray(x, dtype=float)
    iu, ju = _triu(n)
    out = np.zeros(x.shape[:-1] + (n, n))
    out[..., iu, ju] = x / SQRT2
    out[..., ju, iu] = -x / SQRT2
    return out


def so_basis(n: int) -> np.ndarray:
    return from_coords(np.eye(so_dim(n)), n)


def elementary_skew(n: int, p: int, q: int) -> np.ndarray:
    """``E_pq`` with entries +1 at (p, q) and -1 at (q, p); zero-based."""
    e = np.zeros((n, n))
    e[p, q] = 1.0
    e[q, p] = -1.0
    return e


def ad_operator(j) -> np.ndarray:
    """Matrix of ``A -> [A, J]`` on so(n) coordinates."""
    j = np.asarray(j, dtype=float)
    n = j.shape[0]
    eye = np.eye(n)
    # row-major vec(A J) = (I kron J^T) vec(A), vec(J A) = (J kron I) vec(A)
    full = np.kron(eye, j.T) - np.kron(j, eye)
    emb = embedding_matrix(n)
    return emb.T @ full @ emb


def ad_stack(basis) -> np.ndarray:
    """Stack of ad operators, shape ``(m, so_dim, so_dim)``; vectorised."""
    basis = np.asarray(basis, dtype=float)
    n = basis.shape[-1]
    iu, ju = _triu(n)
    k = len(iu)
    e = from_coords(np.eye(k), n)  # (k, n, n)
    # [E_c, J] for every basis element c and every J
    comm = np.einsum("cij,ajk->acik", e, basis) - np.einsum("aij,cjk->acik", basis, e)
    coords = SQRT2 * comm[..., iu, ju]  # (m, k_in, k_out)
    return np.swapaxes(coords, 1, 2)


# --- factorizations ----------------------------------------------------------

def numerical_rank(s: np.ndarray, tol: Tolerances = DEFAULT_TOL, scale: float = 0.0) -> int:
    """Count singular values above ``rank_rel * max(s_max, scale)``.

    ``scale`` is the natural size of the operator; without it a matrix made
    only of round-off would be declared full rank.
    """
    ref = max(s[0] if s.size else 0.0, scale)
    if ref == 0.0:
        return 0
    return int(np.sum(s > tol.rank_rel * ref))


def nullspace(m, tol: Tolerances = DEFAULT_TOL, scale: float = 0.0) -> np.ndarray:
    """Orthonormal basis of ker M as the *rows* of the returned array."""
    m = np.atleast_2d(np.asarray(m, dtype=float))
    ncols = m.shape[1]
    if m.shape[0] == 0:
        return np.eye(ncols)
    _, s, vt = np.linalg.svd(m, full_matrices=True)
    r = numerical_rank(s, tol, scale)
    return vt[r:].copy()


def range_basis(m, tol: Tolerances = DEFAULT_TOL, scale: float = 0.0) -> np.ndarray:
    """Orthonormal basis of the column space of M, as columns."""
    m = np.atleast_2d(np.asarray(m, dtype=float))
    if m.size == 0:
        return np.zeros((m.shape[0], 0))
    u, s, _ = np.linalg.svd(m, full_matrices=False)
    return u[:, : numerical_rank(s, tol, scale)].copy()


def least_squares_min_norm(m, b, tol: Tolerances = DEFAULT_TOL):
    """Minimum-norm least-squares solution via a truncated SVD.

    Returns ``(x, residual)`` with ``residual = ||M x - b||``.
    """
    m = np.atleast_2d(np.asarray(m, dtype=float))
    b = np.asarray(b, dtype=float)
    if m.shape[1] == 0:
        return np.zeros(0), float(np.linalg.norm(b))
    u, s, vt = np.linalg.svd(m, full_matrices=False)
    r = numerical_rank(s, tol)
    x = vt[:r].T @ ((u[:, :r].T @ b) / s[:r])
    return x, float(np.linalg.norm(m @ x - b))


def sym_eig(s):
    """Ascending eigenvalues and orthonormal eigenvectors (as columns)."""
    w, q = np.linalg.eigh(sym(s))
    return w, q


def orthonormalize(basis: Sequence[np.ndarray], tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Orthonormal basis (under ``-trace``) of the span of skew matrices.

    Modified Gram-Schmidt with one re-orthogonalisation pass; members whose
    residual falls below ``rank_rel`` times the largest input norm are dropped.
    """
    basis = np.asarray(basis, dtype=float)
    if basis.ndim != 3 or basis.shape[0] == 0:
        raise ValueError("need a nonempty stack of square matrices")
    n = basis.shape[-1]
    vecs = to_coords(basis)
    norms = np.linalg.norm(vecs, axis=1)
    top = norms.max()
    if top == 0.0:
        raise ValueError("all input matrices are zero")
    kept: list[np.ndarray] = []
    for v in vecs:
        w = v.copy()
        for _ in range(2):
            for q in kept:
                w -= (q @ w) * q
        nw = np.linalg.norm(w)
        if nw > tol.rank_rel * top:
            kept.append(w / nw)
    return from_coords(np.array(kept), n)


def span_dim(basis, tol: Tolerances = DEFAULT_TOL) -> int:
    basis = np.asarray(basis, dtype=float)
    if basis.shape[0] == 0:
        return 0
    s = np.linalg.svd(to_coords(basis), compute_uv=False)
    return numerical_rank(s, tol)


def contained_in(small, big, tol: Tolerances = DEFAULT_TOL) -> float:
    """Largest relative distance of a member of ``small`` from span(big).

    Zero means containment; compare the result against a tolerance.
    """
    small = np.asarray(small, dtype=float)
    if small.shape[0] == 0:
        return 0.0
    xs = to_coords(small)
    big = np.asarray(big, dtype=float)
    if big.shape[0] == 0:
        return 1.0 if np.any(np.linalg.norm(xs, axis=1) > 0) else 0.0
    q = range_basis(to_coords(big).T, tol)
    res = xs - (xs @ q) @ q.T
    scale = np.maximum(np.linalg.norm(xs, axis=1), np.finfo(float).tiny)
    return float(np.max(np.linalg.norm(res, axis=1) / scale))


def rng_for(seed: int, index: int = 0) -> np.random.Generator:
    """Independent deterministic stream for draw ``index`` under ``seed``."""
    return np.random.default_rng([int(seed) & (2**64 - 1), int(index)])


def random_orthogonal(n: int, rng: np.random.Generator) -> np.ndarray:
    q, r = np.linalg.qr(rng.standard_normal((n, n)))
    return q * np.sign(np.diag(r))
