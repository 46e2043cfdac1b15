"""Metric 2-step nilpotent Lie algebras as pairs (V in so(a), inner product)."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Optional

import numpy as np

from .linalg import DEFAULT_TOL, Tolerances, pairing_gram, to_coords

SCHEMA = "nilgo/1"


class AlgebraError(ValueError):
    """Invalid algebra data."""


class NotSkew(AlgebraError):
    def __init__(self, index: int):
        super().__init__(f"NotSkew({index}): basis matrix {index} is not skew-symmetric")
        self.index = index


class AlgebraFileError(AlgebraError):
    """Malformed or mismatching algebra file."""


def standard_gram(basis) -> np.ndarray:
    """Standard inner product ``-trace(AB) / n``.

    The ``1/n`` normalisation makes complex structures unit vectors.
    """
    basis = np.asarray(basis, dtype=float)
    return pairing_gram(basis) / basis.shape[-1]


@dataclass(frozen=True, eq=False)
class SoSubspace:
    """A subspace V of so(n) with an inner product given by ``gram``.

    ``basis`` has shape ``(m, n, n)``; ``gram[i, j]`` is the inner product of
    basis elements ``i`` and ``j``.  Arrays are copied and made read-only.
    """

    basis: np.ndarray
    gram: np.ndarray
    metadata: Mapping[str, str] = field(default_factory=dict)
    tol: Tolerances = DEFAULT_TOL

    def __post_init__(self):
        basis = np.array(self.basis, dtype=float)
        if basis.ndim == 2:
            basis = basis[None]
        if basis.ndim != 3 or basis.shape[1] != basis.shape[2]:
            raise AlgebraError(f"basis must have shape (m, n, n), got {basis.shape}")
        m = basis.shape[0]
        if m < 1:
            raise AlgebraError("V must have dimension at least 1")
        if not np.all(np.isfinite(basis)):
            raise AlgebraError("non-finite entries in basis")
        for k, b in enumerate(basis):
            scale = max(np.abs(b).max(), 1.0)
            if np.abs(b + b.T).max() > 1e-12 * scale:
                raise NotSkew(k)
        basis = 0.5 * (basis - np.swapaxes(basis, 1, 2))
        gram = np.array(self.gram, dtype=float)
        if gram.shape != (m, m):
            raise AlgebraError(f"gram must be {m}x{m}, got {gram.shape}")
        if not np.all(np.isfinite(gram)) or np.abs(gram - gram.T).max() > 1e-12 * max(np.abs(gram).max(), 1.0):
            raise AlgebraError("gram is not a finite symmetric matrix")
        gram = 0.5 * (gram + gram.T)
        if np.linalg.eigvalsh(gram).min() <= 0.0:
            raise AlgebraError("gram is not positive definite")
        s = np.linalg.svd(to_coords(basis), compute_uv=False)
        if s.size < m or s[0] == 0.0 or s[-1] <= self.tol.rank_rel * s[0]:
            raise AlgebraError("basis is linearly dependent")
        basis.setflags(write=False)
        gram.setflags(write=False)
        object.__setattr__(self, "basis", basis)
        object.__setattr__(self, "gram", gram)
        object.__setattr__(self, "metadata", dict(self.metadata))

    @classmethod
    def standard(cls, basis, metadata=None, tol: Tolerances = DEFAULT_TOL) -> "SoSubspace":
        basis = np.asarray(basis, dtype=float)
        if basis.ndim == 2:
            basis = basis[None]
        return cls(basis, standard_gram(basis), metadata or {}, tol)

    @property
    def n(self) -> int:
        return self.basis.shape[1]

    @property
    def dim(self) -> int:
        return self.basis.shape[0]

    def element(self, coords) -> np.ndarray:
        return np.tensordot(np.asarray(coords, dtype=float), self.basis, axes=1)

    def with_gram(self, gram, **meta) -> "SoSubspace":
        return SoSubspace(self.basis, gram, {**self.metadata, **meta}, self.tol)

    def conjugate(self, q) -> "SoSubspace":
        """Image under ``J -> Q J Q^T`` for orthogonal Q; the gram is unchanged."""
        q = np.asarray(q, dtype=float)
        return SoSubspace(q @ self.basis @ q.T, self.gram, self.metadata, self.tol)

    def is_standard(self, rtol: float = 1e-9) -> bool:
        """True when the gram is a positive multiple of ``-trace``."""
        ref = pairing_gram(self.basis)
        c = np.sum(self.gram * ref) / np.sum(ref * ref)
        return c > 0 and np.abs(self.gram - c * ref).max() <= rtol * np.abs(self.gram).max()

    def orthonormal_basis(self) -> np.ndarray:
        """Basis orthonormal for ``gram`` (via Cholesky)."""
        chol = np.linalg.cholesky(self.gram)
        return np.tensordot(np.linalg.inv(chol), self.basis, axes=1)

    def common_kernel(self) -> np.ndarray:
        """Orthonormal columns spanning the common kernel of all basis matrices."""
        stacked = self.basis.reshape(-1, self.n)
        _, s, vt = np.linalg.svd(stacked)
        r = int(np.sum(s > self.tol.rank_rel * s[0]))
        return vt[r:].T.copy()


@dataclass(frozen=True, eq=False)
class MetricNilpotentAlgebra:
    """``n = a + z`` with ``z`` identified with V through ``Z -> J_Z``.

    ``v`` is None only for an abelian algebra built with ``allow_abelian``.
    """

    ambient_dim: int
    v: Optional[SoSubspace]
    reduced: bool = False

    @property
    def center_dim(self) -> int:
        return 0 if self.v is None else self.v.dim

    @property
    def total_dim(self) -> int:
        return self.ambient_dim + self.center_dim


def _cholesky(g, what):
    g = np.asarray(g, dtype=float)
    try:
        return np.linalg.cholesky(0.5 * (g + g.T))
    except np.linalg.LinAlgError as exc:
        raise AlgebraError(f"degenerate {what}") from exc


def from_structure_constants(c, gram_a=None, gram_z=None, allow_abelian: bool = False,
                             tol: Tolerances = DEFAULT_TOL) -> MetricNilpotentAlgebra:
    """Build V from ``[X_i, X_j] = sum_k c[i, j, k] Z_k``.

    Both bases are orthonormalised first; the returned V has basis
    ``J_{Z'_k}`` for a ``gram_z``-orthonormal ``Z'_k``, hence identity gram.
    """
    c = np.asarray(c, dtype=float)
    if c.ndim != 3 or c.shape[0] != c.shape[1]:
        raise AlgebraError(f"structure constants must have shape (n, n, m), got {c.shape}")
    n, m = c.shape[0], c.shape[2]
    if np.abs(c + np.swapaxes(c, 0, 1)).max(initial=0.0) > 1e-12 * max(np.abs(c).max(initial=0.0), 1.0):
        raise AlgebraError("structure constants are not antisymmetric in (i, j)")
    gram_a = np.eye(n) if gram_a is None else gram_a
    gram_z = np.eye(m) if gram_z is None else gram_z
    la = _cholesky(gram_a, "gram_a")
    lz = _cholesky(gram_z, "gram_z")
    b = np.linalg.inv(la).T
    c1 = np.einsum("pi,qj,pqk->ijk", b, b, c)
    c2 = np.einsum("ijk,kl->ijl", c1, lz)
    if np.abs(c2).max(initial=0.0) == 0.0:
        if allow_abelian:
            return MetricNilpotentAlgebra(n, None)
        raise AlgebraError("abelian algebra (all structure constants vanish)")
    # J_l[j, i] = <Z'_l, [X'_i, X'_j]>
    basis = np.transpose(c2, (2, 1, 0))
    v = SoSubspace(basis, np.eye(m), tol=tol)
    return MetricNilpotentAlgebra(n, v)


def to_structure_constants(alg) -> np.ndarray:
    """``c[i, j, k] = <J_{Z_k} X_i, X_j>`` for orthonormal bases of a and z."""
    v = alg.v if isinstance(alg, MetricNilpotentAlgebra) else alg
    if v is None:
        n = alg.ambient_dim
        return np.zeros((n, n, 0))
    return np.transpose(v.orthonormal_basis(), (2, 1, 0)).copy()


def bracket(alg, x, y) -> np.ndarray:
    """Coordinates of ``[X, Y]`` in the V-basis."""
    v = alg.v if isinstance(alg, MetricNilpotentAlgebra) else alg
    if v is None:
        return np.zeros(0)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    r = np.einsum("kij,j,i->k", v.basis, x, y)
    return np.linalg.solve(v.gram, r)


def reduce_abelian(alg: MetricNilpotentAlgebra) -> MetricNilpotentAlgebra:
    """Drop the common kernel of V from a (splits off the abelian factor)."""
    v = alg.v
    if v is None:
        return alg
    ker = v.common_kernel()
    if ker.shape[1] == 0:
        return alg
    _, _, vt = np.linalg.svd(ker.T)
    keep = vt[ker.shape[1]:].T
    basis = keep.T @ v.basis @ keep
    meta = {**v.metadata, "reduced_from": str(v.n)}
    return MetricNilpotentAlgebra(keep.shape[1], SoSubspace(basis, v.gram, meta, v.tol), reduced=True)


# --- file format -------------------------------------------------------------

def _num(x: float) -> str:
    if not math.isfinite(x):
        raise AlgebraFileError("non-finite number")
    return format(float(x) + 0.0, ".17g")  # + 0.0 folds -0 into 0


def _row(values) -> str:
    return "[" + ", ".join(_num(x) for x in values) + "]"


def dumps_algebra(v: SoSubspace) -> str:
    lines = ["{", f'  "schema": "{SCHEMA}",', f'  "ambient_dim": {v.n},', '  "basis": [']
    rows = [f"    {_row(b.ravel())}" for b in v.basis]
    lines.append(",\n".join(rows))
    lines.append("  ],")
    lines.append('  "gram": [')
    lines.append(",\n".join(f"    {_row(r)}" for r in v.gram))
    lines.append("  ],")
    meta = {str(k): str(val) for k, val in sorted(v.metadata.items())}
    lines.append(f'  "metadata": {json.dumps(meta, sort_keys=True)}')
    lines.append("}")
    return "\n".join(lines) + "\n"


def loads_algebra(text: str, tol: Tolerances = DEFAULT_TOL) -> SoSubspace:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise AlgebraFileError(f"malformed JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise AlgebraFileError("top level must be an object")
    if doc.get("schema") != SCHEMA:
        raise AlgebraFileError(f"schema mismatch: expected {SCHEMA!r}, got {doc.get('schema')!r}")
    missing = {"ambient_dim", "basis", "gram"} - doc.keys()
    if missing:
        raise AlgebraFileError(f"missing fields: {sorted(missing)}")
    n = doc["ambient_dim"]
    if not isinstance(n, int) or n < 1:
        raise AlgebraFileError("ambient_dim must be a positive integer")
    try:
        flat = np.array(doc["basis"], dtype=float)
        gram = np.array(doc["gram"], dtype=float)
    except (TypeError, ValueError) as exc:
        raise AlgebraFileError(f"non-numeric matrix data: {exc}") from exc
    if flat.ndim != 2 or flat.shape[1] != n * n:
        raise AlgebraFileError(f"each basis entry must hold {n * n} numbers")
    meta = doc.get("metadata", {})
    if not isinstance(meta, dict):
        raise AlgebraFileError("metadata must be an object")
    return SoSubspace(flat.reshape(-1, n, n), gram, {str(k): str(v) for k, v in meta.items()}, tol)


def write_algebra(alg, path) -> None:
    v = alg.v if isinstance(alg, MetricNilpotentAlgebra) else alg
    if v is None:
        raise AlgebraFileError("cannot serialise an abelian algebra")
    Path(path).write_text(dumps_algebra(v), encoding="utf-8")


def read_algebra(path, tol: Tolerances = DEFAULT_TOL) -> MetricNilpotentAlgebra:
    text = Path(path).read_text(encoding="utf-8")
    v = loads_algebra(text, tol)
    return MetricNilpotentAlgebra(v.n, v, reduced="reduced_from" in v.metadata)
