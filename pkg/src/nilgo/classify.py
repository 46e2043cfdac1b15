"""Invariant decompositions, type labels, the Radon-Hurwitz bound and the theta invariant."""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np

from .linalg import (
    DEFAULT_TOL,
    Tolerances,
    contained_in,
    lie,
    nullspace,
    pairing_gram,
    range_basis,
    rng_for,
    sym,
)
from .model import SoSubspace
from .structure import NormalizerSet, normalizers, project_subspace
from .verify import Mode, Verdict, go_verdict, min_singular_descent, nonsingular_report

SINGULAR_FLOOR = 1e-6
SPLIT_DRAWS = 3


def radon_hurwitz(n: int) -> int:
    """Maximal dimension of a non-singular subspace of so(n)."""
    if n < 1:
        raise ValueError("n must be positive")
    e = 0
    while n % 2 == 0:
        n //= 2
        e += 1
    b, c = divmod(e, 4)
    return 2 ** c + 8 * b - 1


def check_rh_consistency(v: SoSubspace) -> bool:
    """``dim V <= radon_hurwitz(n)``; meaningful for non-singular V."""
    return v.dim <= radon_hurwitz(v.n)


# --- invariant decomposition ------------------------------------------------

def commutant(mats: np.ndarray, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Basis of ``{S in gl(k) : S J = J S}`` for a stack of k x k matrices."""
    mats = np.asarray(mats, dtype=float)
    k = mats.shape[-1]
    if mats.shape[0] == 0 or not np.any(mats):
        return np.eye(k * k).reshape(-1, k, k)
    eye = np.eye(k)
    # row-major vec(S J - J S) = (I kron J^T - J kron I) vec(S)
    rows = np.concatenate([np.kron(eye, j.T) - np.kron(j, eye) for j in mats])
    scale = float(np.max(np.linalg.norm(mats.reshape(mats.shape[0], -1), axis=1)))
    return nullspace(rows, tol, scale).reshape(-1, k, k)


def symmetric_commutant(mats: np.ndarray, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Orthonormal basis (Frobenius) of the symmetric elements of the commutant."""
    full = commutant(mats, tol)
    k = full.shape[-1]
    syms = np.array([sym(s) for s in full]).reshape(full.shape[0], -1)
    q = range_basis(syms.T, tol, 1.0)
    return q.T.reshape(-1, k, k)


def _eigen_clusters(w: np.ndarray, rel: float = 1e-8) -> list:
    spread = max(np.abs(w).max(), 1e-300)
    groups, start = [], 0
    for i in range(1, len(w) + 1):
        if i == len(w) or w[i] - w[i - 1] > rel * spread:
            groups.append((start, i))
            start = i
    return groups


@dataclass
class Decomposition:
    blocks: list
    block_dims: list
    projected: list
    commutant_dims: list
    scalar_field: list

    def to_dict(self) -> dict:
        return {
            "block_dims": list(self.block_dims),
            "commutant_dims": list(self.commutant_dims),
            "scalar_field": list(self.scalar_field),
            "projected_dims": [None if p is None else p.dim for p in self.projected],
        }


_FIELD = {1: "R", 2: "C", 4: "H"}


def _split(mats: np.ndarray, frame: np.ndarray, rng, tol: Tolerances) -> list:
    """Recursively split ``frame`` into irreducible frames for the compressed ``mats``."""
    local = frame.T @ mats @ frame
    sc = symmetric_commutant(local, tol)
    if sc.shape[0] <= 1:
        return [frame]
    for _ in range(SPLIT_DRAWS):
        s = np.tensordot(rng.standard_normal(sc.shape[0]), sc, axes=1)
        w, q = np.linalg.eigh(sym(s))
        groups = _eigen_clusters(w)
        if len(groups) > 1:
            out = []
            for a, b in groups:
                out.extend(_split(mats, frame @ q[:, a:b], rng, tol))
            return out
    raise RuntimeError("symmetric commutant is not scalar but no draw split the block")


def invariant_decomposition(v: SoSubspace, seed: int = 0, tol: Tolerances = DEFAULT_TOL) -> Decomposition:
    """Orthogonal splitting of R^n into V-irreducible subspaces.

    A random symmetric element of the commutant of V has V-invariant
    eigenspaces; blocks are split until their symmetric commutant is scalar.
    Three independent seeds are tried and the finest result is kept.
    """
    best = None
    for attempt in range(SPLIT_DRAWS):
        frames = _split(v.basis, np.eye(v.n), rng_for(seed, attempt), tol)
        if best is None or len(frames) > len(best):
            best = frames
    # deterministic order: larger blocks first, then by leading coordinate pattern
    best.sort(key=lambda f: (-f.shape[1], tuple(np.round(np.abs(f).sum(axis=1), 8))))
    projected, cdims, fields = [], [], []
    for f in best:
        local = f.T @ v.basis @ f
        cd = commutant(local, tol).shape[0]
        cdims.append(cd)
        fields.append(_FIELD.get(cd, "?"))
        if f.shape[1] < 2 or np.abs(local).max() <= tol.resid_rel * np.abs(v.basis).max():
            projected.append(None)
        else:
            projected.append(project_subspace(v, f, tol, check=1e-9))
    return Decomposition(best, [f.shape[1] for f in best], projected, cdims, fields)


# --- type ladder ------------------------------------------------------------

class TypeName(str, Enum):
    CLIFFORD = "CLIFFORD"
    REP = "REP"
    CENTRALIZER = "CENTRALIZER"
    COMMON = "COMMON"
    SINGULAR = "SINGULAR"
    NOT_GO = "NOT_GO"


@dataclass
class TypeLabel:
    label: TypeName
    evidence: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"label": self.label.value, "evidence": self.evidence}


def hodge_star4(a: np.ndarray) -> np.ndarray:
    """Hodge star on so(4), which splits it into the two su(2) ideals."""
    s = np.zeros((4, 4))
    s[0, 1], s[0, 2], s[0, 3] = a[2, 3], -a[1, 3], a[1, 2]
    s[2, 3], s[1, 3], s[1, 2] = a[0, 1], -a[0, 2], a[0, 3]
    return s - s.T


def in_single_ideal(mats: np.ndarray, tol: float = 1e-8) -> bool:
    """Whether every matrix of a stack in so(4) is self-dual, or every one is anti-self-dual."""
    scale = max(np.abs(mats).max(), 1e-300)
    stars = np.array([hodge_star4(m) for m in mats])
    sd = np.abs(mats - stars).max() <= tol * scale
    asd = np.abs(mats + stars).max() <= tol * scale
    return bool(sd or asd)


def nice_decision(decomp: Decomposition, tol: Tolerances = DEFAULT_TOL) -> bool:
    """Whether V lies in a nice subalgebra adapted to the decomposition.

    Every irreducible block must have dimension at most 4, and on a 4-block
    the projection of V must lie in one su(2) ideal of so(4).
    """
    for dim, proj in zip(decomp.block_dims, decomp.projected):
        if dim > 4 or dim == 3 and proj is not None:
            return False
        if dim == 4 and proj is not None and not in_single_ideal(proj.basis, 1e3 * tol.resid_rel):
            return False
    return True


def rep_defect(v: SoSubspace, tol: Tolerances = DEFAULT_TOL) -> float:
    """Relative distance of ``[V, V]`` from V; zero for a subalgebra."""
    if v.dim == 1:
        return 0.0
    a, b = np.triu_indices(v.dim, 1)
    brs = np.array([lie(v.basis[i], v.basis[j]) for i, j in zip(a, b)])
    norms = np.array([np.linalg.norm(v.basis[i]) * np.linalg.norm(v.basis[j]) for i, j in zip(a, b)])
    nonzero = np.linalg.norm(brs.reshape(len(brs), -1), axis=1) > tol.resid_rel * norms
    if not np.any(nonzero):
        return 0.0
    return contained_in(brs[nonzero], v.basis, tol)


def classify_type(v: SoSubspace, seed: int = 0, tol: Tolerances = DEFAULT_TOL, n_samples: int = 200,
                  normalizers_: Optional[NormalizerSet] = None) -> TypeLabel:
    """Run the decision ladder SINGULAR, CLIFFORD, REP, CENTRALIZER, NOT_GO, COMMON.

    Every rung is evaluated so the evidence lists all that hold; the label is
    the earliest one satisfied.
    """
    ev: dict = {"warnings": []}
    report = nonsingular_report(v, n_samples=n_samples, seed=seed, tol=tol)
    wj = v.element(report.witness_j)
    s = np.linalg.svd(wj, compute_uv=False)
    floor_rel = float(s[-1] / s[0])
    ev["nonsingular"] = report.to_dict()
    ev["singular_floor_relative"] = floor_rel
    singular = floor_rel <= SINGULAR_FLOOR

    clifford = report.certified_clifford
    rd = rep_defect(v, tol)
    ev["rep_defect"] = rd
    rep = rd <= tol.resid_rel

    ns = normalizers(v, tol, with_m=False) if normalizers_ is None else normalizers_
    ev["dims"] = {k: val for k, val in ns.dims.items() if k != "m"}
    cv = go_verdict(v, Mode.CENTRALIZER, n_samples, seed, tol, ns)
    ev["centralizer_verdict"] = cv.to_dict()
    decomp = invariant_decomposition(v, seed, tol)
    ev["decomposition"] = decomp.to_dict()
    nice = nice_decision(decomp, tol)
    ev["nice_subalgebra"] = nice
    centralizer = cv.verdict is Verdict.PASS
    if cv.verdict is not Verdict.INCONCLUSIVE and centralizer != nice and not singular:
        ev["warnings"].append("centralizer verdict and nice-subalgebra decision disagree")

    gv = go_verdict(v, Mode.NG, n_samples, seed, tol, ns)
    ev["go_verdict"] = gv.to_dict()
    not_go = gv.verdict is Verdict.FAIL
    for name, verdict in (("centralizer", cv), ("go", gv)):
        if verdict.verdict is Verdict.INCONCLUSIVE:
            ev["warnings"].append(f"{name} verdict is INCONCLUSIVE")

    rungs = [
        (TypeName.SINGULAR, singular),
        (TypeName.CLIFFORD, clifford),
        (TypeName.REP, rep),
        (TypeName.CENTRALIZER, centralizer),
        (TypeName.NOT_GO, not_go),
        (TypeName.COMMON, not not_go),
    ]
    ev["satisfied"] = [name.value for name, ok in rungs if ok]
    label = next((name for name, ok in rungs if ok), TypeName.COMMON)
    if label is TypeName.COMMON and gv.verdict is Verdict.INCONCLUSIVE:
        ev["warnings"].append("COMMON assigned on an INCONCLUSIVE verdict")
    return TypeLabel(label, ev)


# --- theta invariant --------------------------------------------------------

def theta_invariant(v: SoSubspace, starts: int = 20, steps: int = 2000, seed: int = 0) -> float:
    """Maximum of the largest eigenvalue of J^2 over J in V with trace(J^2) = -1.

    ``lambda_max(J^2) = -sigma_min(J)^2``, so this is minus the squared smallest
    singular value minimised over the ``-trace`` unit sphere, computed by
    alternating exact minimisation from ``starts`` seeded points.
    """
    metric = pairing_gram(v.basis)
    best = np.inf
    for idx in range(starts):
        u0 = rng_for(seed, idx).standard_normal(v.dim)
        val, _ = min_singular_descent(v, u0, steps, metric=metric)
        best = min(best, val)
    return float(-best ** 2)
