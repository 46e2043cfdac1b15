"""GO-pair feasibility, admissibility, non-singularity and kernel-bound checks.

The GO condition at a pair (J, X) asks for ``N`` in the witness algebra with
``[N, J] = 0`` and ``N X = J X``.  Both equations are linear in the
coefficients of N, so each pair is a least-squares feasibility problem.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np

from .linalg import DEFAULT_TOL, Tolerances, least_squares_min_norm, rng_for, to_coords
from .model import SoSubspace
from .structure import NormalizerSet, normalizers

FAIL_FACTOR = 1e3
DEGENERATE_JX = 1e-14
MAX_REDRAWS = 100


class Verdict(str, Enum):
    PASS = "PASS"
    FAIL = "FAIL"
    INCONCLUSIVE = "INCONCLUSIVE"


class Mode(str, Enum):
    NG = "NG"
    CENTRALIZER = "CENTRALIZER"


@dataclass
class Record:
    j_coords: np.ndarray
    x: np.ndarray
    residual: float
    scale: float
    witness: Optional[np.ndarray] = None
    degenerate: bool = False

    def to_dict(self) -> dict:
        return {
            "j_coords": [float(t) for t in self.j_coords],
            "x": [float(t) for t in self.x],
            "residual": float(self.residual),
            "scale": float(self.scale),
            "witness": None if self.witness is None else [float(t) for t in self.witness],
            "degenerate": self.degenerate,
        }


@dataclass
class GoVerdict:
    mode: Mode
    samples: int
    records: list = field(default_factory=list)
    max_residual: float = 0.0
    max_relative: float = 0.0
    verdict: Verdict = Verdict.PASS

    @property
    def passed(self) -> bool:
        return self.verdict is Verdict.PASS

    def worst(self) -> Optional[Record]:
        if not self.records:
            return None
        return max(self.records, key=lambda r: r.residual / r.scale)

    def to_dict(self, full: bool = False) -> dict:
        out = {
            "mode": self.mode.value,
            "samples": self.samples,
            "checked": len(self.records),
            "max_residual": float(self.max_residual),
            "max_relative_residual": float(self.max_relative),
            "verdict": self.verdict.value,
        }
        worst = self.worst()
        out["worst"] = None if worst is None else worst.to_dict()
        if full:
            out["records"] = [r.to_dict() for r in self.records]
        return out


def residual_scale(jm: np.ndarray, x: np.ndarray) -> float:
    return max(1.0, float(np.linalg.norm(jm) * np.linalg.norm(x)))


def witness_basis(normalizers_: NormalizerSet, mode: Mode) -> np.ndarray:
    return normalizers_.ng_basis if Mode(mode) is Mode.NG else normalizers_.c_basis


def feasibility_system(basis: np.ndarray, jm: np.ndarray, x: np.ndarray):
    """Columns: ``([N_a, J] coords ; N_a x)``; right-hand side ``(0 ; J x)``."""
    comm = to_coords(basis @ jm - jm @ basis)  # (r, so_dim)
    act = basis @ x  # (r, n)
    m = np.hstack([comm, act]).T
    b = np.concatenate([np.zeros(comm.shape[1]), jm @ x])
    return m, b


def go_feasible_at(v: SoSubspace, normalizers_, j_coords, x, mode: Mode = Mode.NG,
                   tol: Tolerances = DEFAULT_TOL):
    """Solve the GO equations at one ``(J, X)``.

    Returns ``(residual, witness)``; ``witness`` holds coefficients in the
    witness basis (Ng or C) when the residual passes and the re-substituted
    witness checks out, otherwise ``None``.
    """
    basis = normalizers_ if isinstance(normalizers_, np.ndarray) else witness_basis(normalizers_, mode)
    jm = v.element(j_coords)
    x = np.asarray(x, dtype=float)
    scale = residual_scale(jm, x)
    if basis.shape[0] == 0:
        return float(np.linalg.norm(jm @ x)), None
    m, b = feasibility_system(basis, jm, x)
    coeffs, res = least_squares_min_norm(m, b, tol)
    if res > tol.resid_rel * scale:
        return res, None
    if not check_witness(basis, coeffs, jm, x, tol):
        return res, None
    return res, coeffs


def check_witness(basis, coeffs, jm, x, tol: Tolerances = DEFAULT_TOL) -> bool:
    """Independent re-substitution of a witness into both GO equations."""
    nmat = np.tensordot(coeffs, basis, axes=1)
    nn = np.linalg.norm(nmat)
    comm = np.linalg.norm(nmat @ jm - jm @ nmat)
    act = np.linalg.norm(nmat @ x - jm @ x)
    return comm <= tol.resid_rel * max(nn * np.linalg.norm(jm), 1.0) and act <= tol.resid_rel * residual_scale(jm, x)


def sample_unit_gram(v: SoSubspace, rng: np.random.Generator) -> np.ndarray:
    u = rng.standard_normal(v.dim)
    return u / np.sqrt(u @ v.gram @ u)


def sample_unit(n: int, rng: np.random.Generator) -> np.ndarray:
    x = rng.standard_normal(n)
    return x / np.linalg.norm(x)


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("NILGO_THREADS", "1")))
    except ValueError:
        return 1


def _pmap(fn, items):
    threads = _threads()
    if threads == 1 or len(items) < 2:
        return [fn(t) for t in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def _aggregate(verdict: GoVerdict, tol: Tolerances) -> GoVerdict:
    worst_rel = 0.0
    failed = False
    inconclusive = False
    for r in verdict.records:
        if r.degenerate:
            inconclusive = True
            continue
        rel = r.residual / r.scale
        worst_rel = max(worst_rel, rel)
        verdict.max_residual = max(verdict.max_residual, r.residual)
        if rel > FAIL_FACTOR * tol.resid_rel:
            failed = True
        elif rel > tol.resid_rel:
            inconclusive = True
    verdict.max_relative = worst_rel
    if failed:
        verdict.verdict = Verdict.FAIL
    elif inconclusive:
        verdict.verdict = Verdict.INCONCLUSIVE
    else:
        verdict.verdict = Verdict.PASS
    return verdict


def go_verdict(v: SoSubspace, mode: Mode = Mode.NG, n_samples: int = 500, seed: int = 0,
               tol: Tolerances = DEFAULT_TOL, normalizers_: Optional[NormalizerSet] = None,
               stop_on_fail: bool = False, sweep: bool = True) -> GoVerdict:
    """Sample the GO condition (or its centralizer-type variant) on V.

    Checks every pair (basis J_k, basis e_i), then ``n_samples`` random pairs
    with J on the gram-unit sphere of V and X on the unit sphere of a.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    mode = Mode(mode)
    ns = normalizers(v, tol, with_m=False) if normalizers_ is None else normalizers_
    basis = witness_basis(ns, mode)
    out = GoVerdict(mode, n_samples)

    def run(jc, x):
        res, wit = go_feasible_at(v, basis, jc, x, mode, tol)
        return Record(np.asarray(jc, float), x, res, residual_scale(v.element(jc), x), wit)

    if sweep:
        eye_v, eye_a = np.eye(v.dim), np.eye(v.n)
        for k in range(v.dim):
            for i in range(v.n):
                rec = run(eye_v[k], eye_a[i])
                out.records.append(rec)
                if stop_on_fail and rec.residual > FAIL_FACTOR * tol.resid_rel * rec.scale:
                    return _aggregate(out, tol)

    def draw(idx):
        rng = rng_for(seed, idx)
        for _ in range(MAX_REDRAWS):
            jc = sample_unit_gram(v, rng)
            x = sample_unit(v.n, rng)
            if np.linalg.norm(v.element(jc) @ x) > DEGENERATE_JX:
                return run(jc, x)
        return Record(jc, x, 0.0, 1.0, None, degenerate=True)

    if stop_on_fail:
        for idx in range(n_samples):
            rec = draw(idx)
            out.records.append(rec)
            if rec.residual > FAIL_FACTOR * tol.resid_rel * rec.scale:
                break
    else:
        out.records.extend(_pmap(draw, list(range(n_samples))))
    return _aggregate(out, tol)


def admissible_inner_product(v: SoSubspace, gram_candidate, n_samples: int = 500, seed: int = 0,
                             tol: Tolerances = DEFAULT_TOL) -> GoVerdict:
    """GO verdict for V with its inner product replaced by ``gram_candidate``."""
    w = v.with_gram(gram_candidate)
    return go_verdict(w, Mode.NG, n_samples, seed, tol)


# --- non-singularity -----------------------------------------------------------

@dataclass
class NonsingularReport:
    min_over_sphere: float
    witness_j: np.ndarray
    certified_clifford: bool
    clifford_defect: float

    def to_dict(self) -> dict:
        return {
            "min_over_sphere": float(self.min_over_sphere),
            "witness_j": [float(t) for t in self.witness_j],
            "certified_clifford": self.certified_clifford,
            "clifford_defect": float(self.clifford_defect),
        }


def clifford_defect(v: SoSubspace) -> float:
    """Polarisation certificate defect for the Clifford property.

    Uses a basis orthonormal for ``-trace``; V is of Clifford type exactly
    when ``J_a J_b + J_b J_a = -2 delta_ab s I`` there, with ``s > 0`` shared.
    Returns the largest violation relative to ``||J_a|| ||J_b||`` (Frobenius),
    or ``inf`` when some ``s_a`` is not positive.
    """
    from .linalg import orthonormalize

    ob = orthonormalize(v.basis)
    n = v.n
    eye = np.eye(n)
    s = np.array([-np.trace(b @ b) / n for b in ob])
    if np.any(s <= 0):
        return np.inf
    worst = 0.0
    for a in range(ob.shape[0]):
        for b in range(a, ob.shape[0]):
            ac = ob[a] @ ob[b] + ob[b] @ ob[a]
            if a == b:
                ac = ac + 2.0 * s[a] * eye
            norm = np.linalg.norm(ob[a]) * np.linalg.norm(ob[b])
            worst = max(worst, np.linalg.norm(ac) / norm)
    return worst


def min_singular_descent(v: SoSubspace, u0, steps: int, metric=None):
    """Block-coordinate descent of ``||J(u) x||`` over unit u and unit x.

    Alternates the two exact block minimisations: x as the smallest right
    singular vector of J(u), then u as the smallest generalised eigenvector of
    ``M(x)^T M(x)`` against the metric, where ``M(x) = [J_1 x ... J_m x]``.
    The value is monotone non-increasing.  Returns ``(value, u)``.
    """
    g = v.gram if metric is None else metric
    chol = np.linalg.cholesky(g)
    cinv = np.linalg.inv(chol)
    u = np.asarray(u0, dtype=float)
    u = u / np.sqrt(u @ g @ u)
    best = np.linalg.svd(v.element(u), compute_uv=False)[-1]
    for _ in range(steps):
        _, _, vt = np.linalg.svd(v.element(u))
        x = vt[-1]
        mx = np.einsum("kij,j->ik", v.basis, x)  # columns J_k x
        # min ||M u|| subject to u^T G u = 1, with u = C^{-T} w
        a = cinv @ (mx.T @ mx) @ cinv.T
        w, q = np.linalg.eigh(0.5 * (a + a.T))
        u_new = cinv.T @ q[:, 0]
        val = np.linalg.svd(v.element(u_new), compute_uv=False)[-1]
        if val < best * (1 - 1e-14):
            best, u = val, u_new
        else:
            break
    return float(best), u


def nonsingular_report(v: SoSubspace, n_samples: int = 200, refine_steps: int = 200, seed: int = 0,
                       tol: Tolerances = DEFAULT_TOL, starts: int = 4) -> NonsingularReport:
    """Smallest singular value of gram-unit J found by sampling plus descent."""
    vals = []
    us = []
    for idx in range(n_samples):
        u = sample_unit_gram(v, rng_for(seed, idx))
        us.append(u)
        vals.append(np.linalg.svd(v.element(u), compute_uv=False)[-1])
    order = np.argsort(vals)[:max(1, starts)]
    best_val, best_u = np.inf, us[order[0]]
    for i in order:
        val, u = min_singular_descent(v, us[i], refine_steps)
        if val < best_val:
            best_val, best_u = val, u
    defect = clifford_defect(v)
    return NonsingularReport(best_val, best_u, bool(defect <= tol.resid_rel), float(defect))


def kernel_bound_check(v: SoSubspace, normalizers_, n_samples: int = 100, seed: int = 0,
                       tol: Tolerances = DEFAULT_TOL):
    """Check ``dim ker N <= n / 2`` on random nonzero N in Ng(V).

    ``normalizers_`` is a :class:`NormalizerSet` or an explicit stack of
    matrices.  Returns ``(passed, worst_kernel_dim, worst_coeffs)``.
    """
    basis = normalizers_.ng_basis if isinstance(normalizers_, NormalizerSet) else np.asarray(normalizers_, dtype=float)
    if basis.shape[0] == 0:
        return True, 0, np.zeros(0)
    worst_dim, worst_c = -1, None
    draws = [np.eye(basis.shape[0])[k] for k in range(basis.shape[0])]
    draws += [rng_for(seed, idx).standard_normal(basis.shape[0]) for idx in range(n_samples)]
    for c in draws:
        nmat = np.tensordot(c, basis, axes=1)
        s = np.linalg.svd(nmat, compute_uv=False)
        kdim = int(np.sum(s <= tol.rank_rel * s[0]))
        if kdim > worst_dim:
            worst_dim, worst_c = kdim, c
    return worst_dim <= v.n / 2, worst_dim, worst_c
