"""Constructors for every subspace family of the classification.

Conventions: H has basis ``(1, i, j, k)``; vectors are columns, so
``left_mult_matrix(q) @ p`` is the coordinate vector of ``q p``.  H^p is
``R^{4p}`` with the blocks in order.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.linalg import block_diag

from .linalg import frobenius_pairing
from .model import SoSubspace


class FamilyError(ValueError):
    pass


class DependentTuple(FamilyError):
    def __init__(self, index: int):
        super().__init__(f"DependentTuple({index}): quaternion tuple {index} is not linearly independent")
        self.index = index


# --- quaternions -------------------------------------------------------------

@dataclass(frozen=True)
class Quaternion:
    w: float = 0.0
    x: float = 0.0
    y: float = 0.0
    z: float = 0.0

    @classmethod
    def from_array(cls, a) -> "Quaternion":
        w, x, y, z = (float(t) for t in np.asarray(a, dtype=float).ravel())
        return cls(w, x, y, z)

    @classmethod
    def imag(cls, v) -> "Quaternion":
        x, y, z = (float(t) for t in v)
        return cls(0.0, x, y, z)

    def array(self) -> np.ndarray:
        return np.array([self.w, self.x, self.y, self.z])

    @property
    def vector(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z])

    def __mul__(self, other):
        if not isinstance(other, Quaternion):
            return Quaternion(*(self.array() * float(other)))
        return Quaternion.from_array(qmul(self.array(), other.array()))

    __rmul__ = __mul__

    def __add__(self, other):
        return Quaternion.from_array(self.array() + other.array())

    def __sub__(self, other):
        return Quaternion.from_array(self.array() - other.array())

    def __neg__(self):
        return Quaternion.from_array(-self.array())

    def conj(self) -> "Quaternion":
        return Quaternion(self.w, -self.x, -self.y, -self.z)

    def norm(self) -> float:
        return float(np.linalg.norm(self.array()))

    def inverse(self) -> "Quaternion":
        n2 = self.norm() ** 2
        if n2 == 0.0:
            raise ZeroDivisionError("zero quaternion")
        return Quaternion.from_array(self.conj().array() / n2)

    def is_imaginary(self, atol: float = 1e-12) -> bool:
        return abs(self.w) <= atol


ONE = Quaternion(1.0)
I = Quaternion(0.0, 1.0)
J = Quaternion(0.0, 0.0, 1.0)
K = Quaternion(0.0, 0.0, 0.0, 1.0)


def qmul(p, q) -> np.ndarray:
    """Hamilton product of quaternions given as ``(w, x, y, z)`` arrays."""
    a1, b1, c1, d1 = p
    a2, b2, c2, d2 = q
    return np.array([
        a1 * a2 - b1 * b2 - c1 * c2 - d1 * d2,
        a1 * b2 + b1 * a2 + c1 * d2 - d1 * c2,
        a1 * c2 - b1 * d2 + c1 * a2 + d1 * b2,
        a1 * d2 + b1 * c2 - c1 * b2 + d1 * a2,
    ])


_TERM = re.compile(r"([+-]?)(\d*\.?\d*(?:[eE][+-]?\d+)?)([ijk]?)")


def parse_quaternion(token: str) -> Quaternion:
    """Parse shorthand like ``i``, ``-j``, ``0.5i+0.5j`` or ``1+2k``."""
    text = token.replace(" ", "")
    if not text:
        raise ValueError(f"empty quaternion token {token!r}")
    parts = {"": 0.0, "i": 0.0, "j": 0.0, "k": 0.0}
    pos = 0
    while pos < len(text):
        m = _TERM.match(text, pos)
        if m is None or m.end() == pos:
            raise ValueError(f"cannot parse quaternion token {token!r}")
        sign, num, unit = m.groups()
        if pos > 0 and not sign or not num and not unit:
            raise ValueError(f"cannot parse quaternion token {token!r}")
        if num in (".",):
            raise ValueError(f"cannot parse quaternion token {token!r}")
        coef = float(num) if num else 1.0
        parts[unit] += -coef if sign == "-" else coef
        pos = m.end()
    return Quaternion(parts[""], parts["i"], parts["j"], parts["k"])


def _as_quat(q) -> Quaternion:
    if isinstance(q, Quaternion):
        return q
    if isinstance(q, str):
        return parse_quaternion(q)
    a = np.asarray(q, dtype=float).ravel()
    if a.size == 3:
        return Quaternion.imag(a)
    return Quaternion.from_array(a)


def left_mult_matrix(q) -> np.ndarray:
    """Matrix of ``p -> q p``."""
    a, b, c, d = _as_quat(q).array()
    return np.array([
        [a, -b, -c, -d],
        [b, a, -d, c],
        [c, d, a, -b],
        [d, -c, b, a],
    ])


def right_mult_matrix(q) -> np.ndarray:
    """Matrix of ``p -> p q``."""
    a, b, c, d = _as_quat(q).array()
    return np.array([
        [a, -b, -c, -d],
        [b, a, d, -c],
        [c, -d, a, b],
        [d, c, -b, a],
    ])


# --- quaternionic block families ---------------------------------------------

def build_quat_family(tuples: Sequence[Sequence], gram=None) -> SoSubspace:
    """Block-diagonal ``J_t = (L_{a_1}, ..., L_{a_p})`` on H^p.

    ``tuples[s]`` is ``(a_s, b_s)`` or ``(a_s, b_s, c_s)`` of imaginary
    quaternions; every tuple must be linearly independent.
    """
    if not tuples:
        raise FamilyError("need at least one block")
    width = len(tuples[0])
    if width not in (2, 3) or any(len(t) != width for t in tuples):
        raise FamilyError("all tuples must be pairs or all triples")
    quats = [[_as_quat(q) for q in t] for t in tuples]
    for s, t in enumerate(quats, start=1):
        if not all(q.is_imaginary() for q in t):
            raise FamilyError(f"tuple {s} contains a non-imaginary quaternion")
        m = np.array([q.vector for q in t])
        sv = np.linalg.svd(m, compute_uv=False)
        if sv[0] == 0.0 or sv[-1] <= 1e-12 * sv[0]:
            raise DependentTuple(s)
    basis = [block_diag(*[left_mult_matrix(t[r]) for t in quats]) for r in range(width)]
    tag = "quat2" if width == 2 else "quat3"
    meta = {"family": tag, "tuples": ";".join(":".join(_fmt_q(q) for q in t) for t in quats)}
    v = SoSubspace.standard(basis, meta)
    return v if gram is None else v.with_gram(gram)


def _fmt_q(q: Quaternion) -> str:
    out = []
    for coef, unit in zip(q.array(), ("", "i", "j", "k")):
        if coef != 0.0:
            out.append(f"{coef:+.17g}{unit}")
    return "".join(out) or "0"


# --- so(3) representations ---------------------------------------------------

def spin_matrices(j2: int):
    """Hermitian spin matrices ``(S_x, S_y, S_z)`` for spin ``j2 / 2``."""
    j = j2 / 2.0
    mvals = j - np.arange(j2 + 1)
    splus = np.diag(np.sqrt(j * (j + 1) - mvals[1:] * (mvals[1:] + 1)), 1).astype(complex)
    sminus = splus.conj().T
    sx = 0.5 * (splus + sminus)
    sy = -0.5j * (splus - sminus)
    sz = np.diag(mvals).astype(complex)
    return sx, sy, sz


def realify(a: np.ndarray) -> np.ndarray:
    """``A + iB -> [[A, -B], [B, A]]``."""
    return np.block([[a.real, -a.imag], [a.imag, a.real]])


def so3_irrep(m: int) -> np.ndarray:
    """Real 4m-dimensional irreducible so(3)-module of quaternionic type.

    Returns ``rho(E_1), rho(E_2), rho(E_3)`` with ``[rho(E_1), rho(E_2)] =
    rho(E_3)`` cyclically: the realification of the complex spin
    ``(2m - 1)/2`` representation with generators ``E_a = -i S_a``.
    """
    if m < 1:
        raise FamilyError("m must be >= 1")
    return np.array([realify(-1j * s) for s in spin_matrices(2 * m - 1)])


def build_rep3_family(lambdas: Sequence[float] = (), spins: Sequence[int] = (2,),
                      spin_weights: Optional[Sequence[float]] = None, gram=None) -> SoSubspace:
    """``J_a = (l_1 L_a, ..., l_p L_a, rho(a))`` for ``a = i, j, k``.

    ``lambdas`` weight the H-blocks; ``spins`` lists the sizes ``m >= 2`` of the
    irreducible blocks of W (each of dimension 4m).  so(3) is identified with
    Im H, so ``rho(i) = 2 rho(E_1)`` matches ``[i, j] = 2k``.  ``spin_weights``
    exists to build deliberately illegal variants; the legal family has all
    spin weights equal to 1.
    """
    lambdas = [float(x) for x in lambdas]
    if any(x == 0.0 for x in lambdas):
        raise FamilyError("H-block weights must be nonzero")
    spins = [int(x) for x in spins]
    if any(x < 2 for x in spins):
        raise FamilyError("spin blocks need m >= 2 (no 4-dimensional subrepresentations in W)")
    if not lambdas and not spins:
        raise FamilyError("empty family")
    weights = [1.0] * len(spins) if spin_weights is None else [float(x) for x in spin_weights]
    if len(weights) != len(spins):
        raise FamilyError("spin_weights must match spins")
    reps = [2.0 * so3_irrep(m) for m in spins]
    units = (I, J, K)
    basis = []
    for a in range(3):
        blocks = [lam * left_mult_matrix(units[a]) for lam in lambdas]
        blocks += [w * r[a] for w, r in zip(weights, reps)]
        basis.append(block_diag(*blocks))
    meta = {
        "family": "rep3",
        "lambdas": ",".join(repr(x) for x in lambdas),
        "spins": ",".join(str(x) for x in spins),
        "spin_weights": ",".join(repr(x) for x in weights),
    }
    v = SoSubspace.standard(basis, meta)
    return v if gram is None else v.with_gram(gram)


# --- Clifford systems --------------------------------------------------------

def _double(structs: np.ndarray) -> np.ndarray:
    """k anticommuting complex structures on R^n -> k+1 on R^{2n}."""
    n = structs.shape[-1]
    zero = np.zeros((n, n))
    eye = np.eye(n)
    out = [np.block([[zero, s], [s, zero]]) for s in structs]
    out.append(np.block([[zero, eye], [-eye, zero]]))
    return np.array(out)


def _clifford_pow2(n: int) -> np.ndarray:
    if n == 1:
        return np.zeros((0, 1, 1))
    if n == 2:
        return np.array([[[0.0, -1.0], [1.0, 0.0]]])
    if n == 4:
        return np.array([left_mult_matrix(u) for u in (I, J, K)])
    if n == 8:
        return np.array(seven_structures(I))
    return _double(_clifford_pow2(n // 2))


def clifford_capacity(n: int) -> int:
    """Number of anticommuting structures :func:`clifford_system` builds on R^n."""
    two = n & -n
    return _clifford_pow2(two).shape[0]


def clifford_system(n: int, count: int) -> np.ndarray:
    """``count`` pairwise anticommuting complex structures on R^n.

    Built from the octonionic seven on R^8 (or the quaternionic triple on
    R^4) and the doubling step; odd factors of n are handled blockwise.
    """
    from .classify import radon_hurwitz

    if n < 1 or count < 0:
        raise FamilyError("bad Clifford request")
    if count > radon_hurwitz(n):
        raise FamilyError(f"{count} anticommuting structures do not exist on R^{n} "
                          f"(Radon-Hurwitz bound {radon_hurwitz(n)})")
    two = n & -n
    base = _clifford_pow2(two)
    if count > base.shape[0]:
        raise FamilyError(f"construction of {count} structures on R^{n} is not supported")
    reps = n // two
    return np.array([np.kron(np.eye(reps), s) for s in base[:count]])


# --- sp(2)-modules on H^2 = R^8 ----------------------------------------------

def _blocks2(a, b, c, d) -> np.ndarray:
    return np.block([[a, b], [c, d]])


def sp2_element(a, b, q) -> np.ndarray:
    """``[[L_a, L_q], [L_{-conj q}, L_b]]`` with ``a, b`` imaginary."""
    q = _as_quat(q)
    return _blocks2(left_mult_matrix(a), left_mult_matrix(q),
                    left_mult_matrix(-q.conj()), left_mult_matrix(b))


def sp1_element(c) -> np.ndarray:
    """``diag(R_c, R_c)``."""
    r = right_mult_matrix(c)
    return _blocks2(r, np.zeros((4, 4)), np.zeros((4, 4)), r)


def r5_element(d, mu: float, p) -> np.ndarray:
    """``diag(R_d, R_d) @ [[mu I, L_p], [L_conj(p), -mu I]]``."""
    p = _as_quat(p)
    eye = np.eye(4)
    s = _blocks2(mu * eye, left_mult_matrix(p), left_mult_matrix(p.conj()), -mu * eye)
    return sp1_element(d) @ s


def sp2_basis() -> np.ndarray:
    units = [I, J, K]
    zero = Quaternion()
    out = [sp2_element(u, zero, zero) for u in units]
    out += [sp2_element(zero, u, zero) for u in units]
    out += [sp2_element(zero, zero, q) for q in (ONE, I, J, K)]
    return np.array(out)


def r5_basis(d) -> np.ndarray:
    """Five anticommuting structures spanning R^5_d (unit when ``|d| = 1``)."""
    zero = Quaternion()
    out = [r5_element(d, 1.0, zero)]
    out += [r5_element(d, 0.0, q) for q in (ONE, I, J, K)]
    return np.array(out)


def sp2_modules():
    """``(sp2_basis, sp1_of, r5_of)`` realising the three sp(2)-modules."""
    return sp2_basis(), sp1_element, r5_basis


def seven_structures(d=I) -> list:
    """Seven anticommuting complex structures on R^8: R^5_d plus two R_c, c perp d."""
    d = _as_quat(d)
    dv = d.vector / np.linalg.norm(d.vector)
    # orthonormal frame (dv, e1, e2) of Im H with positive orientation
    helper = np.eye(3)[np.argmin(np.abs(dv))]
    e1 = helper - (helper @ dv) * dv
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(dv, e1)
    return list(r5_basis(Quaternion.imag(dv))) + [sp1_element(e2), sp1_element(e1)]


def build_vdw(d, w: Sequence = (), gram=None) -> SoSubspace:
    """``V_{d,W} = R^5_d + sp(1)_W`` for a unit imaginary ``d``."""
    d = _as_quat(d)
    if not d.is_imaginary() or abs(d.norm() - 1.0) > 1e-12:
        raise FamilyError("d must be a unit imaginary quaternion")
    wq = [_as_quat(c) for c in w]
    if not all(c.is_imaginary() for c in wq):
        raise FamilyError("W must lie in Im H")
    basis = list(r5_basis(d))
    if wq:
        wv = np.array([c.vector for c in wq])
        u, s, vt = np.linalg.svd(wv, full_matrices=False)
        r = int(np.sum(s > 1e-12 * s[0])) if s.size and s[0] > 0 else 0
        basis += [sp1_element(vt[t]) for t in range(r)]
    meta = {"family": "vdw", "d": _fmt_q(d), "W": ",".join(_fmt_q(c) for c in wq)}
    v = SoSubspace.standard(basis, meta)
    return v if gram is None else v.with_gram(gram)


def theta_presentation(dimv: int, theta: float) -> list:
    """``J_1..J_5, (J_6,) J'`` with ``J' = J_7 cos(theta) + J_6 J_7 sin(theta)``."""
    if dimv not in (6, 7):
        raise FamilyError("dimv must be 6 or 7")
    if not 0.0 < theta < np.pi / 2:
        raise FamilyError("theta must lie in (0, pi/2)")
    d = Quaternion(0.0, np.cos(theta), np.sin(theta), 0.0)
    j6 = sp1_element(K)
    j7 = sp1_element(Quaternion(0.0, -np.sin(theta), np.cos(theta), 0.0))
    jprime = j7 * np.cos(theta) + (j6 @ j7) * np.sin(theta)
    out = list(r5_basis(d))
    if dimv == 7:
        out.append(j6)
    out.append(jprime)
    return out


def build_theta(dimv: int, theta: float, gram=None):
    """The one-parameter families of dimension 14 (dimv=6) and 15 (dimv=7).

    Returns ``(V, presentation)``; V is in its ``V_{d,W}`` form with
    ``d = cos(theta) i + sin(theta) j`` and ``W = R j`` or ``span(j, k)``.
    """
    pres = theta_presentation(dimv, theta)
    d = Quaternion(0.0, np.cos(theta), np.sin(theta), 0.0)
    w = [J] if dimv == 6 else [J, K]
    v = build_vdw(d, w)
    from .linalg import contained_in

    if contained_in(np.array(pres), v.basis) > 1e-12 or contained_in(v.basis, np.array(pres)) > 1e-12:
        raise AssertionError("theta presentation does not span V_{d,W}")
    meta = {**v.metadata, "family": f"theta{dimv}", "theta": repr(float(theta))}
    v = v.with_gram(v.gram if gram is None else gram, **meta)
    return v, pres


# --- nice subalgebras and gluing ---------------------------------------------

def nice_subalgebra(p: int, q: int, fixed: int = 0) -> np.ndarray:
    """One su(2)-ideal (left multiplications) per 4-block, so(2) per 2-block."""
    if min(p, q, fixed) < 0 or 4 * p + 2 * q + fixed == 0:
        raise FamilyError("bad partition")
    n = 4 * p + 2 * q + fixed
    out = []
    for s in range(p):
        for u in (I, J, K):
            m = np.zeros((n, n))
            m[4 * s:4 * s + 4, 4 * s:4 * s + 4] = left_mult_matrix(u)
            out.append(m)
    for t in range(q):
        m = np.zeros((n, n))
        o = 4 * p + 2 * t
        m[o, o + 1], m[o + 1, o] = -1.0, 1.0
        out.append(m)
    return np.array(out).reshape(-1, n, n)


def glue_diagonal(base, phi) -> SoSubspace:
    """``span{diag(J_u, J_{phi u})}`` from a Clifford basis ``J_1..J_d`` on R^k."""
    structs = base.basis if isinstance(base, SoSubspace) else np.asarray(base, dtype=float)
    d, k = structs.shape[0], structs.shape[-1]
    phi = np.atleast_2d(np.asarray(phi, dtype=float))
    if phi.shape == (1, d) and d > 1:
        phi = np.diag(phi[0])
    if phi.shape != (d, d):
        raise FamilyError(f"phi must be {d}x{d}")
    sv = np.linalg.svd(phi, compute_uv=False)
    if sv[-1] <= 1e-12 * sv[0]:
        raise FamilyError("phi is singular")
    for a in range(d):
        for b in range(a, d):
            acomm = structs[a] @ structs[b] + structs[b] @ structs[a]
            target = -2.0 * np.eye(k) if a == b else np.zeros((k, k))
            if np.abs(acomm - target * (frobenius_pairing(structs[a], structs[a]) / k if a == b else 1)).max() > 1e-9:
                raise FamilyError("base is not spanned by anticommuting complex structures")
    zero = np.zeros((k, k))
    basis = []
    for a in range(d):
        img = np.tensordot(phi[:, a], structs, axes=1)
        basis.append(np.block([[structs[a], zero], [zero, img]]))
    meta = {"family": "glue", "phi": ";".join(",".join(repr(float(x)) for x in row) for row in phi)}
    return SoSubspace.standard(basis, meta)
