import numpy as np
import pytest

from nilgo.classify import (
    TypeName, check_rh_consistency, classify_type, commutant, hodge_star4, in_single_ideal,
    invariant_decomposition, nice_decision, radon_hurwitz, rep_defect, symmetric_commutant,
    theta_invariant,
)
from nilgo.families import (
    build_quat_family, build_rep3_family, build_theta, build_vdw, clifford_system, glue_diagonal, left_mult_matrix,
    nice_subalgebra, right_mult_matrix, so3_irrep, I, J, K,
)
from nilgo.linalg import elementary_skew, random_orthogonal, rng_for, skew
from nilgo.model import SoSubspace
from nilgo.structure import centralizer, invariance_defect


@pytest.mark.parametrize("n, expected", [(1, 0), (2, 1), (4, 3), (6, 1), (8, 7), (16, 8), (32, 9),
                                         (64, 11), (128, 15), (256, 16), (24, 7), (12, 3)])
def test_radon_hurwitz(n, expected):
    assert radon_hurwitz(n) == expected


def test_radon_hurwitz_rejects_nonpositive():
    with pytest.raises(ValueError):
        radon_hurwitz(0)


def test_rh_consistency():
    assert check_rh_consistency(SoSubspace.standard(clifford_system(8, 7)))
    rng = rng_for(1)
    eight = SoSubspace.standard(np.array([skew(rng.standard_normal((8, 8))) for _ in range(8)]))
    assert not check_rh_consistency(eight)
    assert check_rh_consistency(build_rep3_family(lambdas=(1.0, 1.0), spins=()))


def test_hodge_star_splits_so4():
    assert in_single_ideal(np.array([left_mult_matrix(u) for u in (I, J, K)]))
    assert in_single_ideal(np.array([right_mult_matrix(u) for u in (I, J, K)]))
    mixed = np.array([left_mult_matrix(I), right_mult_matrix(J)])
    assert not in_single_ideal(mixed)
    a = elementary_skew(4, 0, 1).astype(float)
    assert np.allclose(hodge_star4(hodge_star4(a)), a)


def test_commutant_dims_by_scalar_field():
    assert commutant(np.array([left_mult_matrix(u) for u in (I, J, K)])).shape[0] == 4
    assert commutant(clifford_system(8, 7)).shape[0] == 1
    assert commutant(np.array([elementary_skew(2, 0, 1).astype(float)])).shape[0] == 2
    assert symmetric_commutant(np.array([left_mult_matrix(I)])).shape[0] == 4


def test_decomposition_quaternion_pair():
    dec = invariant_decomposition(build_quat_family([("i", "j"), ("i", "k")]))
    assert dec.block_dims == [4, 4]


def test_decomposition_vdw_irreducible():
    v, _ = build_theta(6, np.pi / 4)
    assert invariant_decomposition(v).block_dims == [8]


def test_decomposition_rotation_plane():
    v = SoSubspace.standard(elementary_skew(4, 0, 1).astype(float))
    dec = invariant_decomposition(v)
    assert dec.block_dims == [2, 1, 1]
    assert dec.projected[1] is None and dec.projected[2] is None


def test_decomposition_of_conjugated_sum_is_invariant_and_fine():
    q = random_orthogonal(16, rng_for(3))
    v = build_rep3_family(lambdas=(1.0, 2.0), spins=(2,)).conjugate(q)
    dec = invariant_decomposition(v, seed=5)
    assert sorted(dec.block_dims) == [4, 4, 8]
    frames = np.hstack(dec.blocks)
    assert np.allclose(frames.T @ frames, np.eye(16), atol=1e-9)
    for f in dec.blocks:
        assert invariance_defect(v, f) <= 1e-9
        assert symmetric_commutant(f.T @ v.basis @ f).shape[0] == 1


@pytest.mark.parametrize("build", [
    lambda: build_quat_family([("i", "j"), ("i", "i+j"), ("k", "j")]),
    lambda: build_rep3_family(lambdas=(1.0, 3.0), spins=(2, 3)),
    lambda: build_theta(7, np.pi / 6)[0],
    lambda: SoSubspace.standard(clifford_system(16, 8)),
    lambda: build_vdw("i", ["i"]),
])
def test_block_centralizers_are_division_algebras(build):
    v = build()
    for p in invariant_decomposition(v).projected:
        if p is None:
            continue
        c = centralizer(p)
        assert c.shape[0] in (0, 1, 3)
        if c.shape[0]:
            x = np.tensordot(rng_for(0).standard_normal(c.shape[0]), c, axes=1)
            sq = x @ x
            assert np.allclose(sq, sq[0, 0] * np.eye(p.n), atol=1e-9) and sq[0, 0] < 0


def test_rep_defect():
    assert rep_defect(SoSubspace.standard(so3_irrep(2))) < 1e-12
    v, _ = build_theta(6, np.pi / 4)
    assert rep_defect(v) > 0.1


@pytest.mark.parametrize("theta", [np.pi / 6, np.pi / 4, np.pi / 3])
@pytest.mark.parametrize("dimv", [6, 7])
def test_theta_invariant_closed_form(theta, dimv):
    v, _ = build_theta(dimv, theta)
    assert theta_invariant(v) == pytest.approx((np.sin(theta) - 1) / 8, abs=1e-6)


def test_theta_invariant_conjugation_and_clifford():
    v, _ = build_theta(6, 0.9)
    w = v.conjugate(random_orthogonal(8, rng_for(7)))
    assert theta_invariant(w) == pytest.approx(theta_invariant(v), abs=1e-9)
    assert theta_invariant(build_vdw("i", ["j", "k"])) == pytest.approx(-0.125, abs=1e-12)


LADDER = [
    ("vdw generic", lambda: build_theta(6, np.pi / 4)[0], TypeName.COMMON),
    ("vdw d perp W", lambda: build_vdw("i", ["j", "k"]), TypeName.CLIFFORD),
    ("vdw d in W", lambda: build_vdw("i", ["i"]), TypeName.SINGULAR),
    ("so3 irrep", lambda: SoSubspace.standard(so3_irrep(2)), TypeName.REP),
    ("quat2", lambda: build_quat_family([("i", "j"), ("i", "i+j")]), TypeName.CENTRALIZER),
    ("quat3", lambda: build_quat_family([("i", "j", "k"), ("i", "j", "i+k")]), TypeName.CENTRALIZER),
    ("glued", lambda: glue_diagonal(clifford_system(8, 5), [2, 1, 1, 1, 1]), TypeName.NOT_GO),
]


@pytest.mark.parametrize("name, build, label", LADDER, ids=[x[0] for x in LADDER])
def test_type_ladder(name, build, label):
    out = classify_type(build())
    assert out.label is label
    assert not out.evidence["warnings"]


def test_tie_resolves_to_earliest_rung():
    out = classify_type(build_quat_family([("i", "j"), ("i", "k")]))
    assert out.label is TypeName.CLIFFORD
    assert out.evidence["satisfied"][:2] == ["CLIFFORD", "CENTRALIZER"]
    triple = classify_type(SoSubspace.standard(np.array([left_mult_matrix(u) for u in (I, J, K)])))
    assert triple.label is TypeName.CLIFFORD and "REP" in triple.evidence["satisfied"]


def test_nice_decision_matches_centralizer_type():
    for v, expected in [
        (SoSubspace.standard(nice_subalgebra(2, 1, 1)), True),
        (build_quat_family([("i", "j"), ("j", "k")]), True),
        (build_theta(6, np.pi / 4)[0], False),
        (SoSubspace.standard(so3_irrep(2)), False),
    ]:
        assert nice_decision(invariant_decomposition(v)) is expected


def test_common_only_on_irreducible_r8():
    shipped = [
        build_theta(6, 0.4)[0], build_theta(7, 1.2)[0], build_vdw("i", ["j", "k"]),
        build_quat_family([("i", "j"), ("k", "i+j")]), SoSubspace.standard(so3_irrep(3)),
        SoSubspace.standard(clifford_system(8, 5)), build_rep3_family(spins=(2, 2)),
    ]
    for v in shipped:
        out = classify_type(v, n_samples=100)
        if out.label is TypeName.COMMON and len(invariant_decomposition(v).block_dims) == 1:
            assert v.n == 8


def test_reducible_rep_family_with_weight_is_common():
    # an H-block with weight 2 next to a spin-3/2 block: GO, but neither Rep, Clifford nor centralizer type
    out = classify_type(build_rep3_family(lambdas=(2.0,), spins=(2,)), n_samples=100)
    assert out.label is TypeName.COMMON
