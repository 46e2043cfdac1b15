"""End-to-end acceptance checks; each test records one pass/fail line."""
import time

import numpy as np

import conftest
from nilgo.classify import (
    TypeName, classify_type, invariant_decomposition, radon_hurwitz, theta_invariant,
)
from nilgo.cli import search
from nilgo.families import (
    FamilyError, Quaternion, build_quat_family, build_rep3_family, build_theta, build_vdw,
    clifford_system, glue_diagonal, so3_irrep,
)
from nilgo.linalg import DEFAULT_TOL, Tolerances, contained_in, elementary_skew, random_orthogonal, rng_for
from nilgo.model import SoSubspace
from nilgo.structure import centralizer, normalizers
from nilgo.verify import (
    Mode, Verdict, admissible_inner_product, clifford_defect, go_verdict, kernel_bound_check,
    nonsingular_report,
)

THETAS = (np.pi / 6, np.pi / 4, np.pi / 3)


def record(key: int, title: str, ok: bool, detail: str) -> None:
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {key}: {title} ({detail})"
    conftest.ACCEPTANCE_LINES[key] = line
    print(line)


def go_families():
    out = []
    pairs = [("i", "j"), ("i", "i+j"), ("j", "k"), ("i-k", "j+2k")]
    for p in range(1, 5):
        out.append((f"quat2 p={p}", build_quat_family(pairs[:p])))
    triples = [("i", "j", "k"), ("i", "j", "i+k")]
    for p in range(1, 3):
        out.append((f"quat3 p={p}", build_quat_family(triples[:p])))
    out.append(("rep3 p=0 + m=2", build_rep3_family(lambdas=(), spins=(2,))))
    out.append(("rep3 p=1 + m=2", build_rep3_family(lambdas=(1.5,), spins=(2,))))
    for count in (5, 6, 7):
        out.append((f"clifford 8,{count}", SoSubspace.standard(clifford_system(8, count))))
    for dimv in (6, 7):
        for th in THETAS:
            out.append((f"theta dimv={dimv} t={th:.4f}", build_theta(dimv, th)[0]))
    return out


def test_criterion_1_go_families_pass():
    start = time.perf_counter()
    worst, failed = 0.0, []
    families = go_families()
    for name, v in families:
        res = go_verdict(v, Mode.NG, n_samples=500, seed=0)
        worst = max(worst, res.max_residual)
        if res.verdict is not Verdict.PASS or res.max_residual > 1e-8:
            failed.append(name)
    elapsed = time.perf_counter() - start
    ok = not failed and elapsed <= 60.0
    record(1, "GO verification of the known families", ok,
           f"{len(families)} families, max residual {worst:.2e}, {elapsed:.1f}s, failed={failed}")
    assert ok


def test_criterion_2_normalizer_dims_stable():
    cases = [build_vdw(Quaternion(0, np.cos(t), np.sin(t), 0), ["j"]) for t in THETAS]
    cases += [build_vdw(Quaternion(0, np.cos(t), np.sin(t), 0), ["j", "k"]) for t in THETAS]
    cases.append(build_vdw(Quaternion(0, 0.3, 0.5, -0.7) * (1 / np.sqrt(0.83)), ["j-k"]))
    seen, bad = set(), 0
    for v in cases:
        for rank_rel in (1e-11, 1e-10, 1e-9):
            d = normalizers(v, Tolerances(rank_rel=rank_rel), with_m=False).dims
            seen.add((d["c"], d["n"], d["ng"]))
            bad += (d["c"], d["n"], d["ng"]) != (0, 10, 10)
    ok = bad == 0
    record(2, "dim C=0, dim N=dim Ng=10 across tolerance decades", ok,
           f"{len(cases)} subspaces x 3 tolerances, observed {sorted(seen)}")
    assert ok


def test_criterion_3_theta_invariant():
    errs, values = [], {}
    for dimv in (6, 7):
        for th in THETAS:
            val = theta_invariant(build_theta(dimv, th)[0])
            values[dimv, th] = val
            errs.append(abs(val - (np.sin(th) - 1.0) / 8.0))
    gaps = [abs(values[d, a] - values[d, b]) for d in (6, 7) for a in THETAS for b in THETAS if a < b]
    ok = max(errs) <= 1e-6 and min(gaps) > 1e-3
    record(3, "theta invariant equals (sin t - 1)/8 and separates t", ok,
           f"max error {max(errs):.1e}, min separation {min(gaps):.4f}")
    assert ok


LADDER = [
    ("vdw generic", lambda: build_vdw(Quaternion(0, 0.6, 0.8, 0), ["j"]), TypeName.COMMON),
    ("vdw d perp W", lambda: build_vdw("i", ["j", "k"]), TypeName.CLIFFORD),
    ("vdw d in W", lambda: build_vdw("i", ["i"]), TypeName.SINGULAR),
    ("so3 irrep", lambda: SoSubspace.standard(so3_irrep(2)), TypeName.REP),
    ("quat2", lambda: build_quat_family([("i", "j"), ("i", "i+j")]), TypeName.CENTRALIZER),
    ("quat3", lambda: build_quat_family([("i", "j", "k"), ("i", "j", "i+k")]), TypeName.CENTRALIZER),
]


def test_criterion_4_type_ladder():
    got = {name: classify_type(build()).label for name, build, _ in LADDER}
    wrong = [name for name, _, label in LADDER if got[name] is not label]
    ok = not wrong
    record(4, "type ladder labels", ok, ", ".join(f"{k}->{v.value}" for k, v in got.items()))
    assert ok


def test_criterion_5_falsification_suite():
    cases = [
        ("so3 E12,E13", SoSubspace.standard(np.array([elementary_skew(3, 0, 1), elementary_skew(3, 0, 2)]))),
        ("rep3 unequal spin weights", build_rep3_family(spins=(2, 2), spin_weights=(1.0, 2.0))),
        ("glue diag(2,1,1,1,1)", glue_diagonal(clifford_system(8, 5), [2, 1, 1, 1, 1])),
        ("rep3 gram diag(1,1,4)", build_rep3_family(spins=(2,), gram=np.diag([1.0, 1.0, 4.0]))),
    ]
    details, ok = [], True
    for name, v in cases:
        res = go_verdict(v, Mode.NG, n_samples=500, seed=0)
        details.append(f"{name}: {res.verdict.value} {res.max_residual:.2e}")
        ok &= res.verdict is Verdict.FAIL and res.max_residual > 1e-5
    record(5, "falsification suite fails", ok, "; ".join(details))
    assert ok


def scaled_gram(v: SoSubspace, element: np.ndarray, factor: float) -> np.ndarray:
    """Gram in which ``element`` is ``factor`` times longer; its orthogonal complement is untouched."""
    u = np.linalg.lstsq(v.basis.reshape(v.dim, -1).T, element.ravel(), rcond=None)[0]
    gu = v.gram @ u
    return v.gram + (factor ** 2 - 1.0) * np.outer(gu, gu) / (u @ gu)


def test_criterion_6_admissibility_positives():
    details, ok = [], True
    for name, v in [("quat2", build_quat_family([("i", "j"), ("i", "i+j")])),
                    ("quat3", build_quat_family([("i", "j", "k"), ("i", "j", "i+k")]))]:
        a = rng_for(6).standard_normal((v.dim, v.dim))
        res = admissible_inner_product(v, a @ a.T + 0.1 * np.eye(v.dim), 500, 0)
        details.append(f"{name} random gram: {res.verdict.value}")
        ok &= res.verdict is Verdict.PASS
    for dimv in (6, 7):
        v, pres = build_theta(dimv, np.pi / 3)
        res = admissible_inner_product(v, scaled_gram(v, pres[-1], 2.0), 500, 0)
        details.append(f"theta{dimv} with 2J': {res.verdict.value}")
        ok &= res.verdict is Verdict.PASS
    record(6, "admissible non-standard inner products pass", ok, "; ".join(details))
    assert ok


def test_criterion_7_radon_hurwitz():
    table = {4: 3, 8: 7, 16: 8, 32: 9, 64: 11, 128: 15}
    ok = all(radon_hurwitz(n) == d for n, d in table.items())
    attained = []
    for n in (8, 16):
        v = SoSubspace.standard(clifford_system(n, radon_hurwitz(n)))
        rep = nonsingular_report(v)
        good = v.dim == radon_hurwitz(n) and rep.certified_clifford and clifford_defect(v) < 1e-12
        attained.append(f"R^{n}: dim {v.dim}, floor {rep.min_over_sphere:.3f}")
        ok &= good
        try:
            clifford_system(n, radon_hurwitz(n) + 1)
            ok = False
        except FamilyError:
            pass
    record(7, "Radon-Hurwitz table and Clifford attainment", ok, "; ".join(attained))
    assert ok


# --- structural property suite ---------------------------------------------------

def random_instance(idx: int):
    """A seeded, randomly conjugated GO subspace from one of the known families."""
    rng = rng_for(8080, idx)
    kind = idx % 6

    def imag():
        return Quaternion(0.0, *rng.standard_normal(3))

    if kind == 0:
        v = build_quat_family([(imag(), imag()) for _ in range(int(rng.integers(1, 4)))])
    elif kind == 1:
        v = build_quat_family([(imag(), imag(), imag()) for _ in range(int(rng.integers(1, 3)))])
    elif kind == 2:
        lams = () if rng.random() < 0.5 else (float(rng.uniform(0.5, 2.0)),)
        v = build_rep3_family(lambdas=lams, spins=(2,))
    elif kind == 3:
        n = (4, 8)[int(rng.integers(2))]
        v = SoSubspace.standard(clifford_system(n, int(rng.integers(1, radon_hurwitz(n) + 1))))
    else:
        v = build_theta(6 + kind % 2, float(rng.uniform(0.05, np.pi / 2 - 0.05)))[0]
    irreducible_nonsingular = kind >= 3 and not (kind == 3 and v.dim < 3)
    return v.conjugate(random_orthogonal(v.n, rng)), irreducible_nonsingular


def structural_checks(v: SoSubspace, irreducible_nonsingular: bool, seed: int) -> dict:
    out = {}
    ns = normalizers(v)
    # Ng sits inside C + m(V)
    span = np.concatenate([ns.c_basis, ns.m_basis])
    out["ng_in_c_plus_m"] = [contained_in(ns.ng_basis, span) <= 1e-8]
    # C and P commute
    worst = max((np.linalg.norm(c @ p - p @ c) for c in ns.c_basis for p in ns.p_basis), default=0.0)
    out["c_p_commute"] = [worst <= 1e-8]
    # every witness re-substitutes into both GO equations
    res = go_verdict(v, Mode.NG, n_samples=100, seed=seed, normalizers_=ns)
    checks = [res.verdict is Verdict.PASS]
    for r in res.records:
        if r.witness is None:
            checks.append(r.degenerate)
            continue
        nmat = np.tensordot(r.witness, ns.ng_basis, axes=1)
        jm = v.element(r.j_coords)
        checks.append(np.linalg.norm(nmat @ jm - jm @ nmat) <= 1e-8 * max(1.0, np.linalg.norm(nmat) * np.linalg.norm(jm))
                      and np.linalg.norm(nmat @ r.x - jm @ r.x) <= 1e-8 * r.scale)
    out["witness_resubstitution"] = checks
    # projections to invariant blocks stay GO; block centralizers are 0, 1 or 3 dimensional
    decomp = invariant_decomposition(v, seed)
    proj_ok, cdim_ok = [], []
    for frame, proj in zip(decomp.blocks, decomp.projected):
        if proj is None:
            continue
        proj_ok.append(go_verdict(proj, Mode.NG, n_samples=100, seed=seed).verdict is Verdict.PASS)
        cdim_ok.append(centralizer(proj).shape[0] in (0, 1, 3))
    out["projection_go"] = proj_ok
    out["block_centralizer_dim"] = cdim_ok
    if irreducible_nonsingular:
        out["kernel_bound"] = [kernel_bound_check(v, ns, n_samples=50, seed=seed)[0]]
    return out


def test_criterion_8_structural_property_suite():
    tallies: dict = {}
    for idx in range(60):
        v, irr = random_instance(idx)
        for name, results in structural_checks(v, irr, idx).items():
            passed, total = tallies.get(name, (0, 0))
            tallies[name] = (passed + sum(map(bool, results)), total + len(results))
    passed = sum(p for p, _ in tallies.values())
    total = sum(t for _, t in tallies.values())
    rate = passed / total
    ok = rate >= 0.999 and all(t > 0 for _, t in tallies.values())
    record(8, "structural property suite", ok,
           f"pass rate {rate:.4f} over {total} checks; " + ", ".join(f"{k} {p}/{t}" for k, (p, t) in tallies.items()))
    assert ok


def test_criterion_9_search_harness():
    details, ok = [], True
    for n, dimv, trials in [(4, 3, 1000), (8, 6, 200)]:
        start = time.perf_counter()
        res = search(n, dimv, trials, seed=0, samples=200, tol=DEFAULT_TOL)
        elapsed = time.perf_counter() - start
        ok &= not res["anomalies"] and elapsed <= 600.0
        details.append(f"n={n} dimv={dimv}: {trials} trials, {res['nonsingular']} non-singular, "
                       f"{len(res['hits'])} hits, {len(res['anomalies'])} anomalies, {elapsed:.1f}s")
    record(9, "search harness logs no anomalies", ok, "; ".join(details))
    assert ok
