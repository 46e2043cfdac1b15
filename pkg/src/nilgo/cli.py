"""Command-line front end: ``nilgo <command> ...``.

Every command prints one JSON report on stdout and a short summary on stderr.
Exit codes: 0 PASS (or success), 1 FAIL, 2 usage or I/O error, 3 INCONCLUSIVE.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys
import time
from typing import Optional

import numpy as np

from . import __version__
from .classify import (
    TypeName,
    check_rh_consistency,
    classify_type,
    invariant_decomposition,
    radon_hurwitz,
    theta_invariant,
)
from .families import (
    FamilyError,
    build_quat_family,
    build_rep3_family,
    build_theta,
    build_vdw,
    clifford_system,
    glue_diagonal,
    nice_subalgebra,
    parse_quaternion,
)
from .linalg import Tolerances, random_orthogonal, rng_for, skew
from .model import AlgebraError, SoSubspace, dumps_algebra, read_algebra, reduce_abelian
from .structure import NumericalFailure, normalizers
from .verify import Mode, Verdict, go_verdict, kernel_bound_check, nonsingular_report

REPORT_SCHEMA = "nilgo-report/1"
EXIT = {Verdict.PASS: 0, Verdict.FAIL: 1, Verdict.INCONCLUSIVE: 3}
SEARCH_FLOOR = 0.1


class UsageError(Exception):
    pass


# --- parsing helpers ----------------------------------------------------------

def _floats(text: str) -> list:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise UsageError(f"bad number list {text!r}") from exc


def _ints(text: str) -> list:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise UsageError(f"bad integer list {text!r}") from exc


def _quat_blocks(text: str, width: int) -> list:
    blocks = []
    for chunk in text.split(","):
        tokens = chunk.split(":")
        if len(tokens) != width:
            raise UsageError(f"block {chunk!r} needs {width} quaternions separated by ':'")
        try:
            blocks.append([parse_quaternion(t) for t in tokens])
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
    return blocks


def _quats(text: str) -> list:
    try:
        return [parse_quaternion(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _gram(args, dim: int):
    if args.gram_diag is None:
        return None
    diag = _floats(args.gram_diag)
    if len(diag) != dim:
        raise UsageError(f"--gram-diag needs {dim} entries, got {len(diag)}")
    return np.diag(diag)


def _tol(args) -> Tolerances:
    try:
        return Tolerances(args.tol_rank, args.tol_resid)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


# --- reports -----------------------------------------------------------------

def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        val = float(obj)
        return val if math.isfinite(val) else repr(val)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def _digest(path: Optional[str]) -> Optional[str]:
    if path is None:
        return None
    with open(path, "rb") as fh:
        return hashlib.sha256(fh.read()).hexdigest()


def _array_digest(a: np.ndarray) -> str:
    return hashlib.sha256(np.round(np.asarray(a, dtype=float), 10).tobytes()).hexdigest()[:16]


def emit(args, result: dict, summary: str, started: float, path: Optional[str] = None) -> None:
    report = {
        "schema": REPORT_SCHEMA,
        "command": args.command,
        "argv": list(args.argv),
        "input_digest": _digest(path),
        "version": __version__,
        "seed": args.seed,
        "tolerances": {"rank_rel": args.tol_rank, "resid_rel": args.tol_resid},
        "result": result,
    }
    if args.timing:
        report["wall_time_s"] = time.perf_counter() - started
    sys.stdout.write(json.dumps(_clean(report), sort_keys=True, indent=1) + "\n")
    sys.stderr.write(summary.rstrip("\n") + "\n")


def _load(args, tol: Tolerances) -> SoSubspace:
    alg = read_algebra(args.path, tol)
    if getattr(args, "reduce", False):
        alg = reduce_abelian(alg)
    if alg.v is None:
        raise AlgebraError("algebra is abelian: V is empty")
    return alg.v


# --- commands ----------------------------------------------------------------

def build_family(args) -> SoSubspace:
    fam = args.family
    if fam == "quat2":
        v = build_quat_family(_quat_blocks(args.pairs, 2))
    elif fam == "quat3":
        v = build_quat_family(_quat_blocks(args.triples, 3))
    elif fam == "rep3":
        spins = _ints(args.spins)
        weights = _floats(args.spin_weights) if args.spin_weights else None
        v = build_rep3_family(_floats(args.lambdas or ""), spins, weights)
    elif fam == "clifford":
        v = SoSubspace.standard(clifford_system(args.n, args.count), {"family": "clifford"})
    elif fam == "vdw":
        if args.theta is not None:
            v, _ = build_theta(args.dimv, args.theta)
        else:
            if args.d is None:
                raise UsageError("vdw needs --theta/--dimv or --d/--w")
            v = build_vdw(_quats(args.d)[0], _quats(args.w or ""))
    elif fam == "nice":
        v = SoSubspace.standard(nice_subalgebra(args.p, args.q, args.fixed), {"family": "nice"})
    elif fam == "glue":
        base = clifford_system(8, args.count)
        v = glue_diagonal(base, _floats(args.phi))
    else:  # argparse restricts choices
        raise UsageError(f"unknown family {fam!r}")
    gram = _gram(args, v.dim)
    return v if gram is None else v.with_gram(gram)


def cmd_construct(args) -> int:
    started = time.perf_counter()
    v = build_family(args)
    text = dumps_algebra(v)
    family = v.metadata.get("family", args.family)
    summary = f"n={v.n} m={v.dim} family={family}"
    if args.out is None:
        sys.stdout.write(text + "\n")
        sys.stderr.write(summary + "\n")
        return 0
    with open(args.out, "w") as fh:
        fh.write(text + "\n")
    emit(args, {"n": v.n, "dim_v": v.dim, "family": family, "out": args.out}, summary, started)
    return 0


def cmd_verify(args) -> int:
    started = time.perf_counter()
    tol = _tol(args)
    v = _load(args, tol)
    ns = normalizers(v, tol, with_m=False)
    verdict = go_verdict(v, Mode(args.mode.upper()), args.samples, args.seed, tol, ns)
    report = nonsingular_report(v, seed=args.seed, tol=tol)
    decomp = invariant_decomposition(v, args.seed, tol)
    ok, kdim, witness = kernel_bound_check(v, ns, seed=args.seed, tol=tol)
    nonsing = report.min_over_sphere > 1e-6
    result = {
        "n": v.n,
        "dim_v": v.dim,
        "go": verdict.to_dict(),
        "nonsingular": report.to_dict(),
        "kernel_bound": {
            "passed": ok,
            "worst_kernel_dim": kdim,
            "worst_coeffs": witness,
            "applicable": bool(nonsing and len(decomp.block_dims) == 1),
        },
        "radon_hurwitz": {"bound": radon_hurwitz(v.n), "consistent": check_rh_consistency(v)},
    }
    summary = (f"{verdict.verdict.value} mode={verdict.mode.value} checked={len(verdict.records)} "
               f"max_rel_residual={verdict.max_relative:.3e} min_sigma={report.min_over_sphere:.3e}")
    if verdict.verdict is Verdict.INCONCLUSIVE:
        summary += "\nWARNING: verdict is INCONCLUSIVE"
    emit(args, result, summary, started, args.path)
    return EXIT[verdict.verdict]


def cmd_normalizers(args) -> int:
    started = time.perf_counter()
    tol = _tol(args)
    v = _load(args, tol)
    ns = normalizers(v, tol)
    dims = ns.dims
    digests = {k: _array_digest(getattr(ns, f"{k}_basis")) for k in dims}
    names = {"c": "C", "n": "N", "ng": "Ng", "p": "P", "pg": "Pg", "m": "m"}
    summary = ", ".join(f"dim {names[k]}={dims[k]}" for k in names)
    emit(args, {"dims": dims, "basis_digests": digests}, summary, started, args.path)
    return 0


def cmd_classify(args) -> int:
    started = time.perf_counter()
    tol = _tol(args)
    v = _load(args, tol)
    label = classify_type(v, args.seed, tol, n_samples=args.samples)
    summary = f"type={label.label.value} satisfied={','.join(label.evidence['satisfied'])}"
    for w in label.evidence["warnings"]:
        summary += f"\nWARNING: {w}"
    emit(args, label.to_dict(), summary, started, args.path)
    return 0


def cmd_decompose(args) -> int:
    started = time.perf_counter()
    tol = _tol(args)
    v = _load(args, tol)
    dec = invariant_decomposition(v, args.seed, tol)
    summary = "blocks: " + " + ".join(f"{d}{f}" for d, f in zip(dec.block_dims, dec.scalar_field))
    emit(args, dec.to_dict(), summary, started, args.path)
    return 0


def cmd_invariant(args) -> int:
    started = time.perf_counter()
    tol = _tol(args)
    v = _load(args, tol)
    val = theta_invariant(v, seed=args.seed)
    arg = 1.0 + 8.0 * val
    theta = float(np.arcsin(arg)) if -1.0 < arg < 1.0 else None
    summary = f"theta_invariant={val:.12g}" + ("" if theta is None else f" theta={theta:.12g}")
    emit(args, {"theta_invariant": val, "theta": theta}, summary, started, args.path)
    return 0


def random_subspace(n: int, dimv: int, rng) -> SoSubspace:
    mats = np.array([skew(rng.standard_normal((n, n))) for _ in range(dimv)])
    return SoSubspace.standard(mats, {"family": "random"})


def planted_subspace(n: int, dimv: int, rng) -> Optional[SoSubspace]:
    """A randomly conjugated known GO subspace of so(n) of dimension dimv, if any."""
    options = []
    try:
        options.append(SoSubspace.standard(clifford_system(n, dimv)))
    except FamilyError:
        pass
    if n == 8 and dimv in (6, 7):
        options.append(build_theta(dimv, float(rng.uniform(0.05, np.pi / 2 - 0.05)))[0])
    if not options:
        return None
    v = options[int(rng.integers(len(options)))]
    return v.conjugate(random_orthogonal(n, rng))


def search(n: int, dimv: int, trials: int, seed: int, samples: int, tol: Tolerances,
           plant_every: int = 0) -> dict:
    """Random non-singular subspaces of so(n); record GO hits and anomalies.

    With ``plant_every = k > 0`` every k-th trial is replaced by a conjugate of a
    known GO subspace, which exercises the hit-handling path.
    """
    hits, anomalies = [], []
    screened = planted = 0
    for t in range(trials):
        rng = rng_for(seed, t)
        v = planted_subspace(n, dimv, rng) if plant_every and t % plant_every == 0 else None
        planted += v is not None
        if v is None:
            v = random_subspace(n, dimv, rng)
        report = nonsingular_report(v, n_samples=50, refine_steps=50, seed=seed, tol=tol, starts=2)
        if report.min_over_sphere <= SEARCH_FLOOR:
            continue
        screened += 1
        ns = normalizers(v, tol, with_m=False)
        quick = go_verdict(v, Mode.NG, samples, seed, tol, ns, stop_on_fail=True)
        if quick.verdict is Verdict.FAIL:
            continue
        label = classify_type(v, seed, tol, n_samples=samples, normalizers_=ns)
        hit = {"trial": t, "verdict": quick.verdict.value, "label": label.label.value}
        if label.label is TypeName.COMMON:
            hit["theta_invariant"] = theta_invariant(v, seed=seed)
        hits.append(hit)
        if quick.verdict is not Verdict.PASS:
            continue
        bad = False
        if label.label is TypeName.COMMON:
            inv = hit["theta_invariant"]
            bad = n != 8 or not -0.125 < inv < 0.0
        if n < 8 and label.label not in (TypeName.CLIFFORD, TypeName.CENTRALIZER, TypeName.REP):
            bad = True
        if bad:
            anomalies.append(hit)
    return {"n": n, "dim_v": dimv, "trials": trials, "planted": planted, "nonsingular": screened,
            "hits": hits, "anomalies": anomalies}


def cmd_search(args) -> int:
    started = time.perf_counter()
    tol = _tol(args)
    if not 1 <= args.n <= 8:
        raise UsageError("--n must lie in 1..8")
    if not 1 <= args.dimv <= args.n * (args.n - 1) // 2:
        raise UsageError("--dimv out of range")
    if args.plant_every < 0:
        raise UsageError("--plant-every must be >= 0")
    result = search(args.n, args.dimv, args.trials, args.seed, args.samples, tol, args.plant_every)
    summary = (f"trials={args.trials} planted={result['planted']} nonsingular={result['nonsingular']} hits={len(result['hits'])} "
               f"anomalies={len(result['anomalies'])}")
    emit(args, result, summary, started)
    return 1 if result["anomalies"] else 0


# --- argument parser ----------------------------------------------------------

def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--samples", type=int, default=500)
    p.add_argument("--tol-rank", type=float, default=1e-10)
    p.add_argument("--tol-resid", type=float, default=1e-8)
    p.add_argument("--timing", action="store_true", help="add wall time to the report")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nilgo", description="GO-pair construction and verification")
    sub = parser.add_subparsers(dest="command", required=True)

    con = sub.add_parser("construct", help="build a family and write an algebra file")
    con.add_argument("family", choices=["quat2", "quat3", "rep3", "clifford", "vdw", "nice", "glue"])
    con.add_argument("--pairs", default="i:j,i:k")
    con.add_argument("--triples", default="i:j:k")
    con.add_argument("--lambdas", default="")
    con.add_argument("--spins", default="2")
    con.add_argument("--spin-weights", default=None)
    con.add_argument("--n", type=int, default=8)
    con.add_argument("--count", type=int, default=7)
    con.add_argument("--theta", type=float, default=None)
    con.add_argument("--dimv", type=int, default=6)
    con.add_argument("--d", default=None)
    con.add_argument("--w", default=None)
    con.add_argument("--p", type=int, default=1)
    con.add_argument("--q", type=int, default=0)
    con.add_argument("--fixed", type=int, default=0)
    con.add_argument("--phi", default="1,1,1,1,1")
    con.add_argument("--gram-diag", default=None, help="diagonal inner product on V")
    con.add_argument("--out", default=None)
    _common(con)
    con.set_defaults(func=cmd_construct)

    for name, func, helptext in (
        ("verify", cmd_verify, "GO verdict, non-singularity and kernel bound"),
        ("normalizers", cmd_normalizers, "dimensions of C, N, Ng, P, Pg, m"),
        ("classify", cmd_classify, "type label with evidence"),
        ("decompose", cmd_decompose, "V-irreducible blocks"),
        ("invariant", cmd_invariant, "theta-family conjugacy invariant"),
    ):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("path")
        p.add_argument("--reduce", action="store_true", help="drop the abelian factor first")
        if name == "verify":
            p.add_argument("--mode", choices=["ng", "centralizer", "NG", "CENTRALIZER"], default="ng")
        _common(p)
        p.set_defaults(func=func)

    srch = sub.add_parser("search", help="random subspaces stress test")
    srch.add_argument("--n", type=int, required=True)
    srch.add_argument("--dimv", type=int, required=True)
    srch.add_argument("--trials", type=int, default=100)
    srch.add_argument("--plant-every", type=int, default=0,
                      help="replace every k-th trial by a conjugated known GO subspace")
    _common(srch)
    srch.set_defaults(func=cmd_search)
    return parser


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    args.argv = argv
    if args.samples < 1:
        sys.stderr.write("error: --samples must be >= 1\n")
        return 2
    if not 0 <= args.seed < 2**64:
        sys.stderr.write("error: --seed must be an unsigned 64-bit integer\n")
        return 2
    try:
        return args.func(args)
    except (UsageError, FamilyError, AlgebraError, OSError, ValueError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2
    except NumericalFailure as exc:
        sys.stderr.write(f"numerical failure: {exc}\n")
        return 3


if __name__ == "__main__":
    sys.exit(main())
