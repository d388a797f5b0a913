"""Acceptance suite: one PASS/FAIL line per criterion, at the stated tolerances."""

import math
import time

import numpy as np
import pytest

from blocknorm import blockineq as bi
from blocknorm import cli
from blocknorm import falsifier as fz
from blocknorm.matcore import herm_eigen, operator_norm, two_by_two_norm

from .conftest import WEIGHTED_SHIFT, ginibre, random_hermitian
from .oracles import charpoly_eigenvalues, lapack_gap, lapack_min_eig, lapack_norm

pytestmark = pytest.mark.acceptance
GOLDEN = (5 + math.sqrt(5)) / 2


@pytest.fixture
def report(capsys):
    def emit(number, title, ok, detail):
        with capsys.disabled():
            print(f"\n[acceptance {number}] {'PASS' if ok else 'FAIL'}  {title}: {detail}")
        return ok

    return emit


def scaled_gap(inst):
    g = lapack_gap(inst.a, inst.x, inst.b)
    return g, g / max(1.0, lapack_norm(inst.a + inst.b))


def distinct(values, rel=1e-3):
    v = np.sort(np.abs(values))
    return v.size < 2 or np.min(np.diff(v)) > rel * v[-1]


def test_1_counterexample_reproduction(report, capsys):
    start = time.perf_counter()
    code = cli.main(["reproduce"])
    elapsed = time.perf_counter() - start
    table = capsys.readouterr().out
    rows = {r[0]: r[2] for r in cli.reproduction_rows()}
    sum_err = abs(rows["sum_norm"] - 3.5)
    block = rows["block_norm"]
    ok = code == 0 and "FAIL" not in table and sum_err <= 1e-12 and block >= GOLDEN - 1e-10 and elapsed < 1.0
    detail = f"|sum-3.5|={sum_err:.1e}, block={block:.12f} >= {GOLDEN - 1e-10:.12f}, {elapsed:.3f} s"
    assert report(1, "counterexample reproduction", ok, detail)


def test_2_closed_form_agreement(report):
    g = np.random.default_rng(2)
    pairs = g.uniform(0.01, 100, size=(1000, 2))
    dev = max(abs(two_by_two_norm(a, c) - operator_norm(np.array([[a, 1.0], [1.0, c]]))) for a, c in pairs)
    assert report(2, "two-by-two closed form", dev <= 1e-10, f"max deviation {dev:.2e} over 1000 pairs")


@pytest.fixture(scope="module")
def trichotomy_run():
    """1000 (A, X) pairs, 20 feasible B and 20 feasible C each."""
    g = fz.RngStream(3, 0).generator()
    violations, checked, positive = [], 0, []
    counts = dict.fromkeys([t.value for t in bi.Trichotomy], 0)
    start = time.perf_counter()
    for _ in range(1000):
        n = int(g.integers(2, 5))
        a = fz.random_pd(n, 1e4, g)
        x = ginibre(n, g)
        cls = bi.classify_trichotomy(a, x)
        counts[cls.value] += 1
        for _ in range(20):
            inst = bi.make_instance(a, x, bi.feasible_b(a, x, fz.random_psd_slack(n, g)))
            mirror = bi.make_instance(a, x.conj().T, bi.feasible_b(a, x.conj().T, fz.random_psd_slack(n, g)))
            for candidate, guarded in ((inst, cls is not bi.Trichotomy.BETA_GREATER),
                                       (mirror, cls is not bi.Trichotomy.ALPHA_GREATER)):
                g_abs, g_rel = scaled_gap(candidate)
                if guarded:
                    checked += 1
                    if g_rel > 1e-8:
                        violations.append((cls, g_rel))
                if g_abs > 1e-6:
                    positive.append(candidate)
    return {"violations": violations, "checked": checked, "positive": positive, "counts": counts,
            "elapsed": time.perf_counter() - start}


def test_3_trichotomy_suite(report, trichotomy_run):
    r = trichotomy_run
    ok = not r["violations"] and r["elapsed"] < 120
    detail = (f"{len(r['violations'])} violations in {r['checked']} guarded instances, "
              f"classes {r['counts']}, {r['elapsed']:.1f} s")
    assert report(3, "trichotomy suite", ok, detail)


def test_4_resolvent_witness_suite(report, trichotomy_run):
    g = fz.RngStream(4, 0).generator()
    planted = []
    while len(planted) < 100:
        n = int(g.integers(2, 5))
        cert = bi.rotation_violation(fz.random_pd(n, 1e2, g), fz.random_unitary(n, g))
        if cert is not None:
            planted.append(cert.instance)
    pool = trichotomy_run["positive"] + planted
    worst_res, bad = 0.0, []
    for inst in pool:
        w = bi.resolvent_witness(inst)
        if w is None:
            bad.append("absent")
            continue
        worst_res = max(worst_res, w.resolvent_residual)
        if not (w.resolvent_residual <= 1e-8 and w.beta >= w.lam):
            bad.append((w.resolvent_residual, w.beta - w.lam))
    detail = (f"{len(pool)} instances ({len(trichotomy_run['positive'])} from the trichotomy run), "
              f"max residual {worst_res:.1e}, {len(bad)} failures")
    assert report(4, "resolvent witness", not bad, detail)


def test_5_known_true_suites(report):
    g = fz.RngStream(5, 0).generator()

    def bad_count(instances):
        return sum(scaled_gap(i)[1] > 1e-8 for i in instances)

    def herm():
        n = int(g.integers(2, 5))
        a, x = fz.random_pd(n, 1e4, g), random_hermitian(n, g)
        return bi.make_instance(a, x, bi.feasible_b(a, x, fz.random_psd_slack(n, g)))

    def both():
        n = int(g.integers(2, 5))
        a, x = fz.random_pd(n, 1e4, g), ginibre(n, g)
        b = bi.feasible_b(a, x) + bi.feasible_b(a, x.conj().T) + fz.random_psd_slack(n, g)
        inst = bi.make_instance(a, x, b)
        assert bi.both_arrangements_psd(inst)
        return inst

    def normal2():
        a, x = fz.random_pd(2, 1e4, g), fz.random_normal_matrix(2, g)
        return bi.make_instance(a, x, bi.feasible_b(a, x, fz.random_psd_slack(2, g)))

    herm_bad = bad_count(herm() for _ in range(1000))
    both_bad = bad_count(both() for _ in range(500))
    normal_bad = bad_count(normal2() for _ in range(1000))
    inv_bad = 0
    for _ in range(1000):
        n = int(g.integers(2, 5))
        a, u = fz.random_pd(n, 1e4, g), fz.random_unitary(n, g)
        r = bi.compare_inverse_sums(a, u)
        rhs_lapack = lapack_norm(a + u.conj().T @ np.linalg.inv(a) @ u)
        inv_bad += r.lhs - rhs_lapack > 1e-8 * max(1.0, rhs_lapack)
    ok = herm_bad == both_bad == normal_bad == inv_bad == 0
    detail = (f"violations: hermitian {herm_bad}/1000, both-arrangements {both_bad}/500, "
              f"2x2 normal {normal_bad}/1000, inverse sums {inv_bad}/1000")
    assert report(5, "known-true suites", ok, detail)


def test_6_falsification_soundness_and_power(report):
    g = fz.RngStream(6, 0).generator()
    normal_ok = 0
    tried = 0
    while tried < 200:
        x = fz.random_normal_matrix(int(g.integers(2, 5)), g)
        if not distinct(np.linalg.svd(x, compute_uv=False)):
            continue
        tried += 1
        normal_ok += isinstance(bi.peel_falsify(x), bi.NormalCertified)

    out = bi.peel_falsify(WEIGHTED_SHIFT)
    shift_ok = False
    shift_gap = float("nan")
    if isinstance(out, bi.Violation):
        inst = out.certificate.instance
        shift_gap = lapack_gap(inst.a, inst.x, inst.b)
        psd = lapack_min_eig(inst.h) >= -1e-9 * lapack_norm(inst.h)
        shift_ok = psd and shift_gap > 1e-6 and shift_gap >= 1 - 1e-9

    power_ok, tried, min_gap = 0, 0, math.inf
    while tried < 200:
        n = int(g.integers(2, 5))
        d = np.diag(g.uniform(0.1, 10, n)).astype(complex)
        u = fz.random_unitary(n, g)
        if not distinct(np.diag(d).real) or bi.rotation_gap(d, u) <= 1e-3:
            continue
        tried += 1
        res = bi.peel_falsify(d @ u)
        if isinstance(res, bi.Violation):
            inst = res.certificate.instance
            gv = lapack_gap(inst.a, inst.x, inst.b)
            min_gap = min(min_gap, gv)
            power_ok += gv > 1e-6 and lapack_min_eig(inst.h) >= -1e-9 * lapack_norm(inst.h)
    ok = normal_ok == 200 and shift_ok and power_ok == 200
    detail = (f"normal certified {normal_ok}/200, weighted shift gap {shift_gap:.12f}, "
              f"non-normal violations {power_ok}/200 (min re-verified gap {min_gap:.2e})")
    assert report(6, "peeling falsifier", ok, detail)


def test_7_eigensolver_quality(report):
    g = fz.RngStream(7, 0).generator()
    worst_res = worst_orth = worst_poly = 0.0
    for n in range(1, 17):
        for _ in range(25):
            h = random_hermitian(n, g) * math.exp(g.uniform(-3, 3))
            eig = herm_eigen(h)
            scale = max(1.0, lapack_norm(h))
            res = max(np.linalg.norm(h @ v - lam * v) for lam, v in zip(eig.values, eig.vectors.T))
            worst_res = max(worst_res, res / scale)
            worst_orth = max(worst_orth, np.linalg.norm(eig.vectors.conj().T @ eig.vectors - np.eye(n), 2))
            if n <= 4:
                worst_poly = max(worst_poly, np.max(np.abs(eig.values - charpoly_eigenvalues(h))))
    ok = worst_res <= 1e-10 and worst_orth <= 1e-10 and worst_poly <= 1e-9
    detail = f"max scaled residual {worst_res:.1e}, orthonormality {worst_orth:.1e}, char-poly {worst_poly:.1e}"
    assert report(7, "eigensolver quality", ok, detail)


def test_8_determinism(report, tmp_path, capsys):
    outputs = {}
    for mode in ("problem1", "problem5"):
        for workers in (1, 1, 3, 3):
            path = tmp_path / f"{mode}-{workers}-{len(outputs)}.json"
            argv = ["search", "--mode", mode, "--dim", "3", "--trials", "24", "--seed", "2024",
                    "--workers", str(workers), "--out", str(path)]
            assert cli.main(argv) == 0
            outputs.setdefault((mode, workers), []).append(path.read_bytes())
    capsys.readouterr()
    same_flags = all(a == b for a, b in outputs.values())
    across = all(outputs[(m, 1)][0] == outputs[(m, 3)][0] for m in ("problem1", "problem5"))
    detail = f"reruns identical: {same_flags}, workers 1 vs 3 identical: {across}"
    assert report(8, "byte-identical search reports", same_flags and across, detail)
