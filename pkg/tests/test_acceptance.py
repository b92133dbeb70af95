"""Acceptance suite: one test per criterion, tolerances pinned as stated.

Each test prints one PASS/FAIL line with its measured numbers before
asserting, so the printed record survives even when an assertion fires.
Four criteria (4, 5, 8, 9) are not attainable at their stated desk-scale
tolerances -- the absorption rate at lambda=1 is small (alpha ~ 0.132), the
conditioned laws relax slowly, and the quasi-stationary law has a fat
diameter tail, so the t=12 / W=12 working points sit short of the
asymptotic regime those tolerances assume.  They are asserted as written
and fail honestly; the measured values and the noise-free transversal
analysis behind them are recorded alongside.

Run only this module with: pytest tests/test_acceptance.py -v -s
"""

import json
import math
import random
import subprocess
import sys

import pytest

import contactqsd as cq
from contactqsd.rng import TAG_FIELD, TAG_TRAJ, derive
from contactqsd.stats import (
    one_sided_greater_pvalue,
    runs_test_pvalue,
    total_variation,
    two_sample_chisquare,
)

LAM = 1.0


def report(criterion, ok, detail):
    print(f"CRITERION {criterion}: {'PASS' if ok else 'FAIL'} -- {detail}")
    return ok


# -- criterion 1: lambda=0 five-clock survival --------------------------------


def test_criterion_1_zero_rate_survival_oracle():
    n = 100_000
    eta0 = tuple((5 * i,) for i in range(5))
    curve = cq.survival_curve(eta0, 0.0, [1.0, 2.0, 3.0], n, 1001, workers=2)
    worst = 0.0
    ok = True
    for t, p in zip(curve.times, curve.survival_prob):
        want = 1 - (1 - math.exp(-t)) ** 5
        sigma = math.sqrt(want * (1 - want) / n)
        devs = abs(p - want) / sigma
        worst = max(worst, devs)
        ok = ok and devs <= 3
    assert report(1, ok, f"max |dev| = {worst:.2f} binomial sigma (limit 3)")


# -- criterion 2: graphical vs jump-chain law equivalence ----------------------


def _graphical_final_counts(eta0, lam, t, n, seed):
    counts = {}
    for i in range(n):
        f = cq.make_field(derive(seed, TAG_FIELD, i), lam, t, 1)
        final = cq.evolve(f, eta0, 0.0, t)
        key = cq.canonicalize(final) if final else ()
        counts[key] = counts.get(key, 0) + 1
    return counts


def _jump_final_counts(eta0, lam, t, n, seed):
    counts = {}
    for i in range(n):
        final = cq.jump_evolve(eta0, lam, t, derive(seed, TAG_TRAJ, i))
        key = cq.canonicalize(final) if final else ()
        counts[key] = counts.get(key, 0) + 1
    return counts


def test_criterion_2_engine_law_equivalence():
    eta0 = ((0,), (1,), (2,))
    n = 100_000
    ca = _graphical_final_counts(eta0, LAM, 2.0, n, 11)
    cb = _jump_final_counts(eta0, LAM, 2.0, n, 12)
    stat, p, dof = two_sample_chisquare(ca, cb, top_k=20)
    assert report(2, p > 0.01, f"chi2={stat:.1f} dof={dof} p={p:.4f} (need > 0.01)")


# -- criterion 3: exact W=2 closed form ----------------------------------------


def test_criterion_3_w2_closed_form():
    eig = cq.qsd_eigen(cq.build_generator(1, 2, LAM))
    want = (5 - math.sqrt(17)) / 2
    ok = abs(eig.alpha - want) < 1e-10 and eig.residual < 1e-10
    assert report(
        3, ok,
        f"alpha={eig.alpha!r} vs (5-sqrt(17))/2, |diff|={abs(eig.alpha-want):.2e}, "
        f"residual={eig.residual:.2e}",
    )


# -- criterion 4: cross-method agreement at W=12 / t=12 / N=1e4 ----------------


def test_criterion_4_cross_method_tv():
    # stated parameters; the truncated W=12 reference law sits ~0.08 TV from
    # the true quasi-stationary law (solver transversal: TV(e12,e14)=0.0396,
    # TV(e14,e16)=0.0246, TV(e16,e18)=0.0153, geometric tail ratio ~0.62),
    # so the two consistent Monte Carlo estimators cannot pairwise match it
    # within 0.05; expected FAIL
    e12 = cq.qsd_eigen(cq.build_generator(1, 12, LAM))
    y = cq.yaglom_estimate(((0,),), LAM, 12.0, 2_000_000, 777, workers=2)
    fv = cq.fleming_viot_estimate(10_000, LAM, 50.0, 200.0, 99)
    assert y.n_effective >= 10_000
    tvs = {
        "eigen-yaglom": total_variation(e12.pmf, y.pmf),
        "eigen-fv": total_variation(e12.pmf, fv.pmf),
        "yaglom-fv": total_variation(y.pmf, fv.pmf),
    }
    ok = all(v < 0.05 for v in tvs.values())
    assert report(
        4, ok,
        f"pairwise TV = { {k: round(v, 4) for k, v in tvs.items()} } "
        f"(need all < 0.05; survivors={y.n_effective})",
    )


# -- criterion 5: initial-condition insensitivity -------------------------------


def test_criterion_5_conditioned_insensitivity():
    # noise-free transversals of the censored chain give TV = 0.0302 (W=16)
    # and 0.0384 (W=18) between the two conditioned laws at t=12, i.e. the
    # true distance extrapolates to ~0.05; a 32M-replica probe measured
    # 0.0603 with ~0.0095 resampling noise.  TV < 0.05 is out of reach at
    # t=12; the CI-excludes-0.1 half does hold.  expected FAIL
    interval10 = tuple((i,) for i in range(10))
    res = cq.conditioned_insensitivity(
        ((0,),), interval10, LAM, 12.0, 8_000_000, 4242, workers=2
    )
    ok = res.tv < 0.05 and res.ci95[1] < 0.1
    assert report(
        5, ok,
        f"TV={res.tv:.4f} (need < 0.05), CI95=({res.ci95[0]:.4f}, "
        f"{res.ci95[1]:.4f}) (need upper < 0.1), survivors="
        f"({res.n_effective_a}, {res.n_effective_b})",
    )


# -- criterion 6: exponential absorption from the eigen law --------------------


def test_criterion_6_exponential_absorption():
    # W=16 reference: wide enough that the truncation bias of alpha (2.5%
    # against the extrapolated limit) stays inside the 5% slope tolerance
    eig = cq.qsd_eigen(cq.build_generator(1, 16, LAM))
    grid = [float(x) for x in range(2, 15)]
    curve = cq.survival_curve(eig.estimate, LAM, grid, 500_000, 2718, workers=2)
    fit = cq.estimate_alpha(curve)
    p_runs = runs_test_pvalue(fit.residual_signs)
    rel = abs(fit.alpha - eig.alpha) / eig.alpha
    ok = p_runs > 0.01 and rel < 0.05
    assert report(
        6, ok,
        f"slope={fit.alpha:.5f} vs eigen alpha={eig.alpha:.5f} "
        f"(rel {rel:.3f}, need < 0.05); runs-test p={p_runs:.3f} (need > 0.01)",
    )


# -- criterion 7: structural invariants on randomized instances ----------------


def test_criterion_7_structural_invariants():
    rnd = random.Random(70707)
    n_instances = 1000
    violations = {"additivity": 0, "monotonicity": 0, "semigroup": 0,
                  "reachability": 0}

    def rand_config(d, span=3, max_size=4):
        k = rnd.randint(1, max_size)
        return cq.as_config(
            {tuple(rnd.randint(-span, span) for _ in range(d)) for _ in range(k)}
        )

    for i in range(n_instances):
        d = 2 if i % 5 == 0 else 1
        lam = rnd.choice([0.0, 0.4, 0.9, 1.4])
        f = cq.make_field(rnd.getrandbits(63), lam, 5.0, d)
        a = rand_config(d)
        b = rand_config(d)
        ab = cq.as_config(set(a) | set(b))
        s, t, u = sorted(rnd.uniform(0.0, 5.0) for _ in range(3))
        ea = cq.evolve(f, a, s, t)
        eb = cq.evolve(f, b, s, t)
        eab = cq.evolve(f, ab, s, t)
        if set(eab) != set(ea) | set(eb):
            violations["additivity"] += 1
        if not set(ea) <= set(eab):
            violations["monotonicity"] += 1
        stepped = cq.evolve(f, ea, t, u) if ea else ()
        if cq.evolve(f, a, s, u) != stepped:
            violations["semigroup"] += 1
        x = a[0]
        fwd = set(cq.evolve(f, (x,), s, t))
        probes = [tuple(x[j] + dv if j == 0 else x[j] for j in range(d))
                  for dv in (-2, -1, 0, 1, 2)]
        for z in probes:
            if (z in fwd) != cq.reaches(
                f, cq.SpaceTimePoint(x, s), cq.SpaceTimePoint(z, t)
            ):
                violations["reachability"] += 1
                break
    ok = all(v == 0 for v in violations.values())
    assert report(7, ok, f"violations over {n_instances} instances: {violations}")


# -- criterion 8: cut-break-point trend -----------------------------------------


def test_criterion_8_cut_break_trend():
    # box scale R is a free parameter of the scan; R=1 (the smallest the
    # detector accepts) maximizes the break probability, and the default
    # R=e^sqrt(t) finds nothing at all at these t (box emptiness would need
    # e^sqrt(t) << e^(alpha t / 2), i.e. t beyond ~250).  The increasing
    # trend is clear at R=1; the 0.8 level at t=14 is not reachable for any
    # admissible R.  expected FAIL
    counts = {}
    for t, n in ((6.0, 6000), (10.0, 20000), (14.0, 60000)):
        out = cq.scan_cut_breaks(((0,),), LAM, t, 1.0, n, 31337, workers=2)
        counts[t] = (out["n_early_cut_break"], out["n_survived"])
    p6 = counts[6.0][0] / counts[6.0][1]
    p10 = counts[10.0][0] / counts[10.0][1]
    p14 = counts[14.0][0] / counts[14.0][1]
    pv_6_10 = one_sided_greater_pvalue(*counts[10.0], *counts[6.0])
    pv_10_14 = one_sided_greater_pvalue(*counts[14.0], *counts[10.0])
    trend_ok = pv_6_10 < 0.05 and pv_10_14 < 0.05
    level_ok = p14 >= 0.8
    assert report(
        8, trend_ok and level_ok,
        f"P(S<=t/2|surv) = {p6:.3f} / {p10:.3f} / {p14:.3f} at t=6/10/14 "
        f"(R=1; one-sided p {pv_6_10:.2g}, {pv_10_14:.2g}: trend "
        f"{'ok' if trend_ok else 'fail'}; need >= 0.8 at t=14: "
        f"{'ok' if level_ok else 'fail'}; paper-default R finds 0 events)",
    )


# -- criterion 9: diameter factorization trend ----------------------------------


def test_criterion_9_diam_factorization_trend():
    # at t=8 the 30-interval still has P(diam < e^sqrt(8)) = 0.60, which
    # accidentally cancels part of its conditioning transient; by t=12 the
    # diameter factor is ~0.96 and the remaining transient dominates, so the
    # max gap rises before it falls (it decreases again by t=16).
    # expected FAIL
    ref = cq.qsd_eigen(cq.build_generator(1, 16, LAM)).pmf
    starts = {
        "single": ((0,),),
        "int10": tuple((i,) for i in range(10)),
        "int30": tuple((i,) for i in range(30)),
    }
    gaps = {}
    for t in (8.0, 12.0):
        radius = math.exp(math.sqrt(t))
        worst = None
        for name, z0 in starts.items():
            res = cq.diam_factorization_gap(
                z0, LAM, t, radius, 300_000, 555, ref, workers=2
            )
            if worst is None or res.gap > worst[1].gap:
                worst = (name, res)
        gaps[t] = worst
    g8, g12 = gaps[8.0][1], gaps[12.0][1]
    # one-sided at 95%: the t=12 bootstrap mass must sit below t=8's
    ok = g12.ci95[1] < g8.ci95[0]
    assert report(
        9, ok,
        f"max gap t=8: {g8.gap:.4f} ({gaps[8.0][0]}, CI {g8.ci95[0]:.4f}-"
        f"{g8.ci95[1]:.4f}) vs t=12: {g12.gap:.4f} ({gaps[12.0][0]}, CI "
        f"{g12.ci95[0]:.4f}-{g12.ci95[1]:.4f}); need t=12 smaller one-sided",
    )


# -- criterion 10: worker-count reproducibility ---------------------------------


def _run_cli(*args):
    res = subprocess.run(
        [sys.executable, "-m", "contactqsd.cli", *args],
        capture_output=True, text=True,
    )
    assert res.returncode == 0, res.stderr
    return res


def test_criterion_10_reproducibility(tmp_path):
    # the criterion-4 pipeline pieces, rerun under 1 and 8 workers
    blobs = {}
    for workers in (1, 8):
        y = tmp_path / f"y{workers}.json"
        _run_cli("yaglom", "--lambda", "1", "--eta0", "0", "--t", "12",
                 "--replicas", "200000", "--seed", "777",
                 "--workers", str(workers), "--out", str(y))
        fv = tmp_path / f"fv{workers}.json"
        _run_cli("fviot", "--lambda", "1", "--eta0", "0", "--particles",
                 "2000", "--burn", "20", "--sample", "50", "--seed", "99",
                 "--workers", str(workers), "--out", str(fv))
        ex = tmp_path / f"ex{workers}.json"
        _run_cli("exact", "--W", "12", "--lambda", "1",
                 "--workers", str(workers), "--out", str(ex))
        blobs[workers] = (y.read_bytes(), fv.read_bytes(), ex.read_bytes())
    ok = blobs[1] == blobs[8]
    same = [a == b for a, b in zip(blobs[1], blobs[8])]
    assert report(
        10, ok,
        f"byte-identical summaries across 1 vs 8 workers: "
        f"yaglom={same[0]}, fviot={same[1]}, exact={same[2]}",
    )
