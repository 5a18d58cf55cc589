"""Acceptance criteria, run at their stated sizes and tolerances.

Every test records a one-line PASS/FAIL verdict; the lines are printed in the
"acceptance criteria" section at the end of the pytest run.
"""
import time

import numpy as np

from oracles import fd_gradient, near_zero_point
from safpr import experiments as ex
from safpr.measurement import build_cdp_model, build_gaussian_model, observe
from safpr.numerics import COMPLEX, REAL, dist_up_to_phase, make_rng
from safpr.initialization import initialize
from safpr.objective import SAF, WF, grad, loss, saf_grad, verify_kernel_properties
from safpr.solver import FIXED_STEP, SolverConfig, run

SEED = 0


def test_01_kernel_properties(criterion):
    t0 = time.perf_counter()
    report = verify_kernel_properties(samples=100_000, grid=10_000, rng=np.random.default_rng(SEED))
    elapsed = time.perf_counter() - t0
    ok = all(r["passed"] for r in report.values()) and elapsed < 5
    detail = ", ".join(f"P{p} margin {r['margin']:.2e}" for p, r in sorted(report.items()))
    criterion(1, "kernel properties 1-4", ok, f"{detail}; {elapsed:.2f}s (< 5s)")


def _grad_instances():
    n = 50
    for field in (REAL, COMPLEX):
        for variant in ("dense", "cdp"):
            rng = make_rng(SEED, ex.stream_id("grad", field, variant))
            model = (build_gaussian_model(6 * n, n, field, rng) if variant == "dense"
                     else build_cdp_model(n, 6, rng, field=field))
            x = rng.standard_normal(n) + (1j * rng.standard_normal(n) if field == COMPLEX else 0)
            yield field, variant, model, observe(model, x), x, rng


def test_02_gradient_finite_differences(criterion):
    t0 = time.perf_counter()
    worst, near_zero_min, failures, points = 0.0, np.inf, 0, 0
    for field, variant, model, obs, x, rng in _grad_instances():
        for objective in (SAF(), WF()):
            for p in range(100):
                z = x + rng.standard_normal(model.n) * (0.2 + p / 100)
                if field == COMPLEX:
                    z = z + 1j * rng.standard_normal(model.n) * (0.2 + p / 100)
                if isinstance(objective, SAF) and p % 2 == 0:
                    z = near_zero_point(model, z, int(rng.integers(model.m)), offset=10 ** rng.uniform(-8, -4))
                    near_zero_min = min(near_zero_min, np.min(np.abs(model.forward(z))))
                g = grad(objective, model, obs, z)
                fd = fd_gradient(lambda v: loss(objective, model, obs, v), z)
                rel = np.linalg.norm(g - fd) / np.linalg.norm(g)
                worst = max(worst, rel)
                failures += rel >= 1e-6
                points += 1
    elapsed = time.perf_counter() - t0
    ok = failures == 0 and near_zero_min < 1e-3 and elapsed < 30
    criterion(2, "gradient vs central differences", ok,
              f"{points} points, worst rel. error {worst:.2e} (< 1e-6), smallest |a'z| tested "
              f"{near_zero_min:.1e}; {elapsed:.1f}s (< 30s)")


def test_03_recovery_rates(criterion):
    t0 = time.perf_counter()
    targets = {(REAL, 2.2): 0.95, (REAL, 3.0): 1.0, (COMPLEX, 3.2): 0.95, (COMPLEX, 4.0): 1.0}
    rates = {}
    for field in (REAL, COMPLEX):
        ratios = tuple(r for f, r in targets if f == field)
        spec = ex.ExperimentSpec(kind=ex.SUCCESS_SWEEP, n=100, field=field, ratios=ratios, trials=50, seed=SEED)
        for (_, ratio), rate in ex.summarize_success(ex.run_success_sweep(spec)).items():
            rates[(field, ratio)] = rate
    elapsed = time.perf_counter() - t0
    ok = all(rates[k] >= v for k, v in targets.items()) and elapsed < 600
    detail = ", ".join(f"{f} m/n={r}: {rates[(f, r)]:.0%} (>= {v:.0%})" for (f, r), v in targets.items())
    criterion(3, "success rates, n=100", ok, f"{detail}; {elapsed:.0f}s")


def test_04_initialization_quality(criterion):
    t0 = time.perf_counter()
    n, errs = 200, []
    for trial in range(100):
        rng = make_rng(SEED, ex.stream_id("init", trial))
        x = rng.standard_normal(n)
        model = build_gaussian_model(8 * n, n, REAL, rng)
        z0 = initialize(model, observe(model, x), rng)
        errs.append(dist_up_to_phase(z0, x) / np.linalg.norm(x))
    elapsed = time.perf_counter() - t0
    frac = float(np.mean(np.array(errs) < 0.3))
    criterion(4, "initialisation error < 0.3 at m=8n", frac >= 0.9 and elapsed < 60,
              f"{frac:.0%} of 100 trials (>= 90%), median rel. error {np.median(errs):.3f}; {elapsed:.1f}s")


def test_05_basin_convergence(criterion):
    n, good, iters = 100, 0, []
    for trial in range(50):
        rng = make_rng(SEED, ex.stream_id("basin", trial))
        x = rng.standard_normal(n)
        model = build_gaussian_model(10 * n, n, REAL, rng)
        h = rng.standard_normal(n)
        z0 = x + h / np.linalg.norm(h) * np.linalg.norm(x) / 20
        cfg = SolverConfig(mode=FIXED_STEP, mu=0.1, T=2000, stop_grad_tol=0.0, stop_nmse_tol=1e-10)
        _, trace = run(model, observe(model, x), cfg, z0, truth=x)
        dist = np.sqrt(trace.nmse)
        monotone = bool(np.all(np.diff(dist) <= 0))
        good += monotone and trace.nmse[-1] < 1e-10
        iters.append(trace.iterations)
    criterion(5, "fixed-step basin convergence", good >= 0.95 * 50,
              f"{good}/50 monotone and NMSE < 1e-10 (>= 95%), mean {np.mean(iters):.0f} iterations")


def test_06_noise_slope(criterion):
    spec = ex.ExperimentSpec(kind=ex.SNR_SWEEP, n=100, ratios=(4.0,), snrs=(20, 30, 40, 50), trials=50, seed=SEED)
    rows = ex.run_snr_sweep(spec)
    slope = ex.snr_slope(rows, "saf", 4.0)
    med = ex.summarize_snr(rows)
    curve = ", ".join(f"{int(k[2])}dB {v:.2e}" for k, v in sorted(med.items(), key=lambda kv: kv[0][2]))
    criterion(6, "log10 median NMSE vs SNR slope", abs(slope + 0.1) <= 0.02,
              f"slope {slope:.4f}/dB (target -0.1 +- 0.02); medians {curve}")


def test_07_saf_vs_af(criterion):
    spec = ex.ExperimentSpec(kind=ex.TIMING_BENCH, n=100, ratios=(2.0,), trials=100, seed=SEED,
                             algorithms=("saf", "af"))
    rows = ex.run_timing_bench(spec)
    by = {(r.algorithm, r.trial): r for r in rows}
    saf_ok = sum(by[("saf", t)].success for t in range(100))
    af_ok = sum(by[("af", t)].success for t in range(100))
    joint = [t for t in range(100) if by[("saf", t)].nmse <= ex.BENCH_NMSE and by[("af", t)].nmse <= ex.BENCH_NMSE]
    faster = sum(by[("saf", t)].iterations < by[("af", t)].iterations for t in joint)
    share = faster / len(joint) if joint else float("nan")
    ok = saf_ok >= af_ok and len(joint) > 0 and share >= 0.7
    criterion(7, "SAF vs AF on paired instances, m/n=2", ok,
              f"successes SAF {saf_ok} vs AF {af_ok}; jointly successful pairs {len(joint)}, "
              f"SAF fewer iterations in {faster} ({share:.0%}, need >= 70% of a non-empty set)")


def test_08_cdp_image(criterion):
    t0 = time.perf_counter()
    spec5 = ex.ExperimentSpec(kind=ex.CDP_IMAGE, masks=(5,), image_shape=(64, 64), trials=20, seed=SEED,
                              T=500, success_nmse=1e-10)
    _, rows5 = ex.run_cdp_image(spec5)
    spec3 = ex.ExperimentSpec(kind=ex.CDP_IMAGE, masks=(3,), image_shape=(64, 64), trials=20, seed=SEED,
                              success_nmse=1e-6)
    _, rows3 = ex.run_cdp_image(spec3)
    k5 = sum(r.rel_error < 1e-5 and r.iterations <= 500 for r in rows5)
    k3 = sum(r.rel_error < 1e-3 for r in rows3)
    criterion(8, "CDP recovery of a 64x64 image", k5 >= 16 and k3 >= 10,
              f"K=5: {k5}/20 below 1e-5 within 500 iterations (>= 16); K=3: {k3}/20 below 1e-3 (>= 10); "
              f"{time.perf_counter() - t0:.0f}s")


def test_09_local_gradient_bounds(criterion):
    n, norm_ok, corr_ok = 100, 0, 0
    for s in range(200):
        rng = make_rng(SEED, ex.stream_id("local", s))
        x = rng.standard_normal(n)
        model = build_gaussian_model(10 * n, n, REAL, rng)
        h = rng.standard_normal(n)
        h *= np.linalg.norm(x) / 20 / np.linalg.norm(h)
        g = saf_grad(model, observe(model, x), x + h)
        norm_ok += np.linalg.norm(g) <= 1.2 * np.linalg.norm(h)
        corr_ok += np.dot(g, h) >= 0.05 * np.dot(h, h)
    criterion(9, "local gradient bounds", norm_ok >= 190 and corr_ok >= 190,
              f"||grad|| <= 1.2||h|| in {norm_ok}/200, <grad,h> >= 0.05||h||^2 in {corr_ok}/200 (>= 190 each)")


def test_10_reproducible_csv(criterion, tmp_path):
    runs = {
        "sweep": lambda out: ex.run_success_sweep(ex.ExperimentSpec(
            kind=ex.SUCCESS_SWEEP, n=50, ratios=(2.5, 3.0), trials=3, algorithms=("saf", "af", "wf"), out=out)),
        "snr": lambda out: ex.run_snr_sweep(ex.ExperimentSpec(
            kind=ex.SNR_SWEEP, n=50, snrs=(20, 40, float("inf")), trials=3, out=out)),
        "bench": lambda out: ex.run_timing_bench(ex.ExperimentSpec(
            kind=ex.TIMING_BENCH, n=50, field=COMPLEX, trials=3, out=out)),
        "cdp": lambda out: ex.run_cdp_image(ex.ExperimentSpec(
            kind=ex.CDP_IMAGE, image_shape=(32, 32), masks=(3, 5), trials=2, out=out)),
    }
    same = {}
    for name, fn in runs.items():
        a, b = tmp_path / f"{name}_a.csv", tmp_path / f"{name}_b.csv"
        fn(str(a))
        fn(str(b))
        same[name] = a.read_bytes() == b.read_bytes() and len(a.read_bytes()) > 0
    criterion(10, "byte-identical CSV on rerun", all(same.values()),
              ", ".join(f"{k} {'identical' if v else 'DIFFERS'}" for k, v in same.items()))
