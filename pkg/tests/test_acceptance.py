"""Acceptance gate: eight end-to-end criteria, one verdict line each.

Every test gathers its sub-checks, registers a single PASS/FAIL line via
the acceptance_line fixture (echoed after the run by conftest.py), and
then asserts, so a failed criterion is both visible and red.
"""

import math
import time

import numpy as np

from modcrb import (
    SensingSnr,
    TargetPolar,
    WavefrontModel,
    boresight_far_range_bound,
    build_layout,
    crb_boresight,
    crb_boresight_far,
    crb_hspm_dist,
    fd_derivatives,
    intermediates_hspm,
    optimal_spread,
    preset,
    radial_terms,
    read_csv,
    relative_error,
    run_layout_sweep,
    run_range_sweep,
    steering_derivatives,
    verify_batch,
    write_csv,
)
from modcrb.cli import main


def _finish(record, num, name, checks):
    """Register one verdict line, then fail the test if any check failed."""
    failed = [f"{label} ({detail})" for label, ok, detail in checks if not ok]
    if failed:
        line = f"ACCEPTANCE {num} ({name}): FAIL — " + "; ".join(failed)
    else:
        notes = "; ".join(detail for _, _, detail in checks if detail)
        line = f"ACCEPTANCE {num} ({name}): PASS — {notes}"
    record(line)
    assert not failed, line


def _symmetric_layout(rng, min_subarrays=1):
    choices = [k for k in (1, 3, 5, 7) if k >= min_subarrays]
    num_sub = int(rng.choice(choices))
    size = int(rng.integers(1, 13)) * 2 + 1
    half = [int(g) for g in rng.integers(1, 50, size=num_sub // 2)]
    gaps = tuple(half) + (0,) + tuple(reversed(half))
    pitch = float(rng.uniform(1e-3, 1e-2))
    return build_layout(num_sub, size, gaps, pitch)


def _pair_error(a, b):
    return max(relative_error(a.crb_r, b.crb_r),
               relative_error(a.crb_theta, b.crb_theta))


def test_criterion_1_oracle_equivalence(acceptance_line):
    start = time.perf_counter()
    summary = verify_batch(num_cases=500, seed=7, tol_analytic=1e-9, tol_fd=1e-4)
    elapsed = time.perf_counter() - start
    worst_an = max(summary.max_rel_err_analytic.values())
    worst_fd = max(summary.max_rel_err_fd.values())
    checks = [
        ("500-case batch within tolerance", summary.passed,
         f"worst analytic {worst_an:.2e}, worst fd {worst_fd:.2e}"),
        ("runtime < 30 s", elapsed < 30.0, f"{elapsed:.1f} s"),
    ]
    _finish(acceptance_line, 1, "oracle equivalence", checks)


def test_criterion_2_boresight_specialization(acceptance_line):
    start = time.perf_counter()
    cfg = preset("fig3")
    snr = cfg.snr()
    rng = np.random.default_rng(2)
    layouts = [build_layout(cfg.num_subarrays, cfg.subarray_size,
                            cfg.spacings, cfg.pitch)]
    layouts += [_symmetric_layout(rng) for _ in range(30)]
    worst = 0.0
    for lay in layouts:
        for _ in range(3):
            tgt = TargetPolar(float(rng.uniform(2.0, 80.0)), 0.0)
            specialized = crb_boresight(lay, tgt, cfg.wavelength, snr)
            general = crb_hspm_dist(lay, tgt, cfg.wavelength, snr)
            worst = max(worst, _pair_error(specialized, general))

    reference = layouts[0]
    aperture = reference.aperture
    devs = []
    flagged = True
    for mult in (10, 20, 50, 100):
        tgt = TargetPolar(mult * aperture, 0.0)
        exact = crb_boresight(reference, tgt, cfg.wavelength, snr)
        far = crb_boresight_far(reference, tgt, cfg.wavelength, snr)
        devs.append(abs(far.crb_theta - exact.crb_theta) / exact.crb_theta)
        flagged = flagged and math.isinf(far.crb_r) and "degenerate" in far.flags
    elapsed = time.perf_counter() - start
    checks = [
        ("specialized form matches the general bound at boresight",
         worst <= 1e-10, f"worst rel {worst:.2e} over 31 layouts"),
        ("asymptotic angle deviation shrinks with range",
         all(b < a for a, b in zip(devs, devs[1:])),
         "devs " + ", ".join(f"{d:.1e}" for d in devs)),
        ("asymptotic angle deviation < 1% at 100x aperture",
         devs[-1] < 0.01, f"{devs[-1]:.2e}"),
        ("asymptotic range form reports its degenerate denominator",
         flagged, "inf + degenerate flag at every range"),
        ("runtime < 5 s", elapsed < 5.0, f"{elapsed:.1f} s"),
    ]
    _finish(acceptance_line, 2, "boresight specialization", checks)


def test_criterion_3_boresight_cross_sums_vanish(acceptance_line):
    rng = np.random.default_rng(3)
    worst = 0.0
    for _ in range(100):
        lay = _symmetric_layout(rng, min_subarrays=3)
        tgt = TargetPolar(float(rng.uniform(2.0, 80.0)), 0.0)
        inter = intermediates_hspm(lay, tgt)
        scale_p = float(np.sum(np.abs(
            radial_terms(lay.subarray_x, tgt.r, tgt.theta)["dr_dt"])))
        worst = max(
            worst,
            abs(inter.p_tilde) / scale_p,
            abs(inter.q_hat) / math.sqrt(inter.q * inter.q_tilde),
            abs(inter.z_hat) / math.sqrt(inter.z * inter.z_tilde),
        )
    checks = [
        ("scaled cross sums vanish on 100 mirror-symmetric layouts",
         worst <= 1e-12, f"worst {worst:.2e}"),
    ]
    _finish(acceptance_line, 3, "boresight cross-term cancellation", checks)


def test_criterion_4_range_sweep_orderings(acceptance_line):
    start = time.perf_counter()
    records = run_range_sweep(preset("fig3"))
    by_model = {}
    for rec in records:
        by_model.setdefault(rec.model, []).append(rec)

    monotone = True
    for recs in by_model.values():
        rr = [rec.crb_r_m2 for rec in recs]
        tt = [rec.crb_theta_rad2 for rec in recs]
        monotone = monotone and all(b >= a for a, b in zip(rr, rr[1:]))
        monotone = monotone and all(b <= a for a, b in zip(tt, tt[1:]))

    worst_gap = max(
        abs(d.crb_r_m2 - s.crb_r_m2) / s.crb_r_m2
        for d, s in zip(by_model["hspm-dist"], by_model["swm"])
        if d.sweep_value >= 38.44)
    ordered = all(d.crb_r_m2 < s.crb_r_m2 for d, s in
                  zip(by_model["hspm-dist"], by_model["hspm-shared"]))
    pwm_r_inf = all(math.isinf(rec.crb_r_m2) for rec in by_model["pwm"])
    pwm_theta = [rec.crb_theta_rad2 for rec in by_model["pwm"]]
    pwm_const = (max(pwm_theta) - min(pwm_theta)) / min(pwm_theta)
    elapsed = time.perf_counter() - start
    checks = [
        ("range bound nondecreasing, angle bound nonincreasing per model",
         monotone, "all 4 models over 56 points"),
        ("subarray-wise range bound tracks the exact one beyond 38.44 m",
         worst_gap <= 0.05, f"worst gap {worst_gap:.2%}"),
        ("distinct arrival angles beat the shared-angle bound everywhere",
         ordered, "56/56 points"),
        ("planar model: range bound inf, angle bound flat",
         pwm_r_inf and pwm_const <= 1e-12, f"angle spread {pwm_const:.2e}"),
        ("runtime < 10 s", elapsed < 10.0, f"{elapsed:.1f} s"),
    ]
    _finish(acceptance_line, 4, "range-sweep orderings", checks)


def test_criterion_5_gap_sweep_orderings(acceptance_line):
    start = time.perf_counter()
    checks = []
    argmax_inner = None
    for name, uniform_gamma, expect_aperture in (("fig4-c1", 50, 1.425),
                                                 ("fig4-c2", 75, 1.675)):
        cfg = preset(name)
        dist = [rec for rec in run_layout_sweep(cfg) if rec.model == "hspm-dist"]
        gammas = [int(rec.sweep_value) for rec in dist]

        worst_ap = 0.0
        for gamma in gammas:
            outer = cfg.gap_budget - gamma
            lay = build_layout(cfg.num_subarrays, cfg.subarray_size,
                               (outer, gamma, 0, gamma, outer), cfg.pitch)
            worst_ap = max(worst_ap, abs(lay.aperture - expect_aperture))
        checks.append((f"{name} aperture pinned at {expect_aperture} m",
                       worst_ap <= 1e-12 * expect_aperture,
                       f"max dev {worst_ap:.2e} m"))

        tt = [rec.crb_theta_rad2 for rec in dist]
        checks.append((f"{name} angle bound strictly decreasing in the inner gap",
                       all(b < a for a, b in zip(tt, tt[1:])),
                       f"{tt[0]:.3e} -> {tt[-1]:.3e}"))

        rr = {gamma: rec.crb_r_m2 for gamma, rec in zip(gammas, dist)}
        checks.append((f"{name} range bound at gamma=95 below uniform "
                       f"gamma={uniform_gamma}",
                       rr[95] < rr[uniform_gamma],
                       f"{rr[95]:.3f} vs {rr[uniform_gamma]:.3f}"))
        if name == "fig4-c2":
            peak = max(gammas, key=rr.get)
            argmax_inner = gammas[0] < peak < gammas[-1]
            checks.append(("fig4-c2 range bound peaks strictly inside the sweep",
                           argmax_inner, f"argmax at gamma={peak}"))
    elapsed = time.perf_counter() - start
    checks.append(("runtime < 10 s", elapsed < 10.0, f"{elapsed:.1f} s"))
    _finish(acceptance_line, 5, "gap-sweep orderings", checks)


def test_criterion_6_spread_optimum(acceptance_line):
    start = time.perf_counter()
    snr = SensingSnr.from_db(0.0)
    checks = []
    for num_sub, size, pitch in ((3, 3, 0.0025), (5, 75, 0.0025), (7, 11, 0.01)):
        limit = num_sub * (size * size - 1) * pitch**2 / 3.0
        grid = np.linspace(0.0, limit, 202)[1:-1]
        vals = [boresight_far_range_bound(s, num_sub, size, pitch,
                                          100.0, 0.005, snr) for s in grid]
        best = grid[int(np.argmin(vals))]
        expected = optimal_spread(num_sub, size, pitch)
        cell = grid[1] - grid[0]
        checks.append((f"K={num_sub} M={size} d={pitch} scan brackets the optimum",
                       abs(best - expected) <= cell,
                       f"|{best:.4e} - {expected:.4e}| <= {cell:.1e}"))
    elapsed = time.perf_counter() - start
    checks.append(("runtime < 1 s", elapsed < 1.0, f"{elapsed:.2f} s"))
    _finish(acceptance_line, 6, "spread optimum location", checks)


def test_criterion_7_derivative_convergence(acceptance_line):
    start = time.perf_counter()
    wavelength = 0.5
    lay = build_layout(3, 5, (3, 0, 3), wavelength / 2)
    tgt = TargetPolar(40.0, 0.7)
    steps = (2e-3, 1e-3, 5e-4)
    checks = []
    for model in WavefrontModel:
        analytic = steering_derivatives(model, lay, tgt, wavelength)
        errs = []
        for h in steps:
            fd = fd_derivatives(model, lay, tgt, wavelength, h_r=h, h_theta=h)
            parts = [np.max(np.abs(fd.d_theta - analytic.d_theta))
                     / np.max(np.abs(analytic.d_theta))]
            if model is not WavefrontModel.PWM:  # its range derivative is 0
                parts.append(np.max(np.abs(fd.d_r - analytic.d_r))
                             / np.max(np.abs(analytic.d_r)))
            errs.append(max(parts))
        ratios = [errs[i] / errs[i + 1] for i in range(len(errs) - 1)]
        checks.append((f"{model.value} halving ratio in [3.6, 4.4]",
                       all(3.6 <= q <= 4.4 for q in ratios),
                       "ratios " + ", ".join(f"{q:.2f}" for q in ratios)))
    elapsed = time.perf_counter() - start
    checks.append(("runtime < 5 s", elapsed < 5.0, f"{elapsed:.1f} s"))
    _finish(acceptance_line, 7, "second-order derivative convergence", checks)


def test_criterion_8_serialization_contract(acceptance_line, tmp_path, capsys):
    records = run_range_sweep(preset("fig3"))
    first = tmp_path / "first.csv"
    second = tmp_path / "second.csv"
    write_csv(records, str(first))
    write_csv(run_range_sweep(preset("fig3")), str(second))
    lossless = read_csv(str(first)) == records
    identical = first.read_bytes() == second.read_bytes()

    ok_pass = main(["verify", "--cases", "3", "--seed", "5"]) == 0
    ok_fail = main(["verify", "--cases", "3", "--seed", "5",
                    "--tol-analytic", "1e-18"]) == 1
    capsys.readouterr()
    checks = [
        ("CSV round-trip lossless", lossless, "224 records"),
        ("byte-identical rewrite", identical, f"{first.stat().st_size} bytes"),
        ("verify exit codes 0/1", ok_pass and ok_fail, "pass and forced-fail runs"),
    ]
    _finish(acceptance_line, 8, "serialization contract", checks)
