"""Exit criteria, each at its stated tolerance; one summary line per criterion."""
import time
from fractions import Fraction

import numpy as np
import pytest
from scipy import integrate

from modisp import admissibility as A
from modisp import models as Mo
from modisp import occupation as O
from modisp import resonance as R
from modisp import solver as S
from modisp.pathgen import FbmParams, generate_brownian, generate_deterministic, generate_fbm

pytestmark = pytest.mark.acceptance


def test_criterion_1_identities(acceptance_log):
    t0 = time.perf_counter()
    results = {name: R.factorization_check(name, K) for name, K in
               [("kdv_3k0k1k2", 100), ("mkdv_triple_product", 40), ("nls_quadratic", 100)]}
    elapsed = time.perf_counter() - t0
    ok = all(results.values()) and elapsed < 10
    acceptance_log(1, ok, f"identities {results}, {elapsed:.2f} s (limit 10 s)")
    assert ok


def test_criterion_2_nonresonance(acceptance_log):
    t0 = time.perf_counter()
    cases = [(Mo.fkdv(1), 64), (Mo.fkdv(2), 64), (Mo.fkdv(4), 64), (Mo.ilw(), 64),
             (Mo.smith(), 64), (Mo.wick_mkdv(2), 24), (Mo.wick_fnls(3), 24)]
    reports = [R.verify_bound(spec, K) for spec, K in cases]
    elapsed = time.perf_counter() - t0
    bad = {r.model: r.violations[:3] for r in reports if r.violations}
    ok = not bad and elapsed < 60
    cs = ", ".join(f"{r.model} c={r.c_best:.3g}" for r in reports)
    acceptance_log(2, ok, f"violations {bad or 'none'}; {cs}; {elapsed:.1f} s (limit 60 s)")
    assert ok


def test_criterion_3_admissibility(acceptance_log):
    rng = np.random.default_rng(2024)
    worst = 0.0
    mismatches = []
    for _ in range(20):
        a = Fraction(int(rng.integers(1, 400)), int(rng.integers(1, 100)))
        s = Fraction(int(rng.integers(-300, 300)), int(rng.integers(1, 100)))
        rb = A.rho_bounds_nonresonant(A.ProblemParams((a, 1), (1, 0, 0), s))
        vals = {c.value for c in rb.constraints}
        expected = {1 / a, -2 * s / a, (Fraction(3, 2) - s) / (a + 1)}
        # the only extra constraint allowed is the redundant family-3 base case
        if not expected <= vals or not vals - expected <= {-2 * s / (a + 1)} \
                or rb.inf_rho != max(expected):
            mismatches.append((a, s))
        worst = max(worst, abs(float(rb.inf_rho - max(expected))))
    for _ in range(10):
        gamma = Fraction(int(rng.integers(500, 1001)), 1000)
        s = Fraction(int(rng.integers(200, 500)), 1000)
        rb = A.rho_bounds_for_model(Mo.wick_mkdv(2), s, gamma=gamma)
        fam1 = [c.value for c in rb.constraints if c.tag == "family 1*"][0]
        err = abs(float(fam1 - (2 + (2 - gamma) * (1 - 2 * s))))
        worst = max(worst, err)
        if err > 1e-12:
            mismatches.append((gamma, s))
    ok = not mismatches and worst <= 1e-12
    acceptance_log(3, ok, f"30 exact instances, max deviation {worst:.1e}, mismatches {mismatches}")
    assert ok


def test_criterion_4_occupation(acceptance_log):
    t0 = time.perf_counter()
    bins = np.array([8, 16, 32, 64, 128, 256])
    errs = []
    for seed in range(12):
        p = generate_brownian(1.0, 2**18 + 1, seed)
        row = []
        for nb in bins:
            lhs, rhs = O.occupation_formula_check(p, 0, 1, np.square, int(nb))
            row.append(abs(lhs - rhs))
        errs.append(row)
    pooled = np.mean(errs, axis=0)
    order = -np.polyfit(np.log(bins), np.log(pooled), 1)[0]

    def quad_oracle(path, xi):
        def part(r, j):
            z = np.exp(1j * xi * np.interp(r, path.times, path.values))
            return z.real if j == 0 else z.imag

        return sum(integrate.quad(part, a, b, args=(j,), epsabs=1e-15, epsrel=1e-13)[0] * (1j ** j)
                   for a, b in zip(path.times[:-1], path.times[1:]) for j in (0, 1))

    quad_err = 0.0
    mod_ok = True
    for seed, H in [(0, 0.2), (1, 0.5), (2, 0.8)]:
        p = generate_fbm(FbmParams(H, 1.0, 65, seed))
        for xi in (0.5, 7.0, 60.0):
            quad_err = max(quad_err, abs(O.oscillatory_integral(p, 0, 1, xi) - quad_oracle(p, xi)))
        fine = generate_fbm(FbmParams(H, 1.0, 4097, seed))
        xi = np.linspace(-2000, 2000, 801)
        for s, t in [(0, 1), (0.1, 0.2), (0.5, 0.5001), (0.3, 0.95)]:
            mod_ok &= bool(np.all(np.abs(O.oscillatory_integral(fine, s, t, xi))
                                  <= (t - s) * (1 + 1e-12)))
    elapsed = time.perf_counter() - t0
    ok = 1.7 <= order <= 2.3 and quad_err <= 1e-10 and mod_ok and elapsed < 30
    acceptance_log(4, ok, f"refinement order {order:.3f} (target 2), quadrature error {quad_err:.1e}, "
                          f"|Phi| <= t-s: {mod_ok}, {elapsed:.1f} s (limit 30 s)")
    assert ok


def test_criterion_5_irregularity(acceptance_log):
    lin = generate_deterministic(1.0, 1.0, 2**16 + 1)
    rep = O.estimate_irregularity(lin, 0.5, xi_grid=O.default_xi_grid(2.0**14))
    bounded = rep.sup_ratio_at(0.5, 2.0**14) / rep.sup_ratio_at(0.5, 2.0**10)
    growth = rep.sup_ratio_at(0.8, 2.0**14) / rep.sup_ratio_at(0.8, 2.0**10)
    ok_a = bounded <= 1.1 and growth >= 10
    breakdowns = []
    for seed in range(20):
        p = generate_fbm(FbmParams(0.5, 1.0, 2**16 + 1, seed))
        r = O.estimate_irregularity(p, 0.5, xi_grid=O.resolved_xi_grid(p, 0.5))
        breakdowns.append(r.breakdown_rho)
    med = float(np.median(breakdowns))
    ok_b = 0.7 <= med <= 1.3
    acceptance_log(5, ok_a and ok_b,
                   f"W=t: rho=0.5 ratio change {bounded:.3f} (bounded), rho=0.8 growth {growth:.2f}x "
                   f"for 16x xi_max (required >= 10x; the exact limit is 16^0.3 = 2.30x); "
                   f"fBm H=0.5 median breakdown {med:.3f} over 20 seeds (band [0.7, 1.3])")
    assert ok_b, f"fBm median breakdown {med}"
    assert ok_a, f"W=t growth {growth:.3f}x < 10x"


def test_criterion_6_oracle(acceptance_log):
    t0 = time.perf_counter()
    rng = np.random.default_rng(6)
    N = 8
    k = S.wavenumbers(N)
    path = generate_deterministic(1.0, 1.0, 4001)
    worst = 0.0
    for spec in Mo.catalog():
        cfg = S.SimConfig(spec, N, 1e-3, 1.0, path)
        for _ in range(50):
            v = rng.normal(size=2 * N + 1) + 1j * rng.normal(size=2 * N + 1)
            if spec.is_real:
                v = 0.5 * (v + np.conj(v[::-1]))
            if spec.zero_mean_required:
                v[N] = 0
            t = float(rng.uniform(0, 1))
            phase = np.exp(-1j * t * spec.symbol(k))
            want = -np.conj(phase) * Mo.apply_nonlinearity_smalln(spec, phase * v, N)
            got = S.rhs(S.SpectralState(v, N, t, spec.field_type), t, cfg)
            worst = max(worst, np.abs(got - want).max() / max(1.0, np.abs(want).max()))
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-10 and elapsed < 60
    acceptance_log(6, ok, f"11 models x 50 states, max relative deviation {worst:.1e}, "
                          f"{elapsed:.1f} s (limit 60 s)")
    assert ok


def test_criterion_7_conservation(acceptance_log):
    mean_drift = 0.0
    for a in (1, 2, 4):
        path = generate_fbm(FbmParams(0.3, 0.1, 4001, a))
        cfg = S.SimConfig(Mo.fkdv(a), 32, 1e-4, 0.1, path,
                          S.InitialData("random_hs", amplitude=0.3, s=0.5, seed=a))
        mean = S.run(cfg).log.arrays()[1]
        mean_drift = max(mean_drift, float(np.abs(mean - mean[0]).max()))
    path = generate_fbm(FbmParams(0.3, 0.5, 20001, 7))
    drifts = {}
    cancel = 0.0
    for spec in (Mo.wick_mkdv(2), Mo.wick_fnls(3)):
        cfg = S.SimConfig(spec, 64, 1e-4, 0.5, path, S.InitialData("cosine", amplitude=1.0),
                          diagnostics_every=100)
        res = S.run(cfg)
        l2 = np.array(res.log.l2)
        drifts[spec.name] = float(np.abs(l2 / l2[0] - 1).max())
        for st in res.states:
            scale = max(1.0, np.abs(st.coeffs).max()) ** 4 * 64
            cancel = max(cancel, S.resonant_cancellation_check(spec, st) / scale)
    ok = mean_drift <= 1e-13 and max(drifts.values()) <= 1e-6 and cancel <= 1e-14
    acceptance_log(7, ok, f"mean drift {mean_drift:.1e}; relative L2 drift "
                          + ", ".join(f"{k} {v:.1e}" for k, v in drifts.items())
                          + f"; resonant cancellation {cancel:.1e}")
    assert ok


def test_criterion_8_convergence(acceptance_log):
    spec = Mo.fkdv(2)
    dts = [4e-3, 2e-3, 1e-3]
    ref = dts[-1] / 8
    lin = generate_deterministic(1.0, 0.1, int(round(0.1 / (ref / 4))) + 1)
    cfg = S.SimConfig(spec, 32, dts[0], 0.1, lin, S.InitialData("cosine", amplitude=1.0),
                      keep_states=False)
    _, order = S.self_convergence(cfg, dts, ref)
    rough = generate_fbm(FbmParams(0.3, 0.1, lin.times.size, 1))
    _, rough_order = S.self_convergence(S.SimConfig(spec, 32, dts[0], 0.1, rough, cfg.initial,
                                                    keep_states=False), dts, ref)
    diffs = {}
    for seed in (0, 1, 2):
        path = generate_fbm(FbmParams(0.2, 0.1, 8001, seed))
        init = S.InitialData("random_hs", amplitude=0.3, s=-0.25, eps=0.1, seed=seed)
        gcfg = S.SimConfig(spec, 16, 5e-5, 0.1, path, init, keep_states=False)
        diffs[seed] = [float(S.galerkin_pair(gcfg, N, 2, s=-0.25).diff[-1]) for N in (16, 32, 64)]
    decreasing = all(d[0] > d[1] > d[2] for d in diffs.values())
    ok = abs(order - 4.0) <= 0.3 and decreasing
    acceptance_log(8, ok, f"RK4 order {order:.3f} on W=t; fBm H=0.3 measured order {rough_order:.2f}; "
                          "Galerkin H^-1/4 differences N=16/32/64: "
                          + "; ".join(f"seed {k}: " + "/".join(f"{x:.3g}" for x in v)
                                      for k, v in diffs.items()))
    assert ok
