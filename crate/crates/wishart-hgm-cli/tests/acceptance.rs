//! Acceptance suite: one test per shipped guarantee, each asserting the
//! stated tolerance and printing a PASS line with the measured margin
//! (visible with `--nocapture`). Test 5 reproduces the full astronomical
//! noncentrality case and is `#[ignore]`d by default; run it with
//! `cargo test --test acceptance -- --ignored`.

use std::time::Instant;
use wishart_hgm::cdf::{
    cdf_largest_eig, cdf_largest_eig_grid, CdfMethod, CdfOptions, MimoConfig, Spectrum,
};
use wishart_hgm::hgm::{hgm_lambda, hgm_x, hgm_x_multi, RkOptions};
use wishart_hgm::hkn::{hkn_quadrature, hkn_series, HknParams};
use wishart_hgm::oracle::empirical_cdf;
use wishart_hgm::pfaffian::{apply_gauge, build_p4, build_q4, gauge_g2, gauge_g3, phi_system};
use wishart_hgm::specfun::{of1, regularized_gamma_p, SeriesControl};

fn rel_dev(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

/// Deterministic space-filling points in [lo, hi]² (golden-ratio sequence).
fn quasi_points(count: usize, lo: f64, hi: f64) -> Vec<(f64, f64)> {
    let span = hi - lo;
    (1..=count)
        .map(|i| {
            let u = (i as f64 * 0.618_033_988_749_894_9).fract();
            let v = (i as f64 * 0.414_213_562_373_095_1).fract();
            (lo + span * u, lo + span * v)
        })
        .collect()
}

// ---------------------------------------------------------------------------
// 1. Moderate-case table regression: (10,10), λ = {1..10}
// ---------------------------------------------------------------------------

#[test]
fn acceptance_1_moderate_table_regression() {
    let started = Instant::now();
    // 30-digit multiprecision evaluation of the closed form (quadrature of
    // the positive integrand plus exact-prefactor determinant; verified
    // independently by 3·10⁷-sample channel simulation, z = −1.2).
    const REFERENCE_30: [f64; 6] = [
        5.17982397103e-11,
        1.36359621513e-6,
        2.02161485803e-3,
        1.48227493145e-1,
        7.81133471487e-1,
        9.95208024749e-1,
    ];
    // Values reported elsewhere for this configuration. Their rows at
    // log₁₀x ≤ 1.6 carry up to ~0.7% self-error (the 30-digit column above
    // is the converged truth), so they are checked at 1e-2 while the live
    // cross-checks run at the 1e-3 target.
    const REPORTED: [f64; 6] = [5.21756e-11, 1.36963e-6, 0.0020352, 0.14857, 0.781594, 0.995231];

    let spec = Spectrum::from_unordered((1..=10).map(f64::from).collect()).unwrap();
    let cfg = MimoConfig::new(10, 10, 0.55, 1.0, 1.0).unwrap();
    let xs: Vec<f64> = (0..6).map(|i| 10f64.powf(1.3 + 0.1 * i as f64)).collect();
    let opts = CdfOptions {
        rk: RkOptions {
            rel_tol: 1e-13,
            ..RkOptions::default()
        },
        series_eps: 1e-13,
        ..CdfOptions::default()
    };
    let hgm = cdf_largest_eig_grid(&xs, &spec, &cfg, CdfMethod::Hgm, &opts).unwrap();
    let quad = cdf_largest_eig_grid(&xs, &spec, &cfg, CdfMethod::Quadrature, &opts).unwrap();

    let mut worst_truth = 0.0f64;
    let mut worst_cross = 0.0f64;
    let mut worst_reported = 0.0f64;
    for i in 0..6 {
        worst_truth = worst_truth.max(rel_dev(hgm[i].value, REFERENCE_30[i]));
        worst_cross = worst_cross.max(rel_dev(hgm[i].value, quad[i].value));
        worst_reported = worst_reported.max(rel_dev(hgm[i].value, REPORTED[i]));
    }
    assert!(worst_truth < 1e-3, "HGM vs 30-digit reference: {worst_truth:.2e}");
    assert!(worst_cross < 1e-3, "HGM vs quadrature: {worst_cross:.2e}");
    assert!(worst_reported < 1e-2, "HGM vs reported table: {worst_reported:.2e}");
    let secs = started.elapsed().as_secs_f64();
    assert!(secs < 60.0, "runtime {secs:.1}s exceeds 60s budget");
    println!(
        "PASS [1/8] moderate-case table: HGM within {worst_truth:.1e} of 30-digit reference \
         (≤1e-3), {worst_cross:.1e} of quadrature (≤1e-3), {worst_reported:.1e} of the \
         reported digits (≤1e-2), in {secs:.2}s"
    );
}

// ---------------------------------------------------------------------------
// 2. Series breakdown: convergent at moderate argument, stall at (30,30)
// ---------------------------------------------------------------------------

#[test]
fn acceptance_2_series_breakdown() {
    let p = HknParams::new(2, 3).unwrap();
    let ctl = SeriesControl {
        eps: 1e-10,
        ..SeriesControl::default()
    };
    let mut max_terms = 0usize;
    for i in 0..=44 {
        let v = 1.2 + 0.2 * i as f64;
        let r = hkn_series(p, v, v, &ctl);
        assert!(r.converged, "series must converge at x = λ = {v}");
        assert!(
            r.n_terms_or_steps <= 48,
            "x = λ = {v} took {} shells",
            r.n_terms_or_steps
        );
        assert!(r.value.sign() > 0);
        max_terms = max_terms.max(r.n_terms_or_steps);
    }
    let stalled = hkn_series(p, 30.0, 30.0, &ctl);
    assert!(
        !stalled.converged,
        "native-double truncation must stall at x = λ = 30"
    );
    assert!(stalled.abs_err_estimate.is_infinite());
    println!(
        "PASS [2/8] series breakdown: ≤{max_terms} shells over x = λ ∈ [1.2, 10] \
         (≤48), stall detected at (30, 30) after {} shells",
        stalled.n_terms_or_steps
    );
}

// ---------------------------------------------------------------------------
// 3. Stability contrast: λ-direction drifts, φ-direction stays put
// ---------------------------------------------------------------------------

#[test]
fn acceptance_3_stability_contrast() {
    let started = Instant::now();
    let opts = RkOptions {
        rel_tol: 1e-12,
        ..RkOptions::default()
    };

    // 4-D noncentrality-direction transport from λ₀ = 1e-5 at x = 1: the
    // companion system carries a faster-growing spurious mode, so the result
    // must deviate >10% from quadrature somewhere in λ ∈ (10, 50].
    let mut worst_drift = 0.0f64;
    for lambda in [15.0, 20.0, 30.0, 40.0, 50.0] {
        let r = hgm_lambda(2, 3, 1.0, 1e-5, lambda, &opts).unwrap();
        worst_drift = worst_drift.max(r.divergence.expect("λ driver measures divergence"));
    }
    assert!(
        worst_drift > 0.10,
        "λ-direction transport drifted only {worst_drift:.2e}"
    );

    // 3-D φ-direction transport: within 1e-6 of quadrature on the whole
    // 10×10 grid λ ∈ [0.1, 50] × x ∈ [1, 100].
    let phi_opts = RkOptions {
        rel_tol: 1e-10,
        ..RkOptions::default()
    };
    let lambdas: Vec<f64> = (0..10)
        .map(|i| 0.1 * (50.0f64 / 0.1).powf(i as f64 / 9.0))
        .collect();
    let xs: Vec<f64> = (0..10).map(|i| 100.0f64.powf(i as f64 / 9.0)).collect();
    let p = HknParams::new(2, 3).unwrap();
    let mut worst_phi = 0.0f64;
    for &lambda in &lambdas {
        let along = hgm_x_multi(2, 3, lambda, 1e-2, &xs, &phi_opts).unwrap();
        for (j, &x) in xs.iter().enumerate() {
            let want = hkn_quadrature(p, x, lambda, 1e-12);
            assert!(want.converged);
            // Both values are native here (ln|H| ≤ ~160), so compare in f64.
            let dev = rel_dev(along[j].to_f64(), want.value.to_f64());
            worst_phi = worst_phi.max(dev);
        }
    }
    assert!(worst_phi < 1e-6, "φ-direction dev {worst_phi:.2e} vs quadrature");
    let secs = started.elapsed().as_secs_f64();
    assert!(secs < 300.0, "runtime {secs:.1}s exceeds 5min budget");
    println!(
        "PASS [3/8] stability contrast: λ-direction drifts {worst_drift:.2} (> 0.10) while \
         φ-direction stays within {worst_phi:.1e} (≤1e-6) on the 10×10 grid, in {secs:.1}s"
    );
}

// ---------------------------------------------------------------------------
// 4. Scaled large-noncentrality case vs Monte-Carlo
// ---------------------------------------------------------------------------

#[test]
fn acceptance_4_scaled_large_noncentrality_vs_monte_carlo() {
    let started = Instant::now();
    let lambdas = vec![0.4e5, 0.8e5, 1.2e5, 1.6e5, 2.0e5];
    let k_factor = lambdas.iter().sum::<f64>() / 25.0;
    let spec = Spectrum::from_unordered(lambdas).unwrap();
    let cfg = MimoConfig::new(5, 5, k_factor, 1.0, 1.0).unwrap();
    let opts = CdfOptions::default();

    // Bisect the enhanced-HGM CDF for a target quantile. The distribution of
    // the largest eigenvalue concentrates in an O(√λ_max) window around its
    // median here, so the comparison points are placed by quantile (0.30 to
    // 0.70) rather than by a fixed relative offset — that keeps every point
    // resolvable by a 10⁵-sample empirical CDF.
    let cdf_at = |x: f64| -> f64 {
        cdf_largest_eig(x, &spec, &cfg, CdfMethod::HgmEnhanced, &opts)
            .unwrap()
            .value
    };
    let quantile = |q: f64| -> f64 {
        let (mut lo, mut hi) = (1.5e5, 3.5e5);
        assert!(cdf_at(lo) < q && cdf_at(hi) > q, "quantile bracket");
        while hi - lo > 1e-4 * hi {
            let mid = 0.5 * (lo + hi);
            if cdf_at(mid) < q {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    };
    let (x_lo, median, x_hi) = (quantile(0.30), quantile(0.50), quantile(0.70));

    // Five points spanning [x_lo, x_hi]: two below the median, one at it,
    // two above.
    let xs: Vec<f64> = (0..5)
        .map(|i| x_lo + (x_hi - x_lo) * i as f64 / 4.0)
        .collect();
    let analytic = cdf_largest_eig_grid(&xs, &spec, &cfg, CdfMethod::HgmEnhanced, &opts).unwrap();
    let mut worst_z = 0.0f64;
    for (i, (&x, a)) in xs.iter().zip(&analytic).enumerate() {
        let mc = empirical_cdf(x, &spec, &cfg, 100_000, 41 + i as u64).unwrap();
        let z = (mc.p_hat - a.value) / mc.std_err;
        assert!(
            z.abs() <= 3.0,
            "x = {x:.4e}: analytic {:.6} vs MC {:.6} ± {:.1e} gives z = {z:.2}",
            a.value,
            mc.p_hat,
            mc.std_err
        );
        worst_z = worst_z.max(z.abs());
    }
    let secs = started.elapsed().as_secs_f64();
    assert!(secs < 900.0, "runtime {secs:.1}s exceeds 15min budget");
    println!(
        "PASS [4/8] scaled large-noncentrality: enhanced HGM vs 10⁵-sample MC at 5 points \
         around the median {median:.5e}, worst |z| = {worst_z:.2} (≤3), in {secs:.1}s"
    );
}

// ---------------------------------------------------------------------------
// 5. Full-scale reproduction (long-running; ignored by default)
// ---------------------------------------------------------------------------

#[test]
#[ignore = "full astronomical-noncentrality case; run with -- --ignored"]
fn acceptance_5_full_scale_reproduction() {
    let started = Instant::now();
    let lambdas = vec![0.4e8, 0.8e8, 1.2e8, 1.6e8, 2.0e8];
    let x = 2.0000e8;
    let opts = CdfOptions::default();

    let spec5 = Spectrum::from_unordered(lambdas.clone()).unwrap();
    let sum: f64 = lambdas.iter().sum();
    let cfg55 = MimoConfig::new(5, 5, sum / 25.0, 1.0, 1.0).unwrap();
    let p55 = cdf_largest_eig(x, &spec5, &cfg55, CdfMethod::HgmEnhanced, &opts)
        .unwrap()
        .value;
    assert!(
        (p55 - 0.49958230).abs() < 1e-3,
        "(5,5) at x = 2e8: {p55:.8} vs 0.49958230"
    );

    let cfg57 = MimoConfig::new(5, 7, sum / 35.0, 1.0, 1.0).unwrap();
    let p57 = cdf_largest_eig(x, &spec5, &cfg57, CdfMethod::HgmEnhanced, &opts)
        .unwrap()
        .value;
    assert!(
        (p57 - 0.49954438).abs() < 1e-3,
        "(5,7) at x = 2e8: {p57:.8} vs 0.49954438"
    );

    let mc = empirical_cdf(x, &spec5, &cfg55, 1_000_000, 4242).unwrap();
    let dev = (mc.p_hat - 0.499458).abs();
    assert!(
        dev <= 3.0 * mc.std_err,
        "MC {:.6} ± {:.1e} vs 0.499458",
        mc.p_hat,
        mc.std_err
    );
    println!(
        "PASS [5/8] full-scale: (5,5) {p55:.8} (target 0.49958230), (5,7) {p57:.8} \
         (target 0.49954438) within 1e-3 abs; 10⁶-sample MC {:.6} within 3σ of 0.499458; \
         {:.0}s",
        mc.p_hat,
        started.elapsed().as_secs_f64()
    );
}

// ---------------------------------------------------------------------------
// 6. Invariant suite
// ---------------------------------------------------------------------------

#[test]
fn acceptance_6_invariants() {
    // (a) CDF monotone nondecreasing and inside [−1e-4, 1+1e-4] on the
    // default cases.
    let cases: [(u32, u32, Vec<f64>, f64); 4] = [
        (2, 2, vec![1.0, 2.0], 20.0),
        (2, 3, vec![1.5, 3.7], 25.0),
        (3, 3, vec![1.0, 2.0, 3.0], 30.0),
        (5, 7, vec![0.1, 0.2, 0.3, 0.4, 0.5], 18.0),
    ];
    let opts = CdfOptions::default();
    for (nt, nr, lambdas, x_hi) in &cases {
        let k = lambdas.iter().sum::<f64>() / f64::from(nt * nr);
        let spec = Spectrum::from_unordered(lambdas.clone()).unwrap();
        let cfg = MimoConfig::new(*nt, *nr, k, 1.0, 1.0).unwrap();
        let xs: Vec<f64> = (0..16).map(|i| 0.4 + (x_hi - 0.4) * i as f64 / 15.0).collect();
        for method in [CdfMethod::Quadrature, CdfMethod::Hgm] {
            let rows = cdf_largest_eig_grid(&xs, &spec, &cfg, method, &opts).unwrap();
            let mut prev = -1.0f64;
            for r in &rows {
                assert!(
                    (-1e-4..=1.0 + 1e-4).contains(&r.value),
                    "({nt},{nr}) {} at x={}: {} outside bounds",
                    method.name(),
                    r.x,
                    r.value
                );
                assert!(
                    r.value >= prev - 1e-12,
                    "({nt},{nr}) {} not monotone at x={}",
                    method.name(),
                    r.x
                );
                prev = r.value;
            }
        }
    }

    // (b) Derivative identity ∂H/∂x = x^k e^{−x}·₀F₁(;n;λx): a five-point
    // central difference of quadrature values of H against the closed-form
    // right side, residual < 1e-6 relative at 50 deterministic points with
    // x, λ ≤ 20. The wide stencil (δ = 10⁻³x) keeps the difference above the
    // quadrature noise floor even where the CDF has saturated and ∂H/∂x is
    // tiny relative to H.
    let p23 = HknParams::new(2, 3).unwrap();
    let of1_ctl = SeriesControl {
        eps: 1e-14,
        max_terms: 100_000,
    };
    let mut worst_fd = 0.0f64;
    for (x, lambda) in quasi_points(50, 0.5, 20.0) {
        let h = |t: f64| -> f64 {
            let r = hkn_quadrature(p23, t, lambda, 1e-13);
            assert!(r.converged, "quadrature at ({t},{lambda})");
            r.value.to_f64()
        };
        let d = x * 1e-3;
        let fd = (8.0 * (h(x + d) - h(x - d)) - (h(x + 2.0 * d) - h(x - 2.0 * d)))
            / (12.0 * d);
        let (of1_val, _) = of1(3, lambda * x, &of1_ctl).unwrap();
        let rhs = x * x * (-x).exp() * of1_val;
        worst_fd = worst_fd.max((fd - rhs).abs() / rhs);
    }
    assert!(worst_fd < 1e-6, "derivative-identity residual {worst_fd:.2e}");

    // (c) Full integrability of the pair (P, Q): ∂_λP − ∂_xQ + PQ − QP = 0,
    // finite differences at 100 points, residual ≤ 1e-6 of the term scale.
    let mut worst_frob = 0.0f64;
    for (x, lambda) in quasi_points(100, 0.5, 20.0) {
        let p = build_p4(x, lambda, 2, 3).unwrap();
        let q = build_q4(x, lambda, 2, 3).unwrap();
        let dl = lambda * 1e-5;
        let dp_dl = build_p4(x, lambda + dl, 2, 3)
            .unwrap()
            .sub(&build_p4(x, lambda - dl, 2, 3).unwrap())
            .scale(1.0 / (2.0 * dl));
        let dx = x * 1e-5;
        let dq_dx = build_q4(x + dx, lambda, 2, 3)
            .unwrap()
            .sub(&build_q4(x - dx, lambda, 2, 3).unwrap())
            .scale(1.0 / (2.0 * dx));
        let residual = dp_dl.sub(&dq_dx).add(&p.mul(&q)).sub(&q.mul(&p));
        let scale = dp_dl.max_norm() + dq_dx.max_norm() + p.mul(&q).max_norm() + 1.0;
        worst_frob = worst_frob.max(residual.max_norm() / scale);
    }
    assert!(worst_frob < 1e-6, "integrability residual {worst_frob:.2e}");

    // (d) Gauge round-trips: G·G⁻¹ = 1 and conjugating a system forward and
    // back reproduces its coefficient matrix to 1e-10.
    let mut worst_gauge = 0.0f64;
    for psi in [0.3, 1.0, 5.0] {
        for phi in [0.5, 2.0, 10.0] {
            for gauge in [gauge_g2(psi), gauge_g3(psi)] {
                let g = gauge.g_at(phi).unwrap();
                let gi = gauge.inverted().g_at(phi).unwrap();
                let eye = g.mul(&gi);
                let mut dev = 0.0f64;
                for r in 0..eye.dim {
                    for c in 0..eye.dim {
                        let want = if r == c { 1.0 } else { 0.0 };
                        dev = dev.max((eye.a[r][c] - want).abs());
                    }
                }
                let base = phi_system(2, 3, psi);
                let there = apply_gauge(&base, &gauge);
                let back = apply_gauge(&there, &gauge.inverted());
                let a = base.matrix_at(phi).unwrap();
                let b = back.matrix_at(phi).unwrap();
                dev = dev.max(a.sub(&b).max_norm() / a.max_norm().max(1.0));
                worst_gauge = worst_gauge.max(dev);
            }
        }
    }
    assert!(worst_gauge < 1e-10, "gauge round-trip {worst_gauge:.2e}");

    // (e) hgm_x is anchor-point invariant to 1e-8.
    let tight = RkOptions {
        rel_tol: 1e-11,
        ..RkOptions::default()
    };
    let mut worst_x0 = 0.0f64;
    for lambda in [1.0, 5.0] {
        let base = hgm_x(2, 3, lambda, 0.01, 8.0, &tight).unwrap().value.to_f64();
        for x0 in [0.005, 0.05, 0.1] {
            let v = hgm_x(2, 3, lambda, x0, 8.0, &tight).unwrap().value.to_f64();
            worst_x0 = worst_x0.max(rel_dev(v, base));
        }
    }
    assert!(worst_x0 < 1e-8, "anchor-point sensitivity {worst_x0:.2e}");

    println!(
        "PASS [6/8] invariants: bounds+monotone on 4 cases × 2 methods; derivative identity \
         {worst_fd:.1e} (≤1e-6); integrability {worst_frob:.1e} (≤1e-6); gauge round-trip \
         {worst_gauge:.1e} (≤1e-10); anchor invariance {worst_x0:.1e} (≤1e-8)"
    );
}

// ---------------------------------------------------------------------------
// 7. Rank-one reduction to the regularized incomplete gamma
// ---------------------------------------------------------------------------

#[test]
fn acceptance_7_rank_one_gamma_reduction() {
    let opts = CdfOptions::default();
    let mut worst = 0.0f64;
    for t in [3u32, 5] {
        let spec = Spectrum::from_unordered(vec![1e-6]).unwrap();
        let cfg = MimoConfig::new(1, t, 1e-6 / f64::from(t), 1.0, 1.0).unwrap();
        let x_hi = 3.0 * f64::from(t);
        let xs: Vec<f64> = (0..12).map(|i| 0.5 + (x_hi - 0.5) * i as f64 / 11.0).collect();
        let rows = cdf_largest_eig_grid(&xs, &spec, &cfg, CdfMethod::Quadrature, &opts).unwrap();
        for r in &rows {
            let want = regularized_gamma_p(f64::from(t), r.x).unwrap();
            let dev = (r.value - want).abs();
            assert!(
                dev < 1e-4,
                "t = {t}, x = {}: {} vs P({t}, x) = {want}",
                r.x,
                r.value
            );
            worst = worst.max(dev);
        }
    }
    println!(
        "PASS [7/8] rank-one reduction: single-branch CDF within {worst:.1e} abs (≤1e-4) of \
         the regularized incomplete gamma over x ∈ [0.5, 3t], t ∈ {{3, 5}}"
    );
}

// ---------------------------------------------------------------------------
// 8. Benchmark direction: trajectory method beats repeated quadrature
// ---------------------------------------------------------------------------

#[test]
fn acceptance_8_benchmark_direction() {
    let out = std::process::Command::new(env!("CARGO_BIN_EXE_wishart-hgm"))
        .args(["bench", "--suite", "moderate", "--methods", "quad,hgm", "--out", "json"])
        .output()
        .expect("bench runs");
    assert_eq!(out.status.code(), Some(0));
    let report: serde_json::Value =
        serde_json::from_slice(&out.stdout).expect("bench emits valid json");
    let rows = report["rows"].as_array().expect("rows array");
    assert_eq!(rows.len(), 10, "5 antenna pairs × 2 methods");
    let mut summaries = Vec::new();
    for pair in rows.chunks(2) {
        let (a, b) = (&pair[0], &pair[1]);
        assert_eq!(a["n_r"], b["n_r"]);
        let wall = |row: &serde_json::Value, m: &str| {
            assert_eq!(row["method"], m);
            row["wall_ms"].as_f64().unwrap()
        };
        let (t_quad, t_hgm) = (wall(a, "quadrature"), wall(b, "hgm"));
        assert!(
            t_hgm < t_quad,
            "(5,{}) hgm {t_hgm:.2}ms not below quadrature {t_quad:.2}ms",
            a["n_r"]
        );
        summaries.push(format!("(5,{}) {:.1}×", a["n_r"], t_quad / t_hgm));
    }
    println!(
        "PASS [8/8] benchmark direction: trajectory evaluation faster than repeated \
         quadrature on every pair — {}",
        summaries.join(", ")
    );
}
