//! Subcommand implementations: argument validation, library calls, timing,
//! and the exit-code decisions. All dB→linear conversion happens here.

use crate::emit::{self, sci, BenchRow, CdfRow, OutageRow};
use crate::{BenchArgs, CdfArgs, Failure, HknArgs, ModelArgs, OutageArgs, ValidateArgs};
use std::time::Instant;
use wishart_hgm::cdf::{
    cdf_largest_eig_grid, spectrum_from_k, CdfMethod, CdfOptions, MimoConfig, Spectrum,
};
use wishart_hgm::hgm::{hgm_x, hgm_x_enhanced, make_ic, IcProvenance, RkOptions};
use wishart_hgm::hkn::{hkn_quadrature, hkn_series, HknParams};
use wishart_hgm::oracle::empirical_cdf;
use wishart_hgm::specfun::SeriesControl;
use wishart_hgm::ScaledReal;

fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

fn parse_method(s: &str) -> Result<CdfMethod, Failure> {
    match s {
        "quad" => Ok(CdfMethod::Quadrature),
        _ => CdfMethod::parse(s).map_err(|_| {
            Failure::Usage(format!(
                "unknown method '{s}' (expected series, quad, hgm, or hgm-enhanced)"
            ))
        }),
    }
}

/// Inclusive linear grid `lo:hi:n`; `positive` additionally demands lo > 0.
fn parse_grid(text: &str, what: &str, positive: bool) -> Result<Vec<f64>, Failure> {
    let parts: Vec<&str> = text.split(':').collect();
    let usage = || Failure::Usage(format!("{what} must be lo:hi:n, got '{text}'"));
    if parts.len() != 3 {
        return Err(usage());
    }
    let lo: f64 = parts[0].parse().map_err(|_| usage())?;
    let hi: f64 = parts[1].parse().map_err(|_| usage())?;
    let n: usize = parts[2].parse().map_err(|_| usage())?;
    if !lo.is_finite() || !hi.is_finite() || n == 0 {
        return Err(usage());
    }
    if positive && !(lo > 0.0) {
        return Err(Failure::Usage(format!(
            "{what} must start above zero, got {lo}"
        )));
    }
    if n == 1 {
        return Ok(vec![lo]);
    }
    if !(hi > lo) {
        return Err(Failure::Usage(format!(
            "{what} needs hi > lo for n ≥ 2, got '{text}'"
        )));
    }
    let step = (hi - lo) / (n - 1) as f64;
    Ok((0..n)
        .map(|i| if i == n - 1 { hi } else { lo + step * i as f64 })
        .collect())
}

/// Resolve the spectrum and K-factor from the two accepted forms. With
/// explicit eigenvalues the K-factor follows from the trace identity
/// Σλ = K·N_T·N_R of the uncorrelated Rician model.
fn build_model(
    m: &ModelArgs,
    gamma_b: f64,
    gamma_th: f64,
) -> Result<(Spectrum, MimoConfig), Failure> {
    let (spec, k_factor) = match (&m.lambdas, &m.shape, m.k_db) {
        (Some(l), None, None) => {
            let spec = Spectrum::from_unordered(l.clone())?;
            let k = spec.sum() / (f64::from(m.nt) * f64::from(m.nr));
            (spec, k)
        }
        (None, Some(shape), Some(k_db)) => {
            let k = db_to_linear(k_db);
            (spectrum_from_k(shape, k, m.nt, m.nr)?, k)
        }
        (None, Some(_), None) => {
            return Err(Failure::Usage("--shape requires --k-db".into()));
        }
        _ => {
            return Err(Failure::Usage(
                "provide either --lambdas or --shape with --k-db".into(),
            ));
        }
    };
    let cfg = MimoConfig::new(m.nt, m.nr, k_factor, gamma_b, gamma_th)?;
    if spec.len() != cfg.s() {
        return Err(Failure::Model(format!(
            "spectrum has {} eigenvalues but min(N_T, N_R) = {}",
            spec.len(),
            cfg.s()
        )));
    }
    Ok((spec, cfg))
}

// ---------------------------------------------------------------------------
// hkn
// ---------------------------------------------------------------------------

pub fn run_hkn(a: &HknArgs) -> Result<i32, Failure> {
    let method = parse_method(&a.method)?;
    if !(a.eps > 0.0) || !a.eps.is_finite() {
        return Err(Failure::Usage(format!(
            "--eps must be positive and finite, got {}",
            a.eps
        )));
    }
    if !(a.x >= 0.0) || !a.x.is_finite() {
        return Err(Failure::Model(format!(
            "x must be nonnegative and finite, got {}",
            a.x
        )));
    }
    if !(a.lambda >= 0.0) || !a.lambda.is_finite() {
        return Err(Failure::Model(format!(
            "lambda must be nonnegative and finite, got {}",
            a.lambda
        )));
    }
    let p = HknParams::new(a.k, a.n)?;

    // The integral from 0 to 0 is zero for every method.
    if a.x == 0.0 {
        print_hkn(ScaledReal::zero(), method, 0, "0");
        return Ok(0);
    }

    match method {
        CdfMethod::Series => {
            let ctl = SeriesControl {
                eps: a.eps,
                ..SeriesControl::default()
            };
            let r = hkn_series(p, a.x, a.lambda, &ctl);
            print_hkn(r.value, method, r.n_terms_or_steps, &sci(r.abs_err_estimate));
            if !r.converged {
                return Err(Failure::Numerical(format!(
                    "series for H^{}_{}({:e}, {:e}) stalled after {} shells \
                     (cancellation exceeds native precision); last partial {}",
                    a.k,
                    a.n,
                    a.x,
                    a.lambda,
                    r.n_terms_or_steps,
                    r.value.to_sci_string(10)
                )));
            }
        }
        CdfMethod::Quadrature => {
            let r = hkn_quadrature(p, a.x, a.lambda, a.eps);
            print_hkn(r.value, method, r.n_terms_or_steps, &sci(r.abs_err_estimate));
            if !r.converged {
                return Err(Failure::Numerical(format!(
                    "adaptive quadrature for H^{}_{}({:e}, {:e}) did not reach \
                     tolerance {:e} after {} panels",
                    a.k, a.n, a.x, a.lambda, a.eps, r.n_terms_or_steps
                )));
            }
        }
        CdfMethod::Hgm => {
            let opts = RkOptions {
                rel_tol: a.eps,
                ..RkOptions::default()
            };
            let x0 = 1e-2f64.min(a.x * 0.5);
            let r = hgm_x(a.k, a.n, a.lambda, x0, a.x, &opts)?;
            let err = r.value.abs().mul(&ScaledReal::from_f64(10.0 * a.eps));
            print_hkn(
                r.value,
                method,
                r.trajectory.steps_taken,
                &err.to_sci_string(2),
            );
        }
        CdfMethod::HgmEnhanced => {
            let opts = RkOptions {
                rel_tol: a.eps,
                ..RkOptions::default()
            };
            let x0 = a.x * 0.81;
            let ic = make_ic(a.k, a.n, a.lambda, x0, IcProvenance::Quadrature)?;
            let r = hgm_x_enhanced(a.k, a.n, a.lambda, &ic, a.x, &opts)?;
            let err = r.value.abs().mul(&ScaledReal::from_f64(10.0 * a.eps));
            print_hkn(
                r.value,
                method,
                r.trajectory.steps_taken,
                &err.to_sci_string(2),
            );
        }
    }
    Ok(0)
}

fn print_hkn(value: ScaledReal, method: CdfMethod, steps: usize, abs_err: &str) {
    println!("value = {}", value.to_sci_string(10));
    println!("method = {}", method.name());
    println!("steps = {steps}");
    println!("abs_err = {abs_err}");
}

// ---------------------------------------------------------------------------
// cdf
// ---------------------------------------------------------------------------

pub fn run_cdf(a: &CdfArgs) -> Result<i32, Failure> {
    let method = parse_method(&a.method)?;
    let xs = match (a.x, &a.x_grid) {
        (Some(x), None) => vec![x],
        (None, Some(g)) => parse_grid(g, "--x-grid", true)?,
        _ => {
            return Err(Failure::Usage(
                "provide exactly one of --x or --x-grid".into(),
            ));
        }
    };
    let (spec, cfg) = build_model(&a.model, 1.0, 1.0)?;
    let opts = CdfOptions::default();
    let started = Instant::now();
    let results = cdf_largest_eig_grid(&xs, &spec, &cfg, method, &opts)?;
    // Grid evaluation shares trajectories across points, so per-row time is
    // reported as the amortized total.
    let wall_ms = started.elapsed().as_secs_f64() * 1e3 / xs.len() as f64;
    let rows: Vec<CdfRow> = results
        .iter()
        .map(|r| CdfRow {
            x: r.x,
            cdf: r.value,
            abs_err: r.abs_err_estimate,
            method: r.method.name(),
            wall_ms,
            cancellation: r.cancellation,
        })
        .collect();
    emit::write_cdf(&rows, &a.out, a.out_file.as_deref())?;
    Ok(0)
}

// ---------------------------------------------------------------------------
// outage
// ---------------------------------------------------------------------------

pub fn run_outage(a: &OutageArgs) -> Result<i32, Failure> {
    let method = parse_method(&a.method)?;
    if a.emit_plot && (a.out != "csv" || a.out_file.is_none()) {
        return Err(Failure::Usage(
            "--emit-plot needs --out csv and --out-file so the script has a data file to reference"
                .into(),
        ));
    }
    let gamma_db = parse_grid(&a.gamma_b_db_grid, "--gamma-b-db-grid", false)?;
    let gamma_th = db_to_linear(a.gamma_th_db);
    let (spec, cfg) = build_model(&a.model, 1.0, gamma_th)?;

    // x = (K+1)·Γ_th/Γ_b is strictly decreasing in Γ_b; evaluate the whole
    // sweep as one ascending grid so trajectory methods share their work.
    let xs_desc: Vec<f64> = gamma_db
        .iter()
        .map(|&db| (cfg.k_factor + 1.0) * gamma_th / db_to_linear(db))
        .collect();
    let mut xs_asc: Vec<f64> = xs_desc.clone();
    xs_asc.reverse();
    let opts = CdfOptions::default();
    let results = cdf_largest_eig_grid(&xs_asc, &spec, &cfg, method, &opts)?;
    let rows: Vec<OutageRow> = gamma_db
        .iter()
        .enumerate()
        .map(|(i, &db)| {
            let r = &results[results.len() - 1 - i];
            OutageRow {
                gamma_b_db: db,
                x: r.x,
                outage: r.value,
                abs_err: r.abs_err_estimate,
            }
        })
        .collect();
    emit::write_outage(&rows, &a.out, a.out_file.as_deref())?;
    if a.emit_plot {
        let csv = a.out_file.as_deref().expect("checked above");
        emit::write_outage_plot(csv)?;
    }
    Ok(0)
}

// ---------------------------------------------------------------------------
// validate
// ---------------------------------------------------------------------------

pub fn run_validate(a: &ValidateArgs) -> Result<i32, Failure> {
    let method = parse_method(&a.method)?;
    let (spec, cfg) = build_model(&a.model, 1.0, 1.0)?;
    let analytic = cdf_largest_eig(&spec, &cfg, a.x, method)?;
    let mc = empirical_cdf(a.x, &spec, &cfg, a.samples, a.seed)?;
    let z = if mc.std_err > 0.0 {
        (mc.p_hat - analytic) / mc.std_err
    } else if mc.p_hat == analytic {
        0.0
    } else {
        f64::INFINITY * (mc.p_hat - analytic).signum()
    };
    println!("analytic = {}", sci(analytic));
    println!("mc_estimate = {}", sci(mc.p_hat));
    println!("std_err = {}", sci(mc.std_err));
    println!("z = {}", sci(z));
    println!("samples = {}", mc.n_samples);
    println!("seed = {}", a.seed);
    println!("method = {}", method.name());
    if z.abs() <= 3.0 {
        Ok(0)
    } else {
        Err(Failure::Numerical(format!(
            "analytic value {} and Monte-Carlo estimate {} disagree by {:.2} standard errors",
            sci(analytic),
            sci(mc.p_hat),
            z.abs()
        )))
    }
}

fn cdf_largest_eig(
    spec: &Spectrum,
    cfg: &MimoConfig,
    x: f64,
    method: CdfMethod,
) -> Result<f64, Failure> {
    let r = wishart_hgm::cdf::cdf_largest_eig(x, spec, cfg, method, &CdfOptions::default())?;
    Ok(r.value)
}

// ---------------------------------------------------------------------------
// bench
// ---------------------------------------------------------------------------

struct BenchCase {
    n_t: u32,
    n_r: u32,
    lambdas: Vec<f64>,
    xs: Vec<f64>,
}

fn suite_cases(suite: &str) -> Result<Vec<BenchCase>, Failure> {
    let linspace = |lo: f64, hi: f64, n: usize| -> Vec<f64> {
        (0..n)
            .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
            .collect()
    };
    match suite {
        "small" => Ok(vec![
            BenchCase {
                n_t: 2,
                n_r: 2,
                lambdas: vec![1.0, 2.0],
                xs: linspace(1.0, 15.0, 6),
            },
            BenchCase {
                n_t: 2,
                n_r: 3,
                lambdas: vec![1.5, 3.7],
                xs: linspace(1.0, 15.0, 6),
            },
        ]),
        "moderate" => Ok((5..=9)
            .map(|t| {
                let m = t as f64 + 1.5;
                BenchCase {
                    n_t: 5,
                    n_r: t,
                    lambdas: vec![0.1, 0.2, 0.3, 0.4, 0.5],
                    xs: linspace(0.3 * m, 1.6 * m, 10),
                }
            })
            .collect()),
        "large" => Ok(vec![BenchCase {
            n_t: 10,
            n_r: 10,
            lambdas: (1..=10).map(f64::from).collect(),
            xs: (0..6).map(|i| 10f64.powf(1.3 + 0.1 * i as f64)).collect(),
        }]),
        _ => Err(Failure::Usage(format!(
            "unknown suite '{suite}' (expected small, moderate, or large)"
        ))),
    }
}

pub fn run_bench(a: &BenchArgs) -> Result<i32, Failure> {
    let mut methods = Vec::new();
    for m in &a.methods {
        let parsed = parse_method(m)?;
        if !methods.contains(&parsed) {
            methods.push(parsed);
        }
    }
    if methods.is_empty() {
        return Err(Failure::Usage("--methods must name at least one method".into()));
    }
    let cases = suite_cases(&a.suite)?;
    let opts = CdfOptions::default();
    let mut rows = Vec::new();
    for case in &cases {
        let spec = Spectrum::from_unordered(case.lambdas.clone())?;
        let k = spec.sum() / (f64::from(case.n_t) * f64::from(case.n_r));
        let cfg = MimoConfig::new(case.n_t, case.n_r, k, 1.0, 1.0)?;
        // Accuracy is judged against the adaptive-quadrature column, the
        // baseline that stays valid across the whole suite range.
        let reference: Vec<f64> =
            cdf_largest_eig_grid(&case.xs, &spec, &cfg, CdfMethod::Quadrature, &opts)?
                .iter()
                .map(|r| r.value)
                .collect();
        for &method in &methods {
            let started = Instant::now();
            let results = cdf_largest_eig_grid(&case.xs, &spec, &cfg, method, &opts)?;
            let wall_ms = started.elapsed().as_secs_f64() * 1e3;
            let max_rel_dev = results
                .iter()
                .zip(&reference)
                .map(|(r, &want)| (r.value - want).abs() / want.abs().max(1e-12))
                .fold(0.0f64, f64::max);
            rows.push(BenchRow {
                suite: a.suite.clone(),
                n_t: case.n_t,
                n_r: case.n_r,
                method: method.name(),
                wall_ms,
                max_rel_dev,
                points: case.xs.len(),
            });
        }
    }
    emit::write_bench(&rows, &a.out, a.out_file.as_deref())?;
    Ok(0)
}
