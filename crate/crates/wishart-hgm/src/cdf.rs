//! Largest-eigenvalue CDF of the complex noncentral Wishart matrix.
//!
//! The distribution function is a determinantal expression: a log-domain
//! prefactor e^{−Σλ} / (∏_{i<j}(λ_i−λ_j) · ((t−s)!)^s) times det Φ(x), where
//! the s×s matrix Φ has entries [Φ]_{i,j} = H^{t−i}_{t−s+1}(x, λ_j). Both
//! factors reach magnitudes like 10^{±10^8} at the arguments of interest, so
//! everything is assembled in sign/log form and only the final CDF value is
//! converted to a native double.
//!
//! In MIMO terms: s = min(N_T, N_R) and t = max(N_T, N_R) antennas, λ the
//! eigenvalues of the noncentrality matrix, and the maximum-ratio-combining
//! outage probability is this CDF evaluated at x = (K+1)·Γ_th/Γ_b.

use crate::error::{Error, Result};
use crate::hgm::{hgm_x_enhanced_multi, hgm_x_multi, make_ic, IcProvenance, RkOptions};
use crate::hkn::{hkn_quadrature, hkn_series, HknParams};
use crate::scaled::{Dd, DetScalar, ScaledReal};
use crate::specfun::{ln_gamma, SeriesControl};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Strictly increasing positive noncentrality eigenvalues.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    lambdas: Vec<f64>,
}

impl Spectrum {
    /// Accepts a strictly increasing list of positive, pairwise distinct
    /// values. A minimum gap below 1e-12·λ_s is rejected as ill-conditioned
    /// rather than silently perturbed: the determinantal formula requires
    /// distinct eigenvalues and a near-degenerate pair poisons the
    /// Vandermonde prefactor.
    pub fn new(lambdas: Vec<f64>) -> Result<Self> {
        if lambdas.is_empty() {
            return Err(Error::Domain("spectrum must be nonempty".into()));
        }
        for &l in &lambdas {
            if !(l > 0.0) || !l.is_finite() {
                return Err(Error::Domain(format!(
                    "spectrum entries must be positive and finite, got {l}"
                )));
            }
        }
        let largest = lambdas[lambdas.len() - 1];
        for w in lambdas.windows(2) {
            if w[1] <= w[0] {
                return Err(Error::Domain(format!(
                    "spectrum must be strictly increasing, got {} after {}",
                    w[1], w[0]
                )));
            }
            if w[1] - w[0] < 1e-12 * largest {
                return Err(Error::IllConditioned(format!(
                    "spectrum gap {:.3e} between {} and {} is below 1e-12 of the \
                     largest eigenvalue; the Vandermonde prefactor is unusable",
                    w[1] - w[0],
                    w[0],
                    w[1]
                )));
            }
        }
        Ok(Spectrum { lambdas })
    }

    /// Sorts the input ascending, then applies the same validation.
    pub fn from_unordered(mut lambdas: Vec<f64>) -> Result<Self> {
        lambdas.sort_by(|a, b| a.partial_cmp(b).expect("NaN rejected below"));
        Self::new(lambdas)
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    pub fn len(&self) -> usize {
        self.lambdas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambdas.is_empty()
    }

    pub fn sum(&self) -> f64 {
        self.lambdas.iter().sum()
    }
}

/// Antenna counts and link parameters of the fading model.
#[derive(Clone, Copy, Debug)]
pub struct MimoConfig {
    pub n_t: u32,
    pub n_r: u32,
    /// Rician K-factor (linear scale).
    pub k_factor: f64,
    /// Average branch SNR Γ_b (linear scale).
    pub gamma_b: f64,
    /// Outage threshold SNR Γ_th (linear scale).
    pub gamma_th: f64,
}

impl MimoConfig {
    pub fn new(n_t: u32, n_r: u32, k_factor: f64, gamma_b: f64, gamma_th: f64) -> Result<Self> {
        if n_t == 0 || n_r == 0 {
            return Err(Error::Domain(
                "antenna counts must be positive integers".into(),
            ));
        }
        if !(k_factor >= 0.0) || !k_factor.is_finite() {
            return Err(Error::Domain(format!(
                "Rician K-factor must be nonnegative and finite, got {k_factor}"
            )));
        }
        if !(gamma_b > 0.0) || !(gamma_th > 0.0) {
            return Err(Error::Domain(
                "SNR parameters must be positive".into(),
            ));
        }
        Ok(MimoConfig {
            n_t,
            n_r,
            k_factor,
            gamma_b,
            gamma_th,
        })
    }

    /// Matrix side s = min(N_T, N_R).
    pub fn s(&self) -> usize {
        self.n_t.min(self.n_r) as usize
    }

    /// Larger antenna count t = max(N_T, N_R).
    pub fn t(&self) -> usize {
        self.n_t.max(self.n_r) as usize
    }
}

/// Which evaluator fills the Φ(x) entries.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CdfMethod {
    Series,
    Quadrature,
    Hgm,
    HgmEnhanced,
}

impl CdfMethod {
    pub fn name(&self) -> &'static str {
        match self {
            CdfMethod::Series => "series",
            CdfMethod::Quadrature => "quadrature",
            CdfMethod::Hgm => "hgm",
            CdfMethod::HgmEnhanced => "hgm-enhanced",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "series" => Ok(CdfMethod::Series),
            "quadrature" => Ok(CdfMethod::Quadrature),
            "hgm" => Ok(CdfMethod::Hgm),
            "hgm-enhanced" => Ok(CdfMethod::HgmEnhanced),
            _ => Err(Error::Domain(format!(
                "unknown method '{s}' (expected series, quadrature, hgm, or hgm-enhanced)"
            ))),
        }
    }
}

/// Significand width for the scaled determinant.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DetPrecision {
    /// Plain doubles (53-bit significands).
    Native,
    /// Paired doubles (~106-bit effective significands) for matrices whose
    /// determinant survives heavy cancellation.
    DoubleDouble,
}

/// Tunables for the CDF pipeline.
#[derive(Clone, Copy, Debug)]
pub struct CdfOptions {
    pub rk: RkOptions,
    /// Relative truncation threshold for series entries.
    pub series_eps: f64,
    /// Tolerance for quadrature entries.
    pub quad_tol: f64,
    /// Anchor point for the plain trajectory method (clamped below the first
    /// evaluation point when necessary).
    pub hgm_x0: f64,
    /// The gauged trajectory method anchors at this fraction of the first
    /// evaluation point, with a quadrature anchor value.
    pub enhanced_anchor_scale: f64,
    pub det_precision: DetPrecision,
    /// Trials for the perturbation error estimate (≥ 10).
    pub err_trials: usize,
    pub err_seed: u64,
}

impl Default for CdfOptions {
    fn default() -> Self {
        CdfOptions {
            rk: RkOptions::default(),
            series_eps: 1e-10,
            quad_tol: 1e-10,
            hgm_x0: 1e-2,
            enhanced_anchor_scale: 0.81,
            det_precision: DetPrecision::DoubleDouble,
            err_trials: 16,
            err_seed: 0x5eed_cafe,
        }
    }
}

impl CdfOptions {
    pub fn validate(&self) -> Result<()> {
        self.rk.validate()?;
        if !(self.series_eps > 0.0) || !(self.quad_tol > 0.0) {
            return Err(Error::Domain(
                "series and quadrature tolerances must be positive".into(),
            ));
        }
        if !(self.hgm_x0 > 0.0) || !self.hgm_x0.is_finite() {
            return Err(Error::Domain(format!(
                "trajectory anchor must be positive, got {}",
                self.hgm_x0
            )));
        }
        if !(self.enhanced_anchor_scale > 0.0 && self.enhanced_anchor_scale < 1.0) {
            return Err(Error::Domain(format!(
                "anchor scale must lie in (0,1), got {}",
                self.enhanced_anchor_scale
            )));
        }
        if self.err_trials < 10 {
            return Err(Error::Domain(format!(
                "error estimation needs at least 10 trials, got {}",
                self.err_trials
            )));
        }
        Ok(())
    }
}

/// The assembled s×s matrix Φ(x) with per-entry accuracy estimates.
#[derive(Clone, Debug)]
pub struct AssembledPhi {
    pub s: usize,
    /// Row-major entries; row i (0-based) holds H^{t−1−i}_{t−s+1}(x, λ_j).
    pub entries: Vec<ScaledReal>,
    /// Estimated relative accuracy of each entry (same layout).
    pub entry_rel_errs: Vec<f64>,
    pub method: CdfMethod,
}

impl AssembledPhi {
    pub fn entry(&self, i: usize, j: usize) -> ScaledReal {
        self.entries[i * self.s + j]
    }
}

/// One CDF evaluation. `value` is the raw assembled number — clamping to
/// [0,1] is left to presentation layers so cancellation stays visible.
#[derive(Clone, Debug)]
pub struct CdfResult {
    pub x: f64,
    pub value: f64,
    pub abs_err_estimate: f64,
    pub method: CdfMethod,
    /// Set when the raw value falls outside [−0.01, 1.01], which signals
    /// catastrophic cancellation in the determinant (tiny CDF tails built
    /// from huge entries).
    pub cancellation: bool,
    pub diagnostics: Vec<String>,
}

impl CdfResult {
    /// The value clamped to [0, 1] for presentation.
    pub fn clamped(&self) -> f64 {
        self.value.clamp(0.0, 1.0)
    }
}

// ---------------------------------------------------------------------------
// Prefactor
// ---------------------------------------------------------------------------

/// Sign and log-magnitude of e^{−Σλ} / (∏_{i<j}(λ_i−λ_j) · ((t−s)!)^s).
///
/// With λ ascending every factor (λ_i−λ_j), i<j, is negative, so the sign is
/// (−1)^{s(s−1)/2}, tracked exactly.
pub fn log_prefactor(spec: &Spectrum, cfg: &MimoConfig) -> Result<ScaledReal> {
    let s = cfg.s();
    let t = cfg.t();
    if spec.len() != s {
        return Err(Error::Domain(format!(
            "spectrum has {} eigenvalues but the configuration needs s = {s}",
            spec.len()
        )));
    }
    let l = spec.lambdas();
    let mut ln_vandermonde = 0.0;
    for j in 1..s {
        for i in 0..j {
            let gap = l[j] - l[i];
            if !(gap > 0.0) {
                return Err(Error::IllConditioned(format!(
                    "degenerate spectrum pair ({}, {})",
                    l[i], l[j]
                )));
            }
            ln_vandermonde += gap.ln();
        }
    }
    let pairs = s * (s - 1) / 2;
    let sign: i8 = if pairs % 2 == 1 { -1 } else { 1 };
    let ln_factorials = s as f64 * ln_gamma((t - s) as f64 + 1.0);
    Ok(ScaledReal::from_ln(
        sign,
        -spec.sum() - ln_vandermonde - ln_factorials,
    ))
}

// ---------------------------------------------------------------------------
// Scaled determinant
// ---------------------------------------------------------------------------

fn lu_det_normalized<T: DetScalar>(mut m: Vec<T>, s: usize) -> (i8, f64) {
    let mut sign: i8 = 1;
    let mut ln_acc = 0.0;
    for col in 0..s {
        let mut pivot_row = col;
        let mut pivot_mag = m[col * s + col].abs_f64();
        for r in (col + 1)..s {
            let mag = m[r * s + col].abs_f64();
            if mag > pivot_mag {
                pivot_mag = mag;
                pivot_row = r;
            }
        }
        if pivot_mag == 0.0 {
            return (0, f64::NEG_INFINITY);
        }
        if pivot_row != col {
            for c in 0..s {
                m.swap(col * s + c, pivot_row * s + c);
            }
            sign = -sign;
        }
        let pivot = m[col * s + col];
        sign *= pivot.signum();
        ln_acc += pivot.ln_abs();
        for r in (col + 1)..s {
            let factor = m[r * s + col].div(pivot);
            for c in (col + 1)..s {
                let delta = factor.mul(m[col * s + c]);
                m[r * s + c] = m[r * s + c].sub(delta);
            }
        }
    }
    (sign, ln_acc)
}

fn lu_dispatch(values: Vec<f64>, s: usize, precision: DetPrecision) -> (i8, f64) {
    match precision {
        DetPrecision::Native => lu_det_normalized::<f64>(values, s),
        DetPrecision::DoubleDouble => {
            let m: Vec<Dd> = values.iter().map(|&v| Dd::from_f64(v)).collect();
            lu_det_normalized::<Dd>(m, s)
        }
    }
}

/// Determinant of an s×s sign/log matrix.
///
/// When every entry fits comfortably in a double, the elimination runs on
/// the raw values so exact inputs stay exact (pivot magnitudes still
/// accumulate in log space). Otherwise each column's largest log-magnitude
/// is factored out first — column scaling never changes the pivot choice —
/// and added back at the end. An exactly singular matrix returns sign 0.
pub fn det_scaled(entries: &[ScaledReal], s: usize, precision: DetPrecision) -> Result<ScaledReal> {
    if s == 0 || entries.len() != s * s {
        return Err(Error::Domain(format!(
            "determinant needs an s×s matrix, got {} entries for s = {s}",
            entries.len()
        )));
    }
    let all_native = entries.iter().all(|e| e.is_zero() || e.is_native());
    let (sign, ln_sig, ln_offset) = if all_native {
        let raw: Vec<f64> = entries.iter().map(|e| e.to_f64()).collect();
        let (sign, ln_sig) = lu_dispatch(raw, s, precision);
        (sign, ln_sig, 0.0)
    } else {
        let mut col_ln = vec![f64::NEG_INFINITY; s];
        for j in 0..s {
            for i in 0..s {
                let e = &entries[i * s + j];
                if !e.is_zero() {
                    col_ln[j] = col_ln[j].max(e.ln_abs());
                }
            }
        }
        if col_ln.contains(&f64::NEG_INFINITY) {
            return Ok(ScaledReal::zero()); // a zero column
        }
        let normalized: Vec<f64> = (0..s * s)
            .map(|idx| {
                let (i, j) = (idx / s, idx % s);
                let e = &entries[i * s + j];
                if e.is_zero() {
                    0.0
                } else {
                    f64::from(e.sign()) * (e.ln_abs() - col_ln[j]).exp()
                }
            })
            .collect();
        let (sign, ln_sig) = lu_dispatch(normalized, s, precision);
        (sign, ln_sig, col_ln.iter().sum::<f64>())
    };
    if sign == 0 {
        return Ok(ScaledReal::zero());
    }
    Ok(ScaledReal::from_ln(sign, ln_sig + ln_offset))
}

// ---------------------------------------------------------------------------
// Matrix assembly
// ---------------------------------------------------------------------------

fn rel_of(abs_err: f64, value: &ScaledReal) -> f64 {
    if value.is_zero() {
        return abs_err;
    }
    if abs_err == 0.0 {
        return 0.0;
    }
    if abs_err.is_finite() {
        ScaledReal::from_f64(abs_err).div(value).to_f64().abs()
    } else {
        f64::INFINITY
    }
}

/// Quantization floor: a value carried as ln V cannot be more accurate than
/// one ulp of its own logarithm.
fn ln_floor(value: &ScaledReal) -> f64 {
    value.ln_abs().abs().max(1.0) * f64::EPSILON
}

fn validate_grid(xs: &[f64]) -> Result<()> {
    if xs.is_empty() {
        return Err(Error::Domain("at least one evaluation point required".into()));
    }
    let mut prev = 0.0;
    for &x in xs {
        if !(x > 0.0) || !x.is_finite() {
            return Err(Error::Domain(format!(
                "evaluation points must be positive and finite, got {x}"
            )));
        }
        if x <= prev {
            return Err(Error::Domain(
                "evaluation points must be strictly increasing".into(),
            ));
        }
        prev = x;
    }
    Ok(())
}

/// Evaluate one Φ entry's H function over the whole grid.
#[allow(clippy::too_many_arguments)]
fn entry_over_grid(
    k: u32,
    n: u32,
    lambda: f64,
    row: usize,
    col: usize,
    xs: &[f64],
    method: CdfMethod,
    opts: &CdfOptions,
) -> Result<Vec<(ScaledReal, f64)>> {
    let p = HknParams::new(k, n)?;
    match method {
        CdfMethod::Series => {
            let ctl = SeriesControl {
                eps: opts.series_eps,
                ..SeriesControl::default()
            };
            xs.iter()
                .map(|&x| {
                    let r = hkn_series(p, x, lambda, &ctl);
                    if !r.converged {
                        return Err(Error::NonConvergence {
                            context: format!(
                                "matrix entry ({}, {}): series for H^{k}_{n}({x:.6e}, \
                                 {lambda:.6e}) stalled",
                                row + 1,
                                col + 1
                            ),
                            partial: r.value.to_f64(),
                            terms: r.n_terms_or_steps,
                        });
                    }
                    Ok((r.value, rel_of(r.abs_err_estimate, &r.value)))
                })
                .collect()
        }
        CdfMethod::Quadrature => xs
            .iter()
            .map(|&x| {
                let r = hkn_quadrature(p, x, lambda, opts.quad_tol);
                if !r.converged {
                    return Err(Error::NonConvergence {
                        context: format!(
                            "matrix entry ({}, {}): quadrature for H^{k}_{n}({x:.6e}, \
                             {lambda:.6e}) did not converge",
                            row + 1,
                            col + 1
                        ),
                        partial: r.value.to_f64(),
                        terms: r.n_terms_or_steps,
                    });
                }
                let rel = rel_of(r.abs_err_estimate, &r.value)
                    .min(1.0)
                    .max(opts.quad_tol.max(ln_floor(&r.value)));
                Ok((r.value, rel))
            })
            .collect(),
        CdfMethod::Hgm => {
            let x0 = opts.hgm_x0.min(xs[0] * 0.5);
            let ic = make_ic(k, n, lambda, x0, IcProvenance::Series)?;
            let anchor_rel = rel_of(ic.est_abs_error, &ic.state[0]);
            let rel = anchor_rel.max(10.0 * opts.rk.rel_tol);
            let values = hgm_x_multi(k, n, lambda, x0, xs, &opts.rk)?;
            Ok(values.into_iter().map(|v| (v, rel)).collect())
        }
        CdfMethod::HgmEnhanced => {
            let x0 = xs[0] * opts.enhanced_anchor_scale;
            let ic = make_ic(k, n, lambda, x0, IcProvenance::Quadrature)?;
            let anchor_rel = rel_of(ic.est_abs_error, &ic.state[0])
                .min(1.0)
                .max(opts.quad_tol.max(ln_floor(&ic.state[0])));
            let rel = anchor_rel.max(10.0 * opts.rk.rel_tol);
            let values = hgm_x_enhanced_multi(k, n, lambda, &ic, xs, &opts.rk)?;
            Ok(values.into_iter().map(|v| (v, rel)).collect())
        }
    }
}

/// Assemble Φ(x) at every grid point. Entries are evaluated independently
/// per (row, column) pair — concurrently across pairs — and the trajectory
/// methods reuse one trajectory per pair for the whole grid.
pub fn assemble_phi_grid(
    xs: &[f64],
    spec: &Spectrum,
    cfg: &MimoConfig,
    method: CdfMethod,
    opts: &CdfOptions,
) -> Result<Vec<AssembledPhi>> {
    opts.validate()?;
    validate_grid(xs)?;
    let s = cfg.s();
    let t = cfg.t();
    if spec.len() != s {
        return Err(Error::Domain(format!(
            "spectrum has {} eigenvalues but the configuration needs s = {s}",
            spec.len()
        )));
    }
    let n = (t - s + 1) as u32;
    let pairs: Vec<(usize, usize)> = (0..s)
        .flat_map(|i| (0..s).map(move |j| (i, j)))
        .collect();
    let per_pair: Vec<Vec<(ScaledReal, f64)>> = pairs
        .par_iter()
        .map(|&(i, j)| {
            let k = (t - 1 - i) as u32;
            entry_over_grid(k, n, spec.lambdas()[j], i, j, xs, method, opts)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut out = Vec::with_capacity(xs.len());
    for xi in 0..xs.len() {
        let mut entries = Vec::with_capacity(s * s);
        let mut rels = Vec::with_capacity(s * s);
        for pi in 0..pairs.len() {
            entries.push(per_pair[pi][xi].0);
            rels.push(per_pair[pi][xi].1);
        }
        out.push(AssembledPhi {
            s,
            entries,
            entry_rel_errs: rels,
            method,
        });
    }
    Ok(out)
}

/// Assemble Φ(x) at a single point.
pub fn assemble_phi(
    x: f64,
    spec: &Spectrum,
    cfg: &MimoConfig,
    method: CdfMethod,
    opts: &CdfOptions,
) -> Result<AssembledPhi> {
    Ok(assemble_phi_grid(&[x], spec, cfg, method, opts)?
        .pop()
        .expect("one grid point in, one matrix out"))
}

// ---------------------------------------------------------------------------
// Error estimate and CDF
// ---------------------------------------------------------------------------

/// Sample standard deviation of the CDF under multiplicative perturbation of
/// every Φ entry by its own estimated relative accuracy (uniform in
/// [−rel, +rel] per entry, independent per trial). Returns +∞ when a
/// perturbed pipeline overflows.
pub fn error_estimate(
    phi: &AssembledPhi,
    prefactor: &ScaledReal,
    trials: usize,
    seed: u64,
    precision: DetPrecision,
) -> Result<f64> {
    if trials < 10 {
        return Err(Error::Domain(format!(
            "error estimation needs at least 10 trials, got {trials}"
        )));
    }
    let s = phi.s;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut samples = Vec::with_capacity(trials);
    let mut perturbed = vec![ScaledReal::zero(); s * s];
    for _ in 0..trials {
        for (idx, e) in phi.entries.iter().enumerate() {
            let rel = phi.entry_rel_errs[idx];
            let factor = if rel == 0.0 {
                1.0
            } else if rel.is_finite() {
                1.0 + rel * rng.gen_range(-1.0..1.0)
            } else {
                f64::NAN
            };
            perturbed[idx] = e.mul(&ScaledReal::from_f64(factor));
        }
        let det = det_scaled(&perturbed, s, precision)?;
        samples.push(prefactor.mul(&det).to_f64());
    }
    if samples.iter().any(|v| !v.is_finite()) {
        return Ok(f64::INFINITY);
    }
    // Center about the first sample so a run of identical determinants yields
    // exactly zero spread instead of accumulated summation roundoff.
    let center = samples[0];
    let mean_c = samples.iter().map(|v| v - center).sum::<f64>() / trials as f64;
    let var = samples
        .iter()
        .map(|v| ((v - center) - mean_c).powi(2))
        .sum::<f64>()
        / (trials - 1) as f64;
    Ok(var.sqrt())
}

fn result_from_phi(
    x: f64,
    phi: &AssembledPhi,
    prefactor: &ScaledReal,
    opts: &CdfOptions,
) -> Result<CdfResult> {
    let det = det_scaled(&phi.entries, phi.s, opts.det_precision)?;
    let raw = prefactor.mul(&det);
    let value = raw.to_f64();
    let err = error_estimate(phi, prefactor, opts.err_trials, opts.err_seed, opts.det_precision)?;
    let mut diagnostics = Vec::new();
    let cancellation = !value.is_finite() || !(-0.01..=1.01).contains(&value);
    if cancellation {
        diagnostics.push(format!(
            "raw value {value:.6e} outside [-0.01, 1.01]: catastrophic cancellation \
             in the determinant; magnitudes: prefactor ln {:.6e}, determinant ln {:.6e}",
            prefactor.ln_abs(),
            det.ln_abs()
        ));
    }
    Ok(CdfResult {
        x,
        value,
        abs_err_estimate: err,
        method: phi.method,
        cancellation,
        diagnostics,
    })
}

/// CDF of the largest eigenvalue at every grid point (strictly increasing
/// grid, one shared trajectory per matrix entry for the trajectory methods).
pub fn cdf_largest_eig_grid(
    xs: &[f64],
    spec: &Spectrum,
    cfg: &MimoConfig,
    method: CdfMethod,
    opts: &CdfOptions,
) -> Result<Vec<CdfResult>> {
    let phis = assemble_phi_grid(xs, spec, cfg, method, opts)?;
    let prefactor = log_prefactor(spec, cfg)?;
    xs.iter()
        .zip(phis.iter())
        .map(|(&x, phi)| result_from_phi(x, phi, &prefactor, opts))
        .collect()
}

/// CDF of the largest eigenvalue at one point.
pub fn cdf_largest_eig(
    x: f64,
    spec: &Spectrum,
    cfg: &MimoConfig,
    method: CdfMethod,
    opts: &CdfOptions,
) -> Result<CdfResult> {
    Ok(cdf_largest_eig_grid(&[x], spec, cfg, method, opts)?
        .pop()
        .expect("one point in, one result out"))
}

/// Maximum-ratio-combining outage probability: the CDF at
/// x = (K+1)·Γ_th/Γ_b.
pub fn outage_probability(
    spec: &Spectrum,
    cfg: &MimoConfig,
    method: CdfMethod,
    opts: &CdfOptions,
) -> Result<CdfResult> {
    let x = (cfg.k_factor + 1.0) * cfg.gamma_th / cfg.gamma_b;
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!(
            "outage evaluation point (K+1)·Γ_th/Γ_b = {x} is out of range"
        )));
    }
    cdf_largest_eig(x, spec, cfg, method, opts)
}

/// Rescale a shape so the spectrum satisfies the trace identity
/// Σλ = K·N_T·N_R of the uncorrelated Rician model.
pub fn spectrum_from_k(shape: &[f64], k_factor: f64, n_t: u32, n_r: u32) -> Result<Spectrum> {
    if n_t == 0 || n_r == 0 {
        return Err(Error::Domain(
            "antenna counts must be positive integers".into(),
        ));
    }
    let s = n_t.min(n_r) as usize;
    if shape.len() != s {
        return Err(Error::Domain(format!(
            "shape has {} entries but the configuration needs s = {s}",
            shape.len()
        )));
    }
    if !(k_factor > 0.0) || !k_factor.is_finite() {
        return Err(Error::Domain(format!(
            "the trace identity needs K > 0 (distinct nonzero eigenvalues), got {k_factor}"
        )));
    }
    let sum: f64 = shape.iter().sum();
    if !(sum > 0.0) {
        return Err(Error::Domain("shape must have a positive sum".into()));
    }
    let target = k_factor * f64::from(n_t) * f64::from(n_r);
    let scale = target / sum;
    Spectrum::from_unordered(shape.iter().map(|v| v * scale).collect())
}
