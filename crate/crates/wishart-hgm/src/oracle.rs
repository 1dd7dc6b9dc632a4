//! Monte-Carlo ground truth from the channel model itself.
//!
//! Samples Rician channel matrices H = H_d + G/√(K+1) (G with independent
//! unit-variance complex Gaussian entries), forms (K+1)·HᴴH, and estimates
//! Pr(φ_max ≤ x) as an empirical frequency. The analytic evaluators can then
//! be validated against a path that shares none of their machinery: no
//! series, no quadrature, no differential equations — just eigenvalues of
//! random matrices.
//!
//! The deterministic seeding is chunked: sample index ranges of fixed width
//! each draw from their own counter-mode stream, so results are reproducible
//! and independent of how worker threads interleave.

use crate::cdf::{MimoConfig, Spectrum};
use crate::error::{Error, Result};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

/// Samples per random stream; one stream per chunk keeps the estimate
/// identical across thread schedules.
const CHUNK: usize = 1024;

/// Iteration cap before the power method defers to the Jacobi solver.
const POWER_MAX_ITERS: usize = 100_000;

/// Empirical CDF estimate with its binomial standard error.
#[derive(Clone, Copy, Debug)]
pub struct McEstimate {
    /// Fraction of samples with largest eigenvalue ≤ x.
    pub p_hat: f64,
    /// Number of channel draws behind the estimate.
    pub n_samples: usize,
    /// √(p̂(1−p̂)/n); zero when every sample landed on the same side.
    pub std_err: f64,
}

/// Deterministic t×s channel mean with the given noncentrality spectrum.
///
/// The j-th diagonal entry is √(λⱼ/(K+1)), so that the scaled mean
/// √(K+1)·H_d has Gram-matrix eigenvalues exactly λ₁,…,λ_s. Off-diagonal
/// entries are zero; any H_d with the same singular values would give the
/// same eigenvalue distribution.
pub fn mean_matrix_from_spectrum(spec: &Spectrum, cfg: &MimoConfig) -> Result<Vec<Complex64>> {
    let (s, t) = (cfg.s(), cfg.t());
    if spec.len() != s {
        return Err(Error::Domain(format!(
            "spectrum has {} eigenvalues but min(N_T, N_R) = {s}",
            spec.len()
        )));
    }
    let mut m = vec![Complex64::new(0.0, 0.0); t * s];
    for (j, &lambda) in spec.lambdas().iter().enumerate() {
        m[j * s + j] = Complex64::new((lambda / (cfg.k_factor + 1.0)).sqrt(), 0.0);
    }
    Ok(m)
}

/// One channel draw: H_d plus independent CN(0, 1/(K+1)) entries, stored
/// tall (t×s, row-major) so the Gram matrix below is always s×s.
pub fn sample_channel<R: Rng>(
    h_d: &[Complex64],
    k_factor: f64,
    rng: &mut R,
) -> Vec<Complex64> {
    // Each complex entry has unit variance split evenly across parts.
    let sigma = (2.0 * (k_factor + 1.0)).sqrt().recip();
    h_d.iter()
        .map(|&d| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            d + Complex64::new(re * sigma, im * sigma)
        })
        .collect()
}

/// Gram matrix HᴴH (s×s, Hermitian positive semidefinite) of a tall t×s
/// matrix stored row-major.
pub fn gram(h: &[Complex64], t: usize, s: usize) -> Vec<Complex64> {
    debug_assert_eq!(h.len(), t * s);
    let mut a = vec![Complex64::new(0.0, 0.0); s * s];
    for i in 0..s {
        for j in i..s {
            let mut acc = Complex64::new(0.0, 0.0);
            for r in 0..t {
                acc += h[r * s + i].conj() * h[r * s + j];
            }
            a[i * s + j] = acc;
            a[j * s + i] = acc.conj();
        }
    }
    a
}

/// Largest eigenvalue of an s×s Hermitian positive semidefinite matrix.
///
/// Power iteration from a fixed starting vector, with the Rayleigh quotient
/// as the estimate; if the top eigenvalues are too close for it to settle
/// within the iteration cap, falls back to a cyclic Jacobi sweep on the
/// 2s×2s real symmetric embedding (exact but slower).
pub fn top_eig_hermitian(a: &[Complex64], s: usize) -> Result<f64> {
    if s == 0 || a.len() != s * s {
        return Err(Error::Domain(format!(
            "eigensolver needs an s×s matrix, got {} entries for s = {s}",
            a.len()
        )));
    }
    if s == 1 {
        return Ok(a[0].re);
    }
    let scale = a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if scale == 0.0 {
        return Ok(0.0);
    }

    let mut v = vec![Complex64::new((s as f64).sqrt().recip(), 0.0); s];
    let mut rho_prev = f64::NEG_INFINITY;
    for _ in 0..POWER_MAX_ITERS {
        let mut w = vec![Complex64::new(0.0, 0.0); s];
        for i in 0..s {
            let mut acc = Complex64::new(0.0, 0.0);
            for j in 0..s {
                acc += a[i * s + j] * v[j];
            }
            w[i] = acc;
        }
        // Rayleigh quotient vᴴAv; Hermitian symmetry makes it real.
        let rho: f64 = v.iter().zip(&w).map(|(vi, wi)| (vi.conj() * wi).re).sum();
        let norm = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Ok(0.0); // start vector annihilated: matrix acts as zero on it
        }
        for z in &mut w {
            *z /= norm;
        }
        v = w;
        if (rho - rho_prev).abs() <= 1e-12 * rho.abs().max(1e-3 * scale) {
            return Ok(rho);
        }
        rho_prev = rho;
    }
    Ok(jacobi_max_eig(embed_real(a, s), 2 * s))
}

/// Real symmetric 2s×2s embedding [[X, −Y], [Y, X]] of A = X + iY; its
/// spectrum is that of A with every eigenvalue doubled in multiplicity.
fn embed_real(a: &[Complex64], s: usize) -> Vec<f64> {
    let n = 2 * s;
    let mut m = vec![0.0; n * n];
    for i in 0..s {
        for j in 0..s {
            let z = a[i * s + j];
            m[i * n + j] = z.re;
            m[i * n + (j + s)] = -z.im;
            m[(i + s) * n + j] = z.im;
            m[(i + s) * n + (j + s)] = z.re;
        }
    }
    m
}

/// Eigenvalues of a real symmetric matrix by cyclic Jacobi rotations
/// (unsorted diagonal after convergence).
fn jacobi_eigenvalues(mut m: Vec<f64>, n: usize) -> Vec<f64> {
    let fro = m.iter().map(|v| v * v).sum::<f64>().sqrt();
    for _sweep in 0..50 {
        if fro == 0.0 {
            break;
        }
        let off = (0..n)
            .flat_map(|p| (0..n).filter(move |&q| q != p).map(move |q| (p, q)))
            .map(|(p, q)| m[p * n + q] * m[p * n + q])
            .sum::<f64>()
            .sqrt();
        if off <= 1e-14 * fro {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let tau = (m[q * n + q] - m[p * n + p]) / (2.0 * apq);
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let c = (1.0 + t * t).sqrt().recip();
                let sn = t * c;
                for k in 0..n {
                    let mkp = m[k * n + p];
                    let mkq = m[k * n + q];
                    m[k * n + p] = c * mkp - sn * mkq;
                    m[k * n + q] = sn * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[p * n + k];
                    let mqk = m[q * n + k];
                    m[p * n + k] = c * mpk - sn * mqk;
                    m[q * n + k] = sn * mpk + c * mqk;
                }
            }
        }
    }
    (0..n).map(|i| m[i * n + i]).collect()
}

/// Largest eigenvalue of a real symmetric matrix.
fn jacobi_max_eig(m: Vec<f64>, n: usize) -> f64 {
    jacobi_eigenvalues(m, n)
        .into_iter()
        .fold(f64::NEG_INFINITY, f64::max)
}

/// The sampled statistic: φ_max of (K+1)·HᴴH for one tall channel draw.
pub fn largest_eig(h: &[Complex64], t: usize, s: usize, k_factor: f64) -> Result<f64> {
    let top = top_eig_hermitian(&gram(h, t, s), s)?;
    Ok((k_factor + 1.0) * top)
}

/// Empirical Pr(φ_max ≤ x) over `n_samples` independent channel draws.
///
/// Fully deterministic for a given seed and independent of thread count.
pub fn empirical_cdf(
    x: f64,
    spec: &Spectrum,
    cfg: &MimoConfig,
    n_samples: usize,
    seed: u64,
) -> Result<McEstimate> {
    if !x.is_finite() || x < 0.0 {
        return Err(Error::Domain(format!(
            "evaluation point must be finite and nonnegative, got {x}"
        )));
    }
    if n_samples < 1000 {
        return Err(Error::Domain(format!(
            "need at least 1000 samples for a meaningful standard error, got {n_samples}"
        )));
    }
    let (s, t) = (cfg.s(), cfg.t());
    let h_d = mean_matrix_from_spectrum(spec, cfg)?;
    let n_chunks = n_samples.div_ceil(CHUNK);
    let successes: usize = (0..n_chunks)
        .into_par_iter()
        .map(|chunk| -> Result<usize> {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(chunk as u64);
            let lo = chunk * CHUNK;
            let hi = n_samples.min(lo + CHUNK);
            let mut count = 0usize;
            for _ in lo..hi {
                let h = sample_channel(&h_d, cfg.k_factor, &mut rng);
                if largest_eig(&h, t, s, cfg.k_factor)? <= x {
                    count += 1;
                }
            }
            Ok(count)
        })
        .try_reduce(|| 0, |u, v| Ok(u + v))?;
    let p_hat = successes as f64 / n_samples as f64;
    Ok(McEstimate {
        p_hat,
        n_samples,
        std_err: (p_hat * (1.0 - p_hat) / n_samples as f64).sqrt(),
    })
}
