//! Scalar special functions.
//!
//! The confluent hypergeometric limit function ₀F₁(;n;z) = Σ z^i/((n)_i i!)
//! is the kernel of every determinant entry in this crate. It is evaluated
//! three ways, picked by argument size:
//!
//! * native power series (moderate z);
//! * offset-rescaled series returning ln ₀F₁ (large z below the asymptotic
//!   regime, or large n where the asymptotic correction series is unusable);
//! * large-argument asymptotic ln ₀F₁ = ln c_n + 2√z − (n−½)ln√z + ln S(√z),
//!   where S is the standard inverse-power correction series and c_n is
//!   calibrated once per n against the series (and equals Γ(n)/(2√π)).
//!
//! Also: θ-weighted series (θ_z = z·d/dz), a damped pair e^{−2√z}·(₀F₁, …)
//! used as ODE state, Pochhammer symbols, log-gamma, and the regularized
//! lower incomplete gamma function.

use crate::error::{Error, Result};
use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

/// Relative tolerance / term cap for series evaluation.
#[derive(Clone, Copy, Debug)]
pub struct SeriesControl {
    /// Relative convergence tolerance (successive-change criterion).
    pub eps: f64,
    /// Maximum number of terms (series) or truncation shells (double series).
    pub max_terms: usize,
}

impl Default for SeriesControl {
    fn default() -> Self {
        SeriesControl {
            eps: 1e-10,
            max_terms: 10_000,
        }
    }
}

impl SeriesControl {
    pub fn validate(&self) -> Result<()> {
        if !(self.eps > 0.0) {
            return Err(Error::Domain(format!(
                "series tolerance must be positive, got {}",
                self.eps
            )));
        }
        if self.max_terms == 0 {
            return Err(Error::Domain("max_terms must be at least 1".into()));
        }
        Ok(())
    }
}

/// Largest z routed to the ln-series before trying the asymptotic form.
const Z_SERIES_LIMIT: f64 = 1e6;

/// Admissibility bound for the asymptotic correction series: its first-term
/// ratio μ/(16u) must not exceed this.
const ASYM_RATIO_LIMIT: f64 = 0.05;

/// Pochhammer symbol (a)_i = a(a+1)…(a+i−1), native range.
pub fn pochhammer(a: f64, i: usize) -> f64 {
    let mut p = 1.0;
    for j in 0..i {
        p *= a + j as f64;
    }
    p
}

/// Log-domain Pochhammer: (sign, ln|(a)_i|).
pub fn ln_pochhammer(a: f64, i: usize) -> (i8, f64) {
    let mut sign = 1i8;
    let mut ln = 0.0;
    for j in 0..i {
        let f = a + j as f64;
        if f == 0.0 {
            return (0, f64::NEG_INFINITY);
        }
        if f < 0.0 {
            sign = -sign;
        }
        ln += f.abs().ln();
    }
    (sign, ln)
}

/// Natural log of the gamma function for x > 0 (Lanczos approximation,
/// g = 7, 9 coefficients; ~1e−13 relative accuracy).
pub fn ln_gamma(x: f64) -> f64 {
    const COEF: [f64; 9] = [
        0.999_999_999_999_809_93,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_13,
        -176.615_029_162_140_59,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_571_6e-6,
        1.505_632_735_149_311_6e-7,
    ];
    debug_assert!(x > 0.0, "ln_gamma domain: x > 0 required, got {x}");
    if x < 0.5 {
        // Reflection keeps accuracy near zero.
        let pi = std::f64::consts::PI;
        return pi.ln() - (pi * x).sin().ln() - ln_gamma(1.0 - x);
    }
    let xm1 = x - 1.0;
    let mut a = COEF[0];
    let t = xm1 + 7.5;
    for (i, &c) in COEF.iter().enumerate().skip(1) {
        a += c / (xm1 + i as f64);
    }
    0.5 * (2.0 * std::f64::consts::PI).ln() + (xm1 + 0.5) * t.ln() - t + a.ln()
}

/// ₀F₁(;n;z) by its power series: (value, terms_used).
///
/// Fails with [`Error::NonConvergence`] (carrying the last partial sum) when
/// `ctl.max_terms` is exhausted or the partial sum leaves native range.
pub fn of1(n: u32, z: f64, ctl: &SeriesControl) -> Result<(f64, usize)> {
    debug_assert!(n >= 1, "of1: n must be a positive integer");
    debug_assert!(z >= 0.0, "of1: z must be nonnegative");
    ctl.validate()?;
    let nf = f64::from(n);
    let mut term = 1.0f64;
    let mut sum = 1.0f64;
    for i in 0..ctl.max_terms {
        let fi = i as f64;
        term *= z / ((nf + fi) * (fi + 1.0));
        sum += term;
        if !sum.is_finite() {
            return Err(Error::NonConvergence {
                context: format!("of1({n},{z}) left native range"),
                partial: sum,
                terms: i + 1,
            });
        }
        if term.abs() <= ctl.eps * sum.abs() {
            return Ok((sum, i + 1));
        }
    }
    Err(Error::NonConvergence {
        context: format!("of1({n},{z}) series"),
        partial: sum,
        terms: ctl.max_terms,
    })
}

/// θ_z • ₀F₁(;n;z) = Σ i·z^i/((n)_i i!) (term-wise derivative weight).
pub fn of1_theta(n: u32, z: f64, ctl: &SeriesControl) -> Result<f64> {
    debug_assert!(n >= 1 && z >= 0.0);
    ctl.validate()?;
    if z == 0.0 {
        return Ok(0.0);
    }
    let nf = f64::from(n);
    let mut term = 1.0f64;
    let mut sum = 0.0f64;
    for i in 0..ctl.max_terms {
        let fi = i as f64;
        term *= z / ((nf + fi) * (fi + 1.0));
        let w = (fi + 1.0) * term;
        sum += w;
        if !sum.is_finite() {
            return Err(Error::NonConvergence {
                context: format!("of1_theta({n},{z}) left native range"),
                partial: sum,
                terms: i + 1,
            });
        }
        if i >= 2 && w.abs() <= ctl.eps * sum.abs() {
            return Ok(sum);
        }
    }
    Err(Error::NonConvergence {
        context: format!("of1_theta({n},{z}) series"),
        partial: sum,
        terms: ctl.max_terms,
    })
}

/// Offset-rescaled ₀F₁ series returning ln ₀F₁(;n;z); converges for any z ≥ 0
/// but needs ~4√z iterations. Also returns terms used.
pub(crate) fn ln_of1_series(n: u32, z: f64) -> (f64, usize) {
    if z == 0.0 {
        return (0.0, 0);
    }
    let nf = f64::from(n);
    const THRESH: f64 = 1e260;
    const RESCALE_LN: f64 = 580.0;
    let rescale = (-RESCALE_LN).exp();
    let mut offset = 0.0f64;
    let mut term = 1.0f64;
    let mut sum = 1.0f64;
    let cap = (4.0 * z.sqrt()) as usize + 64 * (n as usize + 1) + 1024;
    let mut used = cap;
    for i in 0..cap {
        let fi = i as f64;
        term *= z / ((nf + fi) * (fi + 1.0));
        sum += term;
        if sum > THRESH {
            sum *= rescale;
            term *= rescale;
            offset += RESCALE_LN;
        }
        if term <= 1e-17 * sum {
            used = i + 1;
            break;
        }
    }
    (sum.ln() + offset, used)
}

/// Dual offset-rescaled series: ln Σ t_i together with the signed companion
/// T = Σ (i−u)·t_i (u = √z), both under one offset. Returns
/// (ln Σt, sign(T), ln|T|).
fn ln_of1_series_dual(n: u32, z: f64) -> (f64, i8, f64) {
    let nf = f64::from(n);
    let u = z.sqrt();
    const THRESH: f64 = 1e260;
    const RESCALE_LN: f64 = 580.0;
    let rescale = (-RESCALE_LN).exp();
    let mut offset = 0.0f64;
    let mut term = 1.0f64;
    let mut sum = 1.0f64;
    let mut wsum = -u; // i = 0 contribution: (0 − u)·1
    let cap = (4.0 * u) as usize + 64 * (n as usize + 1) + 1024;
    for i in 0..cap {
        let fi = i as f64;
        term *= z / ((nf + fi) * (fi + 1.0));
        sum += term;
        wsum += (fi + 1.0 - u) * term;
        if sum > THRESH {
            sum *= rescale;
            term *= rescale;
            wsum *= rescale;
            offset += RESCALE_LN;
        }
        if term <= 1e-17 * sum && fi + 1.0 > u {
            break;
        }
    }
    let sign = if wsum == 0.0 {
        0
    } else if wsum > 0.0 {
        1
    } else {
        -1
    };
    (sum.ln() + offset, sign, wsum.abs().ln() + offset)
}

/// Correction series of the large-argument form: S(u) = Σ s_m with
/// s₀ = 1, s_m = s_{m−1}·(−(μ−(2m−1)²))/(16 m u), μ = 4(n−1)².
/// Returns (S, Σ m·s_m) — the weighted sum feeds the log-derivative.
fn asym_correction_sums(mu: f64, u: f64) -> (f64, f64) {
    let mut s = 1.0f64;
    let mut msum = 0.0f64;
    let mut term = 1.0f64;
    let mut prev_abs = f64::INFINITY;
    for m in 1..=60usize {
        let fm = m as f64;
        let odd = 2.0 * fm - 1.0;
        term *= -(mu - odd * odd) / (16.0 * fm * u);
        let a = term.abs();
        if a >= prev_abs {
            // Asymptotic tail started growing: stop at the smallest term.
            break;
        }
        s += term;
        msum += fm * term;
        if a < 1e-18 * s.abs() {
            break;
        }
        prev_abs = a;
    }
    (s, msum)
}

fn cn_cache() -> &'static Mutex<HashMap<u32, f64>> {
    static CACHE: OnceLock<Mutex<HashMap<u32, f64>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// ln c_n for the asymptotic form, calibrated once per n against the
/// ln-series at a u large enough for the correction series to be accurate.
pub(crate) fn ln_cn(n: u32) -> f64 {
    if let Some(&v) = cn_cache().lock().unwrap().get(&n) {
        return v;
    }
    let nf = f64::from(n);
    let sigma = nf - 0.5;
    let mu = 4.0 * (nf - 1.0) * (nf - 1.0);
    let u_cal = (5.0 * (nf - 1.0) * (nf - 1.0) + 500.0).max(500.0);
    let (ln_series, _) = ln_of1_series(n, u_cal * u_cal);
    let (s, _) = asym_correction_sums(mu, u_cal);
    let v = ln_series - (2.0 * u_cal - sigma * u_cal.ln() + s.ln());
    cn_cache().lock().unwrap().insert(n, v);
    v
}

/// ln of the large-argument form of ₀F₁(;n;z):
/// ln c_n + 2√z − (n−½)·ln√z + ln S(√z). Caller is responsible for z being
/// large enough (the correction series degrades below z ≈ 100).
pub fn ln_of1_asymptotic(n: u32, z: f64) -> f64 {
    debug_assert!(z > 0.0);
    let nf = f64::from(n);
    let u = z.sqrt();
    let sigma = nf - 0.5;
    let mu = 4.0 * (nf - 1.0) * (nf - 1.0);
    let (s, _) = asym_correction_sums(mu, u);
    ln_cn(n) + 2.0 * u - sigma * u.ln() + s.ln()
}

/// Large-argument form of ₀F₁ in native range; overflows to +∞ when the
/// value exceeds native doubles (use [`ln_of1_asymptotic`] then).
pub fn of1_asymptotic(n: u32, z: f64) -> f64 {
    ln_of1_asymptotic(n, z).exp()
}

/// ln ₀F₁(;n;z) for any z ≥ 0: series for moderate z, asymptotic form for
/// large z (falling back to the rescaled series when the correction series
/// is inadmissible for large n).
pub fn ln_of1(n: u32, z: f64) -> f64 {
    debug_assert!(n >= 1 && z >= 0.0);
    if z == 0.0 {
        return 0.0;
    }
    if z <= Z_SERIES_LIMIT {
        return ln_of1_series(n, z).0;
    }
    let nf = f64::from(n);
    let u = z.sqrt();
    let mu = 4.0 * (nf - 1.0) * (nf - 1.0);
    if mu / (16.0 * u) <= ASYM_RATIO_LIMIT {
        ln_of1_asymptotic(n, z)
    } else {
        ln_of1_series(n, z).0
    }
}

/// Damped pair (a, b) with a = e^{−2√z}·₀F₁(;n;z) and
/// b = 2·e^{−2√z}·(θ_z₀F₁ − √z·₀F₁).
///
/// `a` is the ODE state component v at φψ = √z; `b` is the θ_φ-derivative
/// component. Both stay in native range for every z ≥ 0 (a ~ c_n·u^{−n+1/2},
/// b ~ −(n−½)·a for large u).
pub fn of1_damped(n: u32, z: f64) -> (f64, f64) {
    debug_assert!(n >= 1 && z >= 0.0);
    if z == 0.0 {
        return (1.0, 0.0);
    }
    let nf = f64::from(n);
    let u = z.sqrt();
    let sigma = nf - 0.5;
    let mu = 4.0 * (nf - 1.0) * (nf - 1.0);
    if u <= 300.0 {
        // Everything representable natively (₀F₁ ≤ e^{600}).
        let ctl = SeriesControl {
            eps: 1e-16,
            max_terms: 200_000,
        };
        let (f, _) = of1(n, z, &ctl).expect("native-range series must converge");
        let tf = of1_theta(n, z, &ctl).expect("native-range series must converge");
        let damp = (-2.0 * u).exp();
        (damp * f, 2.0 * damp * (tf - u * f))
    } else if z > Z_SERIES_LIMIT && mu / (16.0 * u) <= ASYM_RATIO_LIMIT {
        // θF/F − u = −σ/2 + (u/2)·S′/S with (u/2)S′ = −½ Σ m s_m.
        let (s, msum) = asym_correction_sums(mu, u);
        let a = (ln_of1_asymptotic(n, z) - 2.0 * u).exp();
        let r = -0.5 * sigma - 0.5 * msum / s;
        (a, 2.0 * a * r)
    } else {
        // Gap region: rescaled dual series. The weighted companion suffers
        // only mild cancellation (~√u/σ), well within double precision.
        let (ln_f, sign_t, ln_t) = ln_of1_series_dual(n, z);
        let a = (ln_f - 2.0 * u).exp();
        let b = 2.0 * f64::from(sign_t) * (ln_t - 2.0 * u).exp();
        (a, b)
    }
}

/// Regularized lower incomplete gamma P(a,x) = γ(a,x)/Γ(a); standard
/// series / continued-fraction split at x = a+1, log-domain prefactor.
pub fn regularized_gamma_p(a: f64, x: f64) -> Result<f64> {
    if !(a > 0.0) || !(x >= 0.0) {
        return Err(Error::Domain(format!(
            "regularized_gamma_p needs a > 0, x >= 0 (got a={a}, x={x})"
        )));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    let ln_pref = a * x.ln() - x - ln_gamma(a);
    if x < a + 1.0 {
        // γ series: P = x^a e^{−x}/Γ(a) · Σ x^i / (a(a+1)…(a+i))
        let mut ap = a;
        let mut del = 1.0 / a;
        let mut sum = del;
        for _ in 0..10_000 {
            ap += 1.0;
            del *= x / ap;
            sum += del;
            if del.abs() < sum.abs() * 1e-16 {
                return Ok((sum * ln_pref.exp()).min(1.0));
            }
        }
        Err(Error::NonConvergence {
            context: format!("regularized_gamma_p series (a={a}, x={x})"),
            partial: sum * ln_pref.exp(),
            terms: 10_000,
        })
    } else {
        // Q continued fraction (modified Lentz).
        const FPMIN: f64 = 1e-300;
        let mut b = x + 1.0 - a;
        let mut c = 1.0 / FPMIN;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..10_000 {
            let an = -(i as f64) * (i as f64 - a);
            b += 2.0;
            d = an * d + b;
            if d.abs() < FPMIN {
                d = FPMIN;
            }
            c = b + an / c;
            if c.abs() < FPMIN {
                c = FPMIN;
            }
            d = 1.0 / d;
            let delta = d * c;
            h *= delta;
            if (delta - 1.0).abs() < 1e-16 {
                let q = ln_pref.exp() * h;
                return Ok((1.0 - q).clamp(0.0, 1.0));
            }
        }
        Err(Error::NonConvergence {
            context: format!("regularized_gamma_p continued fraction (a={a}, x={x})"),
            partial: 1.0 - ln_pref.exp() * h,
            terms: 10_000,
        })
    }
}

/// Lower incomplete gamma γ(a,x) = P(a,x)·Γ(a) (native range only).
pub fn lower_incomplete_gamma(a: f64, x: f64) -> Result<f64> {
    Ok(regularized_gamma_p(a, x)? * ln_gamma(a).exp())
}
