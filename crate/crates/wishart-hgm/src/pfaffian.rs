//! ODE system matrices for H^k_n and the gauge-transformation machinery.
//!
//! Three first-order linear systems drive everything downstream:
//!
//! * a 4-dimensional pair (P, Q) in (x, λ) for the state
//!   f = (H, θ_λH, θ_λ²H, θ_λ³H), with θ_λ = λ·∂/∂λ;
//! * a 3-dimensional system in x for g = (H, F, θ_xF), F(x) = ₀F₁(;n;λx);
//! * a 3-dimensional system in φ = √x for g = (H, v, θ_φv) with the damped
//!   carrier v = e^{−2φψ}·₀F₁(;n;(φψ)²), ψ = √λ — the stabile form whose
//!   dominant solution is the one of interest, so forward integration is
//!   self-correcting.
//!
//! Gauge transforms h = G⁻¹g turn a system A into G⁻¹AG − G⁻¹G′. Two
//! specific diagonal gauges keep all state components inside native range
//! for extreme arguments (φψ ~ 10⁸): one for φ < ψ and a constant one for
//! φ ≥ ψ; analytic constructors for both gauged systems are provided so the
//! gauge factors themselves are never materialized.

use crate::error::{Error, Result};
use std::sync::Arc;

/// Independent variable of an ODE system.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Variable {
    X,
    Lambda,
    Phi,
}

/// Dense square matrix of dimension ≤ 4 (the live block is `dim`×`dim`).
#[derive(Clone, Copy, Debug)]
pub struct SysMat {
    pub dim: usize,
    pub a: [[f64; 4]; 4],
}

impl SysMat {
    pub fn zero(dim: usize) -> Self {
        debug_assert!((1..=4).contains(&dim));
        SysMat {
            dim,
            a: [[0.0; 4]; 4],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zero(dim);
        for i in 0..dim {
            m.a[i][i] = 1.0;
        }
        m
    }

    pub fn from_rows3(rows: [[f64; 3]; 3]) -> Self {
        let mut m = Self::zero(3);
        for i in 0..3 {
            for j in 0..3 {
                m.a[i][j] = rows[i][j];
            }
        }
        m
    }

    pub fn from_rows4(rows: [[f64; 4]; 4]) -> Self {
        SysMat { dim: 4, a: rows }
    }

    pub fn matvec(&self, v: &[f64; 4]) -> [f64; 4] {
        let mut out = [0.0; 4];
        for i in 0..self.dim {
            let mut acc = 0.0;
            for j in 0..self.dim {
                acc += self.a[i][j] * v[j];
            }
            out[i] = acc;
        }
        out
    }

    pub fn mul(&self, o: &Self) -> Self {
        debug_assert_eq!(self.dim, o.dim);
        let mut m = Self::zero(self.dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                let mut acc = 0.0;
                for l in 0..self.dim {
                    acc += self.a[i][l] * o.a[l][j];
                }
                m.a[i][j] = acc;
            }
        }
        m
    }

    pub fn add(&self, o: &Self) -> Self {
        debug_assert_eq!(self.dim, o.dim);
        let mut m = *self;
        for i in 0..self.dim {
            for j in 0..self.dim {
                m.a[i][j] += o.a[i][j];
            }
        }
        m
    }

    pub fn sub(&self, o: &Self) -> Self {
        debug_assert_eq!(self.dim, o.dim);
        let mut m = *self;
        for i in 0..self.dim {
            for j in 0..self.dim {
                m.a[i][j] -= o.a[i][j];
            }
        }
        m
    }

    pub fn scale(&self, c: f64) -> Self {
        let mut m = *self;
        for i in 0..self.dim {
            for j in 0..self.dim {
                m.a[i][j] *= c;
            }
        }
        m
    }

    pub fn max_norm(&self) -> f64 {
        let mut v = 0.0f64;
        for i in 0..self.dim {
            for j in 0..self.dim {
                v = v.max(self.a[i][j].abs());
            }
        }
        v
    }

    pub fn is_finite(&self) -> bool {
        (0..self.dim).all(|i| (0..self.dim).all(|j| self.a[i][j].is_finite()))
    }

    /// Gauss–Jordan inverse with partial pivoting.
    pub fn inverse(&self) -> Result<Self> {
        let d = self.dim;
        let mut w = self.a;
        let mut inv = Self::identity(d);
        for col in 0..d {
            let mut piv = col;
            for r in col + 1..d {
                if w[r][col].abs() > w[piv][col].abs() {
                    piv = r;
                }
            }
            if w[piv][col].abs() < 1e-300 {
                return Err(Error::IllConditioned(
                    "matrix not invertible at evaluation point".into(),
                ));
            }
            w.swap(col, piv);
            inv.a.swap(col, piv);
            let p = w[col][col];
            for j in 0..d {
                w[col][j] /= p;
                inv.a[col][j] /= p;
            }
            for r in 0..d {
                if r == col {
                    continue;
                }
                let f = w[r][col];
                if f == 0.0 {
                    continue;
                }
                for j in 0..d {
                    w[r][j] -= f * w[col][j];
                    inv.a[r][j] -= f * inv.a[col][j];
                }
            }
        }
        Ok(inv)
    }
}

type MatFn = Arc<dyn Fn(f64) -> Result<SysMat> + Send + Sync>;

/// First-order linear system dg/dt = A(t)·g.
#[derive(Clone)]
pub struct OdeSystem {
    pub dim: usize,
    pub variable: Variable,
    matrix: MatFn,
}

impl OdeSystem {
    pub fn new<F>(dim: usize, variable: Variable, f: F) -> Self
    where
        F: Fn(f64) -> Result<SysMat> + Send + Sync + 'static,
    {
        debug_assert!(dim == 3 || dim == 4);
        OdeSystem {
            dim,
            variable,
            matrix: Arc::new(f),
        }
    }

    pub fn matrix_at(&self, t: f64) -> Result<SysMat> {
        (self.matrix)(t)
    }
}

/// Gauge transform h = G(t)⁻¹·g with its derivative G′.
#[derive(Clone)]
pub struct GaugeTransform {
    pub dim: usize,
    g: MatFn,
    g_prime: MatFn,
}

impl GaugeTransform {
    pub fn new<F, Fp>(dim: usize, g: F, g_prime: Fp) -> Self
    where
        F: Fn(f64) -> Result<SysMat> + Send + Sync + 'static,
        Fp: Fn(f64) -> Result<SysMat> + Send + Sync + 'static,
    {
        GaugeTransform {
            dim,
            g: Arc::new(g),
            g_prime: Arc::new(g_prime),
        }
    }

    /// Gauge from a matrix map alone; the derivative is supplied by central
    /// differences (for user gauges without a closed-form derivative).
    pub fn from_matrix_fn<F>(dim: usize, g: F) -> Self
    where
        F: Fn(f64) -> Result<SysMat> + Send + Sync + 'static,
    {
        let g = Arc::new(g);
        let gd = Arc::clone(&g);
        GaugeTransform {
            dim,
            g: g.clone(),
            g_prime: Arc::new(move |t: f64| {
                let h = 1e-6 * t.abs().max(1.0);
                let up = gd(t + h)?;
                let dn = gd(t - h)?;
                Ok(up.sub(&dn).scale(0.5 / h))
            }),
        }
    }

    pub fn identity(dim: usize) -> Self {
        GaugeTransform::new(
            dim,
            move |_| Ok(SysMat::identity(dim)),
            move |_| Ok(SysMat::zero(dim)),
        )
    }

    pub fn g_at(&self, t: f64) -> Result<SysMat> {
        (self.g)(t)
    }

    pub fn g_prime_at(&self, t: f64) -> Result<SysMat> {
        (self.g_prime)(t)
    }

    /// The inverse gauge G⁻¹, with derivative −G⁻¹G′G⁻¹.
    pub fn inverted(&self) -> GaugeTransform {
        let g = Arc::clone(&self.g);
        let g2 = Arc::clone(&self.g);
        let gp = Arc::clone(&self.g_prime);
        GaugeTransform {
            dim: self.dim,
            g: Arc::new(move |t: f64| g(t)?.inverse()),
            g_prime: Arc::new(move |t: f64| {
                let gi = g2(t)?.inverse()?;
                Ok(gi.mul(&gp(t)?).mul(&gi).scale(-1.0))
            }),
        }
    }
}

/// Transform dg/dt = A·g into d(G⁻¹g)/dt = (G⁻¹AG − G⁻¹G′)·(G⁻¹g).
pub fn apply_gauge(sys: &OdeSystem, gauge: &GaugeTransform) -> OdeSystem {
    debug_assert_eq!(sys.dim, gauge.dim);
    let m = Arc::clone(&sys.matrix);
    let gauge = gauge.clone();
    OdeSystem::new(sys.dim, sys.variable, move |t| {
        let a = m(t)?;
        let g = gauge.g_at(t)?;
        let gp = gauge.g_prime_at(t)?;
        let gi = g.inverse()?;
        Ok(gi.mul(&a).mul(&g).sub(&gi.mul(&gp)))
    })
}

/// x-direction 4-D coefficient matrix P(x, λ) for f = (H, θ_λH, θ_λ²H, θ_λ³H):
///
/// P = (1/(xλ)) ·
///   ⎡ a₁  a₂    −1    0   ⎤
///   ⎢ 0   a₃   a₂+1  −1   ⎥
///   ⎢ a₅  a₆    a₇   n−1  ⎥
///   ⎣ a₈  a₉    a₁₀  a₁₁  ⎦
pub fn build_p4(x: f64, lambda: f64, k: u32, n: u32) -> Result<SysMat> {
    if !(x > 0.0) || !(lambda > 0.0) {
        return Err(Error::Domain(format!(
            "4-D x-system matrix is singular at x=0 or λ=0 (got x={x}, λ={lambda})"
        )));
    }
    let kf = f64::from(k);
    let nf = f64::from(n);
    let a1 = (kf + 1.0) * lambda;
    let a2 = lambda - nf + 1.0;
    let a3 = (kf + 1.0) * lambda + nf - 1.0;
    let a5 = (kf + 1.0) * x * lambda * lambda;
    let a6 = x * lambda * lambda - (nf - 1.0) * (x * lambda + (kf + 1.0) * lambda + nf - 1.0);
    let a7 = -(x + nf - 1.0) * lambda + (nf - 1.0) * (nf - 2.0);
    let a8 = -(nf - 2.0) * (kf + 1.0) * x * lambda * lambda;
    let a9 = (kf - nf + 3.0) * x * lambda * lambda
        + (nf - 1.0) * (nf - 1.0) * (x * lambda + (kf + 1.0) * lambda + nf - 1.0);
    let a10 = x * lambda * lambda + (nf - 1.0) * (nf - 1.0) * (lambda - nf + 2.0);
    let a11 = -x * lambda - (nf - 1.0) * (nf - 1.0);
    Ok(SysMat::from_rows4([
        [a1, a2, -1.0, 0.0],
        [0.0, a3, a2 + 1.0, -1.0],
        [a5, a6, a7, nf - 1.0],
        [a8, a9, a10, a11],
    ])
    .scale(1.0 / (x * lambda)))
}

/// λ-direction 4-D companion matrix Q(x, λ) for the same state:
/// Q = (1/λ)·[e₂; e₃; e₄; −b₀, −b₁, −b₂, −b₃].
pub fn build_q4(x: f64, lambda: f64, k: u32, n: u32) -> Result<SysMat> {
    if !(x > 0.0) || !(lambda > 0.0) {
        return Err(Error::Domain(format!(
            "4-D λ-system matrix is singular at x=0 or λ=0 (got x={x}, λ={lambda})"
        )));
    }
    let kf = f64::from(k);
    let nf = f64::from(n);
    let b3 = -lambda + 2.0 * nf - 4.0;
    let b2 = nf * nf - 5.0 * nf + 5.0 - (x + kf + nf) * lambda;
    let b1 = x * lambda * lambda
        - (nf - 1.0) * x * lambda
        - (kf + 1.0) * (nf - 1.0) * lambda
        - (nf - 2.0) * (nf - 1.0);
    let b0 = (kf + 1.0) * x * lambda * lambda;
    Ok(SysMat::from_rows4([
        [0.0, 1.0, 0.0, 0.0],
        [0.0, 0.0, 1.0, 0.0],
        [0.0, 0.0, 0.0, 1.0],
        [-b0, -b1, -b2, -b3],
    ])
    .scale(1.0 / lambda))
}

/// x-direction 3-D coefficient matrix for g = (H, F, θ_xF):
///
///   dH/dx     = x^k e^{−x}·F
///   dF/dx     = θ_xF / x
///   d(θ_xF)/dx = λ·F − (n−1)·θ_xF / x
///
/// (the third row following from θ_x(θ_x+n−1)F = λxF).
pub fn build_a3_x(x: f64, lambda: f64, k: u32, n: u32) -> Result<SysMat> {
    if !(x > 0.0) {
        return Err(Error::Domain(format!(
            "3-D x-system matrix is singular at x=0 (got x={x})"
        )));
    }
    if lambda < 0.0 {
        return Err(Error::Domain(format!("λ must be nonnegative (got {lambda})")));
    }
    let kf = f64::from(k);
    let nf = f64::from(n);
    Ok(SysMat::from_rows3([
        [0.0, x.powf(kf) * (-x).exp(), 0.0],
        [0.0, 0.0, 1.0 / x],
        [0.0, lambda, -(nf - 1.0) / x],
    ]))
}

/// ln of the (1,2) coefficient of the φ-system:
/// 2·φ^{2k+1}·e^{−φ²+2φψ} in log form.
fn ln_phi_coupling(phi: f64, psi: f64, k: u32) -> f64 {
    std::f64::consts::LN_2 + (2.0 * f64::from(k) + 1.0) * phi.ln() - phi * phi
        + 2.0 * phi * psi
}

/// φ-direction 3-D coefficient matrix for g = (H, v, θ_φv), φ = √x, ψ = √λ:
///
///   (1/φ)·⎡ 0      2e^{−φ²+2φψ}φ^{2(k+1)}   0            ⎤
///         ⎢ 0      0                        1            ⎥
///         ⎣ 0      −2(2n−1)φψ               −(4φψ+2(n−1))⎦
///
/// returned with the 1/φ prefactor already applied. Errors when the (1,2)
/// coupling exponent overflows native range (use the gauged systems then).
pub fn build_a3_phi(phi: f64, psi: f64, k: u32, n: u32) -> Result<SysMat> {
    let (m, ln12) = build_a3_phi_log(phi, psi, k, n)?;
    if ln12 > 700.0 {
        return Err(Error::Ode(format!(
            "φ-system coupling exp({ln12:.1}) overflows at φ={phi}, ψ={psi}; \
             a gauged system is required"
        )));
    }
    let mut full = m;
    full.a[0][1] = ln12.exp();
    Ok(full)
}

/// Log-scaled variant of [`build_a3_phi`]: the returned matrix has 0 in the
/// (1,2) slot and the natural log of that coupling is returned separately,
/// so callers can manage magnitudes like e^{ψ²} with ψ² ~ 10⁸ themselves.
pub fn build_a3_phi_log(phi: f64, psi: f64, k: u32, n: u32) -> Result<(SysMat, f64)> {
    if !(phi > 0.0) {
        return Err(Error::Domain(format!(
            "φ-system matrix is singular at φ=0 (got φ={phi})"
        )));
    }
    if psi < 0.0 {
        return Err(Error::Domain(format!("ψ must be nonnegative (got {psi})")));
    }
    let nf = f64::from(n);
    let m = SysMat::from_rows3([
        [0.0, 0.0, 0.0],
        [0.0, 0.0, 1.0 / phi],
        [
            0.0,
            -2.0 * (2.0 * nf - 1.0) * psi,
            -4.0 * psi - 2.0 * (nf - 1.0) / phi,
        ],
    ]);
    Ok((m, ln_phi_coupling(phi, psi, k)))
}

/// Exponent of the φ<ψ gauge factor diag(e^{−φ²+2φψ}, 1, 1): zero at φ=0 and
/// φ=2ψ, maximal (=ψ²) at φ=ψ.
pub fn g2_exponent(phi: f64, psi: f64) -> f64 {
    -phi * phi + 2.0 * phi * psi
}

/// Gauge for the rising flank φ < ψ: G = diag(e^{−φ²+2φψ}, 1, 1).
/// Only usable directly when e^{ψ²} is representable; the analytic
/// [`phi_system_g2`] never materializes it.
pub fn gauge_g2(psi: f64) -> GaugeTransform {
    GaugeTransform::new(
        3,
        move |phi: f64| {
            let mut g = SysMat::identity(3);
            g.a[0][0] = g2_exponent(phi, psi).exp();
            if !g.a[0][0].is_finite() || g.a[0][0] == 0.0 {
                return Err(Error::Ode(format!(
                    "gauge factor exp({:.1}) not representable at φ={phi}",
                    g2_exponent(phi, psi)
                )));
            }
            Ok(g)
        },
        move |phi: f64| {
            let mut gp = SysMat::zero(3);
            gp.a[0][0] = (2.0 * psi - 2.0 * phi) * g2_exponent(phi, psi).exp();
            Ok(gp)
        },
    )
}

/// Constant gauge for the falling flank φ ≥ ψ: G = diag(e^{ψ²}, 1, 1).
pub fn gauge_g3(psi: f64) -> GaugeTransform {
    GaugeTransform::new(
        3,
        move |_phi: f64| {
            let mut g = SysMat::identity(3);
            g.a[0][0] = (psi * psi).exp();
            if !g.a[0][0].is_finite() {
                return Err(Error::Ode(format!(
                    "gauge factor exp(ψ²) not representable at ψ={psi}"
                )));
            }
            Ok(g)
        },
        move |_phi: f64| Ok(SysMat::zero(3)),
    )
}

/// 4-D system in x at fixed λ.
pub fn x_system_4d(k: u32, n: u32, lambda: f64) -> OdeSystem {
    OdeSystem::new(4, Variable::X, move |x| build_p4(x, lambda, k, n))
}

/// 4-D system in λ at fixed x.
pub fn lambda_system_4d(k: u32, n: u32, x: f64) -> OdeSystem {
    OdeSystem::new(4, Variable::Lambda, move |lambda| build_q4(x, lambda, k, n))
}

/// 3-D system in x at fixed λ.
pub fn x_system_3d(k: u32, n: u32, lambda: f64) -> OdeSystem {
    OdeSystem::new(3, Variable::X, move |x| build_a3_x(x, lambda, k, n))
}

/// 3-D system in φ at fixed ψ (plain, native-range coupling).
pub fn phi_system(k: u32, n: u32, psi: f64) -> OdeSystem {
    OdeSystem::new(3, Variable::Phi, move |phi| build_a3_phi(phi, psi, k, n))
}

/// Analytic G2-gauged φ-system (valid on φ < ψ):
///
///   ⎡ 2φ−2ψ   2φ^{2k+1}      0              ⎤
///   ⎢ 0       0              1/φ            ⎥
///   ⎣ 0       −2(2n−1)ψ      −4ψ−2(n−1)/φ   ⎦
///
/// Errors when φ^{2k+1} itself overflows (k too large for this envelope).
pub fn phi_system_g2(k: u32, n: u32, psi: f64) -> OdeSystem {
    OdeSystem::new(3, Variable::Phi, move |phi| {
        if !(phi > 0.0) {
            return Err(Error::Domain(format!(
                "gauged φ-system is singular at φ=0 (got φ={phi})"
            )));
        }
        let ln12 = std::f64::consts::LN_2 + (2.0 * f64::from(k) + 1.0) * phi.ln();
        if ln12 > 700.0 {
            return Err(Error::Ode(format!(
                "gauged coupling 2φ^{} overflows at φ={phi} (k={k} beyond \
                 the native envelope)",
                2 * k + 1
            )));
        }
        let nf = f64::from(n);
        Ok(SysMat::from_rows3([
            [2.0 * phi - 2.0 * psi, ln12.exp(), 0.0],
            [0.0, 0.0, 1.0 / phi],
            [
                0.0,
                -2.0 * (2.0 * nf - 1.0) * psi,
                -4.0 * psi - 2.0 * (nf - 1.0) / phi,
            ],
        ]))
    })
}

/// Analytic G3-gauged φ-system (valid on φ ≥ ψ): as the plain system but
/// with coupling 2φ^{2k+1}e^{−(φ−ψ)²} and no diagonal correction.
pub fn phi_system_g3(k: u32, n: u32, psi: f64) -> OdeSystem {
    OdeSystem::new(3, Variable::Phi, move |phi| {
        if !(phi > 0.0) {
            return Err(Error::Domain(format!(
                "gauged φ-system is singular at φ=0 (got φ={phi})"
            )));
        }
        let d = phi - psi;
        let ln12 = std::f64::consts::LN_2 + (2.0 * f64::from(k) + 1.0) * phi.ln() - d * d;
        if ln12 > 700.0 {
            return Err(Error::Ode(format!(
                "gauged coupling overflows at φ={phi} (k={k} beyond the \
                 native envelope)"
            )));
        }
        let nf = f64::from(n);
        Ok(SysMat::from_rows3([
            [0.0, if ln12 < -745.0 { 0.0 } else { ln12.exp() }, 0.0],
            [0.0, 0.0, 1.0 / phi],
            [
                0.0,
                -2.0 * (2.0 * nf - 1.0) * psi,
                -4.0 * psi - 2.0 * (nf - 1.0) / phi,
            ],
        ]))
    })
}
