//! Trajectory drivers that transport H^k_n values along one coordinate.
//!
//! The series and quadrature evaluators in [`crate::hkn`] pay their full cost
//! at every point. The drivers here instead evaluate the function once at a
//! cheap anchor point and then move that value along a trajectory by
//! integrating one of the companion systems from [`crate::pfaffian`]:
//!
//! * [`hgm_x`] integrates the three-dimensional system in φ = √x at fixed
//!   noncentrality. That system damps perturbations of the hypergeometric
//!   pair, so per-step errors decay along the way instead of compounding.
//! * [`hgm_lambda`] integrates the four-dimensional system in λ at fixed x.
//!   This direction carries a rapidly growing spurious mode, so results
//!   drift away from the truth once λ grows past roughly ten; the driver
//!   measures the deviation against quadrature and reports it.
//! * [`hgm_x_enhanced`] integrates the gauged φ-systems whose coefficients
//!   stay representable when x and λ reach 10^8 and beyond, accumulating
//!   the factored-out exponential in log space.
//!
//! The integrator is a classic fixed-step fourth-order scheme plus an
//! embedded fifth(fourth)-order adaptive scheme with PI step-size control.
//! States are renormalized into an accumulated log scale whenever their
//! magnitude approaches the double-precision range limits, which keeps long
//! gauged trajectories finite end to end.

use crate::error::{Error, Result};
use crate::hkn::{hkn_quadrature, hkn_series, hkn_series_theta, HknParams};
use crate::pfaffian::{
    g2_exponent, lambda_system_4d, phi_system, phi_system_g2, phi_system_g3, OdeSystem,
};
use crate::scaled::ScaledReal;
use crate::specfun::{of1_damped, SeriesControl};

/// Stepping strategy for [`rk_integrate`] and the drivers built on it.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RkMode {
    /// Classic fourth-order steps of (at most) the configured size.
    Fixed,
    /// Embedded fifth(fourth)-order steps with PI error control.
    Adaptive,
}

/// Integration options shared by every driver.
#[derive(Clone, Copy, Debug)]
pub struct RkOptions {
    pub mode: RkMode,
    /// Fixed mode: the step size. Adaptive mode: the initial step guess.
    pub step: f64,
    /// Absolute component of the local error tolerance (adaptive mode).
    pub abs_tol: f64,
    /// Relative component of the local error tolerance (adaptive mode).
    pub rel_tol: f64,
    /// When set, record a checkpoint every time the independent variable
    /// advances by this much (measured from the start of each leg; the
    /// checkpoint lands on the first accepted step past the mark).
    pub checkpoint_stride: Option<f64>,
    /// Hard cap on attempted steps across a whole trajectory.
    pub max_steps: usize,
}

impl Default for RkOptions {
    fn default() -> Self {
        RkOptions {
            mode: RkMode::Adaptive,
            step: 1e-4,
            abs_tol: 1e-30,
            rel_tol: 1e-9,
            checkpoint_stride: None,
            max_steps: 1_000_000_000,
        }
    }
}

impl RkOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.step > 0.0) || !self.step.is_finite() {
            return Err(Error::Domain(format!(
                "step size must be positive and finite, got {}",
                self.step
            )));
        }
        if !(self.abs_tol >= 0.0) || !(self.rel_tol >= 0.0) {
            return Err(Error::Domain(
                "error tolerances must be nonnegative".into(),
            ));
        }
        if self.abs_tol == 0.0 && self.rel_tol == 0.0 {
            return Err(Error::Domain(
                "at least one of abs_tol and rel_tol must be positive".into(),
            ));
        }
        if let Some(s) = self.checkpoint_stride {
            if !(s > 0.0) || !s.is_finite() {
                return Err(Error::Domain(format!(
                    "checkpoint stride must be positive and finite, got {s}"
                )));
            }
        }
        if self.max_steps == 0 {
            return Err(Error::Domain("max_steps must be at least 1".into()));
        }
        Ok(())
    }
}

/// One recorded point along a trajectory. The physical state is
/// `state * exp(log_scale)` componentwise.
#[derive(Clone, Copy, Debug)]
pub struct Checkpoint {
    pub var: f64,
    pub state: [f64; 4],
    pub log_scale: f64,
}

/// The recorded path of one integration run.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub dim: usize,
    /// Start point, stride crossings, leg endpoints, and the final point.
    pub checkpoints: Vec<Checkpoint>,
    /// Attempted steps (accepted plus rejected).
    pub steps_taken: usize,
    /// True when every requested target was reached.
    pub completed: bool,
    /// Set when the run stopped early; the checkpoints then hold the partial
    /// path up to the failure point.
    pub failure: Option<String>,
}

impl Trajectory {
    pub fn last(&self) -> &Checkpoint {
        self.checkpoints
            .last()
            .expect("trajectory always records its start point")
    }
}

/// How the anchor value of an initial condition was computed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IcProvenance {
    /// Double series; accurate for moderate arguments (roughly x·λ ≲ 100).
    Series,
    /// Adaptive quadrature of the integral form; reaches astronomical
    /// arguments at the cost of more work per evaluation.
    Quadrature,
}

/// State vector at the anchor point of a trajectory.
///
/// Components are kept in sign/log form because a quadrature anchor at large
/// x·λ has an H value far outside the double range even though the *gauged*
/// state handed to the integrator is of order one.
#[derive(Clone, Debug)]
pub struct InitialCondition {
    /// Value of the independent variable at the anchor (φ = √x for the
    /// three-dimensional systems).
    pub variable: f64,
    pub dim: usize,
    pub state: [ScaledReal; 4],
    pub provenance: IcProvenance,
    /// Estimated absolute error of the anchor H value (+∞ when the estimate
    /// itself exceeds the double range).
    pub est_abs_error: f64,
}

impl InitialCondition {
    /// The state as plain doubles; errors when a component is too large,
    /// which signals that only the gauged driver can use this anchor.
    pub fn native_state(&self) -> Result<[f64; 4]> {
        let mut y = [0.0; 4];
        for i in 0..self.dim {
            let v = self.state[i].to_f64();
            if !v.is_finite() {
                return Err(Error::Domain(format!(
                    "initial state component {i} (ln magnitude {:.3e}) exceeds \
                     the double range; use the gauged driver",
                    self.state[i].ln_abs()
                )));
            }
            y[i] = v;
        }
        Ok(y)
    }
}

/// Outcome of one driver call.
#[derive(Clone, Debug)]
pub struct EvalResult {
    /// H at the target, in sign/log form (exact to native precision when the
    /// magnitude is representable).
    pub value: ScaledReal,
    /// Final integrator state (gauged and scaled as the trajectory left it).
    pub state: [f64; 4],
    /// Accumulated renormalization exponent for `state`.
    pub log_scale: f64,
    pub trajectory: Trajectory,
    /// Relative deviation against an independent quadrature evaluation, when
    /// the driver computes one (the λ-direction driver does).
    pub divergence: Option<f64>,
}

// ---------------------------------------------------------------------------
// Stepping core
// ---------------------------------------------------------------------------

/// Renormalize when any component magnitude passes these bounds.
const RENORM_UPPER: f64 = 1e250;
const RENORM_LOWER: f64 = 1e-250;

fn state_is_finite(y: &[f64; 4], dim: usize) -> bool {
    y[..dim].iter().all(|v| v.is_finite())
}

fn deriv(sys: &OdeSystem, t: f64, y: &[f64; 4]) -> Result<[f64; 4]> {
    Ok(sys.matrix_at(t)?.matvec(y))
}

fn add_scaled(y: &[f64; 4], h: f64, terms: &[(f64, &[f64; 4])]) -> [f64; 4] {
    let mut out = *y;
    for &(c, k) in terms {
        let ch = c * h;
        for i in 0..4 {
            out[i] += ch * k[i];
        }
    }
    out
}

fn rk4_step(sys: &OdeSystem, t: f64, y: &[f64; 4], h: f64) -> Result<[f64; 4]> {
    let k1 = deriv(sys, t, y)?;
    let k2 = deriv(sys, t + 0.5 * h, &add_scaled(y, h, &[(0.5, &k1)]))?;
    let k3 = deriv(sys, t + 0.5 * h, &add_scaled(y, h, &[(0.5, &k2)]))?;
    let k4 = deriv(sys, t + h, &add_scaled(y, h, &[(1.0, &k3)]))?;
    Ok(add_scaled(
        y,
        h / 6.0,
        &[(1.0, &k1), (2.0, &k2), (2.0, &k3), (1.0, &k4)],
    ))
}

// Dormand–Prince 5(4) tableau.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// One embedded step: returns the fifth-order solution and the local error
/// vector (difference against the embedded fourth-order solution).
fn dopri5_step(sys: &OdeSystem, t: f64, y: &[f64; 4], h: f64) -> Result<([f64; 4], [f64; 4])> {
    let k1 = deriv(sys, t, y)?;
    let k2 = deriv(sys, t + C2 * h, &add_scaled(y, h, &[(A21, &k1)]))?;
    let k3 = deriv(sys, t + C3 * h, &add_scaled(y, h, &[(A31, &k1), (A32, &k2)]))?;
    let k4 = deriv(
        sys,
        t + C4 * h,
        &add_scaled(y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]),
    )?;
    let k5 = deriv(
        sys,
        t + C5 * h,
        &add_scaled(y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
    )?;
    let k6 = deriv(
        sys,
        t + h,
        &add_scaled(
            y,
            h,
            &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
        ),
    )?;
    let y5 = add_scaled(
        y,
        h,
        &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)],
    );
    let k7 = deriv(sys, t + h, &y5)?;
    let mut err = [0.0; 4];
    for i in 0..4 {
        err[i] = h
            * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
    }
    Ok((y5, err))
}

/// Shared stepping state. One engine instance carries a trajectory across
/// several legs, possibly under different coefficient matrices (the gauged
/// driver swaps systems at the gauge boundary).
struct Engine {
    dim: usize,
    opts: RkOptions,
    t: f64,
    y: [f64; 4],
    log_scale: f64,
    /// Adaptive step magnitude carried between legs; 0 until initialized.
    h_mag: f64,
    facold: f64,
    last_rejected: bool,
    steps: usize,
    checkpoints: Vec<Checkpoint>,
}

impl Engine {
    fn new(dim: usize, t0: f64, y0: [f64; 4], opts: &RkOptions) -> Engine {
        let mut e = Engine {
            dim,
            opts: *opts,
            t: t0,
            y: y0,
            log_scale: 0.0,
            h_mag: 0.0,
            facold: 1e-4,
            last_rejected: false,
            steps: 0,
            checkpoints: Vec::new(),
        };
        e.record();
        e
    }

    fn record(&mut self) {
        if self.checkpoints.last().is_none_or(|c| c.var != self.t) {
            self.checkpoints.push(Checkpoint {
                var: self.t,
                state: self.y,
                log_scale: self.log_scale,
            });
        }
    }

    fn renormalize(&mut self) {
        let mut m: f64 = 0.0;
        for i in 0..self.dim {
            m = m.max(self.y[i].abs());
        }
        if m.is_finite() && m > 0.0 && !(RENORM_LOWER..=RENORM_UPPER).contains(&m) {
            let l = m.ln();
            for i in 0..self.dim {
                self.y[i] /= m;
            }
            self.log_scale += l;
        }
    }

    /// Advance to `target` under `sys`. `Ok(None)` means the target was
    /// reached; `Ok(Some(msg))` is an integration failure with the partial
    /// path preserved. `Err` is reserved for precondition violations.
    fn advance(&mut self, sys: &OdeSystem, target: f64) -> Result<Option<String>> {
        if sys.dim != self.dim {
            return Err(Error::Domain(format!(
                "system dimension {} does not match trajectory dimension {}",
                sys.dim, self.dim
            )));
        }
        if !target.is_finite() {
            return Err(Error::Domain(format!("target must be finite, got {target}")));
        }
        if target == self.t {
            self.record();
            return Ok(None);
        }
        let dir = (target - self.t).signum();
        let next_mark = self
            .opts
            .checkpoint_stride
            .map(|s| self.t + s * dir);
        let failure = match self.opts.mode {
            RkMode::Fixed => self.advance_fixed(sys, target, dir, next_mark),
            RkMode::Adaptive => self.advance_adaptive(sys, target, dir, next_mark),
        }?;
        if failure.is_none() {
            self.record();
        }
        Ok(failure)
    }

    fn pass_marks(&mut self, dir: f64, next_mark: &mut Option<f64>) {
        if let (Some(mark), Some(stride)) = (next_mark.as_mut(), self.opts.checkpoint_stride) {
            while (self.t - *mark) * dir >= 0.0 {
                self.record();
                *mark += stride * dir;
            }
        }
    }

    fn advance_fixed(
        &mut self,
        sys: &OdeSystem,
        target: f64,
        dir: f64,
        mut next_mark: Option<f64>,
    ) -> Result<Option<String>> {
        let len = (target - self.t).abs();
        let n = (len / self.opts.step).ceil().max(1.0);
        if n > 9.0e15 {
            return Ok(Some(format!(
                "fixed-step count {n:.3e} is out of range for leg ending at {target:.6e}"
            )));
        }
        let n = n as u64;
        let h = (target - self.t) / n as f64;
        for i in 0..n {
            if self.steps >= self.opts.max_steps {
                return Ok(Some(format!(
                    "step budget of {} exhausted at {:.9e}",
                    self.opts.max_steps, self.t
                )));
            }
            let ynew = match rk4_step(sys, self.t, &self.y, h) {
                Ok(v) => v,
                Err(e) => {
                    return Ok(Some(format!(
                        "coefficient matrix unavailable near {:.9e}: {e}",
                        self.t
                    )))
                }
            };
            self.steps += 1;
            self.t = if i + 1 == n {
                target
            } else {
                self.t + h
            };
            self.y = ynew;
            if !state_is_finite(&self.y, self.dim) {
                return Ok(Some(format!("state became non-finite at {:.9e}", self.t)));
            }
            self.renormalize();
            self.pass_marks(dir, &mut next_mark);
        }
        Ok(None)
    }

    fn advance_adaptive(
        &mut self,
        sys: &OdeSystem,
        target: f64,
        dir: f64,
        mut next_mark: Option<f64>,
    ) -> Result<Option<String>> {
        if self.h_mag == 0.0 {
            self.h_mag = self.opts.step;
        }
        loop {
            if (target - self.t) * dir <= 0.0 {
                return Ok(None);
            }
            if self.steps >= self.opts.max_steps {
                return Ok(Some(format!(
                    "step budget of {} exhausted at {:.9e}",
                    self.opts.max_steps, self.t
                )));
            }
            let min_h = 16.0 * f64::EPSILON * self.t.abs().max(1e-6);
            if self.h_mag < min_h {
                return Ok(Some(format!(
                    "step size underflow ({:.3e}) at {:.9e}",
                    self.h_mag, self.t
                )));
            }
            // Clamp the attempt so the leg lands exactly on the target, but
            // keep the unclamped magnitude as the memory for the next leg.
            let mut h = self.h_mag * dir;
            let mut clamped = false;
            if (self.t + h - target) * dir > 0.0 {
                h = target - self.t;
                clamped = true;
            }
            let (y5, errv) = match dopri5_step(sys, self.t, &self.y, h) {
                Ok(p) => p,
                Err(e) => {
                    return Ok(Some(format!(
                        "coefficient matrix unavailable near {:.9e}: {e}",
                        self.t
                    )))
                }
            };
            self.steps += 1;
            let mut acc = 0.0;
            for i in 0..self.dim {
                let sc = self.opts.abs_tol
                    + self.opts.rel_tol * self.y[i].abs().max(y5[i].abs());
                let r = errv[i] / sc;
                acc += r * r;
            }
            let err = (acc / self.dim as f64).sqrt();
            if err.is_finite() && err <= 1.0 {
                self.t = if clamped { target } else { self.t + h };
                self.y = y5;
                if !state_is_finite(&self.y, self.dim) {
                    return Ok(Some(format!(
                        "state became non-finite at {:.9e}",
                        self.t
                    )));
                }
                self.renormalize();
                self.pass_marks(dir, &mut next_mark);
                let mut fac = 0.9 * err.max(1e-12).powf(-0.16) * self.facold.powf(0.04);
                fac = fac.clamp(0.2, 5.0);
                if self.last_rejected {
                    fac = fac.min(1.0);
                }
                self.facold = err.max(1e-4);
                self.last_rejected = false;
                if !clamped {
                    self.h_mag *= fac;
                }
            } else {
                let shrink = if err.is_finite() {
                    (0.9 * err.powf(-0.2)).clamp(0.1, 0.9)
                } else {
                    0.1
                };
                self.h_mag = h.abs() * shrink;
                self.last_rejected = true;
            }
        }
    }

    fn finish(mut self, failure: Option<String>) -> Trajectory {
        if failure.is_some() {
            // Preserve the last reached point of a partial run.
            self.record();
        }
        Trajectory {
            dim: self.dim,
            checkpoints: self.checkpoints,
            steps_taken: self.steps,
            completed: failure.is_none(),
            failure,
        }
    }
}

/// Integrate `sys` from the anchor of `ic` to `target`.
///
/// Returns `Err` only for precondition violations (bad options, target equal
/// to the anchor, target on the other side of the coordinate singularity at
/// zero, anchor not representable in doubles). Runtime integration failures
/// come back as `Ok` with `completed == false` and the partial path intact.
pub fn rk_integrate(
    sys: &OdeSystem,
    ic: &InitialCondition,
    target: f64,
    opts: &RkOptions,
) -> Result<Trajectory> {
    opts.validate()?;
    if target == ic.variable {
        return Err(Error::Domain(
            "target coincides with the anchor point; nothing to integrate".into(),
        ));
    }
    if target * ic.variable < 0.0 {
        return Err(Error::Domain(format!(
            "target {target:.6e} and anchor {:.6e} straddle the singular point 0",
            ic.variable
        )));
    }
    let y0 = ic.native_state()?;
    let mut engine = Engine::new(ic.dim, ic.variable, y0, opts);
    let failure = engine.advance(sys, target)?;
    Ok(engine.finish(failure))
}

// ---------------------------------------------------------------------------
// Anchor construction
// ---------------------------------------------------------------------------

/// Build the three-component anchor state (H, v, θ_φ v) at x0, where
/// v(φ) = e^{−2φψ}·₀F₁(;n;(φψ)²) is the exponentially damped hypergeometric
/// factor and ψ = √λ.
pub fn make_ic(
    k: u32,
    n: u32,
    lambda: f64,
    x0: f64,
    provenance: IcProvenance,
) -> Result<InitialCondition> {
    let p = HknParams::new(k, n)?;
    if !(x0 > 0.0) || !x0.is_finite() {
        return Err(Error::Domain(format!(
            "anchor point x0 must be positive and finite, got {x0}"
        )));
    }
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(Error::Domain(format!(
            "noncentrality must be nonnegative and finite, got {lambda}"
        )));
    }
    let (v, theta_v) = of1_damped(n, x0 * lambda);
    let h = match provenance {
        IcProvenance::Series => {
            let r = hkn_series(p, x0, lambda, &SeriesControl::default());
            if !r.converged {
                return Err(Error::NonConvergence {
                    context: format!(
                        "series anchor H^{k}_{n}({x0:.6e}, {lambda:.6e}) stalled; \
                         use a quadrature anchor"
                    ),
                    partial: r.value.to_f64(),
                    terms: r.n_terms_or_steps,
                });
            }
            r
        }
        IcProvenance::Quadrature => {
            let r = hkn_quadrature(p, x0, lambda, 1e-10);
            if !r.converged {
                return Err(Error::NonConvergence {
                    context: format!(
                        "quadrature anchor H^{k}_{n}({x0:.6e}, {lambda:.6e}) did not converge"
                    ),
                    partial: r.value.to_f64(),
                    terms: r.n_terms_or_steps,
                });
            }
            r
        }
    };
    Ok(InitialCondition {
        variable: x0.sqrt(),
        dim: 3,
        state: [
            h.value,
            ScaledReal::from_f64(v),
            ScaledReal::from_f64(theta_v),
            ScaledReal::zero(),
        ],
        provenance,
        est_abs_error: h.abs_err_estimate,
    })
}

// ---------------------------------------------------------------------------
// Drivers
// ---------------------------------------------------------------------------

/// Validate a strictly increasing target grid that starts at or after x0.
fn validate_targets(x0: f64, xs: &[f64]) -> Result<()> {
    if xs.is_empty() {
        return Err(Error::Domain("at least one target is required".into()));
    }
    let mut prev = f64::NEG_INFINITY;
    for &x in xs {
        if !x.is_finite() || !(x > 0.0) {
            return Err(Error::Domain(format!(
                "targets must be positive and finite, got {x}"
            )));
        }
        if x <= prev {
            return Err(Error::Domain(
                "targets must be strictly increasing".into(),
            ));
        }
        prev = x;
    }
    if xs[0] < x0 {
        return Err(Error::Domain(format!(
            "targets must lie at or beyond the anchor point {x0:.6e}, got {:.6e}",
            xs[0]
        )));
    }
    Ok(())
}

fn value_from_component(y0: f64, log_scale: f64, gauge_ln: f64) -> ScaledReal {
    if y0 == 0.0 {
        ScaledReal::zero()
    } else {
        let sign = if y0 < 0.0 { -1 } else { 1 };
        ScaledReal::from_ln(sign, y0.abs().ln() + log_scale + gauge_ln)
    }
}

fn plain_run(
    k: u32,
    n: u32,
    lambda: f64,
    ic: &InitialCondition,
    xs: &[f64],
    opts: &RkOptions,
) -> Result<(Vec<ScaledReal>, Engine)> {
    opts.validate()?;
    let x0 = ic.variable * ic.variable;
    validate_targets(x0, xs)?;
    let sys = phi_system(k, n, lambda.sqrt());
    let y0 = ic.native_state()?;
    let mut engine = Engine::new(ic.dim, ic.variable, y0, opts);
    let mut values = Vec::with_capacity(xs.len());
    for &x in xs {
        let phi_t = x.sqrt();
        if let Some(msg) = engine.advance(&sys, phi_t)? {
            return Err(Error::Ode(msg));
        }
        values.push(value_from_component(engine.y[0], engine.log_scale, 0.0));
    }
    Ok((values, engine))
}

/// Transport H^k_n from a series anchor at x0 to x along the φ = √x
/// direction at fixed noncentrality.
pub fn hgm_x(
    k: u32,
    n: u32,
    lambda: f64,
    x0: f64,
    x: f64,
    opts: &RkOptions,
) -> Result<EvalResult> {
    let ic = make_ic(k, n, lambda, x0, IcProvenance::Series)?;
    if x == x0 {
        let y = ic.native_state()?;
        let engine = Engine::new(ic.dim, ic.variable, y, opts);
        return Ok(EvalResult {
            value: ic.state[0],
            state: y,
            log_scale: 0.0,
            trajectory: engine.finish(None),
            divergence: None,
        });
    }
    let (values, engine) = plain_run(k, n, lambda, &ic, &[x], opts)?;
    Ok(EvalResult {
        value: values[0],
        state: engine.y,
        log_scale: engine.log_scale,
        trajectory: engine.finish(None),
        divergence: None,
    })
}

/// Same as [`hgm_x`] for a strictly increasing grid of targets, reusing one
/// trajectory for the whole grid.
pub fn hgm_x_multi(
    k: u32,
    n: u32,
    lambda: f64,
    x0: f64,
    xs: &[f64],
    opts: &RkOptions,
) -> Result<Vec<ScaledReal>> {
    let ic = make_ic(k, n, lambda, x0, IcProvenance::Series)?;
    if let Some(&first) = xs.first() {
        if first == x0 {
            let rest = &xs[1..];
            let mut out = vec![ic.state[0]];
            if !rest.is_empty() {
                out.extend(plain_run(k, n, lambda, &ic, rest, opts)?.0);
            }
            return Ok(out);
        }
    }
    Ok(plain_run(k, n, lambda, &ic, xs, opts)?.0)
}

/// Transport the θ_λ state of H^k_n from a series anchor at λ0 to λ along
/// the noncentrality direction at fixed x.
///
/// This route is dominated by a spurious growing mode of the companion
/// system; the result carries `divergence`, the measured relative deviation
/// against an independent quadrature evaluation at the target.
pub fn hgm_lambda(
    k: u32,
    n: u32,
    x: f64,
    lambda0: f64,
    lambda: f64,
    opts: &RkOptions,
) -> Result<EvalResult> {
    opts.validate()?;
    let p = HknParams::new(k, n)?;
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!(
            "x must be positive and finite, got {x}"
        )));
    }
    if !(lambda0 > 0.0) || !(lambda > 0.0) || !lambda0.is_finite() || !lambda.is_finite() {
        return Err(Error::Domain(format!(
            "noncentrality anchor and target must be positive and finite, \
             got {lambda0} and {lambda}"
        )));
    }
    let theta0 = hkn_series_theta(p, x, lambda0, &SeriesControl::default())?;
    let divergence_at = |h: f64| -> Option<f64> {
        let q = hkn_quadrature(p, x, lambda, 1e-10);
        if q.converged && !q.value.is_zero() {
            let r = ScaledReal::from_f64(h);
            Some((r.sub(&q.value)).div(&q.value).to_f64().abs())
        } else {
            None
        }
    };
    if lambda == lambda0 {
        let mut engine = Engine::new(4, lambda0, theta0, opts);
        engine.record();
        return Ok(EvalResult {
            value: ScaledReal::from_f64(theta0[0]),
            state: theta0,
            log_scale: 0.0,
            trajectory: engine.finish(None),
            divergence: divergence_at(theta0[0]),
        });
    }
    let sys = lambda_system_4d(k, n, x);
    let mut engine = Engine::new(4, lambda0, theta0, opts);
    if let Some(msg) = engine.advance(&sys, lambda)? {
        return Err(Error::Ode(msg));
    }
    let value = value_from_component(engine.y[0], engine.log_scale, 0.0);
    Ok(EvalResult {
        value,
        state: engine.y,
        log_scale: engine.log_scale,
        divergence: divergence_at(value.to_f64()),
        trajectory: engine.finish(None),
    })
}

/// Gauge exponent in effect at φ: the factored-out exponential is
/// e^{−φ²+2φψ} below the gauge boundary ψ and the constant e^{ψ²} above it.
fn gauge_ln_at(phi: f64, psi: f64) -> f64 {
    if phi < psi {
        g2_exponent(phi, psi)
    } else {
        psi * psi
    }
}

fn gauged_run(
    k: u32,
    n: u32,
    lambda: f64,
    ic: &InitialCondition,
    xs: &[f64],
    opts: &RkOptions,
) -> Result<(Vec<ScaledReal>, Engine)> {
    opts.validate()?;
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::Domain(format!(
            "the gauged driver requires a positive finite noncentrality, got {lambda}"
        )));
    }
    let x0 = ic.variable * ic.variable;
    validate_targets(x0, xs)?;
    let psi = lambda.sqrt();
    let phi0 = ic.variable;

    // Move the anchor into the gauged frame; the gauged H component must be
    // an ordinary double even when H itself is astronomically large.
    let ln_gauge0 = gauge_ln_at(phi0, psi);
    let h_gauged = ic.state[0].mul(&ScaledReal::from_ln(1, -ln_gauge0));
    let h1 = h_gauged.to_f64();
    let v = ic.state[1].to_f64();
    let theta_v = ic.state[2].to_f64();
    if !h1.is_finite() || !v.is_finite() || !theta_v.is_finite() {
        return Err(Error::Domain(
            "anchor state is not representable in the gauged frame".into(),
        ));
    }

    // At the boundary the two gauge factors must agree so the state can pass
    // through unchanged.
    let mismatch = (g2_exponent(psi, psi) - psi * psi).abs();
    if mismatch > 1e-9 * (psi * psi).max(1.0) {
        return Err(Error::Ode(format!(
            "gauge handoff mismatch at the boundary: {mismatch:.3e}"
        )));
    }

    let sys_below = phi_system_g2(k, n, psi);
    let sys_above = phi_system_g3(k, n, psi);
    let mut in_lower = phi0 < psi;
    let mut engine = Engine::new(3, phi0, [h1, v, theta_v, 0.0], opts);
    let mut values = Vec::with_capacity(xs.len());

    for &x in xs {
        let phi_t = x.sqrt();
        if in_lower && phi_t > psi {
            // Stop at the boundary first, then continue in the upper gauge.
            if let Some(msg) = engine.advance(&sys_below, psi)? {
                return Err(Error::Ode(msg));
            }
            in_lower = false;
        }
        let sys = if in_lower { &sys_below } else { &sys_above };
        if let Some(msg) = engine.advance(sys, phi_t)? {
            return Err(Error::Ode(msg));
        }
        values.push(value_from_component(
            engine.y[0],
            engine.log_scale,
            gauge_ln_at(phi_t, psi),
        ));
        if in_lower && phi_t >= psi {
            in_lower = false;
        }
    }
    Ok((values, engine))
}

/// Transport H^k_n in the φ direction under the exponential gauge, starting
/// from an explicit anchor (typically a quadrature anchor near the target
/// for astronomically large arguments).
pub fn hgm_x_enhanced(
    k: u32,
    n: u32,
    lambda: f64,
    ic: &InitialCondition,
    x: f64,
    opts: &RkOptions,
) -> Result<EvalResult> {
    let (values, engine) = gauged_run(k, n, lambda, ic, &[x], opts)?;
    Ok(EvalResult {
        value: values[0],
        state: engine.y,
        log_scale: engine.log_scale,
        trajectory: engine.finish(None),
        divergence: None,
    })
}

/// Same as [`hgm_x_enhanced`] for a strictly increasing grid of targets.
pub fn hgm_x_enhanced_multi(
    k: u32,
    n: u32,
    lambda: f64,
    ic: &InitialCondition,
    xs: &[f64],
    opts: &RkOptions,
) -> Result<Vec<ScaledReal>> {
    Ok(gauged_run(k, n, lambda, ic, xs, opts)?.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pfaffian::{x_system_4d, SysMat, Variable};
    use crate::specfun::lower_incomplete_gamma;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn native_ic(variable: f64, state: &[f64]) -> InitialCondition {
        let mut s = [ScaledReal::zero(); 4];
        for (i, &v) in state.iter().enumerate() {
            s[i] = ScaledReal::from_f64(v);
        }
        InitialCondition {
            variable,
            dim: state.len(),
            state: s,
            provenance: IcProvenance::Series,
            est_abs_error: 0.0,
        }
    }

    fn tight() -> RkOptions {
        RkOptions {
            rel_tol: 1e-12,
            abs_tol: 1e-300,
            ..RkOptions::default()
        }
    }

    #[test]
    fn adaptive_and_fixed_solvers_reproduce_the_exponential() {
        // y' = y componentwise: the identity coefficient matrix.
        let sys = OdeSystem::new(3, Variable::X, |_| Ok(SysMat::identity(3)));
        let ic = native_ic(0.0, &[1.0, 2.0, -0.5]);
        let adaptive = rk_integrate(&sys, &ic, 1.0, &tight()).unwrap();
        assert!(adaptive.completed);
        let end = adaptive.last();
        assert_relative_eq!(end.state[0], 1.0f64.exp(), max_relative = 1e-10);
        assert_relative_eq!(end.state[1], 2.0 * 1.0f64.exp(), max_relative = 1e-10);
        assert_relative_eq!(end.state[2], -0.5 * 1.0f64.exp(), max_relative = 1e-10);

        let fixed = rk_integrate(
            &sys,
            &ic,
            1.0,
            &RkOptions {
                mode: RkMode::Fixed,
                step: 1e-3,
                ..RkOptions::default()
            },
        )
        .unwrap();
        assert!(fixed.completed);
        assert_relative_eq!(fixed.last().state[0], 1.0f64.exp(), max_relative = 1e-10);
        assert_eq!(fixed.steps_taken, 1000);

        // Backward integration returns to the start value.
        let back_ic = native_ic(1.0, &[1.0f64.exp(), 1.0, 1.0]);
        let back = rk_integrate(&sys, &back_ic, 0.0, &tight()).unwrap();
        assert_relative_eq!(back.last().state[0], 1.0, max_relative = 1e-10);
    }

    #[test]
    fn integration_preconditions_are_rejected() {
        let sys = OdeSystem::new(3, Variable::X, |_| Ok(SysMat::identity(3)));
        let ic = native_ic(1.0, &[1.0, 0.0, 0.0]);
        assert!(rk_integrate(&sys, &ic, 1.0, &RkOptions::default()).is_err());
        assert!(rk_integrate(&sys, &ic, -1.0, &RkOptions::default()).is_err());
        let bad = RkOptions {
            rel_tol: -1.0,
            ..RkOptions::default()
        };
        assert!(rk_integrate(&sys, &ic, 2.0, &bad).is_err());
        let zero_tol = RkOptions {
            rel_tol: 0.0,
            abs_tol: 0.0,
            ..RkOptions::default()
        };
        assert!(rk_integrate(&sys, &ic, 2.0, &zero_tol).is_err());
    }

    #[test]
    fn integration_failures_preserve_the_partial_path() {
        // The coefficient matrix disappears past t = 0.5.
        let sys = OdeSystem::new(3, Variable::X, |t| {
            if t > 0.5 {
                Err(Error::Domain("matrix unavailable".into()))
            } else {
                Ok(SysMat::identity(3))
            }
        });
        let ic = native_ic(0.0, &[1.0, 1.0, 1.0]);
        let traj = rk_integrate(&sys, &ic, 1.0, &RkOptions::default()).unwrap();
        assert!(!traj.completed);
        let msg = traj.failure.as_deref().unwrap();
        assert!(msg.contains("matrix unavailable"), "message was: {msg}");
        assert!(traj.steps_taken > 0);
        let last = traj.last();
        assert!(last.var <= 0.6, "failed at {}", last.var);
        assert!(last.state[0] > 1.0, "partial progress should be recorded");

        // A tiny step budget also fails gracefully.
        let sys_ok = OdeSystem::new(3, Variable::X, |_| Ok(SysMat::identity(3)));
        let starved = rk_integrate(
            &sys_ok,
            &ic,
            1.0,
            &RkOptions {
                mode: RkMode::Fixed,
                step: 1e-6,
                max_steps: 10,
                ..RkOptions::default()
            },
        )
        .unwrap();
        assert!(!starved.completed);
        assert!(starved.failure.as_deref().unwrap().contains("budget"));
    }

    #[test]
    fn series_anchor_matches_known_values_and_derivative_structure() {
        // Zero noncentrality: H = γ(k+1, x), v ≡ 1, θ_φ v ≡ 0.
        let ic = make_ic(0, 1, 0.0, 1.0, IcProvenance::Series).unwrap();
        assert_eq!(ic.dim, 3);
        assert_eq!(ic.provenance, IcProvenance::Series);
        assert_relative_eq!(
            ic.state[0].to_f64(),
            0.6321205588285576784,
            max_relative = 5e-10
        );
        assert_relative_eq!(ic.state[1].to_f64(), 1.0, max_relative = 1e-14);
        assert_abs_diff_eq!(ic.state[2].to_f64(), 0.0, epsilon = 1e-14);

        // θ_φ v against a centered difference of v(φ) = damped pair at (φψ)².
        let (n, lambda, x0) = (3u32, 2.5f64, 1.0f64);
        let ic = make_ic(2, n, lambda, x0, IcProvenance::Series).unwrap();
        let phi0 = x0.sqrt();
        let d = 1e-4;
        let vp = of1_damped(n, (phi0 * (1.0 + d)).powi(2) * lambda).0;
        let vm = of1_damped(n, (phi0 * (1.0 - d)).powi(2) * lambda).0;
        let fd = (vp - vm) / (2.0 * d); // already θ-form: d/d(ln φ)
        assert_relative_eq!(ic.state[2].to_f64(), fd, max_relative = 1e-6);
    }

    #[test]
    fn quadrature_anchor_handles_astronomical_magnitudes() {
        // x0 = 9900², λ = 10⁸: H is e^{9.999e7}-sized, far beyond doubles.
        let x0 = 98_010_000.0;
        let lambda = 1e8;
        let ic = make_ic(0, 1, lambda, x0, IcProvenance::Quadrature).unwrap();
        assert_eq!(ic.provenance, IcProvenance::Quadrature);
        assert!(!ic.state[0].is_native());
        let expected_ln = g2_exponent(x0.sqrt(), lambda.sqrt());
        assert!(
            (ic.state[0].ln_abs() - expected_ln).abs() < 10.0,
            "ln H = {}, endpoint exponent = {}",
            ic.state[0].ln_abs(),
            expected_ln
        );
        // Such an anchor cannot enter the ungauged integrator.
        assert!(ic.native_state().is_err());
    }

    #[test]
    fn zero_noncentrality_reduces_to_the_incomplete_gamma_along_the_path() {
        let opts = RkOptions {
            checkpoint_stride: Some(0.25),
            ..tight()
        };
        let res = hgm_x(4, 1, 0.0, 0.01, 15.0, &opts).unwrap();
        // Frozen reference value computed with 50-digit arithmetic (mpmath).
        assert_relative_eq!(
            res.value.to_f64(),
            23.979440610941392791,
            max_relative = 1e-9
        );
        assert!(res.trajectory.checkpoints.len() > 10);
        for c in &res.trajectory.checkpoints {
            let x = c.var * c.var;
            let h = c.state[0] * c.log_scale.exp();
            let want = lower_incomplete_gamma(5.0, x).unwrap();
            assert_abs_diff_eq!(h, want, epsilon = 1e-8 * want.max(1e-30));
        }
    }

    #[test]
    fn transported_values_match_quadrature_at_moderate_arguments() {
        let res = hgm_x(2, 3, 1.0, 1e-3, 5.0, &tight()).unwrap();
        let q = hkn_quadrature(HknParams::new(2, 3).unwrap(), 5.0, 1.0, 1e-12);
        assert!(q.converged);
        assert_relative_eq!(
            res.value.to_f64(),
            q.value.to_f64(),
            max_relative = 1e-8
        );

        // A grid run reproduces a frozen reference value along the way.
        let values = hgm_x_multi(2, 3, 10.0, 0.1, &[5.0, 10.0, 20.0], &tight()).unwrap();
        // Frozen reference value computed with 50-digit arithmetic (mpmath).
        assert_relative_eq!(
            values[1].to_f64(),
            12624.421830916782537,
            max_relative = 1e-8
        );
        let q20 = hkn_quadrature(HknParams::new(2, 3).unwrap(), 20.0, 10.0, 1e-12);
        assert_relative_eq!(
            values[2].to_f64(),
            q20.value.to_f64(),
            max_relative = 1e-8
        );
    }

    #[test]
    fn degenerate_target_returns_the_anchor_value() {
        let res = hgm_x(2, 3, 1.0, 1.0, 1.0, &RkOptions::default()).unwrap();
        let direct = hkn_series(
            HknParams::new(2, 3).unwrap(),
            1.0,
            1.0,
            &SeriesControl::default(),
        );
        assert_eq!(res.value.to_f64(), direct.value.to_f64());
        assert!(res.trajectory.completed);
        assert_eq!(res.trajectory.steps_taken, 0);
    }

    #[test]
    fn starting_point_does_not_affect_the_result() {
        let mut got = Vec::new();
        for &x0 in &[1e-3, 1e-2, 1e-1] {
            got.push(hgm_x(2, 3, 10.0, x0, 10.0, &tight()).unwrap().value.to_f64());
        }
        // Frozen reference value computed with 50-digit arithmetic (mpmath).
        for &v in &got {
            assert_relative_eq!(v, 12624.421830916782537, max_relative = 1e-8);
        }
        assert_relative_eq!(got[0], got[1], max_relative = 1e-9);
        assert_relative_eq!(got[1], got[2], max_relative = 1e-9);
    }

    #[test]
    fn fixed_step_agrees_with_adaptive() {
        let adaptive = hgm_x(2, 3, 1.0, 0.01, 4.0, &tight()).unwrap();
        let fixed = hgm_x(
            2,
            3,
            1.0,
            0.01,
            4.0,
            &RkOptions {
                mode: RkMode::Fixed,
                step: 1e-4,
                ..RkOptions::default()
            },
        )
        .unwrap();
        assert_relative_eq!(
            adaptive.value.to_f64(),
            fixed.value.to_f64(),
            max_relative = 1e-7
        );
    }

    #[test]
    fn trajectory_grows_monotonically_and_respects_the_limit() {
        let p = HknParams::new(2, 3).unwrap();
        let lambda = 50.0;
        let opts = RkOptions {
            checkpoint_stride: Some(0.2),
            ..tight()
        };
        let res = hgm_x(2, 3, lambda, 0.01, 100.0, &opts).unwrap();
        let ceiling = crate::hkn::hkn_saddle_limit(p, lambda).unwrap().ln_abs();
        let mut prev_h = -f64::INFINITY;
        let mut prev_var = -f64::INFINITY;
        for c in &res.trajectory.checkpoints {
            assert!(c.var > prev_var);
            prev_var = c.var;
            let ln_h = if c.state[0] > 0.0 {
                c.state[0].ln() + c.log_scale
            } else {
                f64::NEG_INFINITY
            };
            // The integral of a positive integrand never decreases and never
            // exceeds its x → ∞ limit.
            assert!(ln_h >= prev_h - 1e-12, "H must be nondecreasing");
            prev_h = ln_h;
            assert!(ln_h <= ceiling + 1e-6, "H exceeded its limit");
            assert!(c.state[1] > 0.0, "damped factor must stay positive");
        }
        // By x = 100 the integral has essentially saturated at λ = 50.
        assert_relative_eq!(res.value.ln_abs(), ceiling, max_relative = 1e-3);
    }

    #[test]
    fn transported_solution_satisfies_the_scalar_recurrence() {
        // H as a function of u = ln x obeys
        //   f''' + (A+B) f'' + (AB + x − xλ) f' = 0,
        // with A = x−k−1, B = x−k+n−2. Check the residual with five-point
        // finite differences on a trajectory grid.
        let (k, n, lambda) = (2u32, 3u32, 3.0f64);
        let d = 10f64.powf(-2.75);
        let bases = [2.0f64, 5.0, 10.0];
        let mut grid = Vec::new();
        for &b in &bases {
            for j in -2i32..=2 {
                grid.push(b * (j as f64 * d).exp());
            }
        }
        grid.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let vals = hgm_x_multi(k, n, lambda, 0.01, &grid, &tight()).unwrap();
        for (bi, &x) in bases.iter().enumerate() {
            let f: Vec<f64> = (0..5).map(|j| vals[bi * 5 + j].to_f64()).collect();
            let d1 = (-f[4] + 8.0 * f[3] - 8.0 * f[1] + f[0]) / (12.0 * d);
            let d2 =
                (-f[4] + 16.0 * f[3] - 30.0 * f[2] + 16.0 * f[1] - f[0]) / (12.0 * d * d);
            let d3 = (f[4] - 2.0 * f[3] + 2.0 * f[1] - f[0]) / (2.0 * d * d * d);
            let a = x - (k as f64) - 1.0;
            let b = x - (k as f64) + (n as f64) - 2.0;
            let t3 = d3;
            let t2 = (a + b) * d2;
            let t1 = (a * b + x - x * lambda) * d1;
            let residual = t3 + t2 + t1;
            let scale = t3.abs() + t2.abs() + t1.abs();
            assert!(
                residual.abs() < 1e-3 * scale,
                "x = {x}: residual {residual:.3e} vs scale {scale:.3e}"
            );
        }
    }

    #[test]
    fn four_dimensional_and_three_dimensional_routes_agree() {
        // Drive the θ_λ state in x with the four-dimensional system and
        // compare the H component against the φ-direction driver.
        let (k, n, lambda) = (2u32, 3u32, 3.0f64);
        let p = HknParams::new(k, n).unwrap();
        let theta0 = hkn_series_theta(p, 0.5, lambda, &SeriesControl::default()).unwrap();
        let ic = native_ic(0.5, &theta0);
        let sys = x_system_4d(k, n, lambda);
        let traj = rk_integrate(&sys, &ic, 4.0, &tight()).unwrap();
        assert!(traj.completed);
        let via_4d = traj.last().state[0] * traj.last().log_scale.exp();
        let via_3d = hgm_x(k, n, lambda, 0.5, 4.0, &tight()).unwrap().value.to_f64();
        assert_relative_eq!(via_4d, via_3d, max_relative = 1e-6);
    }

    #[test]
    fn noncentrality_direction_drifts_at_large_noncentrality() {
        let opts = tight();
        // Trivial target: the anchor comes back unchanged.
        let same = hgm_lambda(2, 3, 1.0, 1e-5, 1e-5, &opts).unwrap();
        assert_relative_eq!(
            same.value.to_f64(),
            0.1606031739062918999794,
            max_relative = 1e-9
        );

        // Near the anchor the transported value is still accurate.
        let near = hgm_lambda(2, 3, 1.0, 1e-5, 3e-5, &opts).unwrap();
        let series = hkn_series(
            HknParams::new(2, 3).unwrap(),
            1.0,
            3e-5,
            &SeriesControl::default(),
        );
        assert_relative_eq!(
            near.value.to_f64(),
            series.value.to_f64(),
            max_relative = 1e-6
        );
        assert!(near.divergence.unwrap() < 1e-4);

        let mid = hgm_lambda(2, 3, 1.0, 1e-5, 1.0, &opts).unwrap();
        assert!(
            mid.divergence.unwrap() < 0.01,
            "divergence at λ=1 was {}",
            mid.divergence.unwrap()
        );

        // Far from the anchor the spurious mode has taken over.
        let far = hgm_lambda(2, 3, 1.0, 1e-5, 40.0, &opts).unwrap();
        assert!(
            far.divergence.unwrap() > 0.1,
            "divergence at λ=40 was only {}",
            far.divergence.unwrap()
        );
    }

    #[test]
    fn gauged_driver_matches_the_plain_driver_at_moderate_noncentrality() {
        // The trajectory crosses the gauge boundary ψ = 1 on its way.
        let ic = make_ic(2, 3, 1.0, 1e-4, IcProvenance::Series).unwrap();
        let gauged = hgm_x_enhanced(2, 3, 1.0, &ic, 9.0, &tight()).unwrap();
        let plain = hgm_x(2, 3, 1.0, 1e-4, 9.0, &tight()).unwrap();
        assert_relative_eq!(
            gauged.value.to_f64(),
            plain.value.to_f64(),
            max_relative = 1e-8
        );

        // Multi-target grids work across the boundary too.
        let values =
            hgm_x_enhanced_multi(2, 3, 1.0, &ic, &[0.25, 1.0, 4.0, 9.0], &tight()).unwrap();
        for (i, &x) in [0.25, 1.0, 4.0, 9.0].iter().enumerate() {
            let q = hkn_quadrature(HknParams::new(2, 3).unwrap(), x, 1.0, 1e-12);
            assert_relative_eq!(
                values[i].to_f64(),
                q.value.to_f64(),
                max_relative = 1e-7
            );
        }
    }

    #[test]
    fn gauged_driver_reaches_astronomical_arguments() {
        // λ = x = 10⁸: far beyond doubles, anchored by quadrature nearby.
        let lambda = 1e8;
        let x0 = 98_010_000.0; // φ0 = 9900, boundary ψ = 10000
        let ic = make_ic(0, 1, lambda, x0, IcProvenance::Quadrature).unwrap();
        let res = hgm_x_enhanced(0, 1, lambda, &ic, 1e8, &RkOptions::default()).unwrap();
        let ln_h = res.value.ln_abs();
        // At the boundary the value is close to half the gauge factor.
        assert!(
            (ln_h - lambda - 0.5f64.ln()).abs() < 0.01,
            "ln H = {ln_h}, expected ≈ {}",
            lambda + 0.5f64.ln()
        );
        let q = hkn_quadrature(HknParams::new(0, 1).unwrap(), 1e8, lambda, 1e-9);
        assert!(q.converged);
        assert!(
            (ln_h - q.value.ln_abs()).abs() < 1e-4,
            "transported ln H = {ln_h}, quadrature ln H = {}",
            q.value.ln_abs()
        );
    }
}
