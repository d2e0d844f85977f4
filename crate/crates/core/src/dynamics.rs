//! The primal-dual accelerated flow
//!
//! ```text
//! ẍ = −(α/t)ẋ − ∇φ(x) − Aᵀ(λ + βtλ̇) − Aᵀ(Ax − b)
//! λ̈ = −(α/t)λ̇ + A(x + βtẋ) − b
//! ```
//!
//! together with the augmented Lagrangian, the two parameter regimes and their
//! Lyapunov functions, and the first-order saddle-point flow used as a baseline.

use nalgebra::{DVector, DVectorView};
use serde::{Deserialize, Serialize};

use crate::convex::{KktPoint, ProblemInstance, KKT_CERT_TOL};
use crate::error::{check_len, Error, Result};
use crate::integrator::{OdeSystem, SecondOrderSystem};

/// Default initial time; the flow is singular at t = 0.
pub const DEFAULT_T0: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    /// α > 3, β = 1/2.
    Fast,
    /// 0 < α ≤ 3, β = 3/(2α).
    Slow,
    /// Arbitrary (α, β); diagnostics only.
    Custom,
}

/// How [`make_config`] should choose the regime.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RegimeHint {
    /// Pick by α.
    Auto,
    Fast,
    Slow,
    Custom { beta: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub alpha: f64,
    pub beta: f64,
    pub t0: f64,
    pub regime: Regime,
}

impl SolverConfig {
    pub fn with_t0(mut self, t0: f64) -> Result<Self> {
        if !(t0 > 0.0 && t0.is_finite()) {
            return Err(Error::SingularDamping(t0));
        }
        self.t0 = t0;
        Ok(self)
    }
}

pub fn fast_beta() -> f64 {
    0.5
}

pub fn slow_beta(alpha: f64) -> f64 {
    3.0 / (2.0 * alpha)
}

/// Selects the regime and β for a given α.
pub fn make_config(alpha: f64, hint: RegimeHint) -> Result<SolverConfig> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::InvalidArgument(format!("alpha must be positive, got {alpha}")));
    }
    let (regime, beta) = match hint {
        RegimeHint::Auto if alpha > 3.0 => (Regime::Fast, fast_beta()),
        RegimeHint::Auto => (Regime::Slow, slow_beta(alpha)),
        RegimeHint::Fast if alpha > 3.0 => (Regime::Fast, fast_beta()),
        RegimeHint::Fast => {
            return Err(Error::InvalidArgument(format!(
                "the fast regime requires alpha > 3, got {alpha}"
            )))
        }
        RegimeHint::Slow if alpha <= 3.0 => (Regime::Slow, slow_beta(alpha)),
        RegimeHint::Slow => {
            return Err(Error::InvalidArgument(format!(
                "the slow regime requires alpha <= 3, got {alpha}"
            )))
        }
        RegimeHint::Custom { beta } => {
            if !(beta > 0.0 && beta.is_finite()) {
                return Err(Error::InvalidArgument(format!("beta must be positive, got {beta}")));
            }
            (Regime::Custom, beta)
        }
    };
    Ok(SolverConfig {
        alpha,
        beta,
        t0: DEFAULT_T0,
        regime,
    })
}

/// Position and velocity of the primal-dual flow at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct PDState {
    pub t: f64,
    pub x: DVector<f64>,
    pub lambda: DVector<f64>,
    pub x_dot: DVector<f64>,
    pub lambda_dot: DVector<f64>,
}

impl PDState {
    /// Zero velocities and zero multiplier.
    pub fn at_rest(t: f64, x: DVector<f64>, dim_dual: usize) -> Self {
        let q = x.len();
        Self {
            t,
            x,
            lambda: DVector::zeros(dim_dual),
            x_dot: DVector::zeros(q),
            lambda_dot: DVector::zeros(dim_dual),
        }
    }

    pub fn check_dims(&self, p: &ProblemInstance) -> Result<()> {
        check_len("state x", p.dim_primal(), self.x.len())?;
        check_len("state x_dot", p.dim_primal(), self.x_dot.len())?;
        check_len("state lambda", p.dim_dual(), self.lambda.len())?;
        check_len("state lambda_dot", p.dim_dual(), self.lambda_dot.len())
    }

    /// Packs into the integrator layout `[x, λ, ẋ, λ̇]`.
    pub fn to_flat(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(2 * (self.x.len() + self.lambda.len()));
        v.extend_from_slice(self.x.as_slice());
        v.extend_from_slice(self.lambda.as_slice());
        v.extend_from_slice(self.x_dot.as_slice());
        v.extend_from_slice(self.lambda_dot.as_slice());
        v
    }

    pub fn from_flat(t: f64, y: &[f64], q: usize, m: usize) -> Self {
        Self {
            t,
            x: DVector::from_column_slice(&y[..q]),
            lambda: DVector::from_column_slice(&y[q..q + m]),
            x_dot: DVector::from_column_slice(&y[q + m..2 * q + m]),
            lambda_dot: DVector::from_column_slice(&y[2 * q + m..2 * (q + m)]),
        }
    }

    pub fn is_finite(&self) -> bool {
        [&self.x, &self.lambda, &self.x_dot, &self.lambda_dot]
            .iter()
            .all(|v| v.iter().all(|e| e.is_finite()))
            && self.t.is_finite()
    }
}

/// `φ(x) + λᵀ(Ax − b) + ½‖Ax − b‖²`.
pub fn augmented_lagrangian(p: &ProblemInstance, x: &DVector<f64>, lambda: &DVector<f64>) -> Result<f64> {
    check_len("dual point", p.dim_dual(), lambda.len())?;
    let r = p.constraint_residual(x)?;
    Ok(p.eval_objective(x)? + lambda.dot(&r) + 0.5 * r.norm_squared())
}

fn ensure_certified(p: &ProblemInstance, kkt: &KktPoint) -> Result<()> {
    let (stationarity, feasibility) = p.kkt_residual(&kkt.x_star, &kkt.lambda_star)?;
    if stationarity > KKT_CERT_TOL || feasibility > KKT_CERT_TOL {
        return Err(Error::Uncertified {
            stationarity,
            feasibility,
        });
    }
    Ok(())
}

/// `L(x, λ*) − L(x*, λ*)`, non-negative up to rounding by the saddle property.
pub fn lagrangian_gap(p: &ProblemInstance, kkt: &KktPoint, x: &DVector<f64>) -> Result<f64> {
    ensure_certified(p, kkt)?;
    Ok(augmented_lagrangian(p, x, &kkt.lambda_star)? - augmented_lagrangian(p, &kkt.x_star, &kkt.lambda_star)?)
}

/// The accelerated flow as a second-order system over positions `[x, λ]`.
#[derive(Debug, Clone, Copy)]
pub struct AcceleratedField<'a> {
    problem: &'a ProblemInstance,
    alpha: f64,
    beta: f64,
}

impl<'a> AcceleratedField<'a> {
    pub fn new(problem: &'a ProblemInstance, cfg: &SolverConfig) -> Self {
        Self {
            problem,
            alpha: cfg.alpha,
            beta: cfg.beta,
        }
    }
}

impl SecondOrderSystem for AcceleratedField<'_> {
    fn n_pos(&self) -> usize {
        self.problem.dim_primal() + self.problem.dim_dual()
    }

    fn accel(&self, t: f64, pos: &[f64], vel: &[f64], acc: &mut [f64]) {
        let p = self.problem;
        let (q, m) = (p.dim_primal(), p.dim_dual());
        let a = p.constraint_matrix();
        let b = p.constraint_rhs();
        let x = DVectorView::from_slice(&pos[..q], q);
        let lambda = DVectorView::from_slice(&pos[q..], m);
        let x_dot = DVectorView::from_slice(&vel[..q], q);
        let lambda_dot = DVectorView::from_slice(&vel[q..], m);
        let damp = self.alpha / t;
        let bt = self.beta * t;

        // primal: −(α/t)ẋ − ∇φ(x) − Aᵀ(λ + βtλ̇ + Ax − b)
        let (acc_x, acc_l) = acc.split_at_mut(q);
        p.objective().gradient(&pos[..q], acc_x);
        let dual_arg = a * x - b + lambda + lambda_dot * bt;
        let pull = a.tr_mul(&dual_arg);
        for i in 0..q {
            acc_x[i] = -damp * x_dot[i] - acc_x[i] - pull[i];
        }
        // dual: −(α/t)λ̇ + A(x + βtẋ) − b
        let ahead = a * (x + x_dot * bt) - b;
        for j in 0..m {
            acc_l[j] = -damp * lambda_dot[j] + ahead[j];
        }
    }
}

/// Returns `(ẍ, λ̈)` at state `s`.
pub fn pd_vector_field(
    p: &ProblemInstance,
    cfg: &SolverConfig,
    s: &PDState,
) -> Result<(DVector<f64>, DVector<f64>)> {
    if !(s.t > 0.0) {
        return Err(Error::SingularDamping(s.t));
    }
    s.check_dims(p)?;
    let q = p.dim_primal();
    let field = AcceleratedField::new(p, cfg);
    let pos: Vec<f64> = s.x.iter().chain(s.lambda.iter()).copied().collect();
    let vel: Vec<f64> = s.x_dot.iter().chain(s.lambda_dot.iter()).copied().collect();
    let mut acc = vec![0.0; pos.len()];
    field.accel(s.t, &pos, &vel, &mut acc);
    Ok((
        DVector::from_column_slice(&acc[..q]),
        DVector::from_column_slice(&acc[q..]),
    ))
}

/// First-order saddle-point flow `ẋ = −∇ₓL`, `λ̇ = ∇_λL` as an ODE over `[x, λ]`.
#[derive(Debug, Clone, Copy)]
pub struct SaddleFlow<'a> {
    problem: &'a ProblemInstance,
}

impl<'a> SaddleFlow<'a> {
    pub fn new(problem: &'a ProblemInstance) -> Self {
        Self { problem }
    }
}

impl OdeSystem for SaddleFlow<'_> {
    fn dim(&self) -> usize {
        self.problem.dim_primal() + self.problem.dim_dual()
    }

    fn rhs(&self, _t: f64, y: &[f64], dy: &mut [f64]) {
        let p = self.problem;
        let (q, m) = (p.dim_primal(), p.dim_dual());
        let a = p.constraint_matrix();
        let x = DVectorView::from_slice(&y[..q], q);
        let lambda = DVectorView::from_slice(&y[q..], m);
        let r = a * x - p.constraint_rhs();
        let (dx, dl) = dy.split_at_mut(q);
        p.objective().gradient(&y[..q], dx);
        let pull = a.tr_mul(&(lambda + &r));
        for i in 0..q {
            dx[i] = -dx[i] - pull[i];
        }
        dl.copy_from_slice(r.as_slice());
    }
}

/// Returns `(−∇φ(x) − Aᵀλ − Aᵀ(Ax − b), Ax − b)`.
pub fn baseline_saddle_flow(
    p: &ProblemInstance,
    x: &DVector<f64>,
    lambda: &DVector<f64>,
) -> Result<(DVector<f64>, DVector<f64>)> {
    check_len("primal point", p.dim_primal(), x.len())?;
    check_len("dual point", p.dim_dual(), lambda.len())?;
    let q = p.dim_primal();
    let y: Vec<f64> = x.iter().chain(lambda.iter()).copied().collect();
    let mut dy = vec![0.0; y.len()];
    SaddleFlow::new(p).rhs(0.0, &y, &mut dy);
    Ok((
        DVector::from_column_slice(&dy[..q]),
        DVector::from_column_slice(&dy[q..]),
    ))
}

fn require_regime(cfg: &SolverConfig, expected: Regime) -> Result<()> {
    if cfg.regime != expected {
        return Err(Error::RegimeMismatch {
            expected,
            got: cfg.regime,
        });
    }
    Ok(())
}

/// Energy for α > 3, β = ½:
///
/// ```text
/// V = t²[L(x,λ*) − L(x*,λ*)]
///   + 2‖x + βtẋ − x*‖² + 2(αβ − β − 1)‖x − x*‖²
///   + 2‖λ + βtλ̇ − λ*‖² + 2(αβ − β − 1)‖λ − λ*‖²
/// ```
pub fn lyapunov_fast(p: &ProblemInstance, kkt: &KktPoint, cfg: &SolverConfig, s: &PDState) -> Result<f64> {
    require_regime(cfg, Regime::Fast)?;
    s.check_dims(p)?;
    let (alpha, beta, t) = (cfg.alpha, cfg.beta, s.t);
    let gap = lagrangian_gap(p, kkt, &s.x)?;
    let coeff = 2.0 * (alpha * beta - beta - 1.0);
    let dx = &s.x - &kkt.x_star;
    let dl = &s.lambda - &kkt.lambda_star;
    let v1 = t * t * gap;
    let v2 = 2.0 * (&dx + &s.x_dot * (beta * t)).norm_squared() + coeff * dx.norm_squared();
    let v3 = 2.0 * (&dl + &s.lambda_dot * (beta * t)).norm_squared() + coeff * dl.norm_squared();
    Ok(v1 + v2 + v3)
}

/// Time-varying gains of the slow-regime energy: `(p, θ(t), η(t))` with
/// `p = α/3`, `θ = 2p t^{p−1}`, `η = (2(3−α)α/9) t^{2α/3−2}`.
pub fn slow_gains(alpha: f64, t: f64) -> (f64, f64, f64) {
    let p = alpha / 3.0;
    let theta = 2.0 * p * t.powf(p - 1.0);
    let eta = 2.0 * (3.0 - alpha) * alpha / 9.0 * t.powf(2.0 * alpha / 3.0 - 2.0);
    (p, theta, eta)
}

/// Energy for 0 < α ≤ 3, β = 3/(2α):
///
/// ```text
/// V = t^{2p}[L(x,λ*) − L(x*,λ*)]
///   + ½‖θ(x − x*) + t^p ẋ‖² + (η/2)‖x − x*‖²
///   + ½‖θ(λ − λ*) + t^p λ̇‖² + (η/2)‖λ − λ*‖²
/// ```
pub fn lyapunov_slow(p: &ProblemInstance, kkt: &KktPoint, cfg: &SolverConfig, s: &PDState) -> Result<f64> {
    require_regime(cfg, Regime::Slow)?;
    s.check_dims(p)?;
    let t = s.t;
    let (pw, theta, eta) = slow_gains(cfg.alpha, t);
    let tp = t.powf(pw);
    let gap = lagrangian_gap(p, kkt, &s.x)?;
    let dx = &s.x - &kkt.x_star;
    let dl = &s.lambda - &kkt.lambda_star;
    let v1 = t.powf(2.0 * pw) * gap;
    let v2 = 0.5 * (&dx * theta + &s.x_dot * tp).norm_squared() + 0.5 * eta * dx.norm_squared();
    let v3 = 0.5 * (&dl * theta + &s.lambda_dot * tp).norm_squared() + 0.5 * eta * dl.norm_squared();
    Ok(v1 + v2 + v3)
}

/// Dispatches to the energy matching `cfg.regime`; `None` for the custom regime.
pub fn lyapunov(p: &ProblemInstance, kkt: &KktPoint, cfg: &SolverConfig, s: &PDState) -> Result<Option<f64>> {
    match cfg.regime {
        Regime::Fast => lyapunov_fast(p, kkt, cfg, s).map(Some),
        Regime::Slow => lyapunov_slow(p, kkt, cfg, s).map(Some),
        Regime::Custom => Ok(None),
    }
}
