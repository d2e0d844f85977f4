//! Rate fits, energy audits, boundedness checks and run reports.

use rayon::prelude::*;
use serde::Serialize;

use crate::convex::{KktPoint, ProblemInstance};
use crate::dynamics::{make_config, PDState, Regime, RegimeHint};
use crate::error::{Error, Result};
use crate::flows::{run_central, run_central_baseline};
use crate::integrator::IntegratorConfig;
use crate::trajectory::{Energy, Record, Trajectory};

/// Values below this are clamped before taking logarithms.
pub const VALUE_FLOOR: f64 = 1e-14;
/// Relative slack per sampled pair in the energy audit.
pub const AUDIT_REL_TOL: f64 = 1e-8;
/// Absolute slack per sampled pair in the energy audit.
pub const AUDIT_ABS_TOL: f64 = 1e-10;
/// A quantity is reported bounded if its horizon maximum stays within this
/// factor of its first-decade maximum.
pub const BOUNDEDNESS_FACTOR: f64 = 10.0;

/// Least-squares fit of `log v = slope · log t + intercept`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateEstimate {
    pub quantity: String,
    pub slope: f64,
    pub intercept: f64,
    pub fit_window: (f64, f64),
    /// `NaN` when fewer than three points were fitted.
    pub r_squared: f64,
    pub points: usize,
    /// Points raised to [`VALUE_FLOOR`].
    pub floored: usize,
    /// Non-positive or non-finite points left out.
    pub excluded: usize,
}

/// `[t_end / 10, t_end]`.
pub fn final_decade(t_end: f64) -> (f64, f64) {
    (t_end / 10.0, t_end)
}

pub fn fit_rate(quantity: &str, samples: &[(f64, f64)], window: (f64, f64)) -> Result<RateEstimate> {
    let (lo, hi) = window;
    if !(hi > lo && lo > 0.0) {
        return Err(Error::InvalidArgument(format!("fit window ({lo}, {hi}) must satisfy 0 < lo < hi")));
    }
    let mut floored = 0;
    let mut excluded = 0;
    let mut pts = Vec::new();
    for &(t, v) in samples.iter().filter(|(t, _)| *t >= lo && *t <= hi) {
        if !(v > 0.0) || !v.is_finite() {
            excluded += 1;
            continue;
        }
        if v < VALUE_FLOOR {
            floored += 1;
        }
        pts.push((t.ln(), v.max(VALUE_FLOOR).ln()));
    }
    if pts.len() < 3 {
        return Err(Error::InsufficientSamples(pts.len()));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidArgument("fit needs at least two distinct times".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = pts.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    // a constant series is fitted exactly
    let r_squared = if syy == 0.0 { 1.0 } else { (1.0 - sse / syy).clamp(0.0, 1.0) };
    Ok(RateEstimate {
        quantity: quantity.to_string(),
        slope,
        intercept,
        fit_window: window,
        r_squared,
        points: pts.len(),
        floored,
        excluded,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LyapunovAudit {
    pub pairs: usize,
    pub violations: usize,
    /// Largest `V(t_{k+1}) − V(t_k)` over all pairs.
    pub max_increase: f64,
    pub first_violation_t: Option<f64>,
    pub rel_tol: f64,
    pub abs_tol: f64,
}

/// Counts consecutive pairs with `v[k+1] > v[k]·(1 + rel_tol) + abs_tol`.
pub fn audit_sequence(times: &[f64], values: &[f64], rel_tol: f64, abs_tol: f64) -> LyapunovAudit {
    let mut violations = 0;
    let mut max_increase = f64::NEG_INFINITY;
    let mut first_violation_t = None;
    for k in 1..values.len() {
        let (a, b) = (values[k - 1], values[k]);
        max_increase = max_increase.max(b - a);
        if b > a * (1.0 + rel_tol) + abs_tol || !b.is_finite() {
            violations += 1;
            first_violation_t.get_or_insert(times[k]);
        }
    }
    LyapunovAudit {
        pairs: values.len().saturating_sub(1),
        violations,
        max_increase,
        first_violation_t,
        rel_tol,
        abs_tol,
    }
}

/// Audits the energy stored in `traj`, which must match `expected`.
pub fn audit_lyapunov(traj: &Trajectory, expected: Energy) -> Result<LyapunovAudit> {
    audit_lyapunov_with(traj, expected, AUDIT_REL_TOL, AUDIT_ABS_TOL)
}

pub fn audit_lyapunov_with(traj: &Trajectory, expected: Energy, rel_tol: f64, abs_tol: f64) -> Result<LyapunovAudit> {
    if traj.energy != Some(expected) {
        return Err(Error::InvalidArgument(format!(
            "energy mismatch: audit expects {expected:?}, trajectory carries {:?}",
            traj.energy
        )));
    }
    let values: Vec<f64> = traj.records.iter().map(|r| r.v_lyap.unwrap_or(f64::NAN)).collect();
    Ok(audit_sequence(&traj.times(), &values, rel_tol, abs_tol))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundednessCheck {
    pub quantity: String,
    pub horizon_max: f64,
    pub first_decade_max: f64,
    pub bounded: bool,
}

/// Compares the horizon maximum of `samples` with the maximum over `[t0, 10 t0]`.
pub fn check_bounded(quantity: &str, samples: &[(f64, f64)]) -> Result<BoundednessCheck> {
    let t0 = samples.first().ok_or(Error::InsufficientSamples(0))?.0;
    let first_decade_max = samples
        .iter()
        .filter(|(t, _)| *t <= 10.0 * t0)
        .map(|s| s.1)
        .fold(f64::NEG_INFINITY, f64::max);
    let horizon_max = samples.iter().map(|s| s.1).fold(f64::NEG_INFINITY, f64::max);
    let bounded = horizon_max.is_finite() && horizon_max <= BOUNDEDNESS_FACTOR * first_decade_max.max(VALUE_FLOOR);
    Ok(BoundednessCheck {
        quantity: quantity.to_string(),
        horizon_max,
        first_decade_max,
        bounded,
    })
}

/// Summary of one run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub problem_id: String,
    pub t_end: f64,
    pub final_stationarity: f64,
    pub final_feasibility: f64,
    pub final_record: Record,
    pub rates: Vec<RateEstimate>,
    pub lyapunov: Option<LyapunovAudit>,
    pub boundedness: Vec<BoundednessCheck>,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
}

impl RunReport {
    pub fn rate(&self, quantity: &str) -> Option<&RateEstimate> {
        self.rates.iter().find(|r| r.quantity == quantity)
    }

    pub fn bound(&self, quantity: &str) -> Option<&BoundednessCheck> {
        self.boundedness.iter().find(|b| b.quantity == quantity)
    }
}

/// Fits every tracked quantity over `window` (default: the final decade).
/// Quantities without enough positive samples are left out of `rates`.
pub fn build_report(traj: &Trajectory, window: Option<(f64, f64)>) -> Result<RunReport> {
    let last = traj.last();
    let window = window.unwrap_or_else(|| final_decade(last.t));
    let mut series: Vec<(&str, Vec<(f64, f64)>)> = vec![
        ("gap", traj.series(|r| r.gap)),
        ("feas_sq", traj.series(|r| r.feas_sq)),
        ("norm_xdot", traj.series(|r| r.norm_xdot)),
        ("norm_lamdot", traj.series(|r| r.norm_lamdot)),
        ("norm_x_err", traj.series(|r| r.norm_x_err)),
    ];
    for (k, name) in traj.extra_columns.iter().enumerate() {
        series.push((name, traj.series(|r| r.extra[k])));
    }
    let mut rates = Vec::new();
    for (name, s) in &series {
        match fit_rate(name, s, window) {
            Ok(r) => rates.push(r),
            Err(Error::InsufficientSamples(_)) => {}
            Err(e) => return Err(e),
        }
    }
    let lyapunov = match traj.energy {
        Some(e) => Some(audit_lyapunov(traj, e)?),
        None => None,
    };
    let boundedness = vec![
        check_bounded("norm_txdot", &traj.series(|r| r.t * r.norm_xdot))?,
        check_bounded("norm_tlamdot", &traj.series(|r| r.t * r.norm_lamdot))?,
    ];
    Ok(RunReport {
        problem_id: traj.problem_id.clone(),
        t_end: last.t,
        final_stationarity: traj.final_residuals.0,
        final_feasibility: traj.final_residuals.1,
        final_record: last.clone(),
        rates,
        lyapunov,
        boundedness,
        accepted_steps: traj.accepted_steps,
        rejected_steps: traj.rejected_steps,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BaselineComparison {
    pub accelerated: RateEstimate,
    pub baseline: RateEstimate,
    /// `baseline.slope − accelerated.slope`; positive when the accelerated flow decays faster.
    pub slope_difference: f64,
    pub accelerated_gap: Vec<(f64, f64)>,
    pub baseline_gap: Vec<(f64, f64)>,
}

impl BaselineComparison {
    /// Gap of each flow at time `t`, interpolated between samples.
    pub fn gaps_at(&self, t: f64) -> Option<(f64, f64)> {
        Some((interp(&self.accelerated_gap, t)?, interp(&self.baseline_gap, t)?))
    }
}

fn interp(s: &[(f64, f64)], t: f64) -> Option<f64> {
    let k = s.partition_point(|p| p.0 < t);
    let hi = s.get(k)?;
    if hi.0 == t {
        return Some(hi.1);
    }
    let lo = s.get(k.checked_sub(1)?)?;
    Some(lo.1 + (t - lo.0) / (hi.0 - lo.0) * (hi.1 - lo.1))
}

/// Compares the gap curves of two trajectories over `window`.
pub fn compare_trajectories(accelerated: &Trajectory, baseline: &Trajectory, window: (f64, f64)) -> Result<BaselineComparison> {
    let accelerated_gap = accelerated.series(|r| r.gap);
    let baseline_gap = baseline.series(|r| r.gap);
    let a = fit_rate("gap", &accelerated_gap, window)?;
    let b = fit_rate("gap", &baseline_gap, window)?;
    Ok(BaselineComparison {
        slope_difference: b.slope - a.slope,
        accelerated: a,
        baseline: b,
        accelerated_gap,
        baseline_gap,
    })
}

/// Runs both the accelerated flow and the baseline saddle flow from the
/// positions of `s0` and compares their gap decay over the final decade.
pub fn compare_baseline(
    p: &ProblemInstance,
    kkt: &KktPoint,
    cfg: &crate::dynamics::SolverConfig,
    s0: &PDState,
    ic: &IntegratorConfig,
) -> Result<BaselineComparison> {
    let (acc, base) = rayon::join(
        || run_central(p, kkt, cfg, s0, ic),
        || run_central_baseline(p, kkt, s0, ic),
    );
    compare_trajectories(&acc?, &base?, final_decade(ic.t_end))
}

/// One row of a regime sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub alpha: f64,
    pub beta: f64,
    pub regime: Regime,
    /// Theoretical gap exponent: −2 for FAST, −2α/3 for SLOW.
    pub expected_gap_slope: f64,
    /// Theoretical velocity exponent: −1 for FAST, −α/3 for SLOW.
    pub expected_velocity_slope: f64,
    pub report: RunReport,
}

impl SweepRow {
    pub fn gap_slope(&self) -> f64 {
        self.report.rate("gap").map_or(f64::NAN, |r| r.slope)
    }
}

pub fn expected_slopes(regime: Regime, alpha: f64) -> (f64, f64) {
    match regime {
        Regime::Fast => (-2.0, -1.0),
        Regime::Slow => (-2.0 * alpha / 3.0, -alpha / 3.0),
        Regime::Custom => (f64::NAN, f64::NAN),
    }
}

/// Runs the accelerated flow once per `alpha` (regime chosen automatically),
/// concurrently, and reports the fitted rates in input order.
pub fn regime_sweep(p: &ProblemInstance, kkt: &KktPoint, alphas: &[f64], s0: &PDState, ic: &IntegratorConfig) -> Result<Vec<SweepRow>> {
    alphas
        .par_iter()
        .map(|&alpha| {
            let cfg = make_config(alpha, RegimeHint::Auto)?.with_t0(s0.t)?;
            let traj = run_central(p, kkt, &cfg, s0, ic)?;
            let (g, v) = expected_slopes(cfg.regime, alpha);
            Ok(SweepRow {
                alpha,
                beta: cfg.beta,
                regime: cfg.regime,
                expected_gap_slope: g,
                expected_velocity_slope: v,
                report: build_report(&traj, None)?,
            })
        })
        .collect()
}
