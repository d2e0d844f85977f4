//! Config-driven experiment runs: problem construction, simulation, and the
//! trajectory, report and check artifacts written to disk.
//!
//! Every run directory receives
//!
//! * `config.json`, the resolved config;
//! * `trajectory.csv` and, with a baseline, `baseline.csv`;
//! * `report.json`, fitted rates and audits;
//! * `checks.json`, pass/fail of every enabled check.
//!
//! Trajectory columns, in order: `t, gap, feas_sq, v_lyap, norm_x_err,
//! norm_lam_err, norm_txdot, norm_tlamdot`, followed by `consensus_res` for
//! consensus runs or `dual_consensus` for monotropic runs. `v_lyap` is empty
//! for flows without an energy function.

use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::DVector;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::convex::{solve_kkt_reference, KktPoint, ProblemInstance};
use crate::diagnostics::{build_report, compare_trajectories, expected_slopes, final_decade, RunReport};
use crate::dynamics::{make_config, PDState, Regime, RegimeHint, SolverConfig, DEFAULT_T0};
use crate::error::{Error, Result};
use crate::flows::{
    run_central, run_central_baseline, run_consensus, run_consensus_baseline, run_monotropic, run_monotropic_baseline,
};
use crate::instances::{ConsensusSpec, LogSumExpSpec, MonotropicSpec, QpSpec};
use crate::integrator::{log_sample_schedule, IntegratorConfig, Method, SampleSchedule};
use crate::network::consensus::solve_consensus_reference;
use crate::network::monotropic::solve_monotropic_reference;
use crate::network::{ConsensusProblem, ConsensusSolution, MonotropicProblem, MonotropicSolution, MonotropicState};
use crate::rng::{stream, streams, DEFAULT_SEED};
use crate::trajectory::Trajectory;

/// Environment variable capping the worker pool size.
pub const THREADS_ENV: &str = "PDFLOW_THREADS";

/// Gradient tolerance of the reference solvers.
const REFERENCE_GRAD_TOL: f64 = 1e-10;

/// Slack added to a theoretical slope before a rate check fails.
pub const SLOPE_TOLERANCE: f64 = 0.3;

/// One experiment, read from a single JSON document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub problem: ProblemSpec,
    pub solver: SolverSpec,
    pub integrator: IntegratorSpec,
    #[serde(default = "default_name")]
    pub name: String,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub output: OutputSpec,
    /// Also run the first-order saddle flow from the same start and compare.
    #[serde(default)]
    pub baseline: bool,
    #[serde(default)]
    pub checks: Vec<CheckSpec>,
    /// Present only for sweeps: one run per `alpha`, overriding `solver.alpha`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSpec>,
}

fn default_name() -> String {
    "experiment".into()
}

fn default_seed() -> u64 {
    DEFAULT_SEED
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ProblemSpec {
    Quadratic(QpSpec),
    Logsumexp(LogSumExpSpec),
    Consensus(ConsensusSpec),
    Monotropic(MonotropicSpec),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSpec {
    pub alpha: f64,
    #[serde(default)]
    pub regime: RegimeSpec,
    #[serde(default = "default_t0")]
    pub t0: f64,
    /// Initial positions; velocities and multipliers always start at zero.
    /// Defaults to `random` for consensus and `zeros` otherwise.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<InitialSpec>,
}

fn default_t0() -> f64 {
    DEFAULT_T0
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum RegimeSpec {
    #[default]
    Auto,
    Fast,
    Slow,
    Custom { beta: f64 },
}

impl RegimeSpec {
    fn hint(self) -> RegimeHint {
        match self {
            RegimeSpec::Auto => RegimeHint::Auto,
            RegimeSpec::Fast => RegimeHint::Fast,
            RegimeSpec::Slow => RegimeHint::Slow,
            RegimeSpec::Custom { beta } => RegimeHint::Custom { beta },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum InitialSpec {
    Zeros,
    /// Uniform on [0, 1] from the initial-state stream.
    Random,
    /// Explicit primal positions.
    Given(Vec<f64>),
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MethodKind {
    #[default]
    Rk45,
    Rk4,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorSpec {
    pub t_end: f64,
    #[serde(default)]
    pub method: MethodKind,
    /// Absolute and relative tolerance for `rk45`.
    #[serde(default = "default_tol")]
    pub tol: f64,
    /// Fixed step for `rk4`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_step: Option<f64>,
    /// Number of log-spaced sample times from `t0` to `t_end`.
    #[serde(default = "default_samples")]
    pub samples: usize,
}

fn default_tol() -> f64 {
    1e-8
}

fn default_samples() -> usize {
    201
}

impl IntegratorSpec {
    pub fn build(&self, t0: f64) -> Result<IntegratorConfig> {
        let method = match self.method {
            MethodKind::Rk45 => {
                if self.step.is_some() {
                    return Err(Error::Config("integrator.step: only valid with method \"rk4\"".into()));
                }
                if !(self.tol > 0.0) {
                    return Err(Error::Config(format!("integrator.tol: must be positive, got {}", self.tol)));
                }
                Method::Rk45 {
                    abs_tol: self.tol,
                    rel_tol: self.tol,
                    min_step: 1e-12,
                    max_step: self.max_step.unwrap_or(f64::INFINITY),
                }
            }
            MethodKind::Rk4 => Method::Rk4 {
                step: self
                    .step
                    .ok_or_else(|| Error::Config("integrator.step: required for method \"rk4\"".into()))?,
            },
        };
        if self.samples < 2 {
            return Err(Error::Config(format!("integrator.samples: need at least 2, got {}", self.samples)));
        }
        if !(self.t_end > t0) || !self.t_end.is_finite() {
            return Err(Error::Config(format!(
                "integrator.t_end: must be finite and exceed solver.t0 = {t0}, got {}",
                self.t_end
            )));
        }
        let ic = IntegratorConfig {
            method,
            t_end: self.t_end,
            schedule: SampleSchedule::Times(log_sample_schedule(t0, self.t_end, self.samples)?),
        };
        ic.validate(t0).map_err(|e| Error::Config(format!("integrator: {e}")))?;
        Ok(ic)
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    /// Run directory; defaults to `out/<name>`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub alphas: Vec<f64>,
}

/// A pass/fail criterion evaluated after the run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "check", rename_all = "snake_case", deny_unknown_fields)]
pub enum CheckSpec {
    /// Fitted log-log slope of a CSV quantity is at most `max`.
    MaxSlope {
        quantity: String,
        max: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        window: Option<(f64, f64)>,
    },
    /// Final value of a CSV quantity, or of `stationarity` / `feasibility`, is below `max`.
    FinalBelow { quantity: String, max: f64 },
    LyapunovViolations { max: usize },
    /// `norm_txdot` or `norm_tlamdot` stays within the boundedness factor.
    Bounded { quantity: String },
    /// Baseline gap slope exceeds the accelerated one by at least `min_difference`.
    BaselineSeparation { min_difference: f64 },
    /// Accelerated gap strictly below the baseline gap at time `t`.
    GapBelowBaseline { t: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
    pub observed: Option<f64>,
    pub threshold: Option<f64>,
    pub detail: String,
}

/// Expected versus fitted exponent for one quantity, in the layout of the
/// rate table of the regimes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateRow {
    pub quantity: String,
    pub claim: String,
    pub expected_slope: Option<f64>,
    pub observed_slope: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BaselineSummary {
    pub report: RunReport,
    pub accelerated_gap_slope: f64,
    pub baseline_gap_slope: f64,
    pub slope_difference: f64,
    /// `(accelerated, baseline)` gap at the final time.
    pub final_gaps: (f64, f64),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub name: String,
    pub seed: u64,
    pub regime: Regime,
    pub alpha: f64,
    pub beta: f64,
    pub run: RunReport,
    pub rate_table: Vec<RateRow>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub baseline: Option<BaselineSummary>,
}

/// Everything one run produced, kept in memory as well as written out.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub dir: PathBuf,
    pub trajectory: Trajectory,
    pub baseline: Option<Trajectory>,
    pub report: ExperimentReport,
    pub checks: Vec<CheckOutcome>,
}

impl RunOutcome {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub alpha: f64,
    pub beta: f64,
    pub regime: Regime,
    pub expected_gap_slope: f64,
    pub observed_gap_slope: Option<f64>,
    pub expected_velocity_slope: f64,
    pub observed_xdot_slope: Option<f64>,
    pub observed_lamdot_slope: Option<f64>,
    pub dir: PathBuf,
}

#[derive(Debug, Clone)]
pub struct SweepOutcome {
    pub dir: PathBuf,
    pub rows: Vec<SweepRow>,
    pub runs: Vec<RunOutcome>,
    pub checks: Vec<CheckOutcome>,
}

impl SweepOutcome {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed) && self.runs.iter().all(RunOutcome::passed)
    }
}

/// Result of [`execute`]: a single run or a sweep.
#[derive(Debug, Clone)]
pub enum Outcome {
    Run(Box<RunOutcome>),
    Sweep(SweepOutcome),
}

impl Outcome {
    pub fn passed(&self) -> bool {
        match self {
            Outcome::Run(r) => r.passed(),
            Outcome::Sweep(s) => s.passed(),
        }
    }

    pub fn checks(&self) -> Vec<&CheckOutcome> {
        match self {
            Outcome::Run(r) => r.checks.iter().collect(),
            Outcome::Sweep(s) => s.checks.iter().chain(s.runs.iter().flat_map(|r| &r.checks)).collect(),
        }
    }
}

impl ExperimentConfig {
    /// Parses a config document. Empty input is read as `{}`, so the error
    /// names the first missing required field.
    pub fn from_json(text: &str) -> Result<Self> {
        let text = if text.trim().is_empty() { "{}" } else { text };
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn output_dir(&self) -> PathBuf {
        self.output.dir.clone().unwrap_or_else(|| Path::new("out").join(&self.name))
    }

    /// Checks everything that can be checked without building the problem.
    pub fn validate(&self) -> Result<()> {
        let cfg = self.solver_config()?;
        self.integrator.build(cfg.t0)?;
        if self.is_network() && cfg.regime != Regime::Fast {
            return Err(Error::Config(format!(
                "solver: network flows need the fast regime (alpha > 3), got alpha = {} with {:?}",
                self.solver.alpha, cfg.regime
            )));
        }
        if let Some(sweep) = &self.sweep {
            if sweep.alphas.is_empty() {
                return Err(Error::Config("sweep.alphas: must be non-empty".into()));
            }
            for &a in &sweep.alphas {
                let mut one = self.clone();
                one.sweep = None;
                one.solver.alpha = a;
                one.validate().map_err(|e| Error::Config(format!("sweep.alphas[{a}]: {e}")))?;
            }
        }
        Ok(())
    }

    fn is_network(&self) -> bool {
        matches!(self.problem, ProblemSpec::Consensus(_) | ProblemSpec::Monotropic(_))
    }

    pub fn solver_config(&self) -> Result<SolverConfig> {
        make_config(self.solver.alpha, self.solver.regime.hint())
            .and_then(|c| c.with_t0(self.solver.t0))
            .map_err(|e| Error::Config(format!("solver: {e}")))
    }
}

enum Built {
    Central(ProblemInstance, KktPoint),
    Consensus(ConsensusProblem, ConsensusSolution),
    Monotropic(MonotropicProblem, MonotropicSolution),
}

fn build(cfg: &ExperimentConfig) -> Result<Built> {
    let seed = cfg.seed;
    Ok(match &cfg.problem {
        ProblemSpec::Quadratic(spec) => {
            let p = spec.build(seed)?;
            let kkt = solve_kkt_reference(&p, REFERENCE_GRAD_TOL)?;
            Built::Central(p, kkt)
        }
        ProblemSpec::Logsumexp(spec) => {
            let p = spec.build(seed)?;
            let kkt = solve_kkt_reference(&p, REFERENCE_GRAD_TOL)?;
            Built::Central(p, kkt)
        }
        ProblemSpec::Consensus(spec) => {
            let spec = ConsensusSpec { alpha: cfg.solver.alpha, ..spec.clone() };
            let cp = spec.build(seed)?;
            let sol = solve_consensus_reference(&cp, REFERENCE_GRAD_TOL)?;
            Built::Consensus(cp, sol)
        }
        ProblemSpec::Monotropic(spec) => {
            let spec = MonotropicSpec { alpha: cfg.solver.alpha, ..spec.clone() };
            let mp = spec.build(seed)?;
            let sol = solve_monotropic_reference(&mp, REFERENCE_GRAD_TOL)?;
            Built::Monotropic(mp, sol)
        }
    })
}

fn initial_positions(cfg: &ExperimentConfig, dim: usize) -> Result<DVector<f64>> {
    let default = if matches!(cfg.problem, ProblemSpec::Consensus(_)) {
        InitialSpec::Random
    } else {
        InitialSpec::Zeros
    };
    match cfg.solver.initial.clone().unwrap_or(default) {
        InitialSpec::Zeros => Ok(DVector::zeros(dim)),
        InitialSpec::Random => {
            let mut rng = stream(cfg.seed, streams::INITIAL_STATE);
            Ok(DVector::from_fn(dim, |_, _| rng.gen_range(0.0..1.0)))
        }
        InitialSpec::Given(x) if x.len() == dim => Ok(DVector::from_vec(x)),
        InitialSpec::Given(x) => Err(Error::Config(format!(
            "solver.initial.given: expected {dim} entries, got {}",
            x.len()
        ))),
    }
}

/// Runs the accelerated flow, and the baseline if requested, without touching the disk.
pub fn simulate_config(cfg: &ExperimentConfig) -> Result<(Trajectory, Option<Trajectory>)> {
    cfg.validate()?;
    let solver = cfg.solver_config()?;
    let ic = cfg.integrator.build(solver.t0)?;
    let t0 = solver.t0;
    let want_baseline = cfg.baseline;
    let pair = |a: Result<Trajectory>, b: Option<Result<Trajectory>>| -> Result<(Trajectory, Option<Trajectory>)> {
        Ok((a?, b.transpose()?))
    };
    match build(cfg)? {
        Built::Central(p, kkt) => {
            let s0 = PDState::at_rest(t0, initial_positions(cfg, p.dim_primal())?, p.dim_dual());
            let (a, b) = rayon::join(
                || run_central(&p, &kkt, &solver, &s0, &ic),
                || want_baseline.then(|| run_central_baseline(&p, &kkt, &s0, &ic)),
            );
            pair(a, b)
        }
        Built::Consensus(cp, sol) => {
            let nq = cp.stacked_dim();
            let s0 = PDState::at_rest(t0, initial_positions(cfg, nq)?, nq);
            let (a, b) = rayon::join(
                || run_consensus(&cp, &sol, &s0, &ic),
                || want_baseline.then(|| run_consensus_baseline(&cp, &sol, &s0, &ic)),
            );
            pair(a, b)
        }
        Built::Monotropic(mp, sol) => {
            let s0 = MonotropicState::at_rest(t0, initial_positions(cfg, mp.primal_dim())?, mp.dual_dim());
            let (a, b) = rayon::join(
                || run_monotropic(&mp, &sol, &s0, &ic),
                || want_baseline.then(|| run_monotropic_baseline(&mp, &sol, &s0, &ic)),
            );
            pair(a, b)
        }
    }
}

fn rate_table(cfg: &ExperimentConfig, solver: &SolverConfig, run: &RunReport) -> Vec<RateRow> {
    let (gap, vel) = expected_slopes(solver.regime, solver.alpha);
    let claim = |k: f64| {
        if k.is_nan() {
            "none".to_string()
        } else {
            format!("O(t^{})", fmt_exponent(k))
        }
    };
    let mut rows: Vec<(&str, f64)> = vec![("gap", gap), ("feas_sq", gap)];
    match cfg.problem {
        ProblemSpec::Consensus(_) => rows.push(("consensus_res", gap)),
        ProblemSpec::Monotropic(_) => rows.push(("dual_consensus", gap)),
        _ => {}
    }
    let slow_boundary = solver.regime == Regime::Slow && solver.alpha >= 3.0;
    if !slow_boundary {
        rows.push(("norm_xdot", vel));
        rows.push(("norm_lamdot", vel));
    }
    let mut out: Vec<RateRow> = rows
        .into_iter()
        .map(|(q, k)| RateRow {
            quantity: q.to_string(),
            claim: claim(k),
            expected_slope: (!k.is_nan()).then_some(k),
            observed_slope: run.rate(q).map(|r| r.slope),
        })
        .collect();
    if solver.regime == Regime::Fast {
        for q in ["norm_txdot", "norm_tlamdot"] {
            out.push(RateRow {
                quantity: q.to_string(),
                claim: "bounded".into(),
                expected_slope: None,
                observed_slope: None,
            });
        }
    }
    out
}

fn fmt_exponent(k: f64) -> String {
    let r = (k * 1e6).round() / 1e6;
    format!("{r}")
}

fn final_value(traj: &Trajectory, quantity: &str) -> Option<f64> {
    let r = traj.last();
    Some(match quantity {
        "gap" => r.gap,
        "feas_sq" => r.feas_sq,
        "v_lyap" => r.v_lyap?,
        "norm_x_err" => r.norm_x_err,
        "norm_lam_err" => r.norm_lam_err,
        "norm_txdot" => r.t * r.norm_xdot,
        "norm_tlamdot" => r.t * r.norm_lamdot,
        "stationarity" => traj.final_residuals.0,
        "feasibility" => traj.final_residuals.1,
        other => r.extra[traj.extra_columns.iter().position(|c| *c == other)?],
    })
}

fn quantity_series(traj: &Trajectory, quantity: &str) -> Option<Vec<(f64, f64)>> {
    Some(match quantity {
        "gap" => traj.series(|r| r.gap),
        "feas_sq" => traj.series(|r| r.feas_sq),
        "norm_x_err" => traj.series(|r| r.norm_x_err),
        "norm_lam_err" => traj.series(|r| r.norm_lam_err),
        "norm_xdot" => traj.series(|r| r.norm_xdot),
        "norm_lamdot" => traj.series(|r| r.norm_lamdot),
        other => traj.extra_series(other)?,
    })
}

fn evaluate(check: &CheckSpec, traj: &Trajectory, run: &RunReport, baseline: Option<&Trajectory>) -> CheckOutcome {
    let fail = |name: String, detail: String| CheckOutcome {
        name,
        passed: false,
        observed: None,
        threshold: None,
        detail,
    };
    match check {
        CheckSpec::MaxSlope { quantity, max, window } => {
            let name = format!("slope({quantity}) <= {max}");
            let Some(series) = quantity_series(traj, quantity) else {
                return fail(name, format!("unknown quantity {quantity:?}"));
            };
            let window = window.unwrap_or_else(|| final_decade(run.t_end));
            match crate::diagnostics::fit_rate(quantity, &series, window) {
                Ok(r) => CheckOutcome {
                    name,
                    passed: r.slope <= *max,
                    observed: Some(r.slope),
                    threshold: Some(*max),
                    detail: format!("window [{}, {}], r^2 = {:.4}, {} points", window.0, window.1, r.r_squared, r.points),
                },
                Err(e) => fail(name, e.to_string()),
            }
        }
        CheckSpec::FinalBelow { quantity, max } => {
            let name = format!("final({quantity}) < {max}");
            match final_value(traj, quantity) {
                Some(v) => CheckOutcome {
                    name,
                    passed: v < *max,
                    observed: Some(v),
                    threshold: Some(*max),
                    detail: format!("t = {}", run.t_end),
                },
                None => fail(name, format!("unknown quantity {quantity:?}")),
            }
        }
        CheckSpec::LyapunovViolations { max } => {
            let name = format!("lyapunov_violations <= {max}");
            match &run.lyapunov {
                Some(a) => CheckOutcome {
                    name,
                    passed: a.violations <= *max,
                    observed: Some(a.violations as f64),
                    threshold: Some(*max as f64),
                    detail: format!("{} sampled pairs, max increase {:e}", a.pairs, a.max_increase),
                },
                None => fail(name, "this flow has no energy function".into()),
            }
        }
        CheckSpec::Bounded { quantity } => {
            let name = format!("bounded({quantity})");
            match run.bound(quantity) {
                Some(b) => CheckOutcome {
                    name,
                    passed: b.bounded,
                    observed: Some(b.horizon_max),
                    threshold: Some(crate::diagnostics::BOUNDEDNESS_FACTOR * b.first_decade_max),
                    detail: format!("first-decade max {:e}", b.first_decade_max),
                },
                None => fail(name, format!("unknown quantity {quantity:?}")),
            }
        }
        CheckSpec::BaselineSeparation { min_difference } => {
            let name = format!("baseline_slope - accelerated_slope >= {min_difference}");
            let Some(base) = baseline else {
                return fail(name, "no baseline run; set \"baseline\": true".into());
            };
            match compare_trajectories(traj, base, final_decade(run.t_end)) {
                Ok(c) => CheckOutcome {
                    name,
                    passed: c.slope_difference >= *min_difference,
                    observed: Some(c.slope_difference),
                    threshold: Some(*min_difference),
                    detail: format!("accelerated {:.4}, baseline {:.4}", c.accelerated.slope, c.baseline.slope),
                },
                Err(e) => fail(name, e.to_string()),
            }
        }
        CheckSpec::GapBelowBaseline { t } => {
            let name = format!("gap({t}) < baseline_gap({t})");
            let Some(base) = baseline else {
                return fail(name, "no baseline run; set \"baseline\": true".into());
            };
            match (traj.value_at(*t, |r| r.gap), base.value_at(*t, |r| r.gap)) {
                (Some(a), Some(b)) => CheckOutcome {
                    name,
                    passed: a < b,
                    observed: Some(a),
                    threshold: Some(b),
                    detail: "threshold is the baseline gap".into(),
                },
                _ => fail(name, format!("t = {t} lies outside the sampled horizon")),
            }
        }
    }
}

/// Writes a trajectory in the fixed column layout described in the module docs.
pub fn write_trajectory_csv(traj: &Trajectory, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let mut header = vec![
        "t",
        "gap",
        "feas_sq",
        "v_lyap",
        "norm_x_err",
        "norm_lam_err",
        "norm_txdot",
        "norm_tlamdot",
    ];
    header.extend(traj.extra_columns.iter().copied());
    w.write_record(&header)?;
    for r in &traj.records {
        let mut row = vec![
            fmt(r.t),
            fmt(r.gap),
            fmt(r.feas_sq),
            r.v_lyap.map(fmt).unwrap_or_default(),
            fmt(r.norm_x_err),
            fmt(r.norm_lam_err),
            fmt(r.t * r.norm_xdot),
            fmt(r.t * r.norm_lamdot),
        ];
        row.extend(r.extra.iter().map(|&v| fmt(v)));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

fn fmt(v: f64) -> String {
    format!("{v:e}")
}

fn write_json<T: Serialize + ?Sized>(value: &T, path: &Path) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

fn run_single(cfg: &ExperimentConfig, dir: &Path) -> Result<RunOutcome> {
    let solver = cfg.solver_config()?;
    let (traj, baseline) = simulate_config(cfg)?;
    let run = build_report(&traj, None)?;
    let baseline_summary = match &baseline {
        Some(b) => {
            let c = compare_trajectories(&traj, b, final_decade(run.t_end))?;
            Some(BaselineSummary {
                report: build_report(b, None)?,
                accelerated_gap_slope: c.accelerated.slope,
                baseline_gap_slope: c.baseline.slope,
                slope_difference: c.slope_difference,
                final_gaps: (traj.last().gap, b.last().gap),
            })
        }
        None => None,
    };
    let checks = cfg
        .checks
        .iter()
        .map(|c| evaluate(c, &traj, &run, baseline.as_ref()))
        .collect();
    let report = ExperimentReport {
        name: cfg.name.clone(),
        seed: cfg.seed,
        regime: solver.regime,
        alpha: solver.alpha,
        beta: solver.beta,
        rate_table: rate_table(cfg, &solver, &run),
        run,
        baseline: baseline_summary,
    };
    fs::create_dir_all(dir)?;
    write_json(cfg, &dir.join("config.json"))?;
    write_trajectory_csv(&traj, &dir.join("trajectory.csv"))?;
    if let Some(b) = &baseline {
        write_trajectory_csv(b, &dir.join("baseline.csv"))?;
    }
    write_json(&report, &dir.join("report.json"))?;
    write_json(&checks, &dir.join("checks.json"))?;
    Ok(RunOutcome {
        dir: dir.to_path_buf(),
        trajectory: traj,
        baseline,
        report,
        checks,
    })
}

fn sweep_checks(rows: &[SweepRow]) -> Vec<CheckOutcome> {
    let mut out = Vec::new();
    for row in rows {
        let fast = row.regime == Regime::Fast;
        // FAST thresholds are the exponents plus 0.2; SLOW ones add SLOPE_TOLERANCE
        let gap_max = if fast { -1.8 } else { row.expected_gap_slope + SLOPE_TOLERANCE };
        let vel_max = if fast { -0.8 } else { row.expected_velocity_slope + SLOPE_TOLERANCE };
        let mut push = |what: &str, observed: Option<f64>, max: f64| {
            out.push(CheckOutcome {
                name: format!("alpha = {}: slope({what}) <= {}", row.alpha, fmt_exponent(max)),
                passed: observed.is_some_and(|s| s <= max),
                observed,
                threshold: Some(max),
                detail: format!("{:?} regime, beta = {}", row.regime, row.beta),
            });
        };
        if !row.expected_gap_slope.is_nan() {
            push("gap", row.observed_gap_slope, gap_max);
        }
        // no velocity rate is claimed at the regime boundary alpha = 3
        if fast || (row.regime == Regime::Slow && row.alpha < 3.0) {
            push("norm_xdot", row.observed_xdot_slope, vel_max);
            push("norm_lamdot", row.observed_lamdot_slope, vel_max);
        }
    }
    out
}

fn run_sweep(cfg: &ExperimentConfig, dir: &Path) -> Result<SweepOutcome> {
    let sweep = cfg
        .sweep
        .as_ref()
        .ok_or_else(|| Error::Config("sweep: missing; a sweep config needs a \"sweep\" section".into()))?;
    let runs = sweep
        .alphas
        .par_iter()
        .map(|&alpha| {
            let mut one = cfg.clone();
            one.sweep = None;
            one.solver.alpha = alpha;
            one.name = format!("{}-alpha-{alpha}", cfg.name);
            let sub = dir.join(format!("alpha-{alpha}"));
            one.output.dir = Some(sub.clone());
            run_single(&one, &sub)
        })
        .collect::<Result<Vec<_>>>()?;
    let rows: Vec<SweepRow> = runs
        .iter()
        .map(|r| {
            let rep = &r.report;
            let (g, v) = expected_slopes(rep.regime, rep.alpha);
            let slope = |q: &str| rep.run.rate(q).map(|e| e.slope);
            SweepRow {
                alpha: rep.alpha,
                beta: rep.beta,
                regime: rep.regime,
                expected_gap_slope: g,
                observed_gap_slope: slope("gap"),
                expected_velocity_slope: v,
                observed_xdot_slope: slope("norm_xdot"),
                observed_lamdot_slope: slope("norm_lamdot"),
                dir: r.dir.clone(),
            }
        })
        .collect();
    let checks = sweep_checks(&rows);
    fs::create_dir_all(dir)?;
    write_json(cfg, &dir.join("config.json"))?;
    write_json(&rows, &dir.join("sweep.json"))?;
    write_json(&checks, &dir.join("checks.json"))?;
    Ok(SweepOutcome {
        dir: dir.to_path_buf(),
        rows,
        runs,
        checks,
    })
}

/// Worker count from [`THREADS_ENV`], if set.
pub fn thread_cap() -> Result<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(Error::Config(format!("{THREADS_ENV}: expected a positive integer, got {v:?}"))),
        },
        Err(_) => Ok(None),
    }
}

fn in_pool<T: Send>(f: impl FnOnce() -> Result<T> + Send) -> Result<T> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = thread_cap()? {
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::InvalidArgument(format!("cannot start worker pool: {e}")))?;
    pool.install(f)
}

/// Runs `cfg` (a sweep if it has a `sweep` section) and writes all artifacts
/// under its output directory.
pub fn execute(cfg: &ExperimentConfig) -> Result<Outcome> {
    cfg.validate()?;
    let dir = cfg.output_dir();
    in_pool(|| {
        if cfg.sweep.is_some() {
            run_sweep(cfg, &dir).map(Outcome::Sweep)
        } else {
            run_single(cfg, &dir).map(|r| Outcome::Run(Box::new(r)))
        }
    })
}

/// Like [`execute`], but fails unless `cfg` has a `sweep` section.
pub fn execute_sweep(cfg: &ExperimentConfig) -> Result<SweepOutcome> {
    cfg.validate()?;
    let dir = cfg.output_dir();
    in_pool(|| run_sweep(cfg, &dir))
}

/// Named built-in experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Preset {
    pub name: &'static str,
    pub description: &'static str,
}

pub const PRESETS: &[Preset] = &[
    Preset {
        name: "qp-oracle",
        description: "seeded QP (q=10, m=3), alpha=4, t in [1, 1e3]; fast-regime rates and distance to the KKT linear-solve solution",
    },
    Preset {
        name: "example1",
        description: "consensus log-sum-exp, n=50 agents, m=40 terms, rho=20, q=10, random connected graph, t in [1, 100], with baseline",
    },
    Preset {
        name: "example2",
        description: "resource allocation log-sum-exp, n=20 agents, m=4 terms, rho=20, q=2, d_0 = 30,50, t in [1, 1e3]",
    },
    Preset {
        name: "regime-sweep",
        description: "seeded QP over alpha in {1.5, 2.25, 3, 4, 6}; gap and velocity exponents per regime",
    },
    Preset {
        name: "baseline-compare",
        description: "seeded QP, accelerated flow against the first-order saddle flow; gap slopes over the final decade",
    },
];

pub fn list_presets() -> &'static [Preset] {
    PRESETS
}

fn slope_check(quantity: &str, max: f64) -> CheckSpec {
    CheckSpec::MaxSlope {
        quantity: quantity.into(),
        max,
        window: None,
    }
}

fn final_check(quantity: &str, max: f64) -> CheckSpec {
    CheckSpec::FinalBelow {
        quantity: quantity.into(),
        max,
    }
}

fn qp_integrator() -> IntegratorSpec {
    // the tight tolerance keeps the energy audit and the multiplier
    // velocity fits above integration noise
    IntegratorSpec {
        t_end: 1e3,
        method: MethodKind::Rk45,
        tol: 1e-11,
        step: None,
        max_step: None,
        samples: 301,
    }
}

fn fast_solver() -> SolverSpec {
    SolverSpec {
        alpha: 4.0,
        regime: RegimeSpec::Auto,
        t0: DEFAULT_T0,
        initial: None,
    }
}

/// Config of a built-in preset, writing to `out/<name>`.
pub fn preset(name: &str) -> Result<ExperimentConfig> {
    let base = |problem, integrator, checks| ExperimentConfig {
        problem,
        solver: fast_solver(),
        integrator,
        name: name.to_string(),
        seed: DEFAULT_SEED,
        output: OutputSpec::default(),
        baseline: false,
        checks,
        sweep: None,
    };
    let qp = ProblemSpec::Quadratic(QpSpec::benchmark());
    Ok(match name {
        "qp-oracle" => base(
            qp,
            qp_integrator(),
            vec![
                final_check("norm_x_err", 1e-3),
                slope_check("gap", -1.8),
                slope_check("feas_sq", -1.8),
                slope_check("norm_xdot", -0.8),
                slope_check("norm_lamdot", -0.8),
                CheckSpec::Bounded { quantity: "norm_txdot".into() },
                CheckSpec::Bounded { quantity: "norm_tlamdot".into() },
                CheckSpec::LyapunovViolations { max: 0 },
            ],
        ),
        "example1" => ExperimentConfig {
            baseline: true,
            ..base(
                ProblemSpec::Consensus(ConsensusSpec::example1()),
                IntegratorSpec {
                    t_end: 100.0,
                    samples: 201,
                    ..qp_integrator()
                }
                .with_tol(1e-8),
                vec![
                    slope_check("consensus_res", -1.8),
                    final_check("consensus_res", 1e-4),
                    CheckSpec::LyapunovViolations { max: 0 },
                    CheckSpec::GapBelowBaseline { t: 100.0 },
                ],
            )
        },
        "example2" => base(
            ProblemSpec::Monotropic(MonotropicSpec::example2()),
            IntegratorSpec {
                samples: 201,
                ..qp_integrator()
            }
            .with_tol(1e-8),
            vec![
                slope_check("feas_sq", -1.8),
                slope_check("dual_consensus", -1.8),
                final_check("feas_sq", 1e-4),
                final_check("dual_consensus", 1e-4),
                CheckSpec::LyapunovViolations { max: 0 },
            ],
        ),
        "regime-sweep" => ExperimentConfig {
            sweep: Some(SweepSpec {
                alphas: vec![1.5, 2.25, 3.0, 4.0, 6.0],
            }),
            ..base(qp, qp_integrator(), vec![CheckSpec::LyapunovViolations { max: 0 }])
        },
        "baseline-compare" => ExperimentConfig {
            baseline: true,
            ..base(
                qp,
                qp_integrator(),
                vec![
                    slope_check("gap", -1.8),
                    CheckSpec::BaselineSeparation { min_difference: 0.5 },
                ],
            )
        },
        other => {
            let known: Vec<&str> = PRESETS.iter().map(|p| p.name).collect();
            return Err(Error::Config(format!("unknown preset {other:?}; known presets: {}", known.join(", "))));
        }
    })
}

impl IntegratorSpec {
    fn with_tol(self, tol: f64) -> Self {
        Self { tol, ..self }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_names_missing_field() {
        let err = ExperimentConfig::from_json("  \n").unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(err.to_string().contains("missing field `problem`"), "{err}");
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let mut v = serde_json::to_value(preset("qp-oracle").unwrap()).unwrap();
        v["solver"]["gamma"] = 1.0.into();
        let err = ExperimentConfig::from_json(&v.to_string()).unwrap_err();
        assert!(err.to_string().contains("gamma"), "{err}");
        let mut v = serde_json::to_value(preset("qp-oracle").unwrap()).unwrap();
        v["problem"]["alpha"] = 5.0.into();
        assert!(ExperimentConfig::from_json(&v.to_string()).is_err());
    }

    #[test]
    fn presets_round_trip_through_json() {
        for p in PRESETS {
            let cfg = preset(p.name).unwrap();
            let back = ExperimentConfig::from_json(&serde_json::to_string(&cfg).unwrap()).unwrap();
            assert_eq!(back, cfg, "{}", p.name);
        }
    }

    #[test]
    fn network_runs_need_fast_regime() {
        let mut cfg = preset("example1").unwrap();
        cfg.solver.alpha = 2.0;
        assert_eq!(cfg.validate().unwrap_err().exit_code(), 2);
    }

    #[test]
    fn rk4_needs_step() {
        let mut cfg = preset("qp-oracle").unwrap();
        cfg.integrator.method = MethodKind::Rk4;
        assert!(cfg.validate().unwrap_err().to_string().contains("integrator.step"));
    }
}
