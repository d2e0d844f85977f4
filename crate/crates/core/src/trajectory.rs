//! Sampled runs with per-sample diagnostics.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrator::{integrate, IntegratorConfig, OdeSystem};

/// Which energy function `Record::v_lyap` holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Energy {
    Fast,
    Slow,
    Consensus,
    Monotropic,
}

/// Diagnostics at one sample time. Velocity norms are unscaled; the CSV
/// writer multiplies them by `t`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Record {
    pub t: f64,
    pub gap: f64,
    pub feas_sq: f64,
    pub v_lyap: Option<f64>,
    pub norm_x_err: f64,
    pub norm_lam_err: f64,
    pub norm_xdot: f64,
    pub norm_lamdot: f64,
    /// Values for [`Model::extra_columns`], in order.
    pub extra: Vec<f64>,
}

/// A flow together with the reference point its diagnostics are measured against.
pub trait Model: OdeSystem + Sync {
    /// Short identifier written to reports.
    fn id(&self) -> String;

    fn energy(&self) -> Option<Energy>;

    fn extra_columns(&self) -> Vec<&'static str> {
        Vec::new()
    }

    fn record(&self, t: f64, y: &[f64]) -> Result<Record>;

    /// `(stationarity, feasibility)` residual norms at `(t, y)`.
    fn kkt_residuals(&self, t: f64, y: &[f64]) -> Result<(f64, f64)>;
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub problem_id: String,
    pub energy: Option<Energy>,
    pub extra_columns: Vec<&'static str>,
    pub records: Vec<Record>,
    /// Raw integrator states, parallel to `records`.
    pub states: Vec<Vec<f64>>,
    /// `(stationarity, feasibility)` at the final sample.
    pub final_residuals: (f64, f64),
    pub accepted_steps: usize,
    pub rejected_steps: usize,
}

impl Trajectory {
    pub fn times(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.t).collect()
    }

    pub fn series(&self, f: impl Fn(&Record) -> f64) -> Vec<(f64, f64)> {
        self.records.iter().map(|r| (r.t, f(r))).collect()
    }

    /// Samples of the named extra column.
    pub fn extra_series(&self, name: &str) -> Option<Vec<(f64, f64)>> {
        let k = self.extra_columns.iter().position(|c| *c == name)?;
        Some(self.series(|r| r.extra[k]))
    }

    pub fn last(&self) -> &Record {
        self.records.last().expect("a trajectory always holds its initial sample")
    }

    /// Linear interpolation of `f` at time `t` between neighbouring samples.
    pub fn value_at(&self, t: f64, f: impl Fn(&Record) -> f64) -> Option<f64> {
        let k = self.records.partition_point(|r| r.t < t);
        let hi = self.records.get(k)?;
        if hi.t == t || k == 0 {
            return (hi.t == t).then(|| f(hi));
        }
        let lo = &self.records[k - 1];
        let s = (t - lo.t) / (hi.t - lo.t);
        Some(f(lo) + s * (f(hi) - f(lo)))
    }
}

/// Integrates `model` and evaluates diagnostics at every sample.
pub fn simulate<M: Model + ?Sized>(model: &M, t0: f64, y0: &[f64], ic: &IntegratorConfig) -> Result<Trajectory> {
    let sol = integrate(model, t0, y0, ic)?;
    let records = sol
        .times
        .iter()
        .zip(&sol.states)
        .map(|(&t, y)| model.record(t, y))
        .collect::<Result<Vec<_>>>()?;
    let t_last = *sol.times.last().ok_or(Error::InsufficientSamples(0))?;
    let final_residuals = model.kkt_residuals(t_last, sol.states.last().expect("non-empty"))?;
    Ok(Trajectory {
        problem_id: model.id(),
        energy: model.energy(),
        extra_columns: model.extra_columns(),
        records,
        states: sol.states,
        final_residuals,
        accepted_steps: sol.accepted_steps,
        rejected_steps: sol.rejected_steps,
    })
}
