//! Diagnosed models for every flow in the crate.
//!
//! Accelerated flows carry positions and velocities; the first-order baseline
//! flows carry positions only and report the field itself as the velocity.

use nalgebra::DVector;

use crate::convex::{KktPoint, ProblemInstance};
use crate::dynamics::{lagrangian_gap, lyapunov, AcceleratedField, PDState, Regime, SaddleFlow, SolverConfig};
use crate::error::Result;
use crate::integrator::{IntegratorConfig, OdeSystem, SecondOrder, SecondOrderSystem};
use crate::network::consensus::{consensus_lyapunov, consensus_residual, ConsensusSaddleFlow};
use crate::network::monotropic::{dual_consensus, monotropic_feasibility, monotropic_gap, monotropic_lyapunov, MonotropicSaddleFlow};
use crate::network::{ConsensusField, ConsensusProblem, ConsensusSolution, MonotropicField, MonotropicProblem, MonotropicSolution, MonotropicState};
use crate::trajectory::{simulate, Energy, Model, Record, Trajectory};

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn dist(v: &[f64], w: &[f64]) -> f64 {
    v.iter().zip(w).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
}

/// The accelerated flow on a [`ProblemInstance`].
pub struct CentralModel<'a> {
    pub problem: &'a ProblemInstance,
    pub kkt: &'a KktPoint,
    pub cfg: SolverConfig,
}

impl OdeSystem for CentralModel<'_> {
    fn dim(&self) -> usize {
        2 * (self.problem.dim_primal() + self.problem.dim_dual())
    }

    fn rhs(&self, t: f64, y: &[f64], dy: &mut [f64]) {
        SecondOrder(AcceleratedField::new(self.problem, &self.cfg)).rhs(t, y, dy)
    }
}

impl Model for CentralModel<'_> {
    fn id(&self) -> String {
        format!("central-{:?}", self.cfg.regime).to_lowercase()
    }

    fn energy(&self) -> Option<Energy> {
        match self.cfg.regime {
            Regime::Fast => Some(Energy::Fast),
            Regime::Slow => Some(Energy::Slow),
            Regime::Custom => None,
        }
    }

    fn record(&self, t: f64, y: &[f64]) -> Result<Record> {
        let p = self.problem;
        let s = PDState::from_flat(t, y, p.dim_primal(), p.dim_dual());
        Ok(Record {
            t,
            gap: lagrangian_gap(p, self.kkt, &s.x)?,
            feas_sq: p.constraint_residual(&s.x)?.norm_squared(),
            v_lyap: lyapunov(p, self.kkt, &self.cfg, &s)?,
            norm_x_err: (&s.x - &self.kkt.x_star).norm(),
            norm_lam_err: (&s.lambda - &self.kkt.lambda_star).norm(),
            norm_xdot: s.x_dot.norm(),
            norm_lamdot: s.lambda_dot.norm(),
            extra: Vec::new(),
        })
    }

    fn kkt_residuals(&self, t: f64, y: &[f64]) -> Result<(f64, f64)> {
        let p = self.problem;
        let s = PDState::from_flat(t, y, p.dim_primal(), p.dim_dual());
        p.kkt_residual(&s.x, &s.lambda)
    }
}

/// The first-order saddle flow on a [`ProblemInstance`], state `[x, λ]`.
pub struct CentralBaselineModel<'a> {
    pub problem: &'a ProblemInstance,
    pub kkt: &'a KktPoint,
}

impl OdeSystem for CentralBaselineModel<'_> {
    fn dim(&self) -> usize {
        self.problem.dim_primal() + self.problem.dim_dual()
    }

    fn rhs(&self, t: f64, y: &[f64], dy: &mut [f64]) {
        SaddleFlow::new(self.problem).rhs(t, y, dy)
    }
}

impl Model for CentralBaselineModel<'_> {
    fn id(&self) -> String {
        "central-baseline".into()
    }

    fn energy(&self) -> Option<Energy> {
        None
    }

    fn record(&self, t: f64, y: &[f64]) -> Result<Record> {
        let p = self.problem;
        let q = p.dim_primal();
        let x = DVector::from_column_slice(&y[..q]);
        let mut dy = vec![0.0; y.len()];
        self.rhs(t, y, &mut dy);
        Ok(Record {
            t,
            gap: lagrangian_gap(p, self.kkt, &x)?,
            feas_sq: p.constraint_residual(&x)?.norm_squared(),
            v_lyap: None,
            norm_x_err: dist(&y[..q], self.kkt.x_star.as_slice()),
            norm_lam_err: dist(&y[q..], self.kkt.lambda_star.as_slice()),
            norm_xdot: norm(&dy[..q]),
            norm_lamdot: norm(&dy[q..]),
            extra: Vec::new(),
        })
    }

    fn kkt_residuals(&self, _t: f64, y: &[f64]) -> Result<(f64, f64)> {
        let q = self.problem.dim_primal();
        self.problem
            .kkt_residual(&DVector::from_column_slice(&y[..q]), &DVector::from_column_slice(&y[q..]))
    }
}

/// The distributed consensus flow.
pub struct ConsensusModel<'a> {
    pub problem: &'a ConsensusProblem,
    pub solution: &'a ConsensusSolution,
}

impl OdeSystem for ConsensusModel<'_> {
    fn dim(&self) -> usize {
        2 * ConsensusField::new(self.problem).n_pos()
    }

    fn rhs(&self, t: f64, y: &[f64], dy: &mut [f64]) {
        SecondOrder(ConsensusField::new(self.problem)).rhs(t, y, dy)
    }
}

fn consensus_record(cp: &ConsensusProblem, sol: &ConsensusSolution, s: &PDState, v_lyap: Option<f64>) -> Result<Record> {
    let x = s.x.as_slice();
    Ok(Record {
        t: s.t,
        gap: cp.lagrangian_gap(sol, x)?,
        feas_sq: cp.laplacian_apply(x)?.norm_squared(),
        v_lyap,
        norm_x_err: (&s.x - &sol.x_star).norm(),
        norm_lam_err: (&s.lambda - &sol.lambda_star).norm(),
        norm_xdot: s.x_dot.norm(),
        norm_lamdot: s.lambda_dot.norm(),
        extra: vec![consensus_residual(cp, x)?],
    })
}

impl Model for ConsensusModel<'_> {
    fn id(&self) -> String {
        "consensus".into()
    }

    fn energy(&self) -> Option<Energy> {
        Some(Energy::Consensus)
    }

    fn extra_columns(&self) -> Vec<&'static str> {
        vec!["consensus_res"]
    }

    fn record(&self, t: f64, y: &[f64]) -> Result<Record> {
        let nq = self.problem.stacked_dim();
        let s = PDState::from_flat(t, y, nq, nq);
        let v = consensus_lyapunov(self.problem, self.solution, &s)?;
        consensus_record(self.problem, self.solution, &s, Some(v))
    }

    fn kkt_residuals(&self, t: f64, y: &[f64]) -> Result<(f64, f64)> {
        let nq = self.problem.stacked_dim();
        let s = PDState::from_flat(t, y, nq, nq);
        ConsensusSolution::residuals(self.problem, &s.x, &s.lambda)
    }
}

/// The first-order consensus saddle flow, state `[x, λ]`.
pub struct ConsensusBaselineModel<'a> {
    pub problem: &'a ConsensusProblem,
    pub solution: &'a ConsensusSolution,
}

impl OdeSystem for ConsensusBaselineModel<'_> {
    fn dim(&self) -> usize {
        2 * self.problem.stacked_dim()
    }

    fn rhs(&self, t: f64, y: &[f64], dy: &mut [f64]) {
        ConsensusSaddleFlow::new(self.problem).rhs(t, y, dy)
    }
}

impl Model for ConsensusBaselineModel<'_> {
    fn id(&self) -> String {
        "consensus-baseline".into()
    }

    fn energy(&self) -> Option<Energy> {
        None
    }

    fn extra_columns(&self) -> Vec<&'static str> {
        vec!["consensus_res"]
    }

    fn record(&self, t: f64, y: &[f64]) -> Result<Record> {
        let nq = self.problem.stacked_dim();
        let mut dy = vec![0.0; y.len()];
        self.rhs(t, y, &mut dy);
        let s = PDState {
            t,
            x: DVector::from_column_slice(&y[..nq]),
            lambda: DVector::from_column_slice(&y[nq..]),
            x_dot: DVector::from_column_slice(&dy[..nq]),
            lambda_dot: DVector::from_column_slice(&dy[nq..]),
        };
        consensus_record(self.problem, self.solution, &s, None)
    }

    fn kkt_residuals(&self, _t: f64, y: &[f64]) -> Result<(f64, f64)> {
        let nq = self.problem.stacked_dim();
        ConsensusSolution::residuals(
            self.problem,
            &DVector::from_column_slice(&y[..nq]),
            &DVector::from_column_slice(&y[nq..]),
        )
    }
}

/// The distributed monotropic flow.
pub struct MonotropicModel<'a> {
    pub problem: &'a MonotropicProblem,
    pub solution: &'a MonotropicSolution,
}

impl OdeSystem for MonotropicModel<'_> {
    fn dim(&self) -> usize {
        2 * self.problem.n_pos()
    }

    fn rhs(&self, t: f64, y: &[f64], dy: &mut [f64]) {
        SecondOrder(MonotropicField::new(self.problem)).rhs(t, y, dy)
    }
}

fn monotropic_record(mp: &MonotropicProblem, sol: &MonotropicSolution, s: &MonotropicState, v_lyap: Option<f64>) -> Result<Record> {
    let (y, lambda) = (s.y.as_slice(), s.lambda.as_slice());
    Ok(Record {
        t: s.t,
        gap: monotropic_gap(mp, sol, y, lambda)?,
        feas_sq: monotropic_feasibility(mp, y)?.powi(2),
        v_lyap,
        norm_x_err: (&s.y - &sol.y_star).norm(),
        norm_lam_err: (&s.lambda - &sol.lambda_star).norm(),
        norm_xdot: s.y_dot.norm(),
        norm_lamdot: s.lambda_dot.norm(),
        extra: vec![dual_consensus(mp, lambda)?],
    })
}

fn monotropic_residuals(mp: &MonotropicProblem, s: &MonotropicState) -> Result<(f64, f64)> {
    let [stat, split, cons] = MonotropicSolution::residuals(mp, &s.y, &s.z, &s.lambda)?;
    Ok((stat, split.max(cons)))
}

impl Model for MonotropicModel<'_> {
    fn id(&self) -> String {
        "monotropic".into()
    }

    fn energy(&self) -> Option<Energy> {
        Some(Energy::Monotropic)
    }

    fn extra_columns(&self) -> Vec<&'static str> {
        vec!["dual_consensus"]
    }

    fn record(&self, t: f64, y: &[f64]) -> Result<Record> {
        let s = MonotropicState::from_flat(t, y, self.problem.primal_dim(), self.problem.dual_dim());
        let v = monotropic_lyapunov(self.problem, self.solution, &s)?;
        monotropic_record(self.problem, self.solution, &s, Some(v))
    }

    fn kkt_residuals(&self, t: f64, y: &[f64]) -> Result<(f64, f64)> {
        let s = MonotropicState::from_flat(t, y, self.problem.primal_dim(), self.problem.dual_dim());
        monotropic_residuals(self.problem, &s)
    }
}

/// The first-order monotropic saddle flow, state `[y, λ, z]`.
pub struct MonotropicBaselineModel<'a> {
    pub problem: &'a MonotropicProblem,
    pub solution: &'a MonotropicSolution,
}

impl MonotropicBaselineModel<'_> {
    fn state(&self, t: f64, v: &[f64]) -> MonotropicState {
        let mut dv = vec![0.0; v.len()];
        self.rhs(t, v, &mut dv);
        let mut flat = v.to_vec();
        flat.extend_from_slice(&dv);
        MonotropicState::from_flat(t, &flat, self.problem.primal_dim(), self.problem.dual_dim())
    }
}

impl OdeSystem for MonotropicBaselineModel<'_> {
    fn dim(&self) -> usize {
        self.problem.n_pos()
    }

    fn rhs(&self, t: f64, y: &[f64], dy: &mut [f64]) {
        MonotropicSaddleFlow::new(self.problem).rhs(t, y, dy)
    }
}

impl Model for MonotropicBaselineModel<'_> {
    fn id(&self) -> String {
        "monotropic-baseline".into()
    }

    fn energy(&self) -> Option<Energy> {
        None
    }

    fn extra_columns(&self) -> Vec<&'static str> {
        vec!["dual_consensus"]
    }

    fn record(&self, t: f64, y: &[f64]) -> Result<Record> {
        monotropic_record(self.problem, self.solution, &self.state(t, y), None)
    }

    fn kkt_residuals(&self, t: f64, y: &[f64]) -> Result<(f64, f64)> {
        monotropic_residuals(self.problem, &self.state(t, y))
    }
}

/// Runs the accelerated flow from `s0`.
pub fn run_central(p: &ProblemInstance, kkt: &KktPoint, cfg: &SolverConfig, s0: &PDState, ic: &IntegratorConfig) -> Result<Trajectory> {
    s0.check_dims(p)?;
    let model = CentralModel {
        problem: p,
        kkt,
        cfg: *cfg,
    };
    simulate(&model, s0.t, &s0.to_flat(), ic)
}

/// Runs the baseline saddle flow from the positions of `s0`.
pub fn run_central_baseline(p: &ProblemInstance, kkt: &KktPoint, s0: &PDState, ic: &IntegratorConfig) -> Result<Trajectory> {
    s0.check_dims(p)?;
    let y0: Vec<f64> = s0.x.iter().chain(s0.lambda.iter()).copied().collect();
    simulate(&CentralBaselineModel { problem: p, kkt }, s0.t, &y0, ic)
}

pub fn run_consensus(cp: &ConsensusProblem, sol: &ConsensusSolution, s0: &PDState, ic: &IntegratorConfig) -> Result<Trajectory> {
    let model = ConsensusModel {
        problem: cp,
        solution: sol,
    };
    crate::error::check_len("initial state", model.dim(), s0.to_flat().len())?;
    simulate(&model, s0.t, &s0.to_flat(), ic)
}

pub fn run_consensus_baseline(cp: &ConsensusProblem, sol: &ConsensusSolution, s0: &PDState, ic: &IntegratorConfig) -> Result<Trajectory> {
    let model = ConsensusBaselineModel {
        problem: cp,
        solution: sol,
    };
    let y0: Vec<f64> = s0.x.iter().chain(s0.lambda.iter()).copied().collect();
    simulate(&model, s0.t, &y0, ic)
}

pub fn run_monotropic(mp: &MonotropicProblem, sol: &MonotropicSolution, s0: &MonotropicState, ic: &IntegratorConfig) -> Result<Trajectory> {
    s0.check_dims(mp)?;
    let model = MonotropicModel {
        problem: mp,
        solution: sol,
    };
    simulate(&model, s0.t, &s0.to_flat(), ic)
}

pub fn run_monotropic_baseline(mp: &MonotropicProblem, sol: &MonotropicSolution, s0: &MonotropicState, ic: &IntegratorConfig) -> Result<Trajectory> {
    s0.check_dims(mp)?;
    let model = MonotropicBaselineModel {
        problem: mp,
        solution: sol,
    };
    let y0: Vec<f64> = [&s0.y, &s0.lambda, &s0.z].iter().flat_map(|v| v.iter().copied()).collect();
    simulate(&model, s0.t, &y0, ic)
}
