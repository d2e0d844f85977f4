//! Seeded benchmark problem generators.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::convex::{LogSumExpObjective, Objective, ProblemInstance, QuadraticObjective};
use crate::error::{Error, Result};
use crate::network::{ConsensusProblem, GraphTopology, MonotropicProblem};
use crate::rng::{stream, streams};

/// Random equality-constrained QP with a planted solution.
///
/// `Q = U diag(μ) Uᵀ` with `μ` geometrically spaced over `spectrum` and `U` a
/// random orthogonal matrix; `A` is a random full-row-rank matrix. The KKT pair
/// `(x*, λ*)` is drawn uniformly from `[-solution_scale, solution_scale]` and
/// `c = −Qx* − Aᵀλ*`, `b = Ax*` are derived from it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QpSpec {
    pub dim: usize,
    pub constraints: usize,
    #[serde(default = "QpSpec::default_spectrum")]
    pub spectrum: (f64, f64),
    #[serde(default = "QpSpec::default_solution_scale")]
    pub solution_scale: f64,
}

impl QpSpec {
    fn default_spectrum() -> (f64, f64) {
        (1e-4, 1.0)
    }

    fn default_solution_scale() -> f64 {
        0.01
    }

    /// The q = 10, m = 3 benchmark.
    pub fn benchmark() -> Self {
        Self {
            dim: 10,
            constraints: 3,
            spectrum: Self::default_spectrum(),
            solution_scale: Self::default_solution_scale(),
        }
    }

    pub fn build(&self, seed: u64) -> Result<ProblemInstance> {
        let (q, m) = (self.dim, self.constraints);
        let (lo, hi) = self.spectrum;
        if q == 0 || m >= q {
            return Err(Error::InvalidArgument(format!(
                "QP needs 0 <= constraints < dim, got dim {q}, constraints {m}"
            )));
        }
        if !(lo > 0.0 && hi >= lo) {
            return Err(Error::InvalidArgument(format!("invalid spectrum [{lo}, {hi}]")));
        }
        if !(self.solution_scale >= 0.0) {
            return Err(Error::InvalidArgument("solution_scale must be non-negative".into()));
        }
        let mut rng = stream(seed, streams::HESSIAN);
        let u = random_orthogonal(q, &mut rng);
        let mu = DVector::from_fn(q, |i, _| {
            if q == 1 {
                hi
            } else {
                lo * (hi / lo).powf(i as f64 / (q - 1) as f64)
            }
        });
        let mut hess = &u * DMatrix::from_diagonal(&mu) * u.transpose();
        hess = (&hess + hess.transpose()) * 0.5;

        // unit-variance entries scaled by 1/sqrt(q)
        let mut rng = stream(seed, streams::CONSTRAINT);
        let scale = (3.0 / q as f64).sqrt();
        let a = DMatrix::from_fn(m, q, |_, _| rng.gen_range(-1.0..1.0) * scale);

        let mut rng = stream(seed, streams::LINEAR_TERM);
        let s = self.solution_scale;
        let x_star = DVector::from_fn(q, |_, _| s * rng.gen_range(-1.0..1.0));
        let lambda_star = DVector::from_fn(m, |_, _| s * rng.gen_range(-1.0..1.0));
        let c = -(&hess * &x_star) - a.tr_mul(&lambda_star);
        let b = &a * &x_star;

        ProblemInstance::new(Arc::new(QuadraticObjective::new(hess, c)?), a, b)
    }
}

/// Orthogonal factor of the QR decomposition of a uniform random matrix.
pub fn random_orthogonal<R: Rng>(n: usize, rng: &mut R) -> DMatrix<f64> {
    let g = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
    g.qr().q()
}

/// Log-sum-exp with `terms` coefficient rows and offsets drawn uniformly from
/// [0, 1]. With `center`, each coefficient row has the row mean subtracted so
/// the function is bounded below.
pub fn random_log_sum_exp<R: Rng>(dim: usize, terms: usize, rho: f64, center: bool, rng: &mut R) -> Result<LogSumExpObjective> {
    let mut coeffs = DMatrix::from_fn(terms, dim, |_, _| rng.gen_range(0.0..1.0));
    let offsets = DVector::from_fn(terms, |_, _| rng.gen_range(0.0..1.0));
    if center {
        let mean = coeffs.row_mean();
        for mut row in coeffs.row_iter_mut() {
            row -= &mean;
        }
    }
    LogSumExpObjective::new(rho, coeffs, offsets)
}

/// Log-sum-exp objective under random affine constraints.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LogSumExpSpec {
    pub dim: usize,
    pub terms: usize,
    pub rho: f64,
    pub constraints: usize,
    #[serde(default = "default_center")]
    pub center_coefficients: bool,
}

impl LogSumExpSpec {
    /// `A` as for [`QpSpec`]; `b = Ax₀` for `x₀` uniform on [0, 1].
    pub fn build(&self, seed: u64) -> Result<ProblemInstance> {
        let (q, m) = (self.dim, self.constraints);
        if q == 0 || m >= q {
            return Err(Error::InvalidArgument(format!(
                "log-sum-exp instance needs 0 <= constraints < dim, got dim {q}, constraints {m}"
            )));
        }
        let f = random_log_sum_exp(q, self.terms, self.rho, self.center_coefficients, &mut stream(seed, streams::LOCAL_OBJECTIVES))?;
        let mut rng = stream(seed, streams::CONSTRAINT);
        let scale = (3.0 / q as f64).sqrt();
        let a = DMatrix::from_fn(m, q, |_, _| rng.gen_range(-1.0..1.0) * scale);
        let mut rng = stream(seed, streams::LINEAR_TERM);
        let x0 = DVector::from_fn(q, |_, _| rng.gen_range(0.0..1.0));
        let b = &a * x0;
        ProblemInstance::new(Arc::new(f), a, b)
    }
}

/// Communication graph source for network instances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GraphSpec {
    /// Connected Erdős–Rényi graph drawn from the graph stream.
    ErdosRenyi { edge_probability: f64 },
    Ring,
    Path,
    /// `i j weight` lines, inline.
    EdgeList { edges: String },
}

impl GraphSpec {
    pub fn build(&self, n: usize, seed: u64) -> Result<GraphTopology> {
        let g = match self {
            GraphSpec::ErdosRenyi { edge_probability } => {
                GraphTopology::erdos_renyi_connected(n, *edge_probability, &mut stream(seed, streams::GRAPH))?
            }
            GraphSpec::Ring => GraphTopology::ring(n)?,
            GraphSpec::Path => GraphTopology::path(n)?,
            GraphSpec::EdgeList { edges } => GraphTopology::parse_edge_list(edges, Some(n))?,
        };
        if !g.is_connected() {
            return Err(Error::Graph("network instances need a connected graph".into()));
        }
        Ok(g)
    }
}

fn default_center() -> bool {
    true
}

fn default_network_alpha() -> f64 {
    4.0
}

/// Consensus problem with log-sum-exp local objectives
/// `fᵢ(x) = ρ log Σⱼ exp((cᵢⱼᵀx − bᵢⱼ)/ρ)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConsensusSpec {
    pub agents: usize,
    pub terms: usize,
    pub rho: f64,
    pub local_dim: usize,
    pub graph: GraphSpec,
    /// Damping shared by every agent. Set from the solver section of an
    /// experiment config, never read from the problem section.
    #[serde(skip, default = "default_network_alpha")]
    pub alpha: f64,
    #[serde(default = "default_center")]
    pub center_coefficients: bool,
}

impl ConsensusSpec {
    /// n = 50 agents, 40 terms, ρ = 20, q = 10.
    pub fn example1() -> Self {
        Self {
            agents: 50,
            terms: 40,
            rho: 20.0,
            local_dim: 10,
            graph: GraphSpec::ErdosRenyi { edge_probability: 0.1 },
            alpha: 4.0,
            center_coefficients: true,
        }
    }

    pub fn build(&self, seed: u64) -> Result<ConsensusProblem> {
        let g = self.graph.build(self.agents, seed)?;
        let mut rng = stream(seed, streams::LOCAL_OBJECTIVES);
        let locals = (0..self.agents)
            .map(|_| {
                random_log_sum_exp(self.local_dim, self.terms, self.rho, self.center_coefficients, &mut rng)
                    .map(|f| Arc::new(f) as Arc<dyn Objective>)
            })
            .collect::<Result<Vec<_>>>()?;
        ConsensusProblem::with_uniform_alpha(g, locals, self.alpha)
    }
}

/// Monotropic problem with log-sum-exp local objectives, uniform [0, 1]
/// coupling blocks `Wᵢ` and a random positive split of `d₀` across agents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonotropicSpec {
    pub agents: usize,
    pub terms: usize,
    pub rho: f64,
    pub local_dim: usize,
    pub d0: Vec<f64>,
    pub graph: GraphSpec,
    /// Damping shared by every agent. Set from the solver section of an
    /// experiment config, never read from the problem section.
    #[serde(skip, default = "default_network_alpha")]
    pub alpha: f64,
    #[serde(default = "default_center")]
    pub center_coefficients: bool,
}

impl MonotropicSpec {
    /// n = 20 agents, 4 terms, ρ = 20, qᵢ = 2, d₀ = (30, 50).
    pub fn example2() -> Self {
        Self {
            agents: 20,
            terms: 4,
            rho: 20.0,
            local_dim: 2,
            d0: vec![30.0, 50.0],
            graph: GraphSpec::ErdosRenyi { edge_probability: 0.2 },
            alpha: 4.0,
            center_coefficients: true,
        }
    }

    pub fn build(&self, seed: u64) -> Result<MonotropicProblem> {
        let m = self.d0.len();
        if m == 0 {
            return Err(Error::InvalidArgument("d0 must be non-empty".into()));
        }
        let g = self.graph.build(self.agents, seed)?;
        let mut rng = stream(seed, streams::LOCAL_OBJECTIVES);
        let locals = (0..self.agents)
            .map(|_| {
                random_log_sum_exp(self.local_dim, self.terms, self.rho, self.center_coefficients, &mut rng)
                    .map(|f| Arc::new(f) as Arc<dyn Objective>)
            })
            .collect::<Result<Vec<_>>>()?;
        let mut rng = stream(seed, streams::COUPLING);
        let w_blocks = (0..self.agents)
            .map(|_| DMatrix::from_fn(m, self.local_dim, |_, _| rng.gen_range(0.0..1.0)))
            .collect();
        let mut rng = stream(seed, streams::RESOURCE_SPLIT);
        let weights: Vec<f64> = (0..self.agents).map(|_| rng.gen_range(0.5..1.5)).collect();
        let total: f64 = weights.iter().sum();
        let d0 = DVector::from_column_slice(&self.d0);
        let mut d_locals: Vec<DVector<f64>> = weights.iter().map(|w| &d0 * (w / total)).collect();
        // the last share absorbs rounding so the shares sum to d₀ exactly
        let head = d_locals[..self.agents - 1].iter().fold(DVector::zeros(m), |acc, d| acc + d);
        d_locals[self.agents - 1] = &d0 - head;
        MonotropicProblem::new(g, locals, w_blocks, d_locals, vec![self.alpha; self.agents])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::convex::solve_kkt_oracle;

    #[test]
    fn benchmark_is_well_posed() {
        for seed in 0..5 {
            let p = QpSpec::benchmark().build(seed).unwrap();
            assert_eq!((p.dim_primal(), p.dim_dual()), (10, 3));
            let kkt = solve_kkt_oracle(&p).unwrap();
            let (s, f) = p.kkt_residual(&kkt.x_star, &kkt.lambda_star).unwrap();
            assert!(s < 1e-9 && f < 1e-9);
        }
    }

    #[test]
    fn orthogonal_factor_is_orthogonal() {
        let u = random_orthogonal(6, &mut stream(1, 0));
        assert!((u.transpose() * &u - DMatrix::identity(6, 6)).amax() < 1e-12);
    }

    #[test]
    fn centered_log_sum_exp_rows_average_to_zero() {
        let f = random_log_sum_exp(3, 8, 20.0, true, &mut stream(2, 0)).unwrap();
        for k in 0..3 {
            let s: f64 = (0..8).map(|j| f.coeff(j)[k]).sum();
            assert!(s.abs() < 1e-12);
        }
    }
}
