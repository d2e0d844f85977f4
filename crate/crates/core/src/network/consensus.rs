//! Consensus-constrained optimization `min Σᵢ fᵢ(xᵢ)` s.t. `xᵢ = xⱼ`.
//!
//! The constraint is encoded as `(L ⊗ I_q) x = 0` and every agent runs the
//! accelerated primal-dual flow with damping `αᵢ/t` and look-ahead `½t`.

use std::sync::Arc;

use nalgebra::DVector;

use crate::convex::{minimize_smooth, Objective};
use crate::dynamics::PDState;
use crate::error::{check_len, Error, Result};
use crate::integrator::{OdeSystem, SecondOrderSystem};
use crate::network::{laplacian_pinv_apply, validate_alphas, GraphTopology};

#[derive(Debug, Clone)]
pub struct ConsensusProblem {
    graph: GraphTopology,
    locals: Vec<Arc<dyn Objective>>,
    alphas: Vec<f64>,
    q: usize,
}

impl ConsensusProblem {
    pub fn new(graph: GraphTopology, locals: Vec<Arc<dyn Objective>>, alphas: Vec<f64>) -> Result<Self> {
        let n = graph.node_count();
        check_len("local objectives", n, locals.len())?;
        validate_alphas(&alphas, n)?;
        let q = locals[0].dim();
        if q == 0 {
            return Err(Error::InvalidArgument("local dimension must be positive".into()));
        }
        for f in &locals {
            check_len("local objective dimension", q, f.dim())?;
        }
        Ok(Self {
            graph,
            locals,
            alphas,
            q,
        })
    }

    pub fn with_uniform_alpha(graph: GraphTopology, locals: Vec<Arc<dyn Objective>>, alpha: f64) -> Result<Self> {
        let n = graph.node_count();
        Self::new(graph, locals, vec![alpha; n])
    }

    pub fn graph(&self) -> &GraphTopology {
        &self.graph
    }

    pub fn local(&self, i: usize) -> &dyn Objective {
        self.locals[i].as_ref()
    }

    pub fn locals(&self) -> &[Arc<dyn Objective>] {
        &self.locals
    }

    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }

    pub fn agents(&self) -> usize {
        self.graph.node_count()
    }

    pub fn local_dim(&self) -> usize {
        self.q
    }

    /// `n·q`, the length of the stacked primal and dual vectors.
    pub fn stacked_dim(&self) -> usize {
        self.agents() * self.q
    }

    fn check_stacked(&self, what: &'static str, v: &[f64]) -> Result<()> {
        check_len(what, self.stacked_dim(), v.len())
    }

    /// `f(x) = Σᵢ fᵢ(xᵢ)`.
    pub fn objective(&self, x: &[f64]) -> Result<f64> {
        self.check_stacked("stacked primal", x)?;
        let q = self.q;
        Ok(self.locals.iter().enumerate().map(|(i, f)| f.value(&x[i * q..(i + 1) * q])).sum())
    }

    pub fn gradient(&self, x: &[f64]) -> Result<DVector<f64>> {
        self.check_stacked("stacked primal", x)?;
        let q = self.q;
        let mut g = DVector::zeros(x.len());
        for (i, f) in self.locals.iter().enumerate() {
            f.gradient(&x[i * q..(i + 1) * q], &mut g.as_mut_slice()[i * q..(i + 1) * q]);
        }
        Ok(g)
    }

    /// `(L ⊗ I_q) v`.
    pub fn laplacian_apply(&self, v: &[f64]) -> Result<DVector<f64>> {
        self.check_stacked("stacked vector", v)?;
        let mut out = DVector::zeros(v.len());
        self.graph.laplacian_apply(v, self.q, out.as_mut_slice());
        Ok(out)
    }

    /// `L₁(x, λ) = f(x) + λᵀ(L ⊗ I_q)x`.
    pub fn lagrangian(&self, x: &[f64], lambda: &[f64]) -> Result<f64> {
        self.check_stacked("stacked dual", lambda)?;
        let lx = self.laplacian_apply(x)?;
        Ok(self.objective(x)? + lx.iter().zip(lambda).map(|(a, b)| a * b).sum::<f64>())
    }

    /// `L₁(x, λ*) − L₁(x*, λ*)`, a Bregman divergence of `f` and hence non-negative.
    pub fn lagrangian_gap(&self, sol: &ConsensusSolution, x: &[f64]) -> Result<f64> {
        Ok(self.lagrangian(x, sol.lambda_star.as_slice())? - self.lagrangian(sol.x_star.as_slice(), sol.lambda_star.as_slice())?)
    }

    /// Accelerations of agent `i`. Reads only agent `i` and its neighbors.
    pub fn agent_accel(&self, i: usize, t: f64, pos: &[f64], vel: &[f64], acc_x: &mut [f64], acc_l: &mut [f64]) {
        let q = self.q;
        let nq = self.stacked_dim();
        let (x, lam) = pos.split_at(nq);
        let (xd, ld) = vel.split_at(nq);
        let ht = 0.5 * t;
        let damp = self.alphas[i] / t;
        let own = i * q..(i + 1) * q;
        self.locals[i].gradient(&x[own.clone()], acc_x);
        for k in 0..q {
            acc_x[k] = -damp * xd[own.start + k] - acc_x[k];
            acc_l[k] = -damp * ld[own.start + k];
        }
        for &(j, w) in self.graph.neighbors(i) {
            let (a, b) = (i * q, j * q);
            for k in 0..q {
                let dx = x[a + k] - x[b + k];
                let dl = (lam[a + k] + ht * ld[a + k]) - (lam[b + k] + ht * ld[b + k]);
                let dx_ahead = (x[a + k] + ht * xd[a + k]) - (x[b + k] + ht * xd[b + k]);
                acc_x[k] -= w * (dx + dl);
                acc_l[k] += w * dx_ahead;
            }
        }
    }
}

/// The consensus flow as a second-order system over positions `[x, λ]`.
#[derive(Debug, Clone, Copy)]
pub struct ConsensusField<'a> {
    problem: &'a ConsensusProblem,
}

impl<'a> ConsensusField<'a> {
    pub fn new(problem: &'a ConsensusProblem) -> Self {
        Self { problem }
    }
}

impl SecondOrderSystem for ConsensusField<'_> {
    fn n_pos(&self) -> usize {
        2 * self.problem.stacked_dim()
    }

    fn accel(&self, t: f64, pos: &[f64], vel: &[f64], acc: &mut [f64]) {
        let q = self.problem.q;
        let (ax, al) = acc.split_at_mut(self.problem.stacked_dim());
        for (i, (bx, bl)) in ax.chunks_mut(q).zip(al.chunks_mut(q)).enumerate() {
            self.problem.agent_accel(i, t, pos, vel, bx, bl);
        }
    }
}

/// Returns `(ẍ, λ̈)` at state `s`.
pub fn consensus_vector_field(cp: &ConsensusProblem, s: &PDState) -> Result<(DVector<f64>, DVector<f64>)> {
    if !(s.t > 0.0) {
        return Err(Error::SingularDamping(s.t));
    }
    let nq = cp.stacked_dim();
    for (what, v) in [("state x", &s.x), ("state lambda", &s.lambda), ("state x_dot", &s.x_dot), ("state lambda_dot", &s.lambda_dot)] {
        check_len(what, nq, v.len())?;
    }
    let pos: Vec<f64> = s.x.iter().chain(s.lambda.iter()).copied().collect();
    let vel: Vec<f64> = s.x_dot.iter().chain(s.lambda_dot.iter()).copied().collect();
    let mut acc = vec![0.0; 2 * nq];
    ConsensusField::new(cp).accel(s.t, &pos, &vel, &mut acc);
    Ok((DVector::from_column_slice(&acc[..nq]), DVector::from_column_slice(&acc[nq..])))
}

/// `xᵀ(L ⊗ I_q)x = Σ_{(i,j)∈E} aᵢⱼ‖xᵢ − xⱼ‖²`.
pub fn consensus_residual(cp: &ConsensusProblem, x: &[f64]) -> Result<f64> {
    cp.check_stacked("stacked primal", x)?;
    Ok(cp.graph.laplacian_quadratic(x, cp.q))
}

/// First-order saddle flow over `[x, λ]`: `ẋ = −∇f(x) − Lx − Lλ`, `λ̇ = Lx`.
#[derive(Debug, Clone, Copy)]
pub struct ConsensusSaddleFlow<'a> {
    problem: &'a ConsensusProblem,
}

impl<'a> ConsensusSaddleFlow<'a> {
    pub fn new(problem: &'a ConsensusProblem) -> Self {
        Self { problem }
    }
}

impl OdeSystem for ConsensusSaddleFlow<'_> {
    fn dim(&self) -> usize {
        2 * self.problem.stacked_dim()
    }

    fn rhs(&self, _t: f64, y: &[f64], dy: &mut [f64]) {
        let p = self.problem;
        let (q, nq) = (p.q, p.stacked_dim());
        let (x, lam) = y.split_at(nq);
        let (dx, dl) = dy.split_at_mut(nq);
        for i in 0..p.agents() {
            let own = i * q..(i + 1) * q;
            p.locals[i].gradient(&x[own.clone()], &mut dx[own.clone()]);
            for v in &mut dx[own.clone()] {
                *v = -*v;
            }
            dl[own].iter_mut().for_each(|v| *v = 0.0);
            for &(j, w) in p.graph.neighbors(i) {
                for k in 0..q {
                    let d = x[i * q + k] - x[j * q + k];
                    dx[i * q + k] -= w * (d + lam[i * q + k] - lam[j * q + k]);
                    dl[i * q + k] += w * d;
                }
            }
        }
    }
}

/// A point satisfying `∇f(x*) + (L ⊗ I)λ* = 0`, `(L ⊗ I)x* = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConsensusSolution {
    pub x_star: DVector<f64>,
    pub lambda_star: DVector<f64>,
}

impl ConsensusSolution {
    /// `(‖∇f(x) + Lλ‖, ‖Lx‖)`.
    pub fn residuals(cp: &ConsensusProblem, x: &DVector<f64>, lambda: &DVector<f64>) -> Result<(f64, f64)> {
        let stat = cp.gradient(x.as_slice())? + cp.laplacian_apply(lambda.as_slice())?;
        Ok((stat.norm(), cp.laplacian_apply(x.as_slice())?.norm()))
    }

    pub fn certify(cp: &ConsensusProblem, x: DVector<f64>, lambda: DVector<f64>, tol: f64) -> Result<Self> {
        let (stationarity, feasibility) = Self::residuals(cp, &x, &lambda)?;
        if !(stationarity <= tol && feasibility <= tol) {
            return Err(Error::Uncertified {
                stationarity,
                feasibility,
            });
        }
        Ok(Self {
            x_star: x,
            lambda_star: lambda,
        })
    }
}

/// Minimizes `Σᵢ fᵢ(x̄)` over a common `x̄`, then recovers the minimum-norm
/// multiplier from `(L ⊗ I)λ* = −∇f(1 ⊗ x̄)`.
pub fn solve_consensus_reference(cp: &ConsensusProblem, grad_tol: f64) -> Result<ConsensusSolution> {
    let (n, q) = (cp.agents(), cp.q);
    let value = |z: &[f64]| cp.locals.iter().map(|f| f.value(z)).sum::<f64>();
    let gradient = |z: &[f64], g: &mut [f64]| {
        let mut buf = vec![0.0; q];
        g.iter_mut().for_each(|v| *v = 0.0);
        for f in &cp.locals {
            f.gradient(z, &mut buf);
            for k in 0..q {
                g[k] += buf[k];
            }
        }
    };
    let xbar = minimize_smooth(value, gradient, &vec![0.0; q], grad_tol, 200_000)?;
    let x_star = DVector::from_fn(n * q, |r, _| xbar[r % q]);
    let rhs = -cp.gradient(x_star.as_slice())?;
    let lambda_star = laplacian_pinv_apply(&cp.graph, &rhs, q)?;
    ConsensusSolution::certify(cp, x_star, lambda_star, grad_tol.max(1e-12) * 1e3)
}

/// Energy of the consensus flow:
///
/// ```text
/// V = ½t²[L₁(x,λ*) − L₁(x*,λ*) + ½xᵀLx]
///   + ‖x + ½tẋ − x*‖² + ½(x − x*)ᵀ(D₁ − 3I)(x − x*)
///   + ‖λ + ½tλ̇ − λ*‖² + ½(λ − λ*)ᵀ(D₁ − 3I)(λ − λ*)
/// ```
pub fn consensus_lyapunov(cp: &ConsensusProblem, sol: &ConsensusSolution, s: &PDState) -> Result<f64> {
    let t = s.t;
    let x = s.x.as_slice();
    let gap = cp.lagrangian_gap(sol, x)?;
    let v1 = 0.5 * t * t * (gap + 0.5 * consensus_residual(cp, x)?);
    let v2 = energy_block(cp, t, &s.x, &s.x_dot, &sol.x_star)?;
    let v3 = energy_block(cp, t, &s.lambda, &s.lambda_dot, &sol.lambda_star)?;
    Ok(v1 + v2 + v3)
}

fn energy_block(cp: &ConsensusProblem, t: f64, v: &DVector<f64>, v_dot: &DVector<f64>, star: &DVector<f64>) -> Result<f64> {
    check_len("state velocity", cp.stacked_dim(), v_dot.len())?;
    let q = cp.q;
    let mut acc = 0.0;
    for r in 0..v.len() {
        let d = v[r] - star[r];
        let ahead = d + 0.5 * t * v_dot[r];
        acc += ahead * ahead + 0.5 * (cp.alphas[r / q] - 3.0) * d * d;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::convex::QuadraticObjective;
    use nalgebra::DMatrix;

    fn zero_pair() -> ConsensusProblem {
        let g = GraphTopology::path(2).unwrap();
        let locals: Vec<Arc<dyn Objective>> = vec![Arc::new(QuadraticObjective::zero(1)), Arc::new(QuadraticObjective::zero(1))];
        ConsensusProblem::with_uniform_alpha(g, locals, 4.0).unwrap()
    }

    #[test]
    fn two_agent_hand_example() {
        let cp = zero_pair();
        let s = PDState {
            t: 1.0,
            x: DVector::from_vec(vec![1.0, 0.0]),
            lambda: DVector::zeros(2),
            x_dot: DVector::zeros(2),
            lambda_dot: DVector::zeros(2),
        };
        let (ax, al) = consensus_vector_field(&cp, &s).unwrap();
        assert_eq!(ax.as_slice(), &[-1.0, 1.0]);
        assert_eq!(al.as_slice(), &[1.0, -1.0]);
        assert_eq!(consensus_residual(&cp, s.x.as_slice()).unwrap(), 1.0);
    }

    #[test]
    fn rejects_slow_alpha() {
        let g = GraphTopology::path(2).unwrap();
        let locals: Vec<Arc<dyn Objective>> = vec![Arc::new(QuadraticObjective::zero(1)), Arc::new(QuadraticObjective::zero(1))];
        assert!(ConsensusProblem::new(g, locals, vec![4.0, 3.0]).is_err());
    }

    #[test]
    fn reference_solution_on_quadratics() {
        // f_i(x) = ½(x − i)², consensus optimum is the mean index
        let g = GraphTopology::ring(4).unwrap();
        let locals: Vec<Arc<dyn Objective>> = (0..4)
            .map(|i| {
                Arc::new(QuadraticObjective::new(DMatrix::identity(1, 1), DVector::from_element(1, -(i as f64))).unwrap()) as Arc<dyn Objective>
            })
            .collect();
        let cp = ConsensusProblem::with_uniform_alpha(g, locals, 4.0).unwrap();
        let sol = solve_consensus_reference(&cp, 1e-12).unwrap();
        for v in sol.x_star.iter() {
            assert!((v - 1.5).abs() < 1e-10);
        }
        assert!(sol.lambda_star.sum().abs() < 1e-10);
        let s = PDState::at_rest(1.0, sol.x_star.clone(), 4);
        let s = PDState {
            lambda: sol.lambda_star.clone(),
            ..s
        };
        assert!(consensus_lyapunov(&cp, &sol, &s).unwrap().abs() < 1e-18);
    }
}
