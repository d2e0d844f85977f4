//! Extended monotropic optimization `min Σᵢ gᵢ(yᵢ)` s.t. `Σᵢ Wᵢyᵢ = Σᵢ dᵢ`.
//!
//! The coupled constraint is split across agents with an auxiliary `z`:
//! `d − W̄y − (L ⊗ I_m)z = 0`, which is equivalent on a connected graph because
//! `range(L) = 1⊥`. Each agent holds `yᵢ ∈ ℝ^{qᵢ}` and `λᵢ, zᵢ ∈ ℝ^m`.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::convex::{minimize_smooth, Objective, ProblemInstance};
use crate::error::{check_len, Error, Result};
use crate::integrator::{OdeSystem, SecondOrderSystem};
use crate::network::{build_laplacian, kron_identity, laplacian_pinv_apply, validate_alphas, GraphTopology, SeparableObjective};

#[derive(Debug, Clone)]
pub struct MonotropicProblem {
    graph: GraphTopology,
    locals: Vec<Arc<dyn Objective>>,
    w_blocks: Vec<DMatrix<f64>>,
    d_locals: Vec<DVector<f64>>,
    alphas: Vec<f64>,
    m: usize,
    /// Start of `yᵢ` in the stacked primal vector; one extra entry holds `q`.
    offsets: Vec<usize>,
}

impl MonotropicProblem {
    pub fn new(
        graph: GraphTopology,
        locals: Vec<Arc<dyn Objective>>,
        w_blocks: Vec<DMatrix<f64>>,
        d_locals: Vec<DVector<f64>>,
        alphas: Vec<f64>,
    ) -> Result<Self> {
        let n = graph.node_count();
        check_len("local objectives", n, locals.len())?;
        check_len("coupling blocks", n, w_blocks.len())?;
        check_len("local resources", n, d_locals.len())?;
        validate_alphas(&alphas, n)?;
        let m = d_locals[0].len();
        if m == 0 {
            return Err(Error::InvalidArgument("constraint dimension must be positive".into()));
        }
        let mut offsets = Vec::with_capacity(n + 1);
        let mut acc = 0;
        for i in 0..n {
            check_len("local resource length", m, d_locals[i].len())?;
            check_len("coupling block rows", m, w_blocks[i].nrows())?;
            check_len("coupling block columns", locals[i].dim(), w_blocks[i].ncols())?;
            offsets.push(acc);
            acc += locals[i].dim();
        }
        offsets.push(acc);
        Ok(Self {
            graph,
            locals,
            w_blocks,
            d_locals,
            alphas,
            m,
            offsets,
        })
    }

    pub fn graph(&self) -> &GraphTopology {
        &self.graph
    }

    pub fn agents(&self) -> usize {
        self.graph.node_count()
    }

    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }

    pub fn coupling_block(&self, i: usize) -> &DMatrix<f64> {
        &self.w_blocks[i]
    }

    pub fn local_resource(&self, i: usize) -> &DVector<f64> {
        &self.d_locals[i]
    }

    pub fn local(&self, i: usize) -> &dyn Objective {
        self.locals[i].as_ref()
    }

    /// Constraint dimension `m`.
    pub fn constraint_dim(&self) -> usize {
        self.m
    }

    /// Total primal dimension `q = Σ qᵢ`.
    pub fn primal_dim(&self) -> usize {
        self.offsets[self.agents()]
    }

    /// `n·m`, the length of the stacked `λ` and `z`.
    pub fn dual_dim(&self) -> usize {
        self.agents() * self.m
    }

    /// Length of the position vector `[y, λ, z]`.
    pub fn n_pos(&self) -> usize {
        self.primal_dim() + 2 * self.dual_dim()
    }

    pub fn block_range(&self, i: usize) -> std::ops::Range<usize> {
        self.offsets[i]..self.offsets[i + 1]
    }

    /// `d₀ = Σᵢ dᵢ`.
    pub fn total_resource(&self) -> DVector<f64> {
        self.d_locals.iter().fold(DVector::zeros(self.m), |acc, d| acc + d)
    }

    /// Stacked `d = [d₁; …; dₙ]`.
    pub fn stacked_resource(&self) -> DVector<f64> {
        let mut d = DVector::zeros(self.dual_dim());
        for (i, di) in self.d_locals.iter().enumerate() {
            d.rows_mut(i * self.m, self.m).copy_from(di);
        }
        d
    }

    /// `W̄ = diag(W₁, …, Wₙ)`.
    pub fn block_coupling(&self) -> DMatrix<f64> {
        let mut w = DMatrix::zeros(self.dual_dim(), self.primal_dim());
        for i in 0..self.agents() {
            let r = self.block_range(i);
            w.view_mut((i * self.m, r.start), (self.m, r.len())).copy_from(&self.w_blocks[i]);
        }
        w
    }

    /// `W = [W₁ … Wₙ]`.
    pub fn coupling(&self) -> DMatrix<f64> {
        let mut w = DMatrix::zeros(self.m, self.primal_dim());
        for i in 0..self.agents() {
            let r = self.block_range(i);
            w.view_mut((0, r.start), (self.m, r.len())).copy_from(&self.w_blocks[i]);
        }
        w
    }

    /// `g(y) = Σᵢ gᵢ(yᵢ)`.
    pub fn objective(&self, y: &[f64]) -> Result<f64> {
        check_len("stacked primal", self.primal_dim(), y.len())?;
        Ok((0..self.agents()).map(|i| self.locals[i].value(&y[self.block_range(i)])).sum())
    }

    pub fn gradient(&self, y: &[f64]) -> Result<DVector<f64>> {
        check_len("stacked primal", self.primal_dim(), y.len())?;
        let mut g = DVector::zeros(y.len());
        for i in 0..self.agents() {
            let r = self.block_range(i);
            self.locals[i].gradient(&y[r.clone()], &mut g.as_mut_slice()[r]);
        }
        Ok(g)
    }

    /// `(L ⊗ I_m) v`.
    pub fn laplacian_apply(&self, v: &[f64]) -> Result<DVector<f64>> {
        check_len("stacked dual", self.dual_dim(), v.len())?;
        let mut out = DVector::zeros(v.len());
        self.graph.laplacian_apply(v, self.m, out.as_mut_slice());
        Ok(out)
    }

    /// `L₂(y, z, λ) = g(y) + λᵀ(d − W̄y − Lz) − ½λᵀLλ`.
    pub fn lagrangian(&self, y: &[f64], z: &[f64], lambda: &[f64]) -> Result<f64> {
        check_len("stacked dual", self.dual_dim(), lambda.len())?;
        let r = self.split_residual(y, z)?;
        let ll = self.graph.laplacian_quadratic(lambda, self.m);
        Ok(self.objective(y)? + r.iter().zip(lambda).map(|(a, b)| a * b).sum::<f64>() - 0.5 * ll)
    }

    /// `d − W̄y − (L ⊗ I_m)z`.
    pub fn split_residual(&self, y: &[f64], z: &[f64]) -> Result<DVector<f64>> {
        check_len("stacked primal", self.primal_dim(), y.len())?;
        let mut r = self.stacked_resource() - self.laplacian_apply(z)?;
        for i in 0..self.agents() {
            let yi = DVector::from_column_slice(&y[self.block_range(i)]);
            let wy = &self.w_blocks[i] * yi;
            let mut ri = r.rows_mut(i * self.m, self.m);
            ri -= wy;
        }
        Ok(r)
    }

    /// Accelerations of agent `i` into `acc_y` (length `qᵢ`), `acc_l` and
    /// `acc_z` (length `m`). Reads only agent `i` and its neighbors.
    #[allow(clippy::too_many_arguments)]
    pub fn agent_accel(&self, i: usize, t: f64, pos: &[f64], vel: &[f64], acc_y: &mut [f64], acc_l: &mut [f64], acc_z: &mut [f64]) {
        let (q, nm, m) = (self.primal_dim(), self.dual_dim(), self.m);
        let (y, rest) = pos.split_at(q);
        let (lam, z) = rest.split_at(nm);
        let (yd, rest) = vel.split_at(q);
        let (ld, zd) = rest.split_at(nm);
        let ht = 0.5 * t;
        let damp = self.alphas[i] / t;
        let r = self.block_range(i);
        let w = &self.w_blocks[i];
        let own = i * m;

        self.locals[i].gradient(&y[r.clone()], acc_y);
        for (a, k) in r.clone().enumerate() {
            let mut pull = 0.0;
            for c in 0..m {
                pull += w[(c, a)] * (lam[own + c] + ht * ld[own + c]);
            }
            acc_y[a] = -damp * yd[k] - acc_y[a] + pull;
        }
        for c in 0..m {
            let mut wy = 0.0;
            for (a, k) in r.clone().enumerate() {
                wy += w[(c, a)] * (y[k] + ht * yd[k]);
            }
            acc_l[c] = -damp * ld[own + c] + self.d_locals[i][c] - wy;
            acc_z[c] = -damp * zd[own + c];
        }
        for &(j, wij) in self.graph.neighbors(i) {
            let other = j * m;
            for c in 0..m {
                let dl = lam[own + c] - lam[other + c];
                let dz_ahead = (z[own + c] + ht * zd[own + c]) - (z[other + c] + ht * zd[other + c]);
                let dl_ahead = dl + ht * (ld[own + c] - ld[other + c]);
                acc_l[c] -= wij * (dl + dz_ahead);
                acc_z[c] += wij * dl_ahead;
            }
        }
    }
}

/// Position and velocity of the monotropic flow.
#[derive(Debug, Clone, PartialEq)]
pub struct MonotropicState {
    pub t: f64,
    pub y: DVector<f64>,
    pub lambda: DVector<f64>,
    pub z: DVector<f64>,
    pub y_dot: DVector<f64>,
    pub lambda_dot: DVector<f64>,
    pub z_dot: DVector<f64>,
}

impl MonotropicState {
    /// Zero velocities, `λ = 0`, `z = 0`.
    pub fn at_rest(t: f64, y: DVector<f64>, dual_dim: usize) -> Self {
        let q = y.len();
        Self {
            t,
            y,
            lambda: DVector::zeros(dual_dim),
            z: DVector::zeros(dual_dim),
            y_dot: DVector::zeros(q),
            lambda_dot: DVector::zeros(dual_dim),
            z_dot: DVector::zeros(dual_dim),
        }
    }

    pub fn check_dims(&self, mp: &MonotropicProblem) -> Result<()> {
        let (q, nm) = (mp.primal_dim(), mp.dual_dim());
        check_len("state y", q, self.y.len())?;
        check_len("state y_dot", q, self.y_dot.len())?;
        for (what, v) in [("state lambda", &self.lambda), ("state z", &self.z), ("state lambda_dot", &self.lambda_dot), ("state z_dot", &self.z_dot)] {
            check_len(what, nm, v.len())?;
        }
        Ok(())
    }

    /// Packs into the integrator layout `[y, λ, z, ẏ, λ̇, ż]`.
    pub fn to_flat(&self) -> Vec<f64> {
        [&self.y, &self.lambda, &self.z, &self.y_dot, &self.lambda_dot, &self.z_dot]
            .iter()
            .flat_map(|v| v.iter().copied())
            .collect()
    }

    pub fn from_flat(t: f64, v: &[f64], q: usize, nm: usize) -> Self {
        let mut at = 0;
        let mut take = |len: usize| {
            let out = DVector::from_column_slice(&v[at..at + len]);
            at += len;
            out
        };
        Self {
            t,
            y: take(q),
            lambda: take(nm),
            z: take(nm),
            y_dot: take(q),
            lambda_dot: take(nm),
            z_dot: take(nm),
        }
    }
}

/// The monotropic flow as a second-order system over positions `[y, λ, z]`.
#[derive(Debug, Clone, Copy)]
pub struct MonotropicField<'a> {
    problem: &'a MonotropicProblem,
}

impl<'a> MonotropicField<'a> {
    pub fn new(problem: &'a MonotropicProblem) -> Self {
        Self { problem }
    }
}

impl SecondOrderSystem for MonotropicField<'_> {
    fn n_pos(&self) -> usize {
        self.problem.n_pos()
    }

    fn accel(&self, t: f64, pos: &[f64], vel: &[f64], acc: &mut [f64]) {
        let p = self.problem;
        let (q, nm, m) = (p.primal_dim(), p.dual_dim(), p.m);
        let (ay, rest) = acc.split_at_mut(q);
        let (al, az) = rest.split_at_mut(nm);
        for i in 0..p.agents() {
            let r = p.block_range(i);
            p.agent_accel(i, t, pos, vel, &mut ay[r], &mut al[i * m..(i + 1) * m], &mut az[i * m..(i + 1) * m]);
        }
    }
}

/// Returns `(ÿ, λ̈, z̈)` at state `s`.
pub fn monotropic_vector_field(mp: &MonotropicProblem, s: &MonotropicState) -> Result<(DVector<f64>, DVector<f64>, DVector<f64>)> {
    if !(s.t > 0.0) {
        return Err(Error::SingularDamping(s.t));
    }
    s.check_dims(mp)?;
    let (q, nm) = (mp.primal_dim(), mp.dual_dim());
    let flat = s.to_flat();
    let (pos, vel) = flat.split_at(mp.n_pos());
    let mut acc = vec![0.0; mp.n_pos()];
    MonotropicField::new(mp).accel(s.t, pos, vel, &mut acc);
    Ok((
        DVector::from_column_slice(&acc[..q]),
        DVector::from_column_slice(&acc[q..q + nm]),
        DVector::from_column_slice(&acc[q + nm..]),
    ))
}

/// The split problem over `(y, z)` as a single instance with objective
/// `g(y)` and constraint `[W̄  L ⊗ I_m] [y; z] = d`.
pub fn decompose_monotropic(mp: &MonotropicProblem) -> Result<ProblemInstance> {
    if !mp.graph.is_connected() {
        return Err(Error::Graph("monotropic decomposition requires a connected graph".into()));
    }
    let (q, nm) = (mp.primal_dim(), mp.dual_dim());
    let mut a = DMatrix::zeros(nm, q + nm);
    a.view_mut((0, 0), (nm, q)).copy_from(&mp.block_coupling());
    a.view_mut((0, q), (nm, nm)).copy_from(&kron_identity(&build_laplacian(&mp.graph), mp.m));
    let objective = SeparableObjective::new(mp.locals.clone(), nm);
    ProblemInstance::new(Arc::new(objective), a, mp.stacked_resource())
}

/// `‖Σᵢ Wᵢyᵢ − d₀‖`.
pub fn monotropic_feasibility(mp: &MonotropicProblem, y: &[f64]) -> Result<f64> {
    check_len("stacked primal", mp.primal_dim(), y.len())?;
    let wy = mp.coupling() * DVector::from_column_slice(y);
    Ok((wy - mp.total_resource()).norm())
}

/// `λᵀ(L ⊗ I_m)λ`.
pub fn dual_consensus(mp: &MonotropicProblem, lambda: &[f64]) -> Result<f64> {
    check_len("stacked dual", mp.dual_dim(), lambda.len())?;
    Ok(mp.graph.laplacian_quadratic(lambda, mp.m))
}

/// First-order saddle flow of `L₂`: `ẏ = −∇_yL₂`, `λ̇ = ∇_λL₂`, `ż = −∇_zL₂`.
#[derive(Debug, Clone, Copy)]
pub struct MonotropicSaddleFlow<'a> {
    problem: &'a MonotropicProblem,
}

impl<'a> MonotropicSaddleFlow<'a> {
    pub fn new(problem: &'a MonotropicProblem) -> Self {
        Self { problem }
    }
}

impl OdeSystem for MonotropicSaddleFlow<'_> {
    fn dim(&self) -> usize {
        self.problem.n_pos()
    }

    fn rhs(&self, _t: f64, v: &[f64], dv: &mut [f64]) {
        let p = self.problem;
        let (q, nm, m) = (p.primal_dim(), p.dual_dim(), p.m);
        let (y, rest) = v.split_at(q);
        let (lam, z) = rest.split_at(nm);
        let (dy, rest) = dv.split_at_mut(q);
        let (dl, dz) = rest.split_at_mut(nm);
        for i in 0..p.agents() {
            let r = p.block_range(i);
            let w = &p.w_blocks[i];
            let own = i * m;
            p.locals[i].gradient(&y[r.clone()], &mut dy[r.clone()]);
            for (a, k) in r.clone().enumerate() {
                let pull: f64 = (0..m).map(|c| w[(c, a)] * lam[own + c]).sum();
                dy[k] = -dy[k] + pull;
            }
            for c in 0..m {
                let wy: f64 = r.clone().enumerate().map(|(a, k)| w[(c, a)] * y[k]).sum();
                dl[own + c] = p.d_locals[i][c] - wy;
                dz[own + c] = 0.0;
            }
            for &(j, wij) in p.graph.neighbors(i) {
                for c in 0..m {
                    let d_lam = lam[own + c] - lam[j * m + c];
                    dl[own + c] -= wij * (d_lam + z[own + c] - z[j * m + c]);
                    dz[own + c] += wij * d_lam;
                }
            }
        }
    }
}

/// A point satisfying `∇g(y*) = W̄ᵀλ*`, `d − W̄y* − Lz* = 0`, `Lλ* = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct MonotropicSolution {
    pub y_star: DVector<f64>,
    pub z_star: DVector<f64>,
    pub lambda_star: DVector<f64>,
}

impl MonotropicSolution {
    /// The three KKT residual norms in the order listed on the type.
    pub fn residuals(mp: &MonotropicProblem, y: &DVector<f64>, z: &DVector<f64>, lambda: &DVector<f64>) -> Result<[f64; 3]> {
        let stat = mp.gradient(y.as_slice())? - mp.block_coupling().tr_mul(lambda);
        let split = mp.split_residual(y.as_slice(), z.as_slice())?;
        let cons = mp.laplacian_apply(lambda.as_slice())?;
        Ok([stat.norm(), split.norm(), cons.norm()])
    }

    pub fn certify(mp: &MonotropicProblem, y: DVector<f64>, z: DVector<f64>, lambda: DVector<f64>, tol: f64) -> Result<Self> {
        let [stat, split, cons] = Self::residuals(mp, &y, &z, &lambda)?;
        if !(stat <= tol && split.max(cons) <= tol) {
            return Err(Error::Uncertified {
                stationarity: stat,
                feasibility: split.max(cons),
            });
        }
        Ok(Self {
            y_star: y,
            z_star: z,
            lambda_star: lambda,
        })
    }
}

/// Minimizes `g` on the affine set `Wy = d₀` through the parameterization
/// `y = W⁺d₀ + (I − W⁺W)u`, then recovers a common multiplier by least squares
/// and the minimum-norm `z*`.
pub fn solve_monotropic_reference(mp: &MonotropicProblem, grad_tol: f64) -> Result<MonotropicSolution> {
    let q = mp.primal_dim();
    let w = mp.coupling();
    let w_pinv = w.clone().pseudo_inverse(1e-12).map_err(|e| Error::Degenerate(e.to_string()))?;
    let y_p = &w_pinv * mp.total_resource();
    if (&w * &y_p - mp.total_resource()).norm() > 1e-9 * (1.0 + mp.total_resource().norm()) {
        return Err(Error::Infeasible("Σ Wᵢyᵢ = d₀ has no solution".into()));
    }
    let proj = DMatrix::identity(q, q) - &w_pinv * &w;
    let lift = |u: &[f64]| &y_p + &proj * DVector::from_column_slice(u);
    let value = |u: &[f64]| mp.objective(lift(u).as_slice()).unwrap_or(f64::INFINITY);
    let gradient = |u: &[f64], g: &mut [f64]| {
        let full = mp.gradient(lift(u).as_slice()).expect("dimension checked");
        g.copy_from_slice((&proj * full).as_slice());
    };
    let u = minimize_smooth(value, gradient, &vec![0.0; q], grad_tol, 500_000)?;
    let y_star = lift(&u);

    let grad = mp.gradient(y_star.as_slice())?;
    let mu = w
        .transpose()
        .svd(true, true)
        .solve(&grad, 1e-12)
        .map_err(|e| Error::Degenerate(e.to_string()))?;
    let lambda_star = DVector::from_fn(mp.dual_dim(), |r, _| mu[r % mp.m]);

    let mut rhs = mp.stacked_resource();
    for i in 0..mp.agents() {
        let yi = DVector::from_column_slice(&y_star.as_slice()[mp.block_range(i)]);
        let wy = &mp.w_blocks[i] * yi;
        let mut ri = rhs.rows_mut(i * mp.m, mp.m);
        ri -= wy;
    }
    let z_star = laplacian_pinv_apply(&mp.graph, &rhs, mp.m)?;
    let scale = 1.0 + mp.total_resource().norm();
    MonotropicSolution::certify(mp, y_star, z_star, lambda_star, grad_tol.max(1e-12) * 1e3 * scale)
}

/// Energy of the monotropic flow:
///
/// ```text
/// V = ½t²[L₂(y,z*,λ*) − L₂(y*,z*,λ)]
///   + ‖y + ½tẏ − y*‖² + ½(y − y*)ᵀ(D₂ − 3I)(y − y*)
///   + ‖λ + ½tλ̇ − λ*‖² + ½(λ − λ*)ᵀ(D₃ − 3I)(λ − λ*)
///   + ‖z + ½tż − z*‖² + ½(z − z*)ᵀ(D₃ − 3I)(z − z*)
/// ```
pub fn monotropic_lyapunov(mp: &MonotropicProblem, sol: &MonotropicSolution, s: &MonotropicState) -> Result<f64> {
    s.check_dims(mp)?;
    let t = s.t;
    let v1 = 0.5 * t * t * monotropic_gap(mp, sol, s.y.as_slice(), s.lambda.as_slice())?;
    let primal_alpha = |r: usize| mp.alphas[mp.offsets.partition_point(|&o| o <= r) - 1];
    let dual_alpha = |r: usize| mp.alphas[r / mp.m];
    let v2 = energy_block(t, &s.y, &s.y_dot, &sol.y_star, primal_alpha);
    let v3 = energy_block(t, &s.lambda, &s.lambda_dot, &sol.lambda_star, dual_alpha);
    let v4 = energy_block(t, &s.z, &s.z_dot, &sol.z_star, dual_alpha);
    Ok(v1 + v2 + v3 + v4)
}

/// `L₂(y, z*, λ*) − L₂(y*, z*, λ)`.
pub fn monotropic_gap(mp: &MonotropicProblem, sol: &MonotropicSolution, y: &[f64], lambda: &[f64]) -> Result<f64> {
    let z = sol.z_star.as_slice();
    Ok(mp.lagrangian(y, z, sol.lambda_star.as_slice())? - mp.lagrangian(sol.y_star.as_slice(), z, lambda)?)
}

fn energy_block(t: f64, v: &DVector<f64>, v_dot: &DVector<f64>, star: &DVector<f64>, alpha: impl Fn(usize) -> f64) -> f64 {
    let mut acc = 0.0;
    for r in 0..v.len() {
        let d = v[r] - star[r];
        let ahead = d + 0.5 * t * v_dot[r];
        acc += ahead * ahead + 0.5 * (alpha(r) - 3.0) * d * d;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::convex::QuadraticObjective;

    fn single_agent() -> MonotropicProblem {
        let g = GraphTopology::new(1, &[]).unwrap();
        let f: Arc<dyn Objective> = Arc::new(QuadraticObjective::new(DMatrix::identity(2, 2), DVector::zeros(2)).unwrap());
        MonotropicProblem::new(g, vec![f], vec![DMatrix::identity(2, 2)], vec![DVector::from_vec(vec![30.0, 50.0])], vec![4.0]).unwrap()
    }

    #[test]
    fn feasibility_at_origin_is_resource_norm() {
        let mp = single_agent();
        let r = monotropic_feasibility(&mp, &[0.0, 0.0]).unwrap();
        assert!((r - 3400f64.sqrt()).abs() < 1e-12);
        assert_eq!(monotropic_feasibility(&mp, &[30.0, 50.0]).unwrap(), 0.0);
    }

    #[test]
    fn single_agent_decomposition_has_no_coupling() {
        let mp = single_agent();
        let p = decompose_monotropic(&mp).unwrap();
        let a = p.constraint_matrix();
        assert_eq!(a.view((0, 2), (2, 2)).amax(), 0.0);
        assert_eq!(a.view((0, 0), (2, 2)).into_owned(), DMatrix::identity(2, 2));
    }

    #[test]
    fn disconnected_graph_is_rejected() {
        let g = GraphTopology::new(2, &[]).unwrap();
        let f: Arc<dyn Objective> = Arc::new(QuadraticObjective::zero(1));
        let mp = MonotropicProblem::new(
            g,
            vec![f.clone(), f],
            vec![DMatrix::identity(1, 1); 2],
            vec![DVector::zeros(1); 2],
            vec![4.0; 2],
        )
        .unwrap();
        assert!(matches!(decompose_monotropic(&mp), Err(Error::Graph(_))));
    }

    #[test]
    fn reference_on_single_agent_projection() {
        // min ½‖y‖² s.t. y = d₀
        let mp = single_agent();
        let sol = solve_monotropic_reference(&mp, 1e-12).unwrap();
        assert!((sol.y_star[0] - 30.0).abs() < 1e-9 && (sol.y_star[1] - 50.0).abs() < 1e-9);
        assert!((sol.lambda_star[1] - 50.0).abs() < 1e-9);
    }
}
