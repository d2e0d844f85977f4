//! Smooth convex objectives, affine equality constraints and KKT machinery.
//!
//! Objectives are required to be convex and twice continuously differentiable,
//! although only values and gradients are ever evaluated.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{check_len, Error, Result};

/// Residual threshold under which a candidate (x*, lambda*) is accepted as a KKT point.
pub const KKT_CERT_TOL: f64 = 1e-7;

/// Smooth convex function oracle on R^dim.
///
/// Implementations may assume slice lengths have already been validated.
pub trait Objective: Send + Sync + fmt::Debug {
    fn dim(&self) -> usize;

    fn value(&self, x: &[f64]) -> f64;

    /// Writes the gradient at `x` into `grad`, overwriting its contents.
    fn gradient(&self, x: &[f64], grad: &mut [f64]);

    /// Downcast hook for the exact KKT oracle.
    fn as_quadratic(&self) -> Option<&QuadraticObjective> {
        None
    }
}

/// `0.5 x'Qx + c'x` with `Q` symmetric positive semi-definite.
#[derive(Debug, Clone)]
pub struct QuadraticObjective {
    q: DMatrix<f64>,
    c: DVector<f64>,
}

impl QuadraticObjective {
    pub fn new(q: DMatrix<f64>, c: DVector<f64>) -> Result<Self> {
        if !q.is_square() {
            return Err(Error::InvalidArgument(format!(
                "Q must be square, got {}x{}",
                q.nrows(),
                q.ncols()
            )));
        }
        check_len("quadratic linear term", q.nrows(), c.len())?;
        let asym = (&q - q.transpose()).amax();
        if asym > 1e-12 {
            return Err(Error::InvalidArgument(format!(
                "Q is not symmetric (max asymmetry {asym:e})"
            )));
        }
        if q.nrows() > 0 {
            let min_eig = q.clone().symmetric_eigenvalues().min();
            if min_eig < -1e-10 {
                return Err(Error::InvalidArgument(format!(
                    "Q is not positive semi-definite (min eigenvalue {min_eig:e})"
                )));
            }
        }
        Ok(Self { q, c })
    }

    /// The identically zero function on R^dim.
    pub fn zero(dim: usize) -> Self {
        Self {
            q: DMatrix::zeros(dim, dim),
            c: DVector::zeros(dim),
        }
    }

    pub fn hessian(&self) -> &DMatrix<f64> {
        &self.q
    }

    pub fn linear(&self) -> &DVector<f64> {
        &self.c
    }
}

impl Objective for QuadraticObjective {
    fn dim(&self) -> usize {
        self.c.len()
    }

    fn value(&self, x: &[f64]) -> f64 {
        let n = self.dim();
        let mut quad = 0.0;
        for j in 0..n {
            let col = self.q.column(j);
            let mut s = 0.0;
            for i in 0..n {
                s += col[i] * x[i];
            }
            quad += x[j] * s;
        }
        let lin: f64 = self.c.iter().zip(x).map(|(c, x)| c * x).sum();
        0.5 * quad + lin
    }

    fn gradient(&self, x: &[f64], grad: &mut [f64]) {
        grad.copy_from_slice(self.c.as_slice());
        for (j, &xj) in x.iter().enumerate().take(self.dim()) {
            if xj != 0.0 {
                for (g, qij) in grad.iter_mut().zip(self.q.column(j).iter()) {
                    *g += qij * xj;
                }
            }
        }
    }

    fn as_quadratic(&self) -> Option<&QuadraticObjective> {
        Some(self)
    }
}

/// `rho * log sum_j exp((c_j'x - b_j) / rho)`.
#[derive(Debug, Clone)]
pub struct LogSumExpObjective {
    rho: f64,
    dim: usize,
    /// Row-major `terms x dim`.
    coeffs: Vec<f64>,
    offsets: Vec<f64>,
}

impl LogSumExpObjective {
    /// `coeffs` holds one row per term.
    pub fn new(rho: f64, coeffs: DMatrix<f64>, offsets: DVector<f64>) -> Result<Self> {
        if !(rho > 0.0 && rho.is_finite()) {
            return Err(Error::InvalidArgument(format!("rho must be positive, got {rho}")));
        }
        if coeffs.nrows() == 0 {
            return Err(Error::InvalidArgument("log-sum-exp needs at least one term".into()));
        }
        check_len("log-sum-exp offsets", coeffs.nrows(), offsets.len())?;
        let dim = coeffs.ncols();
        let mut flat = Vec::with_capacity(coeffs.len());
        for row in coeffs.row_iter() {
            flat.extend(row.iter().copied());
        }
        Ok(Self {
            rho,
            dim,
            coeffs: flat,
            offsets: offsets.as_slice().to_vec(),
        })
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn terms(&self) -> usize {
        self.offsets.len()
    }

    pub fn coeff(&self, term: usize) -> &[f64] {
        &self.coeffs[term * self.dim..(term + 1) * self.dim]
    }

    pub fn offset(&self, term: usize) -> f64 {
        self.offsets[term]
    }

    #[inline]
    fn exponent(&self, term: usize, x: &[f64]) -> f64 {
        let c = self.coeff(term);
        let dot: f64 = c.iter().zip(x).map(|(c, x)| c * x).sum();
        (dot - self.offsets[term]) / self.rho
    }

}

impl Objective for LogSumExpObjective {
    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, x: &[f64]) -> f64 {
        // streaming max-subtraction: `sum` is relative to the running max `smax`
        let mut smax = f64::NEG_INFINITY;
        let mut sum = 0.0;
        for j in 0..self.terms() {
            let s = self.exponent(j, x);
            if s > smax {
                sum = sum * (smax - s).exp() + 1.0;
                smax = s;
            } else {
                sum += (s - smax).exp();
            }
        }
        self.rho * (smax + sum.ln())
    }

    fn gradient(&self, x: &[f64], grad: &mut [f64]) {
        // softmax-weighted average of the coefficient rows, single pass
        let mut smax = f64::NEG_INFINITY;
        let mut total = 0.0;
        grad.iter_mut().for_each(|g| *g = 0.0);
        for j in 0..self.terms() {
            let s = self.exponent(j, x);
            let w = if s > smax {
                let rescale = (smax - s).exp();
                total *= rescale;
                grad.iter_mut().for_each(|g| *g *= rescale);
                smax = s;
                1.0
            } else {
                (s - smax).exp()
            };
            total += w;
            for (g, c) in grad.iter_mut().zip(self.coeff(j)) {
                *g += w * c;
            }
        }
        grad.iter_mut().for_each(|g| *g /= total);
    }
}

/// A convex objective together with the affine constraint `Ax = b`.
#[derive(Debug, Clone)]
pub struct ProblemInstance {
    objective: Arc<dyn Objective>,
    a: DMatrix<f64>,
    b: DVector<f64>,
}

impl ProblemInstance {
    pub fn new(objective: Arc<dyn Objective>, a: DMatrix<f64>, b: DVector<f64>) -> Result<Self> {
        if objective.dim() == 0 {
            return Err(Error::InvalidArgument("primal dimension must be positive".into()));
        }
        check_len("constraint matrix columns", objective.dim(), a.ncols())?;
        check_len("constraint right-hand side", a.nrows(), b.len())?;
        Ok(Self { objective, a, b })
    }

    pub fn objective(&self) -> &dyn Objective {
        self.objective.as_ref()
    }

    pub fn constraint_matrix(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn constraint_rhs(&self) -> &DVector<f64> {
        &self.b
    }

    pub fn dim_primal(&self) -> usize {
        self.a.ncols()
    }

    pub fn dim_dual(&self) -> usize {
        self.a.nrows()
    }

    pub fn eval_objective(&self, x: &DVector<f64>) -> Result<f64> {
        check_len("primal point", self.dim_primal(), x.len())?;
        Ok(self.objective.value(x.as_slice()))
    }

    pub fn eval_gradient(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        check_len("primal point", self.dim_primal(), x.len())?;
        let mut g = DVector::zeros(x.len());
        self.objective.gradient(x.as_slice(), g.as_mut_slice());
        Ok(g)
    }

    /// `Ax - b`.
    pub fn constraint_residual(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        check_len("primal point", self.dim_primal(), x.len())?;
        Ok(&self.a * x - &self.b)
    }

    /// Returns `(‖∇φ(x) + Aᵀλ‖, ‖Ax − b‖)`.
    pub fn kkt_residual(&self, x: &DVector<f64>, lambda: &DVector<f64>) -> Result<(f64, f64)> {
        check_len("dual point", self.dim_dual(), lambda.len())?;
        let stationarity = (self.eval_gradient(x)? + self.a.tr_mul(lambda)).norm();
        let feasibility = self.constraint_residual(x)?.norm();
        Ok((stationarity, feasibility))
    }

    /// Largest coordinate-wise relative error between the analytic gradient and
    /// central differences with the given step.
    pub fn gradient_check(&self, x: &DVector<f64>, step: f64) -> Result<f64> {
        if !(step > 0.0) {
            return Err(Error::InvalidArgument(format!("step must be positive, got {step}")));
        }
        let analytic = self.eval_gradient(x)?;
        Ok(gradient_check_fn(
            |y| self.objective.value(y),
            analytic.as_slice(),
            x.as_slice(),
            step,
        ))
    }
}

pub(crate) fn gradient_check_fn(
    value: impl Fn(&[f64]) -> f64,
    analytic: &[f64],
    x: &[f64],
    step: f64,
) -> f64 {
    let mut probe = x.to_vec();
    let mut worst: f64 = 0.0;
    for i in 0..x.len() {
        probe[i] = x[i] + step;
        let up = value(&probe);
        probe[i] = x[i] - step;
        let down = value(&probe);
        probe[i] = x[i];
        let fd = (up - down) / (2.0 * step);
        let scale = analytic[i].abs().max(fd.abs()).max(1.0);
        worst = worst.max((analytic[i] - fd).abs() / scale);
    }
    worst
}

/// A primal-dual pair satisfying the KKT system of a [`ProblemInstance`].
#[derive(Debug, Clone, PartialEq)]
pub struct KktPoint {
    pub x_star: DVector<f64>,
    pub lambda_star: DVector<f64>,
}

impl KktPoint {
    /// Accepts `(x, lambda)` only if both KKT residuals are below `tol`.
    pub fn certify(p: &ProblemInstance, x: DVector<f64>, lambda: DVector<f64>, tol: f64) -> Result<Self> {
        let (stationarity, feasibility) = p.kkt_residual(&x, &lambda)?;
        if stationarity > tol || feasibility > tol || !stationarity.is_finite() || !feasibility.is_finite() {
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

/// Solves `[Q Aᵀ; A 0] [x; λ] = [−c; b]` for a quadratic objective.
pub fn solve_kkt_oracle(p: &ProblemInstance) -> Result<KktPoint> {
    let quad = p
        .objective()
        .as_quadratic()
        .ok_or_else(|| Error::InvalidArgument("the KKT oracle requires a quadratic objective".into()))?;
    let (n, m) = (p.dim_primal(), p.dim_dual());
    let a = p.constraint_matrix();
    let b = p.constraint_rhs();

    if m > 0 {
        let rank_a = a.clone().svd(false, false).rank(rank_tol(a));
        let mut ab = DMatrix::zeros(m, n + 1);
        ab.view_mut((0, 0), (m, n)).copy_from(a);
        ab.set_column(n, b);
        let rank_ab = ab.clone().svd(false, false).rank(rank_tol(&ab));
        if rank_ab > rank_a {
            return Err(Error::Infeasible(format!(
                "rank(A) = {rank_a} < rank([A b]) = {rank_ab}"
            )));
        }
    }

    let mut kkt = DMatrix::zeros(n + m, n + m);
    kkt.view_mut((0, 0), (n, n)).copy_from(quad.hessian());
    kkt.view_mut((0, n), (n, m)).copy_from(&a.transpose());
    kkt.view_mut((n, 0), (m, n)).copy_from(a);
    let mut rhs = DVector::zeros(n + m);
    rhs.rows_mut(0, n).copy_from(&(-quad.linear()));
    rhs.rows_mut(n, m).copy_from(b);

    let svd = kkt.svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if smax == 0.0 || smin <= 1e-12 * smax {
        return Err(Error::Degenerate(format!(
            "KKT matrix is singular (condition estimate {:e})",
            smax / smin
        )));
    }
    let sol = svd
        .solve(&rhs, 0.0)
        .map_err(|e| Error::Degenerate(e.to_string()))?;
    let x = sol.rows(0, n).into_owned();
    let lambda = sol.rows(n, m).into_owned();
    KktPoint::certify(p, x, lambda, 1e-9)
}

/// KKT point of a general smooth objective: minimizes `φ` over the affine set
/// `{x̂ + (I − A⁺A)u}` and recovers `λ` from `Aᵀλ = −∇φ(x*)` by least squares.
/// Quadratic objectives go through [`solve_kkt_oracle`] instead.
pub fn solve_kkt_reference(p: &ProblemInstance, grad_tol: f64) -> Result<KktPoint> {
    if p.objective().as_quadratic().is_some() {
        return solve_kkt_oracle(p);
    }
    let n = p.dim_primal();
    let a = p.constraint_matrix();
    let b = p.constraint_rhs();
    let a_pinv = a.clone().pseudo_inverse(1e-12).map_err(|e| Error::Degenerate(e.to_string()))?;
    let x_p = &a_pinv * b;
    if (a * &x_p - b).norm() > 1e-9 * (1.0 + b.norm()) {
        return Err(Error::Infeasible("Ax = b has no solution".into()));
    }
    let proj = DMatrix::identity(n, n) - &a_pinv * a;
    let lift = |u: &[f64]| &x_p + &proj * DVector::from_column_slice(u);
    let obj = p.objective();
    let value = |u: &[f64]| obj.value(lift(u).as_slice());
    let gradient = |u: &[f64], g: &mut [f64]| {
        let mut full = vec![0.0; n];
        obj.gradient(lift(u).as_slice(), &mut full);
        g.copy_from_slice((&proj * DVector::from_vec(full)).as_slice());
    };
    let u = minimize_smooth(value, gradient, &vec![0.0; n], grad_tol, 500_000)?;
    let x = lift(&u);
    let lambda = if p.dim_dual() == 0 {
        DVector::zeros(0)
    } else {
        a.transpose()
            .svd(true, true)
            .solve(&(-p.eval_gradient(&x)?), 1e-12)
            .map_err(|e| Error::Degenerate(e.to_string()))?
    };
    KktPoint::certify(p, x, lambda, KKT_CERT_TOL.max(grad_tol * 1e3))
}

fn rank_tol(m: &DMatrix<f64>) -> f64 {
    let scale = m.amax().max(1.0);
    1e-10 * scale * (m.nrows().max(m.ncols()) as f64)
}

/// Unconstrained minimization of a smooth convex function by Barzilai-Borwein
/// gradient steps with a nonmonotone Armijo safeguard.
///
/// Used to produce reference optima for objectives without a closed-form solution.
pub fn minimize_smooth(
    value: impl Fn(&[f64]) -> f64,
    gradient: impl Fn(&[f64], &mut [f64]),
    x0: &[f64],
    grad_tol: f64,
    max_iter: usize,
) -> Result<Vec<f64>> {
    const MEMORY: usize = 10;
    let n = x0.len();
    let mut x = x0.to_vec();
    let mut g = vec![0.0; n];
    gradient(&x, &mut g);
    let mut fx = value(&x);
    let mut recent = vec![fx];
    let mut step = 1.0 / norm(&g).max(1.0);
    let mut x_new = vec![0.0; n];
    let mut g_new = vec![0.0; n];

    for _ in 0..max_iter {
        let gnorm = norm(&g);
        if gnorm <= grad_tol {
            return Ok(x);
        }
        let f_ref = recent.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut t = step;
        let mut accepted = false;
        for _ in 0..60 {
            for i in 0..n {
                x_new[i] = x[i] - t * g[i];
            }
            let f_new = value(&x_new);
            if f_new.is_finite() && f_new <= f_ref - 1e-4 * t * gnorm * gnorm {
                fx = f_new;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            // Armijo cannot make progress below rounding level
            return if gnorm <= grad_tol * 1e3 {
                Ok(x)
            } else {
                Err(Error::NoConvergence(format!("line search failed at gradient norm {gnorm:e}")))
            };
        }
        gradient(&x_new, &mut g_new);
        let mut sy = 0.0;
        let mut ss = 0.0;
        for i in 0..n {
            let s = x_new[i] - x[i];
            let y = g_new[i] - g[i];
            sy += s * y;
            ss += s * s;
        }
        step = if sy > 0.0 { (ss / sy).clamp(1e-12, 1e12) } else { t * 2.0 };
        std::mem::swap(&mut x, &mut x_new);
        std::mem::swap(&mut g, &mut g_new);
        recent.push(fx);
        if recent.len() > MEMORY {
            recent.remove(0);
        }
    }
    let gnorm = norm(&g);
    if gnorm <= grad_tol {
        Ok(x)
    } else {
        Err(Error::NoConvergence(format!(
            "{max_iter} iterations exhausted at gradient norm {gnorm:e}"
        )))
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn qp(q: DMatrix<f64>, c: DVector<f64>, a: DMatrix<f64>, b: DVector<f64>) -> ProblemInstance {
        ProblemInstance::new(Arc::new(QuadraticObjective::new(q, c).unwrap()), a, b).unwrap()
    }

    #[test]
    fn quadratic_value_at_unit_point() {
        let p = qp(
            DMatrix::identity(2, 2),
            DVector::zeros(2),
            DMatrix::from_row_slice(1, 2, &[1.0, 0.0]),
            DVector::zeros(1),
        );
        assert_eq!(p.eval_objective(&DVector::from_vec(vec![1.0, 1.0])).unwrap(), 1.0);
    }

    #[test]
    fn single_term_log_sum_exp_is_affine() {
        let f = LogSumExpObjective::new(
            20.0,
            DMatrix::from_row_slice(1, 2, &[1.0, 0.0]),
            DVector::zeros(1),
        )
        .unwrap();
        assert_relative_eq!(f.value(&[3.0, 5.0]), 3.0, epsilon = 1e-12);
        let mut g = [0.0; 2];
        f.gradient(&[-7.0, 2.5], &mut g);
        assert_eq!(g, [1.0, 0.0]);
    }

    #[test]
    fn log_sum_exp_gradient_at_origin_is_mean_coefficient() {
        let c = DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 0.0, 2.0, -1.0, 4.0]);
        let f = LogSumExpObjective::new(20.0, c, DVector::zeros(3)).unwrap();
        let mut g = [0.0; 2];
        f.gradient(&[0.0, 0.0], &mut g);
        assert_relative_eq!(g[0], 0.0, epsilon = 1e-15);
        assert_relative_eq!(g[1], 2.0, epsilon = 1e-15);
    }

    #[test]
    fn log_sum_exp_survives_huge_arguments() {
        let c = DMatrix::from_row_slice(2, 1, &[1.0, 2.0]);
        let f = LogSumExpObjective::new(1.0, c, DVector::zeros(2)).unwrap();
        let v = f.value(&[1e6]);
        assert!(v.is_finite());
        assert_relative_eq!(v, 2e6, max_relative = 1e-12);
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let p = qp(
            DMatrix::identity(2, 2),
            DVector::zeros(2),
            DMatrix::from_row_slice(1, 2, &[1.0, 0.0]),
            DVector::zeros(1),
        );
        let bad = DVector::zeros(3);
        assert!(matches!(p.eval_objective(&bad), Err(Error::DimensionMismatch { .. })));
        assert!(matches!(p.eval_gradient(&bad), Err(Error::DimensionMismatch { .. })));
        assert!(p.kkt_residual(&DVector::zeros(2), &DVector::zeros(2)).is_err());
    }

    #[test]
    fn kkt_residual_examples() {
        let p = qp(
            DMatrix::identity(2, 2),
            DVector::zeros(2),
            DMatrix::from_row_slice(1, 2, &[1.0, 0.0]),
            DVector::zeros(1),
        );
        let lam = DVector::zeros(1);
        assert_eq!(p.kkt_residual(&DVector::zeros(2), &lam).unwrap(), (0.0, 0.0));
        assert_eq!(
            p.kkt_residual(&DVector::from_vec(vec![1.0, 0.0]), &lam).unwrap(),
            (1.0, 1.0)
        );
    }

    #[test]
    fn oracle_on_hand_solved_system() {
        // x + λ(1,1) = 0, x1 + x2 = 2  =>  x = (1,1), λ = -1
        let p = qp(
            DMatrix::identity(2, 2),
            DVector::zeros(2),
            DMatrix::from_row_slice(1, 2, &[1.0, 1.0]),
            DVector::from_vec(vec![2.0]),
        );
        let kkt = solve_kkt_oracle(&p).unwrap();
        assert_relative_eq!(kkt.x_star[0], 1.0, epsilon = 1e-12);
        assert_relative_eq!(kkt.x_star[1], 1.0, epsilon = 1e-12);
        assert_relative_eq!(kkt.lambda_star[0], -1.0, epsilon = 1e-12);
    }

    #[test]
    fn oracle_with_zero_rhs_returns_origin() {
        let p = qp(
            DMatrix::identity(3, 3),
            DVector::zeros(3),
            DMatrix::from_row_slice(2, 3, &[1.0, 2.0, 0.0, 0.0, 1.0, -1.0]),
            DVector::zeros(2),
        );
        let kkt = solve_kkt_oracle(&p).unwrap();
        assert!(kkt.x_star.amax() < 1e-14);
        assert!(kkt.lambda_star.amax() < 1e-14);
    }

    #[test]
    fn oracle_rejects_inconsistent_duplicate_rows() {
        let p = qp(
            DMatrix::identity(2, 2),
            DVector::zeros(2),
            DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]),
            DVector::from_vec(vec![1.0, 2.0]),
        );
        assert!(matches!(solve_kkt_oracle(&p), Err(Error::Infeasible(_))));
    }

    #[test]
    fn oracle_rejects_singular_system() {
        // consistent duplicated rows: feasible but A is rank deficient
        let p = qp(
            DMatrix::identity(2, 2),
            DVector::zeros(2),
            DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]),
            DVector::from_vec(vec![1.0, 1.0]),
        );
        assert!(matches!(solve_kkt_oracle(&p), Err(Error::Degenerate(_))));
    }

    #[test]
    fn gradient_check_flags_corrupted_gradient() {
        #[derive(Debug)]
        struct Corrupt(QuadraticObjective);
        impl Objective for Corrupt {
            fn dim(&self) -> usize {
                self.0.dim()
            }
            fn value(&self, x: &[f64]) -> f64 {
                self.0.value(x)
            }
            fn gradient(&self, x: &[f64], grad: &mut [f64]) {
                self.0.gradient(x, grad);
                grad[1] += 0.1;
            }
        }
        let q = QuadraticObjective::new(DMatrix::identity(3, 3), DVector::zeros(3)).unwrap();
        let x = DVector::from_vec(vec![0.3, -0.2, 0.5]);
        let clean = ProblemInstance::new(Arc::new(q.clone()), DMatrix::zeros(1, 3), DVector::zeros(1)).unwrap();
        assert!(clean.gradient_check(&x, 1e-6).unwrap() < 1e-6);
        let bad = ProblemInstance::new(Arc::new(Corrupt(q)), DMatrix::zeros(1, 3), DVector::zeros(1)).unwrap();
        assert!(bad.gradient_check(&x, 1e-6).unwrap() >= 0.05);
        assert!(bad.gradient_check(&x, 0.0).is_err());
    }

    #[test]
    fn quadratic_rejects_asymmetric_and_indefinite() {
        let asym = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.0, 1.0]);
        assert!(QuadraticObjective::new(asym, DVector::zeros(2)).is_err());
        let indef = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
        assert!(QuadraticObjective::new(indef, DVector::zeros(2)).is_err());
    }

    #[test]
    fn bb_minimizer_finds_quadratic_minimum() {
        let q = QuadraticObjective::new(
            DMatrix::from_row_slice(2, 2, &[3.0, 1.0, 1.0, 2.0]),
            DVector::from_vec(vec![-1.0, 4.0]),
        )
        .unwrap();
        let x = minimize_smooth(|x| q.value(x), |x, g| q.gradient(x, g), &[0.0, 0.0], 1e-12, 10_000).unwrap();
        // Qx = -c
        assert_relative_eq!(3.0 * x[0] + x[1], 1.0, epsilon = 1e-10);
        assert_relative_eq!(x[0] + 2.0 * x[1], -4.0, epsilon = 1e-10);
    }
}
