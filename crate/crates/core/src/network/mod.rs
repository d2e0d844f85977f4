//! Multi-agent problems over undirected graphs.
//!
//! Agent states are stacked block by block: agent `i` owns the slice
//! `[i * block, (i + 1) * block)` of every stacked vector.

pub mod consensus;
pub mod graph;
pub mod monotropic;

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::convex::Objective;
use crate::error::{Error, Result};

pub use consensus::{ConsensusField, ConsensusProblem, ConsensusSolution};
pub use graph::{build_laplacian, GraphTopology};
pub use monotropic::{MonotropicField, MonotropicProblem, MonotropicSolution, MonotropicState};

/// `Σᵢ fᵢ(xᵢ)` over consecutive blocks, followed by `padding` coordinates the
/// function does not depend on.
#[derive(Debug, Clone)]
pub struct SeparableObjective {
    blocks: Vec<Arc<dyn Objective>>,
    offsets: Vec<usize>,
    padding: usize,
}

impl SeparableObjective {
    pub fn new(blocks: Vec<Arc<dyn Objective>>, padding: usize) -> Self {
        let mut offsets = Vec::with_capacity(blocks.len() + 1);
        let mut acc = 0;
        for b in &blocks {
            offsets.push(acc);
            acc += b.dim();
        }
        offsets.push(acc);
        Self {
            blocks,
            offsets,
            padding,
        }
    }
}

impl Objective for SeparableObjective {
    fn dim(&self) -> usize {
        self.offsets[self.blocks.len()] + self.padding
    }

    fn value(&self, x: &[f64]) -> f64 {
        self.blocks
            .iter()
            .enumerate()
            .map(|(i, f)| f.value(&x[self.offsets[i]..self.offsets[i + 1]]))
            .sum()
    }

    fn gradient(&self, x: &[f64], grad: &mut [f64]) {
        for (i, f) in self.blocks.iter().enumerate() {
            let r = self.offsets[i]..self.offsets[i + 1];
            f.gradient(&x[r.clone()], &mut grad[r]);
        }
        let end = self.offsets[self.blocks.len()];
        grad[end..].iter_mut().for_each(|g| *g = 0.0);
    }
}

/// `A ⊗ I_k`.
pub fn kron_identity(a: &DMatrix<f64>, k: usize) -> DMatrix<f64> {
    a.kronecker(&DMatrix::identity(k, k))
}

/// Applies `(L⁺ ⊗ I_block)` to `v`, the minimum-norm solution of
/// `(L ⊗ I) u = v` when `v` is orthogonal to the kernel.
pub(crate) fn laplacian_pinv_apply(g: &GraphTopology, v: &DVector<f64>, block: usize) -> Result<DVector<f64>> {
    let n = g.node_count();
    let pinv = build_laplacian(g)
        .pseudo_inverse(1e-10)
        .map_err(|e| Error::Graph(e.to_string()))?;
    let mut out = DVector::zeros(n * block);
    for i in 0..n {
        for j in 0..n {
            let w = pinv[(i, j)];
            if w != 0.0 {
                for k in 0..block {
                    out[i * block + k] += w * v[j * block + k];
                }
            }
        }
    }
    Ok(out)
}

pub(crate) fn validate_alphas(alphas: &[f64], n: usize) -> Result<()> {
    if alphas.len() != n {
        return Err(Error::DimensionMismatch {
            what: "per-agent alphas",
            expected: n,
            got: alphas.len(),
        });
    }
    if let Some(a) = alphas.iter().find(|&&a| !(a > 3.0 && a.is_finite())) {
        return Err(Error::InvalidArgument(format!(
            "every agent damping alpha must exceed 3, got {a}"
        )));
    }
    Ok(())
}
