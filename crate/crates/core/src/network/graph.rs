//! Weighted undirected graphs and their Laplacians.

use std::collections::{BTreeMap, VecDeque};

use nalgebra::DMatrix;
use rand::Rng;

use crate::error::{Error, Result};

/// Weighted undirected graph on nodes `0..n`.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphTopology {
    n: usize,
    /// Each undirected edge once, with `i < j`.
    edges: Vec<(usize, usize, f64)>,
    neighbors: Vec<Vec<(usize, f64)>>,
}

impl GraphTopology {
    /// Builds a graph from an edge list. A pair may appear in both orientations
    /// only if the two weights agree.
    pub fn new(n: usize, edges: &[(usize, usize, f64)]) -> Result<Self> {
        if n == 0 {
            return Err(Error::Graph("graph needs at least one node".into()));
        }
        let mut unique: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        for &(i, j, w) in edges {
            if i >= n || j >= n {
                return Err(Error::Graph(format!("edge ({i}, {j}) out of range for {n} nodes")));
            }
            if i == j {
                return Err(Error::Graph(format!("self-loop at node {i}")));
            }
            if !(w > 0.0 && w.is_finite()) {
                return Err(Error::Graph(format!("edge ({i}, {j}) has nonpositive weight {w}")));
            }
            let key = (i.min(j), i.max(j));
            match unique.get(&key) {
                Some(&prev) if prev != w => {
                    return Err(Error::Graph(format!(
                        "asymmetric weights for edge ({i}, {j}): {prev} vs {w}"
                    )))
                }
                _ => {
                    unique.insert(key, w);
                }
            }
        }
        let edges: Vec<(usize, usize, f64)> = unique.into_iter().map(|((i, j), w)| (i, j, w)).collect();
        let mut neighbors = vec![Vec::new(); n];
        for &(i, j, w) in &edges {
            neighbors[i].push((j, w));
            neighbors[j].push((i, w));
        }
        for list in &mut neighbors {
            list.sort_by_key(|&(j, _)| j);
        }
        Ok(Self { n, edges, neighbors })
    }

    pub fn path(n: usize) -> Result<Self> {
        let edges: Vec<_> = (1..n).map(|i| (i - 1, i, 1.0)).collect();
        Self::new(n, &edges)
    }

    pub fn ring(n: usize) -> Result<Self> {
        if n < 3 {
            return Self::path(n);
        }
        let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n, 1.0)).collect();
        Self::new(n, &edges)
    }

    /// Unit-weight Erdős–Rényi graph, resampled until connected.
    pub fn erdos_renyi_connected<R: Rng>(n: usize, p: f64, rng: &mut R) -> Result<Self> {
        const MAX_TRIES: usize = 10_000;
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Graph(format!("edge probability {p} outside [0, 1]")));
        }
        for _ in 0..MAX_TRIES {
            let mut edges = Vec::new();
            for i in 0..n {
                for j in i + 1..n {
                    if rng.gen::<f64>() < p {
                        edges.push((i, j, 1.0));
                    }
                }
            }
            let g = Self::new(n, &edges)?;
            if g.is_connected() {
                return Ok(g);
            }
        }
        Err(Error::Graph(format!(
            "no connected G({n}, {p}) sample in {MAX_TRIES} attempts"
        )))
    }

    /// Parses `i j weight` lines (0-indexed). Blank lines and `#` comments are skipped.
    /// The node count is `n` when given, else one more than the largest index.
    pub fn parse_edge_list(text: &str, n: Option<usize>) -> Result<Self> {
        let mut edges = Vec::new();
        let mut max_idx = 0usize;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            let bad = || Error::Graph(format!("line {}: expected `i j weight`, got `{raw}`", lineno + 1));
            if fields.len() != 3 {
                return Err(bad());
            }
            let i: usize = fields[0].parse().map_err(|_| bad())?;
            let j: usize = fields[1].parse().map_err(|_| bad())?;
            let w: f64 = fields[2].parse().map_err(|_| bad())?;
            max_idx = max_idx.max(i).max(j);
            edges.push((i, j, w));
        }
        let n = n.unwrap_or(if edges.is_empty() { 0 } else { max_idx + 1 });
        Self::new(n, &edges)
    }

    pub fn to_edge_list(&self) -> String {
        self.edges.iter().map(|(i, j, w)| format!("{i} {j} {w}\n")).collect()
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(usize, usize, f64)] {
        &self.edges
    }

    /// Neighbors of `i` with their weights, sorted by index.
    pub fn neighbors(&self, i: usize) -> &[(usize, f64)] {
        &self.neighbors[i]
    }

    pub fn degree(&self, i: usize) -> f64 {
        self.neighbors[i].iter().map(|&(_, w)| w).sum()
    }

    pub fn is_connected(&self) -> bool {
        let mut seen = vec![false; self.n];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        let mut count = 1;
        while let Some(i) = queue.pop_front() {
            for &(j, _) in &self.neighbors[i] {
                if !seen[j] {
                    seen[j] = true;
                    count += 1;
                    queue.push_back(j);
                }
            }
        }
        count == self.n
    }

    /// Second-smallest Laplacian eigenvalue (0 for a single node).
    pub fn algebraic_connectivity(&self) -> f64 {
        if self.n < 2 {
            return 0.0;
        }
        let mut eig: Vec<f64> = build_laplacian(self).symmetric_eigenvalues().iter().copied().collect();
        eig.sort_by(f64::total_cmp);
        eig[1]
    }

    /// Largest Laplacian eigenvalue.
    pub fn spectral_radius(&self) -> f64 {
        build_laplacian(self).symmetric_eigenvalues().max()
    }

    /// `out_i = Σ_j a_ij (x_i − x_j)` on blocks of size `block`, i.e. `(L ⊗ I) x`.
    pub fn laplacian_apply(&self, x: &[f64], block: usize, out: &mut [f64]) {
        for i in 0..self.n {
            self.laplacian_apply_node(i, x, block, &mut out[i * block..(i + 1) * block]);
        }
    }

    /// Row block `i` of `(L ⊗ I) x`; reads only node `i` and its neighbors.
    #[inline]
    pub fn laplacian_apply_node(&self, i: usize, x: &[f64], block: usize, out: &mut [f64]) {
        out.iter_mut().for_each(|o| *o = 0.0);
        let xi = &x[i * block..(i + 1) * block];
        for &(j, w) in &self.neighbors[i] {
            let xj = &x[j * block..(j + 1) * block];
            for k in 0..block {
                out[k] += w * (xi[k] - xj[k]);
            }
        }
    }

    /// `xᵀ (L ⊗ I) x`.
    pub fn laplacian_quadratic(&self, x: &[f64], block: usize) -> f64 {
        let mut lx = vec![0.0; x.len()];
        self.laplacian_apply(x, block, &mut lx);
        x.iter().zip(&lx).map(|(a, b)| a * b).sum::<f64>().max(0.0)
    }
}

/// `L = D − A`.
pub fn build_laplacian(g: &GraphTopology) -> DMatrix<f64> {
    let mut l = DMatrix::zeros(g.n, g.n);
    for &(i, j, w) in &g.edges {
        l[(i, j)] -= w;
        l[(j, i)] -= w;
        l[(i, i)] += w;
        l[(j, j)] += w;
    }
    l
}
