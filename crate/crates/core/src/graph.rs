//! Weighted undirected graphs, random-graph generators, Laplacian spectral
//! decomposition and the effective dimension.
//!
//! The Laplacian is the unnormalized `L = D - W` where `W` is the edge
//! weight matrix and `D` the diagonal of weighted degrees. Eigenvectors are
//! returned with a fixed sign convention (first entry of magnitude above
//! 1e-9 is positive) so that downstream trajectories are reproducible.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::{Error, Result};

/// Eigenvalues with absolute value at or below this are treated as zero
/// when counting connected components.
pub const ZERO_EIGENVALUE_TOL: f64 = 1e-8;

/// Weighted undirected graph with no self-loops and no duplicate edges.
#[derive(Debug, Clone)]
pub struct Graph {
    num_nodes: usize,
    /// Canonical edge list: `i < j`, sorted lexicographically.
    edges: Vec<(usize, usize, f64)>,
    /// Per-node incident `(neighbor, weight)` pairs, sorted by neighbor.
    adjacency: Vec<Vec<(usize, f64)>>,
    /// Per-node count of incident edges.
    degrees: Vec<usize>,
    /// Maximum degree.
    kappa: usize,
}

impl Graph {
    /// Builds a graph from an explicit edge list.
    ///
    /// Rejects self-loops, duplicate pairs (in either orientation),
    /// out-of-range endpoints and non-positive weights.
    pub fn from_edge_list(num_nodes: usize, edges: &[(usize, usize, f64)]) -> Result<Self> {
        if num_nodes == 0 {
            return Err(Error::InvalidGraph("graph must have at least one node".into()));
        }
        let mut seen = HashSet::with_capacity(edges.len());
        let mut canonical = Vec::with_capacity(edges.len());
        for &(i, j, w) in edges {
            if i >= num_nodes || j >= num_nodes {
                return Err(Error::InvalidGraph(format!(
                    "edge ({i}, {j}) out of range for {num_nodes} nodes"
                )));
            }
            if i == j {
                return Err(Error::InvalidGraph(format!("self-loop at node {i}")));
            }
            if !(w > 0.0) || !w.is_finite() {
                return Err(Error::InvalidGraph(format!(
                    "edge ({i}, {j}) has non-positive weight {w}"
                )));
            }
            let key = (i.min(j), i.max(j));
            if !seen.insert(key) {
                return Err(Error::InvalidGraph(format!(
                    "duplicate edge ({}, {})",
                    key.0, key.1
                )));
            }
            canonical.push((key.0, key.1, w));
        }
        canonical.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));

        let mut adjacency = vec![Vec::new(); num_nodes];
        for &(i, j, w) in &canonical {
            adjacency[i].push((j, w));
            adjacency[j].push((i, w));
        }
        for list in &mut adjacency {
            list.sort_by_key(|&(n, _)| n);
        }
        let degrees: Vec<usize> = adjacency.iter().map(Vec::len).collect();
        let kappa = degrees.iter().copied().max().unwrap_or(0);
        Ok(Graph {
            num_nodes,
            edges: canonical,
            adjacency,
            degrees,
            kappa,
        })
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    /// Canonical `(i, j, weight)` list with `i < j`.
    pub fn edges(&self) -> &[(usize, usize, f64)] {
        &self.edges
    }

    /// Incident `(neighbor, weight)` pairs of `node`, sorted by neighbor.
    pub fn neighbors(&self, node: usize) -> &[(usize, f64)] {
        &self.adjacency[node]
    }

    pub fn degree(&self, node: usize) -> usize {
        self.degrees[node]
    }

    pub fn degrees(&self) -> &[usize] {
        &self.degrees
    }

    /// Maximum degree κ.
    pub fn kappa(&self) -> usize {
        self.kappa
    }

    pub fn min_degree(&self) -> usize {
        self.degrees.iter().copied().min().unwrap_or(0)
    }

    /// Dense unnormalized Laplacian `L = D - W` with weighted degrees.
    pub fn laplacian(&self) -> DMatrix<f64> {
        let n = self.num_nodes;
        let mut l = DMatrix::zeros(n, n);
        for &(i, j, w) in &self.edges {
            l[(i, j)] = -w;
            l[(j, i)] = -w;
            l[(i, i)] += w;
            l[(j, j)] += w;
        }
        l
    }

    /// Eigendecomposition of the Laplacian with ascending eigenvalues and
    /// the deterministic sign convention.
    pub fn spectral_decomposition(&self) -> Result<Spectrum> {
        let n = self.num_nodes;
        let eigen = self
            .laplacian()
            .try_symmetric_eigen(f64::EPSILON, 0)
            .ok_or_else(|| Error::Numeric("Laplacian eigensolver did not converge".into()))?;
        if eigen.eigenvalues.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numeric("eigensolver produced non-finite eigenvalues".into()));
        }

        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| {
            eigen.eigenvalues[a]
                .partial_cmp(&eigen.eigenvalues[b])
                .expect("finite eigenvalues")
        });

        let mut eigenvalues = DVector::zeros(n);
        let mut q = DMatrix::zeros(n, n);
        for (new_col, &old_col) in order.iter().enumerate() {
            eigenvalues[new_col] = eigen.eigenvalues[old_col];
            let col = eigen.eigenvectors.column(old_col);
            let flip = col
                .iter()
                .find(|x| x.abs() > 1e-9)
                .map_or(false, |x| *x < 0.0);
            for row in 0..n {
                q[(row, new_col)] = if flip { -col[row] } else { col[row] };
            }
        }
        Ok(Spectrum { eigenvalues, q })
    }

    /// Number of connected components, by union-find over the edge list.
    pub fn connected_components(&self) -> usize {
        let mut dsu = DisjointSets::new(self.num_nodes);
        for &(i, j, _) in &self.edges {
            dsu.union(i, j);
        }
        dsu.count()
    }

    /// Serializes to the plain-text edge-list format: first line `N`, then
    /// one `i j w` line per edge. Lines starting with `#` are comments.
    pub fn to_edge_list_string(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{}", self.num_nodes);
        for &(i, j, w) in &self.edges {
            let _ = writeln!(out, "{i} {j} {w}");
        }
        out
    }

    pub fn write_edge_list(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_edge_list_string()).map_err(|e| Error::io(path, e))
    }

    pub fn parse_edge_list(text: &str, origin: &Path) -> Result<Self> {
        let mut num_nodes = None;
        let mut edges = Vec::new();
        for (line_no, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let parse = |tok: &str, what: &str| {
                tok.parse::<f64>().map_err(|_| Error::Parse {
                    path: origin.to_path_buf(),
                    line: line_no + 1,
                    message: format!("expected {what}, got `{tok}`"),
                })
            };
            if num_nodes.is_none() {
                let n = line.parse::<usize>().map_err(|_| Error::Parse {
                    path: origin.to_path_buf(),
                    line: line_no + 1,
                    message: format!("expected node count, got `{line}`"),
                })?;
                num_nodes = Some(n);
                continue;
            }
            let toks: Vec<&str> = line.split_whitespace().collect();
            if toks.len() != 3 {
                return Err(Error::Parse {
                    path: origin.to_path_buf(),
                    line: line_no + 1,
                    message: format!("expected `i j w`, got `{line}`"),
                });
            }
            let i = parse(toks[0], "node index")? as usize;
            let j = parse(toks[1], "node index")? as usize;
            let w = parse(toks[2], "weight")?;
            edges.push((i, j, w));
        }
        let n = num_nodes.ok_or_else(|| Error::Parse {
            path: origin.to_path_buf(),
            line: 0,
            message: "missing node-count line".into(),
        })?;
        Graph::from_edge_list(n, &edges)
    }

    pub fn read_edge_list(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Graph::parse_edge_list(&text, path)
    }
}

/// Eigendecomposition of a Laplacian: ascending eigenvalues and the
/// orthonormal eigenvector matrix `Q` (eigenvectors in columns).
#[derive(Debug, Clone)]
pub struct Spectrum {
    eigenvalues: DVector<f64>,
    q: DMatrix<f64>,
}

impl Spectrum {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn eigenvalues(&self) -> &DVector<f64> {
        &self.eigenvalues
    }

    pub fn eigenvalue(&self, i: usize) -> f64 {
        self.eigenvalues[i]
    }

    pub fn q(&self) -> &DMatrix<f64> {
        &self.q
    }

    /// Count of eigenvalues within [`ZERO_EIGENVALUE_TOL`] of zero; equals
    /// the number of connected components.
    pub fn zero_eigenvalue_multiplicity(&self) -> usize {
        self.eigenvalues
            .iter()
            .filter(|v| v.abs() <= ZERO_EIGENVALUE_TOL)
            .count()
    }

    /// Max absolute entry deviation of `Q'Q` from the identity.
    pub fn orthonormality_deviation(&self) -> f64 {
        let n = self.len();
        let gram = self.q.transpose() * &self.q;
        let mut dev: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let target = if i == j { 1.0 } else { 0.0 };
                dev = dev.max((gram[(i, j)] - target).abs());
            }
        }
        dev
    }

    /// Max absolute entry deviation of `Q diag(λ) Q'` from the Laplacian.
    pub fn reconstruction_deviation(&self, graph: &Graph) -> f64 {
        let l = graph.laplacian();
        let rebuilt = &self.q * DMatrix::from_diagonal(&self.eigenvalues) * self.q.transpose();
        (rebuilt - l).abs().max()
    }

    /// Attaches the regularization shift λ, yielding `Λ = Λ_L + λI`.
    pub fn shifted(&self, shift: f64) -> Result<ShiftedSpectrum> {
        ShiftedSpectrum::new(self.clone(), shift)
    }

    pub fn into_shifted(self, shift: f64) -> Result<ShiftedSpectrum> {
        ShiftedSpectrum::new(self, shift)
    }
}

/// A [`Spectrum`] together with a positive regularization shift.
#[derive(Debug, Clone)]
pub struct ShiftedSpectrum {
    base: Spectrum,
    shift: f64,
}

impl ShiftedSpectrum {
    pub fn new(base: Spectrum, shift: f64) -> Result<Self> {
        if !(shift > 0.0) || !shift.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "regularization shift must be positive, got {shift}"
            )));
        }
        Ok(ShiftedSpectrum { base, shift })
    }

    pub fn base(&self) -> &Spectrum {
        &self.base
    }

    pub fn shift(&self) -> f64 {
        self.shift
    }

    pub fn len(&self) -> usize {
        self.base.len()
    }

    pub fn is_empty(&self) -> bool {
        self.base.is_empty()
    }

    /// i-th (0-based) diagonal entry of `Λ`, i.e. `λ_{i+1} + λ`.
    pub fn shifted_eigenvalue(&self, i: usize) -> f64 {
        self.base.eigenvalue(i) + self.shift
    }

    /// The diagonal of `Λ` as a vector.
    pub fn reg_diagonal(&self) -> DVector<f64> {
        self.base.eigenvalues().add_scalar(self.shift)
    }

    /// Effective dimension for horizon `T` (see [`effective_dimension_from`]).
    pub fn effective_dimension(&self, horizon: usize) -> usize {
        let shifted: Vec<f64> = (0..self.len()).map(|i| self.shifted_eigenvalue(i)).collect();
        effective_dimension_from(&shifted, self.shift, horizon)
    }
}

/// Largest `d` in `1..=N` with `(d-1)·λ_d ≤ T / ln(1 + T/λ)`, where `λ_d`
/// is the d-th smallest diagonal entry of `Λ` (1-indexed) and `λ` the
/// regularization shift. Logarithms are natural.
pub fn effective_dimension_from(shifted_ascending: &[f64], shift: f64, horizon: usize) -> usize {
    assert!(horizon >= 1, "horizon must be at least 1");
    assert!(shift > 0.0, "shift must be positive");
    let t = horizon as f64;
    let threshold = t / (1.0 + t / shift).ln();
    let mut best = 1;
    for d in 1..=shifted_ascending.len() {
        if (d as f64 - 1.0) * shifted_ascending[d - 1] <= threshold {
            best = d;
        }
    }
    best
}

/// Erdős–Rényi graph: each unordered pair is an edge independently with
/// probability `p`; weights are uniform on (0, 1].
pub fn generate_er(num_nodes: usize, p: f64, seed: u64) -> Graph {
    assert!((0.0..=1.0).contains(&p), "edge probability must be in [0, 1]");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for i in 0..num_nodes {
        for j in (i + 1)..num_nodes {
            if rng.random::<f64>() < p {
                let w = 1.0 - rng.random::<f64>();
                edges.push((i, j, w));
            }
        }
    }
    Graph::from_edge_list(num_nodes, &edges).expect("generated edges are valid")
}

/// Barabási–Albert preferential attachment: a seed clique on `m + 1`
/// nodes, then each new node attaches `m` edges to distinct existing
/// nodes sampled proportionally to degree. Weights are uniform on (0, 1].
pub fn generate_ba(num_nodes: usize, m: usize, seed: u64) -> Graph {
    assert!(m >= 1 && m < num_nodes, "need 1 <= m < num_nodes");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges: Vec<(usize, usize, f64)> = Vec::new();
    let mut degrees = vec![0usize; num_nodes];
    let add_edge = |edges: &mut Vec<(usize, usize, f64)>,
                        degrees: &mut Vec<usize>,
                        rng: &mut ChaCha8Rng,
                        i: usize,
                        j: usize| {
        let w = 1.0 - rng.random::<f64>();
        edges.push((i, j, w));
        degrees[i] += 1;
        degrees[j] += 1;
    };

    for i in 0..=m {
        for j in (i + 1)..=m {
            add_edge(&mut edges, &mut degrees, &mut rng, i, j);
        }
    }
    for v in (m + 1)..num_nodes {
        // Degree-proportional sampling without replacement among 0..v.
        let mut weights: Vec<f64> = degrees[..v].iter().map(|&d| d as f64).collect();
        let mut total: f64 = weights.iter().sum();
        for _ in 0..m {
            let mut x = rng.random::<f64>() * total;
            let mut chosen = v - 1;
            for (idx, w) in weights.iter().enumerate() {
                if *w <= 0.0 {
                    continue;
                }
                if x < *w {
                    chosen = idx;
                    break;
                }
                x -= *w;
            }
            total -= weights[chosen];
            weights[chosen] = 0.0;
            add_edge(&mut edges, &mut degrees, &mut rng, chosen, v);
        }
    }
    Graph::from_edge_list(num_nodes, &edges).expect("generated edges are valid")
}

/// Stochastic block model: intra-block pairs connect with probability
/// `p_in`, inter-block with `p_out`. Edges carry unit weight.
pub fn generate_sbm(block_sizes: &[usize], p_in: f64, p_out: f64, seed: u64) -> Graph {
    assert!((0.0..=1.0).contains(&p_in), "p_in must be in [0, 1]");
    assert!((0.0..=1.0).contains(&p_out), "p_out must be in [0, 1]");
    let num_nodes: usize = block_sizes.iter().sum();
    assert!(num_nodes > 0, "block sizes must sum to a positive node count");
    let mut block_of = Vec::with_capacity(num_nodes);
    for (b, &size) in block_sizes.iter().enumerate() {
        block_of.extend(std::iter::repeat(b).take(size));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for i in 0..num_nodes {
        for j in (i + 1)..num_nodes {
            let p = if block_of[i] == block_of[j] { p_in } else { p_out };
            if rng.random::<f64>() < p {
                edges.push((i, j, 1.0));
            }
        }
    }
    Graph::from_edge_list(num_nodes, &edges).expect("generated edges are valid")
}

struct DisjointSets {
    parent: Vec<usize>,
    count: usize,
}

impl DisjointSets {
    fn new(n: usize) -> Self {
        DisjointSets {
            parent: (0..n).collect(),
            count: n,
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let ra = self.find(a);
        let rb = self.find(b);
        if ra != rb {
            self.parent[ra] = rb;
            self.count -= 1;
        }
    }

    fn count(&self) -> usize {
        self.count
    }
}

/// Complete graph on `n` nodes with unit weights.
pub fn complete_graph(n: usize) -> Graph {
    let mut edges = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            edges.push((i, j, 1.0));
        }
    }
    Graph::from_edge_list(n, &edges).expect("complete graph is valid")
}
