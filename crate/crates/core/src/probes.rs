//! Probe (arm) construction, graph Fourier transforms and the two sensing
//! cost models.
//!
//! A probe of width `w` anchored at node `i` places weight `1/w` on `i`
//! and on its `w - 1` incident neighbors of largest edge weight (ties
//! broken by ascending node index). Width 1 recovers the plain node
//! action `e_i`.

use nalgebra::DVector;

use crate::graph::{Graph, Spectrum};
use crate::{Error, Result};

/// Uniform-weight signal over a node and part of its neighborhood.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Probe {
    anchor: usize,
    /// Support node indices, sorted ascending; always contains `anchor`.
    support: Vec<usize>,
}

impl Probe {
    pub fn anchor(&self) -> usize {
        self.anchor
    }

    pub fn width(&self) -> usize {
        self.support.len()
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    /// Per-support-node weight `1/w`.
    pub fn weight(&self) -> f64 {
        1.0 / self.width() as f64
    }

    /// Dense signal vector of length `n`.
    pub fn to_dense(&self, n: usize) -> DVector<f64> {
        let mut s = DVector::zeros(n);
        let w = self.weight();
        for &i in &self.support {
            s[i] = w;
        }
        s
    }
}

/// Builds the width-`w` probe anchored at `anchor`: the anchor plus its
/// `w - 1` incident neighbors of largest edge weight, ties broken by
/// ascending node index.
pub fn build_probe(graph: &Graph, anchor: usize, width: usize) -> Result<Probe> {
    let max = graph.degree(anchor) + 1;
    if width < 1 || width > max {
        return Err(Error::InvalidProbeWidth {
            anchor,
            width,
            max,
        });
    }
    let mut neighbors: Vec<(usize, f64)> = graph.neighbors(anchor).to_vec();
    neighbors.sort_by(|a, b| {
        b.1.partial_cmp(&a.1)
            .expect("finite weights")
            .then(a.0.cmp(&b.0))
    });
    let mut support: Vec<usize> = neighbors[..width - 1].iter().map(|&(n, _)| n).collect();
    support.push(anchor);
    support.sort_unstable();
    Ok(Probe { anchor, support })
}

/// The width-`w` probe set: one probe per node, in node order. Callers
/// must pass a width feasible at every node (at most min degree + 1).
pub fn probe_set(graph: &Graph, width: usize) -> Result<Vec<Probe>> {
    (0..graph.num_nodes())
        .map(|anchor| build_probe(graph, anchor, width))
        .collect()
}

/// Graph Fourier transform coefficients `s̃ = Q's` of a probe.
#[derive(Debug, Clone, PartialEq)]
pub struct GftVector {
    coefficients: DVector<f64>,
}

impl GftVector {
    pub fn coefficients(&self) -> &DVector<f64> {
        &self.coefficients
    }

    pub fn into_vector(self) -> DVector<f64> {
        self.coefficients
    }
}

/// Projects a probe onto the Laplacian eigenbasis. Exploits the uniform
/// support: `s̃` is the mean of the support rows of `Q`.
pub fn gft(spectrum: &Spectrum, probe: &Probe) -> GftVector {
    let n = spectrum.len();
    let q = spectrum.q();
    let scale = probe.weight();
    let mut coefficients = DVector::zeros(n);
    for &node in probe.support() {
        for k in 0..n {
            coefficients[k] += scale * q[(node, k)];
        }
    }
    GftVector { coefficients }
}

/// Width-only sensing cost of a width-`w` probe on an `n`-node graph:
/// `(w-1)/w² · (1 - 1/n) + 1/w²`. Equals 1 at `w = 1` and strictly
/// decreases in `w`.
pub fn cost_closed_form(width: usize, num_nodes: usize) -> f64 {
    assert!(
        width >= 1 && width <= num_nodes,
        "width must be in 1..=num_nodes"
    );
    let w = width as f64;
    let n = num_nodes as f64;
    (w - 1.0) / (w * w) * (1.0 - 1.0 / n) + 1.0 / (w * w)
}

/// Laplacian quadratic-form sensing cost `Σ_{i~j} w_ij (s_i - s_j)²`,
/// computed as the sum over edges.
pub fn cost_quadratic(graph: &Graph, probe: &Probe) -> f64 {
    let s = probe.to_dense(graph.num_nodes());
    graph
        .edges()
        .iter()
        .map(|&(i, j, w)| {
            let d = s[i] - s[j];
            w * d * d
        })
        .sum()
}

/// Spectral form of the quadratic cost, `Σ λ_i s̃_i²`. Agrees with
/// [`cost_quadratic`] up to floating-point error.
pub fn cost_quadratic_spectral(spectrum: &Spectrum, probe: &Probe) -> f64 {
    let coeffs = gft(spectrum, probe);
    coeffs
        .coefficients()
        .iter()
        .zip(spectrum.eigenvalues().iter())
        .map(|(c, l)| l * c * c)
        .sum()
}

/// GFT coefficients of a probe set, one probe per column.
pub fn gft_matrix(spectrum: &Spectrum, probes: &[Probe]) -> nalgebra::DMatrix<f64> {
    let n = spectrum.len();
    let mut m = nalgebra::DMatrix::zeros(n, probes.len());
    for (col, probe) in probes.iter().enumerate() {
        let coeffs = gft(spectrum, probe);
        m.set_column(col, coeffs.coefficients());
    }
    m
}

/// Dense node-basis signals of a probe set, one probe per column.
pub fn dense_matrix(probes: &[Probe], n: usize) -> nalgebra::DMatrix<f64> {
    let mut m = nalgebra::DMatrix::zeros(n, probes.len());
    for (col, probe) in probes.iter().enumerate() {
        m.set_column(col, &probe.to_dense(n));
    }
    m
}
