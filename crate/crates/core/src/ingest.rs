//! Labeled feature vectors → normalized features → k-means clusters →
//! per-cluster rewards → kNN graph.
//!
//! The pipeline turns a point cloud with categorical labels into a
//! (graph, reward) pair for the harness: cluster centers become nodes,
//! the reward of a node is the fraction of its samples carrying the
//! target label, and nodes are connected to their nearest neighbors with
//! unit weights.

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::graph::Graph;
use crate::{Error, Result};

/// Labeled feature vectors of uniform dimension.
#[derive(Debug, Clone)]
pub struct PointSet {
    points: Vec<Vec<f64>>,
    labels: Vec<String>,
}

impl PointSet {
    pub fn new(points: Vec<Vec<f64>>, labels: Vec<String>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidArgument("point set is empty".into()));
        }
        if points.len() != labels.len() {
            return Err(Error::InvalidArgument(format!(
                "{} points but {} labels",
                points.len(),
                labels.len()
            )));
        }
        let dim = points[0].len();
        if dim == 0 || points.iter().any(|p| p.len() != dim) {
            return Err(Error::InvalidArgument(
                "points must share one positive dimension".into(),
            ));
        }
        Ok(PointSet { points, labels })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.points[0].len()
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Rescales every coordinate to [0, 1] by its min/max; constant
    /// coordinates map to 0.
    pub fn normalized(&self) -> PointSet {
        let dim = self.dim();
        let mut lo = vec![f64::INFINITY; dim];
        let mut hi = vec![f64::NEG_INFINITY; dim];
        for p in &self.points {
            for (d, v) in p.iter().enumerate() {
                lo[d] = lo[d].min(*v);
                hi[d] = hi[d].max(*v);
            }
        }
        let points = self
            .points
            .iter()
            .map(|p| {
                p.iter()
                    .enumerate()
                    .map(|(d, v)| {
                        let span = hi[d] - lo[d];
                        if span > 0.0 {
                            (v - lo[d]) / span
                        } else {
                            0.0
                        }
                    })
                    .collect()
            })
            .collect();
        PointSet {
            points,
            labels: self.labels.clone(),
        }
    }
}

fn dist_sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// k-means output: per-point assignment, `k` centers and the inertia
/// trace across Lloyd iterations.
#[derive(Debug, Clone)]
pub struct Clustering {
    pub assignment: Vec<usize>,
    pub centers: Vec<Vec<f64>>,
    pub inertia: f64,
    pub inertia_history: Vec<f64>,
}

const KMEANS_MAX_ITER: usize = 100;
const KMEANS_REL_TOL: f64 = 1e-6;

/// Lloyd's algorithm with distance-weighted center seeding. Expects
/// features normalized per coordinate to [0, 1]. Runs at most 100
/// iterations or until the relative inertia change drops below 1e-6;
/// empty clusters are re-seeded from the point farthest from its center
/// (which is then assigned to them), so every cluster ends nonempty.
pub fn cluster(points: &PointSet, k: usize, seed: u64) -> Result<Clustering> {
    let m = points.len();
    if k == 0 || k > m {
        return Err(Error::InvalidArgument(format!(
            "cluster count {k} out of range 1..={m}"
        )));
    }
    let data = points.points();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    // Distance²-weighted seeding.
    let mut centers: Vec<Vec<f64>> = Vec::with_capacity(k);
    centers.push(data[rng.random_range(0..m)].clone());
    let mut best_dist: Vec<f64> = data.iter().map(|p| dist_sq(p, &centers[0])).collect();
    while centers.len() < k {
        let total: f64 = best_dist.iter().sum();
        let next = if total > 0.0 {
            let mut x = rng.random::<f64>() * total;
            let mut chosen = m - 1;
            for (i, w) in best_dist.iter().enumerate() {
                if x < *w {
                    chosen = i;
                    break;
                }
                x -= *w;
            }
            chosen
        } else {
            rng.random_range(0..m)
        };
        centers.push(data[next].clone());
        for (i, p) in data.iter().enumerate() {
            best_dist[i] = best_dist[i].min(dist_sq(p, centers.last().unwrap()));
        }
    }

    let mut assignment = vec![0usize; m];
    let mut inertia_history = Vec::new();
    let mut prev_inertia = f64::INFINITY;
    for _ in 0..KMEANS_MAX_ITER {
        // Assign; ties go to the lowest center index.
        for (i, p) in data.iter().enumerate() {
            let mut best = 0;
            let mut best_d = f64::INFINITY;
            for (c, center) in centers.iter().enumerate() {
                let d = dist_sq(p, center);
                if d < best_d {
                    best = c;
                    best_d = d;
                }
            }
            assignment[i] = best;
        }

        // Re-seed empty clusters from the farthest point.
        let mut counts = vec![0usize; k];
        for &a in &assignment {
            counts[a] += 1;
        }
        for c in 0..k {
            if counts[c] == 0 {
                let farthest = (0..m)
                    .max_by(|&a, &b| {
                        dist_sq(&data[a], &centers[assignment[a]])
                            .partial_cmp(&dist_sq(&data[b], &centers[assignment[b]]))
                            .expect("finite distances")
                    })
                    .expect("nonempty point set");
                counts[assignment[farthest]] -= 1;
                centers[c] = data[farthest].clone();
                assignment[farthest] = c;
                counts[c] = 1;
            }
        }

        let inertia: f64 = (0..m).map(|i| dist_sq(&data[i], &centers[assignment[i]])).sum();
        inertia_history.push(inertia);

        // Update centers.
        let dim = points.dim();
        let mut sums = vec![vec![0.0; dim]; k];
        for (i, p) in data.iter().enumerate() {
            for (d, v) in p.iter().enumerate() {
                sums[assignment[i]][d] += v;
            }
        }
        for c in 0..k {
            for d in 0..dim {
                centers[c][d] = sums[c][d] / counts[c] as f64;
            }
        }

        let converged = prev_inertia.is_finite()
            && (prev_inertia - inertia).abs() <= KMEANS_REL_TOL * prev_inertia.max(f64::MIN_POSITIVE);
        prev_inertia = inertia;
        if converged {
            break;
        }
    }

    let inertia = (0..m).map(|i| dist_sq(&data[i], &centers[assignment[i]])).sum();
    Ok(Clustering {
        assignment,
        centers,
        inertia,
        inertia_history,
    })
}

/// Per-cluster reward: the fraction of samples in each cluster carrying
/// the target label.
pub fn cluster_rewards(
    assignment: &[usize],
    num_clusters: usize,
    labels: &[String],
    target_label: &str,
) -> Result<Vec<f64>> {
    if assignment.len() != labels.len() {
        return Err(Error::InvalidArgument(
            "assignment and labels differ in length".into(),
        ));
    }
    if !labels.iter().any(|l| l == target_label) {
        return Err(Error::InvalidArgument(format!(
            "target label `{target_label}` absent from the label alphabet"
        )));
    }
    let mut hits = vec![0usize; num_clusters];
    let mut sizes = vec![0usize; num_clusters];
    for (a, label) in assignment.iter().zip(labels) {
        sizes[*a] += 1;
        if label == target_label {
            hits[*a] += 1;
        }
    }
    Ok(hits
        .iter()
        .zip(&sizes)
        .map(|(&h, &s)| if s == 0 { 0.0 } else { h as f64 / s as f64 })
        .collect())
}

/// Union-symmetrized k-nearest-neighbor graph over cluster centers with
/// unit edge weights; distance ties break by ascending index.
pub fn knn_graph(centers: &[Vec<f64>], k_nn: usize) -> Result<Graph> {
    let n = centers.len();
    if k_nn == 0 || k_nn >= n {
        return Err(Error::InvalidArgument(format!(
            "k_nn {k_nn} out of range 1..{n}"
        )));
    }
    let mut edge_set = std::collections::BTreeSet::new();
    for i in 0..n {
        let mut candidates: Vec<(f64, usize)> = (0..n)
            .filter(|&j| j != i)
            .map(|j| (dist_sq(&centers[i], &centers[j]), j))
            .collect();
        candidates.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite distances").then(a.1.cmp(&b.1)));
        for &(_, j) in candidates.iter().take(k_nn) {
            edge_set.insert((i.min(j), i.max(j)));
        }
    }
    let edges: Vec<(usize, usize, f64)> = edge_set.into_iter().map(|(i, j)| (i, j, 1.0)).collect();
    Graph::from_edge_list(n, &edges)
}

/// Full pipeline: normalize → cluster → per-cluster rewards → kNN graph.
pub fn ingest_points(
    points: &PointSet,
    num_clusters: usize,
    k_nn: usize,
    target_label: &str,
    seed: u64,
) -> Result<(Graph, DVector<f64>)> {
    let normalized = points.normalized();
    let clustering = cluster(&normalized, num_clusters, seed)?;
    let rewards = cluster_rewards(
        &clustering.assignment,
        num_clusters,
        normalized.labels(),
        target_label,
    )?;
    let graph = knn_graph(&clustering.centers, k_nn)?;
    Ok((graph, DVector::from_vec(rewards)))
}

/// Parses the `f1..fF,label` input CSV.
pub fn parse_points_csv(text: &str, origin: &Path) -> Result<PointSet> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::Parse {
            path: origin.to_path_buf(),
            line: 0,
            message: "empty points file".into(),
        })?;
    let cols: Vec<&str> = header.trim().split(',').collect();
    if cols.len() < 2 || cols.last() != Some(&"label") {
        return Err(Error::Parse {
            path: origin.to_path_buf(),
            line: 1,
            message: "expected header `f1,...,fF,label`".into(),
        });
    }
    let dim = cols.len() - 1;
    for (d, col) in cols[..dim].iter().enumerate() {
        if *col != format!("f{}", d + 1) {
            return Err(Error::Parse {
                path: origin.to_path_buf(),
                line: 1,
                message: format!("expected feature column `f{}`, got `{col}`", d + 1),
            });
        }
    }
    let mut points = Vec::new();
    let mut labels = Vec::new();
    for (line_no, raw) in lines {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split(',').collect();
        if parts.len() != dim + 1 {
            return Err(Error::Parse {
                path: origin.to_path_buf(),
                line: line_no + 1,
                message: format!("expected {} columns, got {}", dim + 1, parts.len()),
            });
        }
        let mut feature = Vec::with_capacity(dim);
        for tok in &parts[..dim] {
            feature.push(tok.parse::<f64>().map_err(|_| Error::Parse {
                path: origin.to_path_buf(),
                line: line_no + 1,
                message: format!("bad feature value `{tok}`"),
            })?);
        }
        points.push(feature);
        labels.push(parts[dim].to_string());
    }
    PointSet::new(points, labels)
}

pub fn read_points_csv(path: &Path) -> Result<PointSet> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_points_csv(&text, path)
}

pub fn points_csv_string(points: &PointSet) -> String {
    let dim = points.dim();
    let mut out = String::new();
    for d in 1..=dim {
        let _ = write!(out, "f{d},");
    }
    out.push_str("label\n");
    for (p, label) in points.points().iter().zip(points.labels()) {
        for v in p {
            let _ = write!(out, "{v},");
        }
        let _ = writeln!(out, "{label}");
    }
    out
}

pub fn write_points_csv(path: &Path, points: &PointSet) -> Result<()> {
    std::fs::write(path, points_csv_string(points)).map_err(|e| Error::io(path, e))
}

/// Synthetic labeled blobs with label-correlated geometry: each label
/// gets a random center in the unit cube and its samples scatter around
/// it with the given spread.
pub fn synthetic_blobs(
    num_points: usize,
    dim: usize,
    num_labels: usize,
    spread: f64,
    seed: u64,
) -> PointSet {
    assert!(num_labels >= 1 && dim >= 1 && num_points >= num_labels);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let centers: Vec<Vec<f64>> = (0..num_labels)
        .map(|_| (0..dim).map(|_| rng.random::<f64>()).collect())
        .collect();
    let mut points = Vec::with_capacity(num_points);
    let mut labels = Vec::with_capacity(num_points);
    for i in 0..num_points {
        let label = i % num_labels;
        let point: Vec<f64> = centers[label]
            .iter()
            .map(|c| c + spread * (rng.random::<f64>() - 0.5))
            .collect();
        points.push(point);
        labels.push(format!("L{label}"));
    }
    PointSet::new(points, labels).expect("generated points are valid")
}
