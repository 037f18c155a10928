//! Smooth reward synthesis, the noisy observation channel, ground-truth
//! optima and the local-smoothness gap measurement.
//!
//! Rewards live in the spectral basis: `f = Q α*`. Smoothness is the
//! budget `‖α*‖_Λ ≤ c`; placing the mass of `α*` on low-frequency modes
//! makes neighboring nodes carry similar rewards.

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::graph::{Graph, ShiftedSpectrum};
use crate::probes::Probe;
use crate::{Error, Result};

/// Ground-truth reward function together with its spectral parameter,
/// realized smoothness budget and noise scale.
#[derive(Debug, Clone)]
pub struct RewardField {
    alpha_star: DVector<f64>,
    node_rewards: DVector<f64>,
    /// Realized `‖α*‖_Λ`; the tightest valid smoothness budget.
    smoothness_budget: f64,
    /// Sub-Gaussian noise scale `R`, realized as Gaussian(0, R²).
    noise_scale: f64,
}

impl RewardField {
    pub fn alpha_star(&self) -> &DVector<f64> {
        &self.alpha_star
    }

    /// Node rewards `f = Q α*`.
    pub fn node_rewards(&self) -> &DVector<f64> {
        &self.node_rewards
    }

    pub fn node_reward(&self, node: usize) -> f64 {
        self.node_rewards[node]
    }

    pub fn smoothness_budget(&self) -> f64 {
        self.smoothness_budget
    }

    pub fn noise_scale(&self) -> f64 {
        self.noise_scale
    }

    pub fn len(&self) -> usize {
        self.node_rewards.len()
    }

    pub fn is_empty(&self) -> bool {
        self.node_rewards.is_empty()
    }

    /// Builds a field from given node rewards (e.g. the ingest pipeline):
    /// `α* = Q'f`, with the realized `‖α*‖_Λ` as budget.
    pub fn from_node_rewards(
        shifted: &ShiftedSpectrum,
        node_rewards: DVector<f64>,
        noise_scale: f64,
    ) -> Result<Self> {
        if node_rewards.len() != shifted.len() {
            return Err(Error::InvalidArgument(format!(
                "reward vector has {} entries for a {}-node spectrum",
                node_rewards.len(),
                shifted.len()
            )));
        }
        if !(noise_scale >= 0.0) {
            return Err(Error::InvalidArgument("noise scale must be nonnegative".into()));
        }
        let alpha_star = shifted.base().q().transpose() * &node_rewards;
        let smoothness_budget = smoothness_norm(&alpha_star, shifted);
        Ok(RewardField {
            alpha_star,
            node_rewards,
            smoothness_budget,
            noise_scale,
        })
    }
}

/// Synthesizes a smooth reward: `α*` has `k` nonzero entries on the `k`
/// smallest-eigenvalue modes with magnitudes uniform on (0, 1], rescaled
/// so that `max|f| = 1`, then rescaled further if needed so that
/// `‖α*‖_Λ ≤ c_max`. The realized norm becomes the field's budget.
pub fn synthesize_smooth_reward(
    shifted: &ShiftedSpectrum,
    sparsity: usize,
    c_max: f64,
    noise_scale: f64,
    seed: u64,
) -> Result<RewardField> {
    let n = shifted.len();
    if sparsity < 1 || sparsity > n {
        return Err(Error::InvalidArgument(format!(
            "sparsity {sparsity} out of range 1..={n}"
        )));
    }
    if !(c_max > 0.0) {
        return Err(Error::InvalidArgument("smoothness budget must be positive".into()));
    }
    if !(noise_scale >= 0.0) {
        return Err(Error::InvalidArgument("noise scale must be nonnegative".into()));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut alpha = DVector::zeros(n);
    for i in 0..sparsity {
        alpha[i] = 1.0 - rng.random::<f64>();
    }
    let f = shifted.base().q() * &alpha;
    let peak = f.amax();
    alpha /= peak;
    let norm = smoothness_norm(&alpha, shifted);
    if norm > c_max {
        alpha *= c_max / norm;
    }
    let node_rewards = shifted.base().q() * &alpha;
    let smoothness_budget = smoothness_norm(&alpha, shifted);
    Ok(RewardField {
        alpha_star: alpha,
        node_rewards,
        smoothness_budget,
        noise_scale,
    })
}

/// `‖α‖_Λ = sqrt(Σ (λ_i + λ) α_i²)`.
pub fn smoothness_norm(alpha: &DVector<f64>, shifted: &ShiftedSpectrum) -> f64 {
    alpha
        .iter()
        .enumerate()
        .map(|(i, a)| shifted.shifted_eigenvalue(i) * a * a)
        .sum::<f64>()
        .sqrt()
}

/// Noiseless probe reward: the arithmetic mean of `f` over the support
/// (equal to `s̃'α*`).
pub fn probe_reward(field: &RewardField, probe: &Probe) -> f64 {
    let sum: f64 = probe
        .support()
        .iter()
        .map(|&i| field.node_rewards[i])
        .sum();
    sum / probe.width() as f64
}

/// Spectral-basis evaluation `s̃'α*`; agrees with [`probe_reward`] up to
/// floating-point error.
pub fn probe_reward_gft(field: &RewardField, gft_coefficients: &DVector<f64>) -> f64 {
    gft_coefficients.dot(&field.alpha_star)
}

/// One noisy observation: `probe_reward + ε` with `ε ~ Gaussian(0, R²)`.
/// With `R = 0` the reward is returned exactly and the stream untouched.
pub fn observe(field: &RewardField, probe: &Probe, rng: &mut ChaCha8Rng) -> f64 {
    let mean = probe_reward(field, probe);
    if field.noise_scale == 0.0 {
        return mean;
    }
    let normal = Normal::new(0.0, field.noise_scale).expect("valid noise scale");
    mean + normal.sample(rng)
}

/// Index of the best probe in an explicit arm set; ties broken by
/// ascending width, then ascending anchor.
pub fn best_in(field: &RewardField, probes: &[Probe]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (idx, probe) in probes.iter().enumerate() {
        let r = probe_reward(field, probe);
        let better = match best {
            None => true,
            Some((bidx, br)) => {
                let b = &probes[bidx];
                r > br
                    || (r == br
                        && (probe.width(), probe.anchor()) < (b.width(), b.anchor()))
            }
        };
        if better {
            best = Some((idx, r));
        }
    }
    best.map(|(i, _)| i)
}

/// Exhaustive scan of the full arm universe (every anchor, every feasible
/// width); ties broken by ascending width, then ascending anchor.
///
/// Evaluation uses the same support ordering and summation as
/// [`probe_reward`], so the returned optimum dominates every probe under
/// the exact arithmetic used by the harness.
pub fn best_probe(field: &RewardField, graph: &Graph) -> Probe {
    let mut best: Option<(Probe, f64)> = None;
    for anchor in 0..graph.num_nodes() {
        let mut neighbors: Vec<(usize, f64)> = graph.neighbors(anchor).to_vec();
        neighbors.sort_by(|a, b| {
            b.1.partial_cmp(&a.1)
                .expect("finite weights")
                .then(a.0.cmp(&b.0))
        });
        for width in 1..=(neighbors.len() + 1) {
            let mut support: Vec<usize> =
                neighbors[..width - 1].iter().map(|&(n, _)| n).collect();
            support.push(anchor);
            support.sort_unstable();
            let probe = crate::probes::build_probe(graph, anchor, width)
                .expect("width is feasible by construction");
            debug_assert_eq!(probe.support(), &support[..]);
            let r = probe_reward(field, &probe);
            let better = match &best {
                None => true,
                Some((b, br)) => {
                    r > *br
                        || (r == *br
                            && (probe.width(), probe.anchor()) < (b.width(), b.anchor()))
                }
            };
            if better {
                best = Some((probe, r));
            }
        }
    }
    best.expect("graph has at least one node").0
}

/// Local-smoothness gap measurement: the largest deviation between a
/// node's reward and the mean reward of its full neighbor set, together
/// with the constant `c' = 56 κ sqrt(2κ) c` it is compared against.
#[derive(Debug, Clone, Copy)]
pub struct LocalSmoothnessGap {
    pub max_gap: f64,
    pub node: usize,
    pub c_prime: f64,
}

/// Measures `max_i |f(i) - mean_{j ∈ N_i} f(j)|`. Rejects graphs with
/// isolated nodes (the neighborhood mean is undefined there).
pub fn local_smoothness_gap(field: &RewardField, graph: &Graph) -> Result<LocalSmoothnessGap> {
    let mut max_gap = 0.0;
    let mut arg = 0;
    for i in 0..graph.num_nodes() {
        let neighbors = graph.neighbors(i);
        if neighbors.is_empty() {
            return Err(Error::InvalidArgument(format!(
                "node {i} is isolated; every node needs at least one neighbor"
            )));
        }
        let mean: f64 = neighbors
            .iter()
            .map(|&(j, _)| field.node_rewards[j])
            .sum::<f64>()
            / neighbors.len() as f64;
        let gap = (field.node_rewards[i] - mean).abs();
        if gap > max_gap {
            max_gap = gap;
            arg = i;
        }
    }
    let kappa = graph.kappa() as f64;
    let c_prime = 56.0 * kappa * (2.0 * kappa).sqrt() * field.smoothness_budget;
    Ok(LocalSmoothnessGap {
        max_gap,
        node: arg,
        c_prime,
    })
}

/// Serializes node rewards as `node,f` CSV.
pub fn reward_csv_string(rewards: &DVector<f64>) -> String {
    let mut out = String::from("node,f\n");
    for (i, v) in rewards.iter().enumerate() {
        let _ = writeln!(out, "{i},{v}");
    }
    out
}

pub fn write_reward_csv(path: &Path, rewards: &DVector<f64>) -> Result<()> {
    std::fs::write(path, reward_csv_string(rewards)).map_err(|e| Error::io(path, e))
}

pub fn read_reward_csv(path: &Path) -> Result<DVector<f64>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut values = Vec::new();
    for (line_no, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || (line_no == 0 && line == "node,f") {
            continue;
        }
        let mut parts = line.split(',');
        let err = |message: String| Error::Parse {
            path: path.to_path_buf(),
            line: line_no + 1,
            message,
        };
        let idx: usize = parts
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| err("expected node index".into()))?;
        let val: f64 = parts
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| err("expected reward value".into()))?;
        if idx != values.len() {
            return Err(err(format!("expected node {} next, got {idx}", values.len())));
        }
        values.push(val);
    }
    if values.is_empty() {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            line: 0,
            message: "no reward rows".into(),
        });
    }
    Ok(DVector::from_vec(values))
}

/// Serializes the spectral parameter as `mode,alpha` CSV.
pub fn alpha_csv_string(alpha: &DVector<f64>) -> String {
    let mut out = String::from("mode,alpha\n");
    for (i, v) in alpha.iter().enumerate() {
        let _ = writeln!(out, "{i},{v}");
    }
    out
}

pub fn write_alpha_csv(path: &Path, alpha: &DVector<f64>) -> Result<()> {
    std::fs::write(path, alpha_csv_string(alpha)).map_err(|e| Error::io(path, e))
}
