//! Ridge estimation in the spectral basis, UCB scoring, the CheapUCB
//! stage schedule and the selection policies.
//!
//! All three policies share the same machinery: a regularized design
//! matrix `V` maintained together with its inverse by rank-one updates,
//! the estimate `α̂ = V⁻¹S`, and UCB scores `s̃'α̂ + β‖s̃‖_{V⁻¹}`. They
//! differ only in the regularizer (`Λ_L + λI` vs `λI`), the feature basis
//! (spectral vs node) and the probe widths offered per step.

use std::fmt;
use std::str::FromStr;

use nalgebra::{Cholesky, DMatrix, DVector};

use crate::graph::ShiftedSpectrum;
use crate::probes::cost_closed_form;
use crate::{Error, Result};

/// Selection policy identifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PolicyKind {
    /// Stage-width probes with Laplacian regularization.
    CheapUcb,
    /// Node probes with Laplacian regularization.
    SpectralUcb,
    /// Node probes with identity regularization in the node basis.
    LinUcb,
}

impl PolicyKind {
    pub const ALL: [PolicyKind; 3] = [PolicyKind::CheapUcb, PolicyKind::SpectralUcb, PolicyKind::LinUcb];

    pub fn as_str(self) -> &'static str {
        match self {
            PolicyKind::CheapUcb => "cheapucb",
            PolicyKind::SpectralUcb => "spectralucb",
            PolicyKind::LinUcb => "linucb",
        }
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PolicyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "cheapucb" => Ok(PolicyKind::CheapUcb),
            "spectralucb" => Ok(PolicyKind::SpectralUcb),
            "linucb" => Ok(PolicyKind::LinUcb),
            other => Err(Error::Config(format!(
                "unknown policy `{other}`; expected cheapucb, spectralucb or linucb"
            ))),
        }
    }
}

/// Confidence width `β = 2R sqrt(d ln(1 + T/λ) + 2 ln(1/δ)) + c`.
/// Logarithms are natural.
pub fn confidence_width(
    noise_scale: f64,
    effective_dim: usize,
    horizon: usize,
    lambda: f64,
    delta: f64,
    smoothness_budget: f64,
) -> f64 {
    assert!(noise_scale >= 0.0, "noise scale must be nonnegative");
    assert!(effective_dim >= 1, "effective dimension must be at least 1");
    assert!(horizon >= 1, "horizon must be at least 1");
    assert!(lambda > 0.0, "lambda must be positive");
    assert!(delta > 0.0 && delta < 1.0, "delta must lie in (0, 1)");
    assert!(smoothness_budget >= 0.0, "smoothness budget must be nonnegative");
    let t = horizon as f64;
    let inner = effective_dim as f64 * (1.0 + t / lambda).ln() + 2.0 * (1.0 / delta).ln();
    2.0 * noise_scale * inner.sqrt() + smoothness_budget
}

/// One stage of the doubling schedule; steps are 1-based inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Stage {
    pub first: usize,
    pub last: usize,
    pub width: usize,
}

/// The CheapUCB stage plan: the horizon `[1, T]` partitioned into
/// `J = ⌊log₂T⌋ + 1` stages, stage `j` spanning `[2^{j-1}, min(2^j - 1, T)]`
/// with probe width `min(J - j + 1, min_degree + 1)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StagePlan {
    horizon: usize,
    stages: Vec<Stage>,
}

impl StagePlan {
    pub fn horizon(&self) -> usize {
        self.horizon
    }

    /// Stage count `J`.
    pub fn num_stages(&self) -> usize {
        self.stages.len()
    }

    pub fn stages(&self) -> &[Stage] {
        &self.stages
    }

    /// Probe width used at step `t` (1-based).
    pub fn width_at(&self, t: usize) -> usize {
        assert!(t >= 1 && t <= self.horizon, "step out of horizon");
        let idx = usize::BITS as usize - t.leading_zeros() as usize - 1;
        self.stages[idx].width
    }

    /// Total sensing cost of the plan under the width-only cost model on
    /// an `n`-node graph.
    pub fn width_ledger_cost(&self, num_nodes: usize) -> f64 {
        self.stages
            .iter()
            .map(|s| (s.last - s.first + 1) as f64 * cost_closed_form(s.width, num_nodes))
            .sum()
    }

    /// Largest probe width appearing in the plan.
    pub fn max_width(&self) -> usize {
        self.stages.iter().map(|s| s.width).max().unwrap_or(1)
    }
}

/// Builds the stage plan for horizon `T ≥ 1`, capping widths at
/// `min_degree + 1` so that every scheduled probe is feasible at every
/// node. With `min_degree = 0` the plan is all width 1 and the schedule
/// degenerates to plain node actions.
pub fn stage_schedule(horizon: usize, min_degree: usize) -> StagePlan {
    assert!(horizon >= 1, "horizon must be at least 1");
    let num_stages = usize::BITS as usize - horizon.leading_zeros() as usize;
    let cap = min_degree + 1;
    let stages = (1..=num_stages)
        .map(|j| {
            let first = 1usize << (j - 1);
            let last = ((1usize << j) - 1).min(horizon);
            let width = (num_stages - j + 1).min(cap);
            Stage { first, last, width }
        })
        .collect();
    StagePlan { horizon, stages }
}

const VERIFY_INTERVAL: usize = 64;
const REFRESH_TOL: f64 = 1e-8;

/// Data of one rank-one estimator update, handed to score caches.
#[derive(Debug, Clone)]
pub struct RankOneUpdate {
    /// `z = V⁻¹_old · s̃`.
    pub z: DVector<f64>,
    /// `1 + s̃'z`.
    pub denom: f64,
    /// Whether the maintained inverse was rebuilt from scratch afterwards.
    pub refreshed: bool,
}

/// Regularized least-squares state: `V = Λ + Σ s̃ᵢs̃ᵢ'`, its inverse
/// maintained by the rank-one identity, the running sum `S = Σ rᵢs̃ᵢ`
/// and the estimate `α̂ = V⁻¹S`.
///
/// Every 64 updates `V·V⁻¹` is re-verified by direct multiplication; on
/// drift beyond 1e-8 the inverse is rebuilt by Cholesky factorization.
#[derive(Debug, Clone)]
pub struct RidgeState {
    v: DMatrix<f64>,
    v_inv: DMatrix<f64>,
    s: DVector<f64>,
    alpha_hat: DVector<f64>,
    t: usize,
    reg_diagonal: DVector<f64>,
    updates_since_verify: usize,
    generation: u64,
}

impl RidgeState {
    /// Starts from a diagonal regularizer with strictly positive entries.
    pub fn new(reg_diagonal: DVector<f64>) -> Result<Self> {
        if reg_diagonal.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
            return Err(Error::InvalidArgument(
                "regularizer diagonal must be strictly positive".into(),
            ));
        }
        let n = reg_diagonal.len();
        let v = DMatrix::from_diagonal(&reg_diagonal);
        let v_inv = DMatrix::from_diagonal(&reg_diagonal.map(|x| 1.0 / x));
        Ok(RidgeState {
            v,
            v_inv,
            s: DVector::zeros(n),
            alpha_hat: DVector::zeros(n),
            t: 0,
            reg_diagonal,
            updates_since_verify: 0,
            generation: 0,
        })
    }

    /// `V₀ = Λ_L + λI` in the spectral basis.
    pub fn from_shifted(shifted: &ShiftedSpectrum) -> Result<Self> {
        Self::new(shifted.reg_diagonal())
    }

    /// `V₀ = λI` in the node basis (the LinUCB regularizer).
    pub fn identity_regularized(n: usize, lambda: f64) -> Result<Self> {
        Self::new(DVector::from_element(n, lambda))
    }

    pub fn dim(&self) -> usize {
        self.s.len()
    }

    /// Number of incorporated observations.
    pub fn t(&self) -> usize {
        self.t
    }

    pub fn alpha_hat(&self) -> &DVector<f64> {
        &self.alpha_hat
    }

    pub fn v(&self) -> &DMatrix<f64> {
        &self.v
    }

    pub fn v_inv(&self) -> &DMatrix<f64> {
        &self.v_inv
    }

    pub fn running_sum(&self) -> &DVector<f64> {
        &self.s
    }

    /// Bumped whenever the maintained inverse is rebuilt; caches keyed on
    /// it know when to recompute.
    pub fn generation(&self) -> u64 {
        self.generation
    }

    /// `s̃'α̂ + β sqrt(s̃'V⁻¹s̃)`.
    pub fn ucb_score(&self, feature: &DVector<f64>, beta: f64) -> f64 {
        assert!(beta >= 0.0, "beta must be nonnegative");
        let quad = feature.dot(&(&self.v_inv * feature)).max(0.0);
        feature.dot(&self.alpha_hat) + beta * quad.sqrt()
    }

    /// Incorporates one observation.
    pub fn update(&mut self, feature: &DVector<f64>, reward: f64) -> Result<RankOneUpdate> {
        let z = &self.v_inv * feature;
        let denom = 1.0 + feature.dot(&z);
        if !denom.is_finite() || denom <= 0.0 {
            return Err(Error::Numeric(format!(
                "rank-one denominator {denom} is not positive; V lost positive definiteness"
            )));
        }
        self.v.ger(1.0, feature, feature, 1.0);
        self.v_inv.ger(-1.0 / denom, &z, &z, 1.0);
        self.s.axpy(reward, feature, 1.0);
        self.t += 1;
        self.updates_since_verify += 1;

        let mut refreshed = false;
        if self.updates_since_verify >= VERIFY_INTERVAL {
            self.updates_since_verify = 0;
            if self.identity_deviation() > REFRESH_TOL {
                let chol = Cholesky::new(self.v.clone()).ok_or_else(|| {
                    Error::Numeric("design matrix is no longer positive definite".into())
                })?;
                self.v_inv = chol.inverse();
                self.generation += 1;
                refreshed = true;
            }
        }

        // α̂ = V⁻¹S, with one step of iterative refinement to keep the
        // residual of V·α̂ = S small over long trajectories.
        let mut alpha = &self.v_inv * &self.s;
        let residual = &self.s - &self.v * &alpha;
        alpha += &self.v_inv * residual;
        self.alpha_hat = alpha;

        Ok(RankOneUpdate { z, denom, refreshed })
    }

    /// Max absolute entry deviation of `V·V⁻¹` from the identity.
    pub fn identity_deviation(&self) -> f64 {
        let n = self.dim();
        let prod = &self.v * &self.v_inv;
        let mut dev: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let target = if i == j { 1.0 } else { 0.0 };
                dev = dev.max((prod[(i, j)] - target).abs());
            }
        }
        dev
    }

    /// Max absolute entry of the residual `V·α̂ - S`.
    pub fn solve_residual(&self) -> f64 {
        (&self.v * &self.alpha_hat - &self.s).abs().max()
    }

    /// `ln det V`, via Cholesky factorization.
    pub fn log_det_v(&self) -> Result<f64> {
        let chol = Cholesky::new(self.v.clone())
            .ok_or_else(|| Error::Numeric("design matrix is not positive definite".into()))?;
        Ok(2.0 * chol.l().diagonal().iter().map(|d| d.ln()).sum::<f64>())
    }

    /// `ln det Λ` of the starting regularizer.
    pub fn log_det_reg(&self) -> f64 {
        self.reg_diagonal.iter().map(|d| d.ln()).sum()
    }

    /// `‖x‖_{V⁻¹}`, used by the self-normalized trajectory check.
    pub fn v_inv_norm(&self, x: &DVector<f64>) -> f64 {
        x.dot(&(&self.v_inv * x)).max(0.0).sqrt()
    }
}

/// Picks the probe with the highest UCB score from explicit feature
/// vectors; ties resolve to the lowest index (ascending anchor).
pub fn select_action(state: &RidgeState, features: &[DVector<f64>], beta: f64) -> usize {
    assert!(!features.is_empty(), "probe set must be nonempty");
    let mut best = 0;
    let mut best_score = f64::NEG_INFINITY;
    for (idx, feature) in features.iter().enumerate() {
        let score = state.ucb_score(feature, beta);
        if score > best_score {
            best = idx;
            best_score = score;
        }
    }
    best
}

/// Batched UCB scorer for a fixed probe set (features in columns).
///
/// Keeps the per-probe `‖s̃‖²_{V⁻¹}` in sync with the estimator through
/// the rank-one identity, so a selection step costs two matrix-vector
/// products instead of a matrix-matrix product.
#[derive(Debug, Clone)]
pub struct UcbSelector {
    features: DMatrix<f64>,
    norms_sq: Vec<f64>,
    generation: u64,
}

impl UcbSelector {
    pub fn new(state: &RidgeState, features: DMatrix<f64>) -> Self {
        assert!(features.ncols() > 0, "probe set must be nonempty");
        assert_eq!(features.nrows(), state.dim(), "feature dimension mismatch");
        let mut selector = UcbSelector {
            features,
            norms_sq: Vec::new(),
            generation: 0,
        };
        selector.recompute(state);
        selector
    }

    pub fn num_probes(&self) -> usize {
        self.features.ncols()
    }

    pub fn feature(&self, idx: usize) -> DVector<f64> {
        self.features.column(idx).into_owned()
    }

    fn recompute(&mut self, state: &RidgeState) {
        let m = state.v_inv() * &self.features;
        self.norms_sq = (0..self.features.ncols())
            .map(|i| self.features.column(i).dot(&m.column(i)))
            .collect();
        self.generation = state.generation();
    }

    /// Argmax of `s̃'α̂ + β sqrt(s̃'V⁻¹s̃)`; ties resolve to the lowest
    /// index (ascending anchor).
    pub fn select(&mut self, state: &RidgeState, beta: f64) -> usize {
        if self.generation != state.generation() {
            self.recompute(state);
        }
        let means = self.features.tr_mul(state.alpha_hat());
        let mut best = 0;
        let mut best_score = f64::NEG_INFINITY;
        for i in 0..self.num_probes() {
            let score = means[i] + beta * self.norms_sq[i].max(0.0).sqrt();
            if score > best_score {
                best = i;
                best_score = score;
            }
        }
        best
    }

    /// Applies the rank-one identity to the cached norms after an
    /// estimator update; rebuilds them if the inverse was refreshed.
    pub fn after_update(&mut self, state: &RidgeState, update: &RankOneUpdate) {
        if update.refreshed || self.generation != state.generation() {
            self.recompute(state);
            return;
        }
        let u = self.features.tr_mul(&update.z);
        for (norm, ui) in self.norms_sq.iter_mut().zip(u.iter()) {
            *norm -= ui * ui / update.denom;
        }
    }
}
