//! Acceptance suite: one test per criterion, each printing a pass/fail
//! line. Run with `cargo test --test acceptance -- --nocapture` to see
//! the lines; every tolerance is pinned in code.

use std::path::Path;

use nalgebra::{Cholesky, DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use spectral_bandits::environment::{probe_reward, write_reward_csv};
use spectral_bandits::graph::{complete_graph, generate_er, generate_sbm, Graph};
use spectral_bandits::harness::{
    build_instance, run_experiment, run_trajectory, run_trajectory_on, theorem_cost_bound,
    CostModel, ExperimentConfig, GraphSpec, RewardSpec, Trajectory,
};
use spectral_bandits::ingest::{ingest_points, synthetic_blobs};
use spectral_bandits::policies::{stage_schedule, PolicyKind, RidgeState};
use spectral_bandits::probes::cost_closed_form;

fn paper_defaults(graph: GraphSpec, horizon: usize, runs: usize) -> ExperimentConfig {
    ExperimentConfig {
        graph,
        graph_seed: None,
        reward: RewardSpec::Synth { sparsity: 5, c_max: 100.0 },
        reward_seed: None,
        noise_scale: 0.01,
        lambda: 0.01,
        delta: 0.001,
        horizon,
        runs,
        base_seed: 1,
        policies: PolicyKind::ALL.to_vec(),
        cost_model: CostModel::Width,
    }
}

fn assert_log_det_bound(trajectories: &[Trajectory], context: &str) {
    for traj in trajectories {
        let tc = traj.checks.as_ref().expect("in-process trajectories carry checks");
        assert!(
            tc.log_det_ok(traj.horizon()),
            "{context}: log-det bound failed for {} seed {}: {} > {}",
            traj.policy,
            traj.seed,
            tc.log_det_ratio(),
            tc.log_det_bound(traj.horizon())
        );
    }
}

fn mean_final_regret(trajectories: &[Trajectory], policy: PolicyKind) -> f64 {
    let finals: Vec<f64> = trajectories
        .iter()
        .filter(|t| t.policy == policy)
        .map(Trajectory::final_regret)
        .collect();
    assert!(!finals.is_empty());
    finals.iter().sum::<f64>() / finals.len() as f64
}

/// Criterion 1 (part 1): schedule anchor at T = 100, N = 250 — the
/// ledger of an actual CheapUCB run equals the hand sum 61.553 ± 0.001
/// and respects the 3T/4 - 1/2 ceiling.
#[test]
fn criterion_1_cost_anchor_t100() {
    let plan = stage_schedule(100, 6);
    let planned = plan.width_ledger_cost(250);
    assert!(
        (planned - 61.553).abs() <= 0.001,
        "schedule cost {planned} differs from 61.553"
    );

    // The same number must fall out of a real run on a min-degree >= 6
    // graph with 250 nodes.
    let g = complete_graph(250);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("k250.edgelist");
    g.write_edge_list(&path).unwrap();
    let cfg = paper_defaults(GraphSpec::File { path }, 100, 1);
    let traj = run_trajectory(&cfg, PolicyKind::CheapUcb, 1).unwrap();
    assert!((traj.final_cost() - planned).abs() < 1e-9);
    assert!(traj.final_cost() <= theorem_cost_bound(100));
    println!(
        "criterion 1 (cost anchor T=100, N=250): PASS  C_T = {:.6} within 61.553 ± 0.001, ceiling {:.1}",
        traj.final_cost(),
        theorem_cost_bound(100)
    );
}

/// Criterion 1 (part 2): for every T in 2..=512 on a graph with min
/// degree >= ceil(log2 T), the width-model ledger satisfies
/// C_T <= 3T/4 - 1/2.
///
/// This inequality is arithmetically false for T in {2, 3, 6, 7}: the
/// width-1 stage [2^(J-1), T] alone costs T - 2^(J-1) + 1, which already
/// exceeds the ceiling there for every admissible graph (e.g. T = 7:
/// four width-1 steps cost 4.0 and the remaining three steps cost at
/// least 1.15, against a ceiling of 4.75). The test states the criterion
/// as written and reports the violating horizons.
#[test]
fn criterion_1_cost_bound_sweep() {
    let mut violations = Vec::new();
    let mut max_ratio: f64 = 0.0;
    for horizon in 2..=512usize {
        // ceil(log2 T) and the smallest admissible complete graph.
        let ceil_log = usize::BITS as usize - (horizon - 1).leading_zeros() as usize;
        let num_nodes = ceil_log + 1;
        let plan = stage_schedule(horizon, ceil_log);
        assert!(plan.max_width() <= ceil_log + 1, "scheduled width infeasible");
        let cost = plan.width_ledger_cost(num_nodes);
        let bound = theorem_cost_bound(horizon);
        max_ratio = max_ratio.max(cost / bound);
        if cost > bound {
            violations.push((horizon, cost, bound));
        }
    }
    let line = if violations.is_empty() {
        "criterion 1 (cost bound sweep T=2..512): PASS".to_string()
    } else {
        format!(
            "criterion 1 (cost bound sweep T=2..512): FAIL at {:?}",
            violations
                .iter()
                .map(|(t, c, b)| format!("T={t}: C_T={c:.4} > {b:.2}"))
                .collect::<Vec<_>>()
        )
    };
    println!("{line}");
    assert!(
        violations.is_empty(),
        "C_T <= 3T/4 - 1/2 fails at {} horizons: {}; the width-1 stage alone \
         exceeds the ceiling for T < 8 (schedule-inherent; see notes)",
        violations.len(),
        violations
            .iter()
            .map(|(t, c, b)| format!("T={t} ({c:.4} > {b})"))
            .collect::<Vec<_>>()
            .join(", ")
    );
}

/// Criterion 2: ER(250, 0.05), T = 100 — CheapUCB's ledger is at most
/// 0.75x SpectralUCB's (which is exactly T), expected around 0.62x.
#[test]
fn criterion_2_cost_gain_vs_spectralucb() {
    let mut cfg = paper_defaults(GraphSpec::Er { n: 250, p: 0.05 }, 100, 1);
    cfg.graph_seed = Some(0);
    cfg.reward_seed = Some(0);
    cfg.policies = vec![PolicyKind::CheapUcb, PolicyKind::SpectralUcb];
    let trajectories = run_experiment(&cfg).unwrap();
    assert_log_det_bound(&trajectories, "criterion 2");

    let cheap = trajectories
        .iter()
        .find(|t| t.policy == PolicyKind::CheapUcb)
        .unwrap()
        .final_cost();
    let spectral = trajectories
        .iter()
        .find(|t| t.policy == PolicyKind::SpectralUcb)
        .unwrap()
        .final_cost();
    assert_eq!(spectral, 100.0, "node actions cost exactly T");
    let ratio = cheap / spectral;
    assert!(
        ratio <= 0.75,
        "cost gain too small: CheapUCB {cheap} vs SpectralUCB {spectral}"
    );
    assert!(
        (0.55..=0.70).contains(&ratio),
        "cost ratio {ratio} far from the expected ~0.62"
    );
    println!(
        "criterion 2 (cost gain vs SpectralUCB): PASS  C_T(cheap) = {cheap:.3}, ratio {ratio:.4} <= 0.75"
    );
}

/// Criterion 3: BA(250, 3) and ER(250, 0.05), T = 150, k = 5, 50 seeds —
/// mean R_T(CheapUCB) <= mean R_T(LinUCB) and <= 1.5x mean
/// R_T(SpectralUCB).
#[test]
fn criterion_3_regret_ordering_er_and_ba() {
    let families = [
        ("ER", GraphSpec::Er { n: 250, p: 0.05 }),
        ("BA", GraphSpec::Ba { n: 250, m: 3 }),
    ];
    for (name, graph) in families {
        let cfg = paper_defaults(graph, 150, 50);
        let trajectories = run_experiment(&cfg).unwrap();
        assert_eq!(trajectories.len(), 150);
        assert_log_det_bound(&trajectories, "criterion 3");

        let cheap = mean_final_regret(&trajectories, PolicyKind::CheapUcb);
        let spectral = mean_final_regret(&trajectories, PolicyKind::SpectralUcb);
        let lin = mean_final_regret(&trajectories, PolicyKind::LinUcb);
        assert!(
            cheap <= lin,
            "{name}: mean R_T cheap {cheap:.3} > linucb {lin:.3}"
        );
        assert!(
            cheap <= 1.5 * spectral,
            "{name}: mean R_T cheap {cheap:.3} > 1.5 x spectral {spectral:.3}"
        );
        println!(
            "criterion 3 ({name}, 50 seeds): PASS  mean R_T cheap {cheap:.2} <= lin {lin:.2}, \
             cheap/spectral = {:.3} <= 1.5",
            cheap / spectral
        );
    }
}

/// Criterion 4: SBM([100, 60, 40, 50], 0.7, 0.02), T = 100, 50 seeds —
/// mean R_T(CheapUCB) <= 1.2x mean R_T(SpectralUCB) and the shifted
/// eigengap λ5/λ4 >= 3 in at least 90% of seeds.
#[test]
fn criterion_4_sbm_regime() {
    let mut cfg = paper_defaults(
        GraphSpec::Sbm {
            block_sizes: vec![100, 60, 40, 50],
            p_in: 0.7,
            p_out: 0.02,
        },
        100,
        50,
    );
    cfg.policies = vec![PolicyKind::CheapUcb, PolicyKind::SpectralUcb];

    let seeds: Vec<u64> = (0..cfg.runs as u64).map(|i| cfg.base_seed + i).collect();
    let per_seed: Vec<(bool, Vec<Trajectory>)> = seeds
        .par_iter()
        .map(|&seed| {
            let instance = build_instance(&cfg, seed).unwrap();
            let gap = instance.shifted.shifted_eigenvalue(4) / instance.shifted.shifted_eigenvalue(3);
            let trajectories: Vec<Trajectory> = cfg
                .policies
                .iter()
                .map(|&p| run_trajectory_on(&instance, &cfg, p, seed).unwrap())
                .collect();
            (gap >= 3.0, trajectories)
        })
        .collect();

    let gap_hits = per_seed.iter().filter(|(gap_ok, _)| *gap_ok).count();
    let trajectories: Vec<Trajectory> =
        per_seed.into_iter().flat_map(|(_, t)| t).collect();
    assert_log_det_bound(&trajectories, "criterion 4");

    let cheap = mean_final_regret(&trajectories, PolicyKind::CheapUcb);
    let spectral = mean_final_regret(&trajectories, PolicyKind::SpectralUcb);
    assert!(
        cheap <= 1.2 * spectral,
        "mean R_T cheap {cheap:.3} > 1.2 x spectral {spectral:.3}"
    );
    assert!(
        gap_hits * 10 >= 9 * seeds.len(),
        "eigengap >= 3 in only {gap_hits} of {} seeds",
        seeds.len()
    );
    println!(
        "criterion 4 (SBM, 50 seeds): PASS  cheap/spectral = {:.3} <= 1.2, eigengap held in {gap_hits}/{}",
        cheap / spectral,
        seeds.len()
    );
}

/// Criterion 5: incremental estimate vs direct dense solve within 1e-6
/// max-abs over 10^4 random updates at N = 50; V·V⁻¹ within 1e-6 of the
/// identity throughout.
#[test]
fn criterion_5_estimator_correctness() {
    let g = generate_er(50, 0.15, 3);
    let shifted = g.spectral_decomposition().unwrap().into_shifted(0.01).unwrap();
    let mut state = RidgeState::from_shifted(&shifted).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let mut worst_alpha: f64 = 0.0;
    let mut worst_identity: f64 = 0.0;
    for step in 0..10_000 {
        let feature = DVector::from_fn(50, |_, _| rng.random::<f64>() - 0.5).normalize();
        let reward = rng.random::<f64>() * 2.0 - 1.0;
        state.update(&feature, reward).unwrap();

        let direct = Cholesky::new(state.v().clone())
            .unwrap()
            .solve(state.running_sum());
        worst_alpha = worst_alpha.max((state.alpha_hat() - &direct).abs().max());
        worst_identity = worst_identity.max(state.identity_deviation());
        assert!(
            worst_alpha <= 1e-6 && worst_identity <= 1e-6,
            "step {step}: alpha dev {worst_alpha}, identity dev {worst_identity}"
        );
    }
    println!(
        "criterion 5 (estimator correctness): PASS  max alpha dev {worst_alpha:.2e}, max identity dev {worst_identity:.2e}"
    );
}

/// Criterion 6: Q'Q and QΛQ' - L within 1e-8 on 100 random graphs
/// (N <= 100); zero-eigenvalue multiplicity equals component count on
/// 100 random disjoint-union fixtures.
#[test]
fn criterion_6_spectral_correctness() {
    let mut worst_orth: f64 = 0.0;
    let mut worst_rec: f64 = 0.0;
    for seed in 0..100u64 {
        let n = 2 + (seed as usize * 7) % 99;
        let p = 0.05 + 0.9 * ((seed as f64 * 0.37) % 1.0);
        let g = generate_er(n, p, seed);
        let s = g.spectral_decomposition().unwrap();
        worst_orth = worst_orth.max(s.orthonormality_deviation());
        worst_rec = worst_rec.max(s.reconstruction_deviation(&g));
        assert!(worst_orth <= 1e-8 && worst_rec <= 1e-8, "seed {seed}");
    }

    for seed in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let blocks: Vec<usize> = (0..rng.random_range(2..6usize))
            .map(|_| rng.random_range(1..15usize))
            .collect();
        let g = generate_sbm(&blocks, 0.8, 0.0, seed);
        let s = g.spectral_decomposition().unwrap();
        assert_eq!(
            s.zero_eigenvalue_multiplicity(),
            g.connected_components(),
            "seed {seed}: blocks {blocks:?}"
        );
    }
    println!(
        "criterion 6 (spectral correctness): PASS  max Q'Q dev {worst_orth:.2e}, max reconstruction dev {worst_rec:.2e}"
    );
}

/// Criterion 7: the log-det bound is asserted on every run of criteria
/// 2-4 (inside those tests); here the statistical half: the
/// self-normalized deviation stays within β - c at all steps in at least
/// (1 - δ - 0.02) of 500 seeded runs with known noise.
#[test]
fn criterion_7_lemma_invariants() {
    let mut cfg = paper_defaults(GraphSpec::Er { n: 30, p: 0.2 }, 50, 500);
    cfg.reward = RewardSpec::Synth { sparsity: 3, c_max: 100.0 };
    cfg.noise_scale = 0.05;
    cfg.delta = 0.05;
    cfg.policies = vec![PolicyKind::SpectralUcb];
    let trajectories = run_experiment(&cfg).unwrap();
    assert_eq!(trajectories.len(), 500);
    assert_log_det_bound(&trajectories, "criterion 7");

    let violations = trajectories
        .iter()
        .filter(|t| !t.checks.as_ref().unwrap().self_norm_ok())
        .count();
    let allowed = ((cfg.delta + 0.02) * 500.0).floor() as usize;
    assert!(
        violations <= allowed,
        "self-normalized bound violated in {violations} of 500 runs (allowed {allowed})"
    );
    println!(
        "criterion 7 (lemma invariants): PASS  log-det bound held on all runs (also asserted in criteria 2-4); \
         self-normalized violations {violations}/500 <= {allowed}"
    );
}

// ---------------------------------------------------------------------
// Criterion 8: an independent re-derivation of every selection.
// ---------------------------------------------------------------------

/// Oracle reimplementation: dense algebra from first principles, no
/// shared code with the policies module beyond the graph/spectrum types.
mod oracle {
    use super::*;

    pub struct OracleOutcome {
        pub picks: Vec<(usize, usize)>,
        pub regret: Vec<f64>,
    }

    fn bit_length(mut x: usize) -> usize {
        let mut bits = 0;
        while x > 0 {
            bits += 1;
            x >>= 1;
        }
        bits
    }

    fn stage_width(t: usize, horizon: usize, min_degree: usize) -> usize {
        let j_total = bit_length(horizon);
        let j = bit_length(t);
        (j_total - j + 1).min(min_degree + 1)
    }

    fn sorted_neighbors(g: &Graph, node: usize) -> Vec<usize> {
        let mut nb: Vec<(usize, f64)> = g.neighbors(node).to_vec();
        nb.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
        nb.into_iter().map(|(j, _)| j).collect()
    }

    fn probe_signal(g: &Graph, anchor: usize, width: usize) -> DVector<f64> {
        let mut s = DVector::zeros(g.num_nodes());
        s[anchor] = 1.0 / width as f64;
        for &j in sorted_neighbors(g, anchor).iter().take(width - 1) {
            s[j] = 1.0 / width as f64;
        }
        s
    }

    fn support_mean(f: &DVector<f64>, g: &Graph, anchor: usize, width: usize) -> f64 {
        let mut support: Vec<usize> = sorted_neighbors(g, anchor)
            .into_iter()
            .take(width - 1)
            .collect();
        support.push(anchor);
        support.sort_unstable();
        support.iter().map(|&i| f[i]).sum::<f64>() / width as f64
    }

    /// Best reward over every anchor and every feasible width.
    pub fn enumerated_optimum(f: &DVector<f64>, g: &Graph) -> f64 {
        let mut best = f64::NEG_INFINITY;
        for anchor in 0..g.num_nodes() {
            for width in 1..=(g.degree(anchor) + 1) {
                best = best.max(support_mean(f, g, anchor, width));
            }
        }
        best
    }

    pub fn run(
        g: &Graph,
        eigenvalues: &DVector<f64>,
        q: &DMatrix<f64>,
        f: &DVector<f64>,
        smoothness_budget: f64,
        policy: PolicyKind,
        lambda: f64,
        delta: f64,
        noise_scale: f64,
        horizon: usize,
    ) -> OracleOutcome {
        let n = g.num_nodes();
        // Effective dimension by a literal scan of the definition.
        let threshold = horizon as f64 / (1.0 + horizon as f64 / lambda).ln();
        let shifted: Vec<f64> = match policy {
            PolicyKind::LinUcb => vec![lambda; n],
            _ => eigenvalues.iter().map(|l| l + lambda).collect(),
        };
        let mut dim = 1usize;
        for d in 1..=n {
            if (d as f64 - 1.0) * shifted[d - 1] <= threshold {
                dim = d;
            }
        }
        let beta = 2.0 * noise_scale
            * (dim as f64 * (1.0 + horizon as f64 / lambda).ln() + 2.0 * (1.0 / delta).ln()).sqrt()
            + smoothness_budget;

        let mut v = DMatrix::zeros(n, n);
        for i in 0..n {
            v[(i, i)] = shifted[i];
        }
        let mut running = DVector::zeros(n);

        let best = enumerated_optimum(f, g);
        let mut picks = Vec::new();
        let mut regret = Vec::new();
        let mut regret_cum = 0.0;
        for t in 1..=horizon {
            let width = match policy {
                PolicyKind::CheapUcb => stage_width(t, horizon, g.min_degree()),
                _ => 1,
            };
            let chol = Cholesky::new(v.clone()).expect("V positive definite");
            let alpha = chol.solve(&running);
            let mut best_score = f64::NEG_INFINITY;
            let mut chosen = 0usize;
            for anchor in 0..n {
                let signal = probe_signal(g, anchor, width);
                let feat = match policy {
                    PolicyKind::LinUcb => signal.clone(),
                    _ => q.transpose() * &signal,
                };
                let score = feat.dot(&alpha) + beta * feat.dot(&chol.solve(&feat)).max(0.0).sqrt();
                if score > best_score {
                    best_score = score;
                    chosen = anchor;
                }
            }
            picks.push((chosen, width));

            let mean = support_mean(f, g, chosen, width);
            regret_cum += best - mean;
            regret.push(regret_cum);

            let signal = probe_signal(g, chosen, width);
            let feat = match policy {
                PolicyKind::LinUcb => signal.clone(),
                _ => q.transpose() * &signal,
            };
            v += &feat * feat.transpose();
            running += mean * feat; // zero noise: observation equals the mean
        }
        OracleOutcome { picks, regret }
    }
}

/// Criterion 8: on 50 random instances with N <= 12, T <= 32 and zero
/// noise, each policy's selection sequence matches an exhaustive
/// recomputation of every UCB score, and regret accounting matches the
/// enumerated optimum.
#[test]
fn criterion_8_bruteforce_oracle_equivalence() {
    let mut checked = 0usize;
    for seed in 0..50u64 {
        let n = 4 + (seed as usize) % 9;
        let p = 0.5 + 0.4 * ((seed as f64 * 0.61) % 1.0);
        let horizon = 8 + (seed as usize * 3) % 25;
        let mut cfg = paper_defaults(GraphSpec::Er { n, p }, horizon, 1);
        cfg.graph_seed = Some(seed);
        cfg.reward_seed = Some(seed.wrapping_add(99));
        cfg.reward = RewardSpec::Synth { sparsity: 1 + (seed as usize) % 3, c_max: 100.0 };
        cfg.noise_scale = 0.0;

        let instance = build_instance(&cfg, seed).unwrap();
        let spectrum = instance.shifted.base();
        for policy in PolicyKind::ALL {
            let traj = run_trajectory_on(&instance, &cfg, policy, seed).unwrap();
            let expected = oracle::run(
                &instance.graph,
                spectrum.eigenvalues(),
                spectrum.q(),
                instance.reward.node_rewards(),
                instance.reward.smoothness_budget(),
                policy,
                cfg.lambda,
                cfg.delta,
                cfg.noise_scale,
                horizon,
            );
            let picks: Vec<(usize, usize)> =
                traj.steps.iter().map(|s| (s.anchor, s.width)).collect();
            assert_eq!(
                picks, expected.picks,
                "selection mismatch: seed {seed}, {policy}, n {n}, T {horizon}"
            );
            let best = oracle::enumerated_optimum(instance.reward.node_rewards(), &instance.graph);
            assert!(
                (best - instance.best_reward).abs() < 1e-12,
                "optimum mismatch at seed {seed}"
            );
            for (step, expected_regret) in traj.steps.iter().zip(&expected.regret) {
                assert!(
                    (step.regret_cum - expected_regret).abs() <= 1e-9,
                    "regret mismatch: seed {seed}, {policy}, t {}",
                    step.t
                );
            }
            checked += 1;
        }
    }
    println!(
        "criterion 8 (brute-force oracle equivalence): PASS  {checked} trajectories matched exactly"
    );
}

/// Forest-data substitute: the ingest pipeline on synthetic labeled
/// blobs yields a smoothness certificate (quadratic form at most half
/// the permutation median) and a (graph, reward) pair that the
/// criterion-3 machinery consumes at N = 200 clusters.
#[test]
fn criterion_9_ingest_pipeline_substitute() {
    let points = synthetic_blobs(600, 4, 3, 0.3, 5);
    let (graph, rewards) = ingest_points(&points, 200, 10, "L0", 2).unwrap();
    assert_eq!(graph.num_nodes(), 200);
    assert!(graph.min_degree() >= 10);

    // Smoothness certificate: f'Lf against the median over 100 random
    // permutations of f.
    let l = graph.laplacian();
    let quad = |f: &DVector<f64>| (f.transpose() * &l * f)[(0, 0)];
    let actual = quad(&rewards);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut perm_values: Vec<f64> = (0..100)
        .map(|_| {
            let mut shuffled: Vec<f64> = rewards.iter().copied().collect();
            shuffled.shuffle(&mut rng);
            quad(&DVector::from_vec(shuffled))
        })
        .collect();
    perm_values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let median = 0.5 * (perm_values[49] + perm_values[50]);
    assert!(
        actual <= 0.5 * median,
        "quadratic form {actual} exceeds half the permutation median {median}"
    );

    // Feed the pair through the experiment machinery.
    let dir = tempfile::tempdir().unwrap();
    let graph_path = dir.path().join("graph.edgelist");
    graph.write_edge_list(&graph_path).unwrap();
    let rewards_path = dir.path().join("rewards.csv");
    write_reward_csv(&rewards_path, &rewards).unwrap();

    let mut cfg = paper_defaults(GraphSpec::File { path: graph_path }, 100, 3);
    cfg.reward = RewardSpec::File { path: rewards_path };
    let trajectories = run_experiment(&cfg).unwrap();
    assert_eq!(trajectories.len(), 9);
    assert_log_det_bound(&trajectories, "ingest substitute");
    for traj in &trajectories {
        if traj.policy != PolicyKind::CheapUcb {
            assert_eq!(traj.final_cost(), 100.0);
        } else {
            assert!(traj.final_cost() <= theorem_cost_bound(100));
        }
    }
    println!(
        "ingest substitute (smoothness certificate + pipeline): PASS  f'Lf = {actual:.4} <= 0.5 x median {median:.4}"
    );
}

/// The spec's wide-probe reward identity on disjoint cliques drives the
/// regret lower-bound fixture: all probes inside a clique are
/// indistinguishable, so the enumerated optimum equals the best node.
#[test]
fn lower_bound_fixture_collapses_to_cliques() {
    let g = generate_sbm(&[8, 8, 8, 8], 1.0, 0.0, 0);
    let shifted = g.spectral_decomposition().unwrap().into_shifted(0.01).unwrap();
    let rf = spectral_bandits::environment::synthesize_smooth_reward(&shifted, 4, 100.0, 0.0, 3)
        .unwrap();
    let f = rf.node_rewards();
    let best_node = (0..32).map(|i| f[i]).fold(f64::NEG_INFINITY, f64::max);
    let best = spectral_bandits::environment::best_probe(&rf, &g);
    assert!((probe_reward(&rf, &best) - best_node).abs() < 1e-9);
    println!("lower-bound fixture: PASS  clique probes collapse to {} distinct arms", 4);
}

/// Edge-list artifacts round-trip bit-exactly (used by criteria 1 and 9).
#[test]
fn edge_list_round_trip_is_bit_exact() {
    let g = generate_sbm(&[10, 10], 0.8, 0.1, 3);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("g.edgelist");
    g.write_edge_list(&path).unwrap();
    let text_a = std::fs::read_to_string(&path).unwrap();
    let parsed = Graph::read_edge_list(&path).unwrap();
    assert_eq!(parsed.to_edge_list_string(), text_a);
    assert_eq!(parsed.edges(), g.edges());
    println!("edge-list round trip: PASS");
}
