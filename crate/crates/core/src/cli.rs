//! Command-line front end: wires TOML configs to the generators, the
//! ingestion pipeline, experiment runs and CSV reports.
//!
//! The config is a flat key set (see [`RawConfig`]). Relative paths
//! inside a config resolve against the config file's directory.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Deserialize;

use crate::environment::write_reward_csv;
use crate::harness::{
    aggregate, build_graph, read_trajectories_csv, run_experiment, verify_trajectory, CostModel,
    ExperimentConfig, GraphSpec, RewardSpec,
};
use crate::ingest::{ingest_points, read_points_csv};
use crate::policies::PolicyKind;
use crate::{Error, Result};

pub const GRAPH_FILE: &str = "graph.edgelist";
pub const REWARDS_FILE: &str = "rewards.csv";
pub const TRAJECTORIES_FILE: &str = "trajectories.csv";
pub const SUMMARY_FILE: &str = "summary.csv";
pub const VERIFICATION_FILE: &str = "verification.txt";

/// The four front-end verbs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verb {
    /// Write an edge list for the configured graph.
    GenGraph,
    /// Run the points pipeline; write an edge list plus a reward CSV.
    Ingest,
    /// Execute the configured experiment; write trajectory and summary
    /// CSVs plus a verification report.
    Run,
    /// Recompute the summary CSV from an existing trajectory CSV.
    Report,
}

/// A parsed invocation.
#[derive(Debug, Clone)]
pub struct Command {
    pub verb: Verb,
    pub config: Option<PathBuf>,
    pub out: PathBuf,
    pub seed: Option<u64>,
    pub policies: Option<Vec<PolicyKind>>,
    pub runs: Option<usize>,
    pub cost_model: Option<CostModel>,
}

/// Flat config keys. Graph: `graph` (er|ba|sbm|file) with `n`, `p`, `m`,
/// `block_sizes`, `p_in`, `p_out`, `graph_path`, optional `graph_seed`.
/// Reward: `reward` (synth|file, default synth) with `k`, `c`,
/// `reward_path`, optional `reward_seed`. Experiment: `noise` (R, default
/// 0.01), `lambda` (default 0.01), `delta` (default 0.001), `horizon`,
/// `runs` (default 1), `base_seed` (default 0), `policies` (default all
/// three), `cost_model` (width|quadratic, default width). Ingest:
/// `points`, `clusters`, `knn`, `target_label`.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub graph: Option<String>,
    pub n: Option<usize>,
    pub p: Option<f64>,
    pub m: Option<usize>,
    pub block_sizes: Option<Vec<usize>>,
    pub p_in: Option<f64>,
    pub p_out: Option<f64>,
    pub graph_path: Option<PathBuf>,
    pub graph_seed: Option<u64>,

    pub reward: Option<String>,
    pub k: Option<usize>,
    pub c: Option<f64>,
    pub reward_path: Option<PathBuf>,
    pub reward_seed: Option<u64>,

    pub noise: Option<f64>,
    pub lambda: Option<f64>,
    pub delta: Option<f64>,
    pub horizon: Option<usize>,
    pub runs: Option<usize>,
    pub base_seed: Option<u64>,
    pub policies: Option<Vec<String>>,
    pub cost_model: Option<String>,

    pub points: Option<PathBuf>,
    pub clusters: Option<usize>,
    pub knn: Option<usize>,
    pub target_label: Option<String>,

    #[serde(skip)]
    base_dir: PathBuf,
}

fn require<T: Clone>(slot: &Option<T>, key: &str, context: &str) -> Result<T> {
    slot.clone()
        .ok_or_else(|| Error::Config(format!("{context} requires key `{key}`")))
}

impl RawConfig {
    pub fn parse(text: &str, base_dir: &Path) -> Result<Self> {
        let mut raw: RawConfig = toml::from_str(text)
            .map_err(|e| Error::Config(format!("malformed config: {e}")))?;
        raw.base_dir = base_dir.to_path_buf();
        Ok(raw)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        Self::parse(&text, base)
    }

    fn resolve(&self, path: &Path) -> PathBuf {
        if path.is_absolute() {
            path.to_path_buf()
        } else {
            self.base_dir.join(path)
        }
    }

    /// Graph portion of the config.
    pub fn graph_spec(&self) -> Result<GraphSpec> {
        let kind = require(&self.graph, "graph", "graph construction")?;
        match kind.as_str() {
            "er" => Ok(GraphSpec::Er {
                n: require(&self.n, "n", "graph = \"er\"")?,
                p: require(&self.p, "p", "graph = \"er\"")?,
            }),
            "ba" => Ok(GraphSpec::Ba {
                n: require(&self.n, "n", "graph = \"ba\"")?,
                m: require(&self.m, "m", "graph = \"ba\"")?,
            }),
            "sbm" => Ok(GraphSpec::Sbm {
                block_sizes: require(&self.block_sizes, "block_sizes", "graph = \"sbm\"")?,
                p_in: require(&self.p_in, "p_in", "graph = \"sbm\"")?,
                p_out: require(&self.p_out, "p_out", "graph = \"sbm\"")?,
            }),
            "file" => Ok(GraphSpec::File {
                path: self.resolve(&require(&self.graph_path, "graph_path", "graph = \"file\"")?),
            }),
            other => Err(Error::Config(format!(
                "unknown graph kind `{other}`; expected er, ba, sbm or file"
            ))),
        }
    }

    fn reward_spec(&self) -> Result<RewardSpec> {
        let kind = self.reward.clone().unwrap_or_else(|| "synth".into());
        match kind.as_str() {
            "synth" => Ok(RewardSpec::Synth {
                sparsity: require(&self.k, "k", "reward = \"synth\"")?,
                c_max: require(&self.c, "c", "reward = \"synth\"")?,
            }),
            "file" => Ok(RewardSpec::File {
                path: self
                    .resolve(&require(&self.reward_path, "reward_path", "reward = \"file\"")?),
            }),
            other => Err(Error::Config(format!(
                "unknown reward kind `{other}`; expected synth or file"
            ))),
        }
    }

    /// Full experiment config for `run`.
    pub fn experiment(&self) -> Result<ExperimentConfig> {
        let policies = match &self.policies {
            None => PolicyKind::ALL.to_vec(),
            Some(names) => names
                .iter()
                .map(|s| PolicyKind::from_str(s))
                .collect::<Result<Vec<_>>>()?,
        };
        let cost_model = match &self.cost_model {
            None => CostModel::Width,
            Some(s) => CostModel::from_str(s)?,
        };
        let cfg = ExperimentConfig {
            graph: self.graph_spec()?,
            graph_seed: self.graph_seed,
            reward: self.reward_spec()?,
            reward_seed: self.reward_seed,
            noise_scale: self.noise.unwrap_or(0.01),
            lambda: self.lambda.unwrap_or(0.01),
            delta: self.delta.unwrap_or(0.001),
            horizon: require(&self.horizon, "horizon", "run")?,
            runs: self.runs.unwrap_or(1),
            base_seed: self.base_seed.unwrap_or(0),
            policies,
            cost_model,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

fn load_config(cmd: &Command, context: &str) -> Result<RawConfig> {
    let path = cmd
        .config
        .as_ref()
        .ok_or_else(|| Error::Config(format!("{context} requires --config")))?;
    RawConfig::from_path(path)
}

fn ensure_out_dir(out: &Path) -> Result<()> {
    std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))
}

/// Executes one verb; artifacts land in `cmd.out`.
pub fn execute(cmd: &Command) -> Result<()> {
    ensure_out_dir(&cmd.out)?;
    match cmd.verb {
        Verb::GenGraph => {
            let raw = load_config(cmd, "gen-graph")?;
            let spec = raw.graph_spec()?;
            let seed = cmd.seed.or(raw.graph_seed).unwrap_or(0);
            let graph = build_graph(&spec, seed)?;
            let path = cmd.out.join(GRAPH_FILE);
            graph.write_edge_list(&path)?;
            println!(
                "wrote {} ({} nodes, {} edges, min degree {})",
                path.display(),
                graph.num_nodes(),
                graph.num_edges(),
                graph.min_degree()
            );
            Ok(())
        }
        Verb::Ingest => {
            let raw = load_config(cmd, "ingest")?;
            let points_path = raw.resolve(&require(&raw.points, "points", "ingest")?);
            let points = read_points_csv(&points_path)?;
            let clusters = require(&raw.clusters, "clusters", "ingest")?;
            let knn = require(&raw.knn, "knn", "ingest")?;
            let target = require(&raw.target_label, "target_label", "ingest")?;
            let seed = cmd.seed.or(raw.base_seed).unwrap_or(0);
            let (graph, rewards) = ingest_points(&points, clusters, knn, &target, seed)?;
            let graph_path = cmd.out.join(GRAPH_FILE);
            graph.write_edge_list(&graph_path)?;
            let rewards_path = cmd.out.join(REWARDS_FILE);
            write_reward_csv(&rewards_path, &rewards)?;
            println!(
                "wrote {} and {} ({} clusters from {} points)",
                graph_path.display(),
                rewards_path.display(),
                clusters,
                points.len()
            );
            Ok(())
        }
        Verb::Run => {
            let raw = load_config(cmd, "run")?;
            let mut cfg = raw.experiment()?;
            if let Some(seed) = cmd.seed {
                cfg.base_seed = seed;
            }
            if let Some(policies) = &cmd.policies {
                cfg.policies = policies.clone();
            }
            if let Some(runs) = cmd.runs {
                cfg.runs = runs;
            }
            if let Some(cost_model) = cmd.cost_model {
                cfg.cost_model = cost_model;
            }
            cfg.validate()?;

            let trajectories = run_experiment(&cfg)?;
            crate::harness::write_trajectories_csv(&cmd.out.join(TRAJECTORIES_FILE), &trajectories)?;
            let summary = aggregate(&trajectories)?;
            crate::harness::write_summary_csv(&cmd.out.join(SUMMARY_FILE), &summary)?;

            let mut report_text = String::new();
            let mut fatal = 0usize;
            let mut informational = 0usize;
            for traj in &trajectories {
                let report = verify_trajectory(traj, &cfg);
                for check in &report.checks {
                    if !check.passed {
                        if check.fatal {
                            fatal += 1;
                        } else {
                            informational += 1;
                        }
                    }
                }
                report_text.push_str(&report.to_string());
            }
            report_text.push_str(&format!(
                "summary: {} trajectories, {fatal} fatal failures, {informational} informational failures\n",
                trajectories.len()
            ));
            let verification_path = cmd.out.join(VERIFICATION_FILE);
            std::fs::write(&verification_path, &report_text)
                .map_err(|e| Error::io(&verification_path, e))?;

            println!(
                "ran {} policies x {} runs x T={} -> {}",
                cfg.policies.len(),
                cfg.runs,
                cfg.horizon,
                cmd.out.display()
            );
            if fatal > 0 {
                return Err(Error::InvariantBreach(format!(
                    "{fatal} fatal verification failures; see {}",
                    verification_path.display()
                )));
            }
            Ok(())
        }
        Verb::Report => {
            let trajectories = read_trajectories_csv(&cmd.out.join(TRAJECTORIES_FILE))?;
            let summary = aggregate(&trajectories)?;
            let path = cmd.out.join(SUMMARY_FILE);
            crate::harness::write_summary_csv(&path, &summary)?;
            println!("wrote {}", path.display());
            Ok(())
        }
    }
}
