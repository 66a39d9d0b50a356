//! Experiment harness: configuration, seeded training with checkpoints,
//! batch evaluation, report generation and the cost table.

mod config;
mod eval;
mod train;

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

pub use config::{ExperimentConfig, Preset};
pub use eval::{
    evaluate, read_jsonl, run_trial, trial_seed, write_jsonl, AgentPolicy, EvalSpec, OraclePolicy, Policy, RandomPolicy,
    TrajectoryLine,
};
pub use train::{checkpoint_name, mix_seed, run_dir, train, RunLog, TrainState, TrainSummary};

use crate::env::EnvConfig;
use crate::error::{Error, Result};
use crate::metrics::{build_report, MetricReport, ReportOptions, TrialRecord};
use crate::nn::{CostReport, Phase};
use crate::rl::Agent;

pub const TRIALS_FILE: &str = "trials.jsonl";
pub const TRAJECTORIES_FILE: &str = "trajectories.jsonl";

/// Evaluate a checkpoint and write trial and trajectory files into `out`.
/// A supplied environment config must match the one trained with.
pub fn eval_checkpoint(
    checkpoint: &Path,
    trials_per_target: Option<u32>,
    env_override: Option<&EnvConfig>,
    out: &Path,
) -> Result<Vec<TrialRecord>> {
    let state = TrainState::load(checkpoint)?;
    if let Some(env) = env_override {
        if env != &state.config.env {
            return Err(Error::Checkpoint("environment config differs from the checkpoint's".into()));
        }
    }
    let spec = EvalSpec {
        method: state.config.method_label(),
        seed: state.seed,
        checkpoint: state.chunk,
        trials_per_target: trials_per_target.unwrap_or(state.config.trials_per_target),
        eval_seed: state.config.eval_seed,
    };
    let mut agent: Agent = state.agent;
    let mut traj = Vec::new();
    let records = evaluate(&state.config.env, &mut AgentPolicy(&mut agent), &spec, Some(&mut traj))?;
    fs::create_dir_all(out)?;
    write_jsonl(&out.join(TRIALS_FILE), &records)?;
    write_jsonl(&out.join(TRAJECTORIES_FILE), &traj)?;
    Ok(records)
}

/// Paths of the files written by [`write_report`].
#[derive(Debug, Clone, PartialEq)]
pub struct ReportFiles {
    pub json: PathBuf,
    pub summary: PathBuf,
    pub profile: PathBuf,
    pub poi: PathBuf,
}

pub fn load_trials(paths: &[PathBuf]) -> Result<Vec<TrialRecord>> {
    if paths.is_empty() {
        return Err(Error::Metric("no trial files given".into()));
    }
    let mut all = Vec::new();
    for p in paths {
        all.extend(read_jsonl::<TrialRecord>(p)?);
    }
    Ok(all)
}

/// Build the metric report from trial files and write it as JSON plus flat
/// CSV tables.
pub fn write_report(paths: &[PathBuf], opts: &ReportOptions, out: &Path) -> Result<(MetricReport, ReportFiles)> {
    let records = load_trials(paths)?;
    let report = build_report(&records, opts)?;
    fs::create_dir_all(out)?;
    let files = ReportFiles {
        json: out.join("report.json"),
        summary: out.join("summary.csv"),
        profile: out.join("profile.csv"),
        poi: out.join("poi.csv"),
    };
    fs::write(&files.json, serde_json::to_string_pretty(&report)?)?;
    fs::write(&files.summary, report.summary_csv()?)?;
    fs::write(&files.profile, report.profile_csv()?)?;
    fs::write(&files.poi, report.poi_csv()?)?;
    Ok((report, files))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CostTable {
    pub learning: CostReport,
    pub evaluation: CostReport,
}

/// Learning- and evaluation-phase cost of the configured agent.
pub fn cost_table(config: &ExperimentConfig) -> Result<CostTable> {
    let agent = Agent::new(config.agent_config()?, config.env.obs_mode.dim(), config.srl.clone(), 0)?;
    Ok(CostTable {
        learning: agent.cost(Phase::Learning),
        evaluation: agent.cost(Phase::Evaluation),
    })
}
