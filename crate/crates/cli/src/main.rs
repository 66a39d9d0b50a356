use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use ogn_core::harness::{
    cost_table, eval_checkpoint, evaluate, train, write_jsonl, write_report, EvalSpec, ExperimentConfig, OraclePolicy,
    Policy, Preset, RandomPolicy, TrainState, TRAJECTORIES_FILE, TRIALS_FILE,
};
use ogn_core::metrics::ReportOptions;
use ogn_core::rl::Algorithm;
use walkdir::WalkDir;

#[derive(Parser)]
#[command(name = "ogn", version, about = "Train, evaluate and report quadcopter navigation agents")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum PresetArg {
    Paper,
    Desk,
}

impl From<PresetArg> for Preset {
    fn from(p: PresetArg) -> Self {
        match p {
            PresetArg::Paper => Preset::Paper,
            PresetArg::Desk => Preset::Desk,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ScriptedPolicy {
    Oracle,
    Random,
}

#[derive(clap::Args)]
struct ConfigArgs {
    /// Experiment config (TOML); values not given fall back to the preset.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "desk")]
    preset: PresetArg,
}

impl ConfigArgs {
    fn load(&self) -> Result<ExperimentConfig> {
        let base = self.preset.into();
        let cfg = match &self.config {
            Some(p) => ExperimentConfig::load(p, base).with_context(|| format!("loading {}", p.display()))?,
            None => ExperimentConfig::preset(base),
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Train one seed, or every configured seed, writing checkpoints and run logs.
    Train {
        #[command(flatten)]
        config: ConfigArgs,
        /// Train only this seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Continue from a checkpoint instead of starting fresh.
        #[arg(long)]
        resume: Option<PathBuf>,
    },
    /// Evaluate a checkpoint, or a scripted policy, over every target.
    Eval {
        #[arg(long, required_unless_present = "policy")]
        checkpoint: Option<PathBuf>,
        /// Scripted policy to evaluate instead of a checkpoint.
        #[arg(long, value_enum, conflicts_with = "checkpoint")]
        policy: Option<ScriptedPolicy>,
        /// Config whose environment must match the checkpoint's, or that
        /// sets up the environment of a scripted policy.
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(long)]
        trials_per_target: Option<u32>,
        /// Seed recorded for a scripted policy; also drives the random one.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output directory; defaults next to the checkpoint.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Aggregate trial files (or directories holding them) into metric tables.
    Report {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        #[arg(long, default_value = "report")]
        out: PathBuf,
        /// Method whose best trial return normalizes all scores.
        #[arg(long, default_value = "td3")]
        reference: String,
        #[arg(long, default_value_t = 2000)]
        resamples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Print learning and evaluation cost of the configured agent.
    Cost {
        #[command(flatten)]
        config: ConfigArgs,
        /// Override the configured algorithm.
        #[arg(long)]
        algorithm: Option<Algorithm>,
        /// Emit JSON instead of a table.
        #[arg(long)]
        json: bool,
    },
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Train {
            config,
            seed,
            out,
            resume,
        } => cmd_train(&config, seed, &out, resume.as_deref()),
        Command::Eval {
            checkpoint,
            policy,
            config,
            trials_per_target,
            seed,
            out,
        } => match (checkpoint, policy) {
            (Some(ckpt), _) => cmd_eval(&ckpt, &config, trials_per_target, out),
            (None, Some(p)) => cmd_eval_scripted(p, &config, trials_per_target, seed, out),
            (None, None) => bail!("either --checkpoint or --policy is required"),
        },
        Command::Report {
            inputs,
            out,
            reference,
            resamples,
            seed,
        } => cmd_report(&inputs, &out, reference, resamples, seed),
        Command::Cost { config, algorithm, json } => cmd_cost(&config, algorithm, json),
    }
}

fn cmd_train(args: &ConfigArgs, seed: Option<u64>, out: &Path, resume: Option<&Path>) -> Result<()> {
    if let Some(path) = resume {
        let state = TrainState::load(path).with_context(|| format!("loading {}", path.display()))?;
        let (cfg, seed) = (state.config.clone(), state.seed);
        let t = Instant::now();
        let s = train(&cfg, seed, out, Some(state))?;
        println!("{} seed {seed}: {} steps, {} runs, {:.1}s", cfg.method_label(), s.steps, s.runs, t.elapsed().as_secs_f64());
        return Ok(());
    }
    let cfg = args.load()?;
    let seeds = match seed {
        Some(s) => vec![s],
        None => cfg.seeds.clone(),
    };
    for s in seeds {
        let t = Instant::now();
        let summary = train(&cfg, s, out, None)?;
        println!(
            "{} seed {s}: {} steps, {} runs, {} checkpoints in {} ({:.1}s)",
            cfg.method_label(),
            summary.steps,
            summary.runs,
            summary.checkpoints.len(),
            summary.dir.display(),
            t.elapsed().as_secs_f64()
        );
    }
    Ok(())
}

fn print_eval(label: &str, records: &[ogn_core::metrics::TrialRecord], out: &Path) -> Result<()> {
    let sr = ogn_core::metrics::success_rate(records)?;
    let spl = ogn_core::metrics::spl(records)?;
    println!("{label}: {} trials, success rate {sr:.3}, SPL {spl:.3} -> {}", records.len(), out.display());
    Ok(())
}

fn cmd_eval(ckpt: &Path, args: &ConfigArgs, tpt: Option<u32>, out: Option<PathBuf>) -> Result<()> {
    let env = match &args.config {
        Some(_) => Some(args.load()?.env),
        None => None,
    };
    let out = match out {
        Some(o) => o,
        None => {
            let stem = ckpt.file_stem().and_then(|s| s.to_str()).unwrap_or("checkpoint");
            ckpt.parent().unwrap_or(Path::new(".")).join(format!("eval_{stem}"))
        }
    };
    let records = eval_checkpoint(ckpt, tpt, env.as_ref(), &out)?;
    print_eval(&ckpt.display().to_string(), &records, &out)
}

fn cmd_eval_scripted(p: ScriptedPolicy, args: &ConfigArgs, tpt: Option<u32>, seed: u64, out: Option<PathBuf>) -> Result<()> {
    let cfg = args.load()?;
    let discrete = cfg.algorithm.is_discrete();
    let (label, mut policy): (&str, Box<dyn Policy>) = match p {
        ScriptedPolicy::Oracle => ("oracle", Box::new(OraclePolicy::default())),
        ScriptedPolicy::Random if discrete => ("random-discrete", Box::new(RandomPolicy::new(seed, true))),
        ScriptedPolicy::Random => ("random", Box::new(RandomPolicy::new(seed, false))),
    };
    let spec = EvalSpec {
        method: label.into(),
        seed,
        checkpoint: cfg.chunks,
        trials_per_target: tpt.unwrap_or(cfg.trials_per_target),
        eval_seed: cfg.eval_seed,
    };
    let out = out.unwrap_or_else(|| PathBuf::from("out").join(label).join(format!("seed_{seed}")));
    let mut traj = Vec::new();
    let records = evaluate(&cfg.env, policy.as_mut(), &spec, Some(&mut traj))?;
    fs::create_dir_all(&out)?;
    write_jsonl(&out.join(TRIALS_FILE), &records)?;
    write_jsonl(&out.join(TRAJECTORIES_FILE), &traj)?;
    print_eval(label, &records, &out)
}

/// Trial files below `root`, in sorted order.
fn collect_trials(root: &Path, acc: &mut Vec<PathBuf>) -> Result<()> {
    for entry in WalkDir::new(root).sort_by_file_name() {
        let entry = entry.with_context(|| format!("reading {}", root.display()))?;
        // an explicitly named file is taken whatever its name
        if entry.file_type().is_file() && (entry.depth() == 0 || entry.file_name() == TRIALS_FILE) {
            acc.push(entry.into_path());
        }
    }
    Ok(())
}

fn cmd_report(inputs: &[PathBuf], out: &Path, reference: String, resamples: usize, seed: u64) -> Result<()> {
    let mut files = Vec::new();
    for i in inputs {
        collect_trials(i, &mut files)?;
    }
    if files.is_empty() {
        bail!("no {TRIALS_FILE} files found");
    }
    let opts = ReportOptions {
        reference_method: reference,
        resamples,
        seed,
        ..ReportOptions::default()
    };
    let (report, written) = write_report(&files, &opts, out)?;
    println!(
        "{:<14} {:>5} {:>8} {:>19} {:>6} {:>6} {:>6}",
        "method", "ckpt", "iqm", "95% ci", "sr", "spl", "dts"
    );
    for r in &report.summaries {
        let ci = match (r.iqm_low, r.iqm_high) {
            (Some(lo), Some(hi)) => format!("[{lo:.3}, {hi:.3}]"),
            _ => "-".into(),
        };
        println!(
            "{:<14} {:>5} {:>8.3} {:>19} {:>6.3} {:>6.3} {:>6.3}",
            r.method, r.checkpoint, r.iqm, ci, r.success_rate, r.spl_mean, r.dts_mean
        );
    }
    println!("{} trial files -> {}", files.len(), written.json.parent().unwrap_or(out).display());
    Ok(())
}

fn cmd_cost(args: &ConfigArgs, algorithm: Option<Algorithm>, json: bool) -> Result<()> {
    let mut cfg = args.load()?;
    if let Some(a) = algorithm {
        cfg.algorithm = a;
    }
    let t = cost_table(&cfg)?;
    if json {
        println!("{}", serde_json::to_string_pretty(&t)?);
        return Ok(());
    }
    println!("{:<12} {:>8} {:>10} {:>10}", "method", "phase", "flops", "params");
    let label = cfg.method_label();
    println!("{label:<12} {:>8} {:>10} {:>10}", "learning", t.learning.flops, t.learning.params);
    println!("{label:<12} {:>8} {:>10} {:>10}", "eval", t.evaluation.flops, t.evaluation.params);
    Ok(())
}
