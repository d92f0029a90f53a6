use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ssm_lab::output::ManifestStatus;
use ssm_lab::runs::{run_analytic, run_compare, run_gen, run_sweep, run_train};
use ssm_lab::{ExperimentConfig, LabError};

/// Learning-dynamics experiments for diagonal linear state-space models.
#[derive(Parser)]
#[command(name = "ssm-lab", version)]
struct Cli {
    /// Only print errors.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate the dataset and write data.csv.
    Gen(RunArgs),
    /// Run gradient-flow training and write trajectory.csv.
    Train(RunArgs),
    /// Evaluate a closed-form curve.
    Analytic(RunArgs),
    /// Train and compare against a closed form.
    Compare(RunArgs),
    /// Train once per value of a swept config field.
    Sweep(RunArgs),
    /// Check a config without running it.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Output directory; defaults to the config's outputs.directory, then
    /// runs/<name>.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override data.seed.
    #[arg(long)]
    seed: Option<u64>,
}

impl RunArgs {
    fn load(&self) -> Result<(ExperimentConfig, PathBuf), LabError> {
        let mut cfg = ExperimentConfig::load(&self.config)?;
        if let Some(seed) = self.seed {
            cfg.data.seed = Some(seed);
            cfg.validate()?;
        }
        let out = self
            .out
            .clone()
            .or_else(|| cfg.outputs.directory.clone())
            .unwrap_or_else(|| Path::new("runs").join(&cfg.name));
        Ok((cfg, out))
    }
}

fn say(quiet: bool, msg: impl AsRef<str>) {
    if !quiet {
        println!("{}", msg.as_ref());
    }
}

fn status_code(status: &ManifestStatus) -> i32 {
    match status {
        ManifestStatus::Completed => 0,
        ManifestStatus::Diverged { .. } => 2,
        ManifestStatus::Failed { .. } => 1,
    }
}

fn run(cli: &Cli) -> Result<i32, LabError> {
    let q = cli.quiet;
    let (cmd, args) = match &cli.command {
        Command::Validate { config } => {
            let cfg = ExperimentConfig::load(config)?;
            say(q, format!("ok: {} (config hash {})", cfg.name, cfg.hash()));
            return Ok(0);
        }
        Command::Gen(a) => ("gen", a),
        Command::Train(a) => ("train", a),
        Command::Analytic(a) => ("analytic", a),
        Command::Compare(a) => ("compare", a),
        Command::Sweep(a) => ("sweep", a),
    };
    let (cfg, out) = args.load()?;
    let manifest = match cmd {
        "gen" => {
            let o = run_gen(&cfg, &out)?;
            say(q, format!("generated {} samples", o.data.len()));
            o.manifest
        }
        "train" => {
            let o = run_train(&cfg, &out)?;
            let last = o.trajectory.last();
            say(
                q,
                format!(
                    "step {} t = {} loss = {:e} lambda = {}",
                    last.step, last.t, last.loss_freq, last.lambda
                ),
            );
            o.manifest
        }
        "analytic" => {
            let o = run_analytic(&cfg, &out)?;
            for c in &o.curves {
                say(q, format!("{} N = {}: limit {}", c.formula.name(), c.n, c.limit));
            }
            o.manifest
        }
        "compare" => {
            let o = run_compare(&cfg, &out)?;
            for r in &o.report.rows {
                say(
                    q,
                    format!(
                        "N = {}: sup {:e} rms {:e}{}",
                        r.n,
                        r.deviation.sup,
                        r.deviation.rms,
                        if r.mismatch { "  MISMATCH" } else { "" }
                    ),
                );
            }
            o.manifest
        }
        _ => {
            let o = run_sweep(&cfg, &out)?;
            for r in &o.report.rows {
                let t = r.time_to_alpha.map_or("-".into(), |t| t.to_string());
                say(q, format!("[{}] {} = {}: {:?} t_alpha = {t}", r.index, o.report.param, r.value, r.status));
            }
            let code = if o.report.any_failed() {
                1
            } else if o.report.any_diverged() {
                2
            } else {
                0
            };
            say(q, format!("wrote {}", out.display()));
            return Ok(code);
        }
    };
    if let ManifestStatus::Diverged { step, reason } = &manifest.status {
        eprintln!("diverged at step {step}: {reason}");
    }
    say(q, format!("wrote {}", out.display()));
    Ok(status_code(&manifest.status))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
