use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use dcckp::dynamics::{build_schedule, save_schedule};
use dcckp::harness::{
    emit_results, load_config, load_results, plot_export, run_experiments, save_config, summarize,
    summarize_rows, write_plot, OutputFormat, RunConfig, Summary,
};
use dcckp::model::{generate_instance, save_instance, InstanceClass, VarianceRegime};

#[derive(Parser)]
#[command(
    name = "dcckp",
    version,
    about = "Dynamic chance-constrained knapsack experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a benchmark instance file.
    GenInstance {
        #[arg(long, default_value = "uncorr")]
        class: InstanceClass,
        #[arg(long, default_value_t = 100)]
        n: usize,
        #[arg(long, default_value = "V1")]
        regime: VarianceRegime,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output file; standard output when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate a capacity schedule file.
    GenSchedule {
        /// Initial capacity; defaults to 2r.
        #[arg(long)]
        b0: Option<f64>,
        #[arg(long, default_value_t = 500.0)]
        r: f64,
        #[arg(long, default_value_t = 2000)]
        t: u64,
        #[arg(long, default_value_t = 50)]
        nu: usize,
        /// Band half-width; defaults to r.
        #[arg(long)]
        eta: Option<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run experiments and write result tables.
    Run(Box<RunArgs>),
    /// Recompute mean and SD of E per cell from results CSV files.
    Summarize {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        /// Write the summary table here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write the tidy plotting table (algorithm, formulation, alpha, mean_E, sd_E) from results CSV files.
    PlotExport {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
}

/// Every config key is also a flag; flags override the config file.
#[derive(Args)]
struct RunArgs {
    /// key=value config file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    instance_class: Option<String>,
    #[arg(long)]
    n: Option<String>,
    #[arg(long)]
    regime: Option<String>,
    #[arg(long)]
    instance_seed: Option<String>,
    #[arg(long)]
    instance_file: Option<String>,
    /// obj2, obj3 or a comma list.
    #[arg(long)]
    formulation: Option<String>,
    /// gsemo, moead_ws, moead_te, moead_pbi or a comma list.
    #[arg(long)]
    algorithm: Option<String>,
    /// Comma list of levels, e.g. 0.99,1-1e-4.
    #[arg(long)]
    alphas: Option<String>,
    #[arg(long)]
    alpha_low: Option<String>,
    #[arg(long)]
    alpha_high: Option<String>,
    #[arg(long)]
    b0: Option<String>,
    #[arg(long)]
    r: Option<String>,
    #[arg(long)]
    t: Option<String>,
    #[arg(long)]
    nu: Option<String>,
    #[arg(long)]
    eta: Option<String>,
    #[arg(long)]
    schedule_seed: Option<String>,
    #[arg(long)]
    schedule_file: Option<String>,
    #[arg(long)]
    budget: Option<String>,
    #[arg(long)]
    population_size: Option<String>,
    #[arg(long)]
    repeats: Option<String>,
    #[arg(long)]
    algorithm_seed: Option<String>,
    #[arg(long)]
    theta: Option<String>,
    #[arg(long)]
    dp_cell_limit: Option<String>,
    /// Results CSV.
    #[arg(long, default_value = "results.csv")]
    out: PathBuf,
    /// Also write the results as JSON.
    #[arg(long)]
    json: Option<PathBuf>,
    /// Also write the plotting table.
    #[arg(long)]
    plot: Option<PathBuf>,
    /// Write the effective config (first cell) and exit without running.
    #[arg(long)]
    save_config: Option<PathBuf>,
}

impl RunArgs {
    fn overrides(&self) -> Vec<(&'static str, &str)> {
        let pairs = [
            ("instance_class", &self.instance_class),
            ("n", &self.n),
            ("regime", &self.regime),
            ("instance_seed", &self.instance_seed),
            ("instance_file", &self.instance_file),
            ("alphas", &self.alphas),
            ("alpha_low", &self.alpha_low),
            ("alpha_high", &self.alpha_high),
            ("b0", &self.b0),
            ("r", &self.r),
            ("t", &self.t),
            ("nu", &self.nu),
            ("eta", &self.eta),
            ("schedule_seed", &self.schedule_seed),
            ("schedule_file", &self.schedule_file),
            ("budget", &self.budget),
            ("population_size", &self.population_size),
            ("repeats", &self.repeats),
            ("algorithm_seed", &self.algorithm_seed),
            ("theta", &self.theta),
            ("dp_cell_limit", &self.dp_cell_limit),
        ];
        pairs
            .into_iter()
            .filter_map(|(k, v)| v.as_deref().map(|v| (k, v)))
            .collect()
    }

    /// One config per (formulation, algorithm) pair; all share seeds and schedules.
    fn configs(&self) -> Result<Vec<RunConfig>> {
        let mut base = match &self.config {
            Some(path) => load_config(path)?,
            None => RunConfig::default(),
        };
        for (key, value) in self.overrides() {
            base.set(key, value)
                .with_context(|| format!("--{}", key.replace('_', "-")))?;
        }
        let list = |v: &Option<String>, current: String| -> Vec<String> {
            v.as_deref()
                .unwrap_or(&current)
                .split(',')
                .map(|s| s.trim().to_string())
                .filter(|s| !s.is_empty())
                .collect()
        };
        let formulations = list(&self.formulation, base.formulation.to_string());
        let algorithms = list(&self.algorithm, base.algorithm.to_string());
        if formulations.is_empty() || algorithms.is_empty() {
            bail!("--formulation and --algorithm must name at least one value");
        }
        let mut cfgs = Vec::new();
        for f in &formulations {
            for a in &algorithms {
                let mut cfg = base.clone();
                cfg.set("formulation", f)?;
                cfg.set("algorithm", a)?;
                cfg.validate()?;
                cfgs.push(cfg);
            }
        }
        Ok(cfgs)
    }
}

fn write_text(out: Option<&PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(path) => {
            std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
        }
        None => Ok(io::stdout().write_all(text.as_bytes())?),
    }
}

fn load_summaries(inputs: &[PathBuf]) -> Result<Vec<Summary>> {
    let mut rows = Vec::new();
    for path in inputs {
        rows.extend(load_results(path)?);
    }
    let summaries = summarize_rows(&rows);
    if summaries.is_empty() {
        bail!("no detail rows found in the inputs");
    }
    Ok(summaries)
}

fn summary_table(summaries: &[Summary]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "algorithm",
        "formulation",
        "instance_class",
        "n",
        "regime",
        "r",
        "t",
        "nu",
        "alpha",
        "runs",
        "mean_E",
        "sd_E",
    ])?;
    for s in summaries {
        w.write_record([
            s.algorithm.clone(),
            s.formulation.clone(),
            s.instance_class.clone(),
            s.n.to_string(),
            s.regime.clone(),
            format!("{:.9}", s.r),
            s.t.to_string(),
            s.nu.to_string(),
            s.alpha.to_string(),
            s.runs.to_string(),
            format!("{:.9}", s.mean_e),
            format!("{:.9}", s.sd_e),
        ])?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::GenInstance {
            class,
            n,
            regime,
            seed,
            out,
        } => {
            let inst = generate_instance(class, n, regime, seed)?;
            match out {
                Some(path) => save_instance(&inst, path)?,
                None => write_text(None, &inst.to_text())?,
            }
        }
        Command::GenSchedule {
            b0,
            r,
            t,
            nu,
            eta,
            seed,
            out,
        } => {
            let mut s = build_schedule(b0.unwrap_or(2.0 * r), r, t, nu, seed)?;
            if let Some(eta) = eta {
                s = s.with_eta(eta)?;
            }
            if s.clamp_events() > 0 {
                log::warn!(
                    "{} change(s) clamped at the capacity floor",
                    s.clamp_events()
                );
            }
            match out {
                Some(path) => save_schedule(&s, path)?,
                None => write_text(None, &s.to_text())?,
            }
        }
        Command::Run(args) => {
            let cfgs = args.configs()?;
            if let Some(path) = &args.save_config {
                save_config(&cfgs[0], path)?;
                return Ok(());
            }
            let runs = run_experiments(&cfgs)?;
            emit_results(&runs, OutputFormat::Csv, &args.out)?;
            if let Some(path) = &args.json {
                emit_results(&runs, OutputFormat::Json, path)?;
            }
            if let Some(path) = &args.plot {
                plot_export(&summarize(&runs), path)?;
            }
            log::info!(
                "wrote {} result series to {}",
                runs.len(),
                args.out.display()
            );
        }
        Command::Summarize { inputs, out } => {
            let table = summary_table(&load_summaries(&inputs)?)?;
            write_text(out.as_ref(), &table)?;
        }
        Command::PlotExport { inputs, out } => {
            let summaries = load_summaries(&inputs)?;
            let mut buf = Vec::new();
            write_plot(&summaries, &mut buf)?;
            std::fs::write(&out, buf).with_context(|| format!("writing {}", out.display()))?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
