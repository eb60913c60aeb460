use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use maxwave_core::explab::{emit_report, run_experiment, verify_suite, Check, ExperimentConfig, ExperimentId, ScalingRun};

#[derive(Parser)]
#[command(name = "maxwave", version, about = "Scaling experiments for the free Schrodinger flow")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment and write `<id>.csv` and `<id>.json`.
    Run {
        /// Experiment id, as printed by `list`. Optional with --config.
        experiment: Option<ExperimentId>,
        /// Comma-separated dyadic scales.
        #[arg(long, value_delimiter = ',')]
        scales: Option<Vec<u32>>,
        /// Seeds for random data; repeat or separate with commas.
        #[arg(long, value_delimiter = ',')]
        seed: Option<Vec<u64>>,
        #[arg(long)]
        dt: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// JSON config; command-line flags take precedence.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// List experiments and the estimates they probe.
    List,
    /// Run the fast invariant checks.
    Verify,
}

fn build_config(
    experiment: Option<ExperimentId>,
    scales: Option<Vec<u32>>,
    seed: Option<Vec<u64>>,
    dt: Option<f64>,
    out: Option<PathBuf>,
    config: Option<PathBuf>,
) -> Result<ExperimentConfig> {
    let mut c = match (&config, experiment) {
        (Some(p), _) => ExperimentConfig::load(p).with_context(|| format!("reading config {}", p.display()))?,
        (None, Some(id)) => ExperimentConfig::new(id),
        (None, None) => anyhow::bail!("an experiment id or --config is required"),
    };
    if let Some(id) = experiment {
        if config.is_some() && id != c.experiment {
            c.scales = id.default_scales();
        }
        c.experiment = id;
    }
    if let Some(s) = scales {
        c.scales = s;
    }
    if let Some(s) = seed {
        c.seeds = s;
    }
    if dt.is_some() {
        c.dt = dt;
    }
    if out.is_some() {
        c.out = out;
    }
    c.validate()?;
    Ok(c)
}

fn print_check(c: &Check) {
    let bound = match (c.lo, c.hi) {
        (Some(lo), Some(hi)) => format!("in [{lo}, {hi}]"),
        (Some(lo), None) => format!(">= {lo}"),
        (None, Some(hi)) => format!("<= {hi}"),
        (None, None) => String::new(),
    };
    println!("  {:<48} {:>12.4e} {:<16} {}", c.name, c.value, bound, if c.pass { "ok" } else { "FAIL" });
}

fn print_run(run: &ScalingRun) {
    println!("{}: {}", run.experiment, run.reference.inequality);
    let w = &run.window;
    for s in &run.series {
        println!("  series {}", s.name);
        for r in &s.records {
            println!("    scale {:>4}  lhs {:>12.6e}  normalizer {:>12.6e}  ratio {:>12.6e}", r.scale, r.lhs, r.normalizer, r.ratio);
        }
        let judged = if w.is_open() { "" } else if s.pass { " ok" } else { " FAIL" };
        println!("    alpha {:.4}  residual {:.4}{}", s.fit.alpha, s.fit.residual, judged);
    }
    if !w.is_open() {
        let f = |v: Option<f64>| v.map_or("-".to_string(), |x| x.to_string());
        println!("  window [{}, {}], residual below {}", f(w.lo), f(w.hi), f(w.residual));
    }
    run.checks.iter().for_each(print_check);
    println!("{}", if run.pass { "PASS" } else { "FAIL" });
}

fn execute(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::List => {
            for id in ExperimentId::ALL {
                let r = id.reference();
                let e = r.exponent.map_or("-".to_string(), |a| a.to_string());
                let scales: Vec<String> = id.default_scales().iter().map(u32::to_string).collect();
                println!("{:<20} exponent {:<5} {:<12} scales {}", id, e, serde_json::to_string(&r.kind)?.trim_matches('"'), scales.join(","));
                println!("    {}", r.inequality);
            }
            Ok(true)
        }
        Command::Verify => {
            let checks = verify_suite()?;
            checks.iter().for_each(print_check);
            let pass = checks.iter().all(|c| c.pass);
            println!("{}", if pass { "PASS" } else { "FAIL" });
            Ok(pass)
        }
        Command::Run { experiment, scales, seed, dt, out, config } => {
            let c = build_config(experiment, scales, seed, dt, out, config)?;
            let run = run_experiment(&c)?;
            print_run(&run);
            let dir = c.out.clone().unwrap_or_else(|| PathBuf::from("results"));
            let (csv, json) = emit_report(&run, &dir)?;
            println!("wrote {} and {}", csv.display(), json.display());
            Ok(run.pass)
        }
    }
}

fn main() -> ExitCode {
    // usage errors exit with 1; 2 is reserved for tolerance failures
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
