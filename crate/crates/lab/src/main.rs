use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use risnet_lab::experiment::{run_cases, run_experiment, Case};
use risnet_lab::trace::SlotInstance;
use risnet_lab::{LabError, ScenarioConfig};

/// RIS-aided HetNet sleep-control experiments.
#[derive(Parser)]
#[command(name = "risnet", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Scenario file (`key = value` per line); defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Comma-separated seed list.
    #[arg(long)]
    seeds: Option<String>,
    /// Training episodes (days) per run.
    #[arg(long)]
    episodes: Option<String>,
    /// Comma-separated per-UE peak demand sweep, Mbps.
    #[arg(long = "peak-load")]
    peak_load: Option<String>,
}

#[derive(Args)]
struct TraceArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    /// Slot seed.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Write the CSV here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// {sleep, no-sleep} x {RIS, no-RIS}.
    Ablation4(Common),
    /// FP vs. surrogate vs. no RIS under Co-HDRL sleep control.
    #[command(name = "ris_compare", alias = "ris-compare")]
    RisCompare(Common),
    /// Co-HDRL vs. HDRL with FP phase control.
    #[command(name = "learner_compare", alias = "learner-compare")]
    LearnerCompare(Common),
    /// Single case taken verbatim from the scenario file.
    Run(Common),
    /// FP objective per iteration on one seeded slot.
    FpTrace(TraceArgs),
    /// Surrogate evaluations on one seeded slot.
    SurrogateTrace(TraceArgs),
    /// Print the fully resolved scenario.
    EchoConfig {
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

fn load(path: Option<&PathBuf>) -> Result<ScenarioConfig, LabError> {
    path.map_or_else(|| Ok(ScenarioConfig::default()), |p| ScenarioConfig::from_file(p))
}

fn resolve(common: &Common, experiment: Option<&str>) -> Result<ScenarioConfig, LabError> {
    let mut cfg = load(common.config.as_ref())?;
    let overrides = [("experiment", experiment), ("seeds", common.seeds.as_deref()), ("episodes", common.episodes.as_deref()), ("peak_load", common.peak_load.as_deref())];
    for (key, value) in overrides {
        if let Some(v) = value {
            cfg.set(key, v)?;
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

fn sink(out: Option<&PathBuf>) -> Result<Box<dyn Write>, LabError> {
    Ok(match out {
        Some(p) => Box::new(std::fs::File::create(p)?),
        None => Box::new(std::io::stdout().lock()),
    })
}

fn report(summary: &risnet_lab::experiment::Summary, out: &std::path::Path) {
    for c in &summary.cases {
        println!(
            "{:<14} peak {:>5} Mbps  EE {:.4} Mbit/J [{:.4}, {:.4}]  energy {:.3} MJ/day",
            c.case,
            c.peak_mbps,
            c.tail_mean_ee.mean * 1e-6,
            c.tail_mean_ee.ci95_low * 1e-6,
            c.tail_mean_ee.ci95_high * 1e-6,
            c.tail_energy_j.mean * 1e-6
        );
    }
    println!("run {} written to {}", &summary.run_hash[..12], out.display());
}

fn execute(cli: Cli) -> Result<(), LabError> {
    let trace_err = |e: risnet_core::Error| LabError::Runtime(e.to_string());
    match cli.command {
        Command::Ablation4(c) => report(&run_experiment(&resolve(&c, Some("ablation4"))?, &c.out)?.summary, &c.out),
        Command::RisCompare(c) => report(&run_experiment(&resolve(&c, Some("ris_compare"))?, &c.out)?.summary, &c.out),
        Command::LearnerCompare(c) => report(&run_experiment(&resolve(&c, Some("learner_compare"))?, &c.out)?.summary, &c.out),
        Command::Run(c) => {
            let cfg = resolve(&c, None)?;
            let s = &cfg.sim;
            let case = Case::new("run", s, s.sleep, s.ris, s.learner);
            report(&run_cases(&cfg, &[case], &c.out)?.summary, &c.out);
        }
        Command::FpTrace(t) => {
            let cfg = load(t.config.as_ref())?;
            let slot = SlotInstance::draw(&cfg.sim, t.seed).map_err(trace_err)?;
            let out = slot.fp(&cfg.sim.fp).map_err(trace_err)?;
            risnet_core::risfp::write_trace_csv(sink(t.out.as_ref())?, &out.solution)?;
        }
        Command::SurrogateTrace(t) => {
            let cfg = load(t.config.as_ref())?;
            let slot = SlotInstance::draw(&cfg.sim, t.seed).map_err(trace_err)?;
            let res = slot.surrogate(&cfg.sim.surrogate, t.seed).map_err(trace_err)?;
            risnet_core::rissurrogate::write_trace_csv(sink(t.out.as_ref())?, &res)?;
        }
        Command::EchoConfig { config } => print!("{}", load(config.as_ref())?.echo()),
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("risnet: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
