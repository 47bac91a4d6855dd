use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use chainda_core::sim::{self, SimConfig, TuneSpec};
use chainda_core::verify;

#[derive(Parser)]
#[command(name = "chainda", about = "Simulate and verify truthful dynamic double auctions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one mechanism on generated markets and write per-trial metrics.
    Simulate {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        mechanism: Option<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Overrides the trial count of the config.
        #[arg(long)]
        trials: Option<usize>,
    },
    /// Tune one parameter for mean allocative efficiency.
    Tune {
        #[arg(long)]
        param: String,
        /// Range as LO:HI.
        #[arg(long)]
        range: String,
        #[arg(long)]
        samples: usize,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        mechanism: Option<String>,
        #[arg(long, default_value_t = 3)]
        passes: usize,
        /// Markets per grid point.
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Run several mechanisms on the same markets and print a summary.
    Compare {
        /// Comma-separated mechanism names.
        #[arg(long, value_delimiter = ',')]
        mechanisms: Vec<String>,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Also write per-trial rows here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check truthfulness, balances, prices and strong no-trade validity.
    Verify {
        #[arg(long)]
        mechanism: String,
        #[arg(long, default_value_t = 200)]
        schedules: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

fn load(config: &Option<PathBuf>) -> Result<SimConfig> {
    match config {
        Some(p) => SimConfig::load(p).with_context(|| format!("reading {}", p.display())),
        None => Ok(SimConfig::default()),
    }
}

fn mechanism_name(cli: Option<String>, cfg: &SimConfig) -> Result<String> {
    match cli.or_else(|| cfg.mechanism.clone()) {
        Some(m) => Ok(m),
        None => bail!("no mechanism given on the command line or in the config"),
    }
}

fn parse_range(s: &str) -> Result<(f64, f64)> {
    let Some((lo, hi)) = s.split_once(':') else { bail!("range must look like LO:HI, got {s:?}") };
    Ok((lo.trim().parse()?, hi.trim().parse()?))
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Simulate { config, mechanism, seed, out, trials } => {
            let cfg = load(&config)?;
            let name = mechanism_name(mechanism, &cfg)?;
            let mechs = sim::mechanisms(&cfg, &[name.as_str()])?;
            let rows = sim::compare(&cfg.env, &mechs, trials.unwrap_or(cfg.trials), seed)?;
            sim::save_csv(&out, &rows).with_context(|| format!("writing {}", out.display()))?;
            for s in sim::summarize(&rows) {
                println!("{}", summary_line(&s));
            }
        }
        Command::Tune { param, range, samples, config, mechanism, passes, trials, seed } => {
            let cfg = load(&config)?;
            let name = mechanism_name(mechanism, &cfg)?;
            let (lo, hi) = parse_range(&range)?;
            let spec = TuneSpec { passes, ..TuneSpec::new(lo, hi, samples) };
            let tuned = sim::tune_param(&cfg, &name, &param, spec, trials.unwrap_or(cfg.trials), seed)?;
            for (i, pass) in tuned.passes.iter().enumerate() {
                println!("pass {}", i + 1);
                for p in pass {
                    println!("  {param}={:<12} alloc_eff={:.4} smoothed={:.4}", p.x, p.value, p.smoothed);
                }
            }
            println!("best {param}={}", tuned.best);
        }
        Command::Compare { mechanisms, config, trials, seed, out } => {
            if mechanisms.is_empty() {
                bail!("--mechanisms needs at least one name");
            }
            let cfg = load(&config)?;
            let names: Vec<&str> = mechanisms.iter().map(String::as_str).collect();
            let mechs = sim::mechanisms(&cfg, &names)?;
            let rows = sim::compare(&cfg.env, &mechs, trials.unwrap_or(cfg.trials), seed)?;
            if let Some(out) = out {
                sim::save_csv(&out, &rows)?;
            }
            println!("{:<16} {:>18} {:>18} {:>18}", "mechanism", "alloc_eff", "net_eff", "revenue");
            for s in sim::summarize(&rows) {
                println!("{}", summary_line(&s));
            }
        }
        Command::Verify { mechanism, schedules, seed, report, config } => {
            let cfg = load(&config)?;
            let mech = sim::mechanisms(&cfg, &[mechanism.as_str()])?.remove(0);
            let results = verify::verify_mechanism(&mech, &cfg.env, schedules, seed)?;
            let mut sink: Box<dyn Write> = match &report {
                Some(p) => Box::new(BufWriter::new(File::create(p)?)),
                None => Box::new(io::stdout()),
            };
            for r in &results {
                writeln!(sink, "{r}")?;
            }
            sink.flush()?;
            if report.is_some() {
                for r in &results {
                    println!("{} {} {}", if r.passed() { "PASS" } else { "FAIL" }, r.property, r.mechanism);
                }
            }
            if results.iter().any(|r| !r.passed()) {
                std::process::exit(1);
            }
        }
    }
    Ok(())
}

fn summary_line(s: &sim::Summary) -> String {
    let f = |e: &sim::Estimate| match e.se {
        Some(se) => format!("{:.4} ± {:.4}", e.mean, se),
        None => format!("{:.4}", e.mean),
    };
    format!("{:<16} {:>18} {:>18} {:>18}", s.mechanism, f(&s.alloc_eff), f(&s.net_eff), f(&s.revenue))
}
