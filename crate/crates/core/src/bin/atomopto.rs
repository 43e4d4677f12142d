use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use atomopto::config::{OutputFormat, RunConfig, Task};
use atomopto::run;
use atomopto::{Error, Result};

#[derive(Parser)]
#[command(name = "atomopto", version, about = "Squeezing and conditional states of a hybrid atom-optomechanical cavity")]
struct Cli {
    #[command(subcommand)]
    verb: Verb,
    /// JSON run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; overrides `output.dir` in the config.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Worker threads for sweeps and spectra.
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand, Clone, Copy)]
enum Verb {
    Steady,
    Sweep,
    Wigner,
    Spectrum,
    StabilityMap,
    OptimizePower,
}

#[derive(ValueEnum, Clone, Copy)]
enum Format {
    Csv,
    Json,
}

impl Verb {
    fn task(self) -> Task {
        match self {
            Verb::Steady => Task::Steady,
            Verb::Sweep => Task::Sweep,
            Verb::Wigner => Task::Wigner,
            Verb::Spectrum => Task::Spectrum,
            Verb::StabilityMap => Task::StabilityMap,
            Verb::OptimizePower => Task::OptimizePower,
        }
    }

    fn stem(self) -> &'static str {
        match self {
            Verb::Steady => "steady",
            Verb::Sweep => "sweep",
            Verb::Wigner => "wigner",
            Verb::Spectrum => "spectrum",
            Verb::StabilityMap => "stability_map",
            Verb::OptimizePower => "optimize_power",
        }
    }
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    std::fs::create_dir_all(dir)?;
    Ok(BufWriter::new(File::create(dir.join(name))?))
}

fn write_json<T: serde::Serialize>(dir: &Path, name: &str, value: &T) -> Result<()> {
    let mut f = create(dir, name)?;
    serde_json::to_writer_pretty(&mut f, value)?;
    writeln!(f)?;
    f.flush()?;
    Ok(())
}

fn print_summary<T: serde::Serialize>(value: &T) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn execute(cli: &Cli) -> Result<()> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| Error::Config("--config <path> is required".into()))?;
    let mut cfg = RunConfig::load(path)?;
    cfg.task = cli.verb.task();
    cfg.validate()?;
    if let Some(f) = cli.format {
        cfg.output.format = match f {
            Format::Csv => OutputFormat::Csv,
            Format::Json => OutputFormat::Json,
        };
    }
    let dir = cli.out.clone().or_else(|| cfg.output.dir.as_ref().map(PathBuf::from));
    let json = cfg.output.format == OutputFormat::Json;
    let stem = cli.verb.stem();

    match cli.verb {
        Verb::Steady => {
            let r = run::run_steady(&cfg)?;
            if let Some(dir) = &dir {
                if json {
                    write_json(dir, &format!("{stem}.json"), &r)?;
                } else {
                    let mut f = create(dir, &format!("{stem}.csv"))?;
                    r.write_csv(&mut f)?;
                    f.flush()?;
                }
            }
            print_summary(&r)?;
        }
        Verb::Sweep | Verb::StabilityMap => {
            let r = if matches!(cli.verb, Verb::Sweep) {
                run::run_sweep(&cfg)?
            } else {
                run::stability_map(&cfg)?
            };
            if let Some(dir) = &dir {
                if json {
                    write_json(dir, &format!("{stem}.json"), &r)?;
                } else {
                    let mut f = create(dir, &format!("{stem}.csv"))?;
                    r.write_csv(&mut f)?;
                    f.flush()?;
                }
            }
            let stable = r.records.iter().filter(|x| x.stable).count();
            print_summary(&serde_json::json!({
                "points": r.records.len(),
                "stable": stable,
                "metadata": r.metadata,
            }))?;
        }
        Verb::Wigner => {
            let (summary, grid) = run::run_wigner(&cfg)?;
            if let Some(dir) = &dir {
                if json {
                    let mut f = create(dir, &format!("{stem}.json"))?;
                    grid.write_json(&mut f, summary.s.unwrap_or(0), summary.probability)?;
                    f.flush()?;
                } else {
                    let mut f = create(dir, &format!("{stem}.csv"))?;
                    grid.write_csv(&mut f)?;
                    f.flush()?;
                }
                write_json(dir, &format!("{stem}_summary.json"), &summary)?;
            }
            print_summary(&summary)?;
        }
        Verb::Spectrum => {
            let (summary, result) = run::run_spectrum(&cfg)?;
            if let Some(dir) = &dir {
                if json {
                    write_json(dir, &format!("{stem}.json"), &result)?;
                } else {
                    let mut f = create(dir, &format!("{stem}.csv"))?;
                    result.write_csv(&mut f)?;
                    f.flush()?;
                }
            }
            print_summary(&summary)?;
        }
        Verb::OptimizePower => {
            let r = run::run_optimize_power(&cfg)?;
            if let Some(dir) = &dir {
                write_json(dir, &format!("{stem}.json"), &r)?;
            }
            print_summary(&r)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot set thread count: {e}");
            return ExitCode::from(2);
        }
    }
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if let Error::Unstable { eigenvalues, .. } = &e {
                for z in eigenvalues {
                    eprintln!("  eigenvalue {:+.6e} {:+.6e}i", z.re, z.im);
                }
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
