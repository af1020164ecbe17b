use clap::{Args, Parser, Subcommand};
use spincat::harness::{run_command, verify_dir, write_artifact, Command, HarnessError, OutputFormat, RunConfig, RunContext};
use spincat::tomography::{DatasetFile, TomographyDataset};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "spincat", version, about = "Reproduce the cat-state figures and tables as data files")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Args, Clone)]
struct Common {
    /// JSON run configuration; built-in defaults when absent.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<OutputFormat>,
    /// Atoms per measurement setting (multinomial sampling).
    #[arg(long)]
    samples: Option<u64>,
}

#[derive(Subcommand)]
enum Sub {
    /// Collapse and revival curves (fig2, figS1).
    Evolve(Common),
    /// Equatorial scans and parity fit (fig3a, fig3c).
    Parity(Common),
    /// Non-linear Ramsey scans (fig3b, fig3c).
    Ramsey(Common),
    /// Hellinger-distance analysis and gain table (fig3d, tableS2).
    Hellinger(Common),
    /// Density-matrix reconstruction, Wigner function and dephasing (fig4, fig5).
    Tomo {
        #[command(flatten)]
        common: Common,
        /// Measured dataset to fit instead of synthetic data.
        #[arg(long)]
        dataset: Option<PathBuf>,
    },
    /// Imperfection budget (tableS1).
    Budget(Common),
    /// Re-check payload hashes against their sidecars.
    Verify {
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Print the default configuration.
    DefaultConfig,
}

fn load_config(common: &Common) -> Result<RunConfig, HarnessError> {
    let mut cfg = match &common.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if common.seed.is_some() {
        cfg.seed = common.seed;
    }
    if let Some(out) = &common.out {
        cfg.output_dir = out.clone();
    }
    if let Some(f) = common.format {
        cfg.format = f;
    }
    if common.samples.is_some() {
        cfg.atom_total = common.samples;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn load_dataset(path: &PathBuf) -> Result<TomographyDataset, HarnessError> {
    let text = std::fs::read_to_string(path).map_err(|e| HarnessError::Io(format!("{}: {e}", path.display())))?;
    let file: DatasetFile = serde_json::from_str(&text).map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))?;
    Ok(TomographyDataset::from_file(&file)?)
}

fn execute(cmd: Command, common: &Common, dataset: Option<&PathBuf>) -> Result<(), HarnessError> {
    let cfg = load_config(common)?;
    let data = dataset.map(load_dataset).transpose()?;
    let artifacts = run_command(cmd, &cfg, data.as_ref())?;
    let ctx = RunContext { out_dir: cfg.output_dir.clone(), format: cfg.format, config_hash: cfg.hash(), seed: cfg.seed() };
    for a in &artifacts {
        let path = write_artifact(&ctx, a)?;
        println!("{}", path.display());
        for (k, v) in &a.summary {
            println!("  {k} = {v}");
        }
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), HarnessError> {
    match cli.command {
        Sub::Evolve(c) => execute(Command::Evolve, &c, None),
        Sub::Parity(c) => execute(Command::Parity, &c, None),
        Sub::Ramsey(c) => execute(Command::Ramsey, &c, None),
        Sub::Hellinger(c) => execute(Command::Hellinger, &c, None),
        Sub::Tomo { common, dataset } => execute(Command::Tomo, &common, dataset.as_ref()),
        Sub::Budget(c) => execute(Command::Budget, &c, None),
        Sub::Verify { out } => {
            let entries = verify_dir(&out)?;
            if entries.is_empty() {
                return Err(HarnessError::Integrity(format!("no artifacts found in {}", out.display())));
            }
            let mut failed = 0;
            for e in &entries {
                println!("{} {}: {}", if e.ok { "ok  " } else { "FAIL" }, e.artifact, e.detail);
                failed += usize::from(!e.ok);
            }
            if failed > 0 {
                return Err(HarnessError::Integrity(format!("{failed} of {} artifacts", entries.len())));
            }
            Ok(())
        }
        Sub::DefaultConfig => {
            println!("{}", serde_json::to_string_pretty(&RunConfig::default()).expect("config serializes"));
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("spincat: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
