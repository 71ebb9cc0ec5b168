use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use mola::commands::{self, PredictionMode};
use mola::config::{load_config, Overrides, RunConfig, SamplerChoice, OUT_DIR_ENV};
use mola::{io, pipeline, render_reports, RunOptions};

#[derive(Parser)]
#[command(name = "mola", version, about = "Monte Carlo land-allocation sampler and analysis")]
struct Cli {
    /// Run configuration (TOML, or JSON by extension).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; beats the environment and the config file.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (0 = one per core).
    #[arg(long, global = true, default_value_t = 0)]
    parallelism: usize,
    /// Master seed override.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    sampler: Option<SamplerChoice>,
    /// Continue a sweep in an existing output directory.
    #[arg(long, global = true)]
    resume: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Replicates at the single priority `priorities.suitability`.
    Anneal,
    /// Replicates over the priority sweep, flashpoints and gray areas.
    Sweep,
    /// Flashpoints of an existing series file.
    Flashpoints {
        series: PathBuf,
        #[arg(long, default_value_t = 0.1)]
        alpha: f64,
    },
    /// Gray-area map from grid snapshots.
    Grayarea {
        #[arg(long = "a", num_args = 1.., required = true)]
        a: Vec<PathBuf>,
        #[arg(long = "b", num_args = 1..)]
        b: Vec<PathBuf>,
    },
    /// Ternary coordinates of a samples file.
    Ternary { samples: PathBuf },
    /// Predicted flip priority of a masked region.
    Nucleation {
        #[arg(long)]
        mask: PathBuf,
        /// Suitability file (`i,j,s,c`); defaults to the config's source.
        #[arg(long)]
        suitability: Option<PathBuf>,
        #[arg(long)]
        from: u8,
        #[arg(long)]
        to: u8,
        #[arg(long, default_value_t = 1.0)]
        compactness: f64,
        #[arg(long, default_value = "exact")]
        mode: PredictionMode,
    },
    /// SVG and chart data from a run directory.
    Render { dir: Option<PathBuf> },
}

fn env_out() -> Option<PathBuf> {
    std::env::var_os(OUT_DIR_ENV).map(PathBuf::from)
}

fn run_config(cli: &Cli) -> Result<RunConfig> {
    let Some(path) = &cli.config else { bail!("this command needs --config") };
    let mut config = load_config(path)?;
    let o = Overrides { out: cli.out.clone(), seed: cli.seed, sampler: cli.sampler };
    config.apply(&o, env_out());
    config.validate()?;
    Ok(config)
}

/// Output directory for commands that may run without a config.
fn out_dir(cli: &Cli) -> Result<PathBuf> {
    if let Some(o) = cli.out.clone().or_else(env_out) {
        return Ok(o);
    }
    match &cli.config {
        Some(_) => Ok(run_config(cli)?.output.dir),
        None => Ok(PathBuf::from(".")),
    }
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    let run = RunOptions { parallelism: cli.parallelism, resume: cli.resume };
    match &cli.command {
        Command::Anneal => {
            let config = run_config(&cli)?;
            let s = pipeline::anneal_pipeline(&config, &run)?;
            println!("P_S = {}: optimal counts {:?} from {} samples", s.p_s, s.representative, s.samples);
            if s.degenerate {
                println!("degenerate minimum: {} equivalent peaks", s.modes.len());
            }
            println!("wrote {}", config.output.dir.display());
        }
        Command::Sweep => {
            let config = run_config(&cli)?;
            let o = pipeline::sweep_pipeline(&config, &run)?;
            println!("{} priority points ({} computed now)", o.points.len(), o.computed);
            for f in &o.scan.flashpoints {
                let types: Vec<_> = f.triggers.iter().map(|t| t.ty).collect();
                println!("flashpoint in ({}, {}) triggered by types {types:?}", f.p_low, f.p_high);
            }
            println!("wrote {}", o.dir.display());
        }
        Command::Flashpoints { series, alpha } => {
            let out = out_dir(&cli)?;
            let scan = commands::flashpoints_command(series, *alpha, &out)?;
            println!("{} flashpoints; wrote {}", scan.flashpoints.len(), out.join("flashpoints.csv").display());
        }
        Command::Grayarea { a, b } => {
            let out = out_dir(&cli)?;
            let p = commands::grayarea_command(a, b, &out)?;
            println!("wrote {}", p.display());
        }
        Command::Ternary { samples } => {
            let out = out_dir(&cli)?;
            let p = commands::ternary_command(samples, &out)?;
            println!("wrote {}", p.display());
        }
        Command::Nucleation { mask, suitability, from, to, compactness, mode } => {
            let field = match suitability {
                Some(p) => io::read_suitability_csv(p)?,
                None => run_config(&cli).context("no --suitability given")?.load_field()?,
            };
            let out = out_dir(&cli)?;
            for p in commands::nucleation_command(mask, &field, *from, *to, *compactness, *mode, &out)? {
                println!("{}: L = {}, A = {}, m = {}, P_S* = {}", p.metric.name(), p.boundary, p.area, p.margin, p.p_s_star);
            }
        }
        Command::Render { dir } => {
            let dir = match dir {
                Some(d) => d.clone(),
                None => out_dir(&cli)?,
            };
            let files = render_reports(Path::new(&dir))?;
            println!("rendered {} files under {}", files.len(), dir.join("reports").display());
        }
    }
    Ok(())
}
