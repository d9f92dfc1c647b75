//! `quasilocal` command-line entry point.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use quasilocal_cli::config::{parse_table, Format, RunConfig};
use quasilocal_cli::run::run;
use quasilocal_cli::CliError;

#[derive(Parser)]
#[command(name = "quasilocal", version, about = "Quasi-local mass and small/large sphere expansions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Curvature package at the center point.
    Curvature(Common),
    /// One sphere: geometry summary and per-node dump.
    Surface(Common),
    /// One sphere: isometric embedding into R³.
    Embed(Common),
    /// One sphere: Brown–York, Hawking and (optionally) ADM and volume terms.
    Mass(Common),
    /// Geodesic-sphere ladder about the center with expansion fits.
    SmallSphere(Common),
    /// Coordinate-sphere ladder with large-radius limits.
    LargeSphere(Common),
    /// One sphere: enclosed and embedded volumes.
    Volume(Common),
    /// Check a configuration and print it with defaults filled in.
    Validate(Common),
}

#[derive(clap::Args)]
struct Common {
    /// TOML run configuration.
    #[arg(long, short)]
    config: PathBuf,
    /// Output directory (overrides `output.dir`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// csv, json or both (overrides `output.format`).
    #[arg(long)]
    format: Option<Format>,
    /// Quadrature grid as N_THETA,N_PHI.
    #[arg(long, value_parser = parse_grid)]
    grid: Option<(i64, i64)>,
    /// Radius ladder as MIN,MAX,COUNT[,log|linear].
    #[arg(long, value_parser = parse_ladder)]
    ladder: Option<toml::Table>,
    /// Sphere radius for single-surface modes.
    #[arg(long)]
    radius: Option<f64>,
}

fn parse_grid(s: &str) -> Result<(i64, i64), String> {
    let parts: Vec<&str> = s.split(',').collect();
    match parts.as_slice() {
        [a, b] => Ok((
            a.trim().parse().map_err(|e| format!("n_theta: {e}"))?,
            b.trim().parse().map_err(|e| format!("n_phi: {e}"))?,
        )),
        _ => Err("expected N_THETA,N_PHI".into()),
    }
}

fn parse_ladder(s: &str) -> Result<toml::Table, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if !(3..=4).contains(&parts.len()) {
        return Err("expected MIN,MAX,COUNT[,log|linear]".into());
    }
    let mut t = toml::Table::new();
    t.insert("r_min".into(), parts[0].parse::<f64>().map_err(|e| format!("r_min: {e}"))?.into());
    t.insert("r_max".into(), parts[1].parse::<f64>().map_err(|e| format!("r_max: {e}"))?.into());
    t.insert("count".into(), parts[2].parse::<i64>().map_err(|e| format!("count: {e}"))?.into());
    if let Some(sp) = parts.get(3) {
        t.insert("spacing".into(), sp.to_string().into());
    }
    Ok(t)
}

/// Read the file, apply command-line overrides and the subcommand's mode.
fn load(mode: Option<&str>, args: &Common) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(&args.config)
        .map_err(|e| CliError::Config(vec![format!("{}: {e}", args.config.display())]))?;
    let mut table = parse_table(&text).map_err(CliError::Config)?;
    if let Some(mode) = mode {
        table.insert("mode".into(), mode.into());
    }
    if let Some(r) = args.radius {
        table.insert("radius".into(), r.into());
    }
    if let Some((a, b)) = args.grid {
        let mut g = toml::Table::new();
        g.insert("n_theta".into(), a.into());
        g.insert("n_phi".into(), b.into());
        table.insert("grid".into(), g.into());
    }
    if let Some(l) = &args.ladder {
        table.insert("ladder".into(), l.clone().into());
    }
    if args.out.is_some() || args.format.is_some() {
        let out = table.entry("output").or_insert_with(|| toml::Table::new().into());
        let Some(out) = out.as_table_mut() else {
            return Err(CliError::Config(vec!["output: expected a table".into()]));
        };
        if let Some(dir) = &args.out {
            out.insert("dir".into(), dir.display().to_string().into());
        }
        if let Some(f) = args.format {
            let name = match f {
                Format::Csv => "csv",
                Format::Json => "json",
                Format::Both => "both",
            };
            out.insert("format".into(), name.into());
        }
    }
    RunConfig::from_table(&table).map_err(CliError::Config)
}

/// Size the worker pool from `QLM_WORKERS` when set.
fn init_workers() -> Result<(), CliError> {
    let Ok(v) = std::env::var("QLM_WORKERS") else { return Ok(()) };
    let n: usize = match v.trim().parse() {
        Ok(n) if n > 0 => n,
        _ => return Err(CliError::Config(vec![format!("QLM_WORKERS: expected a positive integer, got {v:?}")])),
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Config(vec![format!("QLM_WORKERS: {e}")]))
}

fn execute(cli: Cli) -> Result<(), CliError> {
    init_workers()?;
    let (mode, args) = match &cli.command {
        Command::Curvature(a) => (Some("curvature"), a),
        Command::Surface(a) => (Some("surface"), a),
        Command::Embed(a) => (Some("embed"), a),
        Command::Mass(a) => (Some("mass"), a),
        Command::SmallSphere(a) => (Some("small-sphere"), a),
        Command::LargeSphere(a) => (Some("large-sphere"), a),
        Command::Volume(a) => (Some("volume"), a),
        Command::Validate(a) => (None, a),
    };
    let mut config = load(mode, args)?;
    if mode.is_none() {
        config.resolve();
        print!("{}", config.to_toml());
        return Ok(());
    }
    for path in run(config)? {
        eprintln!("wrote {}", path.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
