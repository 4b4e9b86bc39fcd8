//! Command-line entry point: argument parsing, config resolution and output.
//!
//! Parameters resolve in three layers: built-in defaults, then the matching
//! `[section]` of the `--config` TOML file, then command-line flags.

/// Shared optional-flag attribute set for the per-subcommand argument structs.
macro_rules! flag_args {
    ($(#[$m:meta])* $name:ident { $($(#[$fm:meta])* $field:ident : $ty:ty),* $(,)? }) => {
        $(#[$m])*
        #[derive(Debug, Clone, Default, Args, Serialize)]
        pub struct $name {
            $(
                $(#[$fm])*
                #[arg(long)]
                #[serde(skip_serializing_if = "Option::is_none")]
                pub $field: Option<$ty>,
            )*
        }
    };
}

mod commands;

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::verify::threads_from_env;
use crate::{ErzError, Result, VERSION};

pub use commands::*;

#[derive(Debug, Parser)]
#[command(name = "erz", version, about = "Euler-Riesz pseudospectral simulator and verification toolkit")]
pub struct Cli {
    /// TOML config: top-level `seed`, `output_dir`, `gnuplot`, plus one table per subcommand.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub output_dir: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Also write a gnuplot script next to each CSV.
    #[arg(long, global = true)]
    pub gnuplot: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Degenerate point, decay exponents and p'' slope verdicts.
    Dispersion(DispersionArgs),
    /// Nondegenerate decay: radial kernel quadrature or torus L^p norms.
    DecayLinear(DecayLinearArgs),
    /// Kernel decay on the degenerate shell along the critical ray.
    DecayDegenerate(DecayDegenerateArgs),
    /// Monte Carlo check of the phase lower bounds.
    PhaseBounds(PhaseBoundsArgs),
    /// Monte Carlo check of the phase derivative bounds.
    DerivativeBounds(DerivativeBoundsArgs),
    /// Dyadic shell norms of the normal-form kernel.
    KernelNorms(KernelNormsArgs),
    /// Nonlinear run with monitors.
    Simulate(SimulateArgs),
    /// Residual of the normal-form identity along a run.
    NormalForm(NormalFormArgs),
    /// The acceptance suite.
    All(AllArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Dispersion(_) => "dispersion",
            Command::DecayLinear(_) => "decay-linear",
            Command::DecayDegenerate(_) => "decay-degenerate",
            Command::PhaseBounds(_) => "phase-bounds",
            Command::DerivativeBounds(_) => "derivative-bounds",
            Command::KernelNorms(_) => "kernel-norms",
            Command::Simulate(_) => "simulate",
            Command::NormalForm(_) => "normal-form",
            Command::All(_) => "all",
        }
    }

    /// Config-file table for this subcommand.
    pub fn section(&self) -> String {
        self.name().replace('-', "_")
    }
}

const SECTIONS: [&str; 9] = [
    "dispersion",
    "decay_linear",
    "decay_degenerate",
    "phase_bounds",
    "derivative_bounds",
    "kernel_norms",
    "simulate",
    "normal_form",
    "all",
];

/// Resolved run configuration, serialized into every output.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig<P> {
    pub command: String,
    pub seed: u64,
    pub output_dir: PathBuf,
    pub gnuplot: bool,
    pub params: P,
}

/// Output header shared by every JSON file.
#[derive(Debug, Serialize)]
struct Document<'a, P, R> {
    version: &'a str,
    config: &'a ExperimentConfig<P>,
    results: &'a R,
}

/// Files produced by one subcommand.
pub struct Output<R> {
    pub results: R,
    /// CSV body including its header row.
    pub csv: Option<String>,
    /// gnuplot commands reading the CSV.
    pub plot: Option<String>,
    /// Human summary for stdout.
    pub summary: String,
    /// Process exit code on success.
    pub code: i32,
}

fn read_file(path: &Path) -> Result<toml::Table> {
    let text = fs::read_to_string(path).map_err(|e| ErzError::io(path, e))?;
    let table: toml::Table = text
        .parse()
        .map_err(|e: toml::de::Error| ErzError::Config(format!("{}: {e}", path.display())))?;
    for key in table.keys() {
        let known = matches!(key.as_str(), "seed" | "output_dir" | "gnuplot") || SECTIONS.contains(&key.as_str());
        if !known {
            return Err(ErzError::Config(format!("{}: unknown key {key:?}", path.display())));
        }
    }
    Ok(table)
}

/// Defaults, overlaid by the file table, overlaid by the flags that were given.
pub fn resolve<P: DeserializeOwned, F: Serialize>(file: Option<&toml::Value>, flags: &F) -> Result<P> {
    let mut table = match file {
        None => toml::Table::new(),
        Some(toml::Value::Table(t)) => t.clone(),
        Some(_) => return Err(ErzError::Config("subcommand section must be a table".into())),
    };
    let given = toml::Table::try_from(flags).map_err(|e| ErzError::Config(e.to_string()))?;
    table.extend(given);
    toml::Value::Table(table)
        .try_into()
        .map_err(|e: toml::de::Error| ErzError::Config(e.message().to_string()))
}

fn global<T: DeserializeOwned>(file: &toml::Table, key: &str) -> Result<Option<T>> {
    file.get(key)
        .map(|v| {
            v.clone()
                .try_into()
                .map_err(|e: toml::de::Error| ErzError::Config(format!("{key}: {}", e.message())))
        })
        .transpose()
}

fn configure_threads() -> Result<()> {
    if let Ok(v) = std::env::var("ERZ_THREADS") {
        let n = threads_from_env(&v)?;
        // A pool built earlier in the same process keeps its size.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

/// Comment header for CSV and gnuplot files.
fn header<P: Serialize>(config: &ExperimentConfig<P>) -> Result<String> {
    Ok(format!(
        "# erz {VERSION}\n# config {}\n",
        serde_json::to_string(config)?
    ))
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| ErzError::io(path, e))
}

fn emit<P: Serialize, R: Serialize>(config: &ExperimentConfig<P>, out: Output<R>) -> Result<i32> {
    let dir = &config.output_dir;
    fs::create_dir_all(dir).map_err(|e| ErzError::io(dir, e))?;
    let stem = &config.command;
    let doc = Document {
        version: VERSION,
        config,
        results: &out.results,
    };
    let mut written = Vec::new();
    let json = dir.join(format!("{stem}.json"));
    write(&json, &(serde_json::to_string_pretty(&doc)? + "\n"))?;
    written.push(json);
    if let Some(csv) = &out.csv {
        let path = dir.join(format!("{stem}.csv"));
        write(&path, &(header(config)? + csv))?;
        written.push(path);
        if let (true, Some(plot)) = (config.gnuplot, &out.plot) {
            let path = dir.join(format!("{stem}.gp"));
            let body = format!(
                "{}set datafile separator ','\nset key autotitle columnhead\n{plot}",
                header(config)?
            );
            write(&path, &body)?;
            written.push(path);
        }
    }
    print!("{}", out.summary);
    for p in written {
        println!("wrote {}", p.display());
    }
    Ok(out.code)
}

fn execute<P, F, R>(cli: &Cli, file: &toml::Table, flags: &F, body: impl FnOnce(&ExperimentConfig<P>) -> Result<Output<R>>) -> Result<i32>
where
    P: DeserializeOwned + Serialize,
    F: Serialize,
    R: Serialize,
{
    let params: P = resolve(file.get(&cli.command.section()), flags)?;
    let config = ExperimentConfig {
        command: cli.command.name().to_string(),
        seed: match cli.seed {
            Some(s) => s,
            None => global(file, "seed")?.unwrap_or(1),
        },
        output_dir: match &cli.output_dir {
            Some(d) => d.clone(),
            None => global::<PathBuf>(file, "output_dir")?.unwrap_or_else(|| PathBuf::from("erz-out")),
        },
        gnuplot: cli.gnuplot || global(file, "gnuplot")?.unwrap_or(false),
        params,
    };
    let out = body(&config)?;
    emit(&config, out)
}

/// Runs a parsed command line and returns the exit code.
pub fn run(cli: &Cli) -> Result<i32> {
    configure_threads()?;
    let file = match &cli.config {
        Some(p) => read_file(p)?,
        None => toml::Table::new(),
    };
    match &cli.command {
        Command::Dispersion(a) => execute(cli, &file, a, dispersion),
        Command::DecayLinear(a) => execute(cli, &file, a, decay_linear),
        Command::DecayDegenerate(a) => execute(cli, &file, a, decay_degenerate),
        Command::PhaseBounds(a) => execute(cli, &file, a, phase_bounds),
        Command::DerivativeBounds(a) => execute(cli, &file, a, derivative_bounds),
        Command::KernelNorms(a) => execute(cli, &file, a, kernel_norms),
        Command::Simulate(a) => execute(cli, &file, a, simulate),
        Command::NormalForm(a) => execute(cli, &file, a, normal_form),
        Command::All(a) => execute(cli, &file, a, acceptance),
    }
}

/// Parses `argv`, runs, and maps errors to exit codes.
pub fn main_with_args<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("erz: error: {e}");
            e.exit_code()
        }
    }
}

/// `lo:hi` with `lo < hi`.
pub fn parse_range(s: &str) -> Result<(f64, f64)> {
    let bad = || ErzError::Invalid(format!("range {s:?} must be lo:hi with lo < hi"));
    let (a, b) = s.split_once(':').ok_or_else(bad)?;
    let lo: f64 = a.trim().parse().map_err(|_| bad())?;
    let hi: f64 = b.trim().parse().map_err(|_| bad())?;
    if !(lo < hi && lo.is_finite() && hi.is_finite()) {
        return Err(bad());
    }
    Ok((lo, hi))
}

/// `lo:hi` with `0 < lo < hi`, for logarithmic sampling.
pub fn parse_positive_range(s: &str) -> Result<(f64, f64)> {
    let r = parse_range(s)?;
    if !(r.0 > 0.0) {
        return Err(ErzError::Invalid(format!("range {s:?} must start above 0")));
    }
    Ok(r)
}
