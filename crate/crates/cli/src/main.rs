//! `cellcap`: interference densities, capacity sweeps and Monte Carlo
//! validation reports as CSV.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use commands::{Failure, Report};
use config::Settings;

#[derive(Parser)]
#[command(
    name = "cellcap",
    version,
    about = "Interference and capacity of Poisson cellular networks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Aggregate-interference densities, optionally swept over one parameter.
    InterferencePdf(Common),
    /// Average capacity of a cooperative cluster against antennas or BS density.
    CapacitySweep(Common),
    /// Monte Carlo checks of the analytical models.
    McValidate(Common),
    /// Relative capacity changes of the cooperation study and their
    /// sensitivity to the interferer antenna count.
    ReproducePaper {
        #[command(flatten)]
        common: Common,
        /// Exit with status 4 when no interferer antenna count reproduces
        /// every reference ratio.
        #[arg(long)]
        strict: bool,
    },
}

/// Flags shared by every command. Parameter flags override the config file.
#[derive(Args)]
struct Common {
    /// Flat `key = value` file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    samples: Option<String>,
    #[arg(long = "sigma_db", alias = "sigma-db")]
    sigma_db: Option<String>,
    /// `standard` or `mean_matched`.
    #[arg(long)]
    shadowing: Option<String>,
    #[arg(long = "p_r", alias = "p-r")]
    p_r: Option<String>,
    #[arg(long = "lambda_bs", alias = "lambda-bs")]
    lambda_bs: Option<String>,
    #[arg(long = "sigma_r", alias = "sigma-r")]
    sigma_r: Option<String>,
    #[arg(long = "n_t", alias = "n-t")]
    n_t: Option<String>,
    #[arg(long = "n_r", alias = "n-r")]
    n_r: Option<String>,
    #[arg(long)]
    m: Option<String>,
    #[arg(long = "p_ant", alias = "p-ant")]
    p_ant: Option<String>,
    /// Swept parameter: sigma_db, lambda_bs, sigma_r, n_t, n_r or m.
    #[arg(long)]
    vary: Option<String>,
    /// Comma-separated values of the swept parameter.
    #[arg(long)]
    values: Option<String>,
    #[arg(long = "y_min", alias = "y-min")]
    y_min: Option<String>,
    #[arg(long = "y_max", alias = "y-max")]
    y_max: Option<String>,
    /// Grid size (log-spaced for densities, linear for BS density).
    #[arg(long)]
    points: Option<String>,
    /// coop_antennas or bs_density.
    #[arg(long)]
    axis: Option<String>,
    /// Comma-separated cooperating-BS counts.
    #[arg(long)]
    cbs: Option<String>,
    #[arg(long = "n_b", alias = "n-b")]
    n_b: Option<String>,
    #[arg(long = "n_t_c", alias = "n-t-c")]
    n_t_c: Option<String>,
    #[arg(long = "r_b", alias = "r-b")]
    r_b: Option<String>,
    #[arg(long = "interferer_n_t", alias = "interferer-n-t")]
    interferer_n_t: Option<String>,
    #[arg(long = "r_max", alias = "r-max")]
    r_max: Option<String>,
}

impl Common {
    fn flag_pairs(&self) -> Vec<(String, String)> {
        let flags = [
            ("seed", &self.seed),
            ("samples", &self.samples),
            ("sigma_db", &self.sigma_db),
            ("shadowing", &self.shadowing),
            ("p_r", &self.p_r),
            ("lambda_bs", &self.lambda_bs),
            ("sigma_r", &self.sigma_r),
            ("n_t", &self.n_t),
            ("n_r", &self.n_r),
            ("m", &self.m),
            ("p_ant", &self.p_ant),
            ("vary", &self.vary),
            ("values", &self.values),
            ("y_min", &self.y_min),
            ("y_max", &self.y_max),
            ("points", &self.points),
            ("axis", &self.axis),
            ("cbs", &self.cbs),
            ("n_b", &self.n_b),
            ("n_t_c", &self.n_t_c),
            ("r_b", &self.r_b),
            ("interferer_n_t", &self.interferer_n_t),
            ("r_max", &self.r_max),
        ];
        flags
            .into_iter()
            .filter_map(|(k, v)| v.as_ref().map(|v| (k.to_string(), v.clone())))
            .collect()
    }

    fn settings(&self) -> Result<(Settings, bool), Failure> {
        let file = match &self.config {
            Some(p) => config::read_file(p)?,
            None => Vec::new(),
        };
        let flags = self.flag_pairs();
        let points_given = file.iter().chain(&flags).any(|(k, _)| k == "points");
        let s = config::resolve(&file, &flags)?;
        s.validate()?;
        Ok((s, points_given))
    }
}

fn init_threads() -> Result<(), Failure> {
    let n = match std::env::var("CELLCAP_THREADS") {
        Ok(v) => v.trim().parse::<usize>().map_err(|_| {
            Failure::Config(format!(
                "CELLCAP_THREADS must be a non-negative integer, got {v:?}"
            ))
        })?,
        Err(_) => 0,
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::Config(format!("cannot start worker pool: {e}")))
}

fn write_output(out: Option<&PathBuf>, text: &str) -> Result<(), Failure> {
    match out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| Failure::Config(format!("cannot write {}: {e}", path.display()))),
        None => std::io::stdout()
            .lock()
            .write_all(text.as_bytes())
            .map_err(|e| Failure::Config(format!("cannot write output: {e}"))),
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    init_threads()?;
    let (common, report) = match &cli.command {
        Command::InterferencePdf(c) => (c, commands::interference_pdf_cmd(&c.settings()?.0)?),
        Command::CapacitySweep(c) => {
            let (s, points_given) = c.settings()?;
            (c, commands::capacity_sweep_cmd(&s, points_given)?)
        }
        Command::McValidate(c) => (c, commands::mc_validate_cmd(&c.settings()?.0)?),
        Command::ReproducePaper { common, strict } => (
            common,
            commands::reproduce_paper_cmd(&common.settings()?.0, *strict)?,
        ),
    };
    let Report { text, failure } = report;
    write_output(common.out.as_ref(), &text)?;
    match failure {
        Some(f) => Err(f),
        None => Ok(()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("cellcap: {}", f.message());
            ExitCode::from(f.exit_code() as u8)
        }
    }
}
