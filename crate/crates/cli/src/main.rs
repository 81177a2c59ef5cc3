use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use mcforge::report::{emit, Format};
use mcforge::{load_scenario, registry, run, ConfigError, Kind};
use mcforge_core::fixtures;
use mcforge_core::numerics::{Discretization, FdConfig, OdeConfig, QuadratureRule};

const EXIT_CHECK_FAILED: u8 = 1;
const EXIT_CONFIG: u8 = 2;

#[derive(Parser)]
#[command(name = "mcforge", version, about = "Verify Maurer-Cartan identities on pre-Lie algebras, Poisson bivectors and algebroids")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the suites of a scenario file and emit a report.
    Run {
        scenario: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        /// Write the report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Overrides `sample.seed`.
        #[arg(long)]
        seed: Option<u64>,
        /// Gauss-Legendre order.
        #[arg(long)]
        quad_order: Option<usize>,
        /// RK4 steps per integration interval.
        #[arg(long)]
        ode_steps: Option<usize>,
        /// Central-difference step.
        #[arg(long)]
        fd_step: Option<f64>,
    },
    /// List the registered fixtures.
    ListFixtures,
    /// List the suites available for each scenario kind.
    ListSuites,
}

fn discretization(quad_order: Option<usize>, ode_steps: Option<usize>, fd_step: Option<f64>) -> Result<Discretization, ConfigError> {
    fn invalid(field: &'static str) -> impl Fn(mcforge_core::Error) -> ConfigError {
        move |e| ConfigError::Invalid { field: field.into(), message: e.to_string() }
    }
    let mut disc = Discretization::default();
    if let Some(n) = quad_order {
        disc.rule = QuadratureRule::gauss_legendre(n).map_err(invalid("--quad-order"))?;
    }
    if let Some(n) = ode_steps {
        disc.ode = OdeConfig::new(n).map_err(invalid("--ode-steps"))?;
    }
    if let Some(h) = fd_step {
        disc.fd = FdConfig::new(h, disc.fd.richardson).map_err(invalid("--fd-step"))?;
    }
    Ok(disc)
}

#[allow(clippy::too_many_arguments)]
fn run_command(
    scenario: PathBuf,
    format: Format,
    out: Option<PathBuf>,
    seed: Option<u64>,
    quad_order: Option<usize>,
    ode_steps: Option<usize>,
    fd_step: Option<f64>,
) -> Result<bool, ConfigError> {
    let mut scenario = load_scenario(&scenario)?;
    if let Some(seed) = seed {
        scenario.sample.seed = seed;
    }
    let disc = discretization(quad_order, ode_steps, fd_step)?;
    let report = run(&scenario, &disc)?;
    let text = emit(&report, format);
    match out {
        Some(path) => std::fs::write(&path, text).map_err(|e| ConfigError::Io { path: path.display().to_string(), message: e.to_string() })?,
        None => {
            let _ = std::io::stdout().lock().write_all(text.as_bytes());
        }
    }
    Ok(report.all_passed())
}

fn list_fixtures() {
    let rows = fixtures::catalogue();
    let width = rows.iter().map(|(n, _, _)| n.len()).max().unwrap_or(0);
    for (name, kind, description) in rows {
        println!("{name:<width$}  {kind:<9}  {description}");
    }
    println!();
    println!("also: <algebra>_bundle and cotangent(<bivector>) for any registered algebra or bivector;");
    println!("bivectors also serve kind \"bridge\".");
}

fn list_suites() {
    for kind in Kind::ALL {
        println!("{:<9}  {}", kind.as_str(), registry::suites(kind).join(", "));
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { scenario, format, out, seed, quad_order, ode_steps, fd_step } => {
            match run_command(scenario, format, out, seed, quad_order, ode_steps, fd_step) {
                Ok(true) => ExitCode::SUCCESS,
                Ok(false) => ExitCode::from(EXIT_CHECK_FAILED),
                Err(e) => {
                    eprintln!("mcforge: {e}");
                    ExitCode::from(EXIT_CONFIG)
                }
            }
        }
        Command::ListFixtures => {
            list_fixtures();
            ExitCode::SUCCESS
        }
        Command::ListSuites => {
            list_suites();
            ExitCode::SUCCESS
        }
    }
}
