use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use gridform::config::{load_config, ConfigError, DesignConfig, OutputFormat};
use gridform::pipeline::{run_design, run_simulations};
use gridform::report::{render_design_report, render_metrics_table, write_csv};
use gridform::verify::{find_fixture, render_outcomes, FIXTURES};

const EXIT_VERIFY: u8 = 1;
const EXIT_INFEASIBLE: u8 = 2;
const EXIT_IO: u8 = 3;
const EXIT_USAGE: u8 = 64;

#[derive(Parser)]
#[command(name = "gridform", version, about = "Full-state-feedback power-loop design for grid-forming converters")]
struct Cli {
    /// Output directory (overrides output.directory of the config).
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Integration step in seconds (overrides sim.dt of the config).
    #[arg(long, global = true, value_name = "SECONDS")]
    dt: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the six design steps for every case and print the report.
    Design { config: PathBuf },
    /// Design, simulate the configured events and write one CSV per case.
    Simulate { config: PathBuf },
    /// Run the built-in regression fixtures.
    Verify {
        /// Run a single fixture.
        #[arg(long, value_name = "NAME")]
        fixture: Option<String>,
        /// Replace the fixture tolerance.
        #[arg(long, value_name = "X")]
        tol: Option<f64>,
    },
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Failure { code, message: message.into() }
    }
}

fn io_failure(path: &Path, e: io::Error) -> Failure {
    Failure::new(EXIT_IO, format!("{}: {e}", path.display()))
}

fn load(path: &Path, dt: Option<f64>) -> Result<DesignConfig, Failure> {
    let mut cfg = load_config(path).map_err(|e| match e {
        ConfigError::Io { .. } => Failure::new(EXIT_IO, e.to_string()),
        _ => Failure::new(EXIT_USAGE, format!("{}: {e}", path.display())),
    })?;
    if let Some(dt) = dt {
        cfg.sim.dt = dt;
        cfg.validate()
            .map_err(|e| Failure::new(EXIT_USAGE, format!("--dt: {e}")))?;
    }
    Ok(cfg)
}

fn write_file(path: &Path, contents: &str) -> Result<(), Failure> {
    fs::write(path, contents).map_err(|e| io_failure(path, e))
}

fn design(cli: &Cli, config: &Path) -> Result<u8, Failure> {
    let cfg = load(config, cli.dt)?;
    let report = run_design(&cfg);
    let text = render_design_report(&report);
    print!("{text}");
    if let Some(dir) = &cli.out {
        fs::create_dir_all(dir).map_err(|e| io_failure(dir, e))?;
        write_file(&dir.join("design_report.txt"), &text)?;
    }
    Ok(if report.all_ok() { 0 } else { EXIT_INFEASIBLE })
}

fn simulate(cli: &Cli, config: &Path) -> Result<u8, Failure> {
    let cfg = load(config, cli.dt)?;
    let dir = cli.out.clone().unwrap_or_else(|| cfg.output.directory.clone());
    fs::create_dir_all(&dir).map_err(|e| io_failure(&dir, e))?;

    let report = run_design(&cfg);
    let runs = run_simulations(&cfg, &report);

    if cfg.output.formats.contains(&OutputFormat::Csv) {
        for run in &runs {
            if let Ok(traj) = &run.trajectory {
                let path = dir.join(format!("{}.csv", run.name));
                let file = fs::File::create(&path).map_err(|e| io_failure(&path, e))?;
                let mut w = BufWriter::new(file);
                write_csv(traj, &mut w)
                    .and_then(|_| w.flush())
                    .map_err(|e| io_failure(&path, e))?;
            }
        }
    }
    let table = render_metrics_table(&runs);
    if cfg.output.formats.contains(&OutputFormat::Report) {
        write_file(&dir.join("design_report.txt"), &render_design_report(&report))?;
        write_file(&dir.join("metrics.txt"), &table)?;
    }
    print!("{table}");

    let failed = runs.iter().any(|r| r.trajectory.is_err());
    Ok(if failed { EXIT_INFEASIBLE } else { 0 })
}

fn verify(fixture: Option<&str>, tol: Option<f64>) -> Result<u8, Failure> {
    if let Some(t) = tol {
        if !(t >= 0.0 && t.is_finite()) {
            return Err(Failure::new(EXIT_USAGE, format!("--tol must be a finite value >= 0, got {t}")));
        }
    }
    let selected: Vec<_> = match fixture {
        Some(name) => match find_fixture(name) {
            Some(f) => vec![f],
            None => {
                let known: Vec<_> = FIXTURES.iter().map(|f| f.name).collect();
                return Err(Failure::new(
                    EXIT_USAGE,
                    format!("unknown fixture '{name}' (known: {})", known.join(", ")),
                ));
            }
        },
        None => FIXTURES.iter().collect(),
    };
    let outcomes: Vec<_> = selected.iter().map(|f| f.run(tol)).collect();
    print!("{}", render_outcomes(&outcomes));
    Ok(if outcomes.iter().all(|o| o.passed) { 0 } else { EXIT_VERIFY })
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    let result = match &cli.command {
        Command::Design { config } => design(&cli, config),
        Command::Simulate { config } => simulate(&cli, config),
        Command::Verify { fixture, tol } => verify(fixture.as_deref(), *tol),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("gridform: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
