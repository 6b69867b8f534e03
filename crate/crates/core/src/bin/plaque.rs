use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use plaque::cli::{run, Command, EXIT_CONFIG, EXIT_OK, EXIT_PARTIAL};
use plaque::config::RunConfig;
use plaque::linalg::use_sequential_kernels;
use plaque::verify::{run_battery, write_battery, BatteryOptions, Scale};

/// Environment variable holding the worker thread count.
const THREADS_VAR: &str = "PLAQUE_THREADS";

#[derive(Parser)]
#[command(name = "plaque", version, about = "Free-boundary plaque-growth model: steady states, bifurcations, stability")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Refinement study of the radial fields against the closed form
    Converge(Common),
    /// Detect bifurcation points on each grid of the ladder
    Bifurcate(Common),
    /// Largest growth rate of the radial state for a list of L
    Stability(Common),
    /// Switch onto and continue the non-radial branches
    Branch(Common),
    /// Solve for one steady state
    Steady(Common),
    /// Run the verification battery and write a JSON report
    Verify {
        #[arg(long, value_enum, default_value = "fast")]
        scale: ScaleArg,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
}

#[derive(Args)]
struct Common {
    /// TOML run configuration
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Grid as `m,n_r`
    #[arg(long, value_parser = parse_grid)]
    grid: Option<(usize, usize)>,
    /// Newton tolerance
    #[arg(long, allow_negative_numbers = true)]
    tol: Option<f64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ScaleArg {
    Fast,
    Full,
}

fn parse_grid(s: &str) -> Result<(usize, usize), String> {
    let (m, n_r) = s.split_once(',').ok_or_else(|| format!("expected m,n_r, got '{s}'"))?;
    let parse = |v: &str| v.trim().parse::<usize>().map_err(|e| format!("'{v}': {e}"));
    Ok((parse(m)?, parse(n_r)?))
}

fn configure_threads() -> Result<(), String> {
    use_sequential_kernels();
    let Ok(value) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let n: usize = value
        .parse()
        .map_err(|_| format!("{THREADS_VAR} must be a positive integer, got '{value}'"))?;
    if n == 0 {
        return Err(format!("{THREADS_VAR} must be a positive integer, got '{value}'"));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())
}

fn load(common: &Common) -> plaque::Result<RunConfig> {
    let mut cfg = match &common.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some((m, n_r)) = common.grid {
        cfg.grid.m = m;
        cfg.grid.n_r = n_r;
    }
    if let Some(tol) = common.tol {
        cfg.tol = tol;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_CONFIG as u8 } else { EXIT_OK as u8 });
        }
    };
    if let Err(e) = configure_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(EXIT_CONFIG as u8);
    }
    let (command, common) = match cli.command {
        Cmd::Converge(c) => (Command::Converge, c),
        Cmd::Bifurcate(c) => (Command::Bifurcate, c),
        Cmd::Stability(c) => (Command::Stability, c),
        Cmd::Branch(c) => (Command::Branch, c),
        Cmd::Steady(c) => (Command::Steady, c),
        Cmd::Verify { scale, out } => {
            let opts = BatteryOptions::new(match scale {
                ScaleArg::Fast => Scale::Fast,
                ScaleArg::Full => Scale::Full,
            });
            let reports = run_battery(&opts);
            for r in &reports {
                println!("{} {}", if r.passed { "PASS" } else { "FAIL" }, r.name);
            }
            let path = out.join("verify.json");
            if let Err(e) = write_battery(&path, &opts, &reports) {
                eprintln!("error: {e}");
                return ExitCode::from(EXIT_CONFIG as u8);
            }
            let code = if reports.iter().all(|r| r.passed) { EXIT_OK } else { EXIT_PARTIAL };
            return ExitCode::from(code as u8);
        }
    };
    let cfg = match load(&common) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_CONFIG as u8);
        }
    };
    match run(command, &cfg, &common.out) {
        Ok(report) => {
            for f in &report.files {
                eprintln!("wrote {}", f.display());
            }
            for msg in &report.failures {
                eprintln!("warning: {msg}");
            }
            ExitCode::from(report.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {command}: {e}");
            ExitCode::from(EXIT_CONFIG as u8)
        }
    }
}
