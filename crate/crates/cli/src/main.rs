use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use topoflip::homotopy;
use topoflip::io::{self, Format, HomotopyGrid, LiftDocument, StabilizeParams};
use topoflip::lifting::{classify, DEFAULT_SAMPLES};
use topoflip::tricks::{self, catalog, Flip, GRAMMAR};
use topoflip::Error;

#[derive(Parser)]
#[command(name = "topoflip", version, about = "Classify and deform skateboard flip tricks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Catalog operations
    Tricks {
        #[command(subcommand)]
        action: TricksAction,
    },
    /// Print the rotation matrix of a trick at time t
    Eval {
        expr: String,
        #[arg(long, allow_hyphen_values = true)]
        t: f64,
    },
    /// Print the homotopy class of a trick
    Classify { expr: String },
    /// Export the quaternion lift of a trick as JSON
    Lift {
        expr: String,
        #[arg(long, default_value_t = DEFAULT_SAMPLES)]
        n: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Export the lift projected onto the plotting sphere as JSON
    Project {
        expr: String,
        #[arg(long, default_value_t = DEFAULT_SAMPLES)]
        n: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Export rotation frames of a trick as JSON or CSV
    Frames {
        expr: String,
        #[arg(long, default_value_t = 121)]
        n: usize,
        #[arg(long, default_value = "json")]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sample a named homotopy on an SxT grid
    Homotopy {
        /// One of contract-k2, kick-heel, kick-s2, varial-s3, spread-s2-s
        name: String,
        #[arg(long, default_value = "101x101", value_parser = parse_grid)]
        grid: (usize, usize),
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Stabilize a wobbling 360 shove-it about -k and sample the homotopy
    Stabilize {
        #[arg(long, default_value_t = 0.4)]
        a: f64,
        #[arg(long, default_value_t = 3.0, allow_hyphen_values = true)]
        omega: f64,
        /// Lift samples used for the stabilization
        #[arg(long, default_value_t = 2048)]
        n: usize,
        #[arg(long, default_value = "101x101", value_parser = parse_grid)]
        grid: (usize, usize),
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a homotopy grid file
    Verify { file: PathBuf },
}

#[derive(Subcommand)]
enum TricksAction {
    /// List the named tricks with their expressions and classes
    List,
}

fn parse_grid(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("expected SxT, got `{s}`"))?;
    let parse = |v: &str| v.trim().parse::<usize>().map_err(|e| format!("`{v}`: {e}"));
    let (gs, gt) = (parse(a)?, parse(b)?);
    if gs < 2 || gt < 2 {
        return Err("grid sizes must be at least 2".into());
    }
    Ok((gs, gt))
}

enum Failure {
    Usage(String),
    Domain(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Syntax { .. } | Error::InvalidTimeScale(_) => {
                Failure::Usage(format!("{e}\n\ngrammar:\n{GRAMMAR}"))
            }
            Error::UnknownTrick(_) | Error::InvalidArgument(_) => Failure::Usage(e.to_string()),
            _ => Failure::Domain(e.to_string()),
        }
    }
}

/// Catalog names are accepted wherever an expression is.
fn resolve(src: &str) -> Result<Flip, Error> {
    match tricks::parse(src) {
        Ok(expr) => Flip::from_expr(expr),
        Err(err) => match tricks::lookup(src.trim()) {
            Ok(expr) => Ok(Flip::from_expr(expr)?.with_name(src.trim())),
            Err(_) => Err(err),
        },
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(path) => fs::write(path, text)
            .map_err(|e| Failure::Domain(format!("cannot write {}: {e}", path.display()))),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Tricks { action: TricksAction::List } => {
            for (name, expr) in catalog() {
                let class = classify(&Flip::from_expr(expr.clone())?)?;
                println!("{name:<20} {:<14} {class}", expr.to_string());
            }
        }
        Command::Eval { expr, t } => {
            let f = resolve(&expr)?;
            println!("{}", f.eval(t)?);
        }
        Command::Classify { expr } => {
            println!("{}", classify(&resolve(&expr)?)?);
        }
        Command::Lift { expr, n, out } => {
            let doc = LiftDocument::build(&resolve(&expr)?, n)?;
            emit(out.as_deref(), &doc.to_json()?)?;
        }
        Command::Project { expr, n, out } => {
            emit(out.as_deref(), &io::export_projection(&resolve(&expr)?, n)?)?;
        }
        Command::Frames { expr, n, format, out } => {
            emit(out.as_deref(), &io::export_frames(&resolve(&expr)?, n, format)?)?;
        }
        Command::Homotopy { name, grid, out } => {
            let h = homotopy::by_name(&name)?;
            let doc = HomotopyGrid::sample(&h, grid.0, grid.1)?;
            emit(out.as_deref(), &doc.to_json()?)?;
        }
        Command::Stabilize { a, omega, n, grid, out } => {
            let params = StabilizeParams { a, omega, n_samples: n };
            let h = params.homotopy()?;
            let doc = HomotopyGrid::sample(&h, grid.0, grid.1)?.with_params(params);
            emit(out.as_deref(), &doc.to_json()?)?;
        }
        Command::Verify { file } => {
            let text = fs::read_to_string(&file)
                .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", file.display())))?;
            let grid = HomotopyGrid::from_json(&text)?;
            let result = io::verify_document(&grid)?;
            println!("{}: {}", grid.name, file.display());
            let stored_ok = result.stored_deviation.is_none_or(|d| d <= result.report.tol);
            if let Some(d) = result.stored_deviation {
                let status = if stored_ok { "ok" } else { "mismatch" };
                println!("  stored       {d:.3e} ({status})");
            }
            println!("{}", result.report);
            if result.report.passed() && !stored_ok {
                println!("FAIL: stored");
            }
            if !result.passed() {
                return Err(Failure::Domain("verification failed".into()));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            if code == 2 {
                eprintln!("\nexpression grammar:\n{GRAMMAR}");
            }
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Domain(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
