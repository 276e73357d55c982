use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use wkgeom::cli::{run, Command};
use wkgeom::{exit, Error};

/// Weighted toric Kähler geometry experiments.
#[derive(Parser)]
#[command(name = "wkgeom", version)]
struct Args {
    command: Command,
    /// TOML experiment configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory for the CSV table and summary.json.
    #[arg(long, default_value = "wkgeom-out")]
    out: PathBuf,
    /// Seed for random draws; overrides the config's seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Multiplier applied to every tolerance.
    #[arg(long, default_value_t = 1.0)]
    tol_scale: f64,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let code = match execute(&args) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    };
    ExitCode::from(code as u8)
}

fn execute(args: &Args) -> Result<i32, Error> {
    let text = std::fs::read_to_string(&args.config)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", args.config.display())))?;
    let report = run(args.command, &text, args.seed, args.tol_scale)?;
    for path in report.write(&args.out)? {
        println!("wrote {}", path.display());
    }
    for v in &report.verdicts {
        println!(
            "{:<36} {}  margin {:e}",
            v.name,
            if v.passed { "pass" } else { "FAIL" },
            v.margin
        );
    }
    Ok(if report.passed() {
        exit::OK
    } else {
        exit::VERDICT_FAILED
    })
}
