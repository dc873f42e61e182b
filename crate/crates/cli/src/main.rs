use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use conewalk_cli::config::{apply_env_overrides, from_table};

/// Run one conewalk experiment from a TOML config.
#[derive(Parser, Debug)]
#[command(name = "conewalk", version)]
struct Args {
    /// Path to the run config.
    #[arg(long, env = "CONEWALK_CONFIG")]
    config: PathBuf,
    /// Worker threads for Monte Carlo (0 = all cores).
    #[arg(long, env = "CONEWALK_WORKERS")]
    workers: Option<usize>,
    /// Output directory; overrides `out_dir` in the config.
    #[arg(long, env = "CONEWALK_OUT")]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let args = Args::parse();
    match real_main(&args) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("one or more assertions failed; see manifest.json");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn real_main(args: &Args) -> conewalk::Result<bool> {
    let text = std::fs::read_to_string(&args.config)?;
    let mut table: toml::Table =
        text.parse().map_err(|e: toml::de::Error| conewalk::Error::Config(vec![e.message().to_string()]))?;
    apply_env_overrides(&mut table, std::env::vars());
    let mut cfg = from_table(table)?;
    if let Some(w) = args.workers {
        cfg.workers = w;
    }
    if let Some(o) = &args.out {
        cfg.out_dir = o.clone();
    }
    let outcome = conewalk_cli::run(&cfg)?;
    for a in &outcome.manifest.assertions {
        println!("{} {}: {}", if a.passed { "PASS" } else { "FAIL" }, a.name, a.detail);
    }
    println!("outputs in {}", cfg.out_dir.display());
    Ok(outcome.passed)
}
