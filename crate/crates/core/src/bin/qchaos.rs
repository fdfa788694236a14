use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use qchaos::cli::{dispatch, error_json, exit_code};
use qchaos::config::parse_config;
use qchaos::Error;

/// Runs one configured experiment and writes its artifacts with a manifest.
#[derive(Parser)]
#[command(name = "qchaos", version)]
struct Args {
    /// Configuration file (key=value lines or a JSON object).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `out_dir` from the config (default `qchaos_out`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; falls back to QCHAOS_THREADS, then to rayon's default.
    #[arg(long)]
    threads: Option<usize>,
}

fn threads(args: &Args) -> Result<Option<usize>, Error> {
    if args.threads.is_some() {
        return Ok(args.threads);
    }
    match std::env::var("QCHAOS_THREADS") {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| Error::Config(vec![qchaos::error::ConfigIssue::new("QCHAOS_THREADS", format!("not a thread count: {v:?}"))])),
        Err(_) => Ok(None),
    }
}

fn run(args: &Args) -> Result<(), Error> {
    if let Some(n) = threads(args)? {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Domain(format!("thread pool: {e}")))?;
    }
    let text = std::fs::read_to_string(&args.config)?;
    let mut cfg = parse_config(&text)?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    let out = args.out.clone().or_else(|| cfg.out_dir.clone()).unwrap_or_else(|| PathBuf::from("qchaos_out"));
    let manifest = dispatch(&cfg, &out)?;
    for a in &manifest.outputs {
        println!("{}  {}", a.sha256, out.join(&a.file).display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", error_json(&e));
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
