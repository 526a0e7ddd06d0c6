//! `eigenlab`: sampling, Laplacians, eigenmaps, fits and the statistical
//! experiments from the command line.
//!
//! Options are `key=value` pairs or `--key value` flags after the
//! subcommand; `--config FILE` supplies defaults that flags override.
//! Exit codes: 0 ok, 2 config error, 3 numeric failure, 4 failed `--check`.

mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::RunConfig;
use error::{CliError, EXIT_CHECK};
use output::Run;

#[derive(Parser)]
#[command(name = "eigenlab", version, about = "Laplacian eigenmaps and their convergence experiments")]
struct Cli {
    /// Re-derive the config hash and data-file digests of a manifest.
    #[arg(long, value_name = "MANIFEST")]
    verify: Option<PathBuf>,

    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand)]
enum Command {
    /// Sample points from a model space into a CSV file.
    Sample(Args),
    /// Build a graph Laplacian and write it in COO form.
    Laplacian(Args),
    /// Build a graph Laplacian and write its eigenmap.
    Eigenmap(Args),
    /// Fit polynomial images between eigenmap coordinates.
    Fit(Args),
    /// Fixed-point CLT check of a normalized Laplacian statistic.
    Clt(Args),
    /// Bandwidth sweep of the random graph Laplacian.
    Sweep(Args),
    /// Gasket degeneracy, alignment and rescaling probes.
    Sgprobe(Args),
    /// Closed-form spectra.
    Exactspec(Args),
}

#[derive(clap::Args)]
struct Args {
    /// `key=value` pairs and `--key value` flags, plus `--config FILE`,
    /// `--seed N`, `--workers K`, `--out DIR` and `--check`.
    #[arg(trailing_var_arg = true, allow_hyphen_values = true, num_args = 0..)]
    options: Vec<String>,
}

struct Options {
    config: RunConfig,
    workers: Option<usize>,
    out: PathBuf,
    check: bool,
}

fn parse_options(raw: &[String]) -> Result<Options, CliError> {
    let mut pairs: Vec<(String, String)> = Vec::new();
    let mut file: Option<PathBuf> = None;
    let mut workers = None;
    let mut out = PathBuf::from(".");
    let mut check = false;
    let mut it = raw.iter();
    while let Some(a) = it.next() {
        let (key, value) = if let Some(flag) = a.strip_prefix("--") {
            if flag == "check" {
                check = true;
                continue;
            }
            match flag.split_once('=') {
                Some((k, v)) => (k.to_string(), v.to_string()),
                None => {
                    let v = it.next().ok_or_else(|| CliError::config(format!("flag --{flag} needs a value")))?;
                    (flag.to_string(), v.clone())
                }
            }
        } else if let Some((k, v)) = a.split_once('=') {
            (k.to_string(), v.to_string())
        } else {
            return Err(CliError::config(format!("unexpected argument '{a}'; use key=value or --key value")));
        };
        match key.as_str() {
            "config" => file = Some(PathBuf::from(value)),
            "workers" => {
                let k: usize = value.parse().map_err(|_| CliError::config(format!("--workers needs a count, got '{value}'")))?;
                if k == 0 {
                    return Err(CliError::config("--workers must be at least 1"));
                }
                workers = Some(k);
            }
            "out" => out = PathBuf::from(value),
            _ => pairs.push((key, value)),
        }
    }
    let mut config = match file {
        Some(p) => RunConfig::from_file(&p)?,
        None => RunConfig::default(),
    };
    for (k, v) in pairs {
        config.set(&k, v);
    }
    Ok(Options { config, workers, out, check })
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(path) = cli.verify {
        let problems = output::verify(&path)?;
        if problems.is_empty() {
            println!("{}: ok", path.display());
            return Ok(());
        }
        return Err(CliError::config(format!("{}: {}", path.display(), problems.join("; "))));
    }
    let Some(command) = cli.command else {
        return Err(CliError::config("no subcommand given; see --help"));
    };
    let (name, args): (&'static str, &Args) = match &command {
        Command::Sample(a) => ("sample", a),
        Command::Laplacian(a) => ("laplacian", a),
        Command::Eigenmap(a) => ("eigenmap", a),
        Command::Fit(a) => ("fit", a),
        Command::Clt(a) => ("clt", a),
        Command::Sweep(a) => ("sweep", a),
        Command::Sgprobe(a) => ("sgprobe", a),
        Command::Exactspec(a) => ("exactspec", a),
    };
    let mut opts = parse_options(&args.options)?;
    if !opts.config.has("seed") && !matches!(name, "fit" | "exactspec") {
        if let Ok(s) = std::env::var("EIGENLAB_SEED") {
            opts.config.set("seed", s);
        }
    }
    if let Some(k) = opts.workers {
        rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build_global()
            .map_err(|e| CliError::config(format!("cannot start {k} workers: {e}")))?;
    }
    let mut r = Run { command: name, config: opts.config, out_dir: opts.out };
    let manifest = match name {
        "sample" => commands::sample(&mut r),
        "laplacian" => commands::laplacian(&mut r),
        "eigenmap" => commands::eigenmap(&mut r),
        "fit" => commands::fit(&mut r),
        "clt" => commands::clt(&mut r, opts.check),
        "sweep" => commands::sweep(&mut r, opts.check),
        "sgprobe" => commands::sgprobe(&mut r, opts.check),
        _ => commands::exactspec(&mut r),
    }?;
    println!("{}", manifest.display());
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            if e.code == EXIT_CHECK {
                eprintln!("check failed: {e}");
            } else {
                eprintln!("error: {e}");
            }
            ExitCode::from(e.code)
        }
    }
}
