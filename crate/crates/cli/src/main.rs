//! `sphfold`: validate, inspect and flatten spherical chains from the shell.
//!
//! Exit status: 0 success, 1 rejected input, 2 internal invariant breach,
//! 64 usage error.

use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde_json::json;
use sphfold::io::CoordinateRow;
use sphfold::{
    classify, estimate_class_measures, find_separation, flatten, parse_chain, parse_trajectory,
    random_chain, verify_measure_inequality, verify_trajectory, ChainDocument, Error,
    ToleranceProfile, TrajectoryDocument,
};

const EXIT_DOMAIN: u8 = 1;
const EXIT_INVARIANT: u8 = 2;
const EXIT_USAGE: u8 = 64;

#[derive(Parser)]
#[command(name = "sphfold", version, about = "Unfold spherical open chains (single-vertex rigid origami) to flat")]
struct Cli {
    /// Seed for every random choice (sampling, origami placement).
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    #[arg(long, global = true, value_enum, default_value_t = Profile::Default)]
    tolerance_profile: Profile,

    /// Output format for tabular results (measure, flatten).
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Profile {
    Strict,
    Default,
}

impl From<Profile> for ToleranceProfile {
    fn from(p: Profile) -> Self {
        match p {
            Profile::Strict => ToleranceProfile::Strict,
            Profile::Default => ToleranceProfile::Default,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a chain document and check that it is a valid embedded chain.
    Validate {
        /// Chain document (`-` for stdin).
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Report whether a chain is flat, hemispherical or sphere-spanning.
    Classify {
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Find a separating edge and belt.
    Separate {
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Estimate the measure of great circles by how they meet the chain.
    Measure {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
    },
    /// Flatten a chain and write the trajectory.
    Flatten {
        #[arg(long = "in")]
        input: PathBuf,
        /// Output file; stdout if absent.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Keep every k-th snapshot (phase boundaries are always kept).
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
        snapshot_stride: u64,
    },
    /// Re-check a trajectory document.
    Verify {
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Emit random chain documents.
    Random {
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        n: u64,
        #[arg(long)]
        total: f64,
        /// Number of documents, one per line, with seeds seed, seed+1, ...
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
        count: u64,
    },
}

/// A failure with its exit status.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = if e.is_domain_rejection() { EXIT_DOMAIN } else { EXIT_INVARIANT };
        Self { code, error: e.into() }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(error: anyhow::Error) -> Self {
        Self { code: EXIT_DOMAIN, error }
    }
}

fn usage(msg: &str) -> Failure {
    Failure {
        code: EXIT_USAGE,
        error: anyhow::anyhow!("{msg}"),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}

fn read_input(path: &Path) -> anyhow::Result<String> {
    if path == Path::new("-") {
        let mut s = String::new();
        io::stdin().read_to_string(&mut s).context("reading stdin")?;
        Ok(s)
    } else {
        fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
    }
}

fn write_output(path: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut out = io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
            Ok(())
        }
    }
}

fn print_json(value: &impl serde::Serialize) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(value).map_err(anyhow::Error::from)? + "\n";
    write_output(None, &text)?;
    Ok(())
}

fn json_only(cli: &Cli, what: &str) -> Result<(), Failure> {
    match cli.format {
        Format::Json => Ok(()),
        Format::Csv => Err(usage(&format!("`{what}` output is not tabular; use --format json"))),
    }
}

fn run(cli: &Cli) -> Result<u8, Failure> {
    let tol = ToleranceProfile::from(cli.tolerance_profile).tolerances();
    match &cli.command {
        Command::Validate { input } => {
            json_only(cli, "validate")?;
            let doc = parse_chain(&read_input(input)?)?;
            let chain = doc.placed(cli.seed)?;
            chain.validate()?;
            print_json(&json!({
                "valid": true,
                "n": chain.n(),
                "total_length": chain.total_length(),
                "length_class": chain.intrinsic().length_class(),
            }))?;
        }
        Command::Classify { input } => {
            json_only(cli, "classify")?;
            let chain = parse_chain(&read_input(input)?)?.placed(cli.seed)?;
            print_json(&json!({
                "class": classify(&chain),
                "hemisphere_margin": chain.hemisphere_margin().0,
            }))?;
        }
        Command::Separate { input } => {
            json_only(cli, "separate")?;
            let chain = parse_chain(&read_input(input)?)?.placed(cli.seed)?;
            chain.validate()?;
            print_json(&find_separation(&chain)?)?;
        }
        Command::Measure { input, samples } => {
            let chain = parse_chain(&read_input(input)?)?.placed(cli.seed)?;
            let report = estimate_class_measures(&chain, *samples, cli.seed)?;
            match cli.format {
                Format::Json => {
                    let check = verify_measure_inequality(&report, chain.total_length());
                    print_json(&json!({ "report": report, "inequality": check }))?;
                }
                Format::Csv => {
                    let mut w = csv::Writer::from_writer(Vec::new());
                    w.write_record(["class", "measure", "standard_error"]).map_err(anyhow::Error::from)?;
                    for (i, (mu, se)) in report.mu_estimates.iter().zip(&report.standard_errors).enumerate() {
                        w.write_record([format!("N{i}"), mu.to_string(), se.to_string()])
                            .map_err(anyhow::Error::from)?;
                    }
                    w.write_record(["non_nice".into(), report.non_nice.to_string(), report.non_nice_error.to_string()])
                        .map_err(anyhow::Error::from)?;
                    w.write_record([
                        "crossing_integral".into(),
                        report.crossing_integral.to_string(),
                        report.crossing_integral_error.to_string(),
                    ])
                    .map_err(anyhow::Error::from)?;
                    let bytes = w.into_inner().map_err(|e| anyhow::anyhow!("{e}"))?;
                    write_output(None, &String::from_utf8_lossy(&bytes))?;
                }
            }
        }
        Command::Flatten {
            input,
            out,
            snapshot_stride,
        } => {
            let doc = parse_chain(&read_input(input)?)?;
            let chain = doc.placed(cli.seed)?;
            let traj = flatten(&chain)?.downsampled(*snapshot_stride as usize);
            let report = verify_trajectory(&traj, &tol);
            let passed = report.passed();
            let failures = report.failures();
            let tdoc = TrajectoryDocument::new(doc, &traj, Some(report));
            let text = match cli.format {
                Format::Json => tdoc.to_json() + "\n",
                Format::Csv => rows_csv(&tdoc.rows())?,
            };
            write_output(out.as_deref(), &text)?;
            if !passed {
                eprintln!("error: trajectory failed verification: {failures:?}");
                return Ok(EXIT_INVARIANT);
            }
        }
        Command::Verify { input } => {
            json_only(cli, "verify")?;
            let doc = parse_trajectory(&read_input(input)?)?;
            let report = verify_trajectory(&doc.trajectory()?, &tol);
            print_json(&report)?;
            if !report.passed() {
                eprintln!("trajectory rejected: {:?}", report.failures());
                return Ok(EXIT_DOMAIN);
            }
        }
        Command::Random { n, total, count } => {
            json_only(cli, "random")?;
            let docs = (0..*count)
                .into_par_iter()
                .map(|i| {
                    let seed = cli.seed.wrapping_add(i);
                    random_chain(*n as usize, *total, seed).map(|c| ChainDocument::from_chain(&c, Some(seed)))
                })
                .collect::<Result<Vec<_>, Error>>()?;
            let text = if docs.len() == 1 {
                docs[0].to_json() + "\n"
            } else {
                docs.iter()
                    .map(|d| serde_json::to_string(d).expect("chain documents serialize") + "\n")
                    .collect()
            };
            write_output(None, &text)?;
        }
    }
    Ok(0)
}

fn rows_csv(rows: &[CoordinateRow]) -> anyhow::Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    let bytes = w.into_inner().map_err(|e| anyhow::anyhow!("{e}"))?;
    Ok(String::from_utf8(bytes)?)
}
