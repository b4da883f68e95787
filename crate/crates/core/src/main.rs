use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use lattice_approx::error::Error;
use lattice_approx::freqset::{build_adn, FrequencySet, WeightSpec};
use lattice_approx::harness::{run_convergence, ExperimentConfig, RowStatus, ZooParams};
use lattice_approx::korobov::{choose_rate, wc_error_bound};
use lattice_approx::lattice::{
    construct, verify, ConstructOptions, LatticeFile, MultipleRank1Lattice,
};
use lattice_approx::spectral::{reconstruct, CoeffFile, LatticeSamples};

#[derive(Parser)]
#[command(
    name = "lattice-approx",
    about = "Build frequency sets, construct sampling lattices, recover Fourier \
             coefficients, and evaluate the associated error bounds."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the weighted frequency set A_d(N) and write it as text.
    Freqset(FreqsetArgs),
    /// Construct or verify multiple rank-1 lattices.
    Lattice {
        #[command(subcommand)]
        command: LatticeCommand,
    },
    /// Sample a function on a lattice and recover its coefficients.
    Approx {
        #[command(subcommand)]
        command: ApproxCommand,
    },
    /// Print the rate parameters (delta, tau) for a requested order t.
    Rates(RatesArgs),
    /// Print the error budget of a lattice/frequency-set pair.
    Bounds(BoundsArgs),
    /// Run a convergence study from a JSON config.
    Convergence(ConvergenceArgs),
}

#[derive(Args)]
struct FreqsetArgs {
    #[arg(long)]
    alpha: f64,
    /// Comma-separated product weights, e.g. 1,0.5,0.25
    #[arg(long)]
    gamma: String,
    /// Sublevel threshold.
    #[arg(long = "N")]
    n: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum LatticeCommand {
    /// Randomly construct a verified lattice for a frequency set.
    Build {
        #[arg(long)]
        freqset: PathBuf,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 20)]
        max_retries: u32,
        #[arg(long)]
        out: PathBuf,
    },
    /// Check the reconstruction property; exits 0 iff the set is covered.
    Verify {
        #[arg(long)]
        freqset: PathBuf,
        #[arg(long)]
        lattice: PathBuf,
    },
}

#[derive(Subcommand)]
enum ApproxCommand {
    Run(ApproxRunArgs),
}

#[derive(Args)]
struct ApproxRunArgs {
    #[arg(long)]
    freqset: PathBuf,
    #[arg(long)]
    lattice: PathBuf,
    /// Zoo name (unit-ball, kernel-slice, exp) or a coefficient-file path.
    #[arg(long)]
    function: String,
    /// Weight alpha (needed by unit-ball and kernel-slice).
    #[arg(long)]
    alpha: Option<f64>,
    /// Weight vector (needed by unit-ball and kernel-slice).
    #[arg(long)]
    gamma: Option<String>,
    /// Coefficient seed for unit-ball.
    #[arg(long, default_value_t = 0)]
    fn_seed: u64,
    /// Support sublevel threshold for unit-ball / kernel-slice.
    #[arg(long, default_value_t = 64.0)]
    fn_n: f64,
    /// Frequency of the exp target, e.g. 1,0
    #[arg(long)]
    fn_freq: Option<String>,
    #[arg(long)]
    out: PathBuf,
    /// Also write the raw sample vectors.
    #[arg(long)]
    samples_out: Option<PathBuf>,
}

#[derive(Args)]
struct RatesArgs {
    #[arg(long)]
    alpha: f64,
    #[arg(long)]
    alpha_tilde: f64,
    #[arg(long)]
    t: f64,
}

#[derive(Args)]
struct BoundsArgs {
    #[arg(long)]
    freqset: PathBuf,
    #[arg(long)]
    lattice: PathBuf,
    #[arg(long)]
    alpha: f64,
    #[arg(long)]
    gamma: String,
}

#[derive(Args)]
struct ConvergenceArgs {
    #[arg(long)]
    config: PathBuf,
}

const EXIT_INVARIANT: u8 = 1;
const EXIT_CONSTRUCTION: u8 = 2;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            match err {
                Error::ConstructionFailed { .. } => ExitCode::from(EXIT_CONSTRUCTION),
                _ => ExitCode::from(EXIT_INVARIANT),
            }
        }
    }
}

fn run(command: Command) -> Result<ExitCode, Error> {
    match command {
        Command::Freqset(args) => {
            let spec = WeightSpec::new(args.alpha, parse_gamma(&args.gamma)?)?;
            let set = build_adn(&spec, args.n)?;
            match args.out {
                Some(path) => {
                    let mut out = BufWriter::new(File::create(path)?);
                    set.write_text(&mut out)?;
                    out.flush()?;
                }
                None => set.write_text(std::io::stdout().lock())?,
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Lattice { command } => run_lattice(command),
        Command::Approx {
            command: ApproxCommand::Run(args),
        } => run_approx(args),
        Command::Rates(args) => {
            let params = choose_rate(args.alpha, args.alpha_tilde, args.t)?;
            println!("{}", serde_json::to_string_pretty(&params)?);
            Ok(ExitCode::SUCCESS)
        }
        Command::Bounds(args) => {
            let spec = WeightSpec::new(args.alpha, parse_gamma(&args.gamma)?)?;
            let set = read_freqset(&args.freqset)?;
            let mlat = read_lattice(&args.lattice, &set)?;
            let budget = wc_error_bound(&mlat, &spec, &set)?;
            println!("{}", serde_json::to_string_pretty(&budget)?);
            Ok(ExitCode::SUCCESS)
        }
        Command::Convergence(args) => {
            let text = std::fs::read_to_string(&args.config)?;
            let cfg: ExperimentConfig = serde_json::from_str(&text)?;
            let record = run_convergence(&cfg)?;
            let mut any_failed = false;
            for row in &record.rows {
                match row.status {
                    RowStatus::Ok => println!(
                        "N={} card={} L={} M={} bound={:.6e} err={:.6e}",
                        row.level,
                        row.card,
                        row.l.unwrap(),
                        row.m.unwrap(),
                        row.bound.unwrap(),
                        row.err_measured.unwrap(),
                    ),
                    RowStatus::ConstructionFailed => {
                        any_failed = true;
                        println!(
                            "N={} card={} construction failed after {} attempts",
                            row.level,
                            row.card,
                            row.retry_log.len()
                        );
                    }
                }
            }
            if let Some(slope) = record.slope {
                println!("slope={slope:.4}");
            }
            if any_failed {
                Ok(ExitCode::from(EXIT_CONSTRUCTION))
            } else {
                Ok(ExitCode::SUCCESS)
            }
        }
    }
}

fn run_lattice(command: LatticeCommand) -> Result<ExitCode, Error> {
    match command {
        LatticeCommand::Build {
            freqset,
            seed,
            max_retries,
            out,
        } => {
            let set = read_freqset(&freqset)?;
            let opts = ConstructOptions {
                max_retries,
                ..Default::default()
            };
            let mlat = construct(&set, seed, &opts)?;
            let file = mlat.descriptor(set.dim());
            std::fs::write(&out, serde_json::to_string_pretty(&file)?)?;
            println!(
                "L={} M={} covered={}/{} nodes={}",
                mlat.count(),
                file.lattices[0].m,
                mlat.covered(),
                set.len(),
                mlat.node_count()
            );
            Ok(ExitCode::SUCCESS)
        }
        LatticeCommand::Verify { freqset, lattice } => {
            let set = read_freqset(&freqset)?;
            let file: LatticeFile = serde_json::from_str(&std::fs::read_to_string(lattice)?)?;
            let report = verify(&file.to_lattices()?, &set)?;
            println!("{}", serde_json::to_string_pretty(&report)?);
            if report.covers {
                Ok(ExitCode::SUCCESS)
            } else {
                Ok(ExitCode::from(EXIT_INVARIANT))
            }
        }
    }
}

fn run_approx(args: ApproxRunArgs) -> Result<ExitCode, Error> {
    let set = read_freqset(&args.freqset)?;
    let mlat = read_lattice(&args.lattice, &set)?;

    let poly = match args.function.as_str() {
        name @ ("unit-ball" | "kernel-slice" | "exp") => {
            let params = ZooParams {
                seed: args.fn_seed,
                support_n: args.fn_n,
                h0: match &args.fn_freq {
                    Some(text) => parse_freq(text)?,
                    None => Vec::new(),
                },
            };
            let spec = match (name, args.alpha, &args.gamma) {
                ("exp", _, _) => WeightSpec::new(2.0, vec![1.0; set.dim()])?,
                (_, Some(alpha), Some(gamma)) => WeightSpec::new(alpha, parse_gamma(gamma)?)?,
                _ => {
                    return Err(Error::InvalidParameter(format!(
                        "--alpha and --gamma are required for the {name} target"
                    )))
                }
            };
            lattice_approx::harness::zoo(name, &spec, &params)?.poly
        }
        path => {
            let file: CoeffFile = serde_json::from_str(&std::fs::read_to_string(path)?)?;
            file.to_polynomial()?
        }
    };

    let samples = LatticeSamples::from_polynomial(&poly, &mlat)?;
    if let Some(path) = &args.samples_out {
        std::fs::write(path, serde_json::to_string(&samples.to_file())?)?;
    }
    let approx = reconstruct(&samples, &mlat, &set)?;
    std::fs::write(
        &args.out,
        serde_json::to_string_pretty(&CoeffFile::from_polynomial(&approx))?,
    )?;
    println!(
        "recovered {} coefficients from {} samples",
        approx.len(),
        mlat.node_count()
    );
    Ok(ExitCode::SUCCESS)
}

fn parse_gamma(text: &str) -> Result<Vec<f64>, Error> {
    text.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|e| Error::Parse(format!("bad gamma entry {t:?}: {e}")))
        })
        .collect()
}

fn parse_freq(text: &str) -> Result<Vec<i64>, Error> {
    text.split(',')
        .map(|t| {
            t.trim()
                .parse::<i64>()
                .map_err(|e| Error::Parse(format!("bad frequency entry {t:?}: {e}")))
        })
        .collect()
}

fn read_freqset(path: &Path) -> Result<FrequencySet, Error> {
    FrequencySet::read_text(BufReader::new(File::open(path)?))
}

fn read_lattice(path: &Path, set: &FrequencySet) -> Result<MultipleRank1Lattice, Error> {
    let file: LatticeFile = serde_json::from_str(&std::fs::read_to_string(path)?)?;
    if file.d != set.dim() {
        return Err(Error::DimensionMismatch {
            expected: set.dim(),
            got: file.d,
        });
    }
    MultipleRank1Lattice::from_lattices(file.to_lattices()?, set)
}
