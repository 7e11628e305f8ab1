//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 on usage errors (bad flags, unreadable or
//! malformed inputs, invalid parameters), 2 on computation errors. Errors are
//! reported as one JSON line on standard error.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::coherence::{coherence_distribution_of_a, histogram_csv, reduced_coherence_distribution, DEFAULT_BIN_WIDTH};
use crate::dictionary::{build_dictionary, DictionaryKind};
use crate::error::Error;
use crate::fsutil::write_atomic;
use crate::harness::{dictionary_seed, emit_results, phi_rand_seed, run_experiment, ExperimentConfig};
use crate::matrix::{format_matrix_csv, gaussian_matrix, norm, read_matrix_csv, read_vector_csv, DenseMatrix};
use crate::optimize::{optimize_mu_a, optimize_mu_cross, CrossCoherenceConfig, GramShrinkConfig, ShrinkThreshold};
use crate::recovery::{omp, signal_error, BasisPursuit, BpConfig, SparseVector, SUCCESS_THRESHOLD};
use crate::rng::RngSeed;

#[derive(Debug, Parser)]
#[command(name = "cs-adapt", version, about = "Measurement matrix adaptation and sparse recovery benchmarks")]
pub struct Cli {
    /// Worker threads for parallel trials [default: number of CPUs]
    #[arg(long, global = true, value_name = "N")]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Optimize a measurement matrix against a dictionary
    Optimize(OptimizeArgs),
    /// Recover a sparse coefficient vector from measurements
    Recover(RecoverArgs),
    /// Run a Monte Carlo recovery experiment from a JSON config
    Experiment(ExperimentArgs),
    /// Write the pairwise coherence distribution of a matrix and dictionary
    Coherence(CoherenceArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Objective {
    /// Mutual column coherence of ΦΨ (Gram shrinkage)
    Mua,
    /// Cross coherence of Φ rows and Ψ columns (smoothed-max descent)
    Cross,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AlgoArg {
    Omp,
    Bp,
}

#[derive(Debug, Args)]
pub struct OptimizeArgs {
    #[arg(long, value_enum)]
    pub objective: Objective,
    /// Dictionary: idct, gauss or file:PATH
    #[arg(long, value_name = "DICT", default_value = "idct")]
    pub dict: String,
    #[arg(long, default_value_t = 30)]
    pub m: usize,
    /// Signal dimension [default: 200, or taken from a dictionary file]
    #[arg(long)]
    pub n: Option<usize>,
    /// Number of atoms [default: 2n, or taken from a dictionary file]
    #[arg(long)]
    pub l: Option<usize>,
    /// Master seed for the dictionary, the Gaussian start and the optimizer
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Iterations [default: 1000 for mua, 2000 for cross]
    #[arg(long)]
    pub iters: Option<usize>,
    /// mua: shrink entries above this quantile of the off-diagonal |G|
    #[arg(long, value_name = "Q", conflicts_with = "threshold")]
    pub threshold_quantile: Option<f64>,
    /// mua: fixed shrink threshold t in (0, 1]
    #[arg(long, value_name = "T")]
    pub threshold: Option<f64>,
    /// mua: shrink factor γ in (0, 1)
    #[arg(long, value_name = "GAMMA")]
    pub shrink_factor: Option<f64>,
    /// cross: even smoothing exponent p
    #[arg(long, value_name = "P")]
    pub smoothing_exponent: Option<u32>,
    /// cross: initial step size
    #[arg(long, value_name = "ETA")]
    pub step_size: Option<f64>,
    /// cross: multiplicative step decay in (0, 1]
    #[arg(long, value_name = "D")]
    pub step_decay: Option<f64>,
    /// Output CSV for the optimized matrix [default: stdout]
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Output JSON with per-iteration objective values
    #[arg(long, value_name = "PATH")]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RecoverArgs {
    /// Measurement matrix Φ (CSV)
    #[arg(long, value_name = "PATH")]
    pub matrix: PathBuf,
    /// Dictionary: CSV path, file:PATH, idct or gauss
    #[arg(long, value_name = "DICT")]
    pub dict: String,
    /// Measurement vector y (CSV, one column or one row)
    #[arg(long, value_name = "PATH")]
    pub y: PathBuf,
    #[arg(long, value_enum)]
    pub algo: AlgoArg,
    /// OMP sparsity budget [default: number of measurements]
    #[arg(long)]
    pub k: Option<usize>,
    /// True coefficients; adds the signal error and success flag to the metadata
    #[arg(long, value_name = "PATH")]
    pub alpha: Option<PathBuf>,
    /// Number of atoms for a generated dictionary [default: 2n]
    #[arg(long)]
    pub l: Option<usize>,
    /// Seed for a generated gauss dictionary
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output CSV for the estimate [default: stdout]
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    /// JSON experiment config; omitted fields take their defaults
    #[arg(long, value_name = "PATH")]
    pub config: PathBuf,
    /// Output directory
    #[arg(long, value_name = "DIR", default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct CoherenceArgs {
    /// Measurement matrix Φ (CSV)
    #[arg(long, value_name = "PATH")]
    pub matrix: PathBuf,
    /// Dictionary: CSV path, file:PATH, idct or gauss
    #[arg(long, value_name = "DICT")]
    pub dict: String,
    /// Distribution of [Φᵀ, Ψ] without Ψ-Ψ pairs instead of the columns of ΦΨ
    #[arg(long)]
    pub reduced: bool,
    /// Number of atoms for a generated dictionary [default: 2n]
    #[arg(long)]
    pub l: Option<usize>,
    /// Seed for a generated gauss dictionary
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output CSV with columns pair_label,value [default: stdout]
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Also write a histogram CSV with columns bin_center,count
    #[arg(long, value_name = "PATH")]
    pub hist: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_BIN_WIDTH)]
    pub bin_width: f64,
}

/// A failed invocation and its exit code class.
#[derive(Debug)]
pub enum Failure {
    Usage(Error),
    Computation(Error),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Computation(_) => 2,
        }
    }

    fn to_json_line(&self) -> String {
        let (kind, e) = match self {
            Failure::Usage(e) => ("usage", e),
            Failure::Computation(e) => ("computation", e),
        };
        json!({ "error": kind, "message": e.to_string() }).to_string()
    }
}

/// Invalid parameters are the caller's fault; everything else that goes
/// wrong after the inputs were loaded is a computation error.
fn classify(e: Error) -> Failure {
    match e.root() {
        Error::InvalidArgument(_) | Error::Parse { .. } | Error::Json { .. } => Failure::Usage(e),
        _ => Failure::Computation(e),
    }
}

fn usage(e: Error) -> Failure {
    Failure::Usage(e)
}

fn usage_msg(msg: impl Into<String>) -> Failure {
    Failure::Usage(Error::InvalidArgument(msg.into()))
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return 0;
            }
            let detail = e.to_string();
            let first = detail.lines().next().unwrap_or_default().trim_start_matches("error: ");
            eprintln!("{}", json!({ "error": "usage", "message": first }));
            return 1;
        }
    };
    match dispatch(cli) {
        Ok(()) => 0,
        Err(f) => {
            eprintln!("{}", f.to_json_line());
            f.exit_code()
        }
    }
}

pub fn dispatch(cli: Cli) -> Result<(), Failure> {
    if let Some(threads) = cli.threads {
        if threads == 0 {
            return Err(usage_msg("--threads must be at least 1"));
        }
        // A second initialization in the same process keeps the first pool.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    }
    match cli.command {
        Command::Optimize(a) => optimize(a),
        Command::Recover(a) => recover(a),
        Command::Experiment(a) => experiment(a),
        Command::Coherence(a) => coherence(a),
    }
}

fn parse_dict(s: &str) -> DictionaryKind {
    s.parse().unwrap_or_else(|_| DictionaryKind::FromFile(PathBuf::from(s)))
}

/// Builds the dictionary for signal dimension `n`. A file dictionary is
/// loaded as is and must have `n` rows.
fn load_dictionary(kind: &DictionaryKind, n: usize, l: Option<usize>, master: RngSeed) -> Result<DenseMatrix, Failure> {
    match kind {
        DictionaryKind::FromFile(path) => {
            let psi = read_matrix_csv(path).map_err(usage)?;
            let l = l.unwrap_or(psi.cols());
            build_dictionary(kind, n, l, master).map_err(classify)
        }
        DictionaryKind::IdentityDct => build_dictionary(kind, n, l.unwrap_or(2 * n), master).map_err(usage),
        DictionaryKind::GaussianRandom => {
            build_dictionary(kind, n, l.unwrap_or(2 * n), dictionary_seed(master)).map_err(usage)
        }
    }
}

fn write_output(path: Option<&Path>, content: &str) -> Result<(), Failure> {
    match path {
        Some(p) => write_atomic(p, content.as_bytes()).map_err(Failure::Computation),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(content.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| Failure::Computation(Error::io("<stdout>", e)))
        }
    }
}

fn optimize(a: OptimizeArgs) -> Result<(), Failure> {
    let master = RngSeed(a.seed);
    let kind = parse_dict(&a.dict);
    let psi = match &kind {
        DictionaryKind::FromFile(path) => {
            let raw = read_matrix_csv(path).map_err(usage)?;
            let n = a.n.unwrap_or(raw.rows());
            build_dictionary(&kind, n, a.l.unwrap_or(raw.cols()), master).map_err(classify)?
        }
        _ => {
            let n = a.n.unwrap_or(200);
            load_dictionary(&kind, n, a.l, master)?
        }
    };
    let (n, l) = psi.shape();
    if a.m == 0 || a.m > n {
        return Err(usage_msg(format!("--m must be in 1..={n}, got {}", a.m)));
    }
    let phi0 = gaussian_matrix(a.m, n, phi_rand_seed(master)).map_err(classify)?;

    let (phi, report) = match a.objective {
        Objective::Mua => {
            if a.smoothing_exponent.is_some() || a.step_size.is_some() || a.step_decay.is_some() {
                return Err(usage_msg("cross-only flags given with --objective mua"));
            }
            if a.m > n || n > l {
                return Err(usage_msg(format!("mua needs m <= n <= l, got m={}, n={n}, l={l}", a.m)));
            }
            let mut cfg = GramShrinkConfig {
                seed: master,
                ..GramShrinkConfig::default()
            };
            if let Some(it) = a.iters {
                cfg.iterations = it;
            }
            if let Some(q) = a.threshold_quantile {
                cfg.threshold = ShrinkThreshold::Quantile(q);
            }
            if let Some(t) = a.threshold {
                cfg.threshold = ShrinkThreshold::Absolute(t);
            }
            if let Some(g) = a.shrink_factor {
                cfg.shrink_factor = g;
            }
            cfg.validate().map_err(usage)?;
            optimize_mu_a(&phi0, &psi, &cfg).map_err(classify)?
        }
        Objective::Cross => {
            if a.threshold_quantile.is_some() || a.threshold.is_some() || a.shrink_factor.is_some() {
                return Err(usage_msg("mua-only flags given with --objective cross"));
            }
            let mut cfg = CrossCoherenceConfig {
                seed: master,
                ..CrossCoherenceConfig::default()
            };
            if let Some(it) = a.iters {
                cfg.iterations = it;
            }
            if let Some(p) = a.smoothing_exponent {
                cfg.smoothing_exponent = p;
            }
            if let Some(s) = a.step_size {
                cfg.step_size = s;
            }
            if let Some(d) = a.step_decay {
                cfg.step_decay = d;
            }
            cfg.validate().map_err(usage)?;
            optimize_mu_cross(&phi0, &psi, &cfg).map_err(classify)?
        }
    };

    // Serialize everything before touching the filesystem.
    let report_json = serde_json::to_string_pretty(&report).expect("report serializes");
    let matrix_csv = format_matrix_csv(&phi);
    if let Some(p) = &a.report {
        write_atomic(p, report_json.as_bytes()).map_err(Failure::Computation)?;
    }
    write_output(a.out.as_deref(), &matrix_csv)
}

fn recover(a: RecoverArgs) -> Result<(), Failure> {
    let phi = read_matrix_csv(&a.matrix).map_err(usage)?;
    let y = read_vector_csv(&a.y).map_err(usage)?;
    let psi = load_dictionary(&parse_dict(&a.dict), phi.cols(), a.l, RngSeed(a.seed))?;
    let truth = match &a.alpha {
        Some(p) => Some(read_vector_csv(p).map_err(usage)?),
        None => None,
    };
    let sensing = phi.matmul(&psi).map_err(classify)?;
    let (m, l) = sensing.shape();

    let mut meta = serde_json::Map::new();
    meta.insert("algorithm".into(), json!(format!("{:?}", a.algo).to_lowercase()));
    let estimate = match a.algo {
        AlgoArg::Omp => {
            let k = a.k.unwrap_or(m);
            let sol = omp(&sensing, &y, k, 1e-7).map_err(classify)?;
            meta.insert("iterations".into(), json!(sol.selection_order.len()));
            meta.insert("converged".into(), json!(true));
            sol.estimate
        }
        AlgoArg::Bp => {
            if a.k.is_some() {
                return Err(usage_msg("--k applies to omp only"));
            }
            let sol = BasisPursuit::new(&sensing, BpConfig::default())
                .and_then(|bp| bp.solve(&y))
                .map_err(classify)?;
            meta.insert("iterations".into(), json!(sol.iterations));
            meta.insert("converged".into(), json!(sol.converged));
            meta.insert("polished".into(), json!(sol.polished));
            sol.estimate
        }
    };
    let dense = estimate.to_dense();
    let fit = sensing.matvec(&dense).map_err(classify)?;
    let resid: Vec<f64> = fit.iter().zip(&y).map(|(f, v)| f - v).collect();
    let y_norm = norm(&y);
    meta.insert("sparsity".into(), json!(estimate.sparsity()));
    meta.insert("support".into(), json!(estimate.support()));
    meta.insert(
        "relative_residual".into(),
        json!(if y_norm > 0.0 { norm(&resid) / y_norm } else { norm(&resid) }),
    );
    if let Some(t) = truth {
        if t.len() != l {
            return Err(classify(Error::DimensionMismatch {
                op: "recover --alpha",
                left_rows: l,
                left_cols: 1,
                right_rows: t.len(),
                right_cols: 1,
            }));
        }
        let alpha = SparseVector::from_dense(&t, 0.0);
        let err = signal_error(&psi, &alpha, &estimate).map_err(classify)?;
        meta.insert("signal_error".into(), json!(err));
        meta.insert("success".into(), json!(err < SUCCESS_THRESHOLD));
    }

    let matrix = DenseMatrix::new(l, 1, dense).map_err(classify)?;
    write_output(a.out.as_deref(), &format_matrix_csv(&matrix))?;
    eprintln!("{}", serde_json::Value::Object(meta));
    Ok(())
}

fn experiment(a: ExperimentArgs) -> Result<(), Failure> {
    let cfg = ExperimentConfig::from_json_file(&a.config).map_err(usage)?;
    let result = run_experiment(&cfg).map_err(classify)?;
    emit_results(&result, &a.out).map_err(Failure::Computation)?;
    Ok(())
}

fn coherence(a: CoherenceArgs) -> Result<(), Failure> {
    if !(a.bin_width > 0.0 && a.bin_width.is_finite()) {
        return Err(usage_msg(format!("--bin-width must be positive, got {}", a.bin_width)));
    }
    let phi = read_matrix_csv(&a.matrix).map_err(usage)?;
    let psi = load_dictionary(&parse_dict(&a.dict), phi.cols(), a.l, RngSeed(a.seed))?;
    let dist = if a.reduced {
        reduced_coherence_distribution(&phi, &psi)
    } else {
        phi.matmul(&psi).and_then(|s| coherence_distribution_of_a(&s))
    }
    .map_err(classify)?;
    let dist_csv = dist.to_csv();
    if let Some(h) = &a.hist {
        let bins = dist.histogram(a.bin_width).map_err(classify)?;
        write_atomic(h, histogram_csv(&bins).as_bytes()).map_err(Failure::Computation)?;
    }
    write_output(a.out.as_deref(), &dist_csv)
}
