//! `rksvd` command line: generate, decompose, fit PCA, benchmark.
//!
//! Exit codes: 0 success, 1 usage or invalid input, 2 I/O or file format,
//! 3 numerical failure.

use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::bench::{self, format_g17, write_csv, Baseline, Clock, GridSpectrum, RowFlag};
use crate::dense::{dense_singular_values, dense_svd, read_dmat, write_dmat, DenseMatrix};
use crate::error::{Error, Result};
use crate::pca::fit_pca;
use crate::rsvd::{randomized_ksvd, singular_values_only, RsvdConfig, DEFAULT_EPSILON, DEFAULT_OVERSAMPLE, DEFAULT_POWER_Q};
use crate::synth::{synth_matrix, SpectrumKind, SynthSpec};

pub const EXIT_USAGE: i32 = 1;
pub const EXIT_IO: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "rksvd", version, about = "Randomized truncated SVD toolkit")]
pub struct Cli {
    /// Kernel worker threads (1 disables kernel parallelism).
    #[arg(long, global = true, value_parser = clap::value_parser!(u16).range(1..))]
    pub threads: Option<u16>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a synthetic matrix with a planted spectrum.
    Gen(GenArgs),
    /// Full Jacobi SVD of a DMAT file.
    Svd(SvdArgs),
    /// Randomized rank-k SVD of a DMAT file.
    Rsvd(RsvdArgs),
    /// Principal components of a samples-as-rows DMAT file.
    Pca(PcaArgs),
    /// Timing grid against the full SVD, written as CSV.
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SpectrumArg {
    Fast,
    Sharp,
    Slow,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub rows: u64,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub cols: u64,
    #[arg(long, value_enum)]
    pub spectrum: SpectrumArg,
    /// Drop location of the sharp spectrum.
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SvdArgs {
    pub input: PathBuf,
    /// Output prefix for `.u.dmat`, `.sigma.dmat`, `.v.dmat`.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub values_only: bool,
}

/// Rank and sketch settings shared by `rsvd` and `pca`.
#[derive(Debug, Args)]
pub struct RankArgs {
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..), conflicts_with = "k_frac", required_unless_present = "k_frac")]
    pub k: Option<u64>,
    /// Rank as a fraction of the column count, rounded up.
    #[arg(long)]
    pub k_frac: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_OVERSAMPLE)]
    pub oversample: usize,
    #[arg(long, default_value_t = DEFAULT_POWER_Q)]
    pub power_q: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Accuracy parameter in (0, 1); sizes the sketch as ceil(k / epsilon)
    /// together with `--epsilon-sketch`.
    #[arg(long, default_value_t = DEFAULT_EPSILON)]
    pub epsilon: f64,
    #[arg(long)]
    pub epsilon_sketch: bool,
}

impl RankArgs {
    fn config(&self, cols: usize) -> Result<RsvdConfig> {
        let k = match (self.k, self.k_frac) {
            (Some(k), _) => k as usize,
            (None, Some(f)) => bench::k_for_fraction(f, cols)?,
            (None, None) => unreachable!("clap requires --k or --k-frac"),
        };
        Ok(RsvdConfig::new(k)
            .with_oversample(self.oversample)
            .with_power_q(self.power_q)
            .with_seed(self.seed)
            .with_epsilon(self.epsilon, self.epsilon_sketch))
    }
}

#[derive(Debug, Args)]
pub struct RsvdArgs {
    pub input: PathBuf,
    #[command(flatten)]
    pub rank: RankArgs,
    #[arg(long)]
    pub values_only: bool,
    /// Output prefix for `.u.dmat`, `.sigma.dmat`, `.v.dmat`.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct PcaArgs {
    pub input: PathBuf,
    #[command(flatten)]
    pub rank: RankArgs,
    /// Output prefix for `.mean.dmat`, `.components.dmat`, `.variance.dmat`, `.txt`.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BaselineArg {
    /// Jacobi singular values only.
    Values,
    /// Jacobi SVD with vectors.
    Full,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ClockArg {
    Wall,
    Ticks,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// One of fast-small, fast, sharp, slow, perf.
    pub preset: String,
    #[arg(long)]
    pub rows: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    pub n_grid: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    pub k_frac: Option<Vec<f64>>,
    /// Fixed drop location for the sharp spectrum instead of k + 1.
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub oversample: Option<usize>,
    #[arg(long)]
    pub power_q: Option<usize>,
    /// Seed for both the matrices and the sketches.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub reps: Option<u64>,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub baseline_reps: Option<u64>,
    #[arg(long, value_enum)]
    pub baseline: Option<BaselineArg>,
    #[arg(long)]
    pub tolerance: Option<f64>,
    /// `ticks` records every run as one second so reruns are byte-identical.
    #[arg(long, value_enum, default_value = "wall")]
    pub clock: ClockArg,
    /// CSV destination; standard output when absent.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

/// Parses `args` (including the program name) and runs the command.
pub fn run_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("rksvd: error: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    if e.is_io() {
        EXIT_IO
    } else if e.is_numerical() {
        EXIT_NUMERICAL
    } else {
        EXIT_USAGE
    }
}

pub fn run(cli: Cli) -> Result<()> {
    if let Some(t) = cli.threads {
        configure_threads(t as usize)?;
    }
    match cli.command {
        Command::Gen(a) => run_gen(&a),
        Command::Svd(a) => run_svd(&a),
        Command::Rsvd(a) => run_rsvd(&a),
        Command::Pca(a) => run_pca(&a),
        Command::Bench(a) => run_bench(&a),
    }
}

#[cfg(feature = "parallel")]
fn configure_threads(n: usize) -> Result<()> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Error::InvalidArgument(format!("cannot configure {n} threads: {e}")))
}

#[cfg(not(feature = "parallel"))]
fn configure_threads(n: usize) -> Result<()> {
    if n == 1 {
        Ok(())
    } else {
        Err(Error::InvalidArgument("built without kernel parallelism; only --threads 1 is valid".into()))
    }
}

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn column(values: &[f64]) -> DenseMatrix {
    DenseMatrix::from_vec(values.len(), 1, values.to_vec()).expect("n x 1 buffer")
}

fn run_gen(a: &GenArgs) -> Result<()> {
    let start = Instant::now();
    let kind = match (a.spectrum, a.beta) {
        (SpectrumArg::Fast, None) => SpectrumKind::FastDecay,
        (SpectrumArg::Slow, None) => SpectrumKind::SlowDecay,
        (SpectrumArg::Sharp, Some(beta)) => SpectrumKind::sharp(beta)?,
        (SpectrumArg::Sharp, None) => {
            return Err(Error::InvalidArgument("--spectrum sharp needs --beta".into()));
        }
        (_, Some(_)) => {
            return Err(Error::InvalidArgument("--beta only applies to --spectrum sharp".into()));
        }
    };
    let spec = SynthSpec::new(a.rows as usize, a.cols as usize, kind, a.seed)?;
    let m = synth_matrix(&spec)?;
    write_dmat(&a.out, &m)?;
    eprintln!(
        "gen: {}x{} spectrum={} seed={} out={} time={:.3}s",
        a.rows,
        a.cols,
        kind,
        a.seed,
        a.out.display(),
        start.elapsed().as_secs_f64()
    );
    Ok(())
}

fn run_svd(a: &SvdArgs) -> Result<()> {
    let start = Instant::now();
    let m = read_dmat(&a.input)?;
    if a.values_only {
        let sigma = dense_singular_values(&m)?;
        write_dmat(with_suffix(&a.out, ".sigma.dmat"), &column(&sigma))?;
    } else {
        let f = dense_svd(&m)?;
        write_factors(&a.out, &f.u, &f.sigma, &f.v)?;
    }
    eprintln!(
        "svd: {}x{} values_only={} time={:.3}s",
        m.rows(),
        m.cols(),
        a.values_only,
        start.elapsed().as_secs_f64()
    );
    Ok(())
}

fn write_factors(prefix: &Path, u: &DenseMatrix, sigma: &[f64], v: &DenseMatrix) -> Result<()> {
    write_dmat(with_suffix(prefix, ".u.dmat"), u)?;
    write_dmat(with_suffix(prefix, ".sigma.dmat"), &column(sigma))?;
    write_dmat(with_suffix(prefix, ".v.dmat"), v)
}

fn run_rsvd(a: &RsvdArgs) -> Result<()> {
    let start = Instant::now();
    let m = read_dmat(&a.input)?;
    let cfg = a.rank.config(m.cols())?;
    let s = cfg.sketch_width(m.rows(), m.cols());
    let residual = if a.values_only {
        let sigma = singular_values_only(&m, &cfg)?;
        write_dmat(with_suffix(&a.out, ".sigma.dmat"), &column(&sigma))?;
        None
    } else {
        let res = randomized_ksvd(&m, &cfg)?;
        write_factors(&a.out, &res.factors.u, &res.factors.sigma, &res.factors.v)?;
        Some(res.residual_fro(&m)?)
    };
    eprintln!(
        "rsvd: {}x{} k={} s={} q={} seed={} residual={} time={:.3}s",
        m.rows(),
        m.cols(),
        cfg.k,
        s,
        cfg.power_q,
        cfg.seed,
        residual.map(|r| format!("{r:.6e}")).unwrap_or_else(|| "n/a".into()),
        start.elapsed().as_secs_f64()
    );
    Ok(())
}

fn run_pca(a: &PcaArgs) -> Result<()> {
    let start = Instant::now();
    let x = read_dmat(&a.input)?;
    let cfg = a.rank.config(x.cols())?;
    let model = fit_pca(&x, cfg.k, &cfg)?;
    let (n, d) = x.shape();

    write_dmat(
        with_suffix(&a.out, ".mean.dmat"),
        &DenseMatrix::from_vec(1, d, model.mean.clone())?,
    )?;
    write_dmat(with_suffix(&a.out, ".components.dmat"), &model.components)?;
    write_dmat(with_suffix(&a.out, ".variance.dmat"), &column(&model.explained_variance))?;

    let mut header = String::new();
    writeln!(header, "k {}", cfg.k).unwrap();
    writeln!(header, "N {n}").unwrap();
    writeln!(header, "d {d}").unwrap();
    writeln!(header, "seed {}", cfg.seed).unwrap();
    writeln!(header, "explained_variance").unwrap();
    for v in &model.explained_variance {
        writeln!(header, "{}", format_g17(*v)).unwrap();
    }
    let txt = with_suffix(&a.out, ".txt");
    std::fs::write(&txt, header).map_err(|source| Error::File { path: txt, source })?;

    eprintln!(
        "pca: {}x{} k={} s={} q={} seed={} time={:.3}s",
        n,
        d,
        cfg.k,
        cfg.sketch_width(n, d),
        cfg.power_q,
        cfg.seed,
        start.elapsed().as_secs_f64()
    );
    Ok(())
}

fn run_bench(a: &BenchArgs) -> Result<()> {
    let mut g = bench::preset(&a.preset)?;
    if let Some(m) = a.rows {
        g.m = m;
    }
    if let Some(n) = &a.n_grid {
        g.n_grid = n.clone();
    }
    if let Some(f) = &a.k_frac {
        g.k_fractions = f.clone();
    }
    if let Some(beta) = a.beta {
        g.spectrum = match g.spectrum {
            GridSpectrum::SharpAtK | GridSpectrum::Sharp { .. } => GridSpectrum::Sharp { beta },
            _ => return Err(Error::InvalidArgument("--beta only applies to the sharp preset".into())),
        };
    }
    if let Some(p) = a.oversample {
        g.rsvd.oversample = p;
    }
    if let Some(q) = a.power_q {
        g.rsvd.power_q = q;
    }
    if let Some(seed) = a.seed {
        g.rsvd.seed = seed;
        g.matrix_seed = seed;
    }
    if let Some(r) = a.reps {
        g.reps = r as usize;
    }
    if let Some(r) = a.baseline_reps {
        g.baseline_reps = r as usize;
    }
    if let Some(b) = a.baseline {
        g.baseline = match b {
            BaselineArg::Values => Baseline::FullSvdValues,
            BaselineArg::Full => Baseline::FullSvd,
        };
    }
    if let Some(t) = a.tolerance {
        g.tolerance = t;
    }
    g.clock = match a.clock {
        ClockArg::Wall => Clock::Wall,
        ClockArg::Ticks => Clock::Ticks,
    };

    let start = Instant::now();
    let report = bench::run_grid(&g)?;
    let rows = report.speedup_rows();
    match &a.csv {
        Some(path) => {
            let file = File::create(path).map_err(|source| Error::File {
                path: path.clone(),
                source,
            })?;
            write_csv(&rows, BufWriter::new(file)).map_err(|source| Error::File {
                path: path.clone(),
                source,
            })?;
        }
        None => write_csv(&rows, std::io::stdout().lock())?,
    }

    for r in &report.rows {
        let note = match &r.flag {
            RowFlag::Ok => "ok".to_string(),
            RowFlag::Inaccurate => format!("FLAGGED max_rel_err > {:e}", g.tolerance),
            RowFlag::Failed(msg) => format!("FAILED {msg}"),
        };
        eprintln!(
            "bench: {} {}x{} k={} ratio={:.3} max_rel_err={:.3e} {}",
            r.row.spectrum, r.row.m, r.row.n, r.row.k, r.row.ratio, r.row.max_rel_err, note
        );
    }
    let _ = std::io::stderr().flush();
    eprintln!(
        "bench: preset={} rows={} q={} p={} seed={} threads={} clock={} time={:.3}s",
        a.preset,
        rows.len(),
        g.rsvd.power_q,
        g.rsvd.oversample,
        g.rsvd.seed,
        report.kernel_threads,
        match g.clock {
            Clock::Wall => "wall",
            Clock::Ticks => "ticks",
        },
        start.elapsed().as_secs_f64()
    );
    Ok(())
}
