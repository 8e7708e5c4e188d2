//! Timing harness: repeated wall-clock runs, mean and sample standard
//! deviation, speedup ratios with their error band, and CSV output.
//!
//! Standard deviations use the `n - 1` divisor (zero for a single run). Every
//! timed series is preceded by one untimed warm-up run.

use std::io::{BufRead, Write};
use std::time::Instant;

use crate::dense::{dense_singular_values, dense_svd, kernel_threads, DenseMatrix};
use crate::error::{Error, Result};
use crate::rsvd::{singular_values_only, RsvdConfig};
use crate::synth::{synth_matrix, SpectrumKind, SynthSpec};

/// Timer floor so every recorded sample is strictly positive.
const MIN_SECONDS: f64 = 1e-9;

pub const CSV_HEADER: &str = "spectrum,m,n,k_fraction,k,competitor,mean_competitor_s,std_competitor_s,mean_ours_s,std_ours_s,ratio,band_lo,band_hi,max_rel_err";

#[derive(Debug, Clone, PartialEq)]
pub struct TimingSample {
    pub solver_name: String,
    pub wall_seconds: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchStats {
    pub solver_name: String,
    pub n_runs: usize,
    pub mean_seconds: f64,
    pub std_seconds: f64,
}

impl BenchStats {
    pub fn from_seconds(solver_name: &str, seconds: &[f64]) -> Result<Self> {
        if seconds.is_empty() {
            return Err(Error::InvalidArgument("statistics need at least one run".into()));
        }
        let n = seconds.len() as f64;
        let mean = seconds.iter().sum::<f64>() / n;
        let std = if seconds.len() > 1 {
            (seconds.iter().map(|t| (t - mean) * (t - mean)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        Ok(Self {
            solver_name: solver_name.to_string(),
            n_runs: seconds.len(),
            mean_seconds: mean,
            std_seconds: std,
        })
    }
}

/// Result of [`time_solver`]: statistics, the raw samples and every output.
#[derive(Debug, Clone)]
pub struct Timed<T> {
    pub stats: BenchStats,
    pub samples: Vec<TimingSample>,
    pub outputs: Vec<T>,
}

impl<T> Timed<T> {
    pub fn seconds(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.wall_seconds).collect()
    }

    pub fn median_seconds(&self) -> f64 {
        median(&self.seconds())
    }
}

/// Source of per-run durations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Clock {
    /// Monotonic wall-clock time.
    #[default]
    Wall,
    /// Every run counts as exactly one second. Makes reports reproducible
    /// byte for byte; only the accuracy columns stay informative.
    Ticks,
}

/// Runs `task` once untimed, then `repetitions` timed times.
pub fn time_solver<T, F>(solver_name: &str, repetitions: usize, task: F) -> Result<Timed<T>>
where
    F: FnMut() -> Result<T>,
{
    time_solver_with(Clock::Wall, solver_name, repetitions, task)
}

/// [`time_solver`] with an explicit clock.
pub fn time_solver_with<T, F>(clock: Clock, solver_name: &str, repetitions: usize, mut task: F) -> Result<Timed<T>>
where
    F: FnMut() -> Result<T>,
{
    if repetitions == 0 {
        return Err(Error::InvalidArgument("repetitions must be at least 1".into()));
    }
    task()?;
    let mut samples = Vec::with_capacity(repetitions);
    let mut outputs = Vec::with_capacity(repetitions);
    for _ in 0..repetitions {
        let start = Instant::now();
        let out = task()?;
        let secs = match clock {
            Clock::Wall => start.elapsed().as_secs_f64().max(MIN_SECONDS),
            Clock::Ticks => 1.0,
        };
        samples.push(TimingSample {
            solver_name: solver_name.to_string(),
            wall_seconds: secs,
        });
        outputs.push(out);
    }
    let secs: Vec<f64> = samples.iter().map(|s| s.wall_seconds).collect();
    Ok(Timed {
        stats: BenchStats::from_seconds(solver_name, &secs)?,
        samples,
        outputs,
    })
}

pub fn median(xs: &[f64]) -> f64 {
    assert!(!xs.is_empty(), "median of nothing");
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    if v.len() % 2 == 1 {
        v[mid]
    } else {
        0.5 * (v[mid - 1] + v[mid])
    }
}

/// Ratio `mean(*) / mean(ours)` with the band
/// `[(mean(*) - std(*)) / (mean(ours) + std(ours)), (mean(*) + std(*)) / (mean(ours) - std(ours))]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Speedup {
    pub ratio: f64,
    pub band_lo: f64,
    /// `None` when `mean(ours) <= std(ours)`: the upper edge is unbounded.
    pub band_hi: Option<f64>,
}

pub fn speedup_ratio(competitor: &BenchStats, ours: &BenchStats) -> Result<Speedup> {
    let (mc, sc) = (competitor.mean_seconds, competitor.std_seconds);
    let (mo, so) = (ours.mean_seconds, ours.std_seconds);
    if mo.is_nan() || mo <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "speedup needs a positive mean for our solver, got {mo}"
        )));
    }
    Ok(Speedup {
        ratio: mc / mo,
        band_lo: (mc - sc) / (mo + so),
        band_hi: (mo > so).then(|| (mc + sc) / (mo - so)),
    })
}

/// One CSV line.
#[derive(Debug, Clone, PartialEq)]
pub struct SpeedupRow {
    pub spectrum: String,
    pub m: usize,
    pub n: usize,
    pub k_fraction: f64,
    pub k: usize,
    pub competitor: String,
    pub mean_competitor_s: f64,
    pub std_competitor_s: f64,
    pub mean_ours_s: f64,
    pub std_ours_s: f64,
    pub ratio: f64,
    pub band_lo: f64,
    pub band_hi: Option<f64>,
    /// Worst relative error of our top-`k` values against the competitor's.
    pub max_rel_err: f64,
}

impl SpeedupRow {
    fn fill(&mut self, competitor: &BenchStats, ours: &BenchStats) -> Result<()> {
        let sp = speedup_ratio(competitor, ours)?;
        self.competitor = competitor.solver_name.clone();
        self.mean_competitor_s = competitor.mean_seconds;
        self.std_competitor_s = competitor.std_seconds;
        self.mean_ours_s = ours.mean_seconds;
        self.std_ours_s = ours.std_seconds;
        self.ratio = sp.ratio;
        self.band_lo = sp.band_lo;
        self.band_hi = sp.band_hi;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum RowFlag {
    Ok,
    /// `max_rel_err` exceeded the tolerance.
    Inaccurate,
    /// A solver returned an error; timing fields are NaN.
    Failed(String),
}

#[derive(Debug, Clone)]
pub struct GridRow {
    pub row: SpeedupRow,
    pub flag: RowFlag,
    pub competitor_seconds: Vec<f64>,
    pub ours_seconds: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct BenchReport {
    pub rows: Vec<GridRow>,
    /// Worker threads available to the kernels while timing.
    pub kernel_threads: usize,
}

impl BenchReport {
    pub fn speedup_rows(&self) -> Vec<SpeedupRow> {
        self.rows.iter().map(|r| r.row.clone()).collect()
    }
}

/// Spectrum choice for a grid; `SharpAtK` places the drop at `beta = k + 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GridSpectrum {
    Fast,
    SharpAtK,
    Sharp { beta: f64 },
    Slow,
}

impl GridSpectrum {
    pub fn kind_for(&self, k: usize) -> Result<SpectrumKind> {
        match *self {
            GridSpectrum::Fast => Ok(SpectrumKind::FastDecay),
            GridSpectrum::SharpAtK => SpectrumKind::sharp(k as f64 + 1.0),
            GridSpectrum::Sharp { beta } => SpectrumKind::sharp(beta),
            GridSpectrum::Slow => Ok(SpectrumKind::SlowDecay),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            GridSpectrum::Fast => "fast",
            GridSpectrum::SharpAtK | GridSpectrum::Sharp { .. } => "sharp",
            GridSpectrum::Slow => "slow",
        }
    }
}

/// Full-SVD solver timed against ours.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Baseline {
    /// Jacobi SVD, values only.
    FullSvdValues,
    /// Jacobi SVD with both factor matrices.
    FullSvd,
}

impl Baseline {
    pub fn name(&self) -> &'static str {
        match self {
            Baseline::FullSvdValues => "jacobi_values",
            Baseline::FullSvd => "jacobi_svd",
        }
    }

    pub fn run(&self, a: &DenseMatrix) -> Result<Vec<f64>> {
        match self {
            Baseline::FullSvdValues => dense_singular_values(a),
            Baseline::FullSvd => Ok(dense_svd(a)?.sigma),
        }
    }
}

#[derive(Debug, Clone)]
pub struct GridConfig {
    pub spectrum: GridSpectrum,
    pub m: usize,
    pub n_grid: Vec<usize>,
    pub k_fractions: Vec<f64>,
    /// Sketch settings; `k` is replaced per row.
    pub rsvd: RsvdConfig,
    pub baseline: Baseline,
    /// Seed of the synthetic matrices.
    pub matrix_seed: u64,
    pub reps: usize,
    pub baseline_reps: usize,
    pub tolerance: f64,
    pub clock: Clock,
}

pub const PRESETS: &[&str] = &["fast-small", "fast", "sharp", "slow", "perf"];

/// k fractions used by the full-size presets.
pub const DEFAULT_K_FRACTIONS: [f64; 4] = [0.01, 0.03, 0.05, 0.10];

/// Named grid settings. `fast-small` is a quick fast-decay grid sized so the
/// default two subspace rounds meet the 1e-8 tolerance; `perf` is the single
/// 2000 x 2000, 1% cell used for the speed comparison.
pub fn preset(name: &str) -> Result<GridConfig> {
    let full = |spectrum, q| GridConfig {
        spectrum,
        m: 2000,
        n_grid: vec![250, 500, 1000, 2000],
        k_fractions: DEFAULT_K_FRACTIONS.to_vec(),
        rsvd: RsvdConfig::new(1).with_power_q(q),
        baseline: Baseline::FullSvdValues,
        matrix_seed: 0,
        reps: 10,
        baseline_reps: 3,
        tolerance: 1e-8,
        clock: Clock::Wall,
    };
    Ok(match name {
        "fast-small" => GridConfig {
            m: 200,
            n_grid: vec![50, 100],
            k_fractions: vec![0.01, 0.03, 0.05],
            reps: 3,
            baseline_reps: 2,
            ..full(GridSpectrum::Fast, 2)
        },
        "fast" => full(GridSpectrum::Fast, 2),
        "sharp" => full(GridSpectrum::SharpAtK, 4),
        "slow" => full(GridSpectrum::Slow, 6),
        "perf" => GridConfig {
            n_grid: vec![2000],
            k_fractions: vec![0.01],
            ..full(GridSpectrum::Fast, 2)
        },
        other => {
            return Err(Error::InvalidArgument(format!(
                "unknown preset {other:?}; expected one of {}",
                PRESETS.join(", ")
            )))
        }
    })
}

/// `⌈fraction · n⌉`, rejecting fractions that give `k = 0` or `k > n`.
pub fn k_for_fraction(fraction: f64, n: usize) -> Result<usize> {
    let k = (fraction * n as f64).ceil();
    if !(k >= 1.0 && k <= n as f64) {
        return Err(Error::InvalidArgument(format!(
            "k fraction {fraction} gives k={k} for n={n}"
        )));
    }
    Ok(k as usize)
}

/// Largest relative difference over the first `k` entries.
pub fn max_rel_err(ours: &[f64], reference: &[f64], k: usize) -> f64 {
    (0..k)
        .map(|i| match (ours.get(i), reference.get(i)) {
            (Some(x), Some(r)) => (x - r).abs() / r.abs(),
            _ => f64::INFINITY,
        })
        .fold(0.0, |a, e| if e.is_nan() || e > a { e } else { a })
}

/// Times the baseline and our values-only solver on every `(n, fraction)` cell.
pub fn run_grid(cfg: &GridConfig) -> Result<BenchReport> {
    let mut rows = Vec::new();
    for &n in &cfg.n_grid {
        for &fraction in &cfg.k_fractions {
            let k = k_for_fraction(fraction, n)?;
            let kind = cfg.spectrum.kind_for(k)?;
            let spec = SynthSpec::new(cfg.m, n, kind, cfg.matrix_seed)?;
            let mut row = SpeedupRow {
                spectrum: cfg.spectrum.name().to_string(),
                m: cfg.m,
                n,
                k_fraction: fraction,
                k,
                competitor: cfg.baseline.name().to_string(),
                mean_competitor_s: f64::NAN,
                std_competitor_s: f64::NAN,
                mean_ours_s: f64::NAN,
                std_ours_s: f64::NAN,
                ratio: f64::NAN,
                band_lo: f64::NAN,
                band_hi: None,
                max_rel_err: f64::NAN,
            };
            match time_cell(cfg, &spec, k, &mut row) {
                Ok((competitor_seconds, ours_seconds)) => {
                    let flag = if row.max_rel_err <= cfg.tolerance {
                        RowFlag::Ok
                    } else {
                        RowFlag::Inaccurate
                    };
                    rows.push(GridRow {
                        row,
                        flag,
                        competitor_seconds,
                        ours_seconds,
                    });
                }
                Err(e) => rows.push(GridRow {
                    row,
                    flag: RowFlag::Failed(e.to_string()),
                    competitor_seconds: Vec::new(),
                    ours_seconds: Vec::new(),
                }),
            }
        }
    }
    Ok(BenchReport {
        rows,
        kernel_threads: kernel_threads(),
    })
}

fn time_cell(cfg: &GridConfig, spec: &SynthSpec, k: usize, row: &mut SpeedupRow) -> Result<(Vec<f64>, Vec<f64>)> {
    let a = synth_matrix(spec)?;
    let rcfg = RsvdConfig { k, ..cfg.rsvd };
    let base = time_solver_with(cfg.clock, cfg.baseline.name(), cfg.baseline_reps, || cfg.baseline.run(&a))?;
    let ours = time_solver_with(cfg.clock, "rsvd_values", cfg.reps, || singular_values_only(&a, &rcfg))?;
    row.max_rel_err = max_rel_err(&ours.outputs[0], &base.outputs[0], k);
    row.fill(&base.stats, &ours.stats)?;
    Ok((base.seconds(), ours.seconds()))
}

/// C-style `%.17g`: enough digits to round-trip any `f64`.
pub fn format_g17(x: f64) -> String {
    if x.is_nan() {
        return "NaN".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let sci = format!("{:.16e}", x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    let (sign, mantissa) = match mantissa.strip_prefix('-') {
        Some(rest) => ("-", rest),
        None => ("", mantissa),
    };
    let digits: String = mantissa.chars().filter(|c| *c != '.').collect();

    if !(-4..17).contains(&exp) {
        let mut m = format!("{}.{}", &digits[..1], &digits[1..]);
        trim_fraction(&mut m);
        let esign = if exp < 0 { '-' } else { '+' };
        return format!("{sign}{m}e{esign}{:02}", exp.abs());
    }
    let mut body = if exp >= 0 {
        let int_len = exp as usize + 1;
        format!("{}.{}", &digits[..int_len], &digits[int_len..])
    } else {
        format!("0.{}{}", "0".repeat((-exp - 1) as usize), digits)
    };
    trim_fraction(&mut body);
    format!("{sign}{body}")
}

fn trim_fraction(s: &mut String) {
    if s.contains('.') {
        while s.ends_with('0') {
            s.pop();
        }
        if s.ends_with('.') {
            s.pop();
        }
    }
}

pub fn write_csv<W: Write>(rows: &[SpeedupRow], mut out: W) -> std::io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.spectrum,
            r.m,
            r.n,
            format_g17(r.k_fraction),
            r.k,
            r.competitor,
            format_g17(r.mean_competitor_s),
            format_g17(r.std_competitor_s),
            format_g17(r.mean_ours_s),
            format_g17(r.std_ours_s),
            format_g17(r.ratio),
            format_g17(r.band_lo),
            r.band_hi.map(format_g17).unwrap_or_default(),
            format_g17(r.max_rel_err),
        )?;
    }
    out.flush()
}

/// Parses a file produced by [`write_csv`].
pub fn read_csv<R: BufRead>(input: R) -> Result<Vec<SpeedupRow>> {
    let mut lines = input.lines();
    match lines.next().transpose()? {
        Some(h) if h == CSV_HEADER => {}
        other => {
            return Err(Error::InvalidArgument(format!("unexpected CSV header: {other:?}")));
        }
    }
    let mut rows = Vec::new();
    for (lineno, line) in lines.enumerate() {
        let line = line?;
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 14 {
            return Err(Error::InvalidArgument(format!(
                "CSV line {}: expected 14 fields, got {}",
                lineno + 2,
                f.len()
            )));
        }
        let bad = |what: &str| Error::InvalidArgument(format!("CSV line {}: bad {what}", lineno + 2));
        let float = |i: usize, what: &str| f[i].parse::<f64>().map_err(|_| bad(what));
        let count = |i: usize, what: &str| f[i].parse::<usize>().map_err(|_| bad(what));
        rows.push(SpeedupRow {
            spectrum: f[0].to_string(),
            m: count(1, "m")?,
            n: count(2, "n")?,
            k_fraction: float(3, "k_fraction")?,
            k: count(4, "k")?,
            competitor: f[5].to_string(),
            mean_competitor_s: float(6, "mean_competitor_s")?,
            std_competitor_s: float(7, "std_competitor_s")?,
            mean_ours_s: float(8, "mean_ours_s")?,
            std_ours_s: float(9, "std_ours_s")?,
            ratio: float(10, "ratio")?,
            band_lo: float(11, "band_lo")?,
            band_hi: if f[12].is_empty() { None } else { Some(float(12, "band_hi")?) },
            max_rel_err: float(13, "max_rel_err")?,
        });
    }
    Ok(rows)
}
