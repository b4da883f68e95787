//! End-to-end experiment pipelines: frequency set -> lattice -> samples ->
//! reconstruction -> measured error, swept over a schedule of set levels.
//!
//! Results go to a fixed-column CSV and a JSON sidecar. The sidecar omits
//! wall-clock timings, so equal configurations produce byte-identical
//! sidecars; the CSV keeps a `seconds` column for convenience and is
//! deterministic in every other column.

use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::freqset::{build_adn, truncation_error, Fnv1a, FrequencySet, WeightSpec};
use crate::korobov::{measure_sup_deviation, unit_ball_polynomial, MeasureProtocol};
use crate::lattice::{construct, AttemptRecord, ConstructOptions, MultipleRank1Lattice};
use crate::spectral::{reconstruct, CoeffFile, LatticeSamples, TrigPolynomial};

pub const RESULT_FORMAT_VERSION: u32 = 1;
pub const CSV_HEADER: &str = "N,card,L,M,sigma_tail,bound,err_measured,a_n,seconds";

/// A fully deterministic description of one convergence run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub d: usize,
    pub alpha: f64,
    pub gamma: Vec<f64>,
    /// Sublevel thresholds N, one row per entry.
    pub n_schedule: Vec<f64>,
    pub seed: u64,
    pub function: FunctionSpec,
    /// Number of test functions per row (used by the unit-ball target;
    /// deterministic targets ignore it).
    #[serde(default = "default_ensemble")]
    pub ensemble: usize,
    #[serde(default = "default_retries")]
    pub max_retries: u32,
    #[serde(default)]
    pub measure: MeasureSettings,
    #[serde(default)]
    pub out_csv: Option<PathBuf>,
    #[serde(default)]
    pub out_json: Option<PathBuf>,
}

fn default_ensemble() -> usize {
    1
}

fn default_retries() -> u32 {
    20
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct MeasureSettings {
    pub grid_side: usize,
    pub lowdisc_points: usize,
    pub random_points: usize,
}

impl Default for MeasureSettings {
    fn default() -> Self {
        let p = MeasureProtocol::default();
        MeasureSettings {
            grid_side: p.grid_side,
            lowdisc_points: p.lowdisc_points,
            random_points: p.random_points,
        }
    }
}

/// Which function the pipeline samples.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum FunctionSpec {
    /// Fresh random polynomials of weighted norm one per row, supported on
    /// the sublevel set at `support_n` (or at the row level, if larger).
    UnitBall { support_n: f64 },
    /// `g(x) = sum_{h} r_d(h)^{-1} e^(2 pi i h.x)` over the sublevel set at
    /// `support_n`.
    KernelSlice { support_n: f64 },
    /// A single exponential `e^(2 pi i h0.x)`.
    Exp { freq: Vec<i64> },
    /// Exact coefficients loaded from a JSON coefficient file.
    CoeffFile { path: PathBuf },
}

/// One schedule row. Lattice-dependent fields are absent when the
/// randomized construction exhausted its retries; the retry log stays.
#[derive(Debug, Clone, Serialize)]
pub struct RowResult {
    #[serde(rename = "N")]
    pub level: f64,
    pub card: usize,
    pub status: RowStatus,
    #[serde(rename = "L")]
    pub l: Option<usize>,
    #[serde(rename = "M")]
    pub m: Option<u64>,
    pub sigma_tail: f64,
    pub bound: Option<f64>,
    pub err_measured: Option<f64>,
    pub a_n: f64,
    #[serde(skip)]
    pub seconds: f64,
    pub retry_log: Vec<AttemptRecord>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RowStatus {
    Ok,
    ConstructionFailed,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceRecord {
    pub format_version: u32,
    pub config: ExperimentConfig,
    pub rows: Vec<RowResult>,
    /// OLS slope of `ln err` against `ln M` over rows with `err > 1e-12`.
    pub slope: Option<f64>,
}

/// Runs the full pipeline over the schedule. Rows whose lattice
/// construction fails are recorded and the run continues; every other
/// error aborts.
pub fn run_convergence(cfg: &ExperimentConfig) -> Result<ConvergenceRecord> {
    let spec = WeightSpec::new(cfg.alpha, cfg.gamma.clone())?;
    if spec.dim() != cfg.d {
        return Err(Error::DimensionMismatch {
            expected: cfg.d,
            got: spec.dim(),
        });
    }
    let opts = ConstructOptions {
        max_retries: cfg.max_retries,
        ..Default::default()
    };
    let protocol = MeasureProtocol {
        grid_side: cfg.measure.grid_side,
        lowdisc_points: cfg.measure.lowdisc_points,
        random_points: cfg.measure.random_points,
        seed: cfg.seed,
    };

    let mut rows = Vec::with_capacity(cfg.n_schedule.len());
    for (row_idx, &level) in cfg.n_schedule.iter().enumerate() {
        let started = Instant::now();
        let set = build_adn(&spec, level)?;
        let sigma_tail = truncation_error(&spec, &set);
        let a_n = sigma_tail.sqrt();
        let row_seed = derive_seed(cfg.seed, row_idx as u64, 0);
        match construct(&set, row_seed, &opts) {
            Ok(mlat) => {
                let err = row_error(cfg, &spec, &set, &mlat, level, row_idx, &protocol)?;
                let l = mlat.count();
                rows.push(RowResult {
                    level,
                    card: set.len(),
                    status: RowStatus::Ok,
                    l: Some(l),
                    m: Some(mlat.node_count()),
                    sigma_tail,
                    bound: Some((l as f64 + 1.0) * sigma_tail.sqrt()),
                    err_measured: Some(err),
                    a_n,
                    seconds: started.elapsed().as_secs_f64(),
                    retry_log: mlat.attempts().to_vec(),
                });
            }
            Err(Error::ConstructionFailed { log, .. }) => {
                rows.push(RowResult {
                    level,
                    card: set.len(),
                    status: RowStatus::ConstructionFailed,
                    l: None,
                    m: None,
                    sigma_tail,
                    bound: None,
                    err_measured: None,
                    a_n,
                    seconds: started.elapsed().as_secs_f64(),
                    retry_log: log,
                });
            }
            Err(other) => return Err(other),
        }
    }

    let fit: Vec<(f64, f64)> = rows
        .iter()
        .filter_map(|r| match (r.m, r.err_measured) {
            (Some(m), Some(err)) if err > 1e-12 => Some(((m as f64).ln(), err.ln())),
            _ => None,
        })
        .collect();
    let slope = ols_slope(&fit);

    let record = ConvergenceRecord {
        format_version: RESULT_FORMAT_VERSION,
        config: cfg.clone(),
        rows,
        slope,
    };

    if let Some(path) = &cfg.out_csv {
        let mut file = std::fs::File::create(path)?;
        write_csv(&record, &mut file)?;
    }
    if let Some(path) = &cfg.out_json {
        std::fs::write(path, record_to_json(&record)?)?;
    }
    Ok(record)
}

fn row_error(
    cfg: &ExperimentConfig,
    spec: &WeightSpec,
    set: &FrequencySet,
    mlat: &MultipleRank1Lattice,
    level: f64,
    row_idx: usize,
    protocol: &MeasureProtocol,
) -> Result<f64> {
    let measure = |f: &TrigPolynomial| -> Result<f64> {
        let samples = LatticeSamples::from_polynomial(f, mlat)?;
        let approx = reconstruct(&samples, mlat, set)?;
        Ok(measure_sup_deviation(f, &approx, protocol))
    };
    match &cfg.function {
        FunctionSpec::UnitBall { support_n } => {
            let support = build_adn(spec, support_n.max(level))?;
            let mut worst: f64 = 0.0;
            for i in 0..cfg.ensemble.max(1) {
                let fseed = derive_seed(cfg.seed, row_idx as u64, i as u64 + 1);
                let f = unit_ball_polynomial(spec, &support, fseed)?;
                worst = worst.max(measure(&f)?);
            }
            Ok(worst)
        }
        FunctionSpec::KernelSlice { support_n } => {
            let f = kernel_slice(spec, *support_n)?;
            measure(&f)
        }
        FunctionSpec::Exp { freq } => {
            let f = single_exponential(spec.dim(), freq)?;
            measure(&f)
        }
        FunctionSpec::CoeffFile { path } => {
            let text = std::fs::read_to_string(path)?;
            let file: CoeffFile = serde_json::from_str(&text)?;
            measure(&file.to_polynomial()?)
        }
    }
}

fn derive_seed(seed: u64, a: u64, b: u64) -> u64 {
    let mut h = Fnv1a::new();
    h.write_u64(seed);
    h.write_u64(a);
    h.write_u64(b);
    h.finish()
}

/// Ordinary least squares slope of `y` against `x`; `None` with fewer than
/// two points.
pub fn ols_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

fn float_cell(v: Option<f64>) -> String {
    match v {
        Some(x) => format!("{x}"),
        None => "nan".into(),
    }
}

/// Writes the fixed-column CSV (`format_version` 1):
/// `N,card,L,M,sigma_tail,bound,err_measured,a_n,seconds`.
pub fn write_csv<W: Write>(record: &ConvergenceRecord, mut out: W) -> Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for r in &record.rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{:.3}",
            r.level,
            r.card,
            r.l.map(|v| v.to_string()).unwrap_or_else(|| "nan".into()),
            r.m.map(|v| v.to_string()).unwrap_or_else(|| "nan".into()),
            float_cell(Some(r.sigma_tail)),
            float_cell(r.bound),
            float_cell(r.err_measured),
            float_cell(Some(r.a_n)),
            r.seconds,
        )?;
    }
    Ok(())
}

/// JSON sidecar: config echo, per-row results with retry logs, slope. No
/// timing fields, so equal configs yield byte-identical output.
pub fn record_to_json(record: &ConvergenceRecord) -> Result<String> {
    Ok(serde_json::to_string_pretty(record)?)
}

/// Parameters for the built-in test functions.
#[derive(Debug, Clone, Default)]
pub struct ZooParams {
    /// Coefficient seed (`unit-ball`).
    pub seed: u64,
    /// Sublevel threshold of the support (`unit-ball`, `kernel-slice`).
    pub support_n: f64,
    /// The single frequency of `exp`.
    pub h0: Vec<i64>,
}

/// A named test function with exact coefficients.
#[derive(Debug, Clone)]
pub struct ZooFunction {
    pub name: String,
    pub poly: TrigPolynomial,
}

/// Dispatches the built-in test-function zoo by name: `unit-ball`,
/// `kernel-slice`, or `exp`.
pub fn zoo(name: &str, spec: &WeightSpec, params: &ZooParams) -> Result<ZooFunction> {
    let poly = match name {
        "unit-ball" => {
            let support = build_adn(spec, params.support_n.max(1.0))?;
            unit_ball_polynomial(spec, &support, params.seed)?
        }
        "kernel-slice" => kernel_slice(spec, params.support_n.max(1.0))?,
        "exp" => single_exponential(spec.dim(), &params.h0)?,
        other => {
            return Err(Error::InvalidParameter(format!(
                "unknown zoo function {other:?} (expected unit-ball, kernel-slice, or exp)"
            )))
        }
    };
    Ok(ZooFunction {
        name: name.to_string(),
        poly,
    })
}

/// Truncated kernel slice: coefficients `r_d(h)^{-1}` on the sublevel set.
pub fn kernel_slice(spec: &WeightSpec, support_n: f64) -> Result<TrigPolynomial> {
    let support = build_adn(spec, support_n)?;
    TrigPolynomial::from_entries(
        spec.dim(),
        support
            .iter()
            .map(|h| (h.to_vec(), Complex64::new(1.0 / spec.weight(h), 0.0))),
    )
}

pub fn single_exponential(d: usize, h0: &[i64]) -> Result<TrigPolynomial> {
    if h0.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: h0.len(),
        });
    }
    let mut p = TrigPolynomial::new(d);
    p.add_term(h0.to_vec(), Complex64::ONE)?;
    Ok(p)
}
