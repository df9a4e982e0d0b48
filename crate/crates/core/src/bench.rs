//! Support-recovery experiments.
//!
//! A trial draws an exactly `k`-sparse time signal with unit-magnitude
//! entries, hands its spectrum to [`sparse_fft`] behind a counting oracle,
//! keeps the coordinates whose recovered magnitude is at least 1/2, and
//! succeeds when that set equals the true support. A sweep runs every
//! `(k, r_max)` cell of a grid and reports empirical success rates.

use std::collections::BTreeSet;
use std::f64::consts::PI;
use std::fmt::{Debug, Write as _};
use std::io::Write;
use std::path::Path;
use std::sync::OnceLock;

use num_complex::Complex64;
use rand::seq::index;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dft::fft_forward;
use crate::error::{Error, Result};
use crate::grid::{Domain, GridDims, Signal};
use crate::hashing::SampleOracle;
use crate::recovery::{sparse_fft, RecoveryParams};
use crate::registry::Registry;
use crate::schedule::{GeometricSchedule, DEFAULT_FLOOR};
use crate::seed::{Rng as SeededRng, Seed};

/// Magnitude cut that defines the recovered support.
pub const SUPPORT_THRESHOLD: f64 = 0.5;

/// Distribution of the nonzero amplitudes of a test signal.
pub trait AmplitudeModel: Debug + Send + Sync {
    fn name(&self) -> &'static str;
    fn sample(&self, rng: &mut SeededRng) -> Complex64;
}

/// Uniform on the complex unit circle.
#[derive(Debug, Clone, Copy)]
pub struct UnitCircle;

impl AmplitudeModel for UnitCircle {
    fn name(&self) -> &'static str {
        "unit-circle"
    }

    fn sample(&self, rng: &mut SeededRng) -> Complex64 {
        Complex64::from_polar(1.0, rng.random_range(0.0..2.0 * PI))
    }
}

/// Uniform on `{-1, +1}`.
#[derive(Debug, Clone, Copy)]
pub struct PlusMinusOne;

impl AmplitudeModel for PlusMinusOne {
    fn name(&self) -> &'static str {
        "pm-one"
    }

    fn sample(&self, rng: &mut SeededRng) -> Complex64 {
        if rng.random::<bool>() {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(-1.0, 0.0)
        }
    }
}

pub fn amplitude_models() -> &'static Registry<dyn AmplitudeModel> {
    static REGISTRY: OnceLock<Registry<dyn AmplitudeModel>> = OnceLock::new();
    REGISTRY.get_or_init(|| {
        let mut r: Registry<dyn AmplitudeModel> = Registry::new("amplitude model");
        r.register("unit-circle", |_| Box::new(UnitCircle));
        r.register("pm-one", |_| Box::new(PlusMinusOne));
        r
    })
}

/// An exactly `k`-sparse signal with support drawn uniformly without
/// replacement and amplitudes from `model`.
pub fn gen_sparse_signal(
    dims: GridDims,
    k: usize,
    model: &dyn AmplitudeModel,
    rng: &mut SeededRng,
) -> Result<(Signal, BTreeSet<usize>)> {
    if k > dims.len() {
        return Err(Error::param(format!(
            "k = {k} exceeds grid size {}",
            dims.len()
        )));
    }
    let support: BTreeSet<usize> = index::sample(rng, dims.len(), k).into_iter().collect();
    let mut x = Signal::zeros(dims, Domain::Time);
    for &f in &support {
        x.values[f] = model.sample(rng);
    }
    Ok((x, support))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub dims: GridDims,
    pub k_list: Vec<usize>,
    pub r_max_list: Vec<usize>,
    pub trials: usize,
    /// Registered [`AmplitudeModel`] name.
    pub model: String,
    pub ratio: f64,
    /// Lowest threshold the geometric schedule visits.
    pub floor: f64,
    pub seed: Seed,
}

impl ExperimentConfig {
    /// Desk-scale grid: `N = 2^12`, `k = 10..=100`, `r_max = 5..=25`, 50 trials.
    pub fn desk(seed: Seed) -> Self {
        ExperimentConfig {
            dims: GridDims::new(1, 1 << 12).expect("valid grid"),
            k_list: (1..=10).map(|i| 10 * i).collect(),
            r_max_list: (5..=25).collect(),
            trials: 50,
            model: "pm-one".into(),
            ratio: 1.2,
            floor: DEFAULT_FLOOR,
            seed,
        }
    }

    /// The desk grid at `N = 2^15`.
    pub fn full_scale(seed: Seed) -> Self {
        ExperimentConfig {
            dims: GridDims::new(1, 1 << 15).expect("valid grid"),
            ..Self::desk(seed)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::param("trials must be at least 1"));
        }
        if self.k_list.is_empty() || self.r_max_list.is_empty() {
            return Err(Error::param("k and r_max lists must be nonempty"));
        }
        if let Some(&k) = self.k_list.iter().find(|&&k| k > self.dims.len()) {
            return Err(Error::param(format!("k = {k} exceeds grid size")));
        }
        if self.r_max_list.contains(&0) {
            return Err(Error::param("r_max must be at least 1"));
        }
        amplitude_models().create(&self.model, &())?;
        Ok(())
    }

    pub fn recovery_params(&self, k: usize, r_max: usize) -> RecoveryParams {
        let mut p = RecoveryParams::experiment(k, r_max, self.ratio);
        p.schedule = std::sync::Arc::new(GeometricSchedule {
            ratio: self.ratio,
            floor: self.floor,
            nu0: None,
        });
        p
    }

    /// Seed of trial `trial` in cell `(k, r_max)`.
    pub fn trial_seed(&self, k: usize, r_max: usize, trial: usize) -> Seed {
        self.seed.split(k as u64).split(r_max as u64).split(trial as u64)
    }
}

/// Result of a single trial.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialOutcome {
    pub success: bool,
    /// Spectrum measurements taken, `r_max * |supp G^|`.
    pub samples_used: usize,
    /// Distinct spectrum positions among those measurements.
    pub distinct_samples: usize,
    pub true_support: BTreeSet<usize>,
    pub recovered_support: BTreeSet<usize>,
    /// Every coordinate the recovery loop ever updated.
    pub touched: BTreeSet<usize>,
    /// Whether the oracle count stayed fixed through all iterations.
    pub samples_reused: bool,
    pub iterations: usize,
}

/// One trial of cell `(k, r_max)` under `seed`.
pub fn run_trial(config: &ExperimentConfig, k: usize, r_max: usize, seed: Seed) -> Result<TrialOutcome> {
    let model = amplitude_models().create(&config.model, &())?;
    let (x, true_support) = gen_sparse_signal(config.dims, k, model.as_ref(), &mut seed.split(0).rng())?;
    let oracle = SampleOracle::new(fft_forward(&x))?;
    let out = sparse_fft(&oracle, &config.recovery_params(k, r_max), seed.split(1))?;
    let recovered_support = out.estimate.support_above(SUPPORT_THRESHOLD);
    let report = out.report;
    Ok(TrialOutcome {
        success: recovered_support == true_support,
        samples_used: report.measurements,
        distinct_samples: oracle.samples_used(),
        samples_reused: report
            .samples_per_iteration
            .iter()
            .all(|&s| s == report.samples_after_hashing),
        iterations: report.iterations(),
        true_support,
        recovered_support,
        touched: report.touched,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub method: String,
    pub k: usize,
    pub r_max: usize,
    /// Spectrum measurements per trial.
    pub samples: usize,
    pub trials: usize,
    pub successes: usize,
    pub success_rate: f64,
}

/// Label written in the `method` column for this crate's recovery.
pub const METHOD: &str = "sparse-fft";

/// Runs one `(k, r_max)` cell and returns its record plus the raw outcomes.
pub fn run_cell(config: &ExperimentConfig, k: usize, r_max: usize) -> Result<(ExperimentRecord, Vec<TrialOutcome>)> {
    let outcomes: Vec<TrialOutcome> = (0..config.trials)
        .into_par_iter()
        .map(|t| run_trial(config, k, r_max, config.trial_seed(k, r_max, t)))
        .collect::<Result<_>>()?;
    let samples = outcomes[0].samples_used;
    if outcomes.iter().any(|o| o.samples_used != samples) {
        return Err(Error::param(format!(
            "sample count varied across trials of cell (k = {k}, r_max = {r_max})"
        )));
    }
    let successes = outcomes.iter().filter(|o| o.success).count();
    Ok((
        ExperimentRecord {
            method: METHOD.into(),
            k,
            r_max,
            samples,
            trials: config.trials,
            successes,
            success_rate: successes as f64 / config.trials as f64,
        },
        outcomes,
    ))
}

/// Every cell of the grid, sorted by `k` then `r_max`.
pub fn run_sweep(config: &ExperimentConfig) -> Result<Vec<ExperimentRecord>> {
    config.validate()?;
    let mut ks = config.k_list.clone();
    ks.sort_unstable();
    ks.dedup();
    let mut rs = config.r_max_list.clone();
    rs.sort_unstable();
    rs.dedup();
    let cells: Vec<(usize, usize)> = ks
        .iter()
        .flat_map(|&k| rs.iter().map(move |&r| (k, r)))
        .collect();
    cells
        .par_iter()
        .map(|&(k, r)| run_cell(config, k, r).map(|(rec, _)| rec))
        .collect()
}

/// How the `samples` column is reported.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MeasurementUnits {
    /// One complex spectrum sample per distinct position read.
    #[default]
    Complex,
    /// Two real measurements per complex sample.
    Real,
}

pub const CSV_HEADER: &str = "method,k,r_max,samples,trials,successes,success_rate";

/// `%g`-style formatting with 6 significant digits.
pub fn format_sig6(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return if x == 0.0 { "0".into() } else { x.to_string() };
    }
    let exp = x.abs().log10().floor() as i32;
    if !(-5..6).contains(&exp) {
        return format!("{x:.5e}");
    }
    let decimals = (5 - exp).max(0) as usize;
    let s = format!("{x:.decimals$}");
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

pub fn csv_string(records: &[ExperimentRecord], units: MeasurementUnits) -> String {
    let mut rows: Vec<&ExperimentRecord> = records.iter().collect();
    rows.sort_by(|a, b| (a.k, a.r_max, &a.method).cmp(&(b.k, b.r_max, &b.method)));
    let factor = match units {
        MeasurementUnits::Complex => 1,
        MeasurementUnits::Real => 2,
    };
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.method,
            r.k,
            r.r_max,
            r.samples * factor,
            r.trials,
            r.successes,
            format_sig6(r.success_rate)
        )
        .expect("writing to a String");
    }
    out
}

pub fn write_csv(records: &[ExperimentRecord], path: &Path, units: MeasurementUnits) -> Result<()> {
    std::fs::write(path, csv_string(records, units)).map_err(|e| Error::io(path, e))
}

pub fn parse_csv(text: &str, origin: &Path) -> Result<Vec<ExperimentRecord>> {
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let header = reader
        .headers()
        .map_err(|e| Error::format(origin, e.to_string()))?
        .iter()
        .collect::<Vec<_>>()
        .join(",");
    if header != CSV_HEADER {
        return Err(Error::format(origin, format!("unexpected header '{header}'")));
    }
    reader
        .deserialize()
        .map(|row| row.map_err(|e| Error::format(origin, e.to_string())))
        .collect()
}

pub fn read_csv(path: &Path) -> Result<Vec<ExperimentRecord>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_csv(&text, path)
}

/// Standalone SVG heatmap: `r_max` across, `k` down, darker = higher success.
pub fn heatmap_svg(records: &[ExperimentRecord]) -> String {
    let ks: Vec<usize> = records.iter().map(|r| r.k).collect::<BTreeSet<_>>().into_iter().collect();
    let rs: Vec<usize> = records.iter().map(|r| r.r_max).collect::<BTreeSet<_>>().into_iter().collect();
    let (cell, left, top) = (28usize, 70usize, 40usize);
    let width = left + cell * rs.len().max(1) + 20;
    let height = top + cell * ks.len().max(1) + 50;
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(svg, r#"<rect width="{width}" height="{height}" fill="white"/>"#);
    for r in records {
        let (Some(ci), Some(ri)) = (
            rs.iter().position(|&v| v == r.r_max),
            ks.iter().position(|&v| v == r.k),
        ) else {
            continue;
        };
        let level = (255.0 * (1.0 - r.success_rate.clamp(0.0, 1.0))).round() as u8;
        let _ = writeln!(
            svg,
            r##"<rect x="{}" y="{}" width="{cell}" height="{cell}" fill="#{level:02x}{level:02x}{level:02x}" stroke="#888"><title>k={} r_max={} success={}</title></rect>"##,
            left + ci * cell,
            top + ri * cell,
            r.k,
            r.r_max,
            format_sig6(r.success_rate)
        );
    }
    for (ci, r) in rs.iter().enumerate() {
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" text-anchor="middle">{r}</text>"#,
            left + ci * cell + cell / 2,
            top + cell * ks.len() + 15
        );
    }
    for (ri, k) in ks.iter().enumerate() {
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" text-anchor="end">{k}</text>"#,
            left - 6,
            top + ri * cell + cell / 2 + 4
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" text-anchor="middle">r_max</text>"#,
        left + cell * rs.len() / 2,
        top + cell * ks.len() + 35
    );
    let _ = writeln!(
        svg,
        r#"<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">k</text>"#,
        top + cell * ks.len() / 2,
        top + cell * ks.len() / 2
    );
    svg.push_str("</svg>\n");
    svg
}

pub fn render_heatmap(records: &[ExperimentRecord], path: &Path) -> Result<()> {
    let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(heatmap_svg(records).as_bytes())
        .map_err(|e| Error::io(path, e))
}
