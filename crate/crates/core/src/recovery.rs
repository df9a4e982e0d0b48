//! Iterative recovery with reused measurements.
//!
//! [`sparse_fft`] hashes the spectrum `r_max` times up front and then runs a
//! peeling loop: each iteration re-hashes the current estimate `chi`
//! (no new samples), subtracts it from the stored buckets, takes a
//! coordinatewise median of the `r_max` per-round estimates of every
//! coordinate, and adds the coordinates whose median clears `nu/2`.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::dft::RootTable;
use crate::error::{Error, Result};
use crate::filter::Filter;
use crate::grid::GridDims;
use crate::hashing::{sparse_spectrum, HashRound, Hasher, SampleOracle};
use crate::permute::{PermSpec, PiScratch};
use crate::schedule::{schedules, ScheduleInput, ScheduleOptions, ThresholdSchedule};
use crate::seed::Seed;

/// Sparse vector keyed by flat index. Never stores exact zeros.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SparseEstimate {
    entries: BTreeMap<usize, Complex64>,
}

impl SparseEstimate {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_dense(values: &[Complex64]) -> Self {
        let entries = values
            .iter()
            .enumerate()
            .filter(|(_, v)| v.norm_sqr() != 0.0)
            .map(|(f, v)| (f, *v))
            .collect();
        SparseEstimate { entries }
    }

    /// Adds `value` to the entry at `flat`.
    pub fn add(&mut self, flat: usize, value: Complex64) {
        let slot = self.entries.entry(flat).or_insert(Complex64::new(0.0, 0.0));
        *slot += value;
        if slot.norm_sqr() == 0.0 {
            self.entries.remove(&flat);
        }
    }

    pub fn merge(&mut self, other: &SparseEstimate) {
        for (&f, &v) in &other.entries {
            self.add(f, v);
        }
    }

    pub fn get(&self, flat: usize) -> Complex64 {
        self.entries.get(&flat).copied().unwrap_or_default()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&usize, &Complex64)> {
        self.entries.iter()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn support(&self) -> BTreeSet<usize> {
        self.entries.keys().copied().collect()
    }

    /// Flat positions with `|value| >= threshold`.
    pub fn support_above(&self, threshold: f64) -> BTreeSet<usize> {
        self.entries
            .iter()
            .filter(|(_, v)| v.norm() >= threshold)
            .map(|(&f, _)| f)
            .collect()
    }

    pub fn to_dense(&self, len: usize) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); len];
        for (&f, &v) in &self.entries {
            out[f] = v;
        }
        out
    }
}

/// Coordinatewise median; an even count averages the two middle values.
pub fn median_complex(values: &[Complex64]) -> Result<Complex64> {
    if values.is_empty() {
        return Err(Error::param("median of an empty set"));
    }
    let mut re: Vec<f64> = values.iter().map(|v| v.re).collect();
    let mut im: Vec<f64> = values.iter().map(|v| v.im).collect();
    Ok(Complex64::new(median_in_place(&mut re), median_in_place(&mut im)))
}

fn median_in_place(v: &mut [f64]) -> f64 {
    let m = v.len() / 2;
    let odd = v.len() % 2 == 1;
    let (lower, mid, _) = v.select_nth_unstable_by(m, f64::total_cmp);
    if odd {
        *mid
    } else {
        let below = lower.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        0.5 * (below + *mid)
    }
}

/// Shape of the hashing filter.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FilterShape {
    /// Bucket side `b` (power of two), order `F`.
    Bucketed { b: usize, order: usize },
    /// Boxcar with an explicit odd tap count per axis, order `F`.
    Taps { taps: usize, order: usize },
}

impl FilterShape {
    pub fn build(&self, dims: GridDims) -> Result<Filter> {
        match *self {
            FilterShape::Bucketed { b, order } => Filter::new(b, order, dims),
            FilterShape::Taps { taps, order } => Filter::with_taps(taps, order, dims),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RecoveryParams {
    pub k: usize,
    pub eps: f64,
    pub alpha: f64,
    pub filter: FilterShape,
    pub r_max: usize,
    /// Noise level `mu`; zero for exactly sparse inputs.
    pub mu: f64,
    /// Bound on `||x||_inf / (sqrt(eps) mu)`; derived from the buckets if absent.
    pub rstar: Option<f64>,
    pub schedule: Arc<dyn ThresholdSchedule>,
    /// Truncates the schedule when set.
    pub max_iterations: Option<usize>,
}

/// Smallest power-of-two side `b >= 4` with `b^d >= k / (eps alpha^d)`.
pub fn theory_bucket_side(k: usize, eps: f64, alpha: f64, d: usize) -> usize {
    let buckets = k as f64 / (eps * alpha.powi(d as i32));
    let side = buckets.powf(1.0 / d as f64);
    let mut b = 4usize;
    while (b as f64) < side - 1e-9 {
        b *= 2;
    }
    b
}

/// Odd tap count closest to `k + 1` from above.
pub fn experiment_taps(k: usize) -> usize {
    let w = k + 1;
    if w % 2 == 1 {
        w
    } else {
        w + 1
    }
}

impl RecoveryParams {
    /// Parameters following the analysis: `B >= k/(eps alpha^d)`, `F = 2d`,
    /// halving thresholds from the known noise level.
    pub fn theory(dims: GridDims, k: usize, eps: f64, alpha: f64, mu: f64, r_max: usize) -> Self {
        let d = dims.d();
        RecoveryParams {
            k,
            eps,
            alpha,
            filter: FilterShape::Bucketed {
                b: theory_bucket_side(k, eps, alpha, d),
                order: 2 * d,
            },
            r_max,
            mu,
            rstar: None,
            schedule: schedules()
                .create("theory", &ScheduleOptions::default())
                .expect("theory schedule is registered")
                .into(),
            max_iterations: None,
        }
    }

    /// Parameters for exactly sparse support recovery: a plain boxcar of
    /// about `k + 1` taps and geometric thresholds with the given ratio.
    pub fn experiment(k: usize, r_max: usize, ratio: f64) -> Self {
        let options = ScheduleOptions {
            ratio,
            ..ScheduleOptions::default()
        };
        RecoveryParams {
            k,
            eps: 1.0,
            alpha: 1.0,
            filter: FilterShape::Taps {
                taps: experiment_taps(k),
                order: 1,
            },
            r_max,
            mu: 0.0,
            rstar: None,
            schedule: schedules()
                .create("geometric", &options)
                .expect("geometric schedule is registered")
                .into(),
            max_iterations: None,
        }
    }

    pub fn validate(&self, dims: GridDims) -> Result<()> {
        if self.r_max == 0 {
            return Err(Error::param("r_max must be at least 1"));
        }
        if !(self.eps > 0.0) || !(self.alpha > 0.0) {
            return Err(Error::param("eps and alpha must be positive"));
        }
        if !(self.mu >= 0.0) {
            return Err(Error::param("noise level mu must be nonnegative"));
        }
        if self.k > dims.len() {
            return Err(Error::param(format!(
                "k = {} exceeds grid size {}",
                self.k,
                dims.len()
            )));
        }
        if let FilterShape::Bucketed { b, .. } = self.filter {
            if self.schedule.name() == "theory" {
                let needed = self.k as f64 / (self.eps * self.alpha.powi(dims.d() as i32));
                let have = (b as f64).powi(dims.d() as i32);
                if have + 1e-9 < needed {
                    return Err(Error::param(format!(
                        "B = {have} buckets is below k/(eps alpha^d) = {needed}"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Per-round lookup tables mapping a coordinate to its bucket and phase.
#[derive(Debug, Clone)]
pub struct Locator {
    dims: GridDims,
    roots: RootTable,
    /// `bucket[r][f] = flat(pi_r(f))`
    bucket: Vec<Vec<u32>>,
    /// `phase[r][f] = a_r^T Sigma_r f mod n`
    phase: Vec<Vec<u32>>,
}

impl Locator {
    pub fn new(specs: &[&PermSpec], dims: GridDims) -> Self {
        let mut bucket = Vec::with_capacity(specs.len());
        let mut phase = Vec::with_capacity(specs.len());
        for spec in specs {
            let mut scratch = PiScratch::new(dims.d());
            bucket.push((0..dims.len()).map(|f| spec.pi_flat(f, &mut scratch) as u32).collect());
            phase.push((0..dims.len()).map(|f| spec.phase_exponent_flat(f) as u32).collect());
        }
        Locator {
            dims,
            roots: RootTable::new(dims.n()),
            bucket,
            phase,
        }
    }

    /// One locate-and-estimate pass over every coordinate, given the residual
    /// buckets `v^r` of each round.
    pub fn run(&self, residual: &[Vec<Complex64>], nu: f64) -> SparseEstimate {
        assert_eq!(residual.len(), self.bucket.len());
        let rounds = residual.len();
        let cut = nu / 2.0;
        // If a strict majority of rounds have |z|^2 below this, both
        // coordinate medians are below cut/sqrt(2) and |eta| < cut.
        let quiet = 0.5 * cut * cut * (1.0 - 1e-12);
        let conj_roots: Vec<Complex64> = (0..self.dims.n()).map(|m| self.roots.pow(m as i64).conj()).collect();
        let found: Vec<(usize, Complex64)> = (0..self.dims.len())
            .into_par_iter()
            .with_min_len(512)
            .map_init(
                || (vec![0.0; rounds], vec![0.0; rounds]),
                |(re, im), f| {
                    let mut small = 0;
                    for r in 0..rounds {
                        let z = residual[r][self.bucket[r][f] as usize] * conj_roots[self.phase[r][f] as usize];
                        small += usize::from(z.norm_sqr() < quiet);
                        re[r] = z.re;
                        im[r] = z.im;
                    }
                    if 2 * small > rounds {
                        return None;
                    }
                    let eta = Complex64::new(median_in_place(re), median_in_place(im));
                    (eta.norm() > cut).then_some((f, eta))
                },
            )
            .flatten()
            .collect();
        SparseEstimate {
            entries: found.into_iter().collect(),
        }
    }
}

impl Locator {
    /// Subtracts the hash of `delta` from each round's buckets directly in
    /// time: a coefficient `c` at `f` contributes `c w^{a^T Sigma f} G_{p - pi(f)}`
    /// to bucket `p`. `g` is the filter in time, flat order.
    pub fn subtract_direct(&self, residual: &mut [Vec<Complex64>], delta: &SparseEstimate, g: &[f64]) {
        let len = self.dims.len();
        assert_eq!(g.len(), len);
        let n = self.dims.n();
        let bits = n.trailing_zeros();
        let mask = n - 1;
        let d = self.dims.d();
        residual.par_iter_mut().enumerate().for_each(|(r, v)| {
            for (&f, &c) in delta.iter() {
                let base = self.bucket[r][f] as usize;
                let c = c * self.roots.pow(self.phase[r][f] as i64);
                if d == 1 {
                    let (head, tail) = v.split_at_mut(base);
                    for (x, &w) in tail.iter_mut().zip(g) {
                        *x -= c * w;
                    }
                    for (x, &w) in head.iter_mut().zip(&g[len - base..]) {
                        *x -= c * w;
                    }
                    continue;
                }
                for (o, &w) in g.iter().enumerate() {
                    // Row-major flat indices pack one coordinate per bit field.
                    let mut p = 0;
                    for s in 0..d {
                        let sh = s as u32 * bits;
                        p |= ((((base >> sh) & mask) + ((o >> sh) & mask)) & mask) << sh;
                    }
                    v[p] -= c * w;
                }
            }
        });
    }
}

/// Updates no larger than this are subtracted in time rather than by
/// re-hashing the whole estimate.
const DIRECT_UPDATE_MAX: usize = 8;

/// Collects `v^r_{pi_r(f)} w^{-a_r^T Sigma_r f}` over the rounds for every
/// coordinate `f`, takes the coordinatewise median `eta`, and keeps `f -> eta`
/// when `|eta| > nu/2`. Rounds must share `filter`.
pub fn locate_and_estimate(
    rounds: &[HashRound],
    chi: &SparseEstimate,
    filter: &Filter,
    nu: f64,
) -> Result<SparseEstimate> {
    if rounds.is_empty() {
        return Err(Error::param("need at least one hashing round"));
    }
    let dims = filter.dims();
    let hasher = Hasher::new(filter);
    let chi_hat = sparse_spectrum(chi, dims);
    let residual: Vec<Vec<Complex64>> = rounds
        .iter()
        .map(|r| hasher.subtract_spectrum(r, &chi_hat))
        .collect();
    let specs: Vec<&PermSpec> = rounds.iter().map(|r| &r.spec).collect();
    Ok(Locator::new(&specs, dims).run(&residual, nu))
}

/// Diagnostics from one [`sparse_fft`] run.
#[derive(Debug, Clone, PartialEq)]
pub struct RecoveryReport {
    /// Spectrum reads summed over rounds, `r_max * |supp G^|`. Rounds may
    /// overlap, so the oracle's distinct count can be smaller.
    pub measurements: usize,
    /// Distinct oracle reads after the hashing rounds were built.
    pub samples_after_hashing: usize,
    /// Oracle reads after each peeling iteration.
    pub samples_per_iteration: Vec<usize>,
    pub thresholds: Vec<f64>,
    /// Every coordinate that was ever updated.
    pub touched: BTreeSet<usize>,
    pub filter_support: usize,
    pub bucket_side: usize,
}

impl RecoveryReport {
    pub fn iterations(&self) -> usize {
        self.thresholds.len()
    }

    pub fn samples_used(&self) -> usize {
        self.samples_per_iteration
            .last()
            .copied()
            .unwrap_or(self.samples_after_hashing)
    }
}

#[derive(Debug, Clone)]
pub struct Recovery {
    pub estimate: SparseEstimate,
    pub report: RecoveryReport,
}

/// Recovers a sparse approximation of the time signal behind `oracle`.
///
/// The permutations for rounds `1..=r_max` are drawn from `seed.split(r)`,
/// so the output is a deterministic function of the seed.
pub fn sparse_fft(oracle: &SampleOracle, params: &RecoveryParams, seed: Seed) -> Result<Recovery> {
    let dims = oracle.dims();
    params.validate(dims)?;
    let filter = params.filter.build(dims)?;
    let hasher = Hasher::new(&filter);

    let specs: Vec<PermSpec> = (1..=params.r_max as u64)
        .map(|r| PermSpec::sample(dims, &mut seed.split(r).rng()))
        .collect();
    let rounds: Vec<HashRound> = specs
        .par_iter()
        .map(|spec| hasher.hash(oracle, spec))
        .collect::<Result<_>>()?;
    let samples_after_hashing = oracle.samples_used();

    let peak_bucket = rounds
        .iter()
        .flat_map(|r| r.u.iter())
        .map(|v| v.norm())
        .fold(0.0, f64::max);
    let mut thresholds = params.schedule.thresholds(&ScheduleInput {
        eps: params.eps,
        mu: params.mu,
        rstar: params.rstar,
        peak_bucket,
    })?;
    if let Some(cap) = params.max_iterations {
        thresholds.truncate(cap);
    }

    let spec_refs: Vec<&PermSpec> = specs.iter().collect();
    let locator = Locator::new(&spec_refs, dims);
    let mut chi = SparseEstimate::new();
    let mut touched = BTreeSet::new();
    let mut residual: Vec<Vec<Complex64>> = rounds.iter().map(|r| r.u.clone()).collect();
    let g: Vec<f64> = (0..dims.len()).map(|f| filter.time_flat(f)).collect();
    let mut samples_per_iteration = Vec::with_capacity(thresholds.len());
    for &nu in &thresholds {
        let update = locator.run(&residual, nu);
        touched.extend(update.entries.keys().copied());
        chi.merge(&update);
        if update.len() <= DIRECT_UPDATE_MAX {
            locator.subtract_direct(&mut residual, &update, &g);
        } else {
            let chi_hat = hasher.spectrum_of(&chi);
            residual = rounds
                .par_iter()
                .map(|r| hasher.subtract_spectrum(r, &chi_hat))
                .collect();
        }
        samples_per_iteration.push(oracle.samples_used());
    }

    Ok(Recovery {
        estimate: chi,
        report: RecoveryReport {
            measurements: rounds.iter().map(|r| r.samples_used).sum(),
            samples_after_hashing,
            samples_per_iteration,
            thresholds,
            touched,
            filter_support: filter.support_len(),
            bucket_side: filter.bucket_side(),
        },
    })
}
