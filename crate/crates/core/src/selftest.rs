//! Named self-checks of the hashing machinery.
//!
//! Each [`LemmaCheck`] verifies one property of the transforms,
//! permutations, filters or hashing, either exactly or by seeded Monte
//! Carlo. Asymptotic `O(.)` statements are pinned with constants calibrated
//! once (see [`calibration`]) and a three-standard-error allowance.

use std::collections::HashSet;
use std::fmt::Debug;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::seq::index;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::dft::{dft_bruteforce, fft_forward, fft_inverse, Direction, RootTable};
use crate::filter::{check_filter_bounds, build_tensor_filter, Filter};
use crate::grid::{flatten, l2_norm, noise_level, unflatten, Domain, GridDims, GridIndex, Signal};
use crate::hashing::{bucket_leakage, is_isolated, well_hashed_error};
use crate::permute::{det_parity, permute_spectrum, sample_sigma, sigma_times, Matrix, PermSpec};
use crate::recovery::theory_bucket_side;
use crate::registry::Registry;
use crate::seed::{Rng as SeededRng, Seed};

/// Calibrated constants for the Monte-Carlo checks. Each was fixed from
/// the measured worst case over the check's settings with headroom, and
/// is shared by every setting of that check.
pub mod calibration {
    /// `Pr[||Sigma v||_inf <= t] <= C (2t/n)^d`. The textbook constant 2 is
    /// exceeded for `d = 2` at small `t`: the exact worst case is
    /// `(3^d - 1)/(2^d - 1)`, which is 8/3 there.
    pub const INDEPENDENCE_C: f64 = 3.0;
    /// The constant as usually stated; reported alongside the calibrated one.
    pub const INDEPENDENCE_STATED_C: f64 = 2.0;
    /// `E[sum_{j != i} |x_j G_{o_i(j)}|^2] <= C^d ||x||^2 / B`; measured 0.66.
    pub const LEAKAGE_C: f64 = 1.0;
    /// Non-isolation probability `<= c alpha^{d/2}`; measured 0.63.
    pub const ISOLATION_C: f64 = 1.0;
    /// `E[tail error] <= (C alpha)^d eps mu^2`; measured 0.65.
    pub const NOISE_C: f64 = 1.0;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Budget {
    /// The sample sizes stated for each check.
    #[default]
    Full,
    /// A tenth of the Monte-Carlo draws, for quick runs.
    Reduced,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SelftestOptions {
    pub budget: Budget,
    pub seed: Seed,
    /// Feed an even-determinant matrix into the parity check (negative control).
    pub inject_even_det: bool,
}

impl Default for SelftestOptions {
    fn default() -> Self {
        SelftestOptions {
            budget: Budget::Full,
            seed: Seed(0x5EED),
            inject_even_det: false,
        }
    }
}

impl SelftestOptions {
    fn draws(&self, full: usize) -> usize {
        match self.budget {
            Budget::Full => full,
            Budget::Reduced => (full / 10).max(1),
        }
    }
}

#[derive(Debug, Clone)]
pub struct CheckReport {
    pub name: &'static str,
    pub passed: bool,
    /// One line per sub-case with the measured statistic and its bound.
    pub details: Vec<String>,
    pub elapsed: Duration,
}

pub trait LemmaCheck: Debug + Send + Sync {
    fn name(&self) -> &'static str;
    fn description(&self) -> &'static str;
    fn run(&self, options: &SelftestOptions) -> CheckReport;
}

struct Collector {
    passed: bool,
    details: Vec<String>,
}

impl Collector {
    fn new() -> Self {
        Collector {
            passed: true,
            details: Vec::new(),
        }
    }

    fn record(&mut self, ok: bool, line: String) {
        self.passed &= ok;
        self.details
            .push(format!("{} {line}", if ok { "ok  " } else { "FAIL" }));
    }

    fn finish(self, name: &'static str, start: Instant) -> CheckReport {
        CheckReport {
            name,
            passed: self.passed,
            details: self.details,
            elapsed: start.elapsed(),
        }
    }
}

fn random_signal(dims: GridDims, rng: &mut SeededRng, domain: Domain) -> Signal {
    let values = (0..dims.len())
        .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    Signal::new(dims, values, domain).expect("length matches")
}

fn rel_err(a: &[Complex64], b: &[Complex64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt();
    num / l2_norm(b).max(f64::MIN_POSITIVE)
}

/// Fast transforms agree with the quadratic sum; Parseval holds.
#[derive(Debug)]
pub struct DftOracle;

impl LemmaCheck for DftOracle {
    fn name(&self) -> &'static str {
        "dft-oracle"
    }
    fn description(&self) -> &'static str {
        "FFT equals the brute-force DFT and preserves the l2 norm"
    }
    fn run(&self, o: &SelftestOptions) -> CheckReport {
        let start = Instant::now();
        let mut c = Collector::new();
        let mut rng = o.seed.split(1).rng();
        let shapes: Vec<(usize, usize)> = [1, 2, 3]
            .iter()
            .flat_map(|&d| [4, 8, 16].iter().map(move |&n| (d, n)))
            .collect();
        // The quadratic oracle dominates on the largest grid, so it gets
        // fewer of the signals.
        let total = o.draws(200);
        let large = (total / 25).max(1);
        let per_small = (total - large).div_ceil(shapes.len() - 1);
        for (d, n) in shapes {
            let dims = GridDims::new(d, n).expect("valid grid");
            let per_shape = if dims.len() >= 4096 { large } else { per_small };
            let mut worst: f64 = 0.0;
            for _ in 0..per_shape {
                let x = random_signal(dims, &mut rng, Domain::Time);
                let fast = fft_forward(&x);
                let slow = dft_bruteforce(&x, Direction::Forward).expect("small grid");
                worst = worst.max(rel_err(&fast.values, &slow.values));
                let fast_i = fft_inverse(&x);
                let slow_i = dft_bruteforce(&x, Direction::Inverse).expect("small grid");
                worst = worst.max(rel_err(&fast_i.values, &slow_i.values));
                worst = worst.max((fast.norm() - x.norm()).abs() / x.norm());
                worst = worst.max(rel_err(&fft_inverse(&fast).values, &x.values));
            }
            c.record(
                worst <= 1e-9,
                format!("d={d} n={n}: worst relative error {worst:.2e} <= 1e-9 over {per_shape} signals"),
            );
        }
        c.finish(self.name(), start)
    }
}

/// `F^{-1}(P x^)_{pi(i)} = x_i w^{a^T Sigma i}` exactly.
#[derive(Debug)]
pub struct PermutationIdentity;

impl LemmaCheck for PermutationIdentity {
    fn name(&self) -> &'static str {
        "perm-identity"
    }
    fn description(&self) -> &'static str {
        "inverse FFT of the permuted spectrum is the relabelled, modulated signal"
    }
    fn run(&self, o: &SelftestOptions) -> CheckReport {
        let start = Instant::now();
        let mut c = Collector::new();
        let mut rng = o.seed.split(2).rng();
        for (d, n) in [(1, 4), (1, 8), (1, 16), (2, 4), (2, 8), (2, 16)] {
            let dims = GridDims::new(d, n).expect("valid grid");
            let roots = RootTable::new(n);
            let mut worst: f64 = 0.0;
            for _ in 0..50 {
                let x = random_signal(dims, &mut rng, Domain::Time);
                let spec = PermSpec::sample(dims, &mut rng);
                let y = fft_inverse(&permute_spectrum(&spec, &fft_forward(&x)).expect("same grid"));
                for i in dims.indices() {
                    let lhs = y.at(&spec.apply_pi(&i));
                    let rhs = x.at(&i) * spec.time_phase(&i, &roots);
                    worst = worst.max((lhs - rhs).norm() / x.norm());
                }
            }
            c.record(worst <= 1e-9, format!("d={d} n={n}: worst error {worst:.2e} <= 1e-9 over 50 specs"));
        }
        c.finish(self.name(), start)
    }
}

/// The reference parameter sets used in tests and experiments.
pub const FILTER_BOUND_CASES: [(usize, usize, usize, usize); 3] =
    [(256, 16, 2, 1), (256, 16, 4, 1), (64, 8, 4, 2)];

/// Exhaustive mass-concentration bounds of the filter.
#[derive(Debug)]
pub struct FilterBounds;

impl LemmaCheck for FilterBounds {
    fn name(&self) -> &'static str {
        "filter-bounds"
    }
    fn description(&self) -> &'static str {
        "G_0 = 1, G is bounded below near the origin and decays polynomially"
    }
    fn run(&self, _o: &SelftestOptions) -> CheckReport {
        let start = Instant::now();
        let mut c = Collector::new();
        for (n, b, order, d) in FILTER_BOUND_CASES {
            let dims = GridDims::new(d, n).expect("valid grid");
            let r = check_filter_bounds(&build_tensor_filter(b, order, dims).expect("valid filter"));
            c.record(
                r.holds(),
                format!(
                    "n={n} b={b} F={order} d={d}: G_0={} inner margin {:.3e}, decay margin {:.3e} over {} points",
                    r.g0, r.inner_margin, r.decay_margin, r.points_checked
                ),
            );
        }
        c.finish(self.name(), start)
    }
}

/// GF(2) parity agrees with the integer determinant, and every sampled
/// `Sigma` is odd.
#[derive(Debug)]
pub struct DetParity;

fn det_integer(m: &[i64], d: usize) -> i64 {
    if d == 1 {
        return m[0];
    }
    (0..d)
        .map(|col| {
            let minor: Vec<i64> = (1..d)
                .flat_map(|r| (0..d).filter(move |&cc| cc != col).map(move |cc| m[r * d + cc]))
                .collect();
            let sign = if col % 2 == 0 { 1 } else { -1 };
            sign * m[col] * det_integer(&minor, d - 1)
        })
        .sum()
}

impl LemmaCheck for DetParity {
    fn name(&self) -> &'static str {
        "det-parity"
    }
    fn description(&self) -> &'static str {
        "sampled permutation matrices have odd determinant"
    }
    fn run(&self, o: &SelftestOptions) -> CheckReport {
        let start = Instant::now();
        let mut c = Collector::new();
        let mut rng = o.seed.split(3).rng();
        for d in 1..=3 {
            let dims = GridDims::new(d, 16).expect("valid grid");
            let mut sampled: Vec<Matrix> = (0..o.draws(2000)).map(|_| sample_sigma(dims, &mut rng)).collect();
            if o.inject_even_det {
                let mut e = vec![0i64; d * d];
                e[0] = 2;
                for s in 1..d {
                    e[s * d + s] = 1;
                }
                sampled.push(Matrix::new(d, e).expect("square"));
            }
            let bad = sampled
                .iter()
                .filter(|m| !det_parity(m) || det_integer(m.entries(), d).rem_euclid(2) != 1)
                .count();
            c.record(bad == 0, format!("d={d}: {bad} of {} sampled matrices have even determinant", sampled.len()));
        }
        c.finish(self.name(), start)
    }
}

/// `Pr[||Sigma v||_inf <= t] <= 2 (2t/n)^d` for fixed nonzero `v`.
#[derive(Debug)]
pub struct LimitedIndependence;

/// Test vectors per `(d, n)`, including ones with a common factor of two.
pub fn limited_independence_vectors(d: usize, n: usize) -> Vec<GridIndex> {
    let raw: Vec<Vec<i64>> = match d {
        1 => vec![vec![1], vec![3], vec![2], vec![4], vec![6], vec![8], vec![n as i64 / 2]],
        _ => vec![
            vec![1, 0],
            vec![1, 1],
            vec![3, -5],
            vec![2, 0],
            vec![2, 6],
            vec![4, 4],
            vec![8, 0],
            vec![n as i64 / 2, n as i64 / 2],
        ],
    };
    raw.into_iter().map(|v| GridIndex::new(v, n)).collect()
}

/// Estimates `Pr[||Sigma v||_inf <= t]` for `t = 0..=n/2` from `draws` samples.
pub fn limited_independence_rates(dims: GridDims, v: &GridIndex, draws: usize, rng: &mut SeededRng) -> Vec<f64> {
    let n = dims.n();
    let mut hist = vec![0usize; n / 2 + 1];
    for _ in 0..draws {
        let sigma = sample_sigma(dims, rng);
        hist[sigma_times(&sigma, v, n).linf_norm(n) as usize] += 1;
    }
    let mut acc = 0usize;
    hist.iter()
        .map(|&h| {
            acc += h;
            acc as f64 / draws as f64
        })
        .collect()
}

/// Largest `rate - C (2t/n)^d - 3 SE` over `t`; nonpositive when the bound holds.
pub fn independence_excess(rates: &[f64], n: usize, d: usize, draws: usize, constant: f64) -> f64 {
    rates
        .iter()
        .enumerate()
        .map(|(t, &p)| {
            let bound = constant * (2.0 * t as f64 / n as f64).powi(d as i32);
            let p0 = bound.min(1.0);
            let se = (p0 * (1.0 - p0) / draws as f64).sqrt();
            p - bound - 3.0 * se
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

impl LemmaCheck for LimitedIndependence {
    fn name(&self) -> &'static str {
        "limited-independence"
    }
    fn description(&self) -> &'static str {
        "a random odd-determinant matrix maps a fixed vector into a t-ball with probability O((2t/n)^d)"
    }
    fn run(&self, o: &SelftestOptions) -> CheckReport {
        let start = Instant::now();
        let mut c = Collector::new();
        let draws = o.draws(100_000);
        let mut rng = o.seed.split(4).rng();
        for (d, n) in [(1, 16), (1, 64), (2, 16), (2, 64)] {
            let dims = GridDims::new(d, n).expect("valid grid");
            for v in limited_independence_vectors(d, n) {
                let rates = limited_independence_rates(dims, &v, draws, &mut rng);
                let worst = independence_excess(&rates, n, d, draws, calibration::INDEPENDENCE_C);
                let stated = independence_excess(&rates, n, d, draws, calibration::INDEPENDENCE_STATED_C);
                c.record(
                    worst <= 0.0,
                    format!(
                        "d={d} n={n} v={:?}: excess over C={} is {worst:.2e}, over C={} is {stated:.2e}",
                        v.coords(),
                        calibration::INDEPENDENCE_C,
                        calibration::INDEPENDENCE_STATED_C
                    ),
                );
            }
        }
        c.finish(self.name(), start)
    }
}

/// Ratio `E[mu^2_{Sigma,q}(i)] B / ||x||^2` and its standard error.
pub fn leakage_ratio(
    x: &Signal,
    filter: &Filter,
    i: &GridIndex,
    specs: usize,
    rng: &mut SeededRng,
) -> (f64, f64) {
    let scale = filter.buckets() as f64 / x.norm().powi(2);
    let samples: Vec<f64> = (0..specs)
        .map(|_| bucket_leakage(x, &PermSpec::sample(x.dims, rng), filter, i) * scale)
        .collect();
    mean_and_se(&samples)
}

fn mean_and_se(v: &[f64]) -> (f64, f64) {
    let m = v.iter().sum::<f64>() / v.len() as f64;
    let var = v.iter().map(|s| (s - m).powi(2)).sum::<f64>() / (v.len().max(2) - 1) as f64;
    (m, (var / v.len() as f64).sqrt())
}

/// Signals used by the leakage check: dense Gaussian, and a sparse signal
/// placed at even offsets from the probed index.
pub fn leakage_signals(dims: GridDims, rng: &mut SeededRng) -> Vec<(&'static str, Signal)> {
    let dense = Signal::new(
        dims,
        (0..dims.len())
            .map(|_| Complex64::new(StandardNormal.sample(rng), StandardNormal.sample(rng)))
            .collect(),
        Domain::Time,
    )
    .expect("length matches");
    let mut even = Signal::zeros(dims, Domain::Time);
    for step in 1..=8i64 {
        let j = GridIndex::new((0..dims.d()).map(|s| if s == 0 { 2 * step } else { 2 * (step % 3) }), dims.n());
        even.values[flatten(&j, dims)] = Complex64::new(1.0, 0.0);
    }
    vec![("dense-gaussian", dense), ("even-offsets", even)]
}

/// Leakage into a bucket is `O(||x||^2 / B)` on average when `F >= 2d`.
#[derive(Debug)]
pub struct HashingLeakage;

/// `(d, n, b)` settings; the order is `F = 2d`.
pub const LEAKAGE_CASES: [(usize, usize, usize); 2] = [(1, 256, 16), (2, 64, 8)];

impl LemmaCheck for HashingLeakage {
    fn name(&self) -> &'static str {
        "hashing-leakage"
    }
    fn description(&self) -> &'static str {
        "mean leakage into a bucket is at most C^d ||x||^2 / B"
    }
    fn run(&self, o: &SelftestOptions) -> CheckReport {
        let start = Instant::now();
        let mut c = Collector::new();
        let mut rng = o.seed.split(5).rng();
        let specs = o.draws(1000);
        for (d, n, b) in LEAKAGE_CASES {
            let dims = GridDims::new(d, n).expect("valid grid");
            let filter = build_tensor_filter(b, 2 * d, dims).expect("valid filter");
            let bound = calibration::LEAKAGE_C.powi(d as i32);
            for (label, x) in leakage_signals(dims, &mut rng) {
                let (mean, se) = leakage_ratio(&x, &filter, &GridIndex::zero(d), specs, &mut rng);
                c.record(
                    mean - 3.0 * se <= bound,
                    format!("d={d} n={n} b={b} {label}: E[leakage] B/||x||^2 = {mean:.4} (se {se:.4}) <= {bound}"),
                );
            }
        }
        c.finish(self.name(), start)
    }
}

/// `(d, n, alpha)` settings for the isolation and noise checks, with
/// `k = 4`, `eps = 1/2`, `|S| = 2k/eps` and `B >= k/(eps alpha^d)`.
pub const ISOLATION_CASES: [(usize, usize, f64); 4] =
    [(1, 1024, 0.1), (1, 1024, 0.25), (2, 256, 0.1), (2, 128, 0.25)];
pub const ISOLATION_K: usize = 4;
pub const ISOLATION_EPS: f64 = 0.5;

/// Fraction of random `(Sigma, q)` under which a head element is not isolated.
pub fn isolation_failure_rate(dims: GridDims, alpha: f64, trials: usize, rng: &mut SeededRng) -> f64 {
    let b = theory_bucket_side(ISOLATION_K, ISOLATION_EPS, alpha, dims.d());
    let heads = (2.0 * ISOLATION_K as f64 / ISOLATION_EPS) as usize;
    let failures = (0..trials)
        .filter(|_| {
            let set: Vec<GridIndex> = index::sample(rng, dims.len(), heads)
                .into_iter()
                .map(|f| unflatten(f, dims))
                .collect();
            let spec = PermSpec::sample(dims, rng);
            !is_isolated(&set, &spec, &set[0], alpha, b)
        })
        .count();
    failures as f64 / trials as f64
}

#[derive(Debug)]
pub struct Isolation;

impl LemmaCheck for Isolation {
    fn name(&self) -> &'static str {
        "isolation"
    }
    fn description(&self) -> &'static str {
        "a head element is isolated under a random permutation with probability 1 - O(alpha^{d/2})"
    }
    fn run(&self, o: &SelftestOptions) -> CheckReport {
        let start = Instant::now();
        let mut c = Collector::new();
        let mut rng = o.seed.split(6).rng();
        let trials = o.draws(10_000);
        for (d, n, alpha) in ISOLATION_CASES {
            let dims = GridDims::new(d, n).expect("valid grid");
            let rate = isolation_failure_rate(dims, alpha, trials, &mut rng);
            let bound = calibration::ISOLATION_C * alpha.powf(d as f64 / 2.0);
            let se = (bound.min(1.0) * (1.0 - bound.min(1.0)) / trials as f64).sqrt();
            c.record(
                rate <= bound + 3.0 * se,
                format!("d={d} n={n} alpha={alpha}: failure rate {rate:.4} <= {bound:.4} + 3 SE"),
            );
        }
        c.finish(self.name(), start)
    }
}

/// Squared estimation error contributed by the tail, in units of
/// `eps mu^2`, over random `(Sigma, q, a)`.
pub fn tail_errors(dims: GridDims, alpha: f64, trials: usize, rng: &mut SeededRng) -> Vec<f64> {
    let d = dims.d();
    let k = ISOLATION_K;
    let eps = ISOLATION_EPS;
    let b = theory_bucket_side(k, eps, alpha, d);
    let filter = build_tensor_filter(b, 2 * d, dims).expect("valid filter");
    (0..trials)
        .map(|_| {
            // k unit heads over a Gaussian floor with ||tail|| = 0.1 ||head||.
            let mut x: Vec<Complex64> = (0..dims.len())
                .map(|_| Complex64::new(StandardNormal.sample(rng), StandardNormal.sample(rng)))
                .collect();
            let heads: Vec<usize> = index::sample(rng, dims.len(), k).into_iter().collect();
            for &h in &heads {
                x[h] = Complex64::new(0.0, 0.0);
            }
            let scale = 0.1 * (k as f64).sqrt() / l2_norm(&x);
            for v in x.iter_mut() {
                *v *= scale;
            }
            for &h in &heads {
                x[h] = Complex64::from_polar(1.0, rng.random_range(0.0..std::f64::consts::TAU));
            }
            let mu = noise_level(&x, k).expect("k >= 1");
            let head_set: HashSet<usize> = (0..dims.len())
                .filter(|&f| x[f].norm_sqr() >= eps * mu * mu)
                .collect();
            let signal = Signal::new(dims, x, Domain::Time).expect("length matches");
            let spec = PermSpec::sample(dims, rng);
            let i = unflatten(heads[0], dims);
            well_hashed_error(&signal, &head_set, &spec, &filter, &i) / (eps * mu * mu)
        })
        .collect()
}

#[derive(Debug)]
pub struct NoiseHashing;

impl LemmaCheck for NoiseHashing {
    fn name(&self) -> &'static str {
        "well-hashed"
    }
    fn description(&self) -> &'static str {
        "tail noise adds O(alpha^d) eps mu^2 error on average and rarely more than O(sqrt(alpha))^d eps mu^2"
    }
    fn run(&self, o: &SelftestOptions) -> CheckReport {
        let start = Instant::now();
        let mut c = Collector::new();
        let mut rng = o.seed.split(7).rng();
        let trials = o.draws(4000);
        // Whole-grid FFTs per draw; the 2-d grids are kept small.
        for (d, n, alpha) in [(1, 1024, 0.1), (1, 1024, 0.25), (2, 64, 0.25)] {
            let dims = GridDims::new(d, n).expect("valid grid");
            let errs = tail_errors(dims, alpha, trials, &mut rng);
            let (mean, se) = mean_and_se(&errs);
            let mean_bound = (calibration::NOISE_C * alpha).powi(d as i32);
            let cut = (calibration::NOISE_C * alpha.sqrt()).powi(d as i32);
            let tail = errs.iter().filter(|&&e| e > cut).count() as f64 / trials as f64;
            let p = alpha.powf(d as f64 / 2.0);
            let tail_se = (p * (1.0 - p) / trials as f64).sqrt();
            c.record(
                mean - 3.0 * se <= mean_bound,
                format!("d={d} n={n} alpha={alpha}: mean tail error {mean:.4} eps mu^2 (se {se:.4}) <= {mean_bound:.4}"),
            );
            c.record(
                tail <= p + 3.0 * tail_se,
                format!("d={d} n={n} alpha={alpha}: Pr[error > {cut:.3} eps mu^2] = {tail:.4} <= {p:.4} + 3 SE"),
            );
        }
        c.finish(self.name(), start)
    }
}

pub fn checks() -> &'static Registry<dyn LemmaCheck> {
    static REGISTRY: OnceLock<Registry<dyn LemmaCheck>> = OnceLock::new();
    REGISTRY.get_or_init(|| {
        let mut r: Registry<dyn LemmaCheck> = Registry::new("self-test check");
        r.register("dft-oracle", |_| Box::new(DftOracle));
        r.register("perm-identity", |_| Box::new(PermutationIdentity));
        r.register("filter-bounds", |_| Box::new(FilterBounds));
        r.register("det-parity", |_| Box::new(DetParity));
        r.register("limited-independence", |_| Box::new(LimitedIndependence));
        r.register("hashing-leakage", |_| Box::new(HashingLeakage));
        r.register("isolation", |_| Box::new(Isolation));
        r.register("well-hashed", |_| Box::new(NoiseHashing));
        r
    })
}

/// Runs the named checks (all of them when `only` is empty).
pub fn run_checks(only: &[String], options: &SelftestOptions) -> crate::Result<Vec<CheckReport>> {
    let names: Vec<String> = if only.is_empty() {
        checks().names().map(String::from).collect()
    } else {
        only.to_vec()
    };
    names
        .iter()
        .map(|name| checks().create(name, &()).map(|c| c.run(options)))
        .collect()
}
