//! Hashing the signal into buckets through the spectrum.
//!
//! One round computes `u = sqrt(N) F^{-1}((P x^) . G^)`: the permuted
//! spectrum is windowed by the filter's compact frequency support and
//! transformed back, so `u` is the permuted time signal convolved with `G`.
//! Every time-domain position acts as a bucket centre. Only the spectrum
//! entries under the filter support are ever read, and those reads go
//! through a counting [`SampleOracle`].

use std::collections::HashSet;
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};

use num_complex::Complex64;

use crate::dft::{Direction, FftPlan, RootTable};
use crate::error::{Error, Result};
use crate::filter::Filter;
use crate::grid::{flatten, linf_dist, unflatten, Domain, GridDims, GridIndex, Signal};
use crate::permute::PermSpec;

/// Read access to an in-memory spectrum that records which positions were
/// touched. Repeated reads of one position count once.
#[derive(Debug)]
pub struct SampleOracle {
    dims: GridDims,
    spectrum: Vec<Complex64>,
    seen: Vec<AtomicBool>,
    distinct: AtomicUsize,
}

impl SampleOracle {
    pub fn new(spectrum: Signal) -> Result<Self> {
        if spectrum.domain != Domain::Frequency {
            return Err(Error::Oracle("oracle must wrap a frequency-domain signal".into()));
        }
        let seen = (0..spectrum.values.len()).map(|_| AtomicBool::new(false)).collect();
        Ok(SampleOracle {
            dims: spectrum.dims,
            spectrum: spectrum.values,
            seen,
            distinct: AtomicUsize::new(0),
        })
    }

    pub fn dims(&self) -> GridDims {
        self.dims
    }

    /// Spectrum value at a flat position.
    pub fn sample(&self, flat: usize) -> Result<Complex64> {
        let v = *self.spectrum.get(flat).ok_or_else(|| {
            Error::Oracle(format!(
                "position {flat} outside a spectrum of {} points",
                self.spectrum.len()
            ))
        })?;
        if !self.seen[flat].swap(true, Ordering::Relaxed) {
            self.distinct.fetch_add(1, Ordering::Relaxed);
        }
        Ok(v)
    }

    pub fn sample_at(&self, j: &GridIndex) -> Result<Complex64> {
        self.sample(flatten(j, self.dims))
    }

    /// Number of distinct positions read so far.
    pub fn samples_used(&self) -> usize {
        self.distinct.load(Ordering::Relaxed)
    }
}

/// One hash function together with its bucket values `u`.
#[derive(Debug, Clone)]
pub struct HashRound {
    pub spec: PermSpec,
    pub u: Vec<Complex64>,
    /// Spectrum positions this round read.
    pub samples_used: usize,
}

/// Precomputed state for hashing with one filter: FFT plan, roots of unity
/// and the coordinates of the filter support.
#[derive(Debug, Clone)]
pub struct Hasher<'f> {
    filter: &'f Filter,
    plan: FftPlan,
    roots: RootTable,
    support: Vec<(usize, GridIndex, f64)>,
}

impl<'f> Hasher<'f> {
    pub fn new(filter: &'f Filter) -> Self {
        let dims = filter.dims();
        let support = filter
            .freq_support()
            .iter()
            .map(|&(flat, w)| (flat, unflatten(flat, dims), w))
            .collect();
        Hasher {
            filter,
            plan: FftPlan::new(dims.n()).expect("grid side is a power of two"),
            roots: RootTable::new(dims.n()),
            support,
        }
    }

    pub fn filter(&self) -> &Filter {
        self.filter
    }

    pub fn roots(&self) -> &RootTable {
        &self.roots
    }

    /// `sqrt(N) F^{-1}((P s) . G^)` where `read(p)` yields the spectrum at flat `p`.
    fn bucketize<F>(&self, spec: &PermSpec, mut read: F) -> Result<Vec<Complex64>>
    where
        F: FnMut(usize) -> Result<Complex64>,
    {
        let dims = self.filter.dims();
        let mut z = vec![Complex64::new(0.0, 0.0); dims.len()];
        for (flat, j, w) in &self.support {
            let src = spec.source_flat(j);
            z[*flat] = read(src)? * spec.modulation(j, &self.roots) * *w;
        }
        self.plan.transform(&mut z, dims, Direction::Inverse);
        let root_n = (dims.len() as f64).sqrt();
        for v in z.iter_mut() {
            *v *= root_n;
        }
        Ok(z)
    }

    /// Hashes the oracle's spectrum under `spec`.
    pub fn hash(&self, oracle: &SampleOracle, spec: &PermSpec) -> Result<HashRound> {
        if oracle.dims() != self.filter.dims() || spec.dims() != self.filter.dims() {
            return Err(Error::param("oracle, filter and permutation grids differ"));
        }
        let u = self.bucketize(spec, |p| oracle.sample(p))?;
        Ok(HashRound {
            spec: spec.clone(),
            u,
            samples_used: self.support.len(),
        })
    }

    /// Hashes a fully known spectrum; reads no oracle.
    pub fn hash_spectrum(&self, spectrum: &[Complex64], spec: &PermSpec) -> Vec<Complex64> {
        self.bucketize(spec, |p| Ok(spectrum[p]))
            .expect("reading an in-memory slice cannot fail")
    }

    /// `F(chi)` as a dense spectrum, using this hasher's plan.
    pub fn spectrum_of(&self, chi: &crate::recovery::SparseEstimate) -> Vec<Complex64> {
        let dims = self.filter.dims();
        let mut dense = vec![Complex64::new(0.0, 0.0); dims.len()];
        for (&f, &v) in chi.iter() {
            dense[f] = v;
        }
        self.plan.transform(&mut dense, dims, Direction::Forward);
        dense
    }

    /// `v = u - hash(chi)` given `chi^ = F(chi)`.
    pub fn subtract_spectrum(&self, round: &HashRound, chi_hat: &[Complex64]) -> Vec<Complex64> {
        let mut v = self.hash_spectrum(chi_hat, &round.spec);
        for (vi, ui) in v.iter_mut().zip(&round.u) {
            *vi = ui - *vi;
        }
        v
    }
}

/// Hashes `x^` (held by `oracle`) into buckets under `spec`.
pub fn hash_signal(oracle: &SampleOracle, filter: &Filter, spec: &PermSpec) -> Result<HashRound> {
    Hasher::new(filter).hash(oracle, spec)
}

/// `u_{pi(i)} w^{-a^T Sigma i}`, the round's estimate of `x_i`.
pub fn estimate_at(round: &HashRound, i: &GridIndex) -> Complex64 {
    estimate_in(&round.u, &round.spec, i)
}

pub(crate) fn estimate_in(buckets: &[Complex64], spec: &PermSpec, i: &GridIndex) -> Complex64 {
    let dims = spec.dims();
    let roots = RootTable::new(dims.n());
    buckets[flatten(&spec.apply_pi(i), dims)] * spec.time_phase(i, &roots).conj()
}

/// Dense spectrum of a sparse estimate.
pub fn sparse_spectrum(chi: &crate::recovery::SparseEstimate, dims: GridDims) -> Vec<Complex64> {
    let mut dense = vec![Complex64::new(0.0, 0.0); dims.len()];
    for (&f, &v) in chi.iter() {
        dense[f] = v;
    }
    FftPlan::new(dims.n())
        .expect("grid side is a power of two")
        .transform(&mut dense, dims, Direction::Forward);
    dense
}

/// `v = u - sqrt(N) F^{-1}((P chi^) . G^)`. Reads no spectrum samples.
pub fn subtract_sparse(
    round: &HashRound,
    chi: &crate::recovery::SparseEstimate,
    filter: &Filter,
) -> Signal {
    let dims = filter.dims();
    let chi_hat = sparse_spectrum(chi, dims);
    let v = Hasher::new(filter).subtract_spectrum(round, &chi_hat);
    Signal {
        dims,
        values: v,
        domain: Domain::Time,
    }
}

/// Whether `i` is isolated from the other members of `set` under `spec`
/// at every scale `t` with radius `(n/b) 2^{t+2} < n/2`: at most
/// `alpha^{d/2} 2^{(t+3)d} 2^t` of them land within that `l_inf` radius
/// of `pi(i)`.
pub fn is_isolated(set: &[GridIndex], spec: &PermSpec, i: &GridIndex, alpha: f64, b: usize) -> bool {
    let dims = spec.dims();
    let n = dims.n() as f64;
    let d = dims.d() as i32;
    let centre = spec.apply_pi(i);
    let dists: Vec<u64> = set
        .iter()
        .filter(|j| *j != i)
        .map(|j| linf_dist(&spec.apply_pi(j), &centre, dims))
        .collect();
    let mut t = 0i32;
    loop {
        let radius = n / b as f64 * 2f64.powi(t + 2);
        if radius >= n / 2.0 {
            return true;
        }
        let count = dists.iter().filter(|&&r| r as f64 <= radius).count() as f64;
        let allowed = alpha.powf(d as f64 / 2.0) * 2f64.powi((t + 3) * d) * 2f64.powi(t);
        if count > allowed {
            return false;
        }
        t += 1;
    }
}

/// `|u_{pi(i)} w^{-a^T Sigma i} - x_i|^2` where `u` hashes only the part of
/// `x` outside `head`.
pub fn well_hashed_error(
    x: &Signal,
    head: &HashSet<usize>,
    spec: &PermSpec,
    filter: &Filter,
    i: &GridIndex,
) -> f64 {
    let dims = x.dims;
    let mut tail = x.values.clone();
    for &h in head {
        tail[h] = Complex64::new(0.0, 0.0);
    }
    let tail_i = tail[flatten(i, dims)];
    let mut tail_hat = tail;
    FftPlan::new(dims.n())
        .expect("grid side is a power of two")
        .transform(&mut tail_hat, dims, Direction::Forward);
    let u = Hasher::new(filter).hash_spectrum(&tail_hat, spec);
    (estimate_in(&u, spec, i) - tail_i).norm_sqr()
}

/// Leakage into the bucket of `i`: `sum_{j != i} |x_j G_{o_i(j)}|^2`.
pub fn bucket_leakage(x: &Signal, spec: &PermSpec, filter: &Filter, i: &GridIndex) -> f64 {
    let dims = x.dims;
    let pi_i = spec.apply_pi(i);
    x.values
        .iter()
        .enumerate()
        .filter(|(_, v)| v.norm_sqr() > 0.0)
        .map(|(f, v)| (unflatten(f, dims), v))
        .filter(|(j, _)| j != i)
        .map(|(j, v)| {
            let o = spec.apply_pi(&j).sub(&pi_i, dims.n());
            (v * filter.time_at(&o)).norm_sqr()
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dft::fft_forward;
    use crate::recovery::SparseEstimate;
    use crate::seed::Seed;
    use rand::Rng;

    fn oracle_for(x: &Signal) -> SampleOracle {
        SampleOracle::new(fft_forward(x)).unwrap()
    }

    fn random_sparse(dims: GridDims, k: usize, seed: u64) -> Signal {
        let mut rng = Seed(seed).rng();
        let mut x = Signal::zeros(dims, Domain::Time);
        for _ in 0..k {
            let f = rng.random_range(0..dims.len());
            x.values[f] = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        }
        x
    }

    #[test]
    fn oracle_counts_distinct_reads() {
        let dims = GridDims::new(1, 16).unwrap();
        let o = oracle_for(&Signal::zeros(dims, Domain::Time));
        o.sample(3).unwrap();
        o.sample(3).unwrap();
        o.sample(5).unwrap();
        assert_eq!(o.samples_used(), 2);
        assert!(matches!(o.sample(16), Err(Error::Oracle(_))));
        assert!(SampleOracle::new(Signal::zeros(dims, Domain::Time)).is_err());
    }

    #[test]
    fn delta_is_recovered_exactly() {
        let dims = GridDims::new(2, 32).unwrap();
        let filter = Filter::new(8, 2, dims).unwrap();
        let mut rng = Seed(21).rng();
        for _ in 0..10 {
            let i = unflatten(rng.random_range(0..dims.len()), dims);
            let mut x = Signal::zeros(dims, Domain::Time);
            let amp = Complex64::new(0.3, -1.7);
            x.values[flatten(&i, dims)] = amp;
            let oracle = oracle_for(&x);
            let spec = PermSpec::sample(dims, &mut rng);
            let round = hash_signal(&oracle, &filter, &spec).unwrap();
            assert!((estimate_at(&round, &i) - amp).norm() < 1e-9);
            assert_eq!(round.samples_used, filter.support_len());
            assert_eq!(oracle.samples_used(), filter.support_len());
        }
    }

    #[test]
    fn buckets_match_direct_convolution_sum() {
        let dims = GridDims::new(1, 256).unwrap();
        let filter = Filter::new(16, 2, dims).unwrap();
        let roots = RootTable::new(256);
        let mut rng = Seed(22).rng();
        for trial in 0..5 {
            let x = random_sparse(dims, 1 + 2 * trial, 100 + trial as u64);
            let spec = PermSpec::sample(dims, &mut rng);
            let round = hash_signal(&oracle_for(&x), &filter, &spec).unwrap();
            let support: Vec<_> = (0..dims.len()).filter(|&f| x.values[f].norm() > 0.0).collect();
            for jf in 0..dims.len() {
                let j = unflatten(jf, dims);
                let direct: Complex64 = support
                    .iter()
                    .map(|&l| {
                        let li = unflatten(l, dims);
                        let off = j.sub(&spec.apply_pi(&li), 256);
                        x.values[l] * spec.time_phase(&li, &roots) * filter.time_at(&off)
                    })
                    .sum();
                assert!((round.u[jf] - direct).norm() < 1e-9, "j = {jf}");
            }
        }
    }

    #[test]
    fn estimates_are_linear() {
        let dims = GridDims::new(1, 128).unwrap();
        let filter = Filter::new(16, 2, dims).unwrap();
        let spec = PermSpec::sample(dims, &mut Seed(23).rng());
        let x = random_sparse(dims, 5, 1);
        let y = random_sparse(dims, 5, 2);
        let c = Complex64::new(2.0, -0.5);
        let combo = Signal::new(dims, x.values.iter().zip(&y.values).map(|(a, b)| a + c * b).collect(), Domain::Time)
            .unwrap();
        let rx = hash_signal(&oracle_for(&x), &filter, &spec).unwrap();
        let ry = hash_signal(&oracle_for(&y), &filter, &spec).unwrap();
        let rc = hash_signal(&oracle_for(&combo), &filter, &spec).unwrap();
        for i in dims.indices() {
            let lhs = estimate_at(&rc, &i);
            let rhs = estimate_at(&rx, &i) + c * estimate_at(&ry, &i);
            assert!((lhs - rhs).norm() < 1e-9);
        }
    }

    #[test]
    fn subtraction_reads_nothing_and_cancels() {
        let dims = GridDims::new(1, 256).unwrap();
        let filter = Filter::new(16, 2, dims).unwrap();
        let x = random_sparse(dims, 8, 31);
        let oracle = oracle_for(&x);
        let spec = PermSpec::sample(dims, &mut Seed(24).rng());
        let round = hash_signal(&oracle, &filter, &spec).unwrap();
        let before = oracle.samples_used();

        let v = subtract_sparse(&round, &SparseEstimate::new(), &filter);
        assert_eq!(v.values, round.u);

        let full = SparseEstimate::from_dense(&x.values);
        let v = subtract_sparse(&round, &full, &filter);
        assert!(v.norm() < 1e-8 * x.norm());

        let mut half = SparseEstimate::new();
        for (f, val) in full.iter().take(full.len() / 2) {
            half.add(*f, *val);
        }
        let v = subtract_sparse(&round, &half, &filter);
        let mut residual = x.clone();
        for (f, val) in half.iter() {
            residual.values[*f] -= val;
        }
        let fresh = hash_signal(&oracle_for(&residual), &filter, &spec).unwrap();
        for (a, b) in v.values.iter().zip(&fresh.u) {
            assert!((a - b).norm() < 1e-9);
        }
        assert_eq!(oracle.samples_used(), before);
    }

    #[test]
    fn isolation_edge_cases() {
        let dims = GridDims::new(1, 256).unwrap();
        let spec = PermSpec::sample(dims, &mut Seed(25).rng());
        let i = GridIndex::new([7], 256);
        assert!(is_isolated(std::slice::from_ref(&i), &spec, &i, 0.1, 16));
        let everything: Vec<_> = dims.indices().collect();
        assert!(!is_isolated(&everything, &spec, &i, 0.1, 16));
    }

    #[test]
    fn well_hashed_error_cases() {
        let dims = GridDims::new(1, 256).unwrap();
        let filter = Filter::new(16, 2, dims).unwrap();
        let spec = PermSpec::sample(dims, &mut Seed(26).rng());
        let x = random_sparse(dims, 6, 41);
        let head: HashSet<usize> = (0..dims.len()).filter(|&f| x.values[f].norm() > 0.0).collect();
        let i = GridIndex::new([3], 256);
        assert!(well_hashed_error(&x, &head, &spec, &filter, &i) < 1e-20);

        // A single tail element leaks through the filter at its offset.
        let mut single = Signal::zeros(dims, Domain::Time);
        let j = GridIndex::new([90], 256);
        single.values[flatten(&j, dims)] = Complex64::new(1.0, 0.0);
        let err = well_hashed_error(&single, &HashSet::new(), &spec, &filter, &i);
        let o = spec.offset(&i, &j);
        let g = filter.time_at(&o);
        assert!((err - g * g).abs() < 1e-12);
        let r = o.linf_norm(256) as f64;
        assert!(err <= (2.0 / (1.0 + 16.0 / 256.0 * r)).powi(4) + 1e-12);
        assert!((bucket_leakage(&single, &spec, &filter, &i) - err).abs() < 1e-12);
    }
}
