//! The boxcar-power filter family.
//!
//! In frequency the 1-d building block is a boxcar of `w` taps (`w = b - 1`
//! for a bucket side `b`) with height `sqrt(n)/w`; its time-domain image is
//! the normalised Dirichlet kernel `H^1`. The order-`F` filter is the `F`-fold
//! convolution of the boxcar, whose time image is `(H^1)^F`, and the
//! `d`-dimensional filter is the tensor product of `d` copies.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::grid::{flatten_coords, unflatten, GridDims, GridIndex};

/// 1-d frequency-domain boxcar for bucket side `b`: `sqrt(n)/(b-1)` on the
/// `b - 1` indices with `|i| < b/2`, returned in flat (FFT) order.
pub fn build_boxcar(b: usize, n: usize) -> Result<Vec<f64>> {
    if !b.is_power_of_two() || b < 4 {
        return Err(Error::param(format!(
            "bucket side b = {b} must be a power of two >= 4"
        )));
    }
    if b > n {
        return Err(Error::param(format!("bucket side b = {b} exceeds n = {n}")));
    }
    boxcar_taps(b - 1, n)
}

/// Boxcar with an explicit odd tap count `w`, nonzero for `|i| <= (w-1)/2`.
pub fn boxcar_taps(w: usize, n: usize) -> Result<Vec<f64>> {
    if w == 0 || w % 2 == 0 {
        return Err(Error::param(format!("boxcar tap count {w} must be odd")));
    }
    if w >= n {
        return Err(Error::param(format!("boxcar of {w} taps does not fit n = {n}")));
    }
    let h = (w / 2) as i64;
    let height = (n as f64).sqrt() / w as f64;
    let mut out = vec![0.0; n];
    for i in -h..=h {
        out[i.rem_euclid(n as i64) as usize] = height;
    }
    Ok(out)
}

/// `H^1_j` for a `w`-tap boxcar on length `n`.
pub fn dirichlet(w: usize, n: usize, j: i64) -> f64 {
    if j.rem_euclid(n as i64) == 0 {
        return 1.0;
    }
    let t = PI * j as f64 / n as f64;
    (w as f64 * t).sin() / (w as f64 * t.sin())
}

/// One axis of the filter: frequency support and time-domain values.
#[derive(Debug, Clone)]
pub struct AxisFilter {
    n: usize,
    taps: usize,
    order: usize,
    /// `(frequency, weight)` pairs, frequencies in `[-order*(taps-1)/2, order*(taps-1)/2]`.
    support: Vec<(i64, f64)>,
    /// `(H^1_j)^F` in flat order.
    time: Vec<f64>,
}

impl AxisFilter {
    pub fn support(&self) -> &[(i64, f64)] {
        &self.support
    }

    /// Time-domain value at coordinate `j`.
    pub fn time_at(&self, j: i64) -> f64 {
        self.time[j.rem_euclid(self.n as i64) as usize]
    }

    pub fn time_values(&self) -> &[f64] {
        &self.time
    }

    /// Dense frequency vector in flat order.
    pub fn dense_frequency(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        for &(i, w) in &self.support {
            out[i.rem_euclid(self.n as i64) as usize] = w;
        }
        out
    }
}

/// Order-`F` 1-d filter with bucket side `b` (`b - 1` boxcar taps).
pub fn build_hf(b: usize, order: usize, n: usize) -> Result<AxisFilter> {
    build_boxcar(b, n)?;
    axis_filter(b - 1, order, n)
}

pub(crate) fn axis_filter(taps: usize, order: usize, n: usize) -> Result<AxisFilter> {
    if order == 0 {
        return Err(Error::param("filter order F must be at least 1"));
    }
    if taps == 0 || taps % 2 == 0 {
        return Err(Error::param(format!("boxcar tap count {taps} must be odd")));
    }
    // The support [-reach, reach] must not wrap around the torus.
    let reach = order * (taps - 1) / 2;
    if reach >= n / 2 {
        return Err(Error::param(format!(
            "filter support reaches {reach} but must stay below n/2 = {}",
            n / 2
        )));
    }
    // Integer counts of the F-fold self-convolution of the all-ones boxcar.
    let mut counts: Vec<u128> = vec![1; taps];
    for _ in 1..order {
        let mut next = vec![0u128; counts.len() + taps - 1];
        for (s, &c) in counts.iter().enumerate() {
            for t in 0..taps {
                next[s + t] += c;
            }
        }
        counts = next;
    }
    let reach = reach as i64;
    debug_assert_eq!(counts.len() as i64, 2 * reach + 1);
    // Pointwise power in time <=> convolution in frequency scaled by
    // n^{-1/2} per product under the unitary convention.
    let scale = (n as f64).sqrt() / (taps as f64).powi(order as i32);
    let support = counts
        .iter()
        .enumerate()
        .map(|(s, &c)| (s as i64 - reach, c as f64 * scale))
        .collect();
    let time = (0..n)
        .map(|f| {
            let j = if f >= n / 2 { f as i64 - n as i64 } else { f as i64 };
            dirichlet(taps, n, j).powi(order as i32)
        })
        .collect();
    Ok(AxisFilter {
        n,
        taps,
        order,
        support,
        time,
    })
}

/// The `d`-dimensional filter `G_i = prod_s H^F_{i_s}` with its frequency
/// support.
#[derive(Debug, Clone)]
pub struct Filter {
    dims: GridDims,
    axis: AxisFilter,
    /// `(flat frequency index, weight)` over the tensor support.
    freq_support: Vec<(usize, f64)>,
}

impl Filter {
    /// Filter with bucket side `b` (a power of two) and order `F`.
    pub fn new(b: usize, order: usize, dims: GridDims) -> Result<Self> {
        let axis = build_hf(b, order, dims.n())?;
        Ok(Self::from_axis(axis, dims))
    }

    /// Filter whose boxcar has exactly `taps` nonzero entries per axis
    /// (odd); the bucket side is then `taps + 1`.
    pub fn with_taps(taps: usize, order: usize, dims: GridDims) -> Result<Self> {
        let axis = axis_filter(taps, order, dims.n())?;
        Ok(Self::from_axis(axis, dims))
    }

    fn from_axis(axis: AxisFilter, dims: GridDims) -> Self {
        let n = dims.n();
        let mut freq_support = Vec::with_capacity(axis.support.len().pow(dims.d() as u32));
        let mut coords = vec![0i64; dims.d()];
        let mut pos = vec![0usize; dims.d()];
        'outer: loop {
            let mut w = 1.0;
            for (s, &p) in pos.iter().enumerate() {
                coords[s] = axis.support[p].0;
                w *= axis.support[p].1;
            }
            freq_support.push((flatten_coords(&coords, n), w));
            for s in (0..dims.d()).rev() {
                pos[s] += 1;
                if pos[s] < axis.support.len() {
                    continue 'outer;
                }
                pos[s] = 0;
            }
            break;
        }
        Filter {
            dims,
            axis,
            freq_support,
        }
    }

    pub fn dims(&self) -> GridDims {
        self.dims
    }

    /// Bucket side `b`.
    pub fn bucket_side(&self) -> usize {
        self.axis.taps + 1
    }

    /// Bucket count `B = b^d`.
    pub fn buckets(&self) -> usize {
        self.bucket_side().pow(self.dims.d() as u32)
    }

    pub fn order(&self) -> usize {
        self.axis.order
    }

    pub fn taps(&self) -> usize {
        self.axis.taps
    }

    pub fn axis(&self) -> &AxisFilter {
        &self.axis
    }

    pub fn freq_support(&self) -> &[(usize, f64)] {
        &self.freq_support
    }

    /// Number of spectrum samples one hashing round reads.
    pub fn support_len(&self) -> usize {
        self.freq_support.len()
    }

    /// `G_i`.
    pub fn time_at(&self, i: &GridIndex) -> f64 {
        i.coords().iter().map(|&c| self.axis.time_at(c)).product()
    }

    /// `G` at a flat index.
    pub fn time_flat(&self, mut flat: usize) -> f64 {
        let n = self.dims.n();
        let mut g = 1.0;
        for _ in 0..self.dims.d() {
            g *= self.axis.time[flat % n];
            flat /= n;
        }
        g
    }
}

pub fn build_tensor_filter(b: usize, order: usize, dims: GridDims) -> Result<Filter> {
    Filter::new(b, order, dims)
}

/// Worst-case margins of the two decay bounds over the whole grid.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterBoundsReport {
    pub g0: f64,
    /// `min(G_j - (2 pi)^{-Fd}, 1 - G_j)` over `||j||_inf <= n/(2b)`.
    pub inner_margin: f64,
    /// `min((2/(1 + (b/n)||j||_inf))^F - |G_j|)` over all `j`.
    pub decay_margin: f64,
    pub points_checked: usize,
}

impl FilterBoundsReport {
    pub fn holds(&self) -> bool {
        self.g0 == 1.0 && self.inner_margin >= -1e-12 && self.decay_margin >= -1e-12
    }
}

/// Exhaustively checks the filter's mass-concentration bounds.
pub fn check_filter_bounds(filter: &Filter) -> FilterBoundsReport {
    let dims = filter.dims;
    let n = dims.n() as f64;
    let b = filter.bucket_side() as f64;
    let order = filter.order() as i32;
    let lower = (2.0 * PI).powi(-(order * dims.d() as i32));
    let mut inner_margin = f64::INFINITY;
    let mut decay_margin = f64::INFINITY;
    for f in 0..dims.len() {
        let g = filter.time_flat(f);
        let r = unflatten(f, dims).linf_norm(dims.n()) as f64;
        if r <= n / (2.0 * b) {
            inner_margin = inner_margin.min((g - lower).min(1.0 - g));
        }
        let bound = (2.0 / (1.0 + (b / n) * r)).powi(order);
        decay_margin = decay_margin.min(bound - g.abs());
    }
    FilterBoundsReport {
        g0: filter.time_flat(0),
        inner_margin,
        decay_margin,
        points_checked: dims.len(),
    }
}
