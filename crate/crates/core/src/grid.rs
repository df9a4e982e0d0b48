//! Index arithmetic on the `d`-dimensional torus `[n]^d` and simple signal
//! statistics.
//!
//! Coordinates live in the centred residue set `[-n/2, n/2 - 1]`. Flat
//! storage is row-major over coordinates reduced into `[0, n)`, so the
//! origin is flat index 0 and a 1-d signal is laid out exactly as a
//! standard FFT buffer.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GridDims {
    d: usize,
    n: usize,
    total: usize,
}

impl GridDims {
    pub fn new(d: usize, n: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::param("dimension d must be at least 1"));
        }
        if n < 2 || !n.is_power_of_two() {
            return Err(Error::param(format!(
                "side length n = {n} must be a power of two >= 2"
            )));
        }
        let total = u32::try_from(d)
            .ok()
            .and_then(|d| n.checked_pow(d))
            .ok_or_else(|| Error::param(format!("n^d overflows for n = {n}, d = {d}")))?;
        Ok(GridDims { d, n, total })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Total number of grid points, `n^d`.
    pub fn len(&self) -> usize {
        self.total
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn log2_len(&self) -> u32 {
        self.total.trailing_zeros()
    }

    /// All grid indices in flat order.
    pub fn indices(&self) -> impl Iterator<Item = GridIndex> + '_ {
        (0..self.total).map(move |f| unflatten(f, *self))
    }
}

/// Reduce `c` modulo `n` into `[-n/2, n/2 - 1]`.
#[inline]
pub fn canonical(c: i64, n: usize) -> i64 {
    let n = n as i64;
    let r = c.rem_euclid(n);
    if r >= n / 2 {
        r - n
    } else {
        r
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GridIndex(Vec<i64>);

impl GridIndex {
    /// Builds an index, reducing each coordinate into the canonical residue set.
    pub fn new(coords: impl IntoIterator<Item = i64>, n: usize) -> Self {
        GridIndex(coords.into_iter().map(|c| canonical(c, n)).collect())
    }

    pub fn zero(d: usize) -> Self {
        GridIndex(vec![0; d])
    }

    pub fn coords(&self) -> &[i64] {
        &self.0
    }

    pub fn d(&self) -> usize {
        self.0.len()
    }

    /// Componentwise `self - other`, reduced mod `n`.
    pub fn sub(&self, other: &GridIndex, n: usize) -> GridIndex {
        GridIndex::new(self.0.iter().zip(&other.0).map(|(a, b)| a - b), n)
    }

    pub fn neg(&self, n: usize) -> GridIndex {
        GridIndex::new(self.0.iter().map(|a| -a), n)
    }

    /// `||self||_inf` in circular distance.
    pub fn linf_norm(&self, n: usize) -> u64 {
        self.0.iter().map(|&c| circ_dist(c, 0, n)).max().unwrap_or(0)
    }
}

/// Row-major flat position of a canonical index.
#[inline]
pub fn flatten(i: &GridIndex, dims: GridDims) -> usize {
    flatten_coords(i.coords(), dims.n)
}

#[inline]
pub(crate) fn flatten_coords(coords: &[i64], n: usize) -> usize {
    let ni = n as i64;
    coords
        .iter()
        .fold(0usize, |acc, &c| acc * n + c.rem_euclid(ni) as usize)
}

pub fn unflatten(mut flat: usize, dims: GridDims) -> GridIndex {
    let n = dims.n;
    let mut coords = vec![0i64; dims.d];
    for c in coords.iter_mut().rev() {
        *c = canonical((flat % n) as i64, n);
        flat /= n;
    }
    GridIndex(coords)
}

/// Circular distance between residues `a` and `b` on `Z_n`.
#[inline]
pub fn circ_dist(a: i64, b: i64, n: usize) -> u64 {
    let r = (a - b).rem_euclid(n as i64) as u64;
    r.min(n as u64 - r)
}

/// `||i - j||_inf` with circular distance per coordinate.
pub fn linf_dist(i: &GridIndex, j: &GridIndex, dims: GridDims) -> u64 {
    i.coords()
        .iter()
        .zip(j.coords())
        .map(|(&a, &b)| circ_dist(a, b, dims.n))
        .max()
        .unwrap_or(0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Domain {
    Time,
    Frequency,
}

/// A dense complex vector over `[n]^d` in flat order.
#[derive(Debug, Clone, PartialEq)]
pub struct Signal {
    pub dims: GridDims,
    pub values: Vec<Complex64>,
    pub domain: Domain,
}

impl Signal {
    pub fn new(dims: GridDims, values: Vec<Complex64>, domain: Domain) -> Result<Self> {
        if values.len() != dims.len() {
            return Err(Error::param(format!(
                "signal has {} values but the grid has {} points",
                values.len(),
                dims.len()
            )));
        }
        Ok(Signal {
            dims,
            values,
            domain,
        })
    }

    pub fn zeros(dims: GridDims, domain: Domain) -> Self {
        Signal {
            dims,
            values: vec![Complex64::new(0.0, 0.0); dims.len()],
            domain,
        }
    }

    pub fn at(&self, i: &GridIndex) -> Complex64 {
        self.values[flatten(i, self.dims)]
    }

    pub fn norm(&self) -> f64 {
        l2_norm(&self.values)
    }
}

pub fn l2_norm(x: &[Complex64]) -> f64 {
    x.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

pub fn linf_norm(x: &[Complex64]) -> f64 {
    x.iter().map(|v| v.norm()).fold(0.0, f64::max)
}

/// Flat positions of the `k` largest-magnitude entries. Ties go to the
/// lower flat index.
pub fn top_k(x: &[Complex64], k: usize) -> Result<Vec<usize>> {
    if k > x.len() {
        return Err(Error::param(format!(
            "k = {k} exceeds signal length {}",
            x.len()
        )));
    }
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|&a, &b| {
        x[b].norm_sqr()
            .total_cmp(&x[a].norm_sqr())
            .then(a.cmp(&b))
    });
    order.truncate(k);
    Ok(order)
}

/// `min over k-sparse y of ||x - y||_2`.
pub fn err_k(x: &[Complex64], k: usize) -> Result<f64> {
    let head = top_k(x, k)?;
    // Sum the tail directly; total - head would cancel badly.
    let mut in_head = vec![false; x.len()];
    for &i in &head {
        in_head[i] = true;
    }
    let tail: f64 = x
        .iter()
        .zip(&in_head)
        .filter(|(_, &h)| !h)
        .map(|(v, _)| v.norm_sqr())
        .sum();
    Ok(tail.sqrt())
}

/// Per-coordinate tail scale `mu = err_k(x) / sqrt(k)`.
pub fn noise_level(x: &[Complex64], k: usize) -> Result<f64> {
    if k == 0 {
        return Err(Error::param("noise level needs k >= 1"));
    }
    Ok(err_k(x, k)? / (k as f64).sqrt())
}
