//! Orthonormal multidimensional DFT.
//!
//! Both directions carry the symmetric `1/sqrt(N)` factor, so the transform
//! is unitary and `||fft_forward(x)|| == ||x||`. The fast path is an
//! iterative radix-2 transform applied along each axis in turn; the
//! quadratic [`dft_bruteforce`] is kept as an independent reference.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{Domain, GridDims, Signal};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// `x^_j = N^{-1/2} sum_i w^{-i.j} x_i`
    Forward,
    /// `x_j = N^{-1/2} sum_i w^{i.j} x^_i`
    Inverse,
}

/// Largest grid accepted by [`dft_bruteforce`].
pub const BRUTEFORCE_MAX_LEN: usize = 1 << 14;

/// Table of `w^m = exp(2 pi i m / n)` for `m in [0, n)`.
#[derive(Debug, Clone)]
pub struct RootTable {
    n: usize,
    roots: Vec<Complex64>,
}

impl RootTable {
    pub fn new(n: usize) -> Self {
        let roots = (0..n)
            .map(|m| Complex64::from_polar(1.0, 2.0 * PI * m as f64 / n as f64))
            .collect();
        RootTable { n, roots }
    }

    /// `w^e` for any integer exponent; the exponent is reduced mod `n` first.
    #[inline]
    pub fn pow(&self, e: i64) -> Complex64 {
        self.roots[e.rem_euclid(self.n as i64) as usize]
    }

    pub fn n(&self) -> usize {
        self.n
    }
}

/// Radix-2 plan for one side length, reusable across grids with that side.
#[derive(Debug, Clone)]
pub struct FftPlan {
    n: usize,
    log2n: u32,
    /// Per-stage twiddles, concatenated.
    forward: Vec<Complex64>,
    inverse: Vec<Complex64>,
}

impl FftPlan {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 || !n.is_power_of_two() {
            return Err(Error::param(format!("FFT length {n} is not a power of two")));
        }
        // Stage with half-length h uses exp(-2 pi i k / 2h), k < h, stored
        // at offset h - 1.
        let base: Vec<Complex64> = (0..n / 2)
            .map(|m| Complex64::from_polar(1.0, -2.0 * PI * m as f64 / n as f64))
            .collect();
        let mut forward = Vec::with_capacity(n.saturating_sub(1));
        let mut half = 1;
        while half < n {
            let step = n / (2 * half);
            forward.extend((0..half).map(|k| base[k * step]));
            half *= 2;
        }
        let inverse = forward.iter().map(|w| w.conj()).collect();
        Ok(FftPlan {
            n,
            log2n: n.trailing_zeros(),
            forward,
            inverse,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Unnormalized length-`n` transform of one contiguous line.
    fn transform_line(&self, buf: &mut [Complex64], dir: Direction) {
        let n = self.n;
        debug_assert_eq!(buf.len(), n);
        if n == 1 {
            return;
        }
        let shift = usize::BITS - self.log2n;
        for i in 0..n {
            let j = i.reverse_bits() >> shift;
            if j > i {
                buf.swap(i, j);
            }
        }
        let table = match dir {
            Direction::Forward => &self.forward,
            Direction::Inverse => &self.inverse,
        };
        let mut half = 1;
        while half < n {
            let tw = &table[half - 1..2 * half - 1];
            for chunk in buf.chunks_exact_mut(2 * half) {
                let (lo, hi) = chunk.split_at_mut(half);
                for ((a, b), w) in lo.iter_mut().zip(hi.iter_mut()).zip(tw) {
                    let t = *b * w;
                    *b = *a - t;
                    *a += t;
                }
            }
            half *= 2;
        }
    }

    /// Orthonormal in-place transform of a flat row-major buffer over `dims`.
    pub fn transform(&self, data: &mut [Complex64], dims: GridDims, dir: Direction) {
        assert_eq!(dims.n(), self.n, "plan built for a different side length");
        assert_eq!(data.len(), dims.len());
        let n = self.n;
        let total = dims.len();
        let mut line = vec![Complex64::new(0.0, 0.0); n];
        for axis in 0..dims.d() {
            let stride = n.pow((dims.d() - 1 - axis) as u32);
            if stride == 1 {
                for chunk in data.chunks_exact_mut(n) {
                    self.transform_line(chunk, dir);
                }
                continue;
            }
            let block = stride * n;
            for outer in (0..total).step_by(block) {
                for inner in 0..stride {
                    let base = outer + inner;
                    for (t, slot) in line.iter_mut().enumerate() {
                        *slot = data[base + t * stride];
                    }
                    self.transform_line(&mut line, dir);
                    for (t, v) in line.iter().enumerate() {
                        data[base + t * stride] = *v;
                    }
                }
            }
        }
        let scale = 1.0 / (total as f64).sqrt();
        for v in data.iter_mut() {
            *v *= scale;
        }
    }
}

fn run(x: &Signal, dir: Direction) -> Signal {
    let plan = FftPlan::new(x.dims.n()).expect("GridDims guarantees a power-of-two side");
    let mut values = x.values.clone();
    plan.transform(&mut values, x.dims, dir);
    Signal {
        dims: x.dims,
        values,
        domain: match dir {
            Direction::Forward => Domain::Frequency,
            Direction::Inverse => Domain::Time,
        },
    }
}

pub fn fft_forward(x: &Signal) -> Signal {
    run(x, Direction::Forward)
}

pub fn fft_inverse(spectrum: &Signal) -> Signal {
    run(spectrum, Direction::Inverse)
}

/// Literal `O(N^2)` evaluation of the DFT sum.
pub fn dft_bruteforce(x: &Signal, dir: Direction) -> Result<Signal> {
    let dims = x.dims;
    if dims.len() > BRUTEFORCE_MAX_LEN {
        return Err(Error::param(format!(
            "brute-force DFT limited to {BRUTEFORCE_MAX_LEN} points, got {}",
            dims.len()
        )));
    }
    let n = dims.n();
    let roots = RootTable::new(n);
    // w^{-m} = w^{(n-1) m mod n}
    let sign = match dir {
        Direction::Forward => n - 1,
        Direction::Inverse => 1,
    };
    // Coordinates in [0, n) give the same phases as canonical ones, and
    // n is a power of two, so exponents reduce with a mask.
    let d = dims.d();
    let mask = n - 1;
    let coords: Vec<usize> = (0..dims.len())
        .flat_map(|f| (0..d).rev().map(move |s| (f / n.pow(s as u32)) % n))
        .collect();
    let table = &roots.roots;
    let scale = 1.0 / (dims.len() as f64).sqrt();
    let values = coords
        .chunks_exact(d)
        .map(|j| {
            let mut acc = Complex64::new(0.0, 0.0);
            for (i, xi) in coords.chunks_exact(d).zip(&x.values) {
                let dot = i.iter().zip(j).fold(0usize, |a, (p, q)| a + p * q);
                acc += xi * table[(sign * dot) & mask];
            }
            acc * scale
        })
        .collect();
    Ok(Signal {
        dims,
        values,
        domain: match dir {
            Direction::Forward => Domain::Frequency,
            Direction::Inverse => Domain::Time,
        },
    })
}
