//! Pseudorandom spectrum permutations.
//!
//! A [`PermSpec`] `(Sigma, q, a)` with `det(Sigma)` odd induces the time-domain
//! relabelling `pi(i) = Sigma (i - q) mod n` and the frequency-domain operator
//! `(P x^)_i = x^_{Sigma^T (i - a)} w^{i^T Sigma q}`. Applying `P` to the
//! spectrum moves `x_i` to position `pi(i)` in time, up to the unit phase
//! `w^{a^T Sigma i}`.

use num_complex::Complex64;
use rand::Rng;

use crate::dft::RootTable;
use crate::error::{Error, Result};
use crate::grid::{canonical, flatten_coords, unflatten, GridDims, GridIndex, Signal};

/// A `d x d` integer matrix stored row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Matrix {
    d: usize,
    entries: Vec<i64>,
}

impl Matrix {
    pub fn new(d: usize, entries: Vec<i64>) -> Result<Self> {
        if entries.len() != d * d {
            return Err(Error::param(format!(
                "{d}x{d} matrix needs {} entries, got {}",
                d * d,
                entries.len()
            )));
        }
        Ok(Matrix { d, entries })
    }

    pub fn identity(d: usize) -> Self {
        let mut entries = vec![0; d * d];
        for r in 0..d {
            entries[r * d + r] = 1;
        }
        Matrix { d, entries }
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn get(&self, row: usize, col: usize) -> i64 {
        self.entries[row * self.d + col]
    }

    pub fn entries(&self) -> &[i64] {
        &self.entries
    }

    /// `M v mod n`, written into `out` as residues in `[0, n)`.
    #[inline]
    fn mul_vec_into(&self, v: &[i64], n: usize, out: &mut [i64]) {
        let d = self.d;
        for (r, o) in out.iter_mut().enumerate() {
            let row = &self.entries[r * d..(r + 1) * d];
            let s: i64 = row.iter().zip(v).map(|(m, x)| m * x).sum();
            *o = s.rem_euclid(n as i64);
        }
    }

    /// `M^T v mod n` as residues in `[0, n)`.
    #[inline]
    fn mul_t_vec_into(&self, v: &[i64], n: usize, out: &mut [i64]) {
        let d = self.d;
        for (c, o) in out.iter_mut().enumerate() {
            let s: i64 = (0..d).map(|r| self.entries[r * d + c] * v[r]).sum();
            *o = s.rem_euclid(n as i64);
        }
    }
}

/// Whether `det(M)` is odd, by Gaussian elimination over GF(2).
pub fn det_parity(m: &Matrix) -> bool {
    let d = m.d;
    let mut rows: Vec<Vec<bool>> = (0..d)
        .map(|r| (0..d).map(|c| m.get(r, c).rem_euclid(2) == 1).collect())
        .collect();
    for col in 0..d {
        let Some(p) = (col..d).find(|&r| rows[r][col]) else {
            return false;
        };
        rows.swap(col, p);
        for r in col + 1..d {
            if rows[r][col] {
                for c in col..d {
                    let bit = rows[col][c];
                    rows[r][c] ^= bit;
                }
            }
        }
    }
    true
}

/// Uniform sample from the `d x d` matrices mod `n` with odd determinant.
///
/// Rejection sampling from uniform matrices; each draw is accepted with
/// probability above 0.288 for every `d`.
pub fn sample_sigma<R: Rng + ?Sized>(dims: GridDims, rng: &mut R) -> Matrix {
    let d = dims.d();
    let n = dims.n() as i64;
    loop {
        let entries = (0..d * d).map(|_| rng.random_range(0..n)).collect();
        let m = Matrix { d, entries };
        if det_parity(&m) {
            return m;
        }
    }
}

fn uniform_index<R: Rng + ?Sized>(dims: GridDims, rng: &mut R) -> GridIndex {
    let n = dims.n() as i64;
    GridIndex::new((0..dims.d()).map(|_| rng.random_range(0..n)), dims.n())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PermSpec {
    sigma: Matrix,
    q: GridIndex,
    a: GridIndex,
    dims: GridDims,
    /// `Sigma q mod n`, the modulation vector of `P`.
    sigma_q: Vec<i64>,
    /// `Sigma^T a mod n`, so that `a^T Sigma i = (Sigma^T a) . i`.
    sigma_t_a: Vec<i64>,
}

impl PermSpec {
    pub fn new(sigma: Matrix, q: GridIndex, a: GridIndex, dims: GridDims) -> Result<Self> {
        let d = dims.d();
        if sigma.d() != d || q.d() != d || a.d() != d {
            return Err(Error::param("permutation parts disagree on dimension"));
        }
        if !det_parity(&sigma) {
            return Err(Error::param("Sigma must have odd determinant"));
        }
        let n = dims.n();
        let sigma = Matrix {
            d,
            entries: sigma.entries.iter().map(|e| e.rem_euclid(n as i64)).collect(),
        };
        let q = GridIndex::new(q.coords().iter().copied(), n);
        let a = GridIndex::new(a.coords().iter().copied(), n);
        let mut sigma_q = vec![0; d];
        sigma.mul_vec_into(q.coords(), n, &mut sigma_q);
        let mut sigma_t_a = vec![0; d];
        sigma.mul_t_vec_into(a.coords(), n, &mut sigma_t_a);
        Ok(PermSpec {
            sigma,
            q,
            a,
            dims,
            sigma_q,
            sigma_t_a,
        })
    }

    /// The identity permutation: `Sigma = I`, `q = a = 0`.
    pub fn identity(dims: GridDims) -> Self {
        let d = dims.d();
        PermSpec::new(Matrix::identity(d), GridIndex::zero(d), GridIndex::zero(d), dims)
            .expect("identity has determinant 1")
    }

    /// Draws `Sigma`, `q` and `a` independently and uniformly.
    pub fn sample<R: Rng + ?Sized>(dims: GridDims, rng: &mut R) -> Self {
        let sigma = sample_sigma(dims, rng);
        let q = uniform_index(dims, rng);
        let a = uniform_index(dims, rng);
        PermSpec::new(sigma, q, a, dims).expect("sampled Sigma has odd determinant")
    }

    pub fn sigma(&self) -> &Matrix {
        &self.sigma
    }

    pub fn q(&self) -> &GridIndex {
        &self.q
    }

    pub fn a(&self) -> &GridIndex {
        &self.a
    }

    pub fn dims(&self) -> GridDims {
        self.dims
    }

    /// `pi(i) = Sigma (i - q) mod n`.
    pub fn apply_pi(&self, i: &GridIndex) -> GridIndex {
        let n = self.dims.n();
        let diff: Vec<i64> = i.coords().iter().zip(self.q.coords()).map(|(x, y)| x - y).collect();
        let mut out = vec![0; self.dims.d()];
        self.sigma.mul_vec_into(&diff, n, &mut out);
        GridIndex::new(out, n)
    }

    /// Flat position of `pi(i)` given the flat position of `i`.
    pub fn pi_flat(&self, flat: usize, scratch: &mut PiScratch) -> usize {
        let n = self.dims.n();
        let d = self.dims.d();
        if d == 1 {
            let i = flat as i64;
            let s = self.sigma.entries[0];
            return (s * (i - self.q.coords()[0])).rem_euclid(n as i64) as usize;
        }
        let mut rest = flat;
        for c in scratch.diff.iter_mut().rev() {
            *c = (rest % n) as i64;
            rest /= n;
        }
        for (c, q) in scratch.diff.iter_mut().zip(self.q.coords()) {
            *c -= q;
        }
        self.sigma.mul_vec_into(&scratch.diff, n, &mut scratch.out);
        flatten_coords(&scratch.out, n)
    }

    /// Exponent `e` (mod n) with `w^e = w^{a^T Sigma i}` for the index at `flat`.
    #[inline]
    pub fn phase_exponent_flat(&self, flat: usize) -> i64 {
        let n = self.dims.n();
        let mut rest = flat;
        let mut e = 0i64;
        for c in self.sigma_t_a.iter().rev() {
            e += c * (rest % n) as i64;
            rest /= n;
        }
        e.rem_euclid(n as i64)
    }

    /// `o_i(j) = pi(j) - pi(i)`.
    pub fn offset(&self, i: &GridIndex, j: &GridIndex) -> GridIndex {
        self.apply_pi(j).sub(&self.apply_pi(i), self.dims.n())
    }

    /// Flat position of the spectrum entry read for output slot `j`:
    /// `Sigma^T (j - a)`.
    pub fn source_flat(&self, j: &GridIndex) -> usize {
        let n = self.dims.n();
        let diff: Vec<i64> = j.coords().iter().zip(self.a.coords()).map(|(x, y)| x - y).collect();
        let mut out = vec![0; self.dims.d()];
        self.sigma.mul_t_vec_into(&diff, n, &mut out);
        flatten_coords(&out, n)
    }

    /// `w^{j^T Sigma q}` for output slot `j`.
    pub fn modulation(&self, j: &GridIndex, roots: &RootTable) -> Complex64 {
        let e: i64 = j.coords().iter().zip(&self.sigma_q).map(|(x, y)| x * y).sum();
        roots.pow(e)
    }

    /// `w^{a^T Sigma i}`.
    pub fn time_phase(&self, i: &GridIndex, roots: &RootTable) -> Complex64 {
        let e: i64 = i.coords().iter().zip(&self.sigma_t_a).map(|(x, y)| x * y).sum();
        roots.pow(e)
    }
}

/// Reusable buffers for [`PermSpec::pi_flat`].
#[derive(Debug, Clone)]
pub struct PiScratch {
    diff: Vec<i64>,
    out: Vec<i64>,
}

impl PiScratch {
    pub fn new(d: usize) -> Self {
        PiScratch {
            diff: vec![0; d],
            out: vec![0; d],
        }
    }
}

/// `(P x^)_i = x^_{Sigma^T (i - a)} w^{i^T Sigma q}` over the whole grid.
pub fn permute_spectrum(spec: &PermSpec, spectrum: &Signal) -> Result<Signal> {
    if spectrum.dims != spec.dims {
        return Err(Error::param("spectrum and permutation grids differ"));
    }
    let dims = spec.dims;
    let roots = RootTable::new(dims.n());
    let values = (0..dims.len())
        .map(|f| {
            let j = unflatten(f, dims);
            spectrum.values[spec.source_flat(&j)] * spec.modulation(&j, &roots)
        })
        .collect();
    Signal::new(dims, values, spectrum.domain)
}

/// `o_i(j)` as a free function.
pub fn offset(spec: &PermSpec, i: &GridIndex, j: &GridIndex) -> GridIndex {
    spec.offset(i, j)
}

pub fn apply_pi(spec: &PermSpec, i: &GridIndex) -> GridIndex {
    spec.apply_pi(i)
}

/// Canonicalized `Sigma v mod n`; used by the limited-independence checks.
pub fn sigma_times(sigma: &Matrix, v: &GridIndex, n: usize) -> GridIndex {
    let mut out = vec![0; sigma.d()];
    sigma.mul_vec_into(v.coords(), n, &mut out);
    GridIndex::new(out.into_iter().map(|c| canonical(c, n)), n)
}
