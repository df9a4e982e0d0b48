//! Sparse Fourier recovery with reused pseudorandom hashing.
//!
//! The crate recovers the dominant time-domain coefficients of a signal on
//! the grid `[n]^d` from a small number of samples of its spectrum:
//!
//! * [`grid`], [`dft`]: index arithmetic and the orthonormal FFT;
//! * [`permute`], [`filter`], [`hashing`]: the measurement primitive;
//! * [`recovery`], [`schedule`]: the peeling loop and its threshold strategies;
//! * [`bench`]: support-recovery experiments and their CSV/SVG output;
//! * [`selftest`]: named statistical and exact checks of the hashing machinery;
//! * [`signal_io`]: the on-disk signal format.

pub mod bench;
pub mod dft;
pub mod error;
pub mod filter;
pub mod grid;
pub mod hashing;
pub mod permute;
pub mod recovery;
pub mod registry;
pub mod schedule;
pub mod seed;
pub mod selftest;
pub mod signal_io;

pub use error::{Error, Result};
pub use grid::{Domain, GridDims, GridIndex, Signal};
pub use hashing::SampleOracle;
pub use recovery::{sparse_fft, Recovery, RecoveryParams, SparseEstimate};
pub use seed::Seed;
